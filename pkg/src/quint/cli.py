"""Command-line entry point: ``quint {gen,embed,estimate,linkpred,nodeclass,verify,bench}``.

Every subcommand prints one JSON object on stdout; logs go to stderr.
Exit codes: 0 ok, 1 usage, 2 I/O or format error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import bench, verify
from .embedding import SketchFormatError, compute_dimension, embed_graph, load_embeddings, save_embeddings
from .estimators import degree_from_count, estimate_common_neighbors, estimate_edge, row_popcounts
from .eval.logistic import LogisticHyper
from .eval.pipelines import LinkPredConfig, NodeClassConfig, run_link_prediction, run_node_classification
from .graph import GraphFormatError, load_edge_list, load_id_map, max_degree, save_edge_list, save_id_map
from .labels import load_labels, save_labels
from .synth import MODELS, SynthConfig, generate

log = logging.getLogger("quint")

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("QUINT_THREADS", "1")))
    except ValueError:
        return 1


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


@contextmanager
def _output_guard(*paths):
    """Delete the named output files if the body fails."""
    try:
        yield
    except BaseException:
        for p in paths:
            if p and os.path.exists(p):
                os.remove(p)
        raise


def _add_dim_rho(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--dim", type=int, help="embedding dimension d")
    g.add_argument("--rho", type=float, help="error probability; d derived from max degree")


def _add_lr(p: argparse.ArgumentParser) -> None:
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--omit-timings", action="store_true", help="zero timing fields for byte-stable output")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="quint", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a synthetic graph")
    p.add_argument("--model", choices=MODELS, default="planted_partition")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--communities", type=int, default=1)
    p.add_argument("--p-in", type=float)
    p.add_argument("--p-out", type=float, default=0.0)
    p.add_argument("--avg-degree", type=float, help="with --mu, derive p-in/p-out")
    p.add_argument("--mu", type=float, default=0.1)
    p.add_argument("--tau", type=float, default=2.0)
    p.add_argument("--psi-max", type=int)
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--output", required=True)
    p.add_argument("--labels")

    p = sub.add_parser("embed", help="embed an edge list into a QNTS sketch file")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    _add_dim_rho(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--id-map", help="write internal<TAB>external sidecar here")
    p.add_argument("--omit-timings", action="store_true")

    p = sub.add_parser("estimate", help="estimate degree, edge presence or common neighbors")
    p.add_argument("what", choices=("cn", "degree", "edge"))
    p.add_argument("--emb", required=True)
    p.add_argument("--id-map", help="interpret node ids as external ids via this sidecar")
    p.add_argument("--nodes", type=int, nargs="*", help="degree: nodes to report (default all)")
    p.add_argument("--pairs", nargs="*", default=[], help="cn/edge: pairs as i,j")

    for name, helptext in (("linkpred", "link-prediction evaluation"), ("nodeclass", "node-classification evaluation")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--input", required=True)
        _add_dim_rho(p, required=False)
        p.add_argument("--seed", type=int, required=True)
        p.add_argument("--features", choices=("quint", "uncompressed"), default="quint")
        p.add_argument("--threads", type=int, default=_default_threads())
        _add_lr(p)
        if name == "linkpred":
            p.add_argument("--similarity", choices=("estcn", "inner", "cosine", "l1", "l2"), default="estcn")
            p.add_argument("--test-fraction", type=float, default=0.3)
        else:
            p.add_argument("--labels", required=True)
            p.add_argument("--train-fraction", type=float, default=0.7)
            p.add_argument("--repeats", type=int, default=10)

    p = sub.add_parser("verify", help="Monte-Carlo check of the estimator guarantees")
    p.add_argument("--psi", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--delta", type=float, help="failure probability for the degree check (default rho)")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, required=True)

    p = sub.add_parser("bench", help="synthetic scalability sweep and embedding throughput")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sizes", type=int, nargs="+", default=[10_000, 20_000, 50_000])
    p.add_argument("--dims", type=int, nargs="+", default=[1000])
    p.add_argument("--avg-degree", type=float, default=20.0)
    p.add_argument("--mu", type=float, default=0.1)
    p.add_argument("--communities", type=int, default=10)
    p.add_argument("--threads", type=int, default=_default_threads())
    p.add_argument("--throughput-nodes", type=int, default=50_000)
    p.add_argument("--throughput-edges", type=int, nargs="+", default=[200_000, 1_000_000])
    p.add_argument("--throughput-dim", type=int, default=1000)
    return ap


def _hyper(a) -> LogisticHyper:
    return LogisticHyper(l2=a.l2, lr=a.lr, epochs=a.epochs)


def cmd_gen(a) -> int:
    if a.model == "planted_partition":
        if a.avg_degree is not None:
            cfg = SynthConfig.from_mixing(a.n, a.communities, a.avg_degree, a.mu, a.seed)
        elif a.p_in is not None:
            cfg = SynthConfig("planted_partition", a.n, a.seed, communities=a.communities,
                              p_in=a.p_in, p_out=a.p_out)
        else:
            raise UsageError("planted_partition needs --p-in or --avg-degree")
    else:
        cfg = SynthConfig("power_law_config", a.n, a.seed, tau=a.tau, psi_max=a.psi_max, k_min=a.k_min)
    g, labels = generate(cfg)
    with _output_guard(a.output, a.labels):
        save_edge_list(g, a.output)
        if a.labels:
            save_labels(labels, a.labels)
    _emit({"task": "gen", "model": a.model, "n": g.n, "edges": g.num_edges, "psi": max_degree(g), "seed": a.seed})
    return EXIT_OK


def cmd_embed(a) -> int:
    g = load_edge_list(a.input)
    psi = max_degree(g)
    d = a.dim if a.dim is not None else compute_dimension(psi, a.rho)
    if d < 1:
        raise UsageError("--dim must be >= 1")
    t0 = time.perf_counter()
    es = embed_graph(g, d, a.seed, threads=a.threads, rho=a.rho)
    elapsed = time.perf_counter() - t0
    with _output_guard(a.output, a.id_map):
        save_embeddings(es, a.output)
        if a.id_map:
            save_id_map(g, a.id_map)
    log.info("embedded %d nodes, %d edges at d=%d", g.n, g.num_edges, d)
    _emit({"task": "embed", "n": g.n, "edges": g.num_edges, "dim": d, "psi": psi, "seed": a.seed,
           "rho": a.rho, "compression_time_s": 0.0 if a.omit_timings else elapsed})
    return EXIT_OK


def _parse_pairs(tokens) -> list[tuple[int, int]]:
    out = []
    for t in tokens:
        try:
            i, j = (int(x) for x in t.split(","))
        except ValueError:
            raise UsageError(f"bad pair {t!r}; expected i,j") from None
        out.append((i, j))
    return out


def cmd_estimate(a) -> int:
    es = load_embeddings(a.emb)
    if a.id_map:
        ext = {int(e): k for k, e in enumerate(load_id_map(a.id_map).tolist())}
        resolve = lambda u: ext[u] if u in ext else _bad_node(u)
    else:
        resolve = lambda u: u if 0 <= u < es.n else _bad_node(u)

    if a.what == "degree":
        nodes = list(range(es.n)) if not a.nodes else a.nodes
        internal = [resolve(u) for u in nodes]
        est = degree_from_count(row_popcounts(es)[internal], es.d) if internal else []
        _emit({"task": "estimate", "what": "degree", "dim": es.d,
               "estimates": [{"node": u, "degree": float(v)} for u, v in zip(nodes, est)]})
        return EXIT_OK

    pairs = _parse_pairs(a.pairs)
    if not pairs:
        raise UsageError("--pairs is required for cn/edge")
    rows = []
    mapper = es.mapper
    for i, j in pairs:
        u, v = resolve(i), resolve(j)
        if a.what == "cn":
            e = estimate_common_neighbors(es[u], es[v])
            rows.append({"i": i, "j": j, "cn": e.value, "clamped": e.clamped, "raw_overlap": e.raw_overlap,
                         "deg_i": e.deg_i_hat, "deg_j": e.deg_j_hat})
        else:
            rows.append({"i": i, "j": j, "edge": bool(estimate_edge(es[u], es[v], u, v, mapper))})
    _emit({"task": "estimate", "what": a.what, "dim": es.d, "estimates": rows})
    return EXIT_OK


def _bad_node(u):
    raise UsageError(f"unknown node id {u}")


def _dim_or_rho(a):
    if a.features == "quint" and a.dim is None and a.rho is None:
        raise UsageError("quint features need --dim or --rho")
    return a.dim, a.rho


def cmd_linkpred(a) -> int:
    g = load_edge_list(a.input)
    dim, rho = _dim_or_rho(a)
    cfg = LinkPredConfig(seed=a.seed, dim=dim, rho=rho, similarity=a.similarity, features=a.features,
                         test_fraction=a.test_fraction, hyper=_hyper(a), threads=a.threads)
    rep = run_link_prediction(g, cfg)
    sys.stdout.write(rep.to_json(timings=not a.omit_timings) + "\n")
    return EXIT_OK


def cmd_nodeclass(a) -> int:
    g = load_edge_list(a.input)
    labels = load_labels(a.labels, g)
    dim, rho = _dim_or_rho(a)
    cfg = NodeClassConfig(seed=a.seed, dim=dim, rho=rho, features=a.features, train_fraction=a.train_fraction,
                          repeats=a.repeats, hyper=_hyper(a), threads=a.threads)
    rep = run_node_classification(g, labels, cfg)
    sys.stdout.write(rep.to_json(timings=not a.omit_timings) + "\n")
    return EXIT_OK


def cmd_verify(a) -> int:
    if not 0 < a.rho < 1 or a.psi < 1:
        raise UsageError("need --psi >= 1 and 0 < --rho < 1")
    results = verify.run_suite(a.psi, a.rho, a.trials, a.seed, delta=a.delta)
    for r in results:
        print(r.line(), file=sys.stderr)
    ok = all(r.passed for r in results)
    _emit({"task": "verify", "psi": a.psi, "rho": a.rho, "trials": a.trials, "seed": a.seed,
           "passed": ok, "checks": [r.to_dict() for r in results]})
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_bench(a) -> int:
    rows = bench.sweep(a.sizes, a.dims, a.seed, avg_degree=a.avg_degree, mu=a.mu,
                       communities=a.communities, threads=a.threads)
    for r in rows:
        print(f"n={r['n']} edges={r['edges']} d={r['dim']} auc={r['auc_roc']:.4f} "
              f"embed={r['compression_time_s']:.3f}s", file=sys.stderr)
    tput = bench.edge_sweep(a.throughput_nodes, a.throughput_edges, a.throughput_dim, a.seed,
                            mu=a.mu, communities=a.communities)
    _emit({"task": "bench", "seed": a.seed, "rows": rows, "throughput": tput,
           "per_edge_time_ratio": bench.per_edge_time_ratio(tput)})
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "embed": cmd_embed,
    "estimate": cmd_estimate,
    "linkpred": cmd_linkpred,
    "nodeclass": cmd_nodeclass,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[a.command](a)
    except UsageError as e:
        print(f"quint {a.command}: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, GraphFormatError, SketchFormatError) as e:
        print(f"quint {a.command}: {e}", file=sys.stderr)
        return EXIT_IO
    except ValueError as e:
        print(f"quint {a.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
