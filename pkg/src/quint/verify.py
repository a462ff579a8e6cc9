"""Monte-Carlo checks of the estimators' probabilistic guarantees.

Each check embeds random bounded-degree graphs under fresh seeds, compares
sketch-based estimates with exact counts, and reports the observed failure
rate next to its bound. Rates are allowed ``3 sigma`` of binomial slack.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .embedding import compute_dimension, embed_graph, embed_node, NodeMapper
from .estimators import (
    estimate_common_neighbors_pairs,
    estimate_edge,
    estcn_matrix,
    _square_symmetric,
    degree_from_count,
    row_popcounts,
)
from .graph import Graph, common_neighbors_pairs, matrix_power_exact
from .synth import bounded_degree_graph


@dataclass
class CheckResult:
    name: str
    observed: float
    bound: float
    slack: float
    trials: int
    passed: bool
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: observed={self.observed:.6g} bound={self.bound:.6g} "
                f"slack={self.slack:.3g} trials={self.trials}")

    def to_dict(self) -> dict:
        return asdict(self)


def binomial_slack(p: float, trials: int, sigmas: float = 3.0) -> float:
    p = min(max(p, 0.0), 1.0)
    return sigmas * math.sqrt(p * (1 - p) / max(trials, 1))


def _seeds(seed: int, k: int) -> list[int]:
    return np.random.default_rng(seed).integers(0, 2 ** 63, size=k).tolist()


def degree_window(psi: int, delta: float) -> float:
    return 4.0 * math.sqrt(psi / 2.0 * math.log(2.0 / delta))


def cn_window(psi: int, rho: float) -> float:
    return 14.0 * math.sqrt(psi / 2.0 * math.log(6.0 / rho))


def zero_rule_bound(psi: int, rho: float) -> float:
    return math.sqrt(2.0 / (psi * math.log(2.0 / rho)))


def loss_bound(psi: int, rho: float) -> float:
    return 196.0 * psi / 2.0 * math.log(6.0 / rho)


def check_degree(psi: int, delta: float, runs: int = 50, n: int = 400, seed: int = 0) -> CheckResult:
    """Fraction of nodes whose degree estimate misses by more than the window."""
    d = compute_dimension(psi, delta)
    window = degree_window(psi, delta)
    bad = total = 0
    abs_err = []
    for s in _seeds(seed, runs):
        g = bounded_degree_graph(n, psi, s, spread=True)
        es = embed_graph(g, d, s ^ 0x5EED)
        err = np.abs(degree_from_count(row_popcounts(es), d) - g.degrees())
        bad += int((err > window).sum())
        total += g.n
        abs_err.append(err)
    frac = bad / total
    slack = binomial_slack(delta, total)
    return CheckResult("degree", frac, delta, slack, total, frac <= delta + slack,
                       {"d": d, "window": window, "mae": float(np.concatenate(abs_err).mean())})


def check_edge(psi: int, d: int, trials: int = 100_000, seed: int = 0, n: int = 200) -> CheckResult:
    """Edge test: no false negatives; false positives within ``2 psi / d``.

    Each trial draws a fresh bucket map and one non-adjacent pair of a
    random ``psi``-regular graph, re-embedding just the two endpoints.
    """
    rng = np.random.default_rng(seed)
    n_graphs = 20
    graphs = [bounded_degree_graph(n, psi, int(s)) for s in rng.integers(0, 2 ** 63, n_graphs)]
    false_neg = 0
    for k, g in enumerate(graphs):
        es = embed_graph(g, d, k)
        mapper = es.mapper
        for i, j in g.edges:
            if not estimate_edge(es[i], es[j], int(i), int(j), mapper):
                false_neg += 1
    false_pos = 0
    gi = rng.integers(0, n_graphs, size=trials)
    nodes = rng.integers(0, n, size=(trials, 2))
    map_seeds = rng.integers(0, 2 ** 63, size=trials)
    done = 0
    for t in range(trials):
        g = graphs[gi[t]]
        i, j = int(nodes[t, 0]), int(nodes[t, 1])
        if i == j or g.has_edge(i, j):
            continue
        mapper = NodeMapper(int(map_seeds[t]), d)
        if estimate_edge(embed_node(g.neighbors(i), mapper), embed_node(g.neighbors(j), mapper), i, j, mapper):
            false_pos += 1
        done += 1
    bound = 2.0 * psi / d
    rate = false_pos / done
    slack = binomial_slack(bound, done)
    return CheckResult("edge", rate, bound, slack, done, false_neg == 0 and rate <= bound + slack,
                       {"false_negatives": false_neg, "d": d})


def _sample_pairs(g: Graph, count: int, rng: np.random.Generator) -> np.ndarray:
    """Half two-hop pairs (sharing a neighbor), half uniform pairs, ``i != j``."""
    half = count // 2
    mids = rng.integers(0, g.n, size=half * 2)
    deg = g.degrees()
    mids = mids[deg[mids] >= 2][:half]
    two_hop = []
    for m in mids:
        nb = g.neighbors(int(m))
        a, b = rng.choice(len(nb), size=2, replace=False)
        two_hop.append((nb[a], nb[b]))
    u = rng.integers(0, g.n, size=(count - len(two_hop)) * 2).reshape(-1, 2)
    u = u[u[:, 0] != u[:, 1]]
    pairs = np.concatenate([np.asarray(two_hop, dtype=np.int64).reshape(-1, 2), u])
    return pairs


def check_cn_window(psi: int, rho: float, pairs: int = 2000, seed: int = 0, n: int = 400,
                    per_graph: int = 200) -> CheckResult:
    """Fraction of pairs whose common-neighbor estimate leaves the window; MAE."""
    d = compute_dimension(psi, rho)
    window = cn_window(psi, rho)
    runs = max(1, math.ceil(pairs / per_graph))
    errs = []
    for s in _seeds(seed, runs):
        rng = np.random.default_rng(s)
        g = bounded_degree_graph(n, psi, s)
        es = embed_graph(g, d, s ^ 0xC0FFEE)
        p = _sample_pairs(g, per_graph, rng)
        est, _ = estimate_common_neighbors_pairs(es, p)
        errs.append(est - common_neighbors_pairs(g, p))
    err = np.abs(np.concatenate(errs))
    frac = float((err >= window).mean())
    slack = binomial_slack(rho, len(err))
    return CheckResult("cn_window", frac, rho, slack, len(err), frac <= rho + slack,
                       {"d": d, "window": window, "mae": float(err.mean()), "max_abs_err": float(err.max())})


def check_zero_rule(psi: int, rho: float, pairs: int = 20_000, seed: int = 0, n: int = 2000,
                    per_graph: int = 2000) -> CheckResult:
    """Among pairs with no common neighbor: rate of positive estimates.

    Also counts violations of the exact rule (zero overlap gives exactly 0)
    and of positivity (common neighbor present but estimate not positive).
    """
    d = compute_dimension(psi, rho)
    runs = max(1, math.ceil(pairs / per_graph))
    pos = zero_pairs = exact_violations = positivity_violations = 0
    for s in _seeds(seed, runs):
        rng = np.random.default_rng(s)
        g = bounded_degree_graph(n, psi, s)
        es = embed_graph(g, d, s ^ 0xBADC0DE)
        p = _sample_pairs(g, per_graph, rng)
        est, overlap = estimate_common_neighbors_pairs(es, p)
        cn = common_neighbors_pairs(g, p)
        exact_violations += int(((overlap == 0) & (est != 0)).sum())
        positivity_violations += int(((cn > 0) & ~(est > 0)).sum())
        z = cn == 0
        pos += int((est[z] > 0).sum())
        zero_pairs += int(z.sum())
    bound = zero_rule_bound(psi, rho)
    rate = pos / max(zero_pairs, 1)
    slack = binomial_slack(bound, zero_pairs)
    ok = rate <= bound + slack and exact_violations == 0 and positivity_violations == 0
    return CheckResult("zero_rule", rate, bound, slack, zero_pairs, ok,
                       {"d": d, "exact_violations": exact_violations,
                        "positivity_violations": positivity_violations})


def check_loss(psi: int, rho: float, runs: int = 100, seed: int = 0, n: int = 400,
               per_graph: int = 200) -> CheckResult:
    """Mean squared estimation error per run against the loss bound (every run must pass)."""
    d = compute_dimension(psi, rho)
    losses = []
    for s in _seeds(seed, runs):
        rng = np.random.default_rng(s)
        g = bounded_degree_graph(n, psi, s)
        es = embed_graph(g, d, s ^ 0x1055)
        p = _sample_pairs(g, per_graph, rng)
        est, _ = estimate_common_neighbors_pairs(es, p)
        losses.append(float(np.mean((est - common_neighbors_pairs(g, p)) ** 2)))
    bound = loss_bound(psi, rho)
    worst = max(losses)
    return CheckResult("loss", worst, bound, 0.0, runs, worst <= bound,
                       {"d": d, "mean_loss": float(np.mean(losses))})


def component_graph(n_components: int, size: int, psi: int, seed: int) -> Graph:
    """Disjoint union of random bounded-degree components (gives true zeros in A^4)."""
    rng = np.random.default_rng(seed)
    edges = []
    for c in range(n_components):
        sub = bounded_degree_graph(size, psi, int(rng.integers(0, 2 ** 63)), spread=True)
        edges.append(sub.edges + c * size)
    return Graph.from_edges(n_components * size, np.concatenate(edges))


def check_power4(psi: int, rho: float, runs: int = 20, seed: int = 0, n_components: int = 8,
                 size: int = 8, min_spearman: float = 0.0) -> CheckResult:
    """Fourth-power estimates on small graphs.

    For pairs with a true zero, the rate of nonzero estimates is compared
    with a union bound built from the observed per-term false-positive rate
    of the second-order estimates. Also reports Spearman correlation with
    the exact fourth power over all pairs.
    """
    d = compute_dimension(psi, rho)
    nonzero = zeros = 0
    predicted = []
    rhos = []
    for s in _seeds(seed, runs):
        g = component_graph(n_components, size, psi, s)
        es = embed_graph(g, d, s ^ 0xA4)
        m2 = estcn_matrix(es)
        a2 = matrix_power_exact(g, 1)
        a4 = a2 @ a2
        est4 = _square_symmetric(m2)
        est_nz = m2 != 0
        fp2 = est_nz & (a2 == 0)
        q = fp2.sum() / max((a2 == 0).sum(), 1)
        iz, jz = np.nonzero(a4 == 0)
        zeros += len(iz)
        nonzero += int((est4[iz, jz] != 0).sum())
        # per pair: terms with one true side need one false positive, others two
        one = ((a2[iz] > 0) | (a2[jz] > 0)).sum(axis=1)
        both = a2.shape[0] - one
        predicted.append(np.minimum(1.0, one * q + both * q * q))
        iu = np.triu_indices(g.n)
        r = spearmanr(est4[iu], a4[iu]).statistic
        rhos.append(0.0 if np.isnan(r) else float(r))
    rate = nonzero / max(zeros, 1)
    bound = float(np.concatenate(predicted).mean()) if predicted else 0.0
    slack = binomial_slack(max(bound, 1.0 / max(zeros, 1)), zeros)
    spear = float(np.mean(rhos))
    ok = rate <= bound + slack and spear >= min_spearman
    return CheckResult("power4_zero_rule", rate, bound, slack, zeros, ok,
                       {"d": d, "spearman_mean": spear, "spearman_min": float(np.min(rhos))})


def run_suite(psi: int, rho: float, trials: int, seed: int, delta: float | None = None) -> list[CheckResult]:
    """All checks, scaled by ``trials`` (pairs for pair-level checks)."""
    delta = rho if delta is None else delta
    d_edge = compute_dimension(psi, rho)
    return [
        check_degree(psi, delta, runs=max(1, trials // 40), seed=seed),
        check_edge(psi, d_edge, trials=max(1000, trials * 5), seed=seed),
        check_cn_window(psi, rho, pairs=trials, seed=seed),
        check_zero_rule(psi, rho, pairs=max(trials * 5, 2000), seed=seed),
        check_loss(psi, rho, runs=max(1, trials // 20), seed=seed),
        check_power4(min(psi, 4), rho, runs=max(1, trials // 200), seed=seed),
    ]
