import io
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from quint.embedding import (
    EmbeddingSet,
    NodeMapper,
    Sketch,
    SketchFormatError,
    TableMapper,
    apply_edge_update,
    bucket_hash,
    compute_dimension,
    embed_graph,
    embed_graph_rho,
    embed_node,
    load_embeddings,
    merge_sketches,
    save_embeddings,
)
from quint.graph import Graph, max_degree
from quint.synth import bounded_degree_graph, erdos_renyi

from conftest import brute_force_sketch_bits

# bucket map for a six-node hand-checkable example, 1-indexed: 1->1 2->3 3->2 4->2 5->3 6->2
SIX_NODE_TABLE = [0, 2, 1, 1, 2, 1]


def test_dimension_unit_case():
    assert compute_dimension(1, 2 / np.e ** 2) == 1


def test_dimension_frozen_values():
    # ceil(256 sqrt(8 ln 20)) and ceil(256 sqrt(8 ln 10)), evaluated with mpmath at 50 digits
    assert compute_dimension(16, 0.1) == 1254
    assert compute_dimension(16, 0.2) == 1099


def test_dimension_errors():
    assert compute_dimension(0, 0.5) == 1
    for rho in (0.0, 1.0, -0.1, 2.0):
        with pytest.raises(ValueError):
            compute_dimension(4, rho)


def test_six_node_hand_example():
    mapper = TableMapper(SIX_NODE_TABLE, 3)
    # node 1 (0-indexed 0) with neighbors 2, 4, 5 (0-indexed 1, 3, 4)
    s = embed_node([1, 3, 4], mapper)
    assert s.to_bits().astype(int).tolist() == [0, 1, 1]
    g = Graph.from_edges(6, [(0, 1), (0, 3), (0, 4)])
    es = embed_graph(g, mapper=mapper)
    assert es[0] == s


def test_six_node_matrix_product_view():
    # P has one 1 per column, at the row given by the mapping; Boolean product with A_i
    p = np.zeros((3, 6), dtype=bool)
    p[SIX_NODE_TABLE, np.arange(6)] = True
    a_row = np.array([0, 1, 0, 1, 1, 0], dtype=bool)
    boolean_product = (p & a_row).any(axis=1)
    assert boolean_product.astype(int).tolist() == [0, 1, 1]


def test_isolated_and_trivial_nodes():
    mapper = NodeMapper(7, 100)
    assert embed_node([], mapper) == Sketch.zeros(100)
    full = embed_node(range(20), NodeMapper(3, 1))
    assert full.to_bits().tolist() == [True]
    g = Graph.from_edges(5, [(0, 1)])
    es = embed_graph(g, 77, seed=1)
    for u in (2, 3, 4):
        assert not es[u].to_bits().any()


def test_mapper_pure_and_in_range():
    keys = np.arange(10_000, dtype=np.uint64)
    a = NodeMapper(123, 997)(keys)
    b = NodeMapper(123, 997)(keys)
    assert np.array_equal(a, b)
    assert a.min() >= 0 and a.max() < 997
    assert not np.array_equal(a, NodeMapper(124, 997)(keys))
    assert NodeMapper(123, 997)(5) == int(a[5])


def test_mapper_roughly_uniform():
    counts = np.bincount(bucket_hash(np.arange(200_000, dtype=np.uint64), 9, 50), minlength=50)
    expected = 200_000 / 50
    chi2 = ((counts - expected) ** 2 / expected).sum()
    # 49 dof: mean 49, sd ~10
    assert chi2 < 49 + 6 * 10


def test_mulhi_reduction_exact():
    rng = np.random.default_rng(0)
    h = rng.integers(0, 2 ** 64, size=2000, dtype=np.uint64)
    from quint.embedding import _mulhi_u64
    for d in (1, 3, 1000, 2 ** 32 - 1):
        got = _mulhi_u64(h, d)
        want = [(int(x) * d) >> 64 for x in h]
        assert got.tolist() == want


@pytest.mark.parametrize("seed", range(3))
def test_embed_matches_brute_force(seed):
    g = bounded_degree_graph(100, 10, seed, spread=True)
    d = 64
    es = embed_graph(g, d, seed)
    want = brute_force_sketch_bits(g.dense_adjacency(), NodeMapper(seed, d).table(g.n), d)
    assert np.array_equal(es.to_bits(), want)


def test_padding_bits_zero_and_popcount_bound():
    g = erdos_renyi(80, 0.2, 3)
    es = embed_graph(g, 70, seed=4)
    # bits 70..127 of the last word must stay clear
    assert (es.words[:, 1] >> np.uint64(6)).max() == 0
    pc = np.bitwise_count(es.words).sum(axis=1)
    assert (pc <= np.minimum(g.degrees(), 70)).all()


def test_popcount_equals_degree_when_injective():
    g = Graph.from_edges(4, [(0, 1), (0, 2), (0, 3)])
    es = embed_graph(g, mapper=TableMapper([0, 1, 2, 3], 4))
    assert np.bitwise_count(es.words[0]).sum() == 3


def test_thread_count_does_not_change_bytes():
    g = erdos_renyi(500, 0.05, 1)
    one = embed_graph(g, 300, seed=99, threads=1)
    for t in (2, 3, 8):
        assert one == embed_graph(g, 300, seed=99, threads=t)


def test_rebuild_from_header_fields():
    g = erdos_renyi(60, 0.1, 5)
    es = embed_graph(g, 200, seed=31337)
    mapper = NodeMapper(es.seed, es.d)
    for u in range(g.n):
        assert embed_node(g.neighbors(u), mapper) == es[u]


def test_embed_with_rho_records_parameters():
    g = bounded_degree_graph(60, 4, 1)
    es = embed_graph_rho(g, 0.2, seed=1)
    assert es.rho == 0.2
    assert es.psi == max_degree(g)
    assert es.d == compute_dimension(max_degree(g), 0.2)


def test_merge_basics(rng):
    x = Sketch.from_bits(rng.random(150) < 0.3)
    assert merge_sketches(x, Sketch.zeros(150)) == x
    assert merge_sketches(x, x) == x
    with pytest.raises(ValueError):
        merge_sketches(x, Sketch.zeros(151))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 500), max_size=40, unique=True), st.integers(0, 2 ** 64 - 1),
       st.integers(1, 300), st.randoms(use_true_random=False))
def test_merge_equals_union_embedding(neighbors, seed, d, rnd):
    mapper = NodeMapper(seed, d)
    s1 = [k for k in neighbors if rnd.random() < 0.5]
    s2 = [k for k in neighbors if k not in s1]
    assert merge_sketches(embed_node(s1, mapper), embed_node(s2, mapper)) == embed_node(neighbors, mapper)


def test_edge_update_on_edgeless_graph():
    es = embed_graph(Graph.from_edges(4, []), 50, seed=2)
    m = es.mapper
    apply_edge_update(es, 0, 1)
    assert np.flatnonzero(es[0].to_bits()).tolist() == [m(1)]
    assert np.flatnonzero(es[1].to_bits()).tolist() == [m(0)]
    before = es.copy()
    apply_edge_update(es, 0, 1)
    assert es == before
    with pytest.raises(ValueError):
        apply_edge_update(es, 2, 2)


@pytest.mark.parametrize("seed", range(5))
def test_edge_update_equals_reembedding(seed):
    rng = np.random.default_rng(seed)
    g = erdos_renyi(40, 0.1, seed)
    es = embed_graph(g, 90, seed=seed)
    for _ in range(10):
        i, j = rng.choice(40, size=2, replace=False)
        apply_edge_update(es, int(i), int(j))
        g = g.with_edges([(i, j)])
        assert np.array_equal(es.words, embed_graph(g, 90, seed=seed).words)


def test_save_load_round_trip(tmp_path):
    g = erdos_renyi(33, 0.2, 8)
    for es in (embed_graph(g, 130, seed=2 ** 64 - 5), embed_graph_rho(g, 0.3, seed=1)):
        buf = io.BytesIO()
        save_embeddings(es, buf)
        assert len(buf.getvalue()) == 49 + es.n * ((es.d + 63) // 64) * 8
        buf.seek(0)
        back = load_embeddings(buf)
        assert back == es
        assert back.words.tobytes() == es.words.tobytes()
    save_embeddings(es, tmp_path / "s.qnts")
    assert load_embeddings(tmp_path / "s.qnts") == es


def test_header_layout():
    es = EmbeddingSet(np.array([[1], [2]], dtype=np.uint64), 10, 5, 3, None)
    buf = io.BytesIO()
    save_embeddings(es, buf)
    raw = buf.getvalue()
    assert raw[:4] == b"QNTS"
    assert int.from_bytes(raw[4:8], "little") == 1
    assert int.from_bytes(raw[8:16], "little") == 2
    assert int.from_bytes(raw[16:24], "little") == 10
    assert int.from_bytes(raw[24:32], "little") == 5
    assert int.from_bytes(raw[32:40], "little") == 3
    assert raw[40] == 0
    assert int.from_bytes(raw[49:57], "little") == 1


def test_bad_magic_and_truncation():
    es = embed_graph(erdos_renyi(20, 0.3, 1), 200, seed=1)
    buf = io.BytesIO()
    save_embeddings(es, buf)
    raw = buf.getvalue()
    with pytest.raises(SketchFormatError, match="magic"):
        load_embeddings(io.BytesIO(b"XXXX" + raw[4:]))
    with pytest.raises(SketchFormatError, match="version"):
        load_embeddings(io.BytesIO(raw[:4] + (2).to_bytes(4, "little") + raw[8:]))
    row_bytes = 4 * 8
    cut = 49 + 7 * row_bytes + 5
    with pytest.raises(SketchFormatError, match="row 7"):
        load_embeddings(io.BytesIO(raw[:cut]))
    with pytest.raises(SketchFormatError, match="header"):
        load_embeddings(io.BytesIO(raw[:20]))


def test_table_mapper_embeddings_not_saveable():
    es = embed_graph(Graph.from_edges(6, [(0, 1)]), mapper=TableMapper(SIX_NODE_TABLE, 3))
    with pytest.raises(ValueError):
        save_embeddings(es, io.BytesIO())


@pytest.mark.slow
def test_linear_time_in_edges():
    from quint.bench import edge_sweep, per_edge_time_ratio
    rows = edge_sweep(20_000, [200_000, 2_000_000], 512, seed=1)
    # loose: timing noise on shared machines, the point is no superlinear growth
    assert per_edge_time_ratio(rows) <= 3.0
