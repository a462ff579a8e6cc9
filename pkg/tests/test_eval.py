import itertools

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from quint.eval import (
    LinkPredConfig,
    LogisticHyper,
    NodeClassConfig,
    SplitError,
    auc_roc,
    loss_and_grad,
    micro_macro_f1,
    run_link_prediction,
    run_node_classification,
    sample_negative_edges,
    split_link_prediction,
    train_logistic,
)
from quint.eval.logistic import standardization
from quint.eval.metrics import f1_from_indicators
from quint.graph import Graph
from quint.labels import LabelSet
from quint.synth import SynthConfig, bounded_degree_graph, erdos_renyi, generate


def pairwise_auc(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y]
    neg = [s for s, y in zip(scores, labels) if not y]
    total = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return total / (len(pos) * len(neg))


def definitional_f1(pred, truth):
    """Per-class and pooled F1 straight from counts, one loop per cell."""
    n, c = truth.shape
    per, TP, FP, FN = [], 0, 0, 0
    for k in range(c):
        tp = sum(pred[i, k] and truth[i, k] for i in range(n))
        fp = sum(pred[i, k] and not truth[i, k] for i in range(n))
        fn = sum(truth[i, k] and not pred[i, k] for i in range(n))
        per.append(0.0 if 2 * tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn))
        TP, FP, FN = TP + tp, FP + fp, FN + fn
    micro = 0.0 if 2 * TP + FP + FN == 0 else 2 * TP / (2 * TP + FP + FN)
    return micro, sum(per) / c


def connected_components(g: Graph) -> int:
    from scipy.sparse.csgraph import connected_components as cc
    return cc(g.adjacency(), directed=False)[0]


# --- splits -----------------------------------------------------------------

@pytest.mark.parametrize("seed", range(100))
def test_split_invariants(seed):
    g = bounded_degree_graph(500, 20, seed, spread=True)
    s = split_link_prediction(g, 0.3, seed)
    m = g.num_edges
    assert len(s.pos_test) == round(0.3 * m)
    assert len(s.pos_train) + len(s.pos_test) == m
    keys = lambda a: set(map(tuple, a.tolist()))
    assert keys(s.pos_train) | keys(s.pos_test) == keys(g.edges)
    assert not keys(s.pos_train) & keys(s.pos_test)
    assert s.residual_graph.num_edges == len(s.pos_train)
    assert connected_components(s.residual_graph) == connected_components(g)
    neg = np.concatenate([s.neg_train, s.neg_test])
    assert len(neg) == m and len(keys(neg)) == m
    assert not keys(neg) & keys(g.edges)
    assert (neg[:, 0] < neg[:, 1]).all()
    assert len(s.neg_test) == round(0.3 * m)


def test_split_deterministic():
    g = erdos_renyi(120, 0.1, 3)
    a, b = split_link_prediction(g, 0.3, 5), split_link_prediction(g, 0.3, 5)
    for f in ("pos_train", "pos_test", "neg_train", "neg_test"):
        assert np.array_equal(getattr(a, f), getattr(b, f))
    c = split_link_prediction(g, 0.3, 6)
    assert not np.array_equal(a.pos_test, c.pos_test)


def test_split_tree_has_no_spare_edges():
    path = Graph.from_edges(10, [(i, i + 1) for i in range(9)])
    with pytest.raises(SplitError, match="deficit 3"):
        split_link_prediction(path, 0.3, 0)


def test_split_triangle():
    tri = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    # round(0.3 * 3) = 1 test edge and the two forest edges stay
    s = split_link_prediction(tri, 0.3, 1)
    assert len(s.pos_test) == 1 and s.residual_graph.num_edges == 2
    assert connected_components(s.residual_graph) == 1
    # a triangle has no non-edges, so the negative sets come out empty
    assert len(s.neg_train) == len(s.neg_test) == 0
    with pytest.raises(SplitError):
        sample_negative_edges(tri, 3, 0)


def test_split_errors():
    g = Graph.from_edges(4, [(0, 1)])
    with pytest.raises(SplitError):
        split_link_prediction(g, 0.3, 0)
    with pytest.raises(SplitError):
        split_link_prediction(erdos_renyi(30, 0.3, 1), 1.0, 0)


def test_negative_sampling_edge_cases():
    k4 = Graph.from_edges(4, list(itertools.combinations(range(4), 2)))
    with pytest.raises(SplitError):
        sample_negative_edges(k4, 1, 0)
    assert sample_negative_edges(k4, 0, 0).shape == (0, 2)
    empty3 = Graph.from_edges(3, [])
    got = sample_negative_edges(empty3, 3, 0)
    assert sorted(map(tuple, got.tolist())) == [(0, 1), (0, 2), (1, 2)]


def test_negatives_avoid_edges_sparse():
    g = bounded_degree_graph(1000, 6, 1, spread=True)
    neg = sample_negative_edges(g, g.num_edges, 2)
    assert not np.isin(neg[:, 0] * g.n + neg[:, 1], g.edge_keys()).any()


def test_negative_sampling_rejection_path():
    # large n triggers rejection sampling rather than enumeration
    g = erdos_renyi(5000, 0.001, 2)
    neg = sample_negative_edges(g, 20_000, 4)
    keys = neg[:, 0] * g.n + neg[:, 1]
    assert len(np.unique(keys)) == 20_000
    assert not np.isin(keys, g.edge_keys()).any()
    assert (neg[:, 0] < neg[:, 1]).all()


def test_negative_sampling_roughly_uniform():
    g = Graph.from_edges(6, [(0, 1), (2, 3)])
    counts = {}
    for s in range(3000):
        for p in map(tuple, sample_negative_edges(g, 1, s).tolist()):
            counts[p] = counts.get(p, 0) + 1
    assert len(counts) == 13
    expected = 3000 / 13
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < 12 + 6 * np.sqrt(24)


# --- logistic regression ----------------------------------------------------

def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 5)) * [1, 10, 0.1, 3, 1]
    y = (rng.random(40) < 0.5).astype(float)
    mean, scale = standardization(X)
    w, b = rng.normal(size=5), 0.3
    _, gw, gb = loss_and_grad(w, b, X, y, 0.01, mean, scale)
    h = 1e-6
    num = np.zeros(5)
    for k in range(5):
        e = np.zeros(5); e[k] = h
        num[k] = (loss_and_grad(w + e, b, X, y, 0.01, mean, scale)[0]
                  - loss_and_grad(w - e, b, X, y, 0.01, mean, scale)[0]) / (2 * h)
    nb = (loss_and_grad(w, b + h, X, y, 0.01, mean, scale)[0]
          - loss_and_grad(w, b - h, X, y, 0.01, mean, scale)[0]) / (2 * h)
    assert np.max(np.abs(num - gw)) <= 1e-4
    assert abs(nb - gb) <= 1e-4


def test_sparse_and_dense_agree():
    rng = np.random.default_rng(1)
    X = (rng.random((60, 8)) < 0.3).astype(float)
    y = (X[:, 0] + rng.random(60) > 0.8).astype(float)
    y[:2] = [0, 1]
    a = train_logistic(X, y)
    b = train_logistic(sp.csr_matrix(X), y)
    assert np.allclose(a.weights, b.weights, atol=1e-10)
    assert np.allclose(a.decision_function(X), b.decision_function(sp.csr_matrix(X)), atol=1e-10)


def test_separable_data():
    x = np.linspace(-1, 1, 50)
    y = (x > 0).astype(float)
    model = train_logistic(x, y)
    assert (model.predict(x) == y).all()
    assert auc_roc(model.decision_function(x), y) == 1.0


def test_training_rejects_bad_input():
    with pytest.raises(ValueError):
        train_logistic([1.0, 2.0, 3.0], [1, 1, 1])
    with pytest.raises(ValueError):
        train_logistic([1.0, np.nan], [0, 1])
    with pytest.raises(ValueError):
        train_logistic([1.0, 2.0], [0, 2])


def test_scale_invariance():
    rng = np.random.default_rng(3)
    x = rng.normal(size=200)
    y = (x + rng.normal(size=200) > 0).astype(float)
    a = train_logistic(x, y).decision_function(x)
    b = train_logistic(1000 * x + 7, y).decision_function(1000 * x + 7)
    assert np.allclose(a, b, atol=1e-9)


def test_null_features_give_chance_auc():
    rng = np.random.default_rng(4)
    aucs = []
    for s in range(20):
        X = rng.normal(size=(400, 3))
        y = (rng.random(400) < 0.5).astype(float)
        m = train_logistic(X[:200], y[:200])
        aucs.append(auc_roc(m.decision_function(X[200:]), y[200:]))
    assert abs(np.mean(aucs) - 0.5) < 0.03


# --- metrics ----------------------------------------------------------------

@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.integers(-5, 5), st.booleans()), min_size=2, max_size=40))
def test_auc_matches_pairwise(rows):
    scores = [s for s, _ in rows]
    labels = [y for _, y in rows]
    if all(labels) or not any(labels):
        with pytest.raises(ValueError):
            auc_roc(scores, labels)
        return
    assert abs(auc_roc(scores, labels) - pairwise_auc(scores, labels)) <= 1e-12


def test_auc_invariant_under_monotone_maps():
    rng = np.random.default_rng(5)
    s = rng.normal(size=300)
    y = rng.random(300) < 0.4
    base = auc_roc(s, y)
    assert auc_roc(np.exp(s), y) == base
    assert auc_roc(3 * s - 2, y) == base
    assert auc_roc(-s, y) == pytest.approx(1 - base, abs=1e-12)
    assert auc_roc(np.zeros(300), y) == 0.5


def test_f1_worked_cases():
    truth = LabelSet.from_array([0, 0, 1, 1], 2)
    pred = LabelSet.from_array([0, 1, 1, 1], 2)
    micro, macro = micro_macro_f1(pred, truth)
    assert micro == pytest.approx(0.75)
    assert macro == pytest.approx((2 / 3 + 0.8) / 2)
    # a class nobody has nor predicts contributes zero to the macro average
    truth3 = LabelSet.from_array([0, 1], 3)
    pred3 = LabelSet.from_array([0, 1], 3)
    assert micro_macro_f1(pred3, truth3) == (1.0, pytest.approx(2 / 3))
    with pytest.raises(ValueError):
        micro_macro_f1(LabelSet.from_array([0, 1], 2), truth3)
    with pytest.raises(ValueError):
        micro_macro_f1(LabelSet.from_array([0, 1, 1], 3), truth3)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 12), st.integers(1, 5), st.randoms(use_true_random=False))
def test_f1_matches_definition(n, c, rnd):
    pred = np.array([[rnd.random() < 0.4 for _ in range(c)] for _ in range(n)])
    truth = np.array([[rnd.random() < 0.4 for _ in range(c)] for _ in range(n)])
    got = f1_from_indicators(pred, truth)
    want = definitional_f1(pred, truth)
    assert got[0] == pytest.approx(want[0], abs=1e-12)
    assert got[1] == pytest.approx(want[1], abs=1e-12)


# --- pipelines --------------------------------------------------------------

def test_link_prediction_beats_chance():
    g, _ = generate(SynthConfig.from_mixing(600, 6, 20, 0.05, 1))
    rep = run_link_prediction(g, LinkPredConfig(seed=1, dim=2048))
    assert rep.metrics["auc_roc"] > 0.6
    assert rep.params["pos_test"] == round(0.3 * g.num_edges)


def test_link_prediction_deterministic_json():
    g = erdos_renyi(150, 0.08, 1)
    cfg = LinkPredConfig(seed=3, dim=128, similarity="cosine")
    a = run_link_prediction(g, cfg).to_json(timings=False)
    b = run_link_prediction(g, cfg).to_json(timings=False)
    assert a == b


def test_link_prediction_config_errors():
    with pytest.raises(ValueError):
        LinkPredConfig(seed=1)
    with pytest.raises(ValueError):
        LinkPredConfig(seed=1, dim=8, rho=0.1)
    with pytest.raises(ValueError):
        LinkPredConfig(seed=1, dim=8, similarity="jaccard")
    LinkPredConfig(seed=1, features="uncompressed")


def two_cliques(size=20):
    edges = [(i, j) for i, j in itertools.combinations(range(size), 2)]
    edges += [(i + size, j + size) for i, j in edges]
    edges.append((0, size))
    return Graph.from_edges(2 * size, edges), LabelSet.from_array([0] * size + [1] * size, 2)


def test_node_classification_two_cliques():
    g, labels = two_cliques()
    rep = run_node_classification(g, labels, NodeClassConfig(seed=1, dim=256, repeats=5))
    assert rep.metrics["micro_f1"] >= 0.95


def test_node_classification_shuffled_labels_near_chance():
    g, labels = generate(SynthConfig.from_mixing(400, 4, 20, 0.05, 2))
    y = np.random.default_rng(0).permutation(labels.as_array())
    rep = run_node_classification(g, LabelSet.from_array(y, 4), NodeClassConfig(seed=1, dim=512, repeats=5))
    # four balanced classes: chance accuracy is 0.25
    assert abs(rep.metrics["micro_f1"] - 0.25) <= 0.05


def test_node_classification_errors():
    g, labels = two_cliques()
    with pytest.raises(ValueError):
        run_node_classification(g, LabelSet.from_array([0] * 10, 1), NodeClassConfig(seed=1, dim=32))
    with pytest.raises(ValueError):
        run_node_classification(g, LabelSet.from_array([0] * 40, 2), NodeClassConfig(seed=1, dim=32))
    with pytest.raises(ValueError):
        NodeClassConfig(seed=1, dim=32, train_fraction=1.0)


def test_node_classification_multi_label():
    g, _ = two_cliques()
    ind = np.zeros((40, 3), dtype=bool)
    ind[:20, 0] = True
    ind[20:, 1] = True
    ind[::2, 2] = True
    rep = run_node_classification(g, LabelSet.from_indicator(ind), NodeClassConfig(seed=2, dim=256, repeats=3))
    assert rep.params["multi_label"]
    assert 0.0 <= rep.metrics["macro_f1"] <= 1.0
