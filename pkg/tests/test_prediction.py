import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hypermap.evaluate import embedding_from_truth
from hypermap.generate import generate
from hypermap.geometry import ModelParams
from hypermap.graph import Graph
from hypermap.prediction import (
    auc,
    center_of_mass,
    future_link_curve,
    labeled_pairs,
    pair_distances,
    prediction_report,
    prediction_slices,
    read_groups,
    score_pairs,
)
import oracles


def small_base():
    # a has neighbours c, d, e; b has c, d, f, g: two common, a and b unlinked
    edges = [("a", "c"), ("a", "d"), ("a", "e"), ("b", "c"), ("b", "d"), ("b", "f"), ("b", "g")]
    return Graph("abcdefg", edges)


def test_baseline_scores_on_a_small_graph():
    g = small_base()
    pairs = labeled_pairs(g, g)
    k = [i for i in range(len(pairs)) if {pairs.labels[pairs.a[i]], pairs.labels[pairs.b[i]]} == {"a", "b"}][0]
    assert score_pairs(pairs, "pa", g)[k] == 12
    assert score_pairs(pairs, "cn", g)[k] == 2


def test_hyperbolic_score_is_minus_distance():
    p = ModelParams.from_gamma(1.0, 1.0, 2.5, 0.5, 7)
    g = small_base()
    theta = np.linspace(0.1, 6.0, 7)
    e = embedding_from_truth(g, p, theta, labels_by_rank=tuple("abcdefg"))
    pairs = labeled_pairs(g, g)
    s = score_pairs(pairs, "hyperbolic", g, e)
    for i in range(len(pairs)):
        ra, rb = pairs.a[i] + 1, pairs.b[i] + 1
        x = oracles._dist(2 * (p.beta * math.log(ra) + (1 - p.beta) * math.log(7)),
                          2 * (p.beta * math.log(rb) + (1 - p.beta) * math.log(7)),
                          theta[ra - 1] - theta[rb - 1], 1.0)
        assert s[i] == pytest.approx(-x, rel=1e-12)
    assert np.array_equal(pair_distances(pairs, e), -s)


def test_unknown_method_and_missing_embedding():
    g = small_base()
    pairs = labeled_pairs(g, g)
    with pytest.raises(ValueError):
        score_pairs(pairs, "jaccard", g)
    with pytest.raises(ValueError):
        score_pairs(pairs, "hyperbolic", g)


class TestAUC:
    def test_examples(self):
        assert auc([3, 4], [1, 2]) == 1.0
        assert auc([1, 2], [3, 4]) == 0.0
        assert auc([1], [1]) == 0.5
        assert auc([1, 3], [2]) == 0.5
        assert auc([2, 2, 5], [2, 1]) == pytest.approx((0.5 + 0.5 + 1 + 1 + 1 + 1) / 6)

    def test_empty_side(self):
        with pytest.raises(ValueError):
            auc([], [1.0])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=30), st.lists(st.integers(-5, 5), min_size=1, max_size=30))
    def test_brute_force_and_symmetries(self, pos, neg):
        a = auc(pos, neg)
        assert a == pytest.approx(oracles.brute_auc(pos, neg), abs=1e-12)
        assert auc(-np.array(pos), -np.array(neg)) == pytest.approx(1 - a, abs=1e-12)
        f = lambda v: np.exp(np.asarray(v, dtype=float) / 3.0) + 7  # noqa: E731
        assert auc(f(pos), f(neg)) == pytest.approx(a, abs=1e-12)


class TestLabeledPairs:
    def test_invariants(self):
        p = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.4, 120)
        base = generate(p, 1).graph
        future = generate(p.replace(t=150), 1).graph
        pairs = labeled_pairs(base, future)
        n = len(base)
        assert len(pairs) == n * (n - 1) // 2 - base.n_edges
        for i in range(0, len(pairs), 37):
            la, lb = pairs.labels[pairs.a[i]], pairs.labels[pairs.b[i]]
            assert not base.has_edge(la, lb)
            assert pairs.y[i] == future.has_edge(la, lb)

    def test_missing_future_node(self):
        base = small_base()
        future = Graph("abcdef", [("a", "b")])
        with pytest.raises(ValueError, match="'g'"):
            labeled_pairs(base, future)

    def test_slices(self):
        g = small_base()
        pairs = labeled_pairs(g, g)
        sl = prediction_slices(pairs, g)
        assert sl["all"].all()
        cn = score_pairs(pairs, "cn", g)
        assert np.array_equal(sl["zero_cn"], cn == 0)


class TestFutureLinkCurve:
    def setup_method(self):
        self.p = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.4, 80)
        self.net = generate(self.p, 2)
        self.e = embedding_from_truth(self.net.graph, self.p, self.net.theta)

    def test_no_new_links(self):
        h = future_link_curve(labeled_pairs(self.net.graph, self.net.graph), self.e)
        assert h.connected.sum() == 0 and h.pairs.sum() > 0

    def test_everything_links(self):
        labels = self.net.graph.labels
        full = Graph(labels, [(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]])
        h = future_link_curve(labeled_pairs(self.net.graph, full), self.e)
        assert np.all(h.ratio[h.pairs > 0] == 1.0)


class TestCenterOfMass:
    def test_single_bin(self):
        w = math.radians(3.6)
        cm, wraps = center_of_mass([10.2 * w, 10.5 * w, 10.9 * w])
        assert cm == pytest.approx(10.5 * w) and not wraps

    def test_two_bins(self):
        w = math.radians(3.6)
        cm, _ = center_of_mass([2.1 * w, 2.2 * w, 2.3 * w, 6.5 * w])
        assert cm == pytest.approx((3 * 2.5 + 6.5) / 4 * w)

    def test_wrap_flag(self):
        cm, wraps = center_of_mass([0.05, 6.25, 6.2])
        assert wraps
        assert not center_of_mass([3.0, 3.1])[1]
        assert not center_of_mass([1.0])[1]

    def test_groups_file(self, tmp_path):
        f = tmp_path / "g.txt"
        f.write_text("# label group\na x\nb y\nc x\n")
        assert read_groups(f) == {"x": ["a", "c"], "y": ["b"]}
        f.write_text("a\n")
        with pytest.raises(ValueError):
            read_groups(f)


def test_report_on_identical_snapshots_is_undefined():
    p = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.4, 60)
    net = generate(p, 0)
    e = embedding_from_truth(net.graph, p, net.theta)
    rows, pairs = prediction_report(net.graph, net.graph, e)
    assert len(rows) == 9
    assert all(math.isnan(r[2]) and r[3] == 0 for r in rows)


@pytest.mark.slow
def test_future_links_fade_with_distance():
    """With true coordinates, pairs far apart in the base snapshot gain
    links less often than close ones."""
    p = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.4, 1000)
    net = generate(p, 4)
    fut = generate(p.replace(t=1200), 4)
    e = embedding_from_truth(net.graph, p, net.theta)
    pairs = labeled_pairs(net.graph, fut.graph)
    x = pair_distances(pairs, e)
    y = pairs.y.astype(bool)
    near, far = y[x < np.quantile(x, 0.1)].mean(), y[x > np.quantile(x, 0.9)].mean()
    assert far < near
    rows, _ = prediction_report(net.graph, fut.graph, e)
    for r in rows:
        assert 0.0 <= r[2] <= 1.0
