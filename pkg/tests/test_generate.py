import math

import numpy as np
import pytest

from hypermap.evaluate import empirical_connection_probability, embedding_from_truth
from hypermap.generate import (
    average_clustering,
    clustering_coefficients,
    format_truth,
    frozen_growth_replicate,
    generate,
    powerlaw_exponent,
    read_truth,
)
from hypermap.geometry import ModelParams, connection_probability, cutoff_radius
from hypermap.graph import Graph
from oracles import birth_pair

P300 = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.4, 300)


def prm_dict(p):
    return dict(m=p.m, L=p.L, beta=p.beta, T=p.T, zeta=p.zeta, t=p.t)


def test_two_nodes_single_coin():
    p = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.6, 2)
    for seed in range(40):
        rng = np.random.default_rng(seed)
        th1, th2 = rng.uniform(0, 2 * math.pi, 2)
        u = rng.random()
        x, R = birth_pair(2, 1, th2, th1, prm_dict(p))
        prob = 1 / (1 + math.exp((x - R) / (2 * p.T)))
        net = generate(p, seed)
        assert net.theta.tolist() == [th1, th2]
        assert net.graph.has_edge("1", "2") == (u < prob)


def test_draw_order_matches_documentation():
    p = ModelParams.from_gamma(1.0, 1.0, 2.5, 0.5, 25)
    net = generate(p, 99)
    rng = np.random.default_rng(99)
    pd = prm_dict(p)
    for i in range(1, 26):
        th = rng.uniform(0, 2 * math.pi)
        assert th == net.theta[i - 1]
        if i == 1:
            continue
        u = rng.random(i - 1)
        for j in range(1, i):
            x, R = birth_pair(i, j, net.theta[i - 1], net.theta[j - 1], pd)
            prob = 1 / (1 + math.exp(min(700.0, (x - R) / (2 * p.T))))
            assert net.graph.has_edge(str(i), str(j)) == (u[j - 1] < prob)


def test_deterministic_and_seed_sensitive():
    a, b, c = generate(P300, 4), generate(P300, 4), generate(P300, 5)
    assert list(a.graph.edges()) == list(b.graph.edges())
    assert np.array_equal(a.theta, b.theta)
    assert list(a.graph.edges()) != list(c.graph.edges())


def test_labels_and_truth():
    net = generate(P300, 1)
    assert net.graph.labels == tuple(str(i) for i in range(1, 301))
    assert np.all((net.theta >= 0) & (net.theta < 2 * math.pi))
    assert net.radius[0] == 0.0
    assert net.radius[9] == pytest.approx(2 * math.log(10))


def test_truth_sidecar_round_trip(tmp_path):
    net = generate(P300, 2)
    text = format_truth(net)
    assert text.startswith("# rank r theta\n")
    f = tmp_path / "truth.txt"
    f.write_text(text)
    back = read_truth(f)
    assert back == net.truth()


def test_frozen_growth_keeps_angles_and_is_step_like_when_cold():
    p = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.01, 2)
    for seed in range(20):
        assert frozen_growth_replicate([0.3, 0.3], p, seed).has_edge("1", "2")


def test_frozen_growth_validates_length():
    with pytest.raises(ValueError):
        frozen_growth_replicate(np.zeros(5), P300, 0)


def test_frozen_growth_matches_generator_distribution():
    # same coordinates, many coin sets: the link frequency of a pair follows its probability
    p = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.5, 30)
    theta = np.random.default_rng(3).uniform(0, 2 * math.pi, 30)
    x, R = birth_pair(12, 5, theta[11], theta[4], prm_dict(p))
    prob = 1 / (1 + math.exp((x - R) / (2 * p.T)))
    hits = sum(frozen_growth_replicate(theta, p, s).has_edge("12", "5") for s in range(2000))
    assert abs(hits / 2000 - prob) < 4 * math.sqrt(prob * (1 - prob) / 2000) + 1e-3


def test_clustering_small_cases():
    tri = Graph("abcd", [("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")])
    c = clustering_coefficients(tri)
    assert c.tolist() == pytest.approx([1.0, 1.0, 1 / 3, 0.0])
    assert average_clustering(tri) == pytest.approx((1 + 1 + 1 / 3) / 3)


def test_powerlaw_fit_recovers_exponent():
    k = np.random.default_rng(8).zipf(2.5, 200_000)
    assert powerlaw_exponent(k, kmin=5) == pytest.approx(2.5, abs=0.03)


@pytest.mark.slow
def test_empirical_connection_probability_matches_model():
    """Truth coordinates at the final time reproduce the connection
    probability with the last cutoff, within binomial error bars."""
    p = ModelParams.from_gamma(1.5, 2.5, 2.1, 0.4, 1500)
    worst = []
    for seed in range(3):
        net = generate(p, seed)
        e = embedding_from_truth(net.graph, p, net.theta)
        h = empirical_connection_probability(net.graph, e, 0.5)
        Rt = cutoff_radius(p.t, p)
        mid = 0.5 * (h.lo + h.hi)
        ok = h.pairs >= 50
        # the model value averaged over the bin, not just at its centre
        xs = np.linspace(h.lo[ok], h.hi[ok], 21)
        want = connection_probability(xs, Rt, p.T).mean(axis=0)
        se = np.sqrt(want * (1 - want) / h.pairs[ok])
        z = np.abs(h.ratio[ok] - want) / np.maximum(se, 1e-12)
        worst.append((float(z.max()), float(mid[ok][np.argmax(z)])))
    assert all(z <= 3 for z, _ in worst), worst
