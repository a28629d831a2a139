"""Shared instance builders for the tests."""
from __future__ import annotations

import math

import numpy as np

from hypermap.geometry import ModelParams
from oracles import mp_cutoff


def cn_configs(n=20, seed=424242):
    """Random (i, j, k, dtheta, params) for common-neighbour probabilities.

    k cycles through the three orderings (k < j, j < k < i, k > i); half of
    the separations are uniform on [0, pi], half on [0, 0.1].
    """
    rng = np.random.default_rng(seed)
    out = []
    for c in range(n):
        t = int(rng.integers(50, 2001))
        p = ModelParams.from_gamma(rng.uniform(1, 3), rng.uniform(0, 3), rng.uniform(2.1, 3.0),
                                   rng.uniform(0.1, 0.9), t)
        case = c % 3
        if case == 0:
            j = int(rng.integers(2, t - 1))
            i = int(rng.integers(j + 1, t + 1))
            k = int(rng.integers(1, j))
        elif case == 1:
            j = int(rng.integers(1, t - 1))
            i = int(rng.integers(j + 2, t + 1))
            k = int(rng.integers(j + 1, i))
        else:
            j = int(rng.integers(1, t - 1))
            i = int(rng.integers(j + 1, t))
            k = int(rng.integers(i + 1, t + 1))
        d = rng.uniform(0, math.pi) if c < n // 2 else rng.uniform(0, 0.1)
        out.append((i, j, k, float(d), p))
    return out


def link_prob_profile(a, b, phi, p: ModelParams, R_young):
    """Probability that a and b are linked at the younger one's birth as a
    function of their angular distance phi (law of cosines form)."""
    y, o = max(a, b), min(a, b)
    ry = 2 * math.log(y)
    ro = 2 * (p.beta * math.log(o) + (1 - p.beta) * math.log(y))
    arg = np.cosh(ry) * np.cosh(ro) - np.sinh(ry) * np.sinh(ro) * np.cos(phi)
    x = np.arccosh(np.maximum(arg, 1.0))
    return 1.0 / (1.0 + np.exp(np.minimum((x - p.zeta * R_young) / (2 * p.T), 700.0)))


def mc_common_neighbor_prob(i, j, k, d, p: ModelParams, n=1_000_000, seed=0):
    """Monte-Carlo estimate (mean, standard error) over a uniform angle of k."""
    R = {a: float(mp_cutoff(a, p.t, p.m, p.L, p.beta, p.T, 1, dps=30)) for a in {max(j, k), max(i, k)}}
    rng = np.random.default_rng(seed)
    th = rng.uniform(0, 2 * math.pi, n)
    v = (link_prob_profile(j, k, th, p, R[max(j, k)])
         * link_prob_profile(i, k, th - d, p, R[max(i, k)]))
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(n))
