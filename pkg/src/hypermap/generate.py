"""Synthetic growing networks in the hyperbolic disc.

Node i (labelled str(i)) is born at radius (2/zeta) ln i with a uniform
angle, older nodes drift outwards, and i links to each older j
independently with the logistic probability of their distance, using the
cutoff R_i. Random draws are consumed in a fixed order from one
numpy Generator: for i = 1..t, first theta_i, then i - 1 uniforms for
j = 1..i-1 in ascending order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .geometry import (
    TWO_PI,
    ModelParams,
    cosh_distance_arg,
    cutoff_radii,
    pair_link_probability,
)
from .graph import Graph


@dataclass
class SyntheticNetwork:
    graph: Graph
    params: ModelParams
    theta: np.ndarray  # theta[i - 1] is the angle of node i
    seed: int | None = None

    @property
    def radius(self) -> np.ndarray:
        """Birth radius of each node, indexed by i - 1."""
        return (2.0 / self.params.zeta) * np.log(np.arange(1, self.params.t + 1, dtype=float))

    def truth(self) -> dict[str, tuple[int, float, float]]:
        r = self.radius
        return {str(i + 1): (i + 1, float(r[i]), float(self.theta[i])) for i in range(self.params.t)}


def generate(p: ModelParams, seed: int) -> SyntheticNetwork:
    rng = np.random.default_rng(seed)
    t = p.t
    theta = np.empty(t)
    R = cutoff_radii(p)
    lnj = np.log(np.arange(1, t + 1, dtype=float))
    edges_a: list[np.ndarray] = []
    edges_b: list[np.ndarray] = []
    for i in range(1, t + 1):
        theta[i - 1] = rng.uniform(0.0, TWO_PI)
        if i == 1:
            continue
        u = rng.random(i - 1)
        ri = 2.0 / p.zeta * lnj[i - 1]
        rj = 2.0 / p.zeta * (p.beta * lnj[: i - 1] + (1.0 - p.beta) * lnj[i - 1])
        arg = np.maximum(cosh_distance_arg(ri, rj, theta[i - 1] - theta[: i - 1], p.zeta), 1.0)
        prob = expit(-(np.arccosh(arg) - p.zeta * R[i - 1]) / (2.0 * p.T))
        hit = np.flatnonzero(u < prob)
        if hit.size:
            edges_a.append(np.full(hit.size, i - 1))
            edges_b.append(hit)
    pairs = (np.column_stack([np.concatenate(edges_a), np.concatenate(edges_b)])
             if edges_a else np.zeros((0, 2), dtype=np.int64))
    g = Graph.from_index_edges([str(i) for i in range(1, t + 1)], pairs)
    return SyntheticNetwork(g, p, theta, seed)


def frozen_growth_replicate(theta, p: ModelParams, seed) -> Graph:
    """One growth realisation with all angles held fixed.

    theta[i - 1] is the angle of node i; only the edge coins are random,
    drawn for i = 2..t and then j = 1..i-1 in ascending order.
    """
    theta = np.asarray(theta, dtype=float)
    t = len(theta)
    if t != p.t:
        raise ValueError(f"expected {p.t} angles, got {t}")
    rng = np.random.default_rng(seed)
    ii, jj = np.tril_indices(t, -1)  # row-major: ascending i, then ascending j
    R = cutoff_radii(p)
    prob = pair_link_probability(ii + 1, jj + 1, theta[ii], theta[jj], p, R=R[ii])
    hit = rng.random(len(ii)) < prob
    return Graph.from_index_edges([str(i) for i in range(1, t + 1)], np.column_stack([ii[hit], jj[hit]]))


def format_truth(net: SyntheticNetwork) -> str:
    lines = ["# rank r theta"]
    r = net.radius
    for i in range(net.params.t):
        lines.append(f"{i + 1} {float(r[i])!r} {float(net.theta[i])!r}")
    return "\n".join(lines) + "\n"


def read_truth(path) -> dict[str, tuple[int, float, float]]:
    """Read a truth sidecar; labels are the decimal birth ranks."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 'rank r theta'")
            rank = int(parts[0])
            out[str(rank)] = (rank, float(parts[1]), float(parts[2]))
    return out


def clustering_coefficients(g: Graph) -> np.ndarray:
    """Local clustering of every node (0 for degree < 2)."""
    A = g.adjacency().astype(np.float64)
    tri = np.asarray((A @ A).multiply(A).sum(axis=1)).ravel() / 2.0
    k = g.degrees.astype(float)
    denom = k * (k - 1) / 2.0
    return np.divide(tri, denom, out=np.zeros_like(tri), where=denom > 0)


def average_clustering(g: Graph) -> float:
    """Mean local clustering over nodes of degree >= 2."""
    c = clustering_coefficients(g)
    mask = g.degrees >= 2
    return float(c[mask].mean()) if mask.any() else 0.0


def powerlaw_exponent(degrees, kmin: int = 5) -> float:
    """Discrete power-law MLE of the degree tail k >= kmin."""
    from scipy.optimize import minimize_scalar
    from scipy.special import zeta

    k = np.asarray(degrees, dtype=float)
    k = k[k >= kmin]
    if k.size < 2:
        raise ValueError("too few degrees in the tail")
    n, s = k.size, np.log(k).sum()

    def nll(g):
        return n * math.log(zeta(g, kmin)) + g * s

    res = minimize_scalar(nll, bounds=(1.01, 6.0), method="bounded", options={"xatol": 1e-10})
    return float(res.x)
