"""Link-based log-likelihoods of a node's angle and grid maximisation.

All pair terms are evaluated at the birth time of the younger node of the
pair: the younger node sits at its birth radius, the older one at its
drifted radius, and the cutoff is that of the younger node. Each term is
ln p for a linked pair and ln(1 - p) otherwise, floored at ln(1e-300).

Ranks are 1-based; arrays indexed by rank hold rank r at position r - 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _parallel
from .geometry import LOG_FLOOR, TWO_PI, ModelParams, cutoff_radii
from .graph import Graph, GrowthSchedule

# rows of candidate angles processed per block; keeps temporaries in cache
_BLOCK_ELEMS = 1 << 15


@dataclass
class RankedGraph:
    """A graph re-indexed by birth rank.

    nbrs[r - 1] is the sorted array of neighbour positions (rank - 1) of the
    node with rank r.
    """

    params: ModelParams
    labels: tuple[str, ...]
    nbrs: tuple[np.ndarray, ...]
    degrees: np.ndarray

    def __post_init__(self):
        n = len(self.labels)
        if n != self.params.t:
            raise ValueError(f"graph has {n} nodes but params.t = {self.params.t}")
        p = self.params
        lnr = np.log(np.arange(1, n + 1, dtype=float))
        # zeta * radius does not depend on zeta; keep the scaled values
        self.z_birth = 2.0 * lnr
        self.ln_rank = lnr
        self.zR = p.zeta * cutoff_radii(p)
        self.nbr_sets = tuple(frozenset(a.tolist()) for a in self.nbrs)

    @classmethod
    def from_graph(cls, g: Graph, schedule: GrowthSchedule, p: ModelParams) -> "RankedGraph":
        pos = np.array([g.index[lab] for lab in schedule.order], dtype=np.int64)
        rank_of_pos = np.empty(len(pos), dtype=np.int64)
        rank_of_pos[pos] = np.arange(len(pos))
        nbrs = tuple(np.sort(rank_of_pos[g.adj[q]]) for q in pos)
        return cls(p, tuple(schedule.order), nbrs, g.degrees[pos].copy())

    @property
    def n(self) -> int:
        return len(self.labels)

    def z_drift(self, old, time):
        """zeta * r_old(time) for 1-based ranks (arrays broadcast)."""
        b = self.params.beta
        return 2.0 * (b * np.log(old) + (1.0 - b) * np.log(time))

    def adjacency_row(self, r: int, upto: int) -> np.ndarray:
        """alpha between rank r and ranks 1..upto as a 0/1 float array."""
        a = np.zeros(upto)
        nb = self.nbrs[r - 1]
        a[nb[nb < upto]] = 1.0
        return a

    def common_neighbors(self, a: int, b: int) -> int:
        return len(self.nbr_sets[a - 1] & self.nbr_sets[b - 1])


def angle_step(i: int) -> float:
    return min(0.01, 1.0 / i)


def angle_grid(i: int, anchor: float = 0.0) -> np.ndarray:
    """Candidate angles for node i: G = ceil(2 pi / step) evenly spaced
    points through `anchor`, normalised to [0, 2 pi) and sorted."""
    G = int(math.ceil(TWO_PI / angle_step(i) - 1e-9))
    th = np.mod(anchor + TWO_PI * np.arange(G) / G, TWO_PI)
    return np.sort(th)


def pair_terms_sum(grid, theta_cols, C, D, zR, sign, q, threads: int = 1) -> np.ndarray:
    """sum_j log-term(grid angle, column j) for every grid angle.

    Column j has cosh(zeta*x) = C_j + D_j sin^2((theta - theta_j) / 2),
    cutoff zeta*R = zR_j and sign +1 (linked: ln p) or -1 (ln(1 - p)).
    q = 1 / (2T).
    """
    grid = np.asarray(grid, dtype=float)
    n = len(theta_cols)
    out = np.zeros(len(grid))
    if n == 0 or len(grid) == 0:
        return out
    th = np.asarray(theta_cols, dtype=float)
    sc = np.sin(0.5 * th)
    cc = np.cos(0.5 * th)
    C = np.broadcast_to(np.asarray(C, dtype=float), (n,))
    D = np.broadcast_to(np.asarray(D, dtype=float), (n,))
    zR = np.broadcast_to(np.asarray(zR, dtype=float), (n,))
    sq = q * np.broadcast_to(np.asarray(sign, dtype=float), (n,))
    off = -sq * zR  # y = sq * zx + off
    sg = np.sin(0.5 * grid)
    cg = np.cos(0.5 * grid)
    rows = max(1, _BLOCK_ELEMS // n)
    floor = -LOG_FLOOR

    def work(lo, hi):
        a = np.empty((hi - lo, n))
        w = np.empty((hi - lo, n))
        for s in range(lo, hi, rows):
            e = min(hi, s + rows)
            av, wv = a[: e - s], w[: e - s]
            # h = sin((theta - theta_j) / 2)
            np.multiply.outer(sg[s:e], cc, out=av)
            np.multiply.outer(cg[s:e], sc, out=wv)
            av -= wv
            av *= av
            av *= D
            av += C
            np.maximum(av, 1.0, out=av)
            np.arccosh(av, out=av)
            av *= sq
            av += off
            # softplus(y) = max(y, 0) + log1p(exp(-|y|))
            np.abs(av, out=wv)
            np.negative(wv, out=wv)
            np.exp(wv, out=wv)
            np.log1p(wv, out=wv)
            np.maximum(av, 0.0, out=av)
            av += wv
            np.minimum(av, floor, out=av)
            out[s:e] = -av.sum(axis=1)

    _parallel.run_chunks(work, len(grid), threads)
    return out


def _birth_columns(rg: RankedGraph, i: int, js: np.ndarray):
    """C, D and zR of pairs (i, j) for older ranks js, at i's birth."""
    zi = rg.z_birth[i - 1]
    zj = rg.z_drift(js.astype(float), float(i))
    C = np.cosh(zi - zj)
    D = 2.0 * np.sinh(zi) * np.sinh(zj)
    return C, D, rg.zR[i - 1]


def link_loglik(i: int, thetas, rg: RankedGraph, theta: np.ndarray, threads: int = 1):
    """Log-likelihood of angle(s) `thetas` for rank i given the placed
    angles theta[:i-1] of the older nodes and the links among them."""
    if i < 2:
        raise ValueError("link likelihood needs i >= 2")
    js = np.arange(1, i)
    if np.isnan(theta[: i - 1]).any():
        raise ValueError("all older nodes must be placed")
    C, D, zR = _birth_columns(rg, i, js)
    sign = 2.0 * rg.adjacency_row(i, i - 1) - 1.0
    scalar = np.ndim(thetas) == 0
    out = pair_terms_sum(np.atleast_1d(thetas), theta[: i - 1], C, D, zR, sign, 1.0 / (2 * rg.params.T), threads)
    return float(out[0]) if scalar else out


def init_loglik(i: int, thetas, rg: RankedGraph, theta: np.ndarray, threads: int = 1):
    """Log-likelihood using only the older neighbours of rank i."""
    nb = rg.nbrs[i - 1]
    js = nb[nb < i - 1] + 1
    C, D, zR = _birth_columns(rg, i, js)
    scalar = np.ndim(thetas) == 0
    out = pair_terms_sum(np.atleast_1d(thetas), theta[js - 1], C, D, zR, 1.0, 1.0 / (2 * rg.params.T), threads)
    return float(out[0]) if scalar else out


def correction_columns(j: int, i: int, rg: RankedGraph):
    """Pairs (j, l) for l = 1..i, l != j, each at the younger node's birth."""
    ls = np.array([l for l in range(1, i + 1) if l != j], dtype=np.int64)
    young = np.maximum(ls, j).astype(float)
    old = np.minimum(ls, j).astype(float)
    zy = 2.0 * np.log(young)
    zo = rg.z_drift(old, young)
    C = np.cosh(zy - zo)
    D = 2.0 * np.sinh(zy) * np.sinh(zo)
    zR = rg.zR[np.maximum(ls, j) - 1]
    a = np.zeros(len(ls))
    nb = rg.nbr_sets[j - 1]
    for k, l in enumerate(ls):
        if (l - 1) in nb:
            a[k] = 1.0
    return ls, C, D, zR, 2.0 * a - 1.0


def correction_loglik(j: int, thetas, i: int, rg: RankedGraph, theta: np.ndarray, threads: int = 1):
    """Log-likelihood of angle(s) for rank j against every other node of
    rank <= i, with each pair taken at the younger node's birth."""
    if not 1 <= j <= i:
        raise ValueError("need 1 <= j <= i")
    ls, C, D, zR, sign = correction_columns(j, i, rg)
    scalar = np.ndim(thetas) == 0
    out = pair_terms_sum(np.atleast_1d(thetas), theta[ls - 1], C, D, zR, sign, 1.0 / (2 * rg.params.T), threads)
    return float(out[0]) if scalar else out


def total_pair_loglik(i: int, rg: RankedGraph, theta: np.ndarray) -> float:
    """Sum over all pairs among ranks 1..i of their birth-time log terms."""
    tot = 0.0
    for y in range(2, i + 1):
        tot += link_loglik(y, theta[y - 1], rg, theta)
    return tot


@dataclass
class LikelihoodProfile:
    thetas: np.ndarray
    values: np.ndarray

    @property
    def best(self) -> tuple[float, float]:
        k = int(np.argmax(self.values))
        return float(self.thetas[k]), float(self.values[k])


def maximize_profile(score, grid) -> tuple[float, LikelihoodProfile]:
    """Evaluate a vectorised score on a grid of angles and return the
    maximiser; ties go to the smallest angle in [0, 2 pi)."""
    g = np.mod(np.asarray(grid, dtype=float), TWO_PI)
    if g.size == 0:
        raise ValueError("empty grid")
    order = np.argsort(g, kind="stable")
    g = g[order]
    if np.any(np.diff(g) <= 0):
        raise ValueError("grid angles must be distinct")
    vals = np.asarray(score(g), dtype=float)
    if vals.shape != g.shape:
        raise ValueError("score must return one value per grid angle")
    if np.all(np.isnan(vals)):
        raise ValueError("score is NaN everywhere")
    k = int(np.nanargmax(vals))
    return float(g[k]), LikelihoodProfile(g, vals)
