"""Common-neighbour statistics of node pairs and their likelihood.

For nodes j < i at angular distance d, the number of their common
neighbours is a sum of independent Bernoulli variables, one per third node
k, with success probability

    p_k(d) = (1/2pi) int f_jk(theta) f_ik(theta - d) dtheta,

where f_ab(phi) is the probability that the pair (a, b) is linked when its
younger member is born, as a function of their angular distance phi.

The direct route (cn_pair_prob, cn_moments, cn_loglik) integrates with a
composite trapezoid on a uniform M-point grid anchored at the older node j,
plus graded extra nodes around the two peaks whenever a profile is
narrower than a few grid steps. Quadrature(M, refine=False) drops the extra
nodes.

The correlation engine (CNEngine) obtains p_k for all M grid offsets at
once from cosine transforms of the f profiles. It uses the plain uniform
rule, so on grid-aligned offsets it agrees with the direct route at
refine=False to rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import fft as sfft

from .geometry import TWO_PI, ModelParams, cutoff_radii, cosh_distance_arg

DEFAULT_QUAD_POINTS = 1024

# sigma is floored here in the Gaussian likelihood
SIGMA_FLOOR = 1e-3


@dataclass(frozen=True)
class Quadrature:
    """Composite trapezoid on M uniform points (M even).

    With refine=True the direct routes add nodes around the two peaks of
    the integrand (angle 0 and the pair separation) whenever a link
    profile is narrower than a few grid steps: uniform steps of w/128 out
    to 4w, then geometrically growing steps, where w is the profile width.
    The rule stays a trapezoid on the merged, sorted node set.
    """

    M: int = DEFAULT_QUAD_POINTS
    refine: bool = True

    def __post_init__(self):
        if self.M < 4 or self.M % 2:
            raise ValueError(f"quadrature size must be an even integer >= 4 (got {self.M})")

    @property
    def step(self) -> float:
        return TWO_PI / self.M

    def nodes(self) -> np.ndarray:
        return TWO_PI * np.arange(self.M) / self.M


@dataclass
class CommonNeighborStats:
    mu: float
    sigma2: float


def _check_ranks(i, j, t):
    if not (1 <= j < i <= t):
        raise ValueError(f"need 1 <= j < i <= t (got i={i}, j={j}, t={t})")


def _pair_z(a, b, p: ModelParams):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    y = np.maximum(a, b)
    o = np.minimum(a, b)
    zy = 2.0 * np.log(y)
    zo = 2.0 * (p.beta * np.log(o) + (1.0 - p.beta) * np.log(y))
    return y, zy, zo


def _profile(a, b, phi, p: ModelParams, zR=None):
    """f_ab(phi): link probability of the pair (a, b) at the younger one's
    birth, as a function of the angle between them. a, b broadcast."""
    y, zy, zo = _pair_z(a, b, p)
    if zR is None:
        zR = p.zeta * cutoff_radii(p)[y.astype(np.int64) - 1]
    arg = np.maximum(cosh_distance_arg(zy, zo, phi, 1.0), 1.0)
    z = (np.arccosh(arg) - zR) / (2.0 * p.T)
    return 0.5 * (1.0 - np.tanh(0.5 * z))


def _profile_width(a, b, p: ModelParams, zR) -> float:
    """Angular scale of f_ab: the larger of the angle where the distance
    starts to grow and the angle where it reaches the cutoff."""
    _, zy, zo = _pair_z(a, b, p)
    zy, zo = float(zy), float(zo)
    den = 2.0 * math.sinh(zy) * math.sinh(zo)
    if den <= 0:
        return math.pi
    c = math.cosh(zy - zo)
    flat = 2.0 * math.asin(min(1.0, math.sqrt(c / den)))
    s2 = (math.cosh(min(zR, 700.0)) - c) / den
    edge = 2.0 * math.asin(math.sqrt(min(1.0, max(0.0, s2))))
    return max(flat, edge)


def _peak_offsets(w: float, h: float) -> np.ndarray:
    """One-sided offsets resolving a peak of width w on a grid of step h."""
    if w >= 8.0 * h:
        return np.zeros(0)
    fine = (w / 128.0) * np.arange(1, 513)
    n = int(math.ceil(math.log(math.pi / (4.0 * w)) / math.log(1.03))) if 4.0 * w < math.pi else 0
    geo = 4.0 * w * 1.03 ** np.arange(1, n + 1)
    out = np.concatenate([fine, geo])
    # only where the uniform grid is too coarse
    return out[out < 64.0 * h]


def _nodes(centres_widths, quad: Quadrature) -> np.ndarray:
    base = quad.nodes()
    if not quad.refine:
        return base
    parts = [base]
    for c, w in centres_widths:
        off = _peak_offsets(w, quad.step)
        if off.size:
            parts.append(c + off)
            parts.append(c - off)
            parts.append(np.array([c]))
    if len(parts) == 1:
        return base
    return np.unique(np.mod(np.concatenate(parts), TWO_PI))


def _trapezoid_mean(phi, vals) -> float:
    """(1/2pi) times the periodic trapezoid over sorted nodes phi."""
    if len(phi) == 0:
        return 0.0
    gaps = np.diff(np.append(phi, phi[0] + TWO_PI))
    left = np.roll(gaps, 1)
    return float(np.dot(vals, 0.5 * (gaps + left)) / TWO_PI)


def _pk(i, j, k, dtheta, p, quad, zR):
    """p_k for one third node k (direct route)."""
    Rj = zR[max(j, k) - 1]
    Ri = zR[max(i, k) - 1]
    phi = _nodes([(0.0, _profile_width(j, k, p, Rj)),
                  (float(dtheta) % TWO_PI, _profile_width(i, k, p, Ri))], quad)
    v = _profile(j, k, phi, p, Rj) * _profile(i, k, phi - dtheta, p, Ri)
    if len(phi) == quad.M and not quad.refine:
        return float(np.mean(v))
    return _trapezoid_mean(phi, v)


def cn_pair_prob(i: int, j: int, k: int, dtheta: float, p: ModelParams, quad: Quadrature = Quadrature()) -> float:
    """Probability that k is a common neighbour of j < i at angle dtheta."""
    _check_ranks(i, j, p.t)
    if not 1 <= k <= p.t or k in (i, j):
        raise ValueError("k must be a third node in [1, t]")
    return _pk(i, j, k, dtheta, p, quad, p.zeta * cutoff_radii(p))


def _third_nodes(i, j, t):
    ks = np.arange(1, t + 1)
    return ks[(ks != i) & (ks != j)]


def cn_pair_probs(i: int, j: int, dtheta: float, p: ModelParams, quad: Quadrature = Quadrature()):
    """(ks, p_k) for every third node k, by direct quadrature."""
    _check_ranks(i, j, p.t)
    ks = _third_nodes(i, j, p.t)
    zR = p.zeta * cutoff_radii(p)
    if quad.refine:
        return ks, np.array([_pk(i, j, int(k), dtheta, p, quad, zR) for k in ks])
    phi = quad.nodes()
    out = np.empty(len(ks))
    step = max(1, (1 << 20) // quad.M)
    for s in range(0, len(ks), step):
        kk = ks[s:s + step, None]
        fj = _profile(j, kk, phi[None, :], p, zR[np.maximum(kk, j) - 1])
        fi = _profile(i, kk, phi[None, :] - dtheta, p, zR[np.maximum(kk, i) - 1])
        out[s:s + step] = np.mean(fj * fi, axis=1)
    return ks, out


def cn_moments(i: int, j: int, dtheta: float, p: ModelParams, quad: Quadrature = Quadrature()) -> CommonNeighborStats:
    """Mean and variance of the number of common neighbours of j < i."""
    _, pk = cn_pair_probs(i, j, dtheta, p, quad)
    return CommonNeighborStats(float(pk.sum()), float(np.sum(pk * (1.0 - pk))))


def gaussian_term(n_obs, mu, sigma2):
    sigma = np.maximum(np.sqrt(np.maximum(sigma2, 0.0)), SIGMA_FLOOR)
    return -np.log(sigma) - (n_obs - mu) ** 2 / (2.0 * sigma * sigma)


def cn_loglik(i: int, theta_i: float, placed: dict[int, float], n_obs: dict[int, int], p: ModelParams,
              quad: Quadrature = Quadrature()) -> float:
    """Gaussian log-likelihood (constant dropped) of the observed common
    neighbour counts between i and each placed older node j."""
    tot = 0.0
    for j, th in placed.items():
        if j >= i:
            raise ValueError("placed nodes must be older than i")
        st = cn_moments(i, j, theta_i - th, p, quad)
        tot += float(gaussian_term(n_obs[j], st.mu, st.sigma2))
    return tot


class CNEngine:
    """Common-neighbour moments on the whole offset grid via transforms.

    For node a, bank(a, M) holds the cosine (DCT-I) transform of
    f_ak(phi_m), m = 0..M/2, for every k. For a pair (i, j) the product of
    the two banks transformed back gives M * sum_m f_jk(phi_m) f_ik(phi_m - d)
    at every grid offset d = 2 pi n / M.
    """

    def __init__(self, p: ModelParams, threads: int = 1):
        self.p = p
        self.threads = max(1, int(threads))
        self.zR = p.zeta * cutoff_radii(p)
        self._banks: dict[int, tuple[int, np.ndarray]] = {}

    def bank(self, a: int, M: int) -> np.ndarray:
        hit = self._banks.get(a)
        if hit is not None and hit[0] == M:
            return hit[1]
        t = self.p.t
        ks = np.arange(1, t + 1)
        phi = TWO_PI * np.arange(M // 2 + 1) / M
        prof = _profile(a, ks[:, None], phi[None, :], self.p, self.zR[np.maximum(ks, a) - 1][:, None])
        prof[a - 1] = 0.0
        coef = sfft.dct(prof, type=1, axis=1, workers=self.threads)
        self._banks[a] = (M, coef)
        return coef

    def drop(self, a: int):
        self._banks.pop(a, None)

    def pair_probs_grid(self, i: int, j: int, M: int) -> np.ndarray:
        """p_k at offsets 2 pi n / M, n = 0..M/2, shape (t, M/2 + 1).
        Rows i and j are zero."""
        x = self.bank(i, M) * self.bank(j, M)
        x[i - 1] = 0.0
        x[j - 1] = 0.0
        out = sfft.dct(x, type=1, axis=1, workers=self.threads)
        out *= 1.0 / (M * M)
        return out

    def moments_grid(self, i: int, j: int, M: int) -> tuple[np.ndarray, np.ndarray]:
        """(mu, sigma2) at offsets 2 pi n / M for n = 0..M/2."""
        x = self.bank(i, M) * self.bank(j, M)
        x[i - 1] = 0.0
        x[j - 1] = 0.0
        mu = sfft.dct(x.sum(axis=0), type=1) / (M * M)
        pk = sfft.dct(x, type=1, axis=1, workers=self.threads)
        sq = np.einsum("km,km->m", pk, pk) / float(M) ** 4
        return mu, mu - sq

    @staticmethod
    def lookup(half: np.ndarray, M: int, offsets) -> np.ndarray:
        """Values of an even, 2pi-periodic function known at 2 pi n / M,
        n = 0..M/2, at arbitrary offsets (linear between grid points)."""
        u = np.abs(np.asarray(offsets, dtype=float)) % TWO_PI
        u = np.minimum(u, TWO_PI - u) * (M / TWO_PI)
        n0 = np.floor(u).astype(np.int64)
        n0 = np.minimum(n0, M // 2)
        frac = u - n0
        n1 = np.minimum(n0 + 1, M // 2)
        return half[n0] * (1.0 - frac) + half[n1] * frac

    def moments(self, i: int, j: int, dtheta, M: int = DEFAULT_QUAD_POINTS):
        """(mu, sigma2) at arbitrary offsets; exact on grid offsets."""
        mu, s2 = self.moments_grid(i, j, M)
        return self.lookup(mu, M, dtheta), self.lookup(s2, M, dtheta)
