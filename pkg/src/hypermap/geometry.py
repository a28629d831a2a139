"""Hyperbolic-disc geometry of growing networks.

Radial schedule, distances, the logistic connection probability and the
cutoff radius that keeps the expected number of links of a new node fixed.
All functions broadcast over numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

TWO_PI = 2.0 * math.pi

# log terms of the likelihoods are floored here so that p = 0 or 1 stays finite
LOG_FLOOR = math.log(1e-300)

# below this |beta - 1/2| the (t/i)^(2b-1) term switches to its logarithmic limit
_HALF_BETA_TOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the growth model.

    m: links a new node makes on arrival, L: internal links per step,
    beta: radial drift (gamma = 1 + 1/beta), T: temperature,
    zeta: sqrt(-curvature), t: final network size.
    """

    m: float
    L: float
    beta: float
    T: float
    zeta: float = 1.0
    t: int = 1

    def __post_init__(self):
        if not (self.m >= 0 and math.isfinite(self.m)):
            raise ValueError(f"m must be a finite number >= 0 (got {self.m})")
        if not (self.L >= 0 and math.isfinite(self.L)):
            raise ValueError(f"L must be a finite number >= 0 (got {self.L})")
        if not (0.0 < self.beta <= 1.0):
            raise ValueError(f"beta must lie in (0, 1] (got {self.beta})")
        if not (0.0 < self.T < 1.0):
            raise ValueError(f"T must lie in the open interval (0, 1) (got {self.T})")
        if self.T < 0.01:
            raise ValueError(f"T below 0.01 is not supported (got {self.T}); valid range is [0.01, 1)")
        if not (self.zeta > 0 and math.isfinite(self.zeta)):
            raise ValueError(f"zeta must be > 0 (got {self.zeta})")
        if int(self.t) != self.t or self.t < 1:
            raise ValueError(f"t must be a positive integer (got {self.t})")
        object.__setattr__(self, "t", int(self.t))

    @classmethod
    def from_gamma(cls, m, L, gamma, T, t, zeta=1.0):
        if not gamma > 2.0 - 1e-15:
            raise ValueError(f"gamma must be >= 2 (got {gamma})")
        return cls(m=m, L=L, beta=1.0 / (gamma - 1.0), T=T, zeta=zeta, t=t)

    @property
    def gamma(self) -> float:
        return 1.0 + 1.0 / self.beta

    def replace(self, **kw) -> "ModelParams":
        d = dict(m=self.m, L=self.L, beta=self.beta, T=self.T, zeta=self.zeta, t=self.t)
        d.update(kw)
        return ModelParams(**d)

    def as_dict(self) -> dict:
        return dict(m=self.m, L=self.L, beta=self.beta, gamma=self.gamma, T=self.T,
                    zeta=self.zeta, t=self.t)


@dataclass(frozen=True)
class PolarCoord:
    r: float
    theta: float


def radial_initial(i, p: ModelParams):
    """Radius of node i at its birth, (2/zeta) ln i."""
    i = np.asarray(i, dtype=float)
    if np.any(i < 1):
        raise ValueError("node index must be >= 1")
    out = (2.0 / p.zeta) * np.log(i)
    return float(out) if out.ndim == 0 else out


def radial_at(j, i, p: ModelParams):
    """Radius of node j at time i >= j after outward drift."""
    j = np.asarray(j, dtype=float)
    i = np.asarray(i, dtype=float)
    if np.any(j < 1) or np.any(i < j):
        raise ValueError("radial_at needs 1 <= j <= i")
    out = (2.0 / p.zeta) * (p.beta * np.log(j) + (1.0 - p.beta) * np.log(i))
    return float(out) if out.ndim == 0 else out


def angular_separation(a, b):
    """Angle between two directions, folded into [0, pi]."""
    d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % TWO_PI
    out = math.pi - np.abs(math.pi - d)
    return float(out) if out.ndim == 0 else out


def cosh_distance_arg(r_a, r_b, dtheta, zeta=1.0):
    """cosh(zeta * x) for two points at radii r_a, r_b separated by dtheta.

    Uses cosh(a - b) + 2 sinh(a) sinh(b) sin^2(dtheta / 2), which equals the
    usual hyperbolic law of cosines but does not cancel for small angles.
    """
    a = zeta * np.asarray(r_a, dtype=float)
    b = zeta * np.asarray(r_b, dtype=float)
    s = np.sin(0.5 * np.asarray(dtheta, dtype=float))
    return np.cosh(a - b) + 2.0 * np.sinh(a) * np.sinh(b) * s * s


def hyperbolic_distance(a, b, zeta=1.0):
    """Distance between two PolarCoord points (or (r, theta) tuples)."""
    ra, ta = (a.r, a.theta) if isinstance(a, PolarCoord) else a
    rb, tb = (b.r, b.theta) if isinstance(b, PolarCoord) else b
    return distance(ra, rb, angular_separation(ta, tb), zeta)


def distance(r_a, r_b, dtheta, zeta=1.0):
    """Vectorised hyperbolic distance from radii and angular separation."""
    arg = np.maximum(cosh_distance_arg(r_a, r_b, dtheta, zeta), 1.0)
    out = np.arccosh(arg) / zeta
    return float(out) if np.ndim(out) == 0 else out


def connection_probability(x, R, T, zeta=1.0):
    """Fermi-Dirac connection probability 1 / (1 + exp(zeta (x - R) / 2T))."""
    if not 0.0 < T < 1.0:
        raise ValueError(f"T must lie in the open interval (0, 1) (got {T})")
    z = zeta * (np.asarray(x, dtype=float) - np.asarray(R, dtype=float)) / (2.0 * T)
    out = expit(-z)
    return float(out) if np.ndim(out) == 0 else out


def _tail_integral(i, beta):
    """I_i = (1 - i^-(1-beta)) / (1 - beta); ln i in the beta -> 1 limit."""
    i = np.asarray(i, dtype=float)
    a = 1.0 - beta
    if a < 1e-12:
        return np.log(i)
    # -expm1(-a ln i) / a keeps precision for small a
    return -np.expm1(-a * np.log(i)) / a


def expected_degree_mbar(i, p: ModelParams):
    """Expected number of links node i makes with existing nodes when it
    appears in a network that will reach size p.t."""
    if p.beta >= 1.0:
        raise ValueError("expected link count is undefined at beta = 1 (gamma = 2); use beta < 1")
    i_arr = np.asarray(i, dtype=float)
    if np.any(i_arr < 1) or np.any(i_arr > p.t):
        raise ValueError(f"node index must lie in [1, t={p.t}]")
    t = float(p.t)
    b = p.beta
    a = 1.0 - b
    e = 2.0 * b - 1.0
    lr = np.log(t / i_arr)
    if abs(e) < _HALF_BETA_TOL:
        growth = lr
    else:
        growth = np.expm1(e * lr) / e
    front = 2.0 * p.L * a / (-np.expm1(-a * math.log(t))) ** 2 if t > 1 else 0.0
    out = p.m + front * growth * (-np.expm1(-a * np.log(i_arr)))
    return float(out) if out.ndim == 0 else out


def cutoff_radius(i, p: ModelParams):
    """Connection cutoff R_i of node i at its birth time.

    For node 1 the expression diverges to +inf (there is nothing to connect
    to); +inf is returned, so p(x) = 1 there, which never enters any sum.
    """
    i_arr = np.asarray(i, dtype=float)
    mbar = np.asarray(expected_degree_mbar(i_arr, p), dtype=float)
    I = np.asarray(_tail_integral(i_arr, p.beta), dtype=float)
    r = (2.0 / p.zeta) * np.log(i_arr)
    pref = 2.0 * p.T / math.sin(p.T * math.pi)
    with np.errstate(divide="ignore"):
        out = r - (2.0 / p.zeta) * np.log(pref * I / mbar)
    out = np.where(I <= 0, np.inf, out)
    return float(out) if out.ndim == 0 else out


def birth_radii(p: ModelParams, n: int | None = None):
    """r_i for i = 1..n as an array indexed by i - 1."""
    n = p.t if n is None else n
    return (2.0 / p.zeta) * np.log(np.arange(1, n + 1, dtype=float))


def final_radii(p: ModelParams, n: int | None = None):
    """r_i(t) for i = 1..n at the final time p.t."""
    n = p.t if n is None else n
    ranks = np.arange(1, n + 1, dtype=float)
    return (2.0 / p.zeta) * (p.beta * np.log(ranks) + (1.0 - p.beta) * math.log(p.t))


def cutoff_radii(p: ModelParams, n: int | None = None):
    n = p.t if n is None else n
    return np.asarray(cutoff_radius(np.arange(1, n + 1), p), dtype=float)


def pair_link_probability(young, old, theta_young, theta_old, p: ModelParams, R=None):
    """Probability that node `young` links to the older node `old` when
    `young` is born, given their angles. Arrays broadcast; `R` may carry
    precomputed cutoffs of the young nodes."""
    young = np.asarray(young, dtype=float)
    old = np.asarray(old, dtype=float)
    ry = (2.0 / p.zeta) * np.log(young)
    ro = (2.0 / p.zeta) * (p.beta * np.log(old) + (1.0 - p.beta) * np.log(young))
    if R is None:
        R = cutoff_radius(young, p)
    dth = np.asarray(theta_young, dtype=float) - np.asarray(theta_old, dtype=float)
    zx = np.arccosh(np.maximum(cosh_distance_arg(ry, ro, dth, p.zeta), 1.0))
    return expit(-(zx - p.zeta * np.asarray(R, dtype=float)) / (2.0 * p.T))
