"""Maximum-likelihood placement of a network's nodes in the hyperbolic disc.

Nodes are replayed in birth order (decreasing degree). Each new node gets
the birth-time radius of its rank and the angle that maximises one of:

- "link":   the link/non-link likelihood against all older nodes;
- "cn":     the Gaussian likelihood of its common-neighbour counts;
- "hybrid": common neighbours while the expected number of links the node
            makes is at least the number of older nodes, links after that.

Optional correction sweeps revisit older link-placed nodes at chosen
times, and the fast variant narrows the link search to a window around
the maximiser of a neighbours-only likelihood.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import likelihood as lk
from .commonneighbors import DEFAULT_QUAD_POINTS, CNEngine, gaussian_term
from .geometry import TWO_PI, ModelParams, expected_degree_mbar, final_radii
from .graph import Graph, rank_by_degree

log = logging.getLogger(__name__)

METHODS = ("link", "cn", "hybrid")


@dataclass
class EmbedConfig:
    method: str = "hybrid"
    fast: bool = False
    k_speedup: int = 10
    C: float = 200.0
    correction_degrees: tuple = (60, 40, 20, 10)
    correction_repeats: int | None = None  # None: round(mean degree)
    theta1: float = math.pi
    quad_points: int = DEFAULT_QUAD_POINTS
    threads: int = 1
    max_rank: int | None = None  # stop after placing this many nodes

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS} (got {self.method!r})")
        if self.C <= 0:
            raise ValueError("C must be > 0")
        if self.k_speedup < 0:
            raise ValueError("k_speedup must be >= 0")
        if self.quad_points < 4 or self.quad_points % 2:
            raise ValueError("quad_points must be an even integer >= 4")
        self.correction_degrees = tuple(int(d) for d in self.correction_degrees)


@dataclass
class Embedding:
    params: ModelParams
    labels: tuple[str, ...]  # by rank
    theta: np.ndarray  # by rank, NaN where not placed
    degrees: np.ndarray  # by rank
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rank = {lab: k + 1 for k, lab in enumerate(self.labels)}

    @property
    def radius(self) -> np.ndarray:
        """Final-time radii r_i(t) by rank."""
        return final_radii(self.params, len(self.labels))

    @property
    def n_placed(self) -> int:
        return int(np.count_nonzero(~np.isnan(self.theta)))

    def angle(self, label: str) -> float:
        return float(self.theta[self.rank[label] - 1])

    def coords(self) -> dict[str, tuple[int, float, float]]:
        r = self.radius
        return {lab: (k + 1, float(r[k]), float(self.theta[k]))
                for k, lab in enumerate(self.labels) if not math.isnan(self.theta[k])}


def hybrid_cn_ranks(p: ModelParams) -> int:
    """Largest rank i with mbar_i(t) >= i - 1 (the common-neighbour phase)."""
    i = np.arange(1, p.t + 1)
    ok = np.asarray(expected_degree_mbar(i, p)) >= i - 1
    bad = np.flatnonzero(~ok)
    return int(bad[0]) if bad.size else p.t


def correction_schedule(degrees_by_rank: np.ndarray, thresholds) -> list[tuple[int, int]]:
    """(threshold, rank) pairs: corrections run right after the last node
    with degree >= threshold is placed. Thresholds nobody reaches are
    skipped."""
    out = []
    for d in thresholds:
        n = int(np.count_nonzero(degrees_by_rank >= d))
        if n == 0:
            log.info("no node has degree >= %d; correction step skipped", d)
            continue
        out.append((int(d), n))
    return out


class _Embedder:
    def __init__(self, g: Graph, p: ModelParams, cfg: EmbedConfig):
        if len(g) != p.t:
            raise ValueError(f"graph has {len(g)} nodes but params.t = {p.t}")
        if len(g) < 1:
            raise ValueError("empty graph")
        self.cfg = cfg
        self.p = p
        self.sched = rank_by_degree(g)
        self.rg = lk.RankedGraph.from_graph(g, self.sched, p)
        self.n = len(g)
        self.theta = np.full(self.n, np.nan)
        self.anchor = float(cfg.theta1) % TWO_PI
        # rank -> (grid index, grid size) for nodes placed on a common-neighbour grid
        self.grid_pos: dict[int, tuple[int, int]] = {}
        self.frozen = np.zeros(self.n, dtype=bool)
        self.engine = None
        if cfg.method == "cn":
            self.cn_upto = self.n
        elif cfg.method == "hybrid":
            self.cn_upto = hybrid_cn_ranks(p)
        else:
            self.cn_upto = 1
        self.info = dict(method=cfg.method, fast=cfg.fast, cn_ranks=min(self.cn_upto, self.n),
                         corrections=[], fast_fallbacks=[], fast_nodes=0)

    # -- common-neighbour placement -------------------------------------------------

    def _cn_grid_size(self, i: int) -> int:
        M = self.cfg.quad_points
        while TWO_PI / M > lk.angle_step(i) + 1e-15:
            M *= 2
        return M

    def place_cn(self, i: int):
        if self.engine is None:
            self.engine = CNEngine(self.p, self.cfg.threads)
        M = self._cn_grid_size(i)
        g = np.arange(M)
        ll = np.zeros(M)
        for j in range(1, i):
            n_obs = self.rg.common_neighbors(i, j)
            mu, s2 = self.engine.moments_grid(i, j, M)
            pos = self.grid_pos.get(j)
            if pos is not None and M % pos[1] == 0:
                gj = pos[0] * (M // pos[1])
                n = (g - gj) % M
                n = np.minimum(n, M - n)
                ll += gaussian_term(n_obs, mu[n], s2[n])
            else:
                off = self.anchor + TWO_PI * g / M - self.theta[j - 1]
                ll += gaussian_term(n_obs, CNEngine.lookup(mu, M, off), CNEngine.lookup(s2, M, off))
        th = np.mod(self.anchor + TWO_PI * g / M, TWO_PI)
        best = ll.max()
        cand = np.flatnonzero(ll == best)
        k = int(cand[np.argmin(th[cand])])
        self.theta[i - 1] = th[k]
        self.grid_pos[i] = (k, M)
        self.frozen[i - 1] = True
        # banks of nodes placed on coarser grids are rebuilt on demand

    # -- link placement ---------------------------------------------------------------

    def place_link(self, i: int):
        grid = lk.angle_grid(i, self.anchor)
        vals = lk.link_loglik(i, grid, self.rg, self.theta, self.cfg.threads)
        self.theta[i - 1] = grid[int(np.argmax(vals))]

    def place_fast(self, i: int):
        theta, info = fast_place(i, self.rg, self.theta, self.cfg.C, self.anchor, self.cfg.threads)
        self.theta[i - 1] = theta
        if info["fallback"]:
            self.info["fast_fallbacks"].append(self.rg.labels[i - 1])
        else:
            self.info["fast_nodes"] += 1

    # -- corrections ------------------------------------------------------------------

    def correct(self, i: int, repeats: int):
        for _ in range(repeats):
            correction_pass(i, self.rg, self.theta, self.frozen, self.anchor, self.cfg.threads)

    def run(self) -> Embedding:
        cfg = self.cfg
        t0 = time.perf_counter()
        upto = self.n if cfg.max_rank is None else max(1, min(self.n, int(cfg.max_rank)))
        repeats = cfg.correction_repeats
        if repeats is None:
            repeats = int(round(float(self.rg.degrees.mean())))
        triggers: dict[int, list[int]] = {}
        for d, r in correction_schedule(self.rg.degrees, cfg.correction_degrees):
            triggers.setdefault(r, []).append(d)
        self.theta[0] = self.anchor
        self.grid_pos[1] = (0, cfg.quad_points)
        if self.cn_upto >= 1 and cfg.method != "link":
            self.frozen[0] = True
        for i in range(2, upto + 1):
            if i <= self.cn_upto:
                self.place_cn(i)
            elif cfg.fast and self.rg.degrees[i - 1] < cfg.k_speedup:
                self.place_fast(i)
            else:
                self.place_link(i)
            if i == self.cn_upto and self.engine is not None:
                self.engine = None  # release the transform banks
            for d in triggers.get(i, ()):
                self.correct(i, repeats)
                self.info["corrections"].append(dict(threshold=d, rank=i, repeats=repeats))
        self.info["wall_time"] = time.perf_counter() - t0
        self.info["placed"] = upto
        return Embedding(self.p, self.rg.labels, self.theta.copy(), self.rg.degrees.copy(), self.info)


def fast_place(i: int, rg: lk.RankedGraph, theta: np.ndarray, C: float = 200.0, anchor: float = 0.0,
               threads: int = 1) -> tuple[float, dict]:
    """Neighbours-only estimate on the full grid, then the full link
    likelihood on the grid points within C / i of it."""
    grid = lk.angle_grid(i, anchor)
    nb = rg.nbrs[i - 1]
    if not np.any(nb < i - 1):
        vals = lk.link_loglik(i, grid, rg, theta, threads)
        return float(grid[int(np.argmax(vals))]), dict(fallback=True, theta_init=None)
    init = lk.init_loglik(i, grid, rg, theta, threads)
    th0 = float(grid[int(np.argmax(init))])
    half = C / i
    if half >= math.pi:
        win = grid
    else:
        d = np.abs(grid - th0) % TWO_PI
        d = np.minimum(d, TWO_PI - d)
        win = grid[d <= half + 1e-12]
    vals = lk.link_loglik(i, win, rg, theta, threads)
    return float(win[int(np.argmax(vals))]), dict(fallback=False, theta_init=th0)


def correction_pass(i: int, rg: lk.RankedGraph, theta: np.ndarray, frozen=None, anchor: float = 0.0,
                    threads: int = 1) -> int:
    """One sweep over ranks 1..i in ascending order, moving each unfrozen
    node to the grid angle maximising its likelihood against all other
    nodes of rank <= i. A node only moves if that strictly improves on its
    current angle. Returns the number of nodes moved."""
    if i < 2:
        return 0
    grid = lk.angle_grid(i, anchor)
    moved = 0
    for j in range(1, i + 1):
        if frozen is not None and frozen[j - 1]:
            continue
        ls, C, D, zR, sign = lk.correction_columns(j, i, rg)
        q = 1.0 / (2.0 * rg.params.T)
        cur = lk.pair_terms_sum(theta[j - 1:j], theta[ls - 1], C, D, zR, sign, q, 1)[0]
        vals = lk.pair_terms_sum(grid, theta[ls - 1], C, D, zR, sign, q, threads)
        k = int(np.argmax(vals))
        if vals[k] > cur:
            theta[j - 1] = grid[k]
            moved += 1
    return moved


def estimate_params(g: Graph, T: float, zeta: float = 1.0, m=None, L=None, gamma=None,
                    gamma_kmin: int | None = None) -> ModelParams:
    """Model parameters of an observed network; given values are kept.

    m defaults to the smallest degree, L to (mean degree - 2m) / 2 and gamma
    to a discrete power-law fit of degrees >= gamma_kmin (default: the
    rounded-up mean degree).
    """
    from .generate import powerlaw_exponent

    deg = g.degrees[g.degrees > 0]
    if deg.size == 0:
        raise ValueError("graph has no links")
    kbar = float(g.degrees.mean())
    if m is None:
        m = float(deg.min())
    if L is None:
        L = max(0.0, (kbar - 2.0 * m) / 2.0)
    if gamma is None:
        kmin = gamma_kmin if gamma_kmin is not None else max(2, int(math.ceil(kbar)))
        gamma = powerlaw_exponent(g.degrees, kmin)
        if gamma <= 2.0:
            raise ValueError(f"fitted degree exponent {gamma:.3f} is <= 2; pass gamma explicitly")
    return ModelParams.from_gamma(m, L, gamma, T, len(g), zeta)


def embed(g: Graph, p: ModelParams, config: EmbedConfig | None = None) -> Embedding:
    return _Embedder(g, p, config or EmbedConfig()).run()


# -- coordinate files -----------------------------------------------------------------

COORD_HEADER = "# label rank degree r theta"


def format_coordinates(e: Embedding) -> str:
    p = e.params
    lines = [f"# params m={p.m!r} L={p.L!r} beta={p.beta!r} T={p.T!r} zeta={p.zeta!r} t={p.t}",
             COORD_HEADER]
    r = e.radius
    for k, lab in enumerate(e.labels):
        th = e.theta[k]
        if math.isnan(th):
            continue
        lines.append(f"{lab} {k + 1} {int(e.degrees[k])} {float(r[k])!r} {float(th)!r}")
    return "\n".join(lines) + "\n"


def read_coordinates(path, params: ModelParams | None = None) -> Embedding:
    """Read a coordinate file. Model parameters come from its '# params'
    line unless given."""
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                if s.startswith("# params") and params is None:
                    kv = dict(x.split("=", 1) for x in s[len("# params"):].split())
                    params = ModelParams(m=float(kv["m"]), L=float(kv["L"]), beta=float(kv["beta"]),
                                         T=float(kv["T"]), zeta=float(kv["zeta"]), t=int(kv["t"]))
                continue
            parts = s.split()
            if len(parts) != 5:
                raise ValueError(f"{path}:{lineno}: expected 'label rank degree r theta'")
            rows.append((parts[0], int(parts[1]), int(parts[2]), float(parts[4])))
    if params is None:
        raise ValueError(f"{path}: no '# params' line and no parameters given")
    n = params.t
    labels: list[str | None] = [None] * n
    theta = np.full(n, np.nan)
    deg = np.zeros(n, dtype=np.int64)
    for lab, rank, k, th in rows:
        if not 1 <= rank <= n or labels[rank - 1] is not None:
            raise ValueError(f"{path}: bad or repeated rank {rank}")
        labels[rank - 1] = lab
        theta[rank - 1] = th
        deg[rank - 1] = k
    if any(lab is None for lab in labels):
        # a partial file: ranks without a row keep a placeholder label
        labels = [lab if lab is not None else f"__unplaced_{k + 1}" for k, lab in enumerate(labels)]
    return Embedding(params, tuple(labels), theta, deg, {})
