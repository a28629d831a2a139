"""Quality metrics of an embedding: logarithmic loss, empirical connection
probability, greedy routing and angle alignment against known angles."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .embed import Embedding
from .geometry import LOG_FLOOR, TWO_PI, ModelParams, cosh_distance_arg, cutoff_radius
from .graph import Graph


def embedding_from_truth(g: Graph, p: ModelParams, theta_by_rank, labels_by_rank=None) -> Embedding:
    """Wrap known birth-ordered angles as an Embedding (labels "1".."t" by
    default)."""
    theta = np.asarray(theta_by_rank, dtype=float)
    labels = tuple(labels_by_rank) if labels_by_rank is not None else tuple(str(i) for i in range(1, len(theta) + 1))
    deg = np.array([g.degree(lab) if lab in g else 0 for lab in labels], dtype=np.int64)
    return Embedding(p, labels, theta.copy(), deg, dict(method="real"))


class _Aligned:
    """Graph and embedding indexed the same way (embedding rank order)."""

    def __init__(self, g: Graph, e: Embedding):
        # embedded nodes absent from the graph (e.g. isolated nodes lost in an
        # edge list) are ignored; every graph node must be embedded
        placed = np.array([k for k in np.flatnonzero(~np.isnan(e.theta)) if e.labels[k] in g], dtype=np.int64)
        if len(placed) != len(g):
            have = {e.labels[k] for k in placed}
            miss = next(lab for lab in g.labels if lab not in have)
            raise ValueError(f"graph node {miss!r} has no coordinates")
        self.ranks = placed
        self.labels = [e.labels[k] for k in placed]
        self.theta = e.theta[placed]
        self.r = e.radius[placed]
        self.zr = e.params.zeta * self.r
        pos = np.array([g.index[lab] for lab in self.labels])
        inv = np.empty(len(g), dtype=np.int64)
        inv[pos] = np.arange(len(pos))
        self.nbrs = [np.sort(inv[g.adj[q]]) for q in pos]
        self.n = len(pos)
        self.label_order = np.empty(self.n, dtype=np.int64)
        self.label_order[np.argsort(np.array(self.labels, dtype=object), kind="stable")] = np.arange(self.n)

    def zdist_row(self, a: int, cols=None):
        """zeta * distance from node a to `cols` (default: all nodes > a)."""
        cols = np.arange(a + 1, self.n) if cols is None else cols
        arg = np.maximum(cosh_distance_arg(self.zr[a], self.zr[cols], self.theta[a] - self.theta[cols]), 1.0)
        return np.arccosh(arg)


def _pair_logterms(zx, linked, zR, T):
    y = (zx - zR) / (2.0 * T)
    y = np.where(linked, y, -y)
    return np.maximum(-np.logaddexp(0.0, y), LOG_FLOOR)


def log_loss(g: Graph, e: Embedding) -> float:
    """-ln of the likelihood of the whole adjacency matrix under final-time
    coordinates and the cutoff of the last node."""
    A = _Aligned(g, e)
    p = e.params
    zR = p.zeta * cutoff_radius(p.t, p)
    tot = 0.0
    for a in range(A.n - 1):
        zx = A.zdist_row(a)
        linked = np.zeros(A.n - a - 1, dtype=bool)
        nb = A.nbrs[a]
        linked[nb[nb > a] - a - 1] = True
        tot += float(_pair_logterms(zx, linked, zR, p.T).sum())
    return -tot


def log_loss_random_baseline(g: Graph, e: Embedding, trials: int = 10, seed: int = 0) -> float:
    """Mean log loss with the same radii and uniformly random angles."""
    rng = np.random.default_rng(seed)
    vals = []
    for _ in range(trials):
        th = e.theta.copy()
        mask = ~np.isnan(th)
        th[mask] = rng.uniform(0.0, TWO_PI, int(mask.sum()))
        vals.append(log_loss(g, Embedding(e.params, e.labels, th, e.degrees, {})))
    return float(np.mean(vals))


@dataclass
class Histogram:
    lo: np.ndarray
    hi: np.ndarray
    pairs: np.ndarray
    connected: np.ndarray

    @property
    def ratio(self) -> np.ndarray:
        return np.divide(self.connected, self.pairs, out=np.full(len(self.pairs), np.nan),
                         where=self.pairs > 0)

    def to_csv(self) -> str:
        lines = ["x_lo,x_hi,pairs,connected,ratio"]
        for a, b, n, c, r in zip(self.lo, self.hi, self.pairs, self.connected, self.ratio):
            lines.append(f"{a!r},{b!r},{int(n)},{int(c)},{'' if math.isnan(r) else repr(float(r))}")
        return "\n".join(lines) + "\n"


def _binned(values_iter, bin_width):
    counts: dict[int, list[int]] = {}
    for x, hit in values_iter:
        b = np.floor(x / bin_width).astype(np.int64)
        nb = np.bincount(b, minlength=0)
        nc = np.bincount(b[hit], minlength=len(nb))
        for k in np.flatnonzero(nb):
            c = counts.setdefault(int(k), [0, 0])
            c[0] += int(nb[k])
            c[1] += int(nc[k]) if k < len(nc) else 0
    if not counts:
        z = np.zeros(0)
        return Histogram(z, z, z.astype(np.int64), z.astype(np.int64))
    ks = np.arange(min(counts), max(counts) + 1)
    pairs = np.array([counts.get(int(k), [0, 0])[0] for k in ks], dtype=np.int64)
    conn = np.array([counts.get(int(k), [0, 0])[1] for k in ks], dtype=np.int64)
    return Histogram(ks * bin_width, (ks + 1) * bin_width, pairs, conn)


def empirical_connection_probability(g: Graph, e: Embedding, bin_width: float = 0.5) -> Histogram:
    """Fraction of connected pairs among all pairs at final-time distance x,
    in bins [k w, (k + 1) w)."""
    if bin_width <= 0:
        raise ValueError("bin width must be > 0")
    A = _Aligned(g, e)
    z = e.params.zeta

    def rows():
        for a in range(A.n - 1):
            x = A.zdist_row(a) / z
            linked = np.zeros(A.n - a - 1, dtype=bool)
            nb = A.nbrs[a]
            linked[nb[nb > a] - a - 1] = True
            yield x, linked

    return _binned(rows(), bin_width)


class Router:
    """Greedy forwarding over an embedded graph."""

    def __init__(self, g: Graph, e: Embedding):
        self.A = _Aligned(g, e)
        self.pos = {lab: k for k, lab in enumerate(self.A.labels)}

    def route_idx(self, s: int, d: int, max_hops: int | None = None) -> tuple[bool, int, list[int]]:
        A = self.A
        cap = A.n if max_hops is None else max_hops
        path = [s]
        cur, prev = s, -1
        while cur != d:
            if len(path) - 1 >= cap:
                return False, len(path) - 1, path
            nb = A.nbrs[cur]
            if nb.size == 0:
                return False, len(path) - 1, path
            zx = A.zdist_row(d, nb)
            best = zx.min()
            cand = nb[zx == best]
            nxt = int(cand[np.argmin(A.label_order[cand])]) if cand.size > 1 else int(cand[0])
            if nxt == prev:
                return False, len(path) - 1, path
            prev, cur = cur, nxt
            path.append(cur)
        return True, len(path) - 1, path


def greedy_route(g: Graph, e: Embedding, source: str, dest: str) -> tuple[bool, int]:
    """Forward to the neighbour closest to `dest` (ties: smallest label);
    fail when a packet would return to the node it just came from or after
    t hops. Returns (success, hops)."""
    if source == dest:
        raise ValueError("source and destination must differ")
    R = Router(g, e)
    ok, hops, _ = R.route_idx(R.pos[source], R.pos[dest])
    return ok, hops


def sample_pairs(n_nodes: int, num_pairs: int, seed: int):
    """Distinct ordered pairs (s, d), s != d, drawn uniformly; all of them
    when num_pairs covers every pair."""
    total = n_nodes * (n_nodes - 1)
    if num_pairs >= total:
        idx = np.arange(total)
    else:
        idx = np.sort(np.random.default_rng(seed).choice(total, size=num_pairs, replace=False))
    s = idx // (n_nodes - 1)
    d = idx % (n_nodes - 1)
    d = d + (d >= s)
    return s, d


def gr_stats(g: Graph, e: Embedding, num_pairs: int = 10_000, seed: int = 0,
             domain: str = "giant") -> tuple[float, float]:
    """(success ratio, mean hops of successful paths).

    Pairs are drawn among the nodes of the largest connected component
    (domain="giant") or among all nodes (domain="all")."""
    R = Router(g, e)
    if domain == "giant":
        comp = g.largest_component()
        nodes = np.sort(np.array([R.pos[g.labels[q]] for q in comp], dtype=np.int64))
    elif domain == "all":
        nodes = np.arange(R.A.n)
    else:
        raise ValueError("domain must be 'giant' or 'all'")
    if len(nodes) < 2:
        raise ValueError("need at least two nodes to route between")
    si, di = sample_pairs(len(nodes), num_pairs, seed)
    ok_n, hop_sum = 0, 0
    for a, b in zip(nodes[si], nodes[di]):
        ok, hops, _ = R.route_idx(int(a), int(b))
        if ok:
            ok_n += 1
            hop_sum += hops
    ps = ok_n / len(si)
    return ps, (hop_sum / ok_n if ok_n else float("nan"))


def _wrap(x):
    return np.angle(np.exp(1j * np.asarray(x, dtype=float)))


def align_angles(inferred, real) -> tuple[np.ndarray, dict]:
    """Rotate (and possibly reflect) inferred angles onto real ones.

    For each orientation the rotation is the circular mean of the
    differences; the orientation with the smaller mean absolute angular
    error wins. Returns the aligned angles in [0, 2 pi) and the transform.
    """
    inf = np.asarray(inferred, dtype=float)
    real = np.asarray(real, dtype=float)
    best = None
    for s in (1.0, -1.0):
        rot = float(np.angle(np.mean(np.exp(1j * (real - s * inf)))))
        al = np.mod(s * inf + rot, TWO_PI)
        err = float(np.mean(np.abs(_wrap(al - real))))
        if best is None or err < best[0]:
            best = (err, al, dict(reflect=s < 0, rotation=rot, mean_error=err))
    return best[1], best[2]


def angular_errors(aligned, real) -> np.ndarray:
    return np.abs(_wrap(np.asarray(aligned) - np.asarray(real)))


@dataclass
class EvalReport:
    scalars: dict = field(default_factory=dict)
    histograms: dict = field(default_factory=dict)

    def to_text(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in self.scalars.items())


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def evaluate(g: Graph, e: Embedding, real: Embedding | None = None, num_pairs: int = 10_000, seed: int = 0,
             trials: int = 10, bin_width: float = 0.5) -> EvalReport:
    rep = EvalReport()
    s = rep.scalars
    s["nodes"] = len(g)
    s["edges"] = g.n_edges
    s["LL_inf"] = log_loss(g, e)
    s["LL_rand"] = log_loss_random_baseline(g, e, trials, seed)
    if real is not None:
        s["LL_real"] = log_loss(g, real)
    ps, h = gr_stats(g, e, num_pairs, seed)
    s["gr_success"] = ps
    s["gr_mean_hops"] = h
    rep.histograms["inferred"] = empirical_connection_probability(g, e, bin_width)
    if real is not None:
        ps, h = gr_stats(g, real, num_pairs, seed)
        s["gr_success_real"] = ps
        s["gr_mean_hops_real"] = h
        rep.histograms["real"] = empirical_connection_probability(g, real, bin_width)
        common = [lab for lab in e.labels if lab in real.rank and not math.isnan(e.angle(lab))]
        al, tr = align_angles([e.angle(x) for x in common], [real.angle(x) for x in common])
        err = angular_errors(al, [real.angle(x) for x in common])
        s["angle_error_median"] = float(np.median(err))
        s["angle_error_mean"] = float(np.mean(err))
        s["alignment_reflected"] = tr["reflect"]
        s["alignment_rotation"] = tr["rotation"]
    return rep
