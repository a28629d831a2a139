"""Future-link prediction from an embedding of an earlier snapshot, with
preferential-attachment and common-neighbour baselines, plus angular
centres of node groups."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .embed import Embedding
from .geometry import TWO_PI, cosh_distance_arg
from .graph import Graph

log = logging.getLogger(__name__)

METHODS = ("hyperbolic", "pa", "cn")


@dataclass
class LabeledPairs:
    """Pairs of base-snapshot nodes that are disconnected in the base.

    a, b are positions into `labels`; y is 1 when the pair is linked in the
    future snapshot.
    """

    labels: tuple[str, ...]
    a: np.ndarray
    b: np.ndarray
    y: np.ndarray

    def subset(self, mask) -> "LabeledPairs":
        mask = np.asarray(mask, dtype=bool)
        return LabeledPairs(self.labels, self.a[mask], self.b[mask], self.y[mask])

    def __len__(self):
        return len(self.a)

    @property
    def n_pos(self) -> int:
        return int(self.y.sum())


def labeled_pairs(base: Graph, future: Graph) -> LabeledPairs:
    """Every pair of base nodes disconnected in the base, labelled by
    whether it is connected in the future graph. Links touching nodes new in
    the future are ignored."""
    missing = [lab for lab in base.labels if lab not in future]
    if missing:
        raise ValueError(f"future snapshot lacks base node {missing[0]!r}")
    n = len(base)
    fut_pos = np.array([future.index[lab] for lab in base.labels])
    base_of_future = np.full(len(future), -1, dtype=np.int64)
    base_of_future[fut_pos] = np.arange(n)
    aa, bb, yy = [], [], []
    for a in range(n - 1):
        bs = np.arange(a + 1, n)
        linked = np.zeros(n, dtype=bool)
        linked[base.adj[a]] = True
        keep = ~linked[a + 1:]
        fl = np.zeros(n, dtype=bool)
        fn = base_of_future[future.adj[fut_pos[a]]]
        fl[fn[fn >= 0]] = True
        aa.append(np.full(int(keep.sum()), a, dtype=np.int32))
        bb.append(bs[keep].astype(np.int32))
        yy.append(fl[a + 1:][keep].astype(np.int8))
    if not aa:
        z = np.zeros(0, dtype=np.int32)
        return LabeledPairs(base.labels, z, z, z.astype(np.int8))
    return LabeledPairs(base.labels, np.concatenate(aa), np.concatenate(bb), np.concatenate(yy))


def common_neighbor_counts(g: Graph, a, b, block: int = 1 << 20) -> np.ndarray:
    A = g.adjacency().tocsr().astype(np.int32)
    out = np.empty(len(a), dtype=np.int64)
    for s in range(0, len(a), block):
        ra = A[a[s:s + block]]
        rb = A[b[s:s + block]]
        out[s:s + block] = np.asarray(ra.multiply(rb).sum(axis=1)).ravel()
    return out


def score_pairs(pairs: LabeledPairs, method: str, base: Graph, embedding: Embedding | None = None):
    """Scores oriented so that higher means a link is more likely.

    hyperbolic: minus the final-time distance; pa: k_a k_b; cn: common
    neighbours in the base graph.
    """
    if method == "hyperbolic":
        if embedding is None:
            raise ValueError("hyperbolic scores need an embedding")
        return -pair_distances(pairs, embedding)
    if method == "pa":
        k = base.degrees.astype(float)
        return k[pairs.a] * k[pairs.b]
    if method == "cn":
        if any(x != y for x, y in zip(pairs.labels, base.labels)):
            raise ValueError("pairs were built on a different graph")
        return common_neighbor_counts(base, pairs.a, pairs.b).astype(float)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def pair_distances(pairs: LabeledPairs, e: Embedding) -> np.ndarray:
    idx = np.array([e.rank[lab] - 1 for lab in pairs.labels])
    th = e.theta[idx]
    if np.isnan(th).any():
        raise ValueError("every node must be embedded")
    zr = e.params.zeta * e.radius[idx]
    arg = np.maximum(cosh_distance_arg(zr[pairs.a], zr[pairs.b], th[pairs.a] - th[pairs.b]), 1.0)
    return np.arccosh(arg) / e.params.zeta


def auc(pos_scores, neg_scores) -> float:
    """P(score of a random positive > that of a random negative), ties
    counting one half. Exact; O((P + N) log P)."""
    pos = np.sort(np.asarray(pos_scores, dtype=float))
    neg = np.asarray(neg_scores, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("AUC needs at least one positive and one negative")
    below = np.searchsorted(pos, neg, side="left")  # positives < neg
    upto = np.searchsorted(pos, neg, side="right")  # positives <= neg
    greater = pos.size - upto
    ties = upto - below
    return float((greater.sum() + 0.5 * ties.sum()) / (pos.size * neg.size))


def pairs_auc(pairs: LabeledPairs, scores) -> float:
    y = pairs.y.astype(bool)
    return auc(scores[y], scores[~y])


def future_link_curve(pairs: LabeledPairs, e: Embedding, bin_width: float = 0.5):
    """(x_lo, x_hi, pairs, new_links, ratio) over base-disconnected pairs
    binned by their distance in the base embedding."""
    from .evaluate import Histogram

    x = pair_distances(pairs, e)
    b = np.floor(x / bin_width).astype(np.int64)
    if b.size == 0:
        z = np.zeros(0)
        return Histogram(z, z, z.astype(np.int64), z.astype(np.int64))
    lo = b.min()
    n = np.bincount(b - lo)
    c = np.bincount(b - lo, weights=pairs.y.astype(float), minlength=len(n)).astype(np.int64)
    ks = np.arange(lo, lo + len(n))
    return Histogram(ks * bin_width, (ks + 1) * bin_width, n.astype(np.int64), c)


def prediction_slices(pairs: LabeledPairs, base: Graph) -> dict[str, np.ndarray]:
    """Masks of the evaluated pair subsets: all pairs, pairs without common
    neighbours, and pairs whose endpoints both have degree below the mean
    degree of the base snapshot."""
    cn = common_neighbor_counts(base, pairs.a, pairs.b)
    k = base.degrees
    kbar = base.mean_degree()
    return {
        "all": np.ones(len(pairs), dtype=bool),
        "zero_cn": cn == 0,
        "low_degree": (k[pairs.a] < kbar) & (k[pairs.b] < kbar),
    }


def prediction_report(base: Graph, future: Graph, e: Embedding, methods=METHODS):
    """Rows (method, subset, auc, positives, negatives)."""
    pairs = labeled_pairs(base, future)
    slices = prediction_slices(pairs, base)
    rows = []
    for m in methods:
        s = score_pairs(pairs, m, base, e)
        for name, mask in slices.items():
            y = pairs.y[mask].astype(bool)
            npos, nneg = int(y.sum()), int((~y).sum())
            val = auc(s[mask][y], s[mask][~y]) if npos and nneg else float("nan")
            rows.append((m, name, val, npos, nneg))
    return rows, pairs


def center_of_mass(thetas, bin_deg: float = 3.6) -> tuple[float, bool]:
    """Angular centre of a group from its histogram with bins of `bin_deg`
    degrees: the count-weighted mean of bin centres, in radians.

    The second value flags groups whose members straddle angle 0, where the
    linear average is misleading: the largest empty arc between members does
    not contain angle 0.
    """
    th = np.mod(np.asarray(thetas, dtype=float), TWO_PI)
    if th.size == 0:
        raise ValueError("empty group")
    w = math.radians(bin_deg)
    nb = int(round(TWO_PI / w))
    b = np.minimum((th / w).astype(np.int64), nb - 1)
    n = np.bincount(b, minlength=nb)
    centers = (np.arange(nb) + 0.5) * w
    cm = float((centers * n).sum() / n.sum())
    s = np.sort(th)
    gaps = np.diff(np.concatenate([s, [s[0] + TWO_PI]]))
    k = int(np.argmax(gaps))
    wraps = k != len(s) - 1  # the widest gap is not the one across 0
    if wraps and th.size > 1:
        log.warning("group spans angle 0; its linear centre of mass is unreliable")
    return cm, bool(wraps and th.size > 1)


def read_groups(path) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ValueError(f"{path}:{lineno}: expected 'label group'")
            groups.setdefault(parts[1], []).append(parts[0])
    return groups
