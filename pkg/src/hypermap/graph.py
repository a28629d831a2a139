"""Undirected simple graphs with opaque string labels, edge-list IO and the
degree-based birth order used by the embedder."""
from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

log = logging.getLogger(__name__)


class Graph:
    """Immutable undirected graph without self-loops or multi-edges.

    Nodes are stored in insertion order; `index` maps a label to its
    position and `adj[pos]` is the sorted array of neighbour positions.
    """

    def __init__(self, labels: Iterable[str], edges: Iterable[tuple[str, str]] = ()):
        self.labels: tuple[str, ...] = tuple(str(x) for x in labels)
        self.index = {lab: k for k, lab in enumerate(self.labels)}
        if len(self.index) != len(self.labels):
            raise ValueError("duplicate node labels")
        nbrs: list[set[int]] = [set() for _ in self.labels]
        for a, b in edges:
            ia, ib = self.index[str(a)], self.index[str(b)]
            if ia == ib:
                raise ValueError(f"self-loop on {a}")
            nbrs[ia].add(ib)
            nbrs[ib].add(ia)
        self.adj = tuple(np.array(sorted(s), dtype=np.int64) for s in nbrs)
        self._nbr_sets = tuple(frozenset(s) for s in nbrs)
        self.degrees = np.array([len(s) for s in nbrs], dtype=np.int64)
        self.n_edges = int(self.degrees.sum() // 2)
        self._csr = None

    @classmethod
    def from_index_edges(cls, labels, pairs):
        """Build from integer endpoint pairs (positions into labels)."""
        labels = [str(x) for x in labels]
        return cls(labels, ((labels[a], labels[b]) for a, b in pairs))

    def __len__(self):
        return len(self.labels)

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    def __contains__(self, label):
        return label in self.index

    def degree(self, label: str) -> int:
        return int(self.degrees[self.index[label]])

    def neighbors(self, label: str) -> list[str]:
        return [self.labels[k] for k in self.adj[self.index[label]]]

    def has_edge(self, a: str, b: str) -> bool:
        return self.index[b] in self._nbr_sets[self.index[a]]

    def has_edge_idx(self, a: int, b: int) -> bool:
        return b in self._nbr_sets[a]

    def edges(self):
        """Each edge once, as (label, label) with the lower position first."""
        for a, nb in enumerate(self.adj):
            for b in nb[nb > a]:
                yield self.labels[a], self.labels[int(b)]

    def index_edges(self) -> np.ndarray:
        out = [(a, int(b)) for a, nb in enumerate(self.adj) for b in nb[nb > a]]
        return np.array(out, dtype=np.int64).reshape(-1, 2)

    def mean_degree(self) -> float:
        return float(self.degrees.mean()) if len(self) else 0.0

    def adjacency(self) -> sp.csr_matrix:
        if self._csr is None:
            e = self.index_edges()
            n = len(self)
            data = np.ones(2 * len(e), dtype=np.int64)
            rows = np.concatenate([e[:, 0], e[:, 1]])
            cols = np.concatenate([e[:, 1], e[:, 0]])
            self._csr = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
        return self._csr

    def subgraph(self, labels: Iterable[str]) -> "Graph":
        keep = [lab for lab in labels]
        ks = set(keep)
        return Graph(keep, ((a, b) for a, b in self.edges() if a in ks and b in ks))

    def components(self) -> list[list[int]]:
        n_comp, lab = csgraph.connected_components(self.adjacency(), directed=False)
        comps: list[list[int]] = [[] for _ in range(n_comp)]
        for k, c in enumerate(lab):
            comps[c].append(k)
        return comps

    def largest_component(self) -> list[int]:
        """Positions of the largest connected component (ties: the one holding
        the lowest position)."""
        if not len(self):
            return []
        return max(self.components(), key=lambda c: (len(c), -c[0]))


def common_neighbors(g: Graph, a: str, b: str) -> int:
    return len(g._nbr_sets[g.index[a]] & g._nbr_sets[g.index[b]])


@dataclass
class LoadReport:
    n_lines: int = 0
    n_edges: int = 0
    self_loops: int = 0
    duplicates: int = 0
    malformed: list[int] = field(default_factory=list)


class EdgeListError(ValueError):
    pass


def load_edge_list(path: str | os.PathLike, strict: bool = True) -> tuple[Graph, LoadReport]:
    """Read a whitespace-separated edge list.

    Lines starting with '#' and blank lines are skipped. Self-loops and
    repeated edges are dropped and counted. Lines without exactly two
    fields are an error when strict, otherwise they are recorded and skipped.
    """
    rep = LoadReport()
    labels: dict[str, None] = {}
    seen: set[tuple[str, str]] = set()
    edges: list[tuple[str, str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            rep.n_lines += 1
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                if strict:
                    raise EdgeListError(f"{path}:{lineno}: expected two labels, got {len(parts)} fields")
                rep.malformed.append(lineno)
                continue
            a, b = parts
            if a == b:
                rep.self_loops += 1
                continue
            key = (a, b) if a < b else (b, a)
            if key in seen:
                rep.duplicates += 1
                continue
            seen.add(key)
            labels.setdefault(a)
            labels.setdefault(b)
            edges.append((a, b))
    rep.n_edges = len(edges)
    if rep.self_loops or rep.duplicates:
        log.info("%s: dropped %d self-loops and %d duplicate edges", path, rep.self_loops, rep.duplicates)
    return Graph(labels.keys(), edges), rep


def format_edge_list(g: Graph, header: str | None = None) -> str:
    lines = []
    if header:
        lines.extend("# " + h for h in header.splitlines())
    lines.extend(f"{a} {b}" for a, b in g.edges())
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class GrowthSchedule:
    """Birth order: order[rank - 1] is the label born at that rank."""

    order: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "rank", {lab: k + 1 for k, lab in enumerate(self.order)})

    def __len__(self):
        return len(self.order)

    def label_of(self, rank: int) -> str:
        return self.order[rank - 1]

    def rank_of(self, label: str) -> int:
        return self.rank[label]


def rank_by_degree(g: Graph) -> GrowthSchedule:
    """Order nodes by decreasing degree, ties by ascending label."""
    order = sorted(g.labels, key=lambda lab: (-g.degree(lab), lab))
    return GrowthSchedule(tuple(order))
