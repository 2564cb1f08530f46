"""Non-crossing graph construction, point insertion and layered adjacency.

Vertices are indexed in input order. Edges are stored as sorted index pairs.
``build`` sweeps points by descending x and connects each new point to the
hull vertices it can see. ``insert`` splits the graph with a vertical line
through the new point, joins the point to the right half, then re-stitches
the two halves across the line.
"""
from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DegenerateInput, DuplicatePoint, UnknownVertex
from .geometry import (
    Hull,
    PlanarPoint,
    cross,
    hull_chain,
    inside_or_on,
    sees,
    strictly_between,
)

Edge = tuple[int, int]

_INT64_SAFE = 1 << 30


def _edge(i: int, j: int) -> Edge:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class NonCrossingGraph:
    vertices: tuple[PlanarPoint, ...]
    edges: frozenset[Edge]
    hull_idx: tuple[int, ...] = field(compare=False)

    @property
    def hull(self) -> Hull:
        return Hull(tuple(self.vertices[i] for i in self.hull_idx))

    @cached_property
    def xy(self) -> list[tuple[int, int]]:
        return [v.xy for v in self.vertices]

    @cached_property
    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {i: [] for i in range(len(self.vertices))}
        for i, j in sorted(self.edges):
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def is_connected(self) -> bool:
        return len(_components(len(self.vertices), self.edges)) <= 1

    def dump(self) -> str:
        """Line-oriented text dump: ``V id x y`` lines then ``E id1 id2`` lines."""
        lines = [f"V {i} {v.x} {v.y}" for i, v in enumerate(self.vertices)]
        lines += [f"E {i} {j}" for i, j in sorted(self.edges)]
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str) -> "NonCrossingGraph":
        verts: dict[int, PlanarPoint] = {}
        edges = set()
        for line in text.splitlines():
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "V":
                verts[int(parts[1])] = PlanarPoint(int(parts[2]), int(parts[3]))
            elif parts[0] == "E":
                edges.add(_edge(int(parts[1]), int(parts[2])))
            else:
                raise ValueError(f"bad graph dump line: {line!r}")
        vs = tuple(verts[i] for i in range(len(verts)))
        return cls(vs, frozenset(edges), tuple(hull_chain([v.xy for v in vs])))


@dataclass(frozen=True)
class InsertionOutcome:
    new_graph: NonCrossingGraph
    inserted_vertex: int
    incident_edges: tuple[Edge, ...]


def _components(n: int, edges: Iterable[Edge]) -> list[list[int]]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = defaultdict(list)
    for i in range(n):
        groups[find(i)].append(i)
    return sorted(groups.values())


# ---------------------------------------------------------------------------
# build (sweep by descending x)

def _check_distinct(points: Sequence[PlanarPoint]) -> None:
    seen: dict[tuple[int, int], int] = {}
    clashes = []
    for i, p in enumerate(points):
        if p.xy in seen:
            clashes.append((seen[p.xy], i))
        else:
            seen[p.xy] = i
    if clashes:
        a, b = clashes[0]
        ids = [points[a].id if points[a].id is not None else a, points[b].id if points[b].id is not None else b]
        raise DuplicatePoint(f"duplicate point {points[a].xy} (ids {ids[0]!r}, {ids[1]!r})", ids)


def build(points: Sequence[PlanarPoint]) -> NonCrossingGraph:
    _check_distinct(points)
    if len(points) < 3:
        raise DegenerateInput(f"need at least 3 points, got {len(points)}")
    xy = [p.xy for p in points]
    order = sorted(range(len(points)), key=lambda i: (-xy[i][0], -xy[i][1]))

    a, b = order[0], order[1]
    k = next((k for k in range(2, len(order)) if cross(xy[a], xy[b], xy[order[k]]) != 0), None)
    if k is None:
        raise DegenerateInput("all points are collinear")
    c = order[k]
    # skipped collinear points are inserted afterwards like ordinary points
    rest = order[2:k] + order[k + 1:]

    edges = {_edge(a, b), _edge(b, c), _edge(a, c)}
    hull = hull_chain(xy, (a, b, c))
    for i in rest:
        p = xy[i]
        chain = [xy[v] for v in hull]
        if inside_or_on(chain, p):
            # cannot happen for a lexicographic sweep; guards against bugs
            raise AssertionError(f"sweep point {p} not outside current hull")
        for pos, v in enumerate(hull):
            if sees(chain, pos, p):
                edges.add(_edge(i, v))
        hull = hull_chain(xy, hull + [i])
    return NonCrossingGraph(tuple(points), frozenset(edges), tuple(hull))


# ---------------------------------------------------------------------------
# exact edge validity checks, vectorized over the current edge set

class _EdgeIndex:
    """Mutable edge set with vectorized exact crossing tests."""

    def __init__(self, xy: list[tuple[int, int]], edges: Iterable[Edge]):
        self.xy = xy
        self.edges = set(edges)
        big = max((max(abs(x), abs(y)) for x, y in xy), default=0) >= _INT64_SAFE
        self.dtype = object if big else np.int64
        self.P = np.array(xy, dtype=self.dtype).reshape(-1, 2)
        self._stale = True

    def add(self, e: Edge) -> None:
        self.edges.add(e)
        self._stale = True

    def discard(self, e: Edge) -> None:
        self.edges.discard(e)
        self._stale = True

    def _arrays(self):
        if self._stale:
            el = sorted(self.edges)
            self.E = np.array(el, dtype=np.int64).reshape(-1, 2)
            self._stale = False
        return self.E

    @staticmethod
    def _orient(o, a, b):
        # o: (2,) or (m,2); a,b: (m,2) or (2,)
        return (a[..., 0] - o[..., 0]) * (b[..., 1] - o[..., 1]) - (a[..., 1] - o[..., 1]) * (b[..., 0] - o[..., 0])

    def valid(self, u: int, v: int) -> bool:
        """Can segment u-v be added without touching the graph anywhere but at u and v?"""
        P = self.P
        pu, pv = P[u], P[v]
        # no vertex on the open segment
        d = self._orient(pu, pv, P)
        col = d == 0
        col[u] = col[v] = False
        if col.any():
            Q = P[col]
            t = (Q[:, 0] - pu[0]) * (pv[0] - pu[0]) + (Q[:, 1] - pu[1]) * (pv[1] - pu[1])
            L = (pv[0] - pu[0]) ** 2 + (pv[1] - pu[1]) ** 2
            if np.any((t > 0) & (t < L)):
                return False
        E = self._arrays()
        if len(E) == 0:
            return True
        ea, eb = E[:, 0], E[:, 1]
        shared = (ea == u) | (ea == v) | (eb == u) | (eb == v)
        A, B = P[ea], P[eb]
        d1 = np.sign(d[ea]).astype(np.int64)
        d2 = np.sign(d[eb]).astype(np.int64)
        d3 = np.sign(self._orient(A, B, pu)).astype(np.int64)
        d4 = np.sign(self._orient(A, B, pv)).astype(np.int64)
        free = ~shared
        # any contact between non-adjacent segments is a violation
        touch = free & (d1 * d2 <= 0) & (d3 * d4 <= 0) & ~((d1 == 0) & (d2 == 0))
        if touch.any():
            return False
        both_col = free & (d1 == 0) & (d2 == 0)
        if both_col.any():
            k = 0 if pu[0] != pv[0] else 1
            lo, hi = min(pu[k], pv[k]), max(pu[k], pv[k])
            ak, bk = A[both_col][:, k], B[both_col][:, k]
            if np.any((np.maximum(np.minimum(ak, bk), lo) <= np.minimum(np.maximum(ak, bk), hi))):
                return False
        # an incident edge must not run along the candidate
        for idx in np.nonzero(shared)[0]:
            a, b = int(ea[idx]), int(eb[idx])
            if {a, b} == {u, v}:
                return False
            s = a if a in (u, v) else b
            o = b if s == a else a
            t = v if s == u else u
            ps, pt, po = self.xy[s], self.xy[t], self.xy[o]
            if cross(ps, pt, po) == 0 and (pt[0] - ps[0]) * (po[0] - ps[0]) + (pt[1] - ps[1]) * (po[1] - ps[1]) > 0:
                return False
        return True


# ---------------------------------------------------------------------------
# insertion

def _boundary_neighbors(xy, members: Sequence[int], chain: list[int], p) -> Optional[tuple[int, int]]:
    """If p sits on the hull boundary of ``members``, the boundary points flanking it."""
    h = len(chain)
    if h == 1:
        return None
    pairs = [(chain[0], chain[1])] if h == 2 else [(chain[i], chain[(i + 1) % h]) for i in range(h)]
    for a, b in pairs:
        if strictly_between(xy[a], xy[b], p):
            on = [m for m in members if m in (a, b) or strictly_between(xy[a], xy[b], xy[m])]
            ax = 0 if xy[a][0] != xy[b][0] else 1
            on.sort(key=lambda m: xy[m][ax])
            lo = max((m for m in on if xy[m][ax] < p[ax]), key=lambda m: xy[m][ax])
            hi = min((m for m in on if xy[m][ax] > p[ax]), key=lambda m: xy[m][ax])
            return lo, hi
    return None


def _attach(xy, index: _EdgeIndex, members: Sequence[int], chain: list[int], new: int) -> None:
    """Join ``new`` to the hull of ``members``; split the boundary edge it lands on."""
    p = xy[new]
    flank = _boundary_neighbors(xy, members, chain, p)
    if flank is not None:
        lo, hi = flank
        index.discard(_edge(lo, hi))
        index.add(_edge(new, lo))
        index.add(_edge(new, hi))
        return
    cxy = [xy[v] for v in chain]
    for pos, v in enumerate(chain):
        if sees(cxy, pos, p):
            index.add(_edge(new, v))


def _bridge(xy, index: _EdgeIndex, n: int) -> None:
    """Reconnect components with the shortest admissible segments."""
    while True:
        comps = _components(n, index.edges)
        if len(comps) <= 1:
            return
        small = min(comps, key=lambda c: (len(c), c[0]))
        inside = set(small)
        others = [j for j in range(n) if j not in inside]
        cands = sorted(
            ((xy[i][0] - xy[j][0]) ** 2 + (xy[i][1] - xy[j][1]) ** 2, min(i, j), max(i, j))
            for i in small for j in others
        )
        for _, i, j in cands:
            if index.valid(i, j):
                index.add((i, j))
                break
        else:  # pragma: no cover - a constrained triangulation always offers one
            raise AssertionError("no admissible bridging segment")


def insert(graph: NonCrossingGraph, p_new: PlanarPoint) -> InsertionOutcome:
    """Insert ``p_new``; the input graph is left untouched."""
    p = p_new.xy
    for i, v in enumerate(graph.vertices):
        if v.xy == p:
            raise DuplicatePoint(f"point {p} duplicates vertex {i}", (i,))
    n = len(graph.vertices)
    new = n
    xy = graph.xy + [p]
    x0 = p[0]
    right = [i for i in range(n) if xy[i][0] >= x0]
    left = [i for i in range(n) if xy[i][0] < x0]
    kept = [(i, j) for i, j in graph.edges
            if not ((xy[i][0] < x0 < xy[j][0]) or (xy[j][0] < x0 < xy[i][0]))]
    index = _EdgeIndex(xy, kept)

    if not right or not left:
        _attach(xy, index, range(n), list(graph.hull_idx), new)
    else:
        _attach(xy, index, right, hull_chain(xy, right), new)
        r_chain = hull_chain(xy, right + [new])
        l_chain = hull_chain(xy, left)
        rxy = [xy[v] for v in r_chain]
        lxy = [xy[v] for v in l_chain]
        cands = []
        for kp, k in enumerate(l_chain):
            for mp, m in enumerate(r_chain):
                if sees(rxy, mp, xy[k]) and sees(lxy, kp, xy[m]):
                    d2 = (xy[k][0] - xy[m][0]) ** 2 + (xy[k][1] - xy[m][1]) ** 2
                    cands.append((d2, k, m))
        # shortest first, each checked against everything added so far
        for _, k, m in sorted(cands):
            e = _edge(k, m)
            if e not in index.edges and index.valid(k, m):
                index.add(e)

    full_hull = hull_chain(xy)
    _close_hull(xy, index, full_hull)
    _bridge(xy, index, n + 1)
    edges = frozenset(index.edges)
    g = NonCrossingGraph(graph.vertices + (p_new,), edges, tuple(full_hull))
    incident = tuple(sorted(e for e in edges if new in e))
    return InsertionOutcome(g, new, incident)


def _close_hull(xy, index: _EdgeIndex, chain: list[int]) -> None:
    """Ensure every boundary stretch between consecutive boundary points is an edge."""
    h = len(chain)
    for t in range(h):
        a, b = chain[t], chain[(t + 1) % h]
        on = [m for m in range(len(xy)) if m in (a, b) or strictly_between(xy[a], xy[b], xy[m])]
        ax = 0 if xy[a][0] != xy[b][0] else 1
        on.sort(key=lambda m: xy[m][ax])
        for u, v in zip(on, on[1:]):
            e = _edge(u, v)
            if e not in index.edges and index.valid(u, v):
                index.add(e)


# ---------------------------------------------------------------------------
# queries

def k_layer_neighbors(graph: NonCrossingGraph, v: int, L: int) -> list[int]:
    """Vertices within 1..L hops of v, ordered by (hop distance, vertex id)."""
    if not 0 <= v < len(graph.vertices):
        raise UnknownVertex(f"no vertex {v}")
    if L < 1:
        raise ValueError("L must be a positive integer")
    adj = graph.adjacency
    dist = {v: 0}
    queue = deque([v])
    while queue:
        u = queue.popleft()
        if dist[u] == L:
            continue
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return sorted((w for w in dist if w != v), key=lambda w: (dist[w], w))


# ---------------------------------------------------------------------------
# task <-> worker adjacency reconfiguration

@dataclass(frozen=True)
class AdjacencyLists:
    task_to_workers: dict
    worker_to_tasks: dict
    layers: int


@dataclass
class ClusterGraphs:
    """Base graphs plus one post-insertion graph per queried cluster.

    Keeping the insertion outcomes lets several layer settings share one
    round of insertions.
    """

    task_graph: NonCrossingGraph
    worker_graph: NonCrossingGraph
    task_ids: list
    worker_ids: list
    task_inserts: dict = field(default_factory=dict)
    worker_inserts: dict = field(default_factory=dict)

    def adjacency(self, L: int) -> AdjacencyLists:
        t2w = {}
        for tid, out in self.task_inserts.items():
            t2w[tid] = [self.worker_ids[i] for i in k_layer_neighbors(out.new_graph, out.inserted_vertex, L)]
        w2t = {}
        for wid, out in self.worker_inserts.items():
            w2t[wid] = [self.task_ids[i] for i in k_layer_neighbors(out.new_graph, out.inserted_vertex, L)]
        return AdjacencyLists(t2w, w2t, L)


def _build_labelled(clusters, kind: str) -> NonCrossingGraph:
    pts = [PlanarPoint(c.center.x, c.center.y, c.id) for c in clusters]
    try:
        return build(pts)
    except DuplicatePoint as exc:
        raise DuplicatePoint(f"{kind} clusters {exc.ids} share a center", exc.ids) from exc
    except DegenerateInput as exc:
        raise DegenerateInput(f"{kind} cluster centers: {exc}") from exc


def cluster_graphs(task_clusters, worker_clusters) -> ClusterGraphs:
    if len(task_clusters) < 3 or len(worker_clusters) < 3:
        raise DegenerateInput(
            f"need >= 3 task and worker clusters, got {len(task_clusters)} and {len(worker_clusters)}")
    n_t = _build_labelled(task_clusters, "task")
    n_w = _build_labelled(worker_clusters, "worker")
    cg = ClusterGraphs(n_t, n_w, [c.id for c in task_clusters], [c.id for c in worker_clusters])
    for c in task_clusters:
        try:
            cg.task_inserts[c.id] = insert(n_w, c.center)
        except DuplicatePoint as exc:
            raise DuplicatePoint(f"task cluster {c.id!r} center coincides with a worker cluster center",
                                 (c.id,)) from exc
    for c in worker_clusters:
        try:
            cg.worker_inserts[c.id] = insert(n_t, c.center)
        except DuplicatePoint as exc:
            raise DuplicatePoint(f"worker cluster {c.id!r} center coincides with a task cluster center",
                                 (c.id,)) from exc
    return cg


def reconfigure(task_clusters, worker_clusters, L: int) -> AdjacencyLists:
    """L-layer adjacent worker clusters of every task cluster, and vice versa.

    Each cluster center is inserted into a copy of the other type's graph;
    the base graphs are never modified.
    """
    return cluster_graphs(task_clusters, worker_clusters).adjacency(L)
