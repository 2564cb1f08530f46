"""Brute-force reference checks.

These are written independently of the production paths they check: no
shared predicates, no shared data structures. They are slow on purpose.
"""
from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations

import numpy as np


def _orient_arr(ox, oy, ax, ay, bx, by):
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


def crossing_violations(xy, edges) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Edge pairs that meet anywhere except at a shared endpoint vertex.

    Covers proper crossings, T-junctions, collinear overlap (also between
    edges sharing an endpoint) and vertices lying inside an edge.
    Vectorized over one edge at a time; exact for |coord| < 2**30.
    """
    pts = np.asarray(xy, dtype=np.int64).reshape(-1, 2)
    el = sorted(tuple(sorted(e)) for e in edges)
    if not el:
        return []
    E = np.array(el, dtype=np.int64)
    ax, ay = pts[E[:, 0], 0], pts[E[:, 0], 1]
    bx, by = pts[E[:, 1], 0], pts[E[:, 1], 1]
    bad = []
    for k, (i, j) in enumerate(el):
        px, py = pts[i]
        qx, qy = pts[j]
        c1 = np.sign(_orient_arr(px, py, qx, qy, ax, ay))
        c2 = np.sign(_orient_arr(px, py, qx, qy, bx, by))
        c3 = np.sign(_orient_arr(ax, ay, bx, by, px, py))
        c4 = np.sign(_orient_arr(ax, ay, bx, by, qx, qy))
        # parametric overlap along the dominant axis for collinear pairs
        use_x = px != qx
        lo = min(px, qx) if use_x else min(py, qy)
        hi = max(px, qx) if use_x else max(py, qy)
        s_lo = np.minimum(ax, bx) if use_x else np.minimum(ay, by)
        s_hi = np.maximum(ax, bx) if use_x else np.maximum(ay, by)
        ov_lo = np.maximum(s_lo, lo)
        ov_hi = np.minimum(s_hi, hi)
        collinear = (c1 == 0) & (c2 == 0)
        share = (E[:, 0] == i) | (E[:, 0] == j) | (E[:, 1] == i) | (E[:, 1] == j)
        meet_general = ~collinear & (c1 * c2 <= 0) & (c3 * c4 <= 0)
        meet_col_point = collinear & (ov_lo <= ov_hi)
        meet_col_len = collinear & (ov_lo < ov_hi)
        viol = (~share & (meet_general | meet_col_point)) | (share & meet_col_len)
        viol[k] = False
        for m in np.nonzero(viol)[0]:
            if m > k:
                bad.append((el[k], el[m]))
    # stray vertices inside edges (catches isolated vertices too)
    for (i, j) in el:
        px, py = pts[i]
        qx, qy = pts[j]
        on = _orient_arr(px, py, qx, qy, pts[:, 0], pts[:, 1]) == 0
        t = (pts[:, 0] - px) * (qx - px) + (pts[:, 1] - py) * (qy - py)
        L = (qx - px) ** 2 + (qy - py) ** 2
        inner = on & (t > 0) & (t < L)
        for z in np.nonzero(inner)[0]:
            bad.append(((i, j), (int(z), int(z))))
    return bad


def is_connected(n: int, edges) -> bool:
    if n == 0:
        return True
    adj = {i: set() for i in range(n)}
    for i, j in edges:
        adj[i].add(j)
        adj[j].add(i)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for w in adj[u]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == n


def hull_boundary_pairs(xy) -> list[tuple[int, int]]:
    """Consecutive boundary points of the convex hull, collinear points included.

    Gift wrapping with exact Fractions-free integer tests; O(n*h).
    """
    pts = [tuple(p) for p in xy]
    n = len(pts)
    start = min(range(n), key=lambda i: pts[i])
    boundary = []

    def orient(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    cur = start
    visited = set()
    while True:
        boundary.append(cur)
        visited.add(cur)
        cand = None
        for j in range(n):
            if j == cur or (j in visited and j != start):
                continue
            if cand is None:
                cand = j
                continue
            o = orient(pts[cur], pts[cand], pts[j])
            same_dir = ((pts[cand][0] - pts[cur][0]) * (pts[j][0] - pts[cur][0])
                        + (pts[cand][1] - pts[cur][1]) * (pts[j][1] - pts[cur][1])) > 0
            d_c = (pts[cand][0] - pts[cur][0]) ** 2 + (pts[cand][1] - pts[cur][1]) ** 2
            d_j = (pts[j][0] - pts[cur][0]) ** 2 + (pts[j][1] - pts[cur][1]) ** 2
            # most clockwise; among same-direction collinear take the nearest
            if o < 0 or (o == 0 and same_dir and d_j < d_c):
                cand = j
        cur = cand
        if cur == start or len(boundary) > n:
            break
    return [(boundary[i], boundary[(i + 1) % len(boundary)]) for i in range(len(boundary))]


def visible_by_definition(p, hull_xy) -> set[int]:
    """Hull vertices whose segment to p meets the hull boundary only at that vertex."""
    n = len(hull_xy)
    out = set()
    for k in range(n):
        v = hull_xy[k]
        ok = True
        for e in range(n):
            a, b = hull_xy[e], hull_xy[(e + 1) % n]
            if not _segment_meets_only_at(p, v, a, b, v):
                ok = False
                break
        if ok:
            out.add(k)
    return out


def _segment_meets_only_at(p, v, a, b, allowed) -> bool:
    """Intersection of closed segments p-v and a-b is empty or exactly {allowed}."""
    # parametrize with Fractions; exact for any integer input
    P, V, A, B = (tuple(map(Fraction, t)) for t in (p, v, a, b))
    r = (V[0] - P[0], V[1] - P[1])
    s = (B[0] - A[0], B[1] - A[1])
    den = r[0] * s[1] - r[1] * s[0]
    qp = (A[0] - P[0], A[1] - P[1])
    if den == 0:
        if qp[0] * r[1] - qp[1] * r[0] != 0:
            return True  # parallel, disjoint
        rr = r[0] * r[0] + r[1] * r[1]
        t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
        t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr
        lo, hi = max(min(t0, t1), 0), min(max(t0, t1), 1)
        if lo > hi:
            return True
        if lo < hi:
            return False
        pt = (P[0] + lo * r[0], P[1] + lo * r[1])
        return pt == tuple(map(Fraction, allowed))
    t = (qp[0] * s[1] - qp[1] * s[0]) / den
    u = (qp[0] * r[1] - qp[1] * r[0]) / den
    if 0 <= t <= 1 and 0 <= u <= 1:
        pt = (P[0] + t * r[0], P[1] + t * r[1])
        return pt == tuple(map(Fraction, allowed))
    return True


def mec_bruteforce(xy):
    """Smallest circle over every pair- and triple-defined candidate, in exact rationals.

    Returns (cx, cy, r) as floats.
    """
    pts = [tuple(map(Fraction, p)) for p in set(map(tuple, xy))]
    if len(pts) == 1:
        return float(pts[0][0]), float(pts[0][1]), 0.0
    best = None

    def consider(cx, cy):
        nonlocal best
        r2 = max((px - cx) ** 2 + (py - cy) ** 2 for px, py in pts)
        if best is None or r2 < best[2]:
            best = (cx, cy, r2)

    for a, b in combinations(pts, 2):
        consider((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
    for a, b, c in combinations(pts, 3):
        d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
        if d == 0:
            continue
        a2, b2, c2 = a[0] ** 2 + a[1] ** 2, b[0] ** 2 + b[1] ** 2, c[0] ** 2 + c[1] ** 2
        ux = (a2 * (b[1] - c[1]) + b2 * (c[1] - a[1]) + c2 * (a[1] - b[1])) / d
        uy = (a2 * (c[0] - b[0]) + b2 * (a[0] - c[0]) + c2 * (b[0] - a[0])) / d
        consider(ux, uy)
    # the minimax center over all candidates is the minimum enclosing circle
    return float(best[0]), float(best[1]), math.sqrt(best[2])


def greedy_reference(entries, sequence, cap):
    """Step-by-step simulation of capped worker-order greedy allocation.

    ``entries`` maps (worker, task) -> matching value. Returns
    (assignments, unmatched) with assignments as (worker, task, value).
    """
    count = {}
    assignments = []
    unmatched = []
    tasks = sorted({t for (_, t) in entries})
    for wk in sequence:
        best_t = None
        best_v = None
        for t in tasks:
            if (wk, t) not in entries:
                continue
            if cap is not None and count.get(t, 0) >= cap:
                continue
            v = entries[(wk, t)]
            if best_v is None or v < best_v:
                best_t, best_v = t, v
        if best_t is None:
            unmatched.append(wk)
        else:
            count[best_t] = count.get(best_t, 0) + 1
            assignments.append((wk, best_t, best_v))
    return assignments, unmatched


def max_pairwise_distance(xy) -> float:
    best = 0
    for (ax, ay), (bx, by) in combinations(xy, 2):
        best = max(best, (ax - bx) ** 2 + (ay - by) ** 2)
    return math.sqrt(best)
