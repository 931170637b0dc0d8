"""Dynamical distances, greedy separated/spanning sets and raw growth curves.

The dynamical distance is ``d_n(x, y) = max_{0 <= i <= n} d(f^i x, f^i y)``
and two points are separated at scale eps when ``d_n > eps`` (strictly).
Comparisons use an absolute slack ``TOL`` so that isometries do not flip on
round-off.

Curves are computed by one forward sweep over time: the set of pairs with
``d_t <= eps`` only shrinks as ``t`` grows, so it is seeded once from a
KD-tree on a Lipschitz embedding and then filtered step by step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np
from scipy.spatial import cKDTree

from .growth_order import GrowthSequence
from .systems import DynamicalSystemSpec, check_budget, mem_budget, sample_space, BudgetError

TOL = 1e-9


# ---------------------------------------------------------------------------
# numba kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _csr(n_pts, pi, pj):
    deg = np.zeros(n_pts + 1, np.int64)
    for k in range(pi.size):
        deg[pi[k] + 1] += 1
        deg[pj[k] + 1] += 1
    for i in range(n_pts):
        deg[i + 1] += deg[i]
    ptr = deg.copy()
    nbr = np.empty(2 * pi.size, np.int64)
    fill = deg[:-1].copy()
    for k in range(pi.size):
        a, b = pi[k], pj[k]
        nbr[fill[a]] = b
        fill[a] += 1
        nbr[fill[b]] = a
        fill[b] += 1
    return ptr, nbr


@numba.njit(cache=True)
def _greedy_separated(n_pts, ptr, nbr):
    kept = np.zeros(n_pts, np.bool_)
    for i in range(n_pts):
        ok = True
        for k in range(ptr[i], ptr[i + 1]):
            if kept[nbr[k]]:
                ok = False
                break
        if ok:
            kept[i] = True
    return kept


@numba.njit(cache=True)
def _greedy_cover(n_pts, ptr, nbr):
    """Greedy set cover by closed neighbourhoods; ties go to the lowest index."""
    covered = np.zeros(n_pts, np.bool_)
    gain = np.empty(n_pts, np.int64)
    for i in range(n_pts):
        gain[i] = ptr[i + 1] - ptr[i] + 1
    chosen = []
    left = n_pts
    while left > 0:
        best = 0
        for i in range(1, n_pts):
            if gain[i] > gain[best]:
                best = i
        chosen.append(best)
        # newly covered members of the closed neighbourhood of best
        for k in range(ptr[best], ptr[best + 1] + 1):
            u = best if k == ptr[best + 1] else nbr[k]
            if covered[u]:
                continue
            covered[u] = True
            left -= 1
            gain[u] -= 1
            for m in range(ptr[u], ptr[u + 1]):
                gain[nbr[m]] -= 1
    return np.array(chosen, dtype=np.int64)


@numba.njit(cache=True)
def _set_cover(n_sets, n_pts, sptr, smem, pptr, pmem):
    """Greedy cover of points by explicit sets (set->points and point->sets CSR)."""
    covered = np.zeros(n_pts, np.bool_)
    gain = np.empty(n_sets, np.int64)
    for s in range(n_sets):
        gain[s] = sptr[s + 1] - sptr[s]
    chosen = []
    left = n_pts
    while left > 0:
        best = 0
        for s in range(1, n_sets):
            if gain[s] > gain[best]:
                best = s
        if gain[best] <= 0:
            break
        chosen.append(best)
        for k in range(sptr[best], sptr[best + 1]):
            u = smem[k]
            if covered[u]:
                continue
            covered[u] = True
            left -= 1
            for m in range(pptr[u], pptr[u + 1]):
                gain[pmem[m]] -= 1
    return np.array(chosen, dtype=np.int64), left


@numba.njit(cache=True)
def _filter_max(x, pi, pj, periodic, thr):
    m = 0
    for k in range(pi.size):
        a, b = pi[k], pj[k]
        ok = True
        for c in range(x.shape[1]):
            d = x[a, c] - x[b, c]
            if periodic[c]:
                d = d - np.floor(d + 0.5)
            if abs(d) > thr:
                ok = False
                break
        if ok:
            pi[m] = a
            pj[m] = b
            m += 1
    return m


@numba.njit(cache=True)
def _filter_prefix(w, pi, pj, depth):
    """Keep pairs whose words agree on the first ``depth`` letters."""
    m = 0
    for k in range(pi.size):
        a, b = pi[k], pj[k]
        ok = True
        for c in range(min(depth, w.shape[1])):
            if w[a, c] != w[b, c]:
                ok = False
                break
        if ok:
            pi[m] = a
            pj[m] = b
            m += 1
    return m


@numba.njit(cache=True)
def _close_at_all(X, a, b, periodic, thr):
    for t in range(X.shape[0]):
        for c in range(X.shape[2]):
            d = X[t, a, c] - X[t, b, c]
            if periodic[c]:
                d = d - np.floor(d + 0.5)
            if abs(d) > thr:
                return False
    return True


@numba.njit(cache=True)
def _cell_coords(X, times, periodic, thr):
    """Integer cell coordinates (side >= thr) of each point at the given times."""
    T, P, D = X.shape
    K = times.size * D
    cc = np.zeros((P, K), np.int64)
    g = np.ones(K, np.int64)
    per = np.zeros(K, np.bool_)
    for a in range(times.size):
        t = times[a]
        for c in range(D):
            col = a * D + c
            per[col] = periodic[c]
            if periodic[c]:
                g[col] = max(1, int(1.0 / thr))
                for i in range(P):
                    u = X[t, i, c] - np.floor(X[t, i, c] + 0.5) + 0.5
                    w = int(u * g[col])
                    cc[i, col] = min(max(w, 0), g[col] - 1)
            else:
                mn = X[t, 0, c]
                for i in range(P):
                    mn = min(mn, X[t, i, c])
                mx = mn
                for i in range(P):
                    w = int((X[t, i, c] - mn) / thr)
                    cc[i, col] = w
                    if w + 1 > g[col]:
                        g[col] = w + 1
    return cc, g, per


@numba.njit(cache=True)
def _grid_pairs(X, times, periodic, thr, count_only, out_i, out_j):
    """Pairs i < j within ``thr`` (max metric) at every stacked time of ``X``.

    Candidates come from adjacent cells of a grid over the positions at
    ``times``; cells are located by binary search on sorted mixed-radix keys.
    """
    T, P, D = X.shape
    cc, g, per = _cell_coords(X, times, periodic, thr)
    K = g.size
    keys = np.zeros(P, np.int64)
    for i in range(P):
        k = 0
        for c in range(K):
            k = k * g[c] + cc[i, c]
        keys[i] = k
    order = np.argsort(keys, kind="mergesort")
    sk = keys[order]
    noff = np.empty(K, np.int64)
    offs = np.zeros((K, 3), np.int64)
    for c in range(K):
        if per[c] and g[c] <= 2:
            noff[c] = g[c]
            offs[c, 0] = 0
            offs[c, 1] = 1
        else:
            noff[c] = 3
            offs[c, 0] = -1
            offs[c, 1] = 0
            offs[c, 2] = 1
    total = 1
    for c in range(K):
        total *= noff[c]
    m = 0
    for i in range(P):
        for combo in range(total):
            rem = combo
            key = 0
            valid = True
            for c in range(K):
                w = cc[i, c] + offs[c, rem % noff[c]]
                rem //= noff[c]
                if per[c]:
                    w = w % g[c]
                elif w < 0 or w >= g[c]:
                    valid = False
                    break
                key = key * g[c] + w
            if not valid:
                continue
            lo = np.searchsorted(sk, key)
            q = lo
            while q < P and sk[q] == key:
                j = order[q]
                q += 1
                if j <= i:
                    continue
                if _close_at_all(X, i, j, periodic, thr):
                    if not count_only:
                        out_i[m] = i
                        out_j[m] = j
                    m += 1
    return m


def _grid_candidates(positions, periodic, eps):
    X = np.ascontiguousarray(np.stack(positions).astype(float))
    per = np.array(periodic)
    thr = eps + TOL
    # grid on the first and last stacked times; keys must fit in int64
    times = np.array(sorted({0, len(positions) - 1}), np.int64)
    cells = max(1.0 / thr, 1.0) + 2
    while times.size > 1 and cells ** (times.size * X.shape[2]) > 2.0 ** 62:
        times = times[:1]
    empty = np.zeros(0, np.int64)
    m = _grid_pairs(X, times, per, thr, True, empty, empty)
    pi, pj = np.empty(m, np.int64), np.empty(m, np.int64)
    _grid_pairs(X, times, per, thr, False, pi, pj)
    return pi, pj


@numba.njit(cache=True)
def _group_pairs(labels_sorted, order, count_only, out_i, out_j):
    m = 0
    P = labels_sorted.size
    s = 0
    while s < P:
        e = s
        while e < P and labels_sorted[e] == labels_sorted[s]:
            e += 1
        for x in range(s, e):
            for y in range(x + 1, e):
                a, b = order[x], order[y]
                if not count_only:
                    out_i[m] = min(a, b)
                    out_j[m] = max(a, b)
                m += 1
        s = e
    return m


def _prefix_candidates(positions, eps):
    """Pairs of words agreeing on the eps-prefix at every stacked time (exact)."""
    depth = max(0, math.ceil(math.log2(1.0 / (eps + TOL)) - 1e-12))
    keys = np.concatenate([np.asarray(x)[:, :depth] for x in positions], axis=1)
    if keys.shape[1] == 0:
        labels = np.zeros(len(positions[0]), np.int64)
    else:
        _, labels = np.unique(keys, axis=0, return_inverse=True)
        labels = np.asarray(labels).ravel().astype(np.int64)
    order = np.argsort(labels, kind="stable").astype(np.int64)
    ls = labels[order]
    empty = np.zeros(0, np.int64)
    m = _group_pairs(ls, order, True, empty, empty)
    pi, pj = np.empty(m, np.int64), np.empty(m, np.int64)
    _group_pairs(ls, order, False, pi, pj)
    return pi, pj


def greedy_separated_from_pairs(n_pts: int, pi, pj) -> np.ndarray:
    """Ascending scan; returns the sorted indices of the kept points."""
    ptr, nbr = _csr(n_pts, np.asarray(pi, np.int64), np.asarray(pj, np.int64))
    return np.flatnonzero(_greedy_separated(n_pts, ptr, nbr))


def greedy_cover_from_pairs(n_pts: int, pi, pj) -> np.ndarray:
    if n_pts == 0:
        return np.zeros(0, np.int64)
    ptr, nbr = _csr(n_pts, np.asarray(pi, np.int64), np.asarray(pj, np.int64))
    return _greedy_cover(n_pts, ptr, nbr)


# ---------------------------------------------------------------------------
# orbit table and pair machinery
# ---------------------------------------------------------------------------

def _orbit_positions(spec, points, times):
    """Positions at the requested (sorted) times, by forward stepping."""
    out = {}
    x = points
    t = 0
    for target in sorted(set(int(s) for s in times)):
        while t < target:
            x = spec.step(x)
            t += 1
        out[target] = x
    return out


def candidate_pairs(spec: DynamicalSystemSpec, positions: list, eps: float):
    """Superset of the pairs within eps at every one of the given positions."""
    P = len(positions[0])
    if P < 2:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    if spec.metric_kind == "prefix":
        return _prefix_candidates(positions, eps)
    if isinstance(spec.metric_kind, tuple):
        return _grid_candidates(positions, spec.metric_kind, eps)
    if spec.embed is None:
        pi, pj = np.triu_indices(P, 1)
        return pi.astype(np.int64), pj.astype(np.int64)
    data = np.column_stack([spec.embed(x) for x in positions])
    box = None
    if spec.boxsize is not None:
        box = np.tile(np.asarray(spec.boxsize, float), len(positions))
        data = np.mod(data, box)
        data[data >= box] = 0.0
    tree = cKDTree(data, boxsize=box, balanced_tree=False, compact_nodes=False)
    pairs = tree.query_pairs(eps + 10 * TOL, p=np.inf, output_type="ndarray")
    if pairs.size == 0:
        return np.zeros(0, np.int64), np.zeros(0, np.int64)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs[:, 0].astype(np.int64), pairs[:, 1].astype(np.int64)


def _filter(spec, x, pi, pj, eps):
    """Pairs (in place, compacted) with metric <= eps at positions ``x``."""
    if pi.size == 0:
        return pi, pj
    kind = spec.metric_kind
    if kind == "prefix":
        # 2^-j <= eps  <=>  j >= ceil(log2(1/eps))
        depth = max(0, math.ceil(math.log2(1.0 / (eps + TOL)) - 1e-12))
        m = _filter_prefix(x, pi, pj, depth)
        return pi[:m], pj[:m]
    if isinstance(kind, tuple):
        m = _filter_max(np.ascontiguousarray(x, dtype=float), pi, pj, np.array(kind), eps + TOL)
        return pi[:m], pj[:m]
    keep = np.empty(pi.size, bool)
    chunk = 1 << 20
    for s in range(0, pi.size, chunk):
        a, b = pi[s:s + chunk], pj[s:s + chunk]
        keep[s:s + chunk] = spec.metric(x[a], x[b]) <= eps + TOL
    return pi[keep], pj[keep]


def _seed_times(n: int) -> list:
    return sorted({0, n // 3, (2 * n) // 3, n})


def close_pair_sweep(spec: DynamicalSystemSpec, points, eps: float, n_values):
    """Yield ``(n, pi, pj)``: all pairs with d_n <= eps, for each n in ``n_values``."""
    n_values = sorted(set(int(n) for n in n_values))
    if not n_values:
        return
    n0 = n_values[0]
    seed = _orbit_positions(spec, points, _seed_times(n0))
    pi, pj = candidate_pairs(spec, [seed[t] for t in sorted(seed)], eps)
    x = points
    wanted = set(n_values)
    for t in range(0, n_values[-1] + 1):
        if t > 0:
            x = spec.step(x)
        pi, pj = _filter(spec, x, pi, pj, eps)
        if t in wanted:
            yield t, pi, pj


@dataclass
class OrbitTable:
    """Orbits of a fixed sample: ``orbits[t][i] = f^t(points[i])``."""
    spec: DynamicalSystemSpec
    points: np.ndarray
    orbits: np.ndarray  # shape (n_max + 1, P, dim)

    @classmethod
    def build(cls, spec: DynamicalSystemSpec, points, n_max: int) -> "OrbitTable":
        points = np.asarray(points, dtype=spec.dtype)
        ok, need = check_budget(len(points), spec.dim, n_max, points.itemsize)
        if not ok:
            raise BudgetError(f"orbit table needs {need} bytes, over budget {mem_budget()}; "
                              "use a larger delta or smaller n_max")
        orb = np.empty((n_max + 1,) + points.shape, dtype=points.dtype)
        orb[0] = points
        for t in range(n_max):
            orb[t + 1] = spec.step(orb[t])
        return cls(spec, points, orb)

    @property
    def n_max(self) -> int:
        return self.orbits.shape[0] - 1

    def __len__(self):
        return len(self.points)

    def close_pairs(self, n: int, eps: float):
        if n > self.n_max:
            raise ValueError(f"n={n} exceeds table horizon {self.n_max}")
        pos = [self.orbits[t] for t in _seed_times(n)]
        pi, pj = candidate_pairs(self.spec, pos, eps)
        for t in range(n + 1):
            pi, pj = _filter(self.spec, self.orbits[t], pi, pj, eps)
        return pi, pj


def dynamical_distance(table: OrbitTable, i: int, j: int, n: int, threshold: float | None = None) -> float:
    """``max_{0<=t<=n} d(f^t x_i, f^t x_j)``.

    With ``threshold`` the scan stops at the first time the running maximum
    exceeds it; the returned value is then only a lower bound (``>= threshold``).
    """
    if n > table.n_max:
        raise ValueError(f"n={n} exceeds table horizon {table.n_max}")
    if i == j:
        return 0.0
    m = table.spec.metric
    best = 0.0
    for t in range(n + 1):
        d = float(m(table.orbits[t][i:i + 1], table.orbits[t][j:j + 1])[0])
        if d > best:
            best = d
            if threshold is not None and best > threshold:
                break
    return best


def greedy_separated(table: OrbitTable, n: int, eps: float):
    """Maximal (n, eps)-separated subset of the sample, by ascending scan."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    pi, pj = table.close_pairs(n, eps)
    E = greedy_separated_from_pairs(len(table), pi, pj)
    return E, len(E)


def greedy_spanning(table: OrbitTable, n: int, eps: float):
    """Greedy (n, eps)-spanning subset of the sample (set cover by dynamical balls)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    pi, pj = table.close_pairs(n, eps)
    C = greedy_cover_from_pairs(len(table), pi, pj)
    return C, len(C)


def spans(table: OrbitTable, idx, n: int, eps: float) -> bool:
    """True when every sample point lies within d_n <= eps of some point of ``idx``."""
    idx = np.asarray(idx, np.int64)
    P = len(table)
    covered = np.zeros(P, bool)
    covered[idx] = True
    rest = np.flatnonzero(~covered)
    if rest.size == 0:
        return True
    # candidates from time 0 only, then exact check over the window
    spec = table.spec
    if spec.embed is not None:
        box = None if spec.boxsize is None else np.asarray(spec.boxsize, float)
        emb = spec.embed(table.orbits[0])
        if box is not None:
            emb = np.mod(emb, box)
            emb[emb >= box] = 0.0
        tree = cKDTree(emb[idx], boxsize=box)
        lists = tree.query_ball_point(emb[rest], eps + 10 * TOL, p=np.inf)
        a = np.repeat(rest, [len(l) for l in lists])
        b = idx[np.concatenate([np.asarray(l, np.int64) for l in lists])] if a.size else a
    else:
        a = np.repeat(rest, idx.size)
        b = np.tile(idx, rest.size)
    ok = np.ones(a.size, bool)
    for t in range(n + 1):
        ok &= spec.metric(table.orbits[t][a], table.orbits[t][b]) <= eps + TOL
    hit = np.zeros(P, bool)
    hit[a[ok]] = True
    return bool(hit[rest].all())


# ---------------------------------------------------------------------------
# growth curves
# ---------------------------------------------------------------------------

def default_schedule(n_max: int, dense_until: int = 64, ratio: float = 1.04) -> list:
    """All n up to ``dense_until``, then a geometric grid; always ends at n_max."""
    ns = list(range(1, min(n_max, dense_until) + 1))
    x = float(ns[-1]) if ns else 1.0
    while ns[-1] < n_max:
        x *= ratio
        nxt = min(n_max, max(ns[-1] + 1, int(round(x))))
        ns.append(nxt)
    return ns


def _fill(schedule, counts, n_max):
    vals = np.zeros(n_max)
    k = 0
    cur = 0.0
    for n in range(1, n_max + 1):
        while k < len(schedule) and schedule[k] <= n:
            cur = max(cur, counts[k])
            k += 1
        vals[n - 1] = cur
    return vals


def horizon_blocks(schedule, first: int = 8):
    """Split a sorted schedule into doubling horizon blocks ``(H, [n <= H])``."""
    out, cur, H = [], [], first
    for n in schedule:
        while n > H:
            if cur:
                out.append((H, cur))
                cur = []
            H *= 2
        cur.append(n)
    if cur:
        out.append((min(H, schedule[-1]), cur))
    return out


def prefix_class_counts(spec: DynamicalSystemSpec, points, eps: float, n_values) -> list:
    """Greedy counts for a prefix (ultra)metric without listing pairs.

    Under an ultrametric, d_n <= eps is an equivalence relation, so the greedy
    separated set keeps one point per class and the greedy cover needs exactly
    one center per class.  Classes are refined one time step at a time.
    """
    wanted = set(int(n) for n in n_values)
    depth = max(0, math.ceil(math.log2(1.0 / (eps + TOL)) - 1e-12))
    labels = np.zeros(len(points), np.int64)
    out = []
    x = points
    for t in range(0, max(wanted) + 1):
        if t > 0:
            x = spec.step(x)
        if depth:
            keys = np.column_stack([labels, np.asarray(x)[:, :depth].astype(np.int64)])
            _, labels = np.unique(keys, axis=0, return_inverse=True)
            labels = np.asarray(labels).ravel().astype(np.int64)
        if t in wanted:
            out.append(int(labels.max()) + 1 if len(labels) else 0)
    return out


def curve_from_sampler(spec: DynamicalSystemSpec, sample_fn, eps: float, n_max: int,
                       schedule=None, kind: str = "separated", meta=None) -> GrowthSequence:
    """Greedy counts for n = 1..n_max.

    ``sample_fn(H)`` returns the sample used for all n in the horizon block
    ending at ``H``; blocks whose samples coincide in size are merged into one
    sweep.  Counts are evaluated on ``schedule`` (default: every n), carried
    forward in between, and made monotone by a running maximum.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    sched = list(range(1, n_max + 1)) if schedule is None else sorted(set(schedule) | {n_max})
    runs = []
    for H, ns in horizon_blocks(sched):
        pts = np.asarray(sample_fn(H), dtype=spec.dtype)
        if runs and len(runs[-1][0]) == len(pts):
            runs[-1][1].extend(ns)
        else:
            runs.append((pts, list(ns)))
    counts = []
    for pts, ns in runs:
        if spec.metric_kind == "prefix":
            counts.extend(prefix_class_counts(spec, pts, eps, ns))
            continue
        for n, pi, pj in close_pair_sweep(spec, pts, eps, ns):
            if kind == "separated":
                counts.append(len(greedy_separated_from_pairs(len(pts), pi, pj)))
            else:
                counts.append(len(greedy_cover_from_pairs(len(pts), pi, pj)))
    vals = _fill(sched, counts, n_max)
    info = {**spec.describe(), "eps": eps, "n_max": n_max,
            "samples": [int(len(p)) for p, _ in runs], "estimator": kind,
            "evaluated_n": sched if len(sched) < n_max else "all"}
    info.update(meta or {})
    return GrowthSequence.monotone(vals, meta=info)


def curve_from_points(spec: DynamicalSystemSpec, points, eps: float, n_max: int,
                      schedule=None, kind: str = "separated", meta=None) -> GrowthSequence:
    """Greedy counts for n = 1..n_max on one fixed sample."""
    points = np.asarray(points, dtype=spec.dtype)
    return curve_from_sampler(spec, lambda H: points, eps, n_max, schedule, kind, meta)


def growth_curve(spec: DynamicalSystemSpec, eps: float, n_max: int, delta: float | None = None,
                 schedule="auto", kind: str = "separated", points=None) -> GrowthSequence:
    """Empirical separated-set growth curve n -> s(n) at scale eps."""
    if delta is None:
        delta = spec.default_delta(eps)
    if delta > eps / 4 + 1e-15:
        raise ValueError(f"delta={delta} exceeds eps/4={eps / 4}: the curve would saturate spuriously")
    if schedule == "auto":
        schedule = default_schedule(n_max)
    meta = {"delta": delta}
    if points is not None:
        return curve_from_points(spec, points, eps, n_max, schedule, kind, meta)
    return curve_from_sampler(spec, lambda H: sample_space(spec, delta, horizon=H),
                              eps, n_max, schedule, kind, meta)


# ---------------------------------------------------------------------------
# itinerary and open-cover counts
# ---------------------------------------------------------------------------

def _ball_membership(spec, x, centers, radii, strict: bool):
    """Boolean (P, K) membership of points in the balls."""
    P = len(x)
    out = np.zeros((P, len(centers)), bool)
    for k, (c, r) in enumerate(zip(centers, radii)):
        d = spec.metric(x, np.broadcast_to(c, x.shape))
        out[:, k] = d < r if strict else d <= r + TOL
    return out


def _ball_depth(spec, x, centers, radii):
    P = len(x)
    out = np.full((P, len(centers)), -np.inf)
    for k, (c, r) in enumerate(zip(centers, radii)):
        out[:, k] = r - spec.metric(x, np.broadcast_to(c, x.shape))
    return out


def _centers(spec, centers):
    return np.asarray(centers, dtype=spec.dtype).reshape(len(centers), -1)


def itinerary_upper_bound(spec: DynamicalSystemSpec, centers, radius: float, n: int,
                          points=None, delta: float | None = None) -> int:
    """Number of distinct length-n itineraries through a ball partition.

    Each point is assigned at each time to the lowest-index closed ball of
    radius ``radius`` containing it.
    """
    C = _centers(spec, centers)
    if points is None:
        points = sample_space(spec, delta if delta is not None else spec.default_delta(2 * radius), horizon=n)
    x = np.asarray(points, dtype=spec.dtype)
    radii = np.full(len(C), radius)
    labels = np.empty((len(x), n), np.int64)
    for t in range(n):
        if t > 0:
            x = spec.step(x)
        mem = _ball_membership(spec, x, C, radii, strict=False)
        if not mem.any(axis=1).all():
            raise ValueError("ball family does not cover the sample set")
        labels[:, t] = np.argmax(mem, axis=1)
    if n == 0:
        return 1
    return int(len(np.unique(labels, axis=0)))


def arc_cover(k: int, overlap: float = 0.25):
    """k open arcs centred at i/k of radius (1 + overlap)/(2k)."""
    centers = [[((i / k) + 0.5) % 1.0 - 0.5] for i in range(k)]
    return {"centers": centers, "radii": [(1 + overlap) / (2 * k)] * k}


def cylinder_cover(spec: DynamicalSystemSpec):
    """Cylinders on coordinate 0, written as open balls of radius 1."""
    k = int(spec.params["k"])
    L = spec.dim
    centers = np.zeros((k, L), np.uint8)
    centers[:, 0] = np.arange(k)
    return {"centers": centers, "radii": [1.0] * k}


def open_cover_growth(spec: DynamicalSystemSpec, cover: dict, n_max: int, points=None,
                      delta: float | None = None, schedule=None) -> GrowthSequence:
    """Greedy minimal-subcover size of the refined cover on the sample, n = 1..n_max.

    Candidate members of the refinement are the words that follow, at each
    time, the cover element in which the point sits deepest.
    """
    C = _centers(spec, cover["centers"])
    radii = np.asarray(cover["radii"], float)
    if points is None:
        d = delta if delta is not None else float(radii.min()) / 4
        points = sample_space(spec, d, horizon=n_max)
    x0 = np.asarray(points, dtype=spec.dtype)
    P = len(x0)
    sched = set(range(1, n_max + 1) if schedule is None else schedule) | {n_max}
    x = x0
    mems = []
    words = np.empty((P, n_max), np.int64)
    counts, done = [], []
    for t in range(n_max):
        if t > 0:
            x = spec.step(x)
        mem = _ball_membership(spec, x, C, radii, strict=True)
        if not mem.any(axis=1).all():
            raise ValueError("cover does not cover the sample set")
        mems.append(mem)
        words[:, t] = np.argmax(_ball_depth(spec, x, C, radii), axis=1)
        n = t + 1
        if n in sched:
            counts.append(_refined_cover_size(words[:, :n], mems))
            done.append(n)
    vals = _fill(done, counts, n_max)
    info = {**spec.describe(), "cover_size": len(C), "n_max": n_max, "samples": P,
            "estimator": "open_cover"}
    return GrowthSequence.monotone(vals, meta=info)


def _refined_cover_size(words, mems) -> int:
    cand, inv = np.unique(words, axis=0, return_inverse=True)
    inv = np.asarray(inv).ravel()
    S, P = len(cand), words.shape[0]
    # members of candidate s: points whose membership contains every letter of s
    rows = []
    for s0 in range(0, S, 256):
        block = cand[s0:s0 + 256]
        ok = np.ones((len(block), P), bool)
        for t, mem in enumerate(mems[: words.shape[1]]):
            ok &= mem[:, block[:, t]].T
        rows.append(ok)
    M = np.concatenate(rows) if rows else np.zeros((0, P), bool)
    M[inv, np.arange(P)] = True
    s_idx, p_idx = np.nonzero(M)
    sptr = np.zeros(S + 1, np.int64)
    np.add.at(sptr, s_idx + 1, 1)
    sptr = np.cumsum(sptr)
    o = np.argsort(p_idx, kind="stable")
    pptr = np.zeros(P + 1, np.int64)
    np.add.at(pptr, p_idx + 1, 1)
    pptr = np.cumsum(pptr)
    chosen, left = _set_cover(S, P, sptr, p_idx.astype(np.int64), pptr, s_idx[o].astype(np.int64))
    assert left == 0
    return len(chosen)
