"""Trajectory-set metric with localization / missed / false / switch decomposition.

For trajectory sets X (estimates) and Y (truth) over scans ``1..k`` the metric is

    d(X, Y)^p = min over assignment sequences  sum_t cost_t(pi_t) + gamma^p * sum_t s(pi_t, pi_t+1)

where ``pi_t`` partially matches X to Y at scan t. A matched pair costs
``min(|x - y|, c)^p`` when both exist, ``c^p / 2`` when only one exists and 0
otherwise; an unmatched trajectory costs ``c^p / 2`` while it exists. The switch
count ``s`` adds 1 for every X trajectory that changes partner and 1/2 when it
gains or loses one.

Assigning a pair that is never simultaneously present within distance ``c``
never beats leaving both unmatched (scan costs tie, switches can only grow), so
the search is restricted to such "useful" pairs. The useful-pair graph splits
into connected components which are solved independently: by dynamic
programming over all matchings of the component when there are few, otherwise
by the integer linear program over assignment matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse.csgraph import connected_components

DP_LIMIT = 300


@dataclass(frozen=True)
class MetricReport:
    total: float
    localization: float
    missed: float
    false_: float
    switch_: float
    time: int


def _tracks(trajs, k, dims):
    """Positions (n, k, len(dims)) and presence mask (n, k) over scans 1..k."""
    n = len(trajs)
    pos = np.zeros((n, k, len(dims)))
    alive = np.zeros((n, k), dtype=bool)
    for i, tr in enumerate(trajs):
        states = np.asarray(tr.states, dtype=float).reshape(tr.length, -1)
        lo = tr.birth_time - 1
        hi = min(lo + tr.length, k)
        if lo < 0:
            raise ValueError("trajectory starts before scan 1")
        if hi <= lo:
            continue
        pos[i, lo:hi] = states[: hi - lo][:, list(dims)]
        alive[i, lo:hi] = True
    return pos, alive


class _Costs:
    def __init__(self, est, truth, k, p, c, dims):
        self.p, self.c, self.k = p, c, k
        self.half = c**p / 2.0
        xpos, self.xa = _tracks(est, k, dims)
        ypos, self.ya = _tracks(truth, k, dims)
        d = np.linalg.norm(xpos[:, None] - ypos[None, :], axis=-1)
        self.both = self.xa[:, None] & self.ya[None, :]
        self.d = np.where(self.both, d, np.inf)
        one = self.xa[:, None] ^ self.ya[None, :]
        # (nx, ny, k) cost of a matched pair
        self.pair = np.where(self.both, np.minimum(self.d, c) ** p, np.where(one, self.half, 0.0))
        self.xcost = self.half * self.xa
        self.ycost = self.half * self.ya
        self.useful = (self.both & (self.d < c)).any(axis=2)


def _matchings(xs, nbrs):
    """All partial matchings as (S, len(xs)) arrays of local y indices (-1 = none)."""
    out = []
    cur = [-1] * len(xs)
    used = set()

    def rec(pos):
        if pos == len(xs):
            out.append(list(cur))
            return
        cur[pos] = -1
        rec(pos + 1)
        for j in nbrs[pos]:
            if j not in used:
                used.add(j)
                cur[pos] = j
                rec(pos + 1)
                used.discard(j)
        cur[pos] = -1

    rec(0)
    return np.array(out, dtype=int).reshape(len(out), len(xs))


def _count_matchings(nbrs, limit):
    """Number of partial matchings, stopping once it exceeds ``limit``."""
    count = 0

    def rec(pos, used):
        nonlocal count
        if count > limit:
            return
        if pos == len(nbrs):
            count += 1
            return
        rec(pos + 1, used)
        for j in nbrs[pos]:
            if j not in used:
                rec(pos + 1, used | {j})

    rec(0, frozenset())
    return count


def _switch_counts(A, B):
    """Switch count between assignment rows ``A`` (..., n) and ``B`` (..., n)."""
    diff = A != B
    both = (A >= 0) & (B >= 0)
    return np.where(diff, np.where(both, 1.0, 0.5), 0.0).sum(axis=-1)


def _solve_dp(C: _Costs, xs, ys, nbrs, gamma):
    a = _matchings(xs, nbrs)
    S, T = len(a), C.k
    base = C.xcost[xs].sum(axis=0) + C.ycost[ys].sum(axis=0)
    cost = np.tile(base, (S, 1))
    for li, i in enumerate(xs):
        m = a[:, li] >= 0
        if m.any():
            j = np.asarray(ys)[a[m, li]]
            cost[m] += C.pair[i, j] - C.xcost[i] - C.ycost[j]
    trans = gamma**C.p * _switch_counts(a[:, None, :], a[None, :, :])
    V = cost[:, 0].copy()
    back = np.zeros((T, S), dtype=int)
    cols = np.arange(S)
    for t in range(1, T):
        M = V[:, None] + trans
        back[t] = np.argmin(M, axis=0)
        V = M[back[t], cols] + cost[:, t]
    s = int(np.argmin(V))
    path = np.empty(T, dtype=int)
    for t in range(T - 1, -1, -1):
        path[t] = s
        s = back[t, s]
    seq = a[path]  # (T, n_local)
    return np.where(seq >= 0, np.asarray(ys)[np.maximum(seq, 0)], -1)


def _solve_milp(C: _Costs, xs, ys, edges, gamma):
    T = C.k
    nx, ny, E = len(xs), len(ys), len(edges)
    xl = {i: li for li, i in enumerate(xs)}
    yl = {j: lj for lj, j in enumerate(ys)}
    nv = E + nx + ny  # per scan: edge vars, x-unassigned, y-unassigned
    nW = nv * T
    ne = E * (T - 1)
    c = np.zeros(nW + ne)
    ei = np.array([e[0] for e in edges])
    ej = np.array([e[1] for e in edges])
    for t in range(T):
        o = t * nv
        c[o:o + E] = C.pair[ei, ej, t]
        c[o + E:o + E + nx] = C.xcost[xs, t]
        c[o + E + nx:o + nv] = C.ycost[ys, t]
    c[nW:] = gamma**C.p / 2.0

    rows, cols, vals = [], [], []
    r = 0
    for t in range(T):
        o = t * nv
        for li in range(nx):
            rows += [r]; cols += [o + E + li]; vals += [1.0]  # noqa: E702
            for e, (i, _) in enumerate(edges):
                if xl[i] == li:
                    rows += [r]; cols += [o + e]; vals += [1.0]  # noqa: E702
            r += 1
        for lj in range(ny):
            rows += [r]; cols += [o + E + nx + lj]; vals += [1.0]  # noqa: E702
            for e, (_, j) in enumerate(edges):
                if yl[j] == lj:
                    rows += [r]; cols += [o + e]; vals += [1.0]  # noqa: E702
            r += 1
    n_eq = r
    for t in range(T - 1):
        for e in range(E):
            w0, w1, s = t * nv + e, (t + 1) * nv + e, nW + t * E + e
            rows += [r, r, r]; cols += [w0, w1, s]; vals += [1.0, -1.0, -1.0]  # noqa: E702
            rows += [r + 1, r + 1, r + 1]; cols += [w0, w1, s]; vals += [-1.0, 1.0, -1.0]  # noqa: E702
            r += 2
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(r, nW + ne))
    lo = np.concatenate([np.ones(n_eq), np.full(r - n_eq, -np.inf)])
    hi = np.concatenate([np.ones(n_eq), np.zeros(r - n_eq)])
    integrality = np.concatenate([np.ones(nW), np.zeros(ne)])
    res = milp(c, constraints=LinearConstraint(A, lo, hi), integrality=integrality,
               bounds=Bounds(0.0, 1.0))
    if res.status != 0:
        raise RuntimeError(f"assignment program failed: {res.message}")
    W = np.round(res.x[:nW]).reshape(T, nv)[:, :E]
    seq = np.full((T, nx), -1, dtype=int)
    for t, e in zip(*np.nonzero(W > 0.5)):
        seq[t, xl[edges[e][0]]] = edges[e][1]
    return seq


def _decompose(C: _Costs, assign, gamma):
    """Channel costs (p-th powers) for a full assignment sequence (k, nx) of global y indices."""
    T = C.k
    nx = assign.shape[1]
    loc = miss = false = 0.0
    matched_y = np.zeros(C.ya.shape, dtype=bool)
    for i in range(nx):
        for t in range(T):
            j = assign[t, i]
            if j < 0:
                false += C.xcost[i, t]
                continue
            matched_y[j, t] = True
            if C.both[i, j, t]:
                if C.d[i, j, t] < C.c:
                    loc += C.d[i, j, t] ** C.p
                else:
                    false += C.half
                    miss += C.half
            elif C.xa[i, t]:
                false += C.half
            elif C.ya[j, t]:
                miss += C.half
    miss += (C.ycost * ~matched_y).sum()
    sw = gamma**C.p * _switch_counts(assign[:-1], assign[1:]).sum() if T > 1 else 0.0
    return loc, miss, false, sw


def optimal_assignment(est, truth, k, p=2.0, c=10.0, gamma=1.0, dims=(0, 1), method="auto"):
    """Optimal assignment sequence ``(k, len(est))`` of truth indices (-1 = unassigned)."""
    C = _Costs(est, truth, k, p, c, dims)
    return _optimal(C, gamma, method), C


def _optimal(C: _Costs, gamma, method):
    nx, ny = C.useful.shape
    assign = np.full((C.k, nx), -1, dtype=int)
    if nx == 0 or ny == 0 or C.k == 0:
        return assign
    adj = sparse.bmat([[None, sparse.csr_matrix(C.useful)], [sparse.csr_matrix(C.useful.T), None]])
    _, label = connected_components(adj, directed=False)
    for lab in np.unique(label):
        xs = [i for i in range(nx) if label[i] == lab]
        ys = [j for j in range(ny) if label[nx + j] == lab]
        if not xs or not ys:
            continue
        yl = {j: lj for lj, j in enumerate(ys)}
        nbrs = [[yl[j] for j in ys if C.useful[i, j]] for i in xs]
        use_dp = method == "dp" or (method == "auto" and _count_matchings(nbrs, DP_LIMIT) <= DP_LIMIT)
        if use_dp:
            assign[:, xs] = _solve_dp(C, xs, ys, nbrs, gamma)
        else:
            edges = [(i, j) for i in xs for j in ys if C.useful[i, j]]
            assign[:, xs] = _solve_milp(C, xs, ys, edges, gamma)
    return assign


def trajectory_metric(est, truth, p: float = 2.0, c: float = 10.0, gamma: float = 1.0,
                      k: int | None = None, *, dims=(0, 1), method: str = "auto") -> MetricReport:
    """Trajectory metric between estimated and true trajectory sets.

    Parameters
    ----------
    est, truth : sequences of TrajectoryEstimate
        Anything with ``birth_time``, ``length`` and ``states``; scans are 1-based.
    p, c, gamma : metric exponent, cutoff distance and switching penalty
    k : last scan considered (default: latest scan in either set)
    dims : state components used for the distance (positions by default)
    method : "auto", "dp" (matching enumeration) or "lp" (integer program)

    Returns
    -------
    MetricReport
        ``total**p`` equals the sum of the p-th powers of the four channels.
    """
    if method not in ("auto", "dp", "lp"):
        raise ValueError(f"unknown method {method!r}")
    if k is None:
        ends = [t.birth_time + t.length - 1 for t in list(est) + list(truth)]
        k = max(ends, default=0)
    C = _Costs(list(est), list(truth), k, p, c, dims)
    assign = _optimal(C, gamma, "auto" if method == "auto" else method)
    loc, miss, false, sw = _decompose(C, assign, gamma)
    root = lambda v: float(max(v, 0.0) ** (1.0 / p))  # noqa: E731
    return MetricReport(total=root(loc + miss + false + sw), localization=root(loc),
                        missed=root(miss), false_=root(false), switch_=root(sw), time=k)


def rms_tm(errors, k: int) -> float:
    """RMS trajectory-metric error at scan ``k`` from per-run squared errors.

    ``sqrt(mean(errors) / k)``: the mean over runs is normalized by the time window.
    """
    errors = np.asarray(errors, dtype=float)
    if k < 1 or errors.size == 0:
        raise ValueError("need k >= 1 and at least one run")
    return float(np.sqrt(errors.mean() / k))
