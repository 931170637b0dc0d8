"""Independent brute-force oracles and the values derived from them.

The functions here deliberately avoid the package internals (no numba, no
candidate-pair seeding, no sympy ranks) so that tests compare two routes.
FROZEN holds values computed once from these oracles; test_oracles.py
recomputes them so that a drift in either route is caught.
"""
from fractions import Fraction
from itertools import product

import numpy as np

FROZEN = {
    # inclusive window 0..n with strict separation sees n + log2(1/eps) = 7 letters
    "shift_2_eps_1/8_n4_separated": 128,
    "rotation_golden_eps_1/4_separated": 3,
    "rotation_golden_eps_1/4_spanning": 2,
    "golden_q": [1, 2, 3, 5, 8, 13, 21, 34],
    "silver_q": [2, 5, 12, 29, 70, 169],
    "dehn_manning_first_failure": 14,
    "staircase_log2_swing": 7,
    "staircase_tail_block": 15,
    "ranks_dehn": [2, 1, 0],
    "ranks_rot90_phi": [2, 0],
}


# ---------------------------------------------------------------------------
# dynamical distances and greedy sets, by direct loops
# ---------------------------------------------------------------------------

def orbit(step, x, n):
    out = [np.array(x)]
    for _ in range(n):
        out.append(step(out[-1]))
    return out


def brute_dn(metric, orb_x, orb_y, n):
    return max(float(metric(orb_x[t], orb_y[t])[0]) for t in range(n + 1))


def brute_greedy_separated(spec, points, n, eps, tol=1e-9):
    pts = np.asarray(points, dtype=spec.dtype)
    orbs = [orbit(spec.step, pts[i:i + 1], n) for i in range(len(pts))]
    kept = []
    for i in range(len(pts)):
        if all(brute_dn(spec.metric, orbs[i], orbs[k], n) > eps + tol for k in kept):
            kept.append(i)
    return kept


def shift_word_count(k, n, eps):
    """Greedy separated count for the full k-shift by exhaustive words.

    d_n(x, y) > eps iff x and y differ within the first n + j0 letters, where
    2^-j0 is the largest distance value <= eps; all such words are separated.
    """
    j0 = 0
    while 2.0 ** -j0 > eps:
        j0 += 1
    letters = n + j0
    return sum(1 for _ in product(range(k), repeat=letters))


def circle_separated_brute(eps, m=4000, tol=1e-9):
    """Greedy ascending scan on an m-grid of the circle under an isometry."""
    grid = np.arange(m) / m
    kept = []
    for x in grid:
        ok = True
        for y in kept:
            d = abs(x - y)
            if min(d, 1 - d) <= eps + tol:
                ok = False
                break
        if ok:
            kept.append(x)
    return len(kept)


# ---------------------------------------------------------------------------
# growth sequences
# ---------------------------------------------------------------------------

def staircase_pair(N=2 ** 16, swing=7):
    """Two non-decreasing sequences whose ratio alternately rises and falls by 2^swing.

    On blocks [2^m, 2^{m+1}) one sequence grows and the other is frozen; the
    first block grows by 2^swing, later blocks by 2^(2 swing), so the ratio
    swings between 2^swing and 2^-swing.  Growth is spread evenly over the block
    (a literal doubling per step would overflow).
    """
    la, lb = np.zeros(N), np.zeros(N)
    cur_a = cur_b = 0.0
    first = True
    for m in range(0, 17):
        lo, hi = 2 ** m, min(2 ** (m + 1), N + 1)
        if lo > N:
            break
        size = hi - lo
        total = swing if first else 2 * swing
        first = False
        inc = total * np.log(2) / max(1, 2 ** m)
        for idx, n in enumerate(range(lo, hi)):
            if m % 2 == 0:
                cur_a += inc
            else:
                cur_b += inc
            la[n - 1], lb[n - 1] = cur_a, cur_b
    return np.exp(la), np.exp(lb)


def ratio_scan(a, b, tail_fraction=0.5):
    """Largest a/b and b/a on the tail, by direct scan."""
    N = len(a)
    s = int(N * (1 - tail_fraction))
    r = a[s:] / b[s:]
    return float(r.max()), float((1 / r).max())


# ---------------------------------------------------------------------------
# continued fractions and exact linear algebra
# ---------------------------------------------------------------------------

def cf_denominators(quotients):
    q2, q1 = 0, 1
    out = []
    for r in quotients:
        q2, q1 = q1, r * q1 + q2
        out.append(q1)
    return out


def fraction_rank(rows):
    M = [[Fraction(v) for v in r] for r in rows]
    rank, col = 0, 0
    nr, nc = len(M), len(M[0]) if M else 0
    while rank < nr and col < nc:
        piv = next((i for i in range(rank, nr) if M[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for i in range(nr):
            if i != rank and M[i][col] != 0:
                f = M[i][col] / M[rank][col]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
        col += 1
    return rank


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def matpow(A, n):
    d = len(A)
    P = [[int(i == j) for j in range(d)] for i in range(d)]
    for _ in range(n):
        P = matmul(P, A)
    return P


def rank_sequence(N, d):
    return [fraction_rank(matpow(N, j)) for j in range(d + 1)]


def max_entry(P):
    return max(abs(v) for row in P for v in row)
