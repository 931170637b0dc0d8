"""Slow-entropy cylindrical cascades with an inequality certificate.

The cascade is ``(x, y) -> (x + alpha, y + sum_k b_k cos(2 pi q_k (x + alpha)))``
where ``q_k`` are the convergent denominators of ``alpha``.  The builder
chooses ``alpha`` (through its partial quotients), the amplitudes and the
cut points stage by stage so that the piecewise-linear envelope
``e(n) = C_k n + D_k`` stays below a target growth ``a(n)``.

Exact integers are kept for quotients, convergents and cut points; the
D-increments ``b_k q_k q_{k+1}`` are exact fractions; everything else is
evaluated with mpmath at ``PREC`` bits.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numba
import numpy as np

from .growth_order import GrowthSequence

PREC = 256
MARGIN = Fraction(1, 8)
LAMBDA_MEASURE = Fraction(1, 2)   # total measure of {|sin(2 pi q x)| > 1/sqrt 2}
WITNESS_EPS = Fraction(1, 20)
SLACK_FACTOR = 16 * math.pi ** 2
MAX_BITS = 1 << 27


class CascadeInfeasible(ValueError):
    def __init__(self, stage: int, inequality: str, detail: str):
        super().__init__(f"stage {stage}: {inequality} cannot be met ({detail})")
        self.stage, self.inequality = stage, inequality


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def _wp(bits: int = 0):
    """Working precision: at least PREC, never lower than the caller's context."""
    return mpmath.workprec(max(PREC, mpmath.mp.prec, bits))


def _frac_bits(x: Fraction) -> int:
    return max(0, abs(x.numerator).bit_length() - x.denominator.bit_length())


def _ceil_int(x) -> int:
    return int(mpmath.ceil(x))


# ---------------------------------------------------------------------------
# targets
# ---------------------------------------------------------------------------

class Target:
    """A non-decreasing unbounded target a(n) with an exact upper inverse."""
    name = "target"
    concave = True

    def value(self, n: int):
        raise NotImplementedError

    def inverse(self, y: Fraction) -> int:
        """Some integer n >= 1 with value(n) >= y."""
        raise NotImplementedError

    def sequence(self, N: int) -> GrowthSequence:
        return GrowthSequence(np.array([float(self.value(n)) for n in range(1, N + 1)]))

    def __str__(self):
        return self.name


class LogTarget(Target):
    name = "log2(n+2)"

    def value(self, n):
        with _wp():
            return mpmath.log(mpmath.mpf(n) + 2, 2)

    def inverse(self, y):
        # log2(2^c) = c >= y
        c = math.ceil(y)
        if c > MAX_BITS:
            raise OverflowError(f"log target inverse needs a {mpmath.nstr(mpmath.mpf(c), 4)}-bit cut point")
        return max(1, (1 << max(0, c)) - 2)


class PowerTarget(Target):
    def __init__(self, exponent: Fraction):
        self.exponent = Fraction(exponent)
        if not 0 < self.exponent <= 1:
            raise ValueError("power target exponent must lie in (0, 1]")
        self.name = f"n^({self.exponent})"

    def value(self, n):
        with _wp():
            return mpmath.mpf(n) ** _mpf(self.exponent)

    def inverse(self, y):
        y = max(Fraction(y), Fraction(1))
        if self.exponent.numerator == 1:
            return max(1, math.ceil(y ** self.exponent.denominator))
        with _wp(2 * _frac_bits(y) + 64):
            n = _ceil_int(_mpf(y) ** (1 / _mpf(self.exponent)))
        # compare at a precision that resolves n -> n + 1
        with _wp(2 * n.bit_length() + 64):
            yy = _mpf(y)
            while self.value(n) < yy:
                n += 1
        return max(1, n)


class SequenceTarget(Target):
    """Target given by finitely many values; checks are exhaustive."""
    concave = False

    def __init__(self, seq: GrowthSequence):
        self.seq = seq
        self.name = f"sequence[{seq.window}]"
        if seq.values[0] < 1:
            raise ValueError("target must satisfy a(1) >= 1")
        if seq.values[-1] <= seq.values[0]:
            raise ValueError("target must be unbounded (non-constant over its window)")

    def value(self, n):
        if not 1 <= n <= self.seq.window:
            raise ValueError(f"n={n} is outside the target window {self.seq.window}")
        return mpmath.mpf(float(self.seq.values[n - 1]))

    def inverse(self, y):
        idx = int(np.searchsorted(self.seq.values, float(y), side="left"))
        if idx >= self.seq.window:
            return self.seq.window + 1  # beyond the window: caller reports infeasibility
        n = idx + 1
        while n <= self.seq.window and self.value(n) < _mpf(y):
            n += 1
        return n


def parse_target(text: str) -> Target:
    t = text.replace(" ", "").lower()
    if t in ("log2(n+2)", "log", "log2"):
        return LogTarget()
    m = re.fullmatch(r"n\^\(?([0-9./]+)\)?", t)
    if m:
        return PowerTarget(Fraction(m.group(1)))
    raise ValueError(f"unknown target {text!r}; use 'log2(n+2)' or 'n^(p/q)'")


# ---------------------------------------------------------------------------
# continued fractions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Convergent:
    k: int
    p: int
    q: int
    dist: object   # ||q alpha|| as mpf
    lower: object  # 1 / ((r_{k+1} + 2) q_k)
    upper: object  # 1 / (r_{k+1} q_k)

    @property
    def in_bracket(self) -> bool:
        return self.lower <= self.dist <= self.upper


def convergent_pairs(quotients):
    """Exact (p_k, q_k), k = 1..len(quotients), for alpha = [0; r_1, r_2, ...]."""
    if any(int(r) != r or r < 1 for r in quotients):
        raise ValueError("partial quotients must be positive integers")
    p_prev, p = 1, 0
    q_prev, q = 0, 1
    out = []
    for r in quotients:
        p_prev, p = p, int(r) * p + p_prev
        q_prev, q = q, int(r) * q + q_prev
        out.append((p, q))
    return out


def complete_quotient(quotients, j: int):
    """[r_j; r_{j+1}, ..., r_last, 1, 1, ...] (1-based j)."""
    with _wp():
        x = (1 + mpmath.sqrt(5)) / 2
        for r in reversed(quotients[j - 1:]):
            x = r + 1 / x
        return x


def alpha_from_quotients(quotients, prec: int | None = None):
    """alpha = [0; r_1, ..., r_last, 1, 1, ...]."""
    bits = prec or max(PREC, 2 * convergent_pairs(quotients)[-1][1].bit_length() + 64)
    with mpmath.workprec(bits):
        x = (1 + mpmath.sqrt(5)) / 2
        for r in reversed(quotients):
            x = r + 1 / x
        return 1 / x


def signed_fraction(quotients, k: int):
    """q_k alpha - p_k, from the complete-quotient identity (exact up to PREC)."""
    pairs = convergent_pairs(quotients)
    q = pairs[k - 1][1]
    q_prev = pairs[k - 2][1] if k >= 2 else 1
    with _wp():
        tail = complete_quotient(quotients, k + 1) if k < len(quotients) else (1 + mpmath.sqrt(5)) / 2
        return (-1) ** k / (q * tail + q_prev)


def convergents(partial_quotients, direct: bool = True) -> list:
    """Convergents with ``||q_k alpha||`` and its two-sided bracket.

    With ``direct`` the distance is computed from alpha evaluated at a
    precision of twice the bit size of the largest denominator (only when that
    is below 2^20 bits), otherwise from the complete-quotient identity.
    """
    rs = [int(r) for r in partial_quotients]
    pairs = convergent_pairs(rs)
    out = []
    use_direct = direct and pairs[-1][1].bit_length() < (1 << 20)
    if use_direct:
        bits = 2 * pairs[-1][1].bit_length() + 128
        alpha = alpha_from_quotients(rs, bits)
    for k, (p, q) in enumerate(pairs, start=1):
        if use_direct:
            with mpmath.workprec(bits):
                d = abs(q * alpha - mpmath.nint(q * alpha))
                d = +d
        else:
            with _wp(rs[min(k, len(rs) - 1)].bit_length() + 128):
                d = abs(signed_fraction(rs, k))
        r_next = rs[k] if k < len(rs) else 1
        with _wp(r_next.bit_length() + 128):
            lo = 1 / (mpmath.mpf(r_next + 2) * q)
            hi = 1 / (mpmath.mpf(r_next) * q)
            out.append(Convergent(k, p, q, mpmath.mpf(d), lo, hi))
    return out


# ---------------------------------------------------------------------------
# Weyl sums
# ---------------------------------------------------------------------------

def _frac_q_alpha(q: int, alpha) -> float:
    bits = max(PREC, q.bit_length() + 96) if isinstance(q, int) else PREC
    with mpmath.workprec(bits):
        v = mpmath.mpf(q) * mpmath.mpf(alpha)
        return float(v - mpmath.floor(v))


def weyl_sum(b: float, q: int, alpha, n: int, x: float, derivative: bool = False) -> float:
    """Sum_{j<n} of b cos(2 pi q (x + j alpha)), or of its derivative in x."""
    if n <= 0:
        return 0.0
    theta = _frac_q_alpha(int(q), alpha)
    qx = _frac_q_alpha(int(q), x)
    phases = np.mod(qx + np.arange(n) * theta, 1.0)
    if derivative:
        terms = -2 * math.pi * float(b) * float(q) * np.sin(2 * np.pi * phases)
    else:
        terms = float(b) * np.cos(2 * np.pi * phases)
    return math.fsum(terms)


@numba.njit(cache=True)
def _weyl_grid_max(phase0, theta, n_max):
    """max_x |sum_{j<n} sin(2 pi (phase0_x + j theta))| for n = 1..n_max (Kahan sums)."""
    M = phase0.size
    best = np.zeros(n_max)
    for i in range(M):
        s = 0.0
        c = 0.0
        for j in range(n_max):
            ph = phase0[i] + j * theta
            ph -= math.floor(ph)
            y = math.sin(2 * math.pi * ph) - c
            t = s + y
            c = (t - s) - y
            s = t
            if abs(s) > best[j]:
                best[j] = abs(s)
    return best


def weyl_derivative_profile(b, q: int, theta: float, n_max: int, grid: int = 10_000) -> np.ndarray:
    """max over the x-grid i/grid of |S_n(phi')(x)| for n = 1..n_max."""
    i = np.arange(grid, dtype=np.int64)
    phase0 = ((int(q) % grid) * i % grid) / grid
    m = _weyl_grid_max(phase0.astype(float), float(theta), n_max)
    return 2 * math.pi * float(b) * float(q) * m if float(b) * float(q) < 1e300 else m * 0


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------

def _int_str(v: int) -> str:
    """Decimal for ordinary sizes; hex beyond 3000 bits (CPython caps decimal conversion)."""
    return str(v) if v.bit_length() <= 3000 else hex(v)


def _parse_fraction(text: str) -> Fraction:
    num, _, den = str(text).partition("/")
    return Fraction(int(num, 0), int(den, 0) if den else 1)


@dataclass
class CascadeParams:
    target: Target
    partial_quotients: list          # r_1 .. r_{K+1}
    convergents_q: list              # q_1 .. q_{K+1}
    convergents_p: list
    jumps: list                      # b_k q_k q_{k+1}, exact fractions, k = 1..K
    cutpoints: list                  # m_1 .. m_K
    certificate: "Certificate | None" = None
    meta: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return len(self.jumps)

    @property
    def amplitudes(self) -> list:
        with _wp():
            return [_mpf(d) / (mpmath.mpf(self.convergents_q[k]) * self.convergents_q[k + 1])
                    for k, d in enumerate(self.jumps)]

    @property
    def slopes_bq(self) -> list:
        with _wp():
            return [_mpf(d) / self.convergents_q[k + 1] for k, d in enumerate(self.jumps)]

    @property
    def envelope_slopes(self) -> list:
        """C_k = sum_{j >= k} b_j q_j, truncated at K."""
        s = self.slopes_bq
        with _wp():
            return [mpmath.fsum(s[k:]) for k in range(self.K)]

    @property
    def envelope_offsets(self) -> list:
        """D_1 .. D_{K+1} (D_1 = 0)."""
        out, acc = [Fraction(0)], Fraction(0)
        for d in self.jumps:
            acc += d
            out.append(acc)
        return out

    @property
    def linear_ranges(self) -> list:
        """n_k = sqrt(q_{k+1} / (b_k q_k)) = q_{k+1} / sqrt(b_k q_k q_{k+1})."""
        with _wp():
            return [mpmath.mpf(self.convergents_q[k + 1]) / mpmath.sqrt(_mpf(d))
                    for k, d in enumerate(self.jumps)]

    @property
    def alpha(self):
        return alpha_from_quotients(self.partial_quotients, PREC)

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)

    def to_json(self) -> dict:
        nstr = lambda v: mpmath.nstr(v, 30)
        return {
            "target": str(self.target),
            "K": self.K,
            "partial_quotients": [_int_str(r) for r in self.partial_quotients],
            "convergents_q": [_int_str(q) for q in self.convergents_q],
            "convergents_p": [_int_str(p) for p in self.convergents_p],
            "jumps": [f"{_int_str(d.numerator)}/{_int_str(d.denominator)}" for d in self.jumps],
            "cutpoints": [_int_str(m) for m in self.cutpoints],
            "amplitudes": [nstr(b) for b in self.amplitudes],
            "linear_ranges": [nstr(n) for n in self.linear_ranges],
            "envelope_slopes": [nstr(c) for c in self.envelope_slopes],
            "envelope_offsets": [nstr(_mpf(d)) for d in self.envelope_offsets],
            "alpha": mpmath.nstr(self.alpha, 50),
            "meta": self.meta,
        }

    @classmethod
    def from_json(cls, doc, target: Target | None = None) -> "CascadeParams":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(
            target=target or parse_target(doc["target"]),
            partial_quotients=[int(r, 0) for r in doc["partial_quotients"]],
            convergents_q=[int(q, 0) for q in doc["convergents_q"]],
            convergents_p=[int(p, 0) for p in doc["convergents_p"]],
            jumps=[_parse_fraction(d) for d in doc["jumps"]],
            cutpoints=[int(m, 0) for m in doc["cutpoints"]],
            meta=doc.get("meta", {}),
        )

    def scaled_amplitude(self, k: int, factor) -> "CascadeParams":
        """Copy with b_k multiplied by ``factor`` (1-based k)."""
        jumps = list(self.jumps)
        jumps[k - 1] = jumps[k - 1] * Fraction(factor)
        return CascadeParams(self.target, list(self.partial_quotients), list(self.convergents_q),
                             list(self.convergents_p), jumps, list(self.cutpoints), None, dict(self.meta))


# ---------------------------------------------------------------------------
# certificate
# ---------------------------------------------------------------------------

@dataclass
class Certificate:
    rows: list = field(default_factory=list)

    def add(self, ineq: str, stage, lhs, rhs, ok: bool, strict: bool = False):
        with _wp():
            try:
                slack = _mpf(rhs) - _mpf(lhs)
                slack_s = mpmath.nstr(slack, 12)
            except (TypeError, ValueError):
                slack_s = ""
        self.rows.append({"id": ineq, "stage": stage, "lhs": _show(lhs), "rhs": _show(rhs),
                          "slack": slack_s, "pass": bool(ok)})
        return ok

    def le(self, ineq, stage, lhs, rhs, strict=False):
        with _wp():
            l, r = _mpf(lhs), _mpf(rhs)
            ok = l < r if strict else l <= r
        return self.add(ineq, stage, lhs, rhs, ok)

    @property
    def passed(self) -> bool:
        return all(r["pass"] for r in self.rows)

    def failures(self) -> list:
        return [r for r in self.rows if not r["pass"]]

    def ids(self) -> set:
        return {r["id"] for r in self.rows}

    def status(self, ineq: str) -> bool:
        rows = [r for r in self.rows if r["id"] == ineq]
        return bool(rows) and all(r["pass"] for r in rows)

    def to_json(self) -> list:
        return list(self.rows)


def _show(v) -> str:
    if isinstance(v, Fraction):
        v = _mpf(v)
    if isinstance(v, int) and v.bit_length() > 200:
        return f"2^{math.log2(v.bit_length()) and mpmath.nstr(mpmath.log(v, 2), 12)}"
    if isinstance(v, (mpmath.mpf, float)):
        return mpmath.nstr(v, 15)
    return str(v)


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _segments(cut, m_last):
    """Integer segments [lo, hi] of the envelope: [1, m_1 - 1], [m_1, m_2 - 1], ..."""
    out, lo = [], 1
    for m in cut:
        out.append((lo, max(lo, m - 1)))
        lo = m
    return out


def build_cascade(target, K: int, eps=WITNESS_EPS, margin=MARGIN, max_bits: int = MAX_BITS,
                  first_quotient: int = 1) -> CascadeParams:
    """Inductive choice of (D-increment, m_k, q_{k+1}) for k = 1..K.

    At stage k, with q_{k-1}, q_k, D_k and m_{k-1} fixed:
      1. the increment b_k q_k q_{k+1} is the least value allowed by the
         lower-bound conditions D_k <= sqrt(incr)/2 and
         (A / 2 eps) sqrt(b_k q_{k+1} / q_k) > 1;
      2. m_k is taken from the target inverse so that D_{k+1} <= a(m_k) - 2^-k;
      3. q_{k+1} is the least convergent denominator large enough for the
         slope b_k q_k to satisfy the envelope, C^1-summability and
         C^1-closeness conditions, and for n_k > m_k.
    """
    if isinstance(target, GrowthSequence):
        target = SequenceTarget(target)
    if isinstance(target, str):
        target = parse_target(target)
    if K < 2:
        raise ValueError("K must be >= 2")
    if target.value(1) < 1:
        raise ValueError("target must satisfy a(1) >= 1")
    if isinstance(target, SequenceTarget):
        pass  # unboundedness checked on construction
    eps, margin = Fraction(eps), Fraction(margin)
    clb3 = (2 * eps / LAMBDA_MEASURE) ** 2
    rs = [first_quotient]
    q_prev, q = 1, first_quotient
    D = Fraction(0)
    m_prev = 0
    s_prev = None
    jumps, cut, ranges = [], [], []
    qs = [q]
    for k in range(1, K + 1):
        thr = Fraction(1, 2 ** k)
        jump = max(4 * D * D, clb3 * q * q) * (1 + margin)
        D_next = D + jump
        with _wp(64 + 2 * _frac_bits(D_next) + k):
            try:
                m = max(m_prev + 1, 2, target.inverse(D_next + thr * (1 + margin)))
            except OverflowError as exc:
                raise CascadeInfeasible(k, "CUB4", str(exc)) from None
            if isinstance(target, SequenceTarget) and m > target.seq.window:
                raise CascadeInfeasible(k, "CUB4", f"a(n) never reaches {float(D_next + thr):.4g} "
                                                   f"within the target window {target.seq.window}")
            if m.bit_length() > max_bits:
                raise CascadeInfeasible(k, "CUB4", f"cut point m_{k} needs {m.bit_length()} bits")
            J = _mpf(jump)
            shrink = 1 - _mpf(margin)
            lbs = {"MONO": mpmath.mpf(m), "CUB1": m * mpmath.sqrt(J) * (1 + _mpf(margin))}
            if m_prev > 0:
                lbs["CUB2"] = J * m_prev / (_mpf(thr) * shrink)
            head = []
            for n in {max(1, m_prev), max(1, m - 1)}:
                room = target.value(n) - _mpf(thr) - _mpf(D)
                if room <= 0:
                    raise CascadeInfeasible(k, "CUB3", f"no headroom at n={n}")
                head.append(J * n / (room * shrink))
            lbs["CUB3"] = max(head)
            lbs["CC1"] = 2 * J if s_prev is None else 2 * J / s_prev
            if ranges:
                lbs["CLB1"] = max(J * nj * (1 + mpmath.mpf(1) / q) for nj in ranges) / (_mpf(thr) * shrink)
            need = max(lbs.values())
            binding = max(lbs, key=lambda key: lbs[key])
            L = _ceil_int(need) + 1
            if L.bit_length() > max_bits:
                raise CascadeInfeasible(k, binding, f"q_{k + 1} needs {L.bit_length()} bits")
            r = max(1, -(-(L - q_prev) // q))
            q_prev, q = q, r * q + q_prev
            rs.append(r)
            qs.append(q)
            s_prev = J / q
            ranges.append(mpmath.mpf(q) / mpmath.sqrt(J))
            jumps.append(jump)
            cut.append(m)
            D = D_next
            m_prev = m
    pairs = convergent_pairs(rs)
    params = CascadeParams(target, rs, [q for _, q in pairs], [p for p, _ in pairs], jumps, cut,
                           meta={"eps": str(eps), "margin": str(margin)})
    params.certificate = check_inequalities(params, eps)
    return params


def envelope_eval(params: CascadeParams, n: int):
    """e(n) = C_k n + D_k on [m_{k-1}, m_k); e(m_K) = D_{K+1}."""
    mK = params.cutpoints[-1]
    if n < 1 or n > mK:
        raise ValueError(f"n={n} outside 1..m_K={mK}")
    D = params.envelope_offsets
    if n == mK:
        return _mpf(D[params.K])
    C = params.envelope_slopes
    for k, m in enumerate(params.cutpoints):
        if n < m:
            with _wp():
                return C[k] * n + _mpf(D[k])
    raise AssertionError("unreachable")


def _param_bits(params) -> int:
    return 64 + 2 * max(_frac_bits(d) for d in params.envelope_offsets) + params.K


def _partial_slopes(s, j, k):
    """C_j^k = sum_{i=j}^{k} b_i q_i (1-based, inclusive)."""
    return mpmath.fsum(s[j - 1:k])


def check_inequalities(params: CascadeParams, eps=WITNESS_EPS, cert: Certificate | None = None) -> Certificate:
    """All construction inequalities, recomputed from the stored raw integers."""
    cert = cert or Certificate()
    eps = Fraction(eps)
    rs, qs, K = params.partial_quotients, params.convergents_q, params.K
    a = params.target
    with _wp(_param_bits(params)):
        # convergent recursion q_{k+1} = r_{k+1} q_k + q_{k-1}
        q_m1, q_0 = 0, 1
        ext = [q_m1, q_0] + list(qs)
        for i in range(len(qs)):
            cert.add("RECURRENCE", i + 1, qs[i], rs[i] * ext[i + 1] + ext[i], qs[i] == rs[i] * ext[i + 1] + ext[i])
        b = [_mpf(d) / (mpmath.mpf(qs[k]) * qs[k + 1]) for k, d in enumerate(params.jumps)]
        s = [b[k] * qs[k] for k in range(K)]
        dD = [b[k] * qs[k] * qs[k + 1] for k in range(K)]
        D = [mpmath.mpf(0)]
        for x in dD:
            D.append(D[-1] + x)
        nk = [mpmath.sqrt(mpmath.mpf(qs[k + 1]) / s[k]) for k in range(K)]
        m = params.cutpoints
        # CC1: geometric decay of b_k q_k bounds the series
        cert.le("CC1", 1, s[0], mpmath.mpf(1) / 2)
        for k in range(1, K):
            cert.le("CC1", k + 1, s[k], s[k - 1] / 2)
        for k in range(K):
            cert.le("CUB1", k + 1, m[k], nk[k], strict=True)
            cert.add("AMPLITUDE", k + 1, b[k], 1, 0 < b[k] < 1)
        # CUB2 / CUB3: stage t envelope below a - 2^-t on every segment up to m_t
        segs = _segments(m, m[-1])
        for t in range(1, K + 1):
            thr = mpmath.mpf(2) ** -t
            for j in range(1, t + 1):
                lo, hi = segs[j - 1]
                slope = _partial_slopes(s, j, t)
                ineq = "CUB3" if j == t else "CUB2"
                pts = _check_points(a, lo, hi)
                worst = None
                for n in pts:
                    gap = (a.value(n) - thr) - (slope * n + D[j - 1])
                    if worst is None or gap < worst[0]:
                        worst = (gap, n)
                gap, n = worst
                cert.le(ineq, (t, j, n), slope * n + D[j - 1], a.value(n) - thr, strict=True)
            # CUB4 at stage t: e^t(m_t) = D_{t+1}
            cert.le("CUB4", t, D[t], a.value(m[t - 1]) - thr)
        # CLB1: fibre C^1 distance between f_k^{n_k} and f^{n_k} from the tail terms
        for k in range(1, K):
            tail = mpmath.fsum(min(s[i] * nk[k - 1], dD[i]) + b[i] * nk[k - 1] for i in range(k, K))
            cert.le("CLB1", k, tail, mpmath.mpf(2) ** -k)
        # CLB2 and CLB3
        A = _mpf(LAMBDA_MEASURE)
        for k in range(K):
            cert.le("CLB2", k + 1, D[k], mpmath.sqrt(dD[k]) / 2)
            val = A / (2 * _mpf(eps)) * mpmath.sqrt(b[k] * qs[k + 1]) / mpmath.sqrt(qs[k])
            cert.le("CLB3", k + 1, 1, val, strict=True)
        # envelope: monotone, decreasing slopes, below the target
        C = [mpmath.fsum(s[k:]) for k in range(K)]
        for k in range(K - 1):
            cert.le("SLOPES", k + 1, C[k + 1], C[k], strict=True)
        for k in range(K):
            left = C[k] * (m[k] - 1) + D[k]
            right = C[k + 1] * m[k] + D[k + 1] if k + 1 < K else D[K]
            cert.le("MONOTONE", k + 1, left, right)
        for k, (lo, hi) in enumerate(segs):
            for n in _check_points(a, lo, hi):
                cert.le("ENVELOPE", (k + 1, n), C[k] * n + D[k], a.value(n))
        cert.le("ENVELOPE", (K, m[-1]), D[K], a.value(m[-1]))
    return cert


def _check_points(a: Target, lo: int, hi: int):
    if a.concave:
        return sorted({lo, hi})  # concave minus linear attains its minimum at an endpoint
    return range(lo, hi + 1)


# ---------------------------------------------------------------------------
# independent verification
# ---------------------------------------------------------------------------

def verify_bounds(params: CascadeParams, grid: int = 10_000, eps=WITNESS_EPS, n_weyl: int = 1000,
                  witness_stages: int = 3, witness_budget: int = 400_000) -> Certificate:
    """Re-derive every inequality and confirm the Weyl-sum lemmas and the separation witness."""
    cert = check_inequalities(params, eps)
    rs, qs = params.partial_quotients, params.convergents_q
    K = params.K
    for c in convergents(rs):
        cert.add("EST1", c.k, c.dist, (c.lower, c.upper), c.in_bracket)
    b = params.amplitudes
    nk = params.linear_ranges
    with _wp(_param_bits(params)):
        for k in range(1, K + 1):
            q, q_next = qs[k - 1], qs[k]
            theta = signed_fraction(rs, k)
            dist = abs(theta)
            bk = b[k - 1]
            # |S_n(phi')| <= 2 max|u'| = 4 pi b q / |e^{2 pi i q alpha} - 1|
            uprime = 4 * mpmath.pi * bk * q / (2 * mpmath.sin(mpmath.pi * dist))
            cert.le("WEYL_ALL_ANALYTIC", k, uprime, 4 * mpmath.pi * bk * q * q_next)
            if bk * q < mpmath.mpf(10) ** -250:
                cert.add("WEYL_NUMERIC", k, "negligible amplitude", "", True)
                continue
            th = float(theta - mpmath.floor(theta))
            prof = weyl_derivative_profile(bk, q, th, n_weyl, grid)
            n = np.arange(1, n_weyl + 1)
            cert.le("WEYL_ALL", k, float(prof.max()), 4 * mpmath.pi * bk * q * q_next)
            short = float(mpmath.sqrt(q_next) / (mpmath.pi * mpmath.sqrt(2 * bk * q)))
            sel = n <= short
            if sel.any():
                excess = prof[sel] - (2 * math.pi * float(bk * q) * n[sel] + 1)
                i = int(np.argmax(excess))
                cert.le("WEYL_LINEAR", (k, int(n[sel][i])), float(prof[sel][i]),
                        2 * math.pi * float(bk * q) * int(n[sel][i]) + 1)
            sel = n <= float(nk[k - 1])
            if sel.any():
                excess = prof[sel] - (SLACK_FACTOR * float(bk * q) * n[sel] + 1)
                i = int(np.argmax(excess))
                cert.le("LNR_SLACK", (k, int(n[sel][i])), float(prof[sel][i]),
                        SLACK_FACTOR * float(bk * q) * int(n[sel][i]) + 1)
    for k in range(1, min(witness_stages, K) + 1):
        if not cert.status("CLB3"):
            break
        count, n = lambda_witness(params, k, float(eps), witness_budget)
        cert.le("LAMBDA", (k, n), qs[k - 1], count)
    return cert


def lambda_points(q: int, per_interval: int) -> np.ndarray:
    """Grid on {x : |sin(2 pi q x)| > 1/sqrt 2}: 2q arcs of length 1/(4q)."""
    u = (np.arange(per_interval) + 0.5) / per_interval  # strictly inside each arc
    arcs = []
    for c in range(2 * q):
        start = (c + 0.5) / (2 * q) - 1 / (8 * q)
        arcs.append(start + u / (4 * q))
    x = np.concatenate(arcs)
    return x - np.floor(x + 0.5)


def fiber_displacement(params: CascadeParams, xs, n: int) -> np.ndarray:
    """Fibre shift after n steps, mod 1, for points (x, 0): exact Birkhoff sums of the cosines.

    sum_{j=1..n} cos(2 pi q (x + j alpha)) = Re e^{2 pi i q x} z (z^n - 1) / (z - 1),
    z = e^{2 pi i q alpha}, so arbitrarily long orbits cost O(K) per point.
    """
    rs, qs = params.partial_quotients, params.convergents_q
    out = [mpmath.mpf(0)] * len(xs)
    for k, b in enumerate(params.amplitudes, start=1):
        q = qs[k - 1]
        with _wp(q.bit_length() + int(n).bit_length() + 128):
            theta = signed_fraction(rs, k)
            z = mpmath.expjpi(2 * theta)
            geo = z * (mpmath.expjpi(2 * theta * n) - 1) / (z - 1)
            for i, x in enumerate(xs):
                qx = q * mpmath.mpf(float(x))  # exact: x is a double
                out[i] += b * mpmath.re(mpmath.expjpi(2 * (qx - mpmath.floor(qx))) * geo)
    return np.array([float(v - mpmath.floor(v)) for v in out])


def _greedy_two_time(x, y, eps):
    """Ascending-scan greedy set, separated at time 0 (x) or time n (x + n alpha, y)."""
    chosen = []
    for i in range(len(x)):
        ok = True
        for c in chosen:
            dx = abs(x[i] - x[c]); dx = min(dx, 1 - dx)
            dy = abs(y[i] - y[c]); dy = min(dy, 1 - dy)
            if max(dx, dy) <= eps + 1e-9:
                ok = False
                break
        if ok:
            chosen.append(i)
    return chosen


def lambda_witness(params: CascadeParams, k: int, eps: float = 0.05, budget: int = 20_000):
    """Greedy (n_k, eps)-separated count among sampled points of Lambda_k x {0}.

    Separation is tested at times 0 and n_k only, which can only undercount.
    The x-coordinates move rigidly, so time n_k adds nothing in x.
    """
    q = params.convergents_q[k - 1]
    n = int(mpmath.floor(params.linear_ranges[k - 1]))
    with _wp():
        grow = mpmath.sqrt(_mpf(params.jumps[k - 1])) / 2
    # expected separated count per arc ~ arc length * stretch / eps; sample 4x finer
    per = int(min(4 * float(grow) / (4 * q * eps) + 8, max(8, budget // (2 * q))))
    x = lambda_points(q, per)
    y = fiber_displacement(params, x, n)
    return len(_greedy_two_time(x, y, eps)), n


def _fixed(v, bits: int) -> int:
    """round(frac(v) * 2^bits) for an mpf v (needs working precision > bits)."""
    return int(mpmath.nint((v - mpmath.floor(v)) * mpmath.mpf(2) ** bits))


def _phases(fixed: int, times, bits: int) -> np.ndarray:
    """frac(t * v) for each integer t, from v's fixed-point image (exact modular products)."""
    mask = (1 << bits) - 1
    shift = bits - 53
    return np.array([((t * fixed) & mask) >> shift for t in times], dtype=float) / 2.0 ** 53


def transitivity_witness(params: CascadeParams, cells: int = 20, horizon: int | None = None,
                         samples: int = 50_000):
    """Orbit of (0, 0) checked for visiting every cell of a cells x cells grid.

    The orbit is evaluated in closed form at ``samples`` strided times up to
    ``horizon``.  Up to time ~q_{j+1} the orbit hugs the graph
    y = (b_j q_{j+1} / 2 pi) sin(2 pi q_j x) + smaller terms, so the default horizon
    is 4 q_{j+1} for the first stage whose sweep b_j q_{j+1} / 2 pi exceeds 2.  A subset of
    the orbit hitting every cell is a valid witness.  Returns
    ``(time, unvisited)``; ``unvisited == 0`` means success.
    """
    rs, qs = params.partial_quotients, params.convergents_q
    if horizon is None:
        j = next((k for k, d in enumerate(params.jumps) if d >= 4 * math.pi * qs[k]), params.K - 1)
        horizon = 4 * qs[j + 1]
    horizon = int(horizon)
    stride = max(1, horizon // samples)
    times = [1 + i * stride + (i * 7919) % stride for i in range(samples)]
    bits = horizon.bit_length() + 64
    with _wp(bits + 64):
        xs = _phases(_fixed(params.alpha, bits), times, bits)
        y = np.zeros(samples)
        for k, b in enumerate(params.amplitudes, start=1):
            if b < mpmath.mpf(10) ** -300:
                continue
            th = signed_fraction(rs, k)
            th = th - mpmath.floor(th)
            fx = _fixed(th, bits)
            c = _phases(fx, times, bits)                 # t theta mod 1
            a = _phases(fx, [t + 1 for t in times], bits)  # (t+1) theta mod 1
            # sum_{j=1..t} cos(2 pi j theta) = cos(pi (t+1) theta) sin(pi t theta) / sin(pi theta),
            # with both angles taken mod 2 (sign tracked by the parity of floor(t theta))
            pa = np.array([((t + 1) * fx >> bits) & 1 for t in times], dtype=float)
            pc = np.array([(t * fx >> bits) & 1 for t in times], dtype=float)
            amp = float(b / mpmath.sin(mpmath.pi * th))
            y += amp * np.cos(np.pi * (a + pa)) * np.sin(np.pi * (c + pc))
    y -= np.floor(y)
    cell = np.minimum((xs * cells).astype(int), cells - 1) * cells + np.minimum((y * cells).astype(int), cells - 1)
    seen = np.zeros(cells * cells, bool)
    left = cells * cells
    for idx, cid in enumerate(cell):
        if not seen[cid]:
            seen[cid] = True
            left -= 1
            if left == 0:
                return times[idx], 0
    return times[-1], left
