"""Orders of growth: empirical sequences, symbolic classes and their comparison.

A :class:`GrowthSequence` is a finite, non-decreasing, nonnegative sequence
indexed from 1.  A :class:`SymbolicOrder` is the class of
``exp(t*n) * n^a * log(n)^b`` or one of the abstract sentinels that live only
in the completion of the order space.
"""
from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

# log-ratio band tolerated as a constant factor on the tail
EQUIV_BAND = math.log(4.0)
# two-decade swing in both directions => incomparable
DIVERGENCE = math.log(100.0)
# per-equal-log-interval drift ratio above which a trend is taken as divergent
CONVERGENT_RATES = (0.5, 1.0)
# the log-n trend model must beat the best convergent model by this SSE factor
TREND_MODEL_MARGIN = 0.5
# minimal tail drift of the log-ratio that can count as a trend
TREND_MIN_DRIFT = 0.02
DEFAULT_TAIL = 0.5
# mean-square log residual above which classification is refused
CLASSIFY_THRESHOLD = 0.1


class OrderRelation(enum.Enum):
    EQUIVALENT = "Equivalent"
    LESS = "Less"
    GREATER = "Greater"
    INCOMPARABLE = "Incomparable"
    INCONCLUSIVE = "Inconclusive"

    def flipped(self) -> "OrderRelation":
        if self is OrderRelation.LESS:
            return OrderRelation.GREATER
        if self is OrderRelation.GREATER:
            return OrderRelation.LESS
        return self


class Sentinel(enum.Enum):
    ZERO = "Zero"
    INF_P = "InfP"
    SUP_P = "SupP"
    INF_E = "InfE"
    SUP_E = "SupE"


class Family(enum.Enum):
    EXPONENTIAL = "Exponential"
    POLYNOMIAL = "Polynomial"


@dataclass(frozen=True)
class GrowthSequence:
    """Non-decreasing nonnegative sequence ``values[0] = a(1), ...``."""

    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if v.size == 0:
            raise ValueError("empty growth sequence")
        if np.any(~np.isfinite(v)) or np.any(v < 0):
            raise ValueError("growth sequence values must be finite and nonnegative")
        if np.any(np.diff(v) < 0):
            raise ValueError("growth sequence must be non-decreasing")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def monotone(cls, values, meta=None) -> "GrowthSequence":
        """Build from raw data, enforcing monotonicity by running maximum."""
        v = np.maximum.accumulate(np.asarray(values, dtype=float))
        return cls(v, dict(meta or {}))

    @classmethod
    def from_function(cls, fn, n_max: int, meta=None) -> "GrowthSequence":
        n = np.arange(1, n_max + 1, dtype=float)
        return cls(np.asarray(fn(n), dtype=float), dict(meta or {}))

    @property
    def window(self) -> int:
        return int(self.values.size)

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, self.window + 1)

    def __len__(self):
        return self.window

    def prefix(self, N: int) -> "GrowthSequence":
        return GrowthSequence(self.values[:N], self.meta)

    def scaled(self, c: float) -> "GrowthSequence":
        return GrowthSequence(self.values * c, self.meta)

    def to_tsv(self, header: dict | None = None) -> str:
        lines = []
        for k, v in (header or self.meta).items():
            lines.append(f"# {k}: {json.dumps(v, sort_keys=True)}")
        lines.append("n\tvalue")
        lines.extend(f"{i}\t{_fmt(x)}" for i, x in zip(self.n, self.values))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_tsv(cls, text: str) -> "GrowthSequence":
        vals = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("n\t"):
                continue
            _, v = line.split("\t")
            vals.append(float(v))
        return cls(np.array(vals))

    def to_json(self) -> list:
        return [_num(x) for x in self.values]

    @classmethod
    def from_json(cls, data) -> "GrowthSequence":
        if isinstance(data, str):
            data = json.loads(data)
        if isinstance(data, dict):
            data = data["values"]
        return cls(np.array(data, dtype=float))


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def _num(x: float):
    return int(x) if float(x).is_integer() else float(x)


@dataclass(frozen=True)
class SymbolicOrder:
    """Class of ``exp(t n) n^a log(n)^b``; a sentinel overrides the exponents."""

    exp_rate: float = 0.0
    poly_deg: Fraction = Fraction(0)
    log_deg: Fraction = Fraction(0)
    sentinel: Sentinel | None = None

    def __post_init__(self):
        object.__setattr__(self, "poly_deg", Fraction(self.poly_deg).limit_denominator(10**6))
        object.__setattr__(self, "log_deg", Fraction(self.log_deg).limit_denominator(10**6))
        if self.exp_rate < 0 or self.poly_deg < 0 or self.log_deg < 0:
            raise ValueError("exponents must be nonnegative")

    def _key(self):
        if self.sentinel is Sentinel.ZERO:
            return (0.0, Fraction(0), Fraction(0))
        return (float(self.exp_rate), self.poly_deg, self.log_deg)

    @property
    def is_zero(self) -> bool:
        return self.sentinel is Sentinel.ZERO or (
            self.sentinel is None and self._key() == (0.0, 0, 0)
        )

    @property
    def is_abstract(self) -> bool:
        return self.sentinel is not None and self.sentinel is not Sentinel.ZERO

    def generator(self, n) -> np.ndarray:
        """A representative sequence; ``log(n+1)`` keeps it positive at n=1."""
        if self.is_abstract:
            raise ValueError(f"{self} is not realizable by a sequence")
        n = np.asarray(n, dtype=float)
        t, a, b = self._key()
        return np.exp(self.log_generator(n))

    def log_generator(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        t, a, b = self._key()
        return t * n + float(a) * np.log(n) + float(b) * np.log(np.log(n + 1.0))

    def __str__(self) -> str:
        if self.sentinel is not None:
            return "0" if self.sentinel is Sentinel.ZERO else self.sentinel.value
        t, a, b = self._key()
        if (t, a, b) == (0.0, 0, 0):
            return "0"
        return f"exp({_rat(t)}*n)*n^{_rat(a)}*log(n)^{_rat(b)}"

    def pretty(self) -> str:
        """Short human form such as ``[n]`` or ``[exp(0.693*n)]``."""
        if self.sentinel is not None or self.is_zero:
            return str(self)
        t, a, b = self._key()
        parts = []
        if t:
            parts.append(f"exp({t:.4g}*n)")
        if a:
            parts.append("n" if a == 1 else f"n^{a}")
        if b:
            parts.append("log(n)" if b == 1 else f"log(n)^{b}")
        return "[" + "*".join(parts) + "]"

    @classmethod
    def parse(cls, text: str) -> "SymbolicOrder":
        text = text.strip()
        if text == "0":
            return ZERO
        for s in Sentinel:
            if text == s.value:
                return cls(sentinel=s)
        m = re.fullmatch(
            r"exp\(([^*]+)\*n\)\*n\^([^*]+)\*log\(n\)\^(.+)", text
        )
        if not m:
            raise ValueError(f"cannot parse symbolic order {text!r}")
        t = float(Fraction(m.group(1)))
        return cls(t, Fraction(m.group(2)), Fraction(m.group(3)))


def _rat(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if float(x).is_integer():
        return str(int(x))
    return repr(float(x))


ZERO = SymbolicOrder(sentinel=Sentinel.ZERO)


def poly(a, b=0) -> SymbolicOrder:
    return SymbolicOrder(0.0, Fraction(a), Fraction(b))


def expo(t: float) -> SymbolicOrder:
    return SymbolicOrder(float(t))


UNRESOLVED = "Unresolved"


# ---------------------------------------------------------------------------
# symbolic comparison
# ---------------------------------------------------------------------------

def _sentinel_rank(s: Sentinel) -> int:
    return {Sentinel.INF_P: 0, Sentinel.SUP_P: 1, Sentinel.INF_E: 2, Sentinel.SUP_E: 3}[s]


def _cmp_sentinel_finite(s: Sentinel, o: SymbolicOrder) -> OrderRelation:
    """Relation of abstract sentinel ``s`` against a realizable class ``o``."""
    t, a, b = o._key()
    if s is Sentinel.SUP_E:
        return OrderRelation.GREATER
    if s is Sentinel.INF_E:
        return OrderRelation.LESS if t > 0 else OrderRelation.GREATER
    if s is Sentinel.SUP_P:
        return OrderRelation.LESS if t > 0 else OrderRelation.GREATER
    # InfP sits above every 0 < o < [n^t] for all t > 0 and below every [n^t]
    if t > 0 or a > 0:
        return OrderRelation.LESS
    return OrderRelation.GREATER


def compare_symbolic(o1: SymbolicOrder, o2: SymbolicOrder) -> OrderRelation:
    """Exact comparison; abstract sentinels are ordered by fixed rules."""
    a1, a2 = o1.is_abstract, o2.is_abstract
    if a1 and a2:
        r1, r2 = _sentinel_rank(o1.sentinel), _sentinel_rank(o2.sentinel)
        if r1 == r2:
            return OrderRelation.EQUIVALENT
        return OrderRelation.LESS if r1 < r2 else OrderRelation.GREATER
    if a1:
        return _cmp_sentinel_finite(o1.sentinel, o2)
    if a2:
        return _cmp_sentinel_finite(o2.sentinel, o1).flipped()
    k1, k2 = o1._key(), o2._key()
    if k1 == k2:
        return OrderRelation.EQUIVALENT
    return OrderRelation.LESS if k1 < k2 else OrderRelation.GREATER


# ---------------------------------------------------------------------------
# empirical comparison
# ---------------------------------------------------------------------------

def _tail_slice(N: int, tail_fraction: float) -> slice:
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    start = min(N - 1, int(math.floor(N * (1 - tail_fraction))))
    return slice(start, N)


def _geometric_bins(n: np.ndarray, nbins: int) -> list[np.ndarray]:
    """Split tail indices into bins of equal width in log n."""
    lo, hi = math.log(n[0]), math.log(n[-1]) + 1e-12
    edges = np.linspace(lo, hi, nbins + 1)
    which = np.clip(np.searchsorted(edges, np.log(n), side="right") - 1, 0, nbins - 1)
    return [np.flatnonzero(which == i) for i in range(nbins)]


def _sse(y: np.ndarray, x: np.ndarray) -> float:
    """Residual sum of squares of the least-squares line y ~ a + b x."""
    A = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return float(np.sum((y - A @ coef) ** 2))


def _trend(r: np.ndarray, n: np.ndarray) -> int:
    """+1 / -1 if the log-ratio drifts persistently up / down, else 0."""
    if r.size < 4:
        steps = np.diff(r)
        if steps.size and (np.all(steps > 0) or np.all(steps < 0)):
            drift = r[-1] - r[0]
            if abs(drift) >= TREND_MIN_DRIFT:
                return int(np.sign(drift))
        return 0
    bins = [b for b in _geometric_bins(n, 4) if b.size]
    if len(bins) < 4:
        bins = np.array_split(np.arange(r.size), 4)
    m = np.array([r[b].mean() for b in bins])
    steps = np.diff(m)
    drift = m[-1] - m[0]
    if abs(drift) < TREND_MIN_DRIFT:
        return 0
    sign = np.sign(drift)
    if not np.all(np.sign(steps) == sign):
        return 0
    # a ratio converging to a constant is fit about as well by a + b*n^-g as by a + b*log n
    if _sse(r, np.log(n)) >= TREND_MODEL_MARGIN * min(_sse(r, n ** -g) for g in CONVERGENT_RATES):
        return 0
    return int(sign)


def compare_sequences(a: GrowthSequence, b: GrowthSequence,
                      tail_fraction: float = DEFAULT_TAIL) -> OrderRelation:
    """Decide ``[a]`` versus ``[b]`` from the tail of the common window."""
    N = min(a.window, b.window)
    if N < 8:
        raise ValueError("comparison needs windows of at least 8")
    sl = _tail_slice(N, tail_fraction)
    x, y = a.values[:N][sl], b.values[:N][sl]
    n = np.arange(1, N + 1, dtype=float)[sl]
    xz, yz = x == 0, y == 0
    if np.any(yz & ~xz):
        return OrderRelation.GREATER
    if np.any(xz & ~yz):
        return OrderRelation.LESS
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(xz & yz, 0.0, np.log(x) - np.log(y))
    hi, lo = r.max(), r.min()
    if hi > DIVERGENCE and lo < -DIVERGENCE:
        return OrderRelation.INCOMPARABLE
    t = _trend(r, n)
    if t > 0:
        return OrderRelation.GREATER
    if t < 0:
        return OrderRelation.LESS
    if hi - lo <= EQUIV_BAND:
        return OrderRelation.EQUIVALENT
    return OrderRelation.INCONCLUSIVE


# ---------------------------------------------------------------------------
# projections and classification
# ---------------------------------------------------------------------------

def _slope(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2 or np.ptp(x) == 0:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def project_onto_family(a: GrowthSequence, base, tail_fraction: float = DEFAULT_TAIL) -> float:
    """Empirical limsup growth rate of ``a`` relative to a one-parameter family.

    ``base`` is :class:`Family` or a :class:`GrowthSequence` used as custom
    scale ``b(n)``.  Returns ``math.inf`` when the rate keeps increasing across
    successive halves of the tail and ``0.0`` when it keeps decaying.
    """
    N = a.window
    if N < 8:
        raise ValueError("projection needs a window of at least 8")
    if np.all(a.values == 0):
        return 0.0
    n = np.arange(1, N + 1, dtype=float)
    if base is Family.EXPONENTIAL or base == "Exponential":
        x = n
    elif base is Family.POLYNOMIAL or base == "Polynomial":
        x = np.log(n)
    elif isinstance(base, GrowthSequence):
        if base.window < N:
            N = base.window
            n = n[:N]
        bv = base.values[:N]
        if np.any(bv <= 0):
            raise ValueError("custom base must be positive")
        x = np.log(bv)
    else:
        raise ValueError(f"unknown family {base!r}")
    v = a.values[:N]
    sl = _tail_slice(N, tail_fraction)
    xs, vs = x[sl], v[sl]
    pos = vs > 0
    xs, ys = xs[pos], np.log(vs[pos])
    if xs.size < 2:
        return 0.0
    s = _slope(xs, ys)
    half = xs.size // 2
    if half >= 2 and xs.size - half >= 2:
        s1, s2 = _slope(xs[:half], ys[:half]), _slope(xs[half:], ys[half:])
        if s1 > 0 and s2 > 1.25 * s1 and s2 - s1 > 0.05 * max(1.0, abs(s1)):
            return math.inf
        if s1 > 0 and s2 < 0.75 * s1:
            return 0.0
    return max(0.0, s)


DEFAULT_CATALOG: tuple[SymbolicOrder, ...] = (
    ZERO,
    poly(0, 1),
    poly(Fraction(1, 4)),
    poly(Fraction(1, 2)),
    poly(1),
    poly(1, 1),
    poly(2),
    poly(3),
)


def classify_sequence(a: GrowthSequence, catalog: Sequence[SymbolicOrder] = DEFAULT_CATALOG,
                      tail_fraction: float = DEFAULT_TAIL,
                      threshold: float = CLASSIFY_THRESHOLD):
    """Nearest catalog class by tail mean-square log residual.

    Returns ``(class_or_UNRESOLVED, residual)``.  A class is accepted only if
    its residual is below ``threshold`` and the empirical comparison against
    its generator reports ``Equivalent``.
    """
    if not catalog:
        raise ValueError("catalog must be non-empty")
    N = a.window
    sl = _tail_slice(N, tail_fraction)
    n = np.arange(1, N + 1, dtype=float)
    v = a.values
    best, best_res = None, math.inf
    for o in catalog:
        if o.is_abstract:
            continue
        if np.any(v[sl] <= 0):
            res = 0.0 if (o.is_zero and np.all(v[sl] == 0)) else math.inf
        else:
            r = np.log(v[sl]) - o.log_generator(n[sl])
            res = float(np.mean((r - r.mean()) ** 2))
        if res < best_res:
            best, best_res = o, res
    if best is None or best_res > threshold:
        return UNRESOLVED, best_res
    gen = GrowthSequence(best.generator(n))
    vv = v if np.any(v > 0) else np.ones_like(v)
    if compare_sequences(GrowthSequence(vv), gen, tail_fraction) is not OrderRelation.EQUIVALENT:
        return UNRESOLVED, best_res
    return best, best_res


def pointwise_max(seqs: Iterable[GrowthSequence]) -> GrowthSequence:
    seqs = list(seqs)
    N = min(s.window for s in seqs)
    return GrowthSequence(np.max([s.values[:N] for s in seqs], axis=0))
