"""Lower bounds on entropy order from an integer action on first homology.

Everything that depends on ranks or factorizations is exact (sympy over ZZ/QQ).
Only the spectral radius is numeric, and it comes with a certified bracket.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import sympy

from .growth_order import Family, GrowthSequence, project_onto_family

MAX_DIM = 12
ROOT_TOL = 1e-9
MANNING_CONSTANT = 12
DEFAULT_MAX_BITS = 4096

_x = sympy.Symbol("x")


def as_int_matrix(A) -> sympy.Matrix:
    """Square integer matrix from nested lists, numpy, sympy or text ("1,1;0,1")."""
    if isinstance(A, str):
        A = parse_matrix(A)
    M = sympy.Matrix(A)
    if M.rows != M.cols:
        raise ValueError(f"matrix must be square, got {M.rows}x{M.cols}")
    if not 1 <= M.rows <= MAX_DIM:
        raise ValueError(f"matrix size must be between 1 and {MAX_DIM}")
    for v in M:
        if not v.is_Integer:
            raise ValueError(f"entries must be integers, got {v!r}")
    return M


def parse_matrix(text: str) -> list:
    text = text.strip()
    if text.startswith("["):
        rows = json.loads(text)
    else:
        rows = [[c.strip() for c in r.split(",")] for r in text.split(";") if r.strip()]
    out = []
    for r in rows:
        row = []
        for c in r:
            if isinstance(c, bool) or (isinstance(c, float) and not c.is_integer()):
                raise ValueError(f"non-integer entry {c!r}")
            if isinstance(c, str):
                try:
                    c = int(c)
                except ValueError:
                    raise ValueError(f"non-integer entry {c!r}") from None
            row.append(int(c))
        out.append(row)
    return out


def char_poly(A) -> sympy.Poly:
    M = as_int_matrix(A)
    return M.charpoly(_x).as_poly(_x, domain="ZZ")


def _fr(v) -> Fraction:
    return Fraction(int(sympy.Rational(v).p), int(sympy.Rational(v).q))


def _root_moduli(p: sympy.Poly, tol: float = ROOT_TOL):
    """Isolating boxes refined below ``tol``; yields (|z| lower, |z| upper, multiplicity)."""
    for (lo, hi), mult in _intervals(p, tol):
        # boxes are given by their lower-left and upper-right corners (reals: degenerate boxes)
        x0, y0 = _fr(sympy.re(lo)), _fr(sympy.im(lo))
        x1, y1 = _fr(sympy.re(hi)), _fr(sympy.im(hi))
        far = max(abs(x0), abs(x1)) ** 2 + max(abs(y0), abs(y1)) ** 2
        near = (0 if x0 <= 0 <= x1 else min(abs(x0), abs(x1)) ** 2) \
            + (0 if y0 <= 0 <= y1 else min(abs(y0), abs(y1)) ** 2)
        yield float(near) ** 0.5, float(far) ** 0.5, mult


def _intervals(p, tol):
    eps = sympy.Rational(1, 10 ** 10) if tol >= 1e-10 else sympy.nsimplify(tol)
    out = []
    for q, mult in p.factor_list()[1]:
        if q.degree() == 0:
            continue
        if q.degree() == 1:
            r = -sympy.Rational(q.all_coeffs()[1], q.all_coeffs()[0])
            out.append(((r, r), mult))
            continue
        # reals come back as (a, b), complex roots as ((x0, y0), (x1, y1))
        reals, cplx = q.intervals(all=True, eps=eps)
        out += [(iv, mult * m) for iv, m in reals + cplx]
    return out


def spectral_radius_bracket(A, tol: float = ROOT_TOL) -> tuple:
    """Certified (lower, upper) bounds on the spectral radius."""
    p = char_poly(A)
    lo = hi = 0.0
    for a, b, _ in _root_moduli(p, tol):
        if b > hi:
            hi = b
        if a > lo:
            lo = a
    return lo, hi


def spectral_radius(A) -> float:
    """Spectral radius; exactly 1.0 for integer matrices whose eigenvalues are roots of unity or 0."""
    if unit_spectrum(A):
        return 1.0
    lo, hi = spectral_radius_bracket(A)
    return (lo + hi) / 2


def _factors(A):
    p = char_poly(A)
    return [(q, m) for q, m in p.factor_list()[1] if q.degree() > 0]


def unit_spectrum(A) -> bool:
    """True when sp(A) = 1 exactly: every nonzero eigenvalue is a root of unity (Kronecker)."""
    facs = _factors(A)
    nonzero = [q for q, _ in facs if q.as_expr() != _x]
    return bool(nonzero) and all(q.is_cyclotomic for q in nonzero)


def _rank(M: sympy.Matrix) -> int:
    return M.rank(iszerofunc=lambda v: v == 0)


def _rank_drops(N: sympy.Matrix, d: int) -> list:
    ranks = [d]
    P = sympy.eye(d)
    for _ in range(d):
        P = P * N
        ranks.append(_rank(P))
        if ranks[-1] == ranks[-2]:
            break
    return ranks


def _blocks_from_ranks(ranks, per_root_degree: int) -> list:
    """Block sizes from r_j = rank(N^j): #blocks of size >= j = (r_{j-1} - r_j) / degree."""
    ge = [(ranks[j - 1] - ranks[j]) // per_root_degree for j in range(1, len(ranks))]
    ge.append(0)
    sizes = []
    for j in range(len(ge) - 1):
        sizes += [j + 1] * (ge[j] - ge[j + 1])
    return sorted(sizes, reverse=True)


@dataclass
class HomologyAction:
    A: list
    char_poly: list
    sp: float
    sp_bracket: tuple
    unit: bool
    block_profile: dict = field(default_factory=dict)  # class label -> real-Jordan block dims
    k_R: int = 0
    k_C: int = 0

    def to_json(self) -> dict:
        return {"A": self.A, "char_poly": self.char_poly, "sp": self.sp, "sp_bracket": list(self.sp_bracket),
                "unit_spectrum": self.unit, "block_profile": self.block_profile,
                "k_R": self.k_R, "k_C": self.k_C}


def block_profile(A) -> HomologyAction:
    """Real-Jordan block dimensions at every unit-modulus eigenvalue class.

    Real eigenvalues +-1 use the rank sequence of (A -+ I)^j.  A cyclotomic factor
    of degree m > 1 uses Phi(A)^j, whose rank drops by m per Jordan chain level;
    each complex block of size s contributes a real-Jordan block of dimension 2s.
    """
    M = as_int_matrix(A)
    d = M.rows
    p = char_poly(M)
    facs = _factors(M)
    profile, kR, kC = {}, 0, 0
    for q, mult in facs:
        if q.as_expr() == _x or not q.is_cyclotomic:
            continue
        N = _poly_at(q, M)
        ranks = _rank_drops(N, d)
        sizes = _blocks_from_ranks(ranks, q.degree())
        if q.degree() == 1:
            root = -q.all_coeffs()[1]
            label = f"{int(root):+d}"
            dims = sizes
            kR = max(kR, max(dims, default=0))
            assert sum(dims) == mult, "block sizes must add up to the multiplicity"
        else:
            label = str(q.as_expr())
            dims = [2 * s for s in sizes]
            kC = max(kC, max(dims, default=0))
            assert sum(sizes) == mult, "block sizes must add up to the multiplicity"
        profile[label] = dims
    lo, hi = spectral_radius_bracket(M)
    unit = unit_spectrum(M)
    return HomologyAction(
        A=[[int(v) for v in M.row(i)] for i in range(d)],
        char_poly=[int(c) for c in p.all_coeffs()],
        sp=1.0 if unit else (lo + hi) / 2, sp_bracket=(lo, hi), unit=unit,
        block_profile=profile, k_R=kR, k_C=kC)


def _poly_at(q: sympy.Poly, M: sympy.Matrix) -> sympy.Matrix:
    d = M.rows
    out = sympy.zeros(d)
    for c in q.all_coeffs():  # Horner
        out = out * M + int(c) * sympy.eye(d)
    return out


class SpectralRadiusError(ValueError):
    pass


def shub_exponent(A) -> Fraction:
    """max{k_R, k_C / 2} - 1 for actions with spectral radius 1 (k_C in real-Jordan dimension)."""
    h = block_profile(A)
    if not h.unit:
        raise SpectralRadiusError(
            f"spectral radius is {h.sp:.6g} (not 1); use spectral_radius: log sp is then a lower bound "
            "for the exponential growth rate")
    return max(Fraction(h.k_R), Fraction(h.k_C, 2)) - 1


def _max_entry(P) -> int:
    return max(abs(int(v)) for v in P.flat)


def power_norms(A, n_max: int, max_bits: int = DEFAULT_MAX_BITS) -> list:
    """||A^{n-1}|| (max absolute entry) for n = 1..n_max in exact integers.

    Stops early once entries exceed ``max_bits`` bits.
    """
    M = np.array(as_int_matrix(A).tolist(), dtype=object)
    d = M.shape[0]
    P = np.array([[int(i == j) for j in range(d)] for i in range(d)], dtype=object)
    out = []
    for _ in range(n_max):
        v = _max_entry(P)
        if v.bit_length() > max_bits:
            break
        out.append(v)
        P = P.dot(M)
    return out


def power_norm_growth(A, n_max: int = 256, max_bits: int = DEFAULT_MAX_BITS):
    """(sequence n -> ||A^{n-1}||, fitted polynomial degree).

    Max-entry norms of A^n can dip (rotation parts), so the sequence is the
    running maximum, which is equivalent in growth order.  The window is
    truncated when entries exceed the integer budget; the actual horizon is
    recorded in ``meta["horizon"]``.
    """
    if n_max < 32:
        raise ValueError("n_max must be at least 32")
    norms = power_norms(A, n_max, max_bits)
    seq = GrowthSequence.monotone([float(v) if v.bit_length() < 1000 else float("inf") for v in norms],
                                  meta={"horizon": len(norms), "requested": n_max, "norm": "max-entry"})
    if not np.all(np.isfinite(seq.values)):
        finite = int(np.argmax(~np.isfinite(seq.values)))
        seq = GrowthSequence(seq.values[:finite], {**seq.meta, "horizon": finite})
    return seq, project_onto_family(seq, Family.POLYNOMIAL)


@dataclass
class ManningReport:
    passed: bool
    window: int
    first_failure: int | None
    min_ratio: float   # min over n of 12 (1 + g(n)) / ||A^{n-1}||
    rows: list

    def to_json(self) -> dict:
        return {"passed": self.passed, "window": self.window, "first_failure": self.first_failure,
                "min_ratio": self.min_ratio}


def manning_check(A, curve: GrowthSequence, eps: float | None = None) -> ManningReport:
    """Pointwise ||A^{n-1}|| <= 12 (1 + g(n)) on the common window.

    ``curve`` should be greedy spanning counts; greedy covers can only be larger
    than the minimal ones, so ``min_ratio`` is the headroom including that
    inflation.
    """
    norms = power_norms(A, curve.window)
    N = min(len(norms), curve.window)
    rows, first, ratio = [], None, float("inf")
    for n in range(1, N + 1):
        lhs = norms[n - 1]
        rhs = MANNING_CONSTANT * (1 + curve.values[n - 1])
        ok = lhs <= rhs
        rows.append((n, lhs, rhs, ok))
        ratio = min(ratio, rhs / lhs)
        if not ok and first is None:
            first = n
    return ManningReport(first is None, N, first, ratio, rows)
