import math

import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import FROZEN, matpow, max_entry, rank_sequence
from ordgrowth.estimators import growth_curve
from ordgrowth.growth_order import GrowthSequence
from ordgrowth.homology import (SpectralRadiusError, as_int_matrix, block_profile, manning_check, parse_matrix,
                                power_norm_growth, power_norms, shub_exponent, spectral_radius,
                                spectral_radius_bracket, unit_spectrum)
from ordgrowth.systems import torus_linear

DEHN = [[1, 1], [0, 1]]
ROT90 = [[0, -1], [1, 0]]
COUPLED4 = [[0, -1, 1, 0], [1, 0, 0, 1], [0, 0, 0, -1], [0, 0, 1, 0]]


def jordan(d, lam=1):
    return [[lam if i == j else (1 if j == i + 1 else 0) for j in range(d)] for i in range(d)]


def direct_sum(*blocks):
    d = sum(len(b) for b in blocks)
    out = [[0] * d for _ in range(d)]
    o = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, v in enumerate(row):
                out[o + i][o + j] = v
        o += len(b)
    return out


CYCLE5 = [[1 if i == (j + 1) % 5 else 0 for j in range(5)] for i in range(5)]

# (matrix, expected exponent); all have spectral radius 1
CATALOG = [
    ("identity2", np.eye(2, dtype=int).tolist(), 0),
    ("dehn", DEHN, 1),
    ("rotation90", ROT90, 0),
    ("coupled4", COUPLED4, 1),
    ("jordan3", jordan(3), 2),
    ("jordan4", jordan(4), 3),
    ("neg_dehn", [[-1, 1], [0, -1]], 1),
    ("order3", [[0, -1], [1, -1]], 0),
    ("cycle5", CYCLE5, 0),
    ("mixed6", direct_sum(jordan(3), ROT90, [[1]]), 2),
]


# --- spectral radius ------------------------------------------------------------

def test_spectral_radius_examples():
    assert spectral_radius(np.eye(2, dtype=int)) == 1.0
    assert spectral_radius(DEHN) == 1.0
    golden = spectral_radius([[2, 1], [1, 1]])
    assert golden == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-9)
    lo, hi = spectral_radius_bracket([[2, 1], [1, 1]])
    assert lo <= (3 + math.sqrt(5)) / 2 <= hi and hi - lo < 1e-8


def test_unit_spectrum_exact():
    assert unit_spectrum(ROT90) and unit_spectrum(CYCLE5)
    assert not unit_spectrum([[2, 1], [1, 1]])
    assert not unit_spectrum([[0, 0], [0, 0]])


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        as_int_matrix([[1.5, 0], [0, 1]])
    with pytest.raises(ValueError):
        parse_matrix("1,0.5;0,1")
    with pytest.raises(ValueError):
        as_int_matrix([[1, 0, 0], [0, 1, 0]])
    assert parse_matrix("1,1;0,1") == DEHN == parse_matrix("[[1, 1], [0, 1]]")


# --- block profile --------------------------------------------------------------

def test_block_profile_examples():
    h = block_profile(DEHN)
    assert h.block_profile == {"+1": [2]} and h.k_R == 2
    h = block_profile(np.eye(3, dtype=int))
    assert h.block_profile == {"+1": [1, 1, 1]} and h.k_R == 1
    h = block_profile(ROT90)
    assert h.block_profile == {"x**2 + 1": [2]} and h.k_C == 2


def test_rank_sequences_match_fraction_oracle():
    assert rank_sequence([[0, 1], [0, 0]], 2) == FROZEN["ranks_dehn"]
    assert rank_sequence([[1, 0], [0, 1]], 1) == [2, 2]  # sanity: identity has full rank
    phi = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(matpow(ROT90, 2), matpow(ROT90, 0))]
    assert rank_sequence(phi, 1) == FROZEN["ranks_rot90_phi"]


@pytest.mark.parametrize("name,A,k", CATALOG, ids=[c[0] for c in CATALOG])
def test_block_dimensions_sum_to_multiplicity(name, A, k):
    h = block_profile(A)
    p = sympy.Matrix(A).charpoly(sympy.Symbol("x")).as_poly()
    for q, mult in p.factor_list()[1]:
        if q.degree() == 1:
            label = f"{int(-q.all_coeffs()[1]):+d}"
            if label in h.block_profile:
                assert sum(h.block_profile[label]) == mult
        elif str(q.as_expr()) in h.block_profile:
            # dimensions are listed per conjugate pair; every root of the factor shares them
            assert sum(h.block_profile[str(q.as_expr())]) == 2 * mult


# --- exponent and power norms ---------------------------------------------------

@pytest.mark.parametrize("name,A,k", CATALOG, ids=[c[0] for c in CATALOG])
def test_exponent_matches_catalog_and_fitted_degree(name, A, k):
    assert shub_exponent(A) == k
    _, degree = power_norm_growth(A, 256)
    assert abs(degree - k) <= 0.15


def test_exponent_needs_unit_spectrum():
    with pytest.raises(SpectralRadiusError):
        shub_exponent([[2, 1], [1, 1]])


def test_power_norms_match_naive_powers():
    for _, A, _ in CATALOG[:6]:
        got = power_norms(A, 20)
        assert got == [max_entry(matpow(A, n)) for n in range(20)]


def test_power_norm_growth_window():
    with pytest.raises(ValueError):
        power_norm_growth(DEHN, 16)
    seq, _ = power_norm_growth([[2, 1], [1, 1]], 256, max_bits=64)
    assert seq.meta["horizon"] < 256


@st.composite
def unimodular(draw, d):
    Q = sympy.eye(d)
    for _ in range(draw(st.integers(1, 6))):
        i, j = draw(st.integers(0, d - 1)), draw(st.integers(0, d - 1))
        if i == j:
            continue
        c = draw(st.integers(-2, 2))
        E = sympy.eye(d)
        E[i, j] = c
        Q = Q * E
    if draw(st.booleans()):
        P = sympy.eye(d)
        P[0, 0] = -1
        Q = Q * P
    return Q


@settings(max_examples=25)
@given(st.data())
def test_exponent_invariant_under_unimodular_conjugation(data):
    name, A, k = data.draw(st.sampled_from(CATALOG))
    d = len(A)
    Q = data.draw(unimodular(d))
    B = Q.inv() * sympy.Matrix(A) * Q
    assert abs(Q.det()) == 1
    assert shub_exponent(B) == k
    assert sorted(block_profile(B).block_profile.items()) == sorted(block_profile(A).block_profile.items())


# --- norm lower bound from entropy ----------------------------------------------

def test_manning_dehn_twist_passes():
    spec = torus_linear(np.array(DEHN))
    curve = growth_curve(spec, 0.05, 100, kind="spanning")
    report = manning_check(DEHN, curve, 0.05)
    assert report.passed and report.window == 100


def test_manning_identity_trivial():
    curve = GrowthSequence(np.zeros(50))
    assert manning_check(np.eye(2, dtype=int), curve).passed


def test_manning_zero_curve_fails_on_dehn():
    report = manning_check(DEHN, GrowthSequence(np.zeros(40)))
    assert not report.passed
    assert report.first_failure == FROZEN["dehn_manning_first_failure"]
