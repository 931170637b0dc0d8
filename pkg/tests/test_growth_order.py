import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import FROZEN, ratio_scan, staircase_pair
from ordgrowth.growth_order import (DEFAULT_CATALOG, UNRESOLVED, ZERO, Family, GrowthSequence,
                                    OrderRelation, Sentinel, SymbolicOrder, classify_sequence,
                                    compare_sequences, compare_symbolic, expo, pointwise_max, poly,
                                    project_onto_family)

EQ, LT, GT = OrderRelation.EQUIVALENT, OrderRelation.LESS, OrderRelation.GREATER


def seq(fn, N):
    return GrowthSequence.from_function(fn, N)


# --- GrowthSequence -------------------------------------------------------------

def test_rejects_decreasing_and_negative():
    with pytest.raises(ValueError):
        GrowthSequence(np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        GrowthSequence(np.array([-1.0, 0.0]))
    with pytest.raises(ValueError):
        GrowthSequence(np.array([]))


def test_monotone_takes_running_max():
    s = GrowthSequence.monotone([1, 3, 2, 5])
    assert list(s.values) == [1, 3, 3, 5]


def test_tsv_and_json_round_trip():
    s = seq(lambda n: n * np.log(n + 1), 50)
    assert np.allclose(GrowthSequence.from_tsv(s.to_tsv({"eps": 0.1})).values, s.values)
    assert np.allclose(GrowthSequence.from_json(s.to_json()).values, s.values)


# --- compare_sequences ----------------------------------------------------------

def test_linear_vs_double_is_equivalent():
    assert compare_sequences(seq(lambda n: n, 100), seq(lambda n: 2 * n, 100)) is EQ


def test_linear_vs_nlog_is_less():
    assert compare_sequences(seq(lambda n: n, 10000), seq(lambda n: n * np.log(n + 1), 10000)) is LT


def test_staircase_oracle_matches_frozen_swing():
    a, b = staircase_pair()
    up, down = ratio_scan(a, b)
    assert up > 100 and down > 100
    assert round(math.log2(min(up, down))) >= FROZEN["staircase_log2_swing"]


def test_staircase_is_incomparable():
    a, b = staircase_pair()
    rel = compare_sequences(GrowthSequence(a), GrowthSequence(b))
    assert rel is OrderRelation.INCOMPARABLE


@pytest.mark.parametrize("fa,fb,expected", [
    (lambda n: n, lambda n: n ** 2, LT),
    (lambda n: 3 * n + 40, lambda n: n, EQ),
    (lambda n: n ** 1.1, lambda n: n, GT),
    (lambda n: n + 100, lambda n: n, EQ),
    (lambda n: np.sqrt(n), lambda n: np.log(n + 1), GT),
    (lambda n: np.log(n + 1), lambda n: np.ones_like(n), GT),
])
def test_compare_known_pairs(fa, fb, expected):
    assert compare_sequences(seq(fa, 4000), seq(fb, 4000)) is expected


def test_short_window_rejected():
    with pytest.raises(ValueError):
        compare_sequences(seq(lambda n: n, 5), seq(lambda n: n, 5))


growth_fns = st.sampled_from([
    lambda n: np.ones_like(n),
    lambda n: np.log(n + 1),
    lambda n: np.sqrt(n),
    lambda n: n,
    lambda n: n * np.log(n + 1),
    lambda n: n ** 2,
    lambda n: np.exp(0.05 * n),
])


@given(growth_fns, st.integers(50, 2000))
def test_compare_reflexive(fn, N):
    a = seq(fn, N)
    assert compare_sequences(a, a) is EQ


@given(growth_fns, growth_fns, st.sampled_from([0.3, 0.5, 0.8]))
def test_compare_antisymmetric(fa, fb, tail):
    a, b = seq(fa, 600), seq(fb, 600)
    r1, r2 = compare_sequences(a, b, tail), compare_sequences(b, a, tail)
    assert r2 is r1.flipped()


@given(growth_fns, st.sampled_from([0.1, 1.0, 10.0]))
def test_scaling_invariance(fn, c):
    a = seq(fn, 800)
    assert compare_sequences(a.scaled(c), a) is EQ


# --- compare_symbolic -----------------------------------------------------------

def test_symbolic_examples():
    assert compare_symbolic(poly(1), poly(1, 1)) is LT
    assert compare_symbolic(expo(math.log(2)), SymbolicOrder(sentinel=Sentinel.SUP_P)) is GT
    assert compare_symbolic(ZERO, poly(0, 0)) is EQ


def _catalog50():
    out = [ZERO] + [SymbolicOrder(sentinel=s) for s in Sentinel if s is not Sentinel.ZERO]
    for a, b in itertools.product([0, Fraction(1, 4), Fraction(1, 2), 1, 2, 3], [0, 1, 2]):
        out.append(poly(a, b))
    for t in (0.1, 0.2, 0.5, math.log(2), 1.0, 2.5, 3.0):
        out += [expo(t), SymbolicOrder(t, Fraction(1)), SymbolicOrder(t, Fraction(2), Fraction(1))]
    out += [SymbolicOrder(0.0, Fraction(5), Fraction(3)), SymbolicOrder(2.0, Fraction(1, 3))]
    out += [poly(Fraction(3, 2), 1), poly(Fraction(1, 3)), poly(Fraction(7, 4), 2), poly(4)]
    return out


def test_symbolic_total_and_transitive_on_catalog():
    cat = _catalog50()
    assert len(cat) == 50
    rel = {(i, j): compare_symbolic(x, y) for i, x in enumerate(cat) for j, y in enumerate(cat)}
    for (i, j), r in rel.items():
        assert r in (EQ, LT, GT)
        assert rel[j, i] is r.flipped()
    for i, j, k in itertools.product(range(50), repeat=3):
        if rel[i, j] is LT and rel[j, k] is LT:
            assert rel[i, k] is LT
        if rel[i, j] is EQ and rel[j, k] is EQ:
            assert rel[i, k] is EQ


def test_sentinel_placement():
    infp = SymbolicOrder(sentinel=Sentinel.INF_P)
    assert compare_symbolic(poly(0, 5), infp) is LT
    assert compare_symbolic(poly(Fraction(1, 100)), infp) is GT
    assert compare_symbolic(poly(50), SymbolicOrder(sentinel=Sentinel.SUP_P)) is LT
    assert compare_symbolic(expo(1e-3), SymbolicOrder(sentinel=Sentinel.INF_E)) is GT
    assert compare_symbolic(expo(1e6), SymbolicOrder(sentinel=Sentinel.SUP_E)) is LT


@pytest.mark.parametrize("o", _catalog50())
def test_symbolic_string_round_trip(o):
    assert compare_symbolic(SymbolicOrder.parse(str(o)), o) is EQ


def test_abstract_has_no_generator():
    with pytest.raises(ValueError):
        SymbolicOrder(sentinel=Sentinel.SUP_P).generator(np.arange(1, 5))


# --- projections and classification ---------------------------------------------

def test_projection_examples():
    assert abs(project_onto_family(seq(lambda n: 2.0 ** n, 200), Family.EXPONENTIAL) - math.log(2)) < 0.01
    assert abs(project_onto_family(seq(lambda n: n ** 3, 2000), Family.POLYNOMIAL) - 3.0) < 0.05
    assert project_onto_family(seq(lambda n: n ** 3, 2000), Family.EXPONENTIAL) == 0


def test_projection_custom_base():
    base = seq(lambda n: np.log(n + 1), 2000)
    assert abs(project_onto_family(seq(lambda n: np.log(n + 1) ** 2, 2000), base) - 2) < 0.05


@given(st.sampled_from([0, Fraction(1, 2), 1, 2, 3]), st.sampled_from([0, 1, 2]))
def test_poly_bounded_projects_to_zero_exponentially(a, b):
    s = GrowthSequence(poly(a, b).generator(np.arange(1, 3001)))
    assert project_onto_family(s, Family.EXPONENTIAL) == 0


@given(st.floats(0.01, 2.0))
def test_exponential_rate_recovered(t):
    N = int(min(600, 300 / t))
    s = GrowthSequence(expo(t).generator(np.arange(1, N + 1)))
    got = project_onto_family(s, Family.EXPONENTIAL)
    assert got > 0 and abs(got - t) <= 0.05 * t


def test_classify_examples():
    cat = [ZERO, poly(0, 1), poly(1), poly(2)]
    c, _ = classify_sequence(seq(lambda n: 5 * n, 1000), cat)
    assert c == poly(1)
    c, res = classify_sequence(seq(lambda n: 7 * np.ones_like(n), 1000))
    assert c.is_zero and res < 1e-12
    c, res = classify_sequence(seq(lambda n: n * np.log(n + 1), 10000), [poly(1), poly(2)])
    assert c == UNRESOLVED and res > 0


def test_classify_requires_catalog():
    with pytest.raises(ValueError):
        classify_sequence(seq(lambda n: n, 100), [])


def test_default_catalog_members_classify_to_themselves():
    n = np.arange(1, 5001)
    for o in DEFAULT_CATALOG:
        c, _ = classify_sequence(GrowthSequence(o.generator(n)))
        assert c == o or (c.is_zero and o.is_zero)


def test_pointwise_max():
    m = pointwise_max([seq(lambda n: n, 10), seq(lambda n: 5 * np.ones_like(n), 12)])
    assert m.window == 10 and list(m.values[:6]) == [5, 5, 5, 5, 5, 6]
