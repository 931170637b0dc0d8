import json
import math

import numpy as np
import pytest

from ordgrowth.entropy_report import entropy_numbers, entropy_profile, fit_class, report_json
from ordgrowth.estimators import arc_cover, itinerary_upper_bound
from ordgrowth.growth_order import (UNRESOLVED, GrowthSequence, OrderRelation, Sentinel, SymbolicOrder,
                                    compare_symbolic, poly)
from ordgrowth.systems import GOLDEN, denjoy, full_shift, morse_smale_circle, rotation, torus_linear, twist_annulus

LINEAR = poly(1)
SUP_E = SymbolicOrder(sentinel=Sentinel.SUP_E)


@pytest.fixture(scope="module")
def circle_numbers():
    return {
        "rotation": entropy_numbers(rotation(GOLDEN), [0.2, 0.1, 0.05], 200, with_profiles=True),
        "morse_smale": entropy_numbers(morse_smale_circle(0.05), [0.2, 0.1, 0.05], 200, with_profiles=True),
        "denjoy": entropy_numbers(denjoy(GOLDEN, 2.0, 2000)[0], [0.2, 0.1, 0.05], 200, with_profiles=True),
    }


def test_rotation_profile_is_zero():
    p = entropy_profile(rotation(GOLDEN), [0.2, 0.1, 0.05], 500)
    assert p.stable_class.is_zero and p.h == 0 and p.h_pol == 0


def test_shift_profile_exponential():
    p = entropy_profile(full_shift(2, 14), [2 ** -2, 2 ** -3, 2 ** -4], 10)
    assert p.stabilized
    assert abs(p.stable_class.exp_rate - math.log(2)) <= 0.05 * math.log(2)
    assert abs(p.h - math.log(2)) <= 0.05 * math.log(2)


def test_twist_strip_profile_linear():
    # a thin strip of the annulus keeps the sample small; the class does not depend on the strip
    p = entropy_profile(twist_annulus("identity", (0.0, 0.05)), [0.4, 0.2, 0.1], 40)
    assert compare_symbolic(p.stable_class, LINEAR) is OrderRelation.EQUIVALENT


def test_circle_trichotomy(circle_numbers):
    expected = {"rotation": ("0", "0"), "morse_smale": ("0", "[n]"), "denjoy": ("[n]", "[n]")}
    for name, ((first, second), _) in circle_numbers.items():
        assert (first.pretty(), second.pretty()) == expected[name], name


def test_restricted_never_exceeds_full(circle_numbers):
    for (first, second), _ in circle_numbers.values():
        assert compare_symbolic(first, second) is not OrderRelation.GREATER


def test_wandering_point_forces_linear_lower_bound(circle_numbers):
    # Morse-Smale has wandering samples; Denjoy has its wandering intervals
    for name in ("morse_smale", "denjoy"):
        (_, second), _ = circle_numbers[name]
        assert compare_symbolic(second, LINEAR) is not OrderRelation.LESS


def test_denjoy_omega_projection(circle_numbers):
    _, (p_omega, _) = circle_numbers["denjoy"]
    assert 0.8 <= p_omega.h_pol <= 1.2


def test_classes_below_exponential_and_itinerary_rate(circle_numbers):
    cover = arc_cover(20, 0.0)
    s = morse_smale_circle(0.05)
    n = 30
    bound = itinerary_upper_bound(s, cover["centers"], cover["radii"][0], n, points=s.sampler(0.002, n))
    for _, profiles in circle_numbers.values():
        for p in profiles:
            assert compare_symbolic(p.stable_class, SUP_E) is OrderRelation.LESS
            assert p.h <= math.log(bound)


def test_fit_class_adds_exponential():
    c = GrowthSequence.from_function(lambda n: 3.0 ** n, 60)
    cls, _ = fit_class(c)
    assert cls != UNRESOLVED and abs(cls.exp_rate - math.log(3)) < 0.01


def test_validation():
    with pytest.raises(ValueError):
        entropy_profile(rotation(), [0.2, 0.1], 10)
    with pytest.raises(ValueError):
        entropy_profile(rotation(), [0.1, 0.2, 0.05], 10)
    with pytest.raises(ValueError):
        entropy_numbers(torus_linear(np.array([[1, 1], [0, 1]])), [0.2, 0.1, 0.05], 10)


def test_report_json_round_trip():
    p = entropy_profile(rotation(GOLDEN), [0.2, 0.1, 0.05], 50)
    doc = json.loads(report_json(p, (p.stable_class, p.stable_class)))
    assert doc["entropy_numbers"] == ["0", "0"]
    assert doc["profile"]["epsilons"] == [0.2, 0.1, 0.05]
    assert len(doc["profile"]["curves"][0]) == 50
