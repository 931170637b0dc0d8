import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ordgrowth.systems import (GOLDEN, BudgetError, conjugated_rotation, construct, denjoy,
                               full_shift, morse_smale_circle, rotation, sample_space,
                               shift_fidelity, step_n, torus_linear, twist_annulus)


def invertible_catalog():
    return [rotation(), morse_smale_circle(0.05), conjugated_rotation()[0],
            twist_annulus(), torus_linear(np.array([[1, 1], [0, 1]])),
            torus_linear(np.array([[2, 1], [1, 1]]))]


def catalog():
    return invertible_catalog() + [full_shift(2, 16), denjoy(GOLDEN, 2.0, 300)[0]]


# --- construction ---------------------------------------------------------------

def test_shift_metric_first_disagreement():
    s = full_shift(2, 16)
    x = np.zeros((1, 16), dtype=np.uint8)
    for j in range(16):
        y = x.copy()
        y[0, j] = 1
        assert s.metric(x, y)[0] == 2.0 ** -j
    assert s.metric(x, x)[0] == 0


def test_rotation_is_isometry():
    s = rotation(GOLDEN)
    rng = np.random.default_rng(1)
    x, y = rng.random((200, 1)), rng.random((200, 1))
    assert np.allclose(s.metric(s.step(x), s.step(y)), s.metric(x, y), atol=1e-12)


def test_morse_smale_fixed_points():
    s = morse_smale_circle(0.05)
    grid = np.arange(200000)[:, None] / 200000.0
    d = s.metric(s.step(grid), grid)
    fixed = grid[d < 1e-12, 0]
    assert sorted(fixed.tolist()) == [0.0, 0.5]
    omega = np.mod(s.omega_sampler(0.01)[:, 0], 1.0)
    assert sorted(omega.tolist()) == [0.0, 0.5]


@pytest.mark.parametrize("kind,params", [
    ("denjoy", {"alpha": 0.5}),
    ("twist", {"profile": lambda t: 1 - t}),
    ("torus", {"A": [[2, 0], [0, 1]]}),
    ("morsesmale", {"amplitude": 0.2}),
    ("fullshift", {"k": 1}),
    ("denjoy", {"depth": 50}),
    ("nonsense", {}),
])
def test_invalid_parameters_rejected(kind, params):
    with pytest.raises(ValueError):
        construct(kind, **params)


# --- step_n and sampling --------------------------------------------------------

def test_step_n_examples():
    assert step_n(rotation(0.25), np.array([0.0]), 4)[0] == pytest.approx(0.0, abs=1e-12)
    s = full_shift(2, 16)
    w = np.random.default_rng(0).integers(0, 2, (1, 16)).astype(np.uint8)
    assert list(step_n(s, w, 3)[0, :13]) == list(w[0, 3:])
    t = torus_linear(np.array([[1, 1], [0, 1]]))
    got = step_n(t, np.array([0.3, 0.5]), 2)
    assert np.mod(got, 1.0) == pytest.approx([(0.3 + 2 * 0.5) % 1, 0.5])
    assert np.array_equal(step_n(rotation(), np.array([0.3]), 0), np.array([0.3]))


def test_step_n_horizon():
    with pytest.raises(ValueError):
        step_n(rotation(), np.array([0.1]), 10, horizon=5)


def test_sample_examples():
    assert len(sample_space(rotation(), 0.1)) == 10
    words = sample_space(full_shift(2, 6), 2.0 ** -6)
    assert len({tuple(w) for w in words}) == 64
    assert sample_space(twist_annulus(), 0.1).shape == (110, 2)


def test_budget_error(monkeypatch):
    monkeypatch.setenv("OGE_MEM_BUDGET", "1000")
    with pytest.raises(BudgetError):
        sample_space(torus_linear(np.array([[1, 1], [0, 1]])), 0.01, horizon=10)


@pytest.mark.parametrize("spec", catalog(), ids=lambda s: s.name)
def test_metric_axioms_on_samples(spec):
    pts = spec.sampler(0.05)
    rng = np.random.default_rng(3)
    i, j, k = (rng.integers(0, len(pts), 300) for _ in range(3))
    x, y, z = pts[i], pts[j], pts[k]
    dxy, dyx = spec.metric(x, y), spec.metric(y, x)
    assert np.allclose(dxy, dyx)
    assert np.all(spec.metric(x, x) == 0)
    assert np.all(dxy <= spec.metric(x, z) + spec.metric(z, y) + 1e-12)


@pytest.mark.parametrize("spec", [s for s in catalog() if s.name != "FullShift"], ids=lambda s: s.name)
def test_sampler_is_dense(spec):
    delta = 0.05
    pts = spec.sampler(delta)
    fine = spec.sampler(delta / 4)
    worst = max(spec.metric(np.repeat(f[None], len(pts), 0), pts).min() for f in fine[::7])
    assert worst <= delta + 1e-9


@pytest.mark.parametrize("spec", invertible_catalog(), ids=lambda s: s.name)
def test_inverse_undoes_step(spec):
    pts = spec.sampler(0.05)
    assert np.max(spec.metric(spec.inverse(spec.step(pts)), pts)) < 1e-9
    assert np.max(spec.metric(spec.step(spec.inverse(pts)), pts)) < 1e-9


# --- Denjoy -------------------------------------------------------------------

def test_denjoy_rotation_number_and_length():
    spec, D = denjoy(GOLDEN, 2.0, 2000)
    assert abs(D.rotation_number(20000) - GOLDEN) < 1e-3
    assert D.lengths.sum() < 1


def test_denjoy_maps_intervals_onto_successors():
    _, D = denjoy(GOLDEN, 2.0, 200)
    j = np.arange(0, 2 * 200)  # interval -200 .. 199
    mid = (D.starts[j] + D.ends[j]) / 2
    img = D(mid)
    target = (D.starts[j + 1] + D.ends[j + 1]) / 2
    assert np.allclose(np.mod(img - target + 0.5, 1) - 0.5, 0, atol=1e-9)


@given(st.floats(0.0, 1.0, exclude_max=True))
def test_denjoy_is_monotone_degree_one(x):
    _, D = denjoy(GOLDEN, 2.0, 150)
    xs = np.mod(x + np.linspace(0, 1, 50, endpoint=False), 1.0)
    d = D.displacement(np.sort(xs))
    lift = np.sort(xs) + d
    assert np.all(np.diff(lift) >= -1e-12)


# --- conjugacy and powers -------------------------------------------------------

def test_conjugated_rotation_is_conjugate():
    spec, h, lip = conjugated_rotation(GOLDEN, 0.5)
    x = np.linspace(0, 1, 101)[:, None]
    lhs = spec.step(h(x))
    rhs = h(x + GOLDEN)
    assert np.max(spec.metric(lhs, rhs)) < 1e-9
    assert lip >= 1


@given(st.integers(1, 4))
def test_power_matches_step_n(k):
    s = morse_smale_circle(0.05)
    x = np.linspace(0, 1, 17)[:, None]
    assert np.allclose(s.power(k).step(x), step_n(s, x, k))


def test_shift_fidelity():
    assert shift_fidelity(16, 2 ** -3) == 13
    assert shift_fidelity(14, 2 ** -4) == 10


def test_twist_params_record_alpha_range():
    s = twist_annulus("identity", (0.0, 0.1))
    assert s.params["alpha_a"] == 0 and math.isclose(s.params["alpha_b"], 0.1)
