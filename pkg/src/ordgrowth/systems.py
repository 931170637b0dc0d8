"""Example dynamical systems as sampled metric spaces with a forward map.

Points are always 2-D arrays of shape ``(m, dim)``; ``step``, ``inverse`` and
``metric`` act row-wise.  Circle coordinates are kept in ``[-1/2, 1/2)`` so
that points very close to 0 keep full relative precision.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_MEM_BUDGET = 1_500_000_000  # bytes


class BudgetError(ValueError):
    pass


def mem_budget() -> int:
    return int(float(os.environ.get("OGE_MEM_BUDGET", DEFAULT_MEM_BUDGET)))


def wrap(x):
    """Circle coordinate in [-1/2, 1/2)."""
    return x - np.floor(x + 0.5)


def circle_dist(x, y):
    return np.abs(wrap(x - y))


def _circle_embed(x):
    c = np.mod(x, 1.0)
    c[c >= 1.0] = 0.0
    return c


@dataclass(frozen=True)
class DynamicalSystemSpec:
    name: str
    dim: int
    step: Callable
    metric: Callable
    sampler: Callable
    inverse: Callable | None = None
    omega_sampler: Callable | None = None
    params: dict = field(default_factory=dict)
    # 1-Lipschitz map into a Chebyshev box used only to find candidate pairs
    embed: Callable | None = None
    boxsize: tuple | None = None
    dtype: type = float
    # default sample mesh for a separation scale eps
    default_delta: Callable = field(default=lambda eps: eps / 4.0)
    # samples of the system's wandering part, when known
    wandering_sampler: Callable | None = None
    # declared reliable iteration horizon (None = unlimited)
    fidelity_horizon: int | None = None
    power_of: int = 1
    # optional fast-path description of the metric for compiled kernels:
    # "prefix" (shift words) or a tuple of per-coordinate circle flags for a max metric
    metric_kind: object = None

    def describe(self) -> dict:
        return {"system": self.name, **_jsonable(self.params)}

    def power(self, k: int) -> "DynamicalSystemSpec":
        """The k-th iterate as a system on the same space."""
        if k < 1:
            raise ValueError("power must be >= 1")
        base = self.step

        def step_k(x):
            for _ in range(k):
                x = base(x)
            return x

        inv = None
        if self.inverse is not None:
            binv = self.inverse

            def inv(x):
                for _ in range(k):
                    x = binv(x)
                return x

        fh = None if self.fidelity_horizon is None else self.fidelity_horizon // k
        return replace(self, name=f"{self.name}^{k}", step=step_k, inverse=inv,
                       power_of=self.power_of * k, fidelity_horizon=fh,
                       params={**self.params, "power": self.power_of * k})

    def inverse_spec(self) -> "DynamicalSystemSpec":
        if self.inverse is None:
            raise ValueError(f"{self.name} has no inverse")
        return replace(self, name=f"{self.name}^-1", step=self.inverse, inverse=self.step,
                       params={**self.params, "inverse": True})

    def sample_size(self, delta: float, horizon: int | None = None) -> int:
        return len(self.sampler(delta, horizon))


def _jsonable(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, np.ndarray):
            v = v.tolist()
        elif callable(v):
            v = getattr(v, "__name__", "callable")
        elif hasattr(v, "to_json"):
            v = v.to_json()
        out[k] = v
    return out


def step_n(spec: DynamicalSystemSpec, x, n: int, horizon: int | None = None):
    """n-fold composition of ``spec.step``; ``x`` may be one point or a batch."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if horizon is not None and n > horizon:
        raise ValueError(f"n={n} exceeds configured horizon {horizon}")
    arr = np.asarray(x, dtype=spec.dtype)
    single = arr.ndim == 1
    pts = arr.reshape(1, -1) if single else arr
    for _ in range(n):
        pts = spec.step(pts)
        if spec.dtype is float and not np.all(np.isfinite(pts)):
            raise OverflowError(f"orbit left the representable range after {_ + 1} steps")
    return pts[0] if single else pts


def check_budget(n_points: int, dim: int, horizon: int | None, itemsize: int = 8):
    need = n_points * dim * itemsize * ((horizon or 0) + 1)
    return need <= mem_budget(), need


def sample_space(spec: DynamicalSystemSpec, delta: float, horizon: int | None = None):
    """Deterministic delta-dense sample of the phase space."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    pts = spec.sampler(delta, horizon)
    ok, need = check_budget(len(pts), spec.dim, horizon, np.dtype(spec.dtype).itemsize)
    if not ok:
        d = delta
        while True:
            d *= 1.25
            p = spec.sampler(d, horizon)
            if check_budget(len(p), spec.dim, horizon, np.dtype(spec.dtype).itemsize)[0] or d > 1:
                break
        raise BudgetError(
            f"sample of {len(pts)} points x horizon {horizon} needs {need} bytes, over the "
            f"budget {mem_budget()} (OGE_MEM_BUDGET); minimal admissible delta ~ {d:.4g}")
    return pts


# ---------------------------------------------------------------------------
# full shift
# ---------------------------------------------------------------------------

def full_shift(k: int = 2, word_len: int = 16) -> DynamicalSystemSpec:
    if k < 2:
        raise ValueError("alphabet size k must be >= 2")
    if not 1 <= word_len <= 52:
        raise ValueError("word_len must lie in 1..52")
    L = word_len
    weights = float(k) ** -np.arange(1, L + 1)

    def step(w):
        out = np.zeros_like(w)
        out[:, :-1] = w[:, 1:]
        return out

    def metric(x, y):
        neq = x != y
        j = np.argmax(neq, axis=1)
        return np.where(neq.any(axis=1), 2.0 ** -j.astype(float), 0.0)

    def sampler(delta, horizon=None):
        ell = min(L, max(0, math.ceil(-math.log2(delta)))) if delta < 1 else 0
        if k ** ell > 50_000_000:
            raise BudgetError(f"{k}^{ell} words exceed the enumeration cap; use a larger delta")
        idx = np.arange(k ** ell)
        words = np.zeros((idx.size, L), dtype=np.uint8)
        for j in range(ell):
            words[:, j] = (idx // k ** (ell - 1 - j)) % k
        return words

    def embed(w):
        return (w.astype(float) @ weights)[:, None]

    return DynamicalSystemSpec(
        name="FullShift", dim=L, step=step, metric=metric, sampler=sampler,
        params={"k": k, "word_len": L}, embed=embed, boxsize=None, dtype=np.uint8, metric_kind="prefix",
        default_delta=lambda eps: 2.0 ** -L,
        fidelity_horizon=None,
    )


def shift_fidelity(word_len: int, eps: float) -> int:
    """Largest n for which truncated-word distances d_n at scale eps are exact."""
    return word_len - math.ceil(math.log2(1.0 / eps))


# ---------------------------------------------------------------------------
# circle maps
# ---------------------------------------------------------------------------

def _circle_grid(delta):
    m = max(1, math.ceil(1.0 / delta - 1e-9))
    return wrap(np.arange(m) / m)


def _circle_metric(x, y):
    return circle_dist(x[:, 0], y[:, 0])


def _circle_embed_pts(x):
    return _circle_embed(x[:, :1] + 0.5)


def rotation(alpha: float = GOLDEN) -> DynamicalSystemSpec:
    def step(x):
        return wrap(x + alpha)

    def inverse(x):
        return wrap(x - alpha)

    def sampler(delta, horizon=None):
        return _circle_grid(delta)[:, None]

    return DynamicalSystemSpec(
        name="Rotation", dim=1, step=step, inverse=inverse, metric=_circle_metric,
        sampler=sampler, omega_sampler=sampler, params={"alpha": alpha},
        embed=_circle_embed_pts, boxsize=(1.0,), metric_kind=(True,),
    )


def morse_smale_circle(amplitude: float = 0.05) -> DynamicalSystemSpec:
    """x -> x + amplitude*sin(2 pi x): repeller at 0, attractor at 1/2."""
    if not 0 < amplitude < 1 / (2 * math.pi):
        raise ValueError("amplitude must lie in (0, 1/(2 pi))")
    a = amplitude

    def fwd(x):
        return x + a * np.sin(2 * np.pi * x)

    def step(x):
        return wrap(fwd(x))

    def inverse(y):
        y = wrap(y)
        x = y.copy()
        for _ in range(40):
            x = x - (fwd(x) - y) / (1 + 2 * np.pi * a * np.cos(2 * np.pi * x))
        return wrap(x)

    # fundamental domain of the wandering flow on the positive side
    c0 = 0.2
    c1 = float(fwd(np.array(c0)))

    def wandering(delta, horizon=None):
        k = max(2, math.ceil((c1 - c0) / delta))
        z = c0 + (c1 - c0) * np.arange(k) / k
        seeds = np.concatenate([z, -z])[:, None]
        out = [seeds]
        cur = seeds
        for _ in range(horizon or 0):
            cur = inverse(cur)
            out.append(cur)
        return np.concatenate(out)

    def sampler(delta, horizon=None):
        pts = _circle_grid(delta)[:, None]
        if horizon:
            pts = np.concatenate([pts, wandering(delta, horizon)])
        return pts

    def omega(delta, horizon=None):
        return np.array([[0.0], [0.5]])

    return DynamicalSystemSpec(
        name="MorseSmaleCircle", dim=1, step=step, inverse=inverse, metric=_circle_metric,
        sampler=sampler, omega_sampler=omega, wandering_sampler=wandering,
        params={"amplitude": a}, embed=_circle_embed_pts, boxsize=(1.0,), metric_kind=(True,),
    )


def conjugated_rotation(alpha: float = GOLDEN, strength: float = 0.5) -> tuple:
    """Rotation conjugated by h(x) = x + strength*sin(2 pi x)/(2 pi).

    Returns ``(spec, h, lip)`` where ``lip`` bounds the Lipschitz constants
    of ``h`` and its inverse.
    """
    if not 0 <= strength < 1:
        raise ValueError("strength must lie in [0, 1)")
    c = strength / (2 * np.pi)

    def h(x):
        return wrap(x + c * np.sin(2 * np.pi * x))

    def h_inv(y):
        y = wrap(y)
        x = y.copy()
        for _ in range(50):
            x = x - (x + c * np.sin(2 * np.pi * x) - y) / (1 + strength * np.cos(2 * np.pi * x))
        return wrap(x)

    def step(x):
        return h(h_inv(x) + alpha)

    def inverse(x):
        return h(h_inv(x) - alpha)

    def sampler(delta, horizon=None):
        return _circle_grid(delta)[:, None]

    spec = DynamicalSystemSpec(
        name="ConjugatedRotation", dim=1, step=step, inverse=inverse, metric=_circle_metric,
        sampler=sampler, omega_sampler=sampler, params={"alpha": alpha, "strength": strength},
        embed=_circle_embed_pts, boxsize=(1.0,), metric_kind=(True,),
    )
    lip = max(1 + strength, 1 / (1 - strength))
    return spec, h, lip


class DenjoyMap:
    """Piecewise-affine circle map with wandering intervals on the orbit of 0.

    Interval ``j`` (``|j| <= depth``) has length proportional to
    ``(|j|+2)^-tail_exponent``; total inserted length is ``total``.  Interval
    ``j`` is mapped affinely onto interval ``j+1``; interval ``depth`` is
    collapsed to a point.
    """

    def __init__(self, alpha: float, tail_exponent: float = 2.0, depth: int = 2000,
                 total: float = 0.5):
        self.alpha, self.tail_exponent, self.depth = alpha, tail_exponent, depth
        J = depth
        self.idx = np.arange(-J, J + 2)  # includes the collapse target J+1
        theta = np.mod(self.idx * alpha, 1.0)
        raw = (np.abs(self.idx[:-1]) + 2.0) ** -tail_exponent
        self.lengths = np.append(total * raw / raw.sum(), 0.0)
        self.total = total
        order = np.argsort(theta[:-1], kind="stable")
        cum = np.zeros(theta.size - 1)
        cum[order] = np.concatenate([[0.0], np.cumsum(self.lengths[:-1][order])[:-1]])
        starts = (1 - total) * theta[:-1] + cum
        # position of the collapse point: theta_{J+1} is not a gap
        tJ1 = theta[-1]
        below = np.sum(self.lengths[:-1][theta[:-1] < tJ1])
        self.starts = np.append(starts, (1 - total) * tJ1 + below)
        self.ends = self.starts + self.lengths
        # knots: interval endpoints and their images
        src = np.concatenate([self.starts[:-1], self.ends[:-1]])
        img = np.concatenate([self.starts[1:], self.ends[1:]])
        o = np.argsort(src, kind="stable")
        src, img = src[o], img[o]
        lift = src + np.mod(img - src, 1.0)
        self._xp = np.concatenate([[src[-1] - 1.0], src, [src[0] + 1.0]])
        self._fp = np.concatenate([[lift[-1] - 1.0], lift, [lift[0] + 1.0]])

    def __call__(self, x):
        x = np.mod(x, 1.0)
        y = np.interp(x, self._xp, self._fp)
        y = np.mod(y, 1.0)
        y[y >= 1.0] = 0.0
        return y

    def displacement(self, x):
        """Lifted displacement F(x) - x in [0, 1)."""
        x = np.mod(x, 1.0)
        return np.interp(x, self._xp, self._fp) - x

    def endpoints(self, J: int | None = None) -> np.ndarray:
        """Endpoints of intervals with |j| <= J (points of the nonwandering set)."""
        J = self.depth if J is None else min(J, self.depth)
        sel = np.abs(self.idx[:-1]) <= J
        return np.concatenate([self.starts[:-1][sel], self.ends[:-1][sel]])

    def rotation_number(self, n_iter: int = 20000, x0: float = 0.123) -> float:
        x = np.array([x0])
        total = 0.0
        for _ in range(n_iter):
            total += float(self.displacement(x)[0])
            x = self(x)
        return total / n_iter


def _is_rational_like(alpha: float, max_den: int = 1000, tol: float = 1e-12) -> bool:
    from fractions import Fraction
    fr = Fraction(alpha).limit_denominator(max_den)
    return abs(float(fr) - alpha) < tol


def denjoy(alpha: float = GOLDEN, tail_exponent: float = 2.0, depth: int = 2000) -> DynamicalSystemSpec:
    if _is_rational_like(alpha):
        raise ValueError("Denjoy construction needs an irrational rotation number")
    if depth < 100:
        raise ValueError("depth must be >= 100")
    if tail_exponent <= 1:
        raise ValueError("tail_exponent must exceed 1 for summable interval lengths")
    D = DenjoyMap(alpha, tail_exponent, depth)

    def step(x):
        return D(x)

    def omega(delta, horizon=None):
        J = min(D.depth, max(2 * (horizon or 0), 10))
        while True:
            sel = np.abs(D.idx[:-1]) <= J
            s, e = D.starts[:-1][sel], D.ends[:-1][sel]
            o = np.argsort(s)
            # arcs of the nonwandering set run from one interval's end to the next start
            arcs = np.mod(np.roll(s[o], -1) - e[o], 1.0)
            if J >= D.depth or np.max(arcs) <= delta:
                break
            J = min(D.depth, 2 * J)
        return D.endpoints(J)[:, None]

    def sampler(delta, horizon=None):
        grid = np.mod(_circle_grid(delta), 1.0)
        return np.concatenate([grid, omega(delta, horizon)[:, 0]])[:, None]

    def embed(x):
        return _circle_embed(x[:, :1])

    return DynamicalSystemSpec(
        name="Denjoy", dim=1, step=step, metric=_circle_metric, sampler=sampler,
        omega_sampler=omega, params={"alpha": alpha, "tail_exponent": tail_exponent, "depth": depth},
        embed=embed, boxsize=(1.0,), metric_kind=(True,), fidelity_horizon=depth // 10,
    ), D


# ---------------------------------------------------------------------------
# annulus and torus
# ---------------------------------------------------------------------------

PROFILES = {
    "identity": lambda t: t,
    "square": lambda t: t * t,
}


def _annulus_embed(p):
    return np.column_stack([_circle_embed(p[:, 0]), p[:, 1]])


def twist_annulus(profile="identity", t_range=(0.0, 1.0)) -> DynamicalSystemSpec:
    """f(s, t) = (s + alpha(t), t) on the annulus with the max metric."""
    fn = PROFILES[profile] if isinstance(profile, str) else profile
    a, b = t_range
    if not 0 <= a < b <= 1:
        raise ValueError("t_range must satisfy 0 <= a < b <= 1")
    tt = np.linspace(0, 1, 1001)
    vals = np.asarray(fn(tt), dtype=float)
    if np.any(np.diff(vals) < 0) or vals[-1] <= vals[0]:
        raise ValueError("twist profile must be increasing")

    def step(p):
        return np.column_stack([wrap(p[:, 0] + fn(p[:, 1])), p[:, 1]])

    def inverse(p):
        return np.column_stack([wrap(p[:, 0] - fn(p[:, 1])), p[:, 1]])

    def metric(p, q):
        return np.maximum(circle_dist(p[:, 0], q[:, 0]), np.abs(p[:, 1] - q[:, 1]))

    def sampler(delta, horizon=None):
        s = _circle_grid(delta)
        # rows must resolve the t-extent 2 eps / n of a dynamical ball, eps ~ 4 delta
        dt = delta if not horizon else min(delta, delta / (2.0 * horizon))
        m = max(1, math.ceil((b - a) / dt - 1e-9))
        t = a + (b - a) * np.arange(m + 1) / m
        S, T = np.meshgrid(s, t)
        return np.column_stack([S.ravel(), T.ravel()])

    name = profile if isinstance(profile, str) else getattr(profile, "__name__", "custom")
    return DynamicalSystemSpec(
        name="TwistAnnulus", dim=2, step=step, inverse=inverse, metric=metric,
        sampler=sampler, omega_sampler=sampler,
        params={"profile": name, "t_range": [a, b],
                "alpha_a": float(fn(np.array(a))), "alpha_b": float(fn(np.array(b)))},
        embed=_annulus_embed, boxsize=(1.0, 4.0), metric_kind=(True, False),
    )


def _torus_metric(p, q):
    return np.maximum(circle_dist(p[:, 0], q[:, 0]), circle_dist(p[:, 1], q[:, 1]))


def _torus_embed(p):
    return np.column_stack([_circle_embed(p[:, 0]), _circle_embed(p[:, 1])])


def _torus_grid(delta):
    g = _circle_grid(delta)
    X, Y = np.meshgrid(g, g)
    return np.column_stack([X.ravel(), Y.ravel()])


def torus_linear(A) -> DynamicalSystemSpec:
    A = np.asarray(A)
    if A.shape != (2, 2) or not np.issubdtype(A.dtype, np.integer):
        raise ValueError("TorusLinear needs a 2x2 integer matrix")
    det = int(round(np.linalg.det(A)))
    if abs(det) != 1:
        raise ValueError("TorusLinear needs |det A| = 1 to be a homeomorphism")
    Ainv = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]]) * det
    Af, Aif = A.astype(float), Ainv.astype(float)

    def step(p):
        return wrap(p @ Af.T)

    def inverse(p):
        return wrap(p @ Aif.T)

    def sampler(delta, horizon=None):
        return _torus_grid(delta)

    return DynamicalSystemSpec(
        name="TorusLinear", dim=2, step=step, inverse=inverse, metric=_torus_metric,
        sampler=sampler, params={"A": A.tolist()}, embed=_torus_embed, boxsize=(1.0, 1.0), metric_kind=(True, True),
    )


def cylindrical_cascade(params) -> DynamicalSystemSpec:
    """Skew product (x, y) -> (x + alpha, y + sum_k b_k cos(2 pi q_k (x + alpha))) on T^2."""
    alpha = float(params.alpha_float)
    # terms with q_k >= 2^40 lose their phase in double precision; their amplitude is below 2^-40
    keep = [k for k, q in enumerate(params.convergents_q[: params.K]) if q < 2 ** 40]
    b = np.array([float(params.amplitudes[k]) for k in keep])
    q = np.array([float(params.convergents_q[k]) for k in keep])

    def phi(x):
        return (b[None, :] * np.cos(2 * np.pi * q[None, :] * x[:, None])).sum(axis=1)

    def step(p):
        x = wrap(p[:, 0] + alpha)
        return np.column_stack([x, wrap(p[:, 1] + phi(x))])

    def inverse(p):
        x = p[:, 0]
        return np.column_stack([wrap(x - alpha), wrap(p[:, 1] - phi(x))])

    def sampler(delta, horizon=None):
        return _torus_grid(delta)

    return DynamicalSystemSpec(
        name="CylindricalCascade", dim=2, step=step, inverse=inverse, metric=_torus_metric,
        sampler=sampler, omega_sampler=sampler, params={"cascade": params.to_json()},
        embed=_torus_embed, boxsize=(1.0, 1.0), metric_kind=(True, True),
    )


def construct(kind: str, **params) -> DynamicalSystemSpec:
    """Catalog entry point by kind name."""
    key = kind.replace("-", "").replace("_", "").lower()
    if key in ("fullshift", "shift"):
        return full_shift(int(params.get("k", 2)), int(params.get("word_len", 16)))
    if key == "rotation":
        return rotation(float(params.get("alpha", GOLDEN)))
    if key in ("morsesmalecircle", "morsesmale"):
        return morse_smale_circle(float(params.get("amplitude", 0.05)))
    if key == "denjoy":
        return denjoy(float(params.get("alpha", GOLDEN)), float(params.get("tail_exponent", 2.0)),
                      int(params.get("depth", 2000)))[0]
    if key in ("twistannulus", "twist"):
        return twist_annulus(params.get("profile", "identity"),
                             tuple(params.get("t_range", (0.0, 1.0))))
    if key in ("toruslinear", "torus"):
        return torus_linear(np.array(params.get("A", [[1, 1], [0, 1]]), dtype=int))
    if key in ("cylindricalcascade", "cascade"):
        return cylindrical_cascade(params["params"])
    raise ValueError(f"unknown system kind {kind!r}")
