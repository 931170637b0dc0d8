"""Per-scale growth curves aggregated into an entropy profile."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .estimators import curve_from_sampler, default_schedule
from .growth_order import (DEFAULT_CATALOG, UNRESOLVED, Family, GrowthSequence, OrderRelation,
                           SymbolicOrder, classify_sequence, compare_sequences, compare_symbolic,
                           expo, project_onto_family)
from .systems import DynamicalSystemSpec, sample_space

EXP_CLASS_MIN_RATE = 0.05


@dataclass
class EntropyProfile:
    epsilons: list
    curves: list
    fitted: list          # SymbolicOrder or UNRESOLVED per eps
    residuals: list
    h: float
    h_pol: float
    stable_class: object  # SymbolicOrder or UNRESOLVED
    stabilized: bool
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "epsilons": list(self.epsilons),
            "fitted": [str(c) for c in self.fitted],
            "residuals": [float(r) for r in self.residuals],
            "h": _finite(self.h),
            "h_pol": _finite(self.h_pol),
            "stable_class": str(self.stable_class),
            "stabilized": self.stabilized,
            "curves": [c.to_json() for c in self.curves],
            "meta": self.meta,
        }

    def summary(self) -> str:
        lines = [f"{'eps':>10}  {'s(N)':>10}  {'class':<24} residual"]
        for e, c, f, r in zip(self.epsilons, self.curves, self.fitted, self.residuals):
            lines.append(f"{e:>10.4g}  {c.values[-1]:>10.0f}  {_pretty(f):<24} {r:.3g}")
        lines.append(f"h = {self.h:.4g}   h_pol = {self.h_pol:.4g}   class = {_pretty(self.stable_class)}"
                     + ("" if self.stabilized else "   (not stabilized)"))
        return "\n".join(lines)


def _finite(x):
    return "inf" if math.isinf(x) else float(x)


def _pretty(c) -> str:
    return c.pretty() if isinstance(c, SymbolicOrder) else str(c)


def fit_class(curve: GrowthSequence, catalog=DEFAULT_CATALOG):
    """Classify against the catalog, adding exp(h n) when the curve grows exponentially."""
    h = project_onto_family(curve, Family.EXPONENTIAL)
    cat = list(catalog)
    if EXP_CLASS_MIN_RATE < h < math.inf and h * curve.window < 700:
        cat.append(expo(round(h, 4)))
    return classify_sequence(curve, cat)


def profile_from_points(spec: DynamicalSystemSpec, points, epsilons, n_max: int,
                        schedule="auto", catalog=DEFAULT_CATALOG, meta=None) -> EntropyProfile:
    pts = np.asarray(points, dtype=spec.dtype)
    return profile_from_sampler(spec, lambda H: pts, epsilons, n_max, schedule, catalog, meta)


def profile_from_sampler(spec: DynamicalSystemSpec, sample_fn, epsilons, n_max: int,
                         schedule="auto", catalog=DEFAULT_CATALOG, meta=None) -> EntropyProfile:
    eps = [float(e) for e in epsilons]
    if len(eps) < 3:
        raise ValueError("need at least 3 scales")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilons must be strictly descending")
    if schedule == "auto":
        schedule = default_schedule(n_max)
    curves, fitted, res = [], [], []
    for e in eps:
        c = curve_from_sampler(spec, sample_fn, e, n_max, schedule, meta=meta)
        cls, r = fit_class(c, catalog)
        curves.append(c)
        fitted.append(cls)
        res.append(r)
    small = curves[-1]
    h = project_onto_family(small, Family.EXPONENTIAL)
    h_pol = project_onto_family(small, Family.POLYNOMIAL)
    a, b = fitted[-2], fitted[-1]
    same = (isinstance(a, SymbolicOrder) and isinstance(b, SymbolicOrder)
            and compare_symbolic(a, b) is OrderRelation.EQUIVALENT)
    if not same and isinstance(a, SymbolicOrder) and isinstance(b, SymbolicOrder):
        # exponential fits carry a fitted rate; accept them when the curves agree
        same = (a.exp_rate > 0 and b.exp_rate > 0
                and compare_sequences(curves[-2], curves[-1]) is OrderRelation.EQUIVALENT)
    stable = b if same else UNRESOLVED
    info = {**spec.describe(), "n_max": n_max, "samples": curves[-1].meta.get("samples")}
    info.update(meta or {})
    return EntropyProfile(eps, curves, fitted, res, h, h_pol, stable, same, info)


def entropy_profile(spec: DynamicalSystemSpec, epsilons, n_max: int, delta_rule=None,
                    schedule="auto", catalog=DEFAULT_CATALOG) -> EntropyProfile:
    """Curves at every scale on one common sample, with fitted classes and projections.

    The sample mesh is ``delta_rule(min eps)`` (default: the system's own rule),
    shared by all scales so that curves are comparable across eps.
    """
    rule = delta_rule or spec.default_delta
    delta = rule(min(epsilons))
    return profile_from_sampler(spec, lambda H: sample_space(spec, delta, horizon=H), epsilons,
                                n_max, schedule, catalog, meta={"delta": delta})


def entropy_numbers(spec: DynamicalSystemSpec, epsilons, n_max: int, delta_rule=None,
                    schedule="auto", with_profiles: bool = False):
    """(class on the nonwandering samples, class on the whole space)."""
    if spec.omega_sampler is None:
        raise ValueError(f"{spec.name} has no nonwandering-set sampler; use entropy_profile instead")
    rule = delta_rule or spec.default_delta
    delta = rule(min(epsilons))
    p_omega = profile_from_sampler(spec, lambda H: spec.omega_sampler(delta, H), epsilons, n_max, schedule,
                                  meta={"delta": delta, "restricted_to": "omega"})
    p_full = entropy_profile(spec, epsilons, n_max, delta_rule, schedule)
    first, second = p_omega.stable_class, p_full.stable_class
    if isinstance(first, SymbolicOrder) and isinstance(second, SymbolicOrder):
        if compare_symbolic(first, second) is OrderRelation.GREATER:
            raise AssertionError(f"restricted class {first} exceeds full class {second}")
    if with_profiles:
        return (first, second), (p_omega, p_full)
    return first, second


def report_json(profile: EntropyProfile, numbers=None) -> str:
    doc = {"profile": profile.to_json()}
    if numbers is not None:
        doc["entropy_numbers"] = [str(x) for x in numbers]
    return json.dumps(doc, sort_keys=True, indent=1, default=_default)


def _default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)
