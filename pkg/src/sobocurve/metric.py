"""Length-weighted Sobolev metrics on curves.

The metric is G_c(h, g) = sum_k a_k(ell_c) * integral <D_s^k h, D_s^k g> ds
with coefficients a_k that are functions of the curve length ell_c.
Coefficient profiles are power laws, constants, or tabulated values with
fitted power-law tails.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .curves import (
    DiscreteCurve,
    NormKind,
    TangentField,
    curve_length,
    derivative,
    norm,
)
from .errors import ContractError
from .sampling import random_field


@dataclass(frozen=True)
class PowerLaw:
    """a(ell) = b * ell**p."""

    b: float
    p: float

    def __post_init__(self):
        if self.b < 0:
            raise ContractError(f"power-law coefficient must have b >= 0, got {self.b}")


@dataclass(frozen=True)
class Constant:
    """a(ell) = b."""

    b: float

    def __post_init__(self):
        if self.b < 0:
            raise ContractError(f"constant coefficient must have b >= 0, got {self.b}")


@dataclass(frozen=True)
class Tabulated:
    """Monotone-cubic interpolation of (knots, values) with power-law tails.

    The tails are least-squares log-log fits over the outer 25% of knots
    (at least two points each) so improper integrals of the profile can
    still be classified from its end behaviour.
    """

    knots: tuple
    values: tuple
    _interp: PchipInterpolator = field(init=False, repr=False, compare=False)
    tail_low: PowerLaw = field(init=False, compare=False)
    tail_high: PowerLaw = field(init=False, compare=False)

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if knots.size < 4 or knots.size != values.size:
            raise ContractError("tabulated profile needs >= 4 knots with matching values")
        if np.any(knots <= 0) or np.any(np.diff(knots) <= 0):
            raise ContractError("tabulated knots must be positive and strictly increasing")
        if np.any(values < 0):
            raise ContractError("tabulated values must be nonnegative")
        if np.any(values == 0):
            raise ContractError("tabulated values must be positive for tail fitting")
        object.__setattr__(self, "knots", tuple(knots))
        object.__setattr__(self, "values", tuple(values))
        object.__setattr__(self, "_interp", PchipInterpolator(knots, values))
        m = max(2, int(math.ceil(0.25 * knots.size)))
        object.__setattr__(self, "tail_low", _fit_power_law(knots[:m], values[:m]))
        object.__setattr__(self, "tail_high", _fit_power_law(knots[-m:], values[-m:]))


def _fit_power_law(knots: np.ndarray, values: np.ndarray) -> PowerLaw:
    slope, intercept = np.polyfit(np.log(knots), np.log(values), 1)
    return PowerLaw(b=float(np.exp(intercept)), p=float(slope))


CoefficientTerm = Union[PowerLaw, Constant, Tabulated]


def coefficient_eval(term: CoefficientTerm, ell: float) -> float:
    """Evaluate a coefficient profile at curve length ell > 0."""
    if ell <= 0:
        raise ContractError(f"curve length must be positive, got {ell}")
    if isinstance(term, PowerLaw):
        return term.b * ell**term.p
    if isinstance(term, Constant):
        return term.b
    if ell < term.knots[0]:
        return coefficient_eval(term.tail_low, ell)
    if ell > term.knots[-1]:
        return coefficient_eval(term.tail_high, ell)
    return float(term._interp(ell))


def coefficient_deriv(term: CoefficientTerm, ell: float) -> float:
    """d a / d ell at ell > 0 (used by the path-energy gradient)."""
    if ell <= 0:
        raise ContractError(f"curve length must be positive, got {ell}")
    if isinstance(term, PowerLaw):
        return term.b * term.p * ell ** (term.p - 1.0)
    if isinstance(term, Constant):
        return 0.0
    if ell < term.knots[0]:
        return coefficient_deriv(term.tail_low, ell)
    if ell > term.knots[-1]:
        return coefficient_deriv(term.tail_high, ell)
    return float(term._interp.derivative()(ell))


@dataclass(frozen=True)
class MetricConfig:
    """Order n and the coefficient profile for each k in 0..n.

    Absent k means a_k identically zero; k = 0 and k = n must be present
    with positive coefficient so the metric is definite.
    """

    n: int
    terms: dict

    def __post_init__(self):
        if self.n < 2:
            raise ContractError(f"metric order must be >= 2, got {self.n}")
        terms = dict(self.terms)
        for k, term in terms.items():
            if not (0 <= k <= self.n):
                raise ContractError(f"coefficient index {k} outside 0..{self.n}")
            if not isinstance(term, (PowerLaw, Constant, Tabulated)):
                raise ContractError(f"unknown coefficient form for k={k}")
        for k in (0, self.n):
            term = terms.get(k)
            if term is None:
                raise ContractError(f"a_{k} must be present and positive")
            if isinstance(term, (PowerLaw, Constant)) and term.b <= 0:
                raise ContractError(f"a_{k} must be strictly positive")
        object.__setattr__(self, "terms", terms)

    def coefficient(self, k: int, ell: float) -> float:
        term = self.terms.get(k)
        return 0.0 if term is None else coefficient_eval(term, ell)


def scale_invariant_profile(n: int, b) -> MetricConfig:
    """Coefficients a_k(ell) = b_k * ell**(2k-3), the scale-invariant choice."""
    b = np.asarray(b, dtype=float)
    if b.shape != (n + 1,):
        raise ContractError(f"need n+1 = {n + 1} coefficients, got shape {b.shape}")
    if b[0] <= 0 or b[n] <= 0:
        raise ContractError("b_0 and b_n must be strictly positive")
    terms = {
        k: PowerLaw(float(b[k]), 2.0 * k - 3.0) for k in range(n + 1) if b[k] != 0.0
    }
    return MetricConfig(n=n, terms=terms)


def eval_metric(
    cfg: MetricConfig, c: DiscreteCurve, h: TangentField, g: TangentField
) -> float:
    """The bilinear form G_c(h, g)."""
    if c.grid != h.grid or c.grid != g.grid:
        raise ContractError("curve and tangent fields live on different grids")
    ell = curve_length(c)
    w = c.grid.weight
    total = 0.0
    dh, dg = h.values, g.values
    inv_speed = 1.0 / c.arc_speed
    for k in range(cfg.n + 1):
        if k > 0:
            dh = derivative(dh, c.grid) * inv_speed[:, None]
            dg = derivative(dg, c.grid) * inv_speed[:, None]
        term = cfg.terms.get(k)
        if term is None:
            continue
        a_k = coefficient_eval(term, ell)
        if a_k == 0.0:
            continue
        inner = np.sum(dh * dg, axis=1)
        total += a_k * w * float(np.dot(inner, c.arc_speed))
    return total


def norm_equivalence_probe(
    cfg: MetricConfig,
    curves,
    trials: int,
    rng: np.random.Generator | None = None,
) -> dict:
    """Sample sqrt(G_c(h,h)) / ||h||_{H^n(dtheta)} over random fields.

    Returns per-curve and pooled {min_ratio, max_ratio}; the window is
    finite on any fixed set of curves but its width depends on them.
    """
    if not curves:
        raise ContractError("need at least one curve to probe")
    if rng is None:
        rng = np.random.default_rng(0)
    per_curve = []
    pooled = []
    for c in curves:
        ratios = []
        for _ in range(trials):
            h = random_field(c.grid, rng, dim=c.dim)
            flat = norm(c, h, NormKind.HN_DTHETA, n=cfg.n)
            if flat == 0.0:
                continue
            ratios.append(math.sqrt(eval_metric(cfg, c, h, h)) / flat)
        per_curve.append({"min_ratio": min(ratios), "max_ratio": max(ratios)})
        pooled.extend(ratios)
    return {
        "per_curve": per_curve,
        "min_ratio": min(pooled),
        "max_ratio": max(pooled),
    }


def config_to_dict(cfg: MetricConfig) -> dict:
    terms = []
    for k in sorted(cfg.terms):
        term = cfg.terms[k]
        if isinstance(term, PowerLaw):
            terms.append({"k": k, "form": "power", "b": term.b, "p": term.p})
        elif isinstance(term, Constant):
            terms.append({"k": k, "form": "const", "b": term.b})
        else:
            terms.append(
                {
                    "k": k,
                    "form": "table",
                    "knots": list(term.knots),
                    "values": list(term.values),
                }
            )
    return {"n": cfg.n, "terms": terms}


def config_from_dict(data: dict) -> MetricConfig:
    try:
        terms = {}
        for entry in data["terms"]:
            k = int(entry["k"])
            form = entry["form"]
            if form == "power":
                terms[k] = PowerLaw(float(entry["b"]), float(entry["p"]))
            elif form == "const":
                terms[k] = Constant(float(entry["b"]))
            elif form == "table":
                terms[k] = Tabulated(tuple(entry["knots"]), tuple(entry["values"]))
            else:
                raise ContractError(f"unknown coefficient form {form!r}")
        n = int(data["n"])
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise ContractError(f"malformed metric config: {exc}") from exc
    return MetricConfig(n=n, terms=terms)


def load_config(path) -> MetricConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))
