"""Divergence conditions on coefficient profiles.

For each order k the improper integrals

    I_0k  = integral_0^1   r^(1/2-k) sqrt(a_k(r)) dr
    Iinfk = integral_1^inf r^(1/2-k) sqrt(a_k(r)) dr

decide whether curves can shrink to a point or blow up along finite
paths.  Divergence of some I with 1 <= k <= n at both ends is sufficient
for completeness; divergence of some I with 0 <= k <= n is necessary.
Power laws are classified symbolically, tabulated profiles by numeric
evidence on their fitted tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import ContractError
from .metric import Constant, MetricConfig, PowerLaw, Tabulated, coefficient_eval

DIVERGENT = "divergent"
CONVERGENT = "convergent"
INCONCLUSIVE = "inconclusive"

# Numeric-evidence tuning: exponent-fit tolerance and cutoff depth 10^-8..10^8.
EXPONENT_TOL = 0.05
MAX_CUTOFF_DECADE = 8


def integrand(term, k: int, r: float) -> float:
    """r^(1/2-k) * sqrt(a_k(r))."""
    if r <= 0:
        raise ContractError(f"integrand argument must be positive, got {r}")
    return r ** (0.5 - k) * math.sqrt(coefficient_eval(term, r))


@dataclass(frozen=True)
class IntegralVerdict:
    verdict: str
    method: str  # "analytic_power_law" | "numeric_evidence"
    value: float | None = None  # finite value when convergent, inf when divergent
    evidence: dict | None = None

    def to_dict(self) -> dict:
        out = {"verdict": self.verdict, "method": self.method}
        if self.value is not None:
            out["value"] = self.value if math.isfinite(self.value) else "inf"
        if self.evidence is not None:
            out["evidence"] = self.evidence
        return out


def classify_power_law(k: int, p: float, b: float = 1.0) -> dict:
    """Symbolic verdicts for a_k = b * r**p at both ends.

    The integrand is b^(1/2) * r^(1/2-k+p/2), so I_0 diverges iff
    p <= 2k-3 and I_inf diverges iff p >= 2k-3; at the critical exponent
    p = 2k-3 the integrand is 1/r and both ends diverge.
    """
    if b == 0.0:
        zero = IntegralVerdict(CONVERGENT, "analytic_power_law", value=0.0)
        return {"I0": zero, "Iinf": zero}
    e = 0.5 - k + p / 2.0
    if e <= -1.0:
        i0 = IntegralVerdict(DIVERGENT, "analytic_power_law", value=math.inf)
    else:
        i0 = IntegralVerdict(
            CONVERGENT, "analytic_power_law", value=math.sqrt(b) / (e + 1.0)
        )
    if e >= -1.0:
        iinf = IntegralVerdict(DIVERGENT, "analytic_power_law", value=math.inf)
    else:
        iinf = IntegralVerdict(
            CONVERGENT, "analytic_power_law", value=-math.sqrt(b) / (e + 1.0)
        )
    return {"I0": i0, "Iinf": iinf}


def _partial_integrals(term, k: int, end: str) -> list[float]:
    """Cumulative integrals over [10^-m, 1] (or [1, 10^m]), decade by decade."""
    partials = []
    total = 0.0
    for m in range(1, MAX_CUTOFF_DECADE + 1):
        if end == "zero":
            lo, hi = 10.0**-m, 10.0 ** -(m - 1)
        else:
            lo, hi = 10.0 ** (m - 1), 10.0**m
        piece, _ = quad(lambda r: integrand(term, k, r), lo, hi, epsabs=1e-10, limit=200)
        total += piece
        partials.append(total)
    return partials


def _fitted_exponent(term, k: int, end: str) -> float:
    """Local log-log slope of the integrand at the singular end."""
    if end == "zero":
        r = np.geomspace(10.0**-MAX_CUTOFF_DECADE, 10.0 ** -(MAX_CUTOFF_DECADE - 1), 9)
    else:
        r = np.geomspace(10.0 ** (MAX_CUTOFF_DECADE - 1), 10.0**MAX_CUTOFF_DECADE, 9)
    f = np.array([integrand(term, k, ri) for ri in r])
    if np.any(f <= 0):
        return math.inf  # effectively zero integrand
    slope = np.polyfit(np.log(r), np.log(f), 1)[0]
    return float(slope)


def numeric_integral_evidence(term, k: int, end: str) -> IntegralVerdict:
    """Classify one end of the improper integral from partial integrals.

    Fits the local integrand exponent e near the singular end; divergent
    for e <= -1 - tol or unbounded partial growth, convergent for
    e >= -1 + tol with Cauchy partials, else inconclusive.
    """
    if end not in ("zero", "infinity"):
        raise ContractError(f"end must be 'zero' or 'infinity', got {end!r}")
    if isinstance(term, Constant) and term.b == 0.0:
        return IntegralVerdict(CONVERGENT, "numeric_evidence", value=0.0)
    try:
        partials = _partial_integrals(term, k, end)
        exponent = _fitted_exponent(term, k, end)
    except Exception as exc:  # quadrature failure
        return IntegralVerdict(
            INCONCLUSIVE, "numeric_evidence", evidence={"error": str(exc)}
        )
    evidence = {"fitted_exponent": exponent, "partial_integrals": partials}
    if math.isinf(exponent):  # zero integrand at the end
        return IntegralVerdict(
            CONVERGENT, "numeric_evidence", value=partials[-1], evidence=evidence
        )
    increments = np.diff([0.0] + partials)
    # Per-decade increments decay geometrically at a convergent end and
    # grow (or stall, for a 1/r integrand) at a divergent one.
    ratio = increments[-1] / increments[-2] if increments[-2] > 0 else 0.0
    # The integrand behaves like r^e near the end; divergence means
    # e <= -1 as r -> 0 but e >= -1 as r -> infinity.
    if end == "zero":
        exponent_divergent = exponent <= -1.0 - EXPONENT_TOL
        exponent_convergent = exponent >= -1.0 + EXPONENT_TOL
    else:
        exponent_divergent = exponent >= -1.0 + EXPONENT_TOL
        exponent_convergent = exponent <= -1.0 - EXPONENT_TOL
    if exponent_divergent or ratio >= 1.05:
        return IntegralVerdict(
            DIVERGENT, "numeric_evidence", value=math.inf, evidence=evidence
        )
    if exponent_convergent and ratio <= 0.95:
        tail = increments[-1] * ratio / (1.0 - ratio)  # geometric extrapolation
        return IntegralVerdict(
            CONVERGENT, "numeric_evidence", value=partials[-1] + tail, evidence=evidence
        )
    return IntegralVerdict(INCONCLUSIVE, "numeric_evidence", evidence=evidence)


SUFFICIENT = "sufficient_conditions_hold"
NECESSARY_FAIL = "necessary_fail"
GAP = "gap"


@dataclass(frozen=True)
class CompletenessReport:
    n: int
    verdicts_zero: dict = field(default_factory=dict)  # k -> IntegralVerdict
    verdicts_inf: dict = field(default_factory=dict)
    condition_I0: bool | None = None
    condition_Iinf: bool | None = None
    necessary_I0_any_k: bool | None = None
    necessary_Iinf_any_k: bool | None = None
    classification: str = INCONCLUSIVE

    def to_dict(self) -> dict:
        rows = []
        for k in range(self.n + 1):
            rows.append({"k": k, "end": "zero", **self.verdicts_zero[k].to_dict()})
            rows.append({"k": k, "end": "infinity", **self.verdicts_inf[k].to_dict()})
        return {
            "n": self.n,
            "per_k": rows,
            "condition_I0": self.condition_I0,
            "condition_Iinf": self.condition_Iinf,
            "necessary_I0_any_k": self.necessary_I0_any_k,
            "necessary_Iinf_any_k": self.necessary_Iinf_any_k,
            "classification": self.classification,
        }


def _any_divergent(verdicts: dict, ks) -> bool | None:
    """True if some k diverges, False if all converge, None if blocked."""
    saw_inconclusive = False
    for k in ks:
        v = verdicts[k].verdict
        if v == DIVERGENT:
            return True
        if v == INCONCLUSIVE:
            saw_inconclusive = True
    return None if saw_inconclusive else False


def analyze(cfg: MetricConfig) -> CompletenessReport:
    """Classify a metric configuration against the divergence conditions."""
    verdicts_zero, verdicts_inf = {}, {}
    for k in range(cfg.n + 1):
        term = cfg.terms.get(k)
        if term is None:
            zero = IntegralVerdict(CONVERGENT, "analytic_power_law", value=0.0)
            verdicts_zero[k], verdicts_inf[k] = zero, zero
        elif isinstance(term, (PowerLaw, Constant)):
            p = term.p if isinstance(term, PowerLaw) else 0.0
            both = classify_power_law(k, p, term.b)
            verdicts_zero[k], verdicts_inf[k] = both["I0"], both["Iinf"]
        else:
            verdicts_zero[k] = numeric_integral_evidence(term, k, "zero")
            verdicts_inf[k] = numeric_integral_evidence(term, k, "infinity")

    higher = range(1, cfg.n + 1)
    all_k = range(0, cfg.n + 1)
    cond0 = _any_divergent(verdicts_zero, higher)
    condinf = _any_divergent(verdicts_inf, higher)
    nec0 = _any_divergent(verdicts_zero, all_k)
    necinf = _any_divergent(verdicts_inf, all_k)

    if cond0 and condinf:
        classification = SUFFICIENT
    elif nec0 is False or necinf is False:
        classification = NECESSARY_FAIL
    elif None in (cond0, condinf, nec0, necinf):
        classification = INCONCLUSIVE
    else:
        classification = GAP
    return CompletenessReport(
        n=cfg.n,
        verdicts_zero=verdicts_zero,
        verdicts_inf=verdicts_inf,
        condition_I0=cond0,
        condition_Iinf=condinf,
        necessary_I0_any_k=nec0,
        necessary_Iinf_any_k=necinf,
        classification=classification,
    )


def w_eval(cfg: MetricConfig, r: float) -> float:
    """W(r) = sum_{k=1}^n integral_1^r rho^(1/2-k) sqrt(a_k(rho)) drho.

    Strictly increasing with W(1) = 0; diverges at both ends exactly when
    the sufficient conditions hold.
    """
    if r <= 0:
        raise ContractError(f"W argument must be positive, got {r}")
    if r == 1.0:
        return 0.0
    sign = 1.0 if r > 1.0 else -1.0
    lo, hi = (1.0, r) if r > 1.0 else (r, 1.0)
    # Split at decade boundaries so quad resolves power-law singular ends.
    points = [lo]
    decade = 10.0 ** math.ceil(math.log10(lo) + 1e-12)
    while decade < hi:
        if decade > lo:
            points.append(decade)
        decade *= 10.0
    points.append(hi)
    total = 0.0
    for k in range(1, cfg.n + 1):
        term = cfg.terms.get(k)
        if term is None:
            continue
        for a, b in zip(points[:-1], points[1:]):
            piece, _ = quad(
                lambda rho: integrand(term, k, rho), a, b, epsabs=1e-10, limit=200
            )
            total += piece
    return sign * total
