"""Closed-form lifting calculators: failure probabilities and round bounds.

The probability bounds span hundreds of orders of magnitude, so everything
is evaluated in log10 space; an exact fraction is attached whenever the
formula is rational and small enough to materialize.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError

WHICH = ("single-step", "multi-step", "zero-round", "pn-lower", "threshold", "deterministic")


@dataclass(frozen=True)
class LiftingParams:
    delta: int
    f_delta: float | None = None
    p: float | None = None
    j: int | None = None
    t: float | None = None
    n: float | None = None

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "f_delta": self.f_delta,
            "p": self.p,
            "j": self.j,
            "t": self.t,
            "n": self.n,
        }


@dataclass(frozen=True)
class CalcResult:
    which: str
    params: LiftingParams
    log10: float | None
    value: float | None
    exact: Fraction | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "which": self.which,
            "params": self.params.to_json(),
            "value": self.value if self.value is not None else str(self.exact or self.log10),
            "log10": self.log10,
            "exact": self.exact is not None,
        }


def _need(params: LiftingParams, *names):
    for name in names:
        if getattr(params, name) is None:
            raise DomainError(f"lifting formula needs parameter {name!r}")


def _check_probability(p: float):
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"p must be in [0, 1], got {p}")


def _from_log10(log10: float | None, which, params, exact=None, note="") -> CalcResult:
    value = None
    if log10 is not None and log10 < 308:
        value = 10.0**log10
    return CalcResult(which, params, log10, value, exact, note)


def single_step_bound(params: LiftingParams) -> CalcResult:
    """One application of the per-step failure recursion."""
    _need(params, "f_delta", "p")
    _check_probability(params.p)
    d, f, p = params.delta, params.f_delta, params.p
    if p == 0.0:
        return CalcResult("single-step", params, None, 0.0, Fraction(0))
    grow = 2 ** (1 / (d + 1)) * (d * f) ** (d / (d + 1)) * p ** (1 / (d + 1)) + p
    return CalcResult("single-step", params, math.log10(grow), min(grow, 1.0) if grow <= 1 else grow)


def multi_step_bound(params: LiftingParams) -> CalcResult:
    """Failure bound after j problem steps: (2*delta*f)^2 * p^(1/(delta+1)^(2j))."""
    _need(params, "f_delta", "p", "j")
    _check_probability(params.p)
    if params.j < 0:
        raise DomainError("j must be nonnegative")
    d, f, p, j = params.delta, params.f_delta, params.p, params.j
    if j == 0:
        return CalcResult("multi-step", params, math.log10(p) if p > 0 else None, p)
    if p == 0.0:
        return CalcResult("multi-step", params, None, 0.0, Fraction(0))
    exponent = (d + 1) ** (2 * j)
    log10 = 2 * math.log10(2 * d * f) + math.log10(p) / exponent
    return _from_log10(log10, "multi-step", params)


def zero_round_failure(params: LiftingParams) -> CalcResult:
    """Minimum failure probability of any zero-round randomized algorithm."""
    _need(params, "f_delta")
    d, f = params.delta, params.f_delta
    if f <= 0:
        raise DomainError("f_delta must be positive")
    log10 = -(3 * d * d * math.log10(d) + d * d * math.log10(f))
    exact = None
    if float(f).is_integer() and d * d * math.log10(max(f, d)) < 5000:
        exact = Fraction(1, d ** (3 * d * d) * int(f) ** (d * d))
    return _from_log10(log10, "zero-round", params, exact)


def pn_lower_failure(params: LiftingParams) -> CalcResult:
    """Failure lower bound for algorithms faster than a t-step sequence."""
    _need(params, "f_delta", "t")
    d, f, t = params.delta, params.f_delta, params.t
    if f <= 1:
        raise DomainError("f_delta must exceed 1")
    if t < 0 or t != int(t):
        raise DomainError("t must be a nonnegative integer")
    exponent = d ** (10 * int(t))
    try:
        log10 = -float(exponent) * math.log10(f)
    except OverflowError:
        log10 = -math.inf
    return _from_log10(log10, "pn-lower", params, note=f"den_exponent={exponent}")


def threshold_rounds(params: LiftingParams) -> CalcResult:
    """The randomized round threshold (log_delta log n - log_delta log f)/10."""
    _need(params, "f_delta", "n")
    d, f, n = params.delta, params.f_delta, params.n
    if d <= 1:
        raise DomainError("delta must exceed 1")
    if n <= 1 or f <= 1:
        raise DomainError("threshold needs n > 1 and f_delta > 1")
    value = (math.log(math.log(n), d) - math.log(math.log(f), d)) / 10.0
    return CalcResult("threshold", params, None, value)


def deterministic_rounds(params: LiftingParams) -> CalcResult:
    """Deterministic bound min(t, log_delta n - log_delta log f)."""
    _need(params, "f_delta", "t", "n")
    d, f, n, t = params.delta, params.f_delta, params.n, params.t
    if d <= 1 or n <= 1 or f <= 1:
        raise DomainError("deterministic bound needs delta, n, f_delta above 1")
    value = min(t, math.log(n, d) - math.log(math.log(f), d))
    return CalcResult("deterministic", params, None, value)


_DISPATCH = {
    "single-step": single_step_bound,
    "multi-step": multi_step_bound,
    "zero-round": zero_round_failure,
    "pn-lower": pn_lower_failure,
    "threshold": threshold_rounds,
    "deterministic": deterministic_rounds,
}


def lifting_bound(params: LiftingParams, which: str) -> CalcResult:
    if which not in _DISPATCH:
        raise DomainError(f"unknown lifting formula {which!r}; options: {', '.join(WHICH)}")
    return _DISPATCH[which](params)
