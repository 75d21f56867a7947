import math
from fractions import Fraction

import pytest

from relim.errors import DomainError
from relim.lifting import LiftingParams, lifting_bound


def test_multi_step_base_case_is_identity():
    params = LiftingParams(delta=3, f_delta=8, p=0.25, j=0)
    assert lifting_bound(params, "multi-step").value == 0.25


def test_zero_round_worked_value():
    params = LiftingParams(delta=3, f_delta=3)
    res = lifting_bound(params, "zero-round")
    assert res.exact == Fraction(1, 3**36)
    assert math.isclose(res.log10, -36 * math.log10(3))


def test_multi_step_matches_recursion_chain():
    # closed form must upper-bound (2*delta*f) * p^(1/(delta+1)) iterated 2j times
    for delta in (3, 4, 6):
        for f in (8.0, 48.0):
            for p0 in (1e-3, 1e-12, 1e-120):
                chain = math.log10(p0)
                for j in range(1, 9):
                    for _ in range(2):
                        chain = math.log10(2 * delta * f) + chain / (delta + 1)
                    closed = lifting_bound(
                        LiftingParams(delta=delta, f_delta=f, p=p0, j=j), "multi-step"
                    ).log10
                    assert closed >= chain - 1e-9
                    assert math.isclose(
                        closed,
                        2 * math.log10(2 * delta * f) + math.log10(p0) / (delta + 1) ** (2 * j),
                        rel_tol=1e-9,
                    )


def test_multi_step_monotone_in_j_and_p():
    base = dict(delta=4, f_delta=16.0)
    prev = -1.0
    for j in range(1, 8):
        cur = lifting_bound(LiftingParams(p=1e-30, j=j, **base), "multi-step").log10
        assert cur >= prev
        prev = cur
    for j in (1, 3):
        lo = lifting_bound(LiftingParams(p=1e-40, j=j, **base), "multi-step").log10
        hi = lifting_bound(LiftingParams(p=1e-20, j=j, **base), "multi-step").log10
        assert hi >= lo


def test_single_step_dominates_input_probability():
    params = LiftingParams(delta=3, f_delta=8, p=1e-9)
    res = lifting_bound(params, "single-step")
    assert res.value > 1e-9


def test_pn_lower_huge_exponent_stays_finite_in_log_space():
    res = lifting_bound(LiftingParams(delta=3, f_delta=8, t=3), "pn-lower")
    assert res.log10 == -(3**30) * math.log10(8)
    res_big = lifting_bound(LiftingParams(delta=3, f_delta=8, t=200), "pn-lower")
    assert res_big.log10 == -math.inf and "den_exponent" in res_big.note


def test_threshold_and_deterministic():
    res = lifting_bound(LiftingParams(delta=16, f_delta=2.0**16, n=1e30), "threshold")
    want = (math.log(math.log(1e30), 16) - math.log(math.log(2.0**16), 16)) / 10
    assert math.isclose(res.value, want)
    det = lifting_bound(LiftingParams(delta=16, f_delta=2.0**16, n=1e30, t=5), "deterministic")
    assert det.value == 5


def test_domain_errors_not_clamped():
    with pytest.raises(DomainError):
        lifting_bound(LiftingParams(delta=3, f_delta=0.5, n=100.0), "threshold")
    with pytest.raises(DomainError):
        lifting_bound(LiftingParams(delta=3, f_delta=8, p=1.5, j=1), "multi-step")
    with pytest.raises(DomainError):
        lifting_bound(LiftingParams(delta=3, f_delta=8, p=0.1, j=1), "nonsense")
