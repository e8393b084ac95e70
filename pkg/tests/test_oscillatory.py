"""Stationary phase, Poisson on residue classes, and the composite-derivative helper."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vertmass.bumps import symmetric_bump
from vertmass.oscillatory import (
    DerivativeFloorError,
    MultipleStationaryPointsError,
    NoStationaryPointError,
    PhaseProblem,
    RangeEstimationError,
    faa_di_bruno,
    integer_partitions,
    integrate_oscillatory,
    nonstationary_bound_check,
    poisson_on_class,
    stationary_phase_eval,
)

BASE = symmetric_bump(2.0)
MID = 0.5 * (BASE.lo + BASE.hi)


def _scales(scale: float = 1.0) -> tuple[float, float]:
    grid = np.linspace(BASE.lo, BASE.hi, 52)[1:-1]
    sup0 = scale * max(float(BASE(float(x))) for x in grid)
    v = (BASE.hi - BASE.lo) / 2.0
    for j in range(1, 5):
        sup_j = scale * max(abs(BASE.derivative(j, float(x))) for x in grid)
        if sup_j > 0:
            v = min(v, (2.0 * sup0 / sup_j) ** (1.0 / j))
    return sup0, v


def fresnel_problem(lam: float, sign: float = 1.0) -> PhaseProblem:
    """Recentred bump amplitude against the quadratic phase sign*lam*t^2."""
    x, v = _scales()
    lo, hi = BASE.lo - MID, BASE.hi - MID
    return PhaseProblem(
        lo=lo,
        hi=hi,
        amplitude=lambda t: BASE(t + MID),
        phase=lambda t: sign * lam * t * t,
        dphase=lambda t: 2.0 * sign * lam * t,
        d2phase=lambda t: 2.0 * sign * lam,
        two_pi=True,
        X=x,
        V=v,
        V1=v,
        Y=lam * max(lo * lo, hi * hi),
        Q=max(hi, -lo),
    )


def linear_problem(lam: float, R: float | None = None) -> PhaseProblem:
    x, v = _scales()
    lo, hi = BASE.lo - MID, BASE.hi - MID
    q = max(hi, -lo)
    return PhaseProblem(
        lo=lo,
        hi=hi,
        amplitude=lambda t: BASE(t + MID),
        phase=lambda t: lam * t,
        dphase=lambda t: lam,
        two_pi=False,
        X=x,
        U=v,
        R=lam if R is None else R,
        Y=lam * q,
        Q=q,
    )


# ---------------------------------------------------------------------------
# partitions and derivatives of compositions


def test_partition_counts():
    want = [1, 1, 2, 3, 5, 7, 11, 15, 22]
    for n, p_n in enumerate(want):
        assert len(integer_partitions(n)) == p_n


def test_partitions_are_partitions():
    for n in range(1, 9):
        seen = set()
        for partition in integer_partitions(n):
            assert sum(part * mult for part, mult in partition) == n
            parts = [part for part, _ in partition]
            assert parts == sorted(parts, reverse=True)
            assert all(mult >= 1 for _, mult in partition)
            assert partition not in seen
            seen.add(partition)


def test_partitions_negative_raises():
    with pytest.raises(ValueError):
        integer_partitions(-1)


def test_faa_di_bruno_order_zero():
    assert faa_di_bruno([3.5], [0.0], 0) == 3.5


@given(
    st.lists(st.floats(-2, 2), min_size=4, max_size=4),
    st.lists(st.floats(-2, 2), min_size=4, max_size=4),
)
def test_faa_di_bruno_low_orders(outer, inner):
    """Orders 1..3 against the written-out chain rules."""
    o, i = outer, inner
    assert faa_di_bruno(o, i, 1) == pytest.approx(o[1] * i[1], rel=1e-12, abs=1e-12)
    want2 = o[1] * i[2] + o[2] * i[1] ** 2
    assert faa_di_bruno(o, i, 2) == pytest.approx(want2, rel=1e-12, abs=1e-12)
    want3 = o[1] * i[3] + 3 * o[2] * i[1] * i[2] + o[3] * i[1] ** 3
    assert faa_di_bruno(o, i, 3) == pytest.approx(want3, rel=1e-12, abs=1e-12)


def test_faa_di_bruno_polynomial_composition():
    # (t^3)^2 = t^6, so the fourth derivative is 360 t^2
    t = 1.7
    q = t**3
    outer = [q * q, 2 * q, 2.0, 0.0, 0.0]
    inner = [q, 3 * t**2, 6 * t, 6.0, 0.0]
    assert faa_di_bruno(outer, inner, 4) == pytest.approx(360 * t * t, rel=1e-13)


# ---------------------------------------------------------------------------
# Poisson summation


def gauss(x: float) -> float:
    return math.exp(-math.pi * x * x)


def test_poisson_gaussian_full_lattice():
    """Self-dual Gaussian: both sides agree and match the closed form."""
    direct, dual = poisson_on_class(gauss, 1, 0, order=24)
    assert abs(direct - dual) < 1e-9
    theta = math.pi**0.25 / math.gamma(0.75)
    assert direct == pytest.approx(theta, rel=1e-12)


def test_poisson_residue_class():
    direct, dual = poisson_on_class(gauss, 3, 1, order=24)
    assert abs(direct - dual) < 1e-9
    assert 0 < direct < 1


def test_poisson_class_representative_invariance():
    d1, s1 = poisson_on_class(gauss, 5, 2, fhat=gauss)
    d2, s2 = poisson_on_class(gauss, 5, 7, fhat=gauss)
    assert d1 == d2
    assert s1 == pytest.approx(s2, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 6), st.integers(0, 20))
def test_poisson_selfdual_any_class(c, a):
    direct, dual = poisson_on_class(gauss, c, a, fhat=gauss)
    assert abs(direct - dual) < 1e-9


def test_poisson_rejects_bad_modulus():
    with pytest.raises(ValueError):
        poisson_on_class(gauss, 0, 0)


def test_poisson_nondecaying_summand_raises():
    with pytest.raises(RangeEstimationError):
        poisson_on_class(lambda x: 1.0, 1, 0)


# ---------------------------------------------------------------------------
# non-stationary bound


def test_nonstationary_contained():
    for lam in (10.0, 100.0, 1000.0):
        value, envelope = nonstationary_bound_check(linear_problem(lam), A=3)
        assert value <= 10.0 * envelope


def test_nonstationary_envelope_shrinks():
    values = []
    for lam in (10.0, 100.0, 1000.0):
        _, envelope = nonstationary_bound_check(linear_problem(lam), A=3)
        values.append(envelope)
    assert values[0] > values[1] > values[2]


def test_nonstationary_floor_violation_raises():
    with pytest.raises(DerivativeFloorError):
        nonstationary_bound_check(linear_problem(50.0, R=100.0))


def test_nonstationary_requires_unit_phase_scale():
    bad = linear_problem(0.1)  # Y = 0.1 * Q < 1
    with pytest.raises(ValueError, match="Y >= 1"):
        nonstationary_bound_check(bad)


def test_missing_scale_raises():
    problem = PhaseProblem(
        lo=-1.0,
        hi=1.0,
        amplitude=lambda t: np.ones_like(t),
        phase=lambda t: t,
        dphase=lambda t: 1.0,
    )
    with pytest.raises(ValueError, match="scale"):
        nonstationary_bound_check(problem)


def test_zero_amplitude_integrates_to_zero():
    problem = PhaseProblem(
        lo=-1.0,
        hi=1.0,
        amplitude=lambda t: np.zeros_like(t),
        phase=lambda t: 40.0 * t,
        dphase=lambda t: 40.0,
        two_pi=False,
    )
    assert integrate_oscillatory(problem) == 0j


# ---------------------------------------------------------------------------
# stationary phase


def test_fresnel_leading_term():
    """Quadratic phase at its minimum: |main| = h(0)/sqrt(2 lam), phase pi/4."""
    lam = 4.0
    res = stationary_phase_eval(fresnel_problem(lam))
    assert abs(res.t0) < 1e-9
    h0 = BASE(MID)
    assert abs(res.main) == pytest.approx(h0 / math.sqrt(2 * lam), rel=1e-9)
    assert cmath.phase(res.main) == pytest.approx(math.pi / 4, abs=1e-9)


def test_fresnel_reflection_conjugates():
    plus = stationary_phase_eval(fresnel_problem(9.0, sign=1.0))
    minus = stationary_phase_eval(fresnel_problem(9.0, sign=-1.0))
    assert minus.main == pytest.approx(plus.main.conjugate(), rel=1e-9)
    assert minus.direct == pytest.approx(plus.direct.conjugate(), rel=1e-9)


def test_fresnel_error_quarters_when_y_quadruples():
    errs = {}
    for lam in (25.0, 100.0, 400.0):
        res = stationary_phase_eval(fresnel_problem(lam))
        errs[lam] = res.discrepancy
    assert errs[100.0] <= 0.5 * errs[25.0]
    assert errs[400.0] <= 0.5 * errs[100.0]


def test_fresnel_within_trivial_bound():
    res = stationary_phase_eval(fresnel_problem(400.0))
    assert abs(res.direct) <= res.trivial_bound
    assert res.discrepancy <= 10.0 * res.err_envelope


def test_stationary_point_on_grid_node():
    """A critical point falling exactly on a bracketing-grid node is one point, not two."""
    x, v = _scales()
    problem = PhaseProblem(
        lo=-0.75,
        hi=0.75,
        amplitude=lambda t: BASE(t + MID),
        phase=lambda t: 30.0 * t * t,
        dphase=lambda t: 60.0 * t,
        d2phase=lambda t: 60.0,
        two_pi=True,
        X=x,
        V=v,
        V1=v,
        Y=30.0 * 0.75**2,
        Q=0.75,
    )
    res = stationary_phase_eval(problem)
    assert abs(res.t0) < 1e-12


def test_monotone_phase_raises():
    x, v = _scales()
    problem = PhaseProblem(
        lo=-0.5,
        hi=0.5,
        amplitude=lambda t: BASE(t + MID),
        phase=lambda t: 3.0 * t,
        dphase=lambda t: 3.0,
        two_pi=True,
        X=x,
        V=v,
        V1=v,
        Y=3.0,
        Q=0.5,
    )
    with pytest.raises(NoStationaryPointError):
        stationary_phase_eval(problem)


def test_two_critical_points_raise():
    x, v = _scales()
    problem = PhaseProblem(
        lo=-2.0,
        hi=2.0,
        amplitude=lambda t: np.exp(-(t**2)),
        phase=lambda t: t**3 - t,
        dphase=lambda t: 3 * t * t - 1.0,
        two_pi=True,
        X=x,
        V=v,
        V1=v,
        Y=6.0,
        Q=2.0,
    )
    with pytest.raises(MultipleStationaryPointsError):
        stationary_phase_eval(problem)


def test_degenerate_critical_point_raises():
    """Cubic phase: the critical point at 0 has vanishing second derivative."""
    problem = PhaseProblem(
        lo=-1.0,
        hi=1.0,
        amplitude=lambda t: np.exp(-(t**2)),
        phase=lambda t: t**3,
        dphase=lambda t: 3 * t * t,
        d2phase=lambda t: 6 * t,
        two_pi=True,
        X=1.0,
        V=1.0,
        V1=1.0,
        Y=1.0,
        Q=1.0,
    )
    with pytest.raises(ValueError, match="second derivative"):
        stationary_phase_eval(problem)


def test_stationary_requires_two_pi_convention():
    problem = fresnel_problem(4.0)
    bare = PhaseProblem(
        lo=problem.lo,
        hi=problem.hi,
        amplitude=problem.amplitude,
        phase=problem.phase,
        dphase=problem.dphase,
        d2phase=problem.d2phase,
        two_pi=False,
        X=problem.X,
        V=problem.V,
        V1=problem.V1,
        Y=problem.Y,
        Q=problem.Q,
    )
    with pytest.raises(ValueError, match="convention"):
        stationary_phase_eval(bare)


def test_declared_amplitude_scales_track_rescaling():
    from vertmass.cli import _amplitude_scales

    x1, v1 = _amplitude_scales(BASE, 0.0, 1.0)
    x3, v3 = _amplitude_scales(BASE, 0.0, 3.0)
    assert x3 == pytest.approx(3.0 * x1, rel=1e-12)
    assert v3 == pytest.approx(v1, rel=1e-12)
    assert 0 < v1 <= (BASE.hi - BASE.lo) / 2.0
