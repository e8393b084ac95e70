"""Smooth weights, Mellin apparatus, and the quadratic-phase transform."""

from __future__ import annotations

import cmath
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vertmass.bumps import (
    Bump,
    ContourSpec,
    canonical_bump,
    fourier_hat,
    hbar,
    hbar_mellin_corrected,
    hbar_mellin_defining,
    hbar_mellin_printed,
    make_bump,
    mean_zero_bump,
    mellin,
    mellin_derivative_at_zero,
    mellin_invert,
    symmetric_bump,
    window_12,
)
from vertmass.quadrature import integrate_panels


def test_support_and_smoothness(psi):
    assert psi(psi.lo) == 0.0
    assert psi(psi.hi) == 0.0
    assert psi(0.1) == 0.0 and psi(7.0) == 0.0
    ys = np.geomspace(psi.lo * 1.001, psi.hi * 0.999, 200)
    assert np.all(psi(ys) > 0)


@given(y=st.floats(0.51, 1.99))
@settings(max_examples=80)
def test_symmetric_bump_inversion_symmetry(y, psi):
    assert psi(y) == pytest.approx(psi(1.0 / y), rel=1e-9, abs=1e-30)


def test_mean_zero_bump_kills_zeroth_moment(psi_mz):
    # the centering constant is itself a 64-node quadrature value
    assert abs(mellin(psi_mz, 0.0)) < 1e-10
    # still symmetric, so the transform stays even in s
    assert mellin(psi_mz, 0.7) == pytest.approx(mellin(psi_mz, -0.7), abs=1e-14)


def test_window_shape():
    w = window_12()
    assert (w.lo, w.hi) == (1.0, 2.0)
    grid = np.linspace(1.0, 2.0, 101)
    vals = w(grid)
    assert np.argmax(vals) == 50  # peak at 3/2


def test_make_bump_names():
    assert make_bump("symmetric", 2.0) == symmetric_bump(2.0)
    assert make_bump("meanzero", 2.0) == mean_zero_bump(2.0)
    assert make_bump("window") == window_12()
    with pytest.raises(ValueError):
        make_bump("sawtooth")
    assert canonical_bump(2.0, "h_window") == window_12()


def test_alpha_validation():
    with pytest.raises(ValueError):
        symmetric_bump(1.0)
    with pytest.raises(ValueError):
        mean_zero_bump(0.5)


def test_mellin_at_zero_is_log_mass(psi):
    """s = 0 reduces to the plain dy/y integral, checked by a fresh quadrature."""
    edges = np.geomspace(psi.lo, psi.hi, 33)
    direct = float(integrate_panels(lambda y: psi(y) / y, edges, 16).real)
    assert mellin(psi, 0.0).real == pytest.approx(direct, rel=1e-9)


def test_mellin_entire_no_pole_at_support_scale(psi):
    # large real s just weights one end of the support; nothing blows up
    assert abs(mellin(psi, 6.0)) < 1e3
    assert abs(mellin(psi, -6.0)) < 1e3


def test_mellin_derivative_symmetric_vanishes(psi, psi_mz):
    assert abs(mellin_derivative_at_zero(psi)) < 1e-10
    assert abs(mellin_derivative_at_zero(psi_mz)) < 1e-10


def test_mellin_invert_round_trip(psi):
    spec = ContourSpec(sigma=1.0, height=320.0, step=0.05)
    cache: dict[complex, complex] = {}

    def tilde(s: complex) -> complex:
        if s not in cache:
            cache[s] = mellin(psi, s)
        return cache[s]

    for y in (0.55, 0.8, 1.0, 1.5, 1.9):
        assert mellin_invert(tilde, spec, y) == pytest.approx(float(psi(y)), abs=2e-7)


def test_mellin_invert_refuses_contaminated_tail(psi):
    shallow = ContourSpec(sigma=1.0, height=20.0, step=0.05)
    with pytest.raises(ArithmeticError):
        mellin_invert(lambda s: mellin(psi, s), shallow, 1.3)


def test_bump_derivative_matches_finite_differences(psi):
    for j, x in ((1, 0.8), (1, 1.4), (2, 1.1), (3, 0.9)):
        h = 1e-5 if j == 1 else 1e-3
        if j == 1:
            fd = (psi(x + h) - psi(x - h)) / (2 * h)
        elif j == 2:
            fd = (psi(x + h) - 2 * psi(x) + psi(x - h)) / h**2
        else:
            fd = (
                psi(x + 2 * h) - 2 * psi(x + h) + 2 * psi(x - h) - psi(x - 2 * h)
            ) / (2 * h**3)
        assert psi.derivative(j, x) == pytest.approx(fd, rel=5e-5, abs=1e-7)


def test_scaled_bump_via_poly_field(psi):
    doubled = replace(psi, poly=tuple(2.0 * c for c in psi.poly))
    ys = np.geomspace(0.6, 1.8, 17)
    assert np.allclose(doubled(ys), 2.0 * psi(ys), rtol=0, atol=0)


def test_fourier_hat_basics():
    w = window_12()
    edges = np.linspace(1.0, 2.0, 33)
    mass = float(integrate_panels(lambda t: w(t), edges, 16).real)
    assert fourier_hat(w, 0.0).real == pytest.approx(mass, rel=1e-9)
    xi = 0.7
    assert fourier_hat(w, -xi) == pytest.approx(fourier_hat(w, xi).conjugate(), abs=1e-13)


def test_contour_points_fold_normalization():
    """The trapezoid weights absorb 1/(2 pi i): integrating exp(a s) along
    Re s = sigma against them must reproduce an inverse-Mellin delta spike
    scale, checked on a Gaussian whose inversion is classical."""
    spec = ContourSpec(sigma=0.5, height=60.0, step=0.02)
    nodes, wts = spec.points()
    # (1/2 pi i) int Gamma(s) y^{-s} ds on Re s > 0 equals e^{-y}
    from vertmass.kernels import gamma_complex

    y = 1.7
    total = sum(w * gamma_complex(s) * cmath.exp(-s * math.log(y)) for s, w in zip(nodes, wts))
    assert total.real == pytest.approx(math.exp(-y), abs=1e-9)
    assert abs(total.imag) < 1e-9


def test_quadratic_transform_small_frequency_limit():
    w = window_12()
    # v -> 0 of the cosine transform recovers the plain u-average
    got = hbar(w, 1e-9, kind="real_part").real
    edges = np.linspace(w.lo, w.hi, 17)
    want = math.sqrt(2.0 / math.pi) * float(integrate_panels(lambda t: w(t), edges, 16).real)
    assert got == pytest.approx(want, rel=1e-8)


def test_quadratic_transform_direct_quadrature_oracle():
    w = window_12()
    v = 37.0
    got = hbar(w, v)
    # independent dense Simpson evaluation of sqrt(2/pi) int h(t) e^{i v t^2} dt
    ts = np.linspace(w.lo, w.hi, 40001)
    vals = w(ts) * np.exp(1j * v * ts * ts)
    simpson = (ts[1] - ts[0]) / 3.0 * (
        vals[0] + vals[-1] + 4.0 * vals[1:-1:2].sum() + 2.0 * vals[2:-1:2].sum()
    )
    want = math.sqrt(2.0 / math.pi) * simpson
    assert got == pytest.approx(complex(want), abs=1e-10)


def test_hbar_closed_form_routes():
    """The defining Mellin integral agrees with the corrected closed form;
    the uncorrected closed form differs by a measurable amount."""
    w = window_12()
    for s in (0.3 + 0.4j, 0.62, 0.5 - 1.1j):
        defining = hbar_mellin_defining(w, s)
        corrected = hbar_mellin_corrected(w, s)
        printed = hbar_mellin_printed(w, s)
        assert defining == pytest.approx(corrected, rel=2e-5)
        assert abs(printed - corrected) > 1e-3 * abs(corrected)


def test_hbar_decays(psi):
    w = window_12()
    small = abs(hbar(w, 5.0))
    large = abs(hbar(w, 500.0))
    assert large < small * 1e-2
