"""Oscillatory integral machinery: Poisson on residue classes, derivative
bounds for non-stationary phases, and the leading stationary-phase term.

The two bound checks mirror standard first/second derivative estimates: a
phase with |f'| >= R throughout loses (QR/sqrt(Y))^-A + (RU)^-A against the
trivial bound, and a phase with a single interior stationary point
contributes its quarter-phase-rotated leading term plus an explicit error
envelope.  Both are stated with implied constant 1, so consumers compare
against envelope * slack, never equality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .quadrature import integrate_panels, oscillatory_panel_edges

__all__ = [
    "integer_partitions",
    "faa_di_bruno",
    "poisson_on_class",
    "PhaseProblem",
    "integrate_oscillatory",
    "nonstationary_envelope",
    "nonstationary_bound_check",
    "StationaryPhaseResult",
    "stationary_phase_eval",
    "NoStationaryPointError",
    "MultipleStationaryPointsError",
    "RangeEstimationError",
    "DerivativeFloorError",
]


class NoStationaryPointError(ValueError):
    """The phase derivative never vanishes; use nonstationary_bound_check."""


class MultipleStationaryPointsError(ValueError):
    """More than one sign change of the phase derivative on the support."""


class RangeEstimationError(ArithmeticError):
    """Could not bracket the numerically relevant range of a summand."""


class DerivativeFloorError(ValueError):
    """A declared lower bound on |phase'| fails on the support."""


@lru_cache(maxsize=64)
def integer_partitions(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """All partitions of n as tuples of (part, multiplicity), parts descending."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return ((),)
    out: list[tuple[tuple[int, int], ...]] = []

    def rec(remaining: int, largest: int, acc: list[tuple[int, int]]):
        if remaining == 0:
            out.append(tuple(acc))
            return
        for part in range(min(largest, remaining), 0, -1):
            for mult in range(remaining // part, 0, -1):
                acc.append((part, mult))
                rec(remaining - part * mult, part - 1, acc)
                acc.pop()

    rec(n, n, [])
    return tuple(out)


def faa_di_bruno(outer: Sequence[float], inner: Sequence[float], n: int) -> float:
    """n-th derivative of p(q(t)) from outer[m] = p^(m)(q(t)), inner[i] = q^(i)(t).

    Runs over partitions n = sum i * k_i with coefficient
    n! / prod(k_i! (i!)^k_i); both argument lists must reach index n.
    """
    if n == 0:
        return outer[0]
    total = 0.0
    nfact = math.factorial(n)
    for partition in integer_partitions(n):
        m = sum(mult for _, mult in partition)
        coeff = nfact
        prod = outer[m]
        for part, mult in partition:
            coeff //= math.factorial(mult) * math.factorial(part) ** mult
            prod *= inner[part] ** mult
        total += coeff * prod
    return total


def _estimate_range(f: Callable[[float], float], floor: float = 1e-18) -> float:
    """Smallest power-of-two L with |f| below floor on a grid outside [-L, L]."""
    half = 8.0
    while half <= 2.0**20:
        probe = np.concatenate([np.linspace(half, 2 * half, 9), -np.linspace(half, 2 * half, 9)])
        if max(abs(f(float(x))) for x in probe) < floor:
            return 2 * half
        half *= 2
    raise RangeEstimationError("summand does not decay below 1e-18 within |x| <= 2^20")


def poisson_on_class(
    f: Callable[[float], float],
    c: int,
    a: int,
    lo: float | None = None,
    hi: float | None = None,
    fhat: Callable[[float], complex] | None = None,
    order: int = 16,
) -> tuple[float, float]:
    """Both sides of Poisson summation restricted to n = a mod c.

    Direct side: sum of f over the class, truncated where f is numerically
    negligible (the range is estimated unless lo/hi are supplied).  Dual
    side: (1/c) sum_n fhat(n/c) e(an/c), the transform computed by
    oscillatory quadrature when not supplied, the frequency sum cut once six
    consecutive transform values drop below 1e-16.  Returns (direct, dual).
    """
    if c <= 0:
        raise ValueError("modulus must be positive")
    if lo is None or hi is None:
        half = _estimate_range(f)
        lo, hi = -half, half
    start = a + c * math.ceil((lo - a) / c)
    direct = math.fsum(f(x) for x in range(start, math.floor(hi) + 1, c))

    if fhat is None:

        def fhat(xi: float) -> complex:
            rate = 2 * math.pi * abs(xi)
            edges = oscillatory_panel_edges(lo, hi, lambda _t: rate, base_panels=8)

            def g(x: np.ndarray) -> np.ndarray:
                return np.array([f(v) for v in x]) * np.exp(-2j * np.pi * xi * x)

            return complex(integrate_panels(g, edges, order))

    terms = [fhat(0.0)]
    quiet = 0
    n = 1
    while quiet < 6:
        pos = fhat(n / c)
        neg = fhat(-n / c)
        phase = 2 * math.pi * a * n / c
        terms.append(pos * complex(math.cos(phase), math.sin(phase)))
        terms.append(neg * complex(math.cos(phase), -math.sin(phase)))
        quiet = quiet + 1 if max(abs(pos), abs(neg)) < 1e-16 else 0
        n += 1
        if n > 10_000:
            raise RangeEstimationError("dual sum did not settle within 10^4 frequencies")
    total = sum(terms) / c
    if abs(total.imag) > 1e-9 * max(1.0, abs(total.real)):
        raise ArithmeticError(f"dual side of Poisson came out non-real: {total}")
    return direct, total.real


@dataclass(frozen=True)
class PhaseProblem:
    """An integral int_lo^hi h(t) exp(i f(t)) dt, or exp(2 pi i f) when two_pi.

    Alongside the maps, the caller declares the size scales the derivative
    lemmas are phrased in: amplitude scales X and U (or V, V1 in the
    stationary setting), phase scales Y, Q, and the first-derivative floor R.
    Scales an operation does not need may stay None.
    """

    lo: float
    hi: float
    amplitude: Callable[[np.ndarray], np.ndarray]
    phase: Callable[[np.ndarray], np.ndarray]
    dphase: Callable[[float], float]
    d2phase: Callable[[float], float] | None = None
    two_pi: bool = False
    X: float | None = None
    U: float | None = None
    R: float | None = None
    Y: float | None = None
    Q: float | None = None
    V: float | None = None
    V1: float | None = None

    def _need(self, *names: str) -> list[float]:
        vals = []
        for name in names:
            v = getattr(self, name)
            if v is None:
                raise ValueError(f"PhaseProblem scale {name} is required here")
            vals.append(float(v))
        return vals

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def big_z(self) -> float:
        x, y, q, v1 = self._need("X", "Y", "Q", "V1")
        return q + x + y + v1 + 1.0

    def stationary_hypotheses_ok(self) -> bool:
        x, y, q, v, v1 = self._need("X", "Y", "Q", "V", "V1")
        z = self.big_z()
        return y >= z ** (3 / 20) and v1 >= v >= q * z ** (1 / 40) / math.sqrt(y)

    def stationary_envelope(self) -> float:
        x, y, q, v = self._need("X", "Y", "Q", "V")
        return (q**1.5 * x / y**1.5) * (v**-2 + y ** (2 / 3) / q**2)

    def trivial_bound(self) -> float:
        x, y, q = self._need("X", "Y", "Q")
        return x * q / math.sqrt(y) + 1.0


def integrate_oscillatory(problem: PhaseProblem, order: int = 16) -> complex:
    scale = 2 * math.pi if problem.two_pi else 1.0
    edges = oscillatory_panel_edges(
        problem.lo, problem.hi, lambda t: scale * abs(problem.dphase(t)), base_panels=8
    )

    def f(t: np.ndarray) -> np.ndarray:
        return problem.amplitude(t) * np.exp(1j * scale * problem.phase(t))

    return complex(integrate_panels(f, edges, order))


def nonstationary_envelope(length: float, X: float, U: float, R: float, Y: float, Q: float, A: int) -> float:
    return length * X * ((Q * R / math.sqrt(Y)) ** (-A) + (R * U) ** (-A))


def nonstationary_bound_check(problem: PhaseProblem, A: int = 3) -> tuple[float, float]:
    """(|I| computed numerically, envelope) for a phase with |f'| >= R throughout.

    The declared floor R is verified on a 101-point grid first; a violation
    raises rather than returning a vacuous envelope.
    """
    x, u, r, y, q = problem._need("X", "U", "R", "Y", "Q")
    if y < 1:
        raise ValueError("requires Y >= 1")
    grid = np.linspace(problem.lo, problem.hi, 101)
    floor = min(abs(problem.dphase(float(t))) for t in grid)
    if floor < r * (1.0 - 1e-9):
        raise DerivativeFloorError(
            f"declared floor R={r:.3g} but min |phase'| = {floor:.3g} on the support"
        )
    value = integrate_oscillatory(problem)
    return abs(value), nonstationary_envelope(problem.length, x, u, r, y, q, A)


@dataclass(frozen=True)
class StationaryPhaseResult:
    main: complex
    direct: complex
    err_envelope: float
    trivial_bound: float
    hypotheses_ok: bool
    t0: float

    @property
    def discrepancy(self) -> float:
        return abs(self.direct - self.main)


def _locate_stationary_point(problem: PhaseProblem) -> float:
    """Unique zero of phase' by grid bracketing, bisection, one Newton polish."""
    grid = np.linspace(problem.lo, problem.hi, 201)
    dvals = np.array([problem.dphase(float(t)) for t in grid])
    zeros_on_grid = [float(t) for t, d in zip(grid, dvals) if d == 0.0]
    sign = np.sign(dvals)
    nonzero = sign != 0
    changes = []
    idx = np.flatnonzero(nonzero)
    for i, j in zip(idx[:-1], idx[1:]):
        # j > i + 1 means the change straddles a grid zero counted above
        if j == i + 1 and sign[i] != sign[j]:
            changes.append((float(grid[i]), float(grid[j])))
    count = len(changes) + len(zeros_on_grid)
    if count == 0:
        raise NoStationaryPointError(
            "phase' has no zero on the support; use nonstationary_bound_check"
        )
    if count > 1:
        raise MultipleStationaryPointsError(f"found {count} candidate stationary points")
    if zeros_on_grid:
        return zeros_on_grid[0]
    a, b = changes[0]
    fa = problem.dphase(a)
    tol = 1e-12 * max(1.0, problem.length)
    while b - a > tol:
        mid = 0.5 * (a + b)
        fm = problem.dphase(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (fa > 0):
            a, fa = mid, fm
        else:
            b = mid
    t0 = 0.5 * (a + b)
    d2 = _second_derivative(problem, t0)
    if d2 != 0.0:
        polished = t0 - problem.dphase(t0) / d2
        if problem.lo < polished < problem.hi:
            t0 = polished
    return t0


def _second_derivative(problem: PhaseProblem, t: float) -> float:
    if problem.d2phase is not None:
        return problem.d2phase(t)
    h = 1e-6 * max(1.0, problem.length)
    return (problem.dphase(t + h) - problem.dphase(t - h)) / (2 * h)


def stationary_phase_eval(problem: PhaseProblem) -> StationaryPhaseResult:
    """Leading term h(t0) e^{2 pi i f(t0) + sgn(f'') pi i/4} / sqrt(|f''(t0)|)
    against direct quadrature, with the error envelope and trivial bound.

    The stationary point is located here, not supplied: bisection on phase'
    to 1e-12, then one Newton step.  The declared scale hypotheses are
    checked numerically and reported, not enforced.
    """
    if not problem.two_pi:
        raise ValueError("stationary phase here uses the e^{2 pi i f} convention")
    t0 = _locate_stationary_point(problem)
    d2 = _second_derivative(problem, t0)
    if d2 == 0.0:
        raise ValueError("second derivative vanishes at the stationary point")
    direct = integrate_oscillatory(problem)
    h0 = float(problem.amplitude(np.array([t0]))[0])
    f0 = float(problem.phase(np.array([t0]))[0])
    rot = complex(math.cos(math.pi / 4), math.copysign(math.sin(math.pi / 4), d2))
    osc = complex(math.cos(2 * math.pi * f0), math.sin(2 * math.pi * f0))
    main = rot * osc * h0 / math.sqrt(abs(d2))
    return StationaryPhaseResult(
        main=main,
        direct=direct,
        err_envelope=problem.stationary_envelope(),
        trivial_bound=problem.trivial_bound(),
        hypotheses_ok=problem.stationary_hypotheses_ok(),
        t0=t0,
    )
