"""Smooth compactly supported weights and their transforms.

Three families are used: a bump symmetric under y -> 1/y supported on
[1/alpha, alpha] (the weight on the geodesic), the same bump multiplied by
a quadratic in the log variable tuned to kill the mean, and a window on
(1, 2) used to aggregate over weights k.  All are built from the core
profile exp(-1/(1 - t^2)) so every derivative is available in closed form
through the two partial fractions of 1/(1 - t^2).

Transforms: Mellin along vertical lines (with inversion), Fourier on the
line, and the quadratic-phase transform sqrt(2/pi) int f(t) e^{i v t^2} dt
that shows up after stationary phase in weight averages.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import gamma_complex
from .quadrature import fsum_complex, integrate_panels, oscillatory_panel_edges

__all__ = [
    "Bump",
    "symmetric_bump",
    "mean_zero_bump",
    "window_12",
    "make_bump",
    "canonical_bump",
    "mellin",
    "mellin_derivative_at_zero",
    "mellin_invert",
    "fourier_hat",
    "hbar",
    "hbar_mellin_defining",
    "hbar_mellin_printed",
    "hbar_mellin_corrected",
    "quadratic_phase_transform",
    "ContourSpec",
]


def _core_value(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t, dtype=float)
    mask = np.abs(t) < 1.0
    tm = t[mask]
    out[mask] = np.exp(-1.0 / (1.0 - tm * tm))
    return out


def _q_derivs(t: float, order: int) -> list[float]:
    """Derivatives of q(t) = -1/(1 - t^2) for j = 1..order at a point |t| < 1."""
    out = []
    fact = 1.0
    for j in range(1, order + 1):
        fact *= j if j > 1 else 1
        a = fact / (1.0 - t) ** (j + 1)
        b = fact * (-1.0) ** j / (1.0 + t) ** (j + 1)
        out.append(-0.5 * (a + b))
    return out


def _exp_core_derivs(t: float, order: int) -> list[float]:
    """Derivatives of exp(q(t)) for j = 0..order via the Leibniz recursion."""
    g0 = math.exp(-1.0 / (1.0 - t * t))
    qd = _q_derivs(t, order)
    h = [g0]
    for n in range(1, order + 1):
        total = 0.0
        for i in range(n):
            total += math.comb(n - 1, i) * h[i] * qd[n - 1 - i]
        h.append(total)
    return h


@dataclass(frozen=True)
class Bump:
    """A compactly supported smooth weight P(t) exp(-1/(1-t^2)) after a map.

    The map from the natural variable x to t is either t = log(x)/log_scale
    (log_map True) or t = map_a x + map_b.  poly holds P's coefficients,
    constant term first.
    """

    lo: float
    hi: float
    log_map: bool
    map_a: float
    map_b: float
    poly: tuple[float, ...] = (1.0,)

    def _t_of(self, x: np.ndarray) -> np.ndarray:
        if self.log_map:
            return np.log(x) / self.map_a
        return self.map_a * x + self.map_b

    def __call__(self, x) -> np.ndarray | float:
        scalar = np.isscalar(x)
        xa = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.zeros_like(xa)
        inside = (xa > self.lo) & (xa < self.hi)
        if self.log_map:
            inside &= xa > 0
        if np.any(inside):
            t = self._t_of(xa[inside])
            vals = _core_value(t)
            if self.poly != (1.0,):
                vals = vals * np.polynomial.polynomial.polyval(t, self.poly)
            out[inside] = vals
        return float(out[0]) if scalar else out

    def t_derivative(self, j: int, t: float) -> float:
        """j-th derivative with respect to the core variable t."""
        if abs(t) >= 1.0:
            return 0.0
        core = _exp_core_derivs(t, j)
        if self.poly == (1.0,):
            return core[j]
        pd = list(self.poly)
        pvals = []
        for _ in range(j + 1):
            pvals.append(float(np.polynomial.polynomial.polyval(t, pd)) if pd else 0.0)
            pd = list(np.polynomial.polynomial.polyder(pd)) if len(pd) > 1 else []
        return math.fsum(math.comb(j, i) * pvals[i] * core[j - i] for i in range(j + 1))

    def log_derivative(self, j: int, x: float) -> float:
        """(d/d log x)^j of the bump, defined for the log-mapped family."""
        if not self.log_map:
            raise ValueError("log_derivative only makes sense for log-mapped bumps")
        if not (self.lo < x < self.hi):
            return 0.0
        t = math.log(x) / self.map_a
        return self.t_derivative(j, t) / self.map_a**j

    def derivative(self, j: int, x: float) -> float:
        """j-th derivative with respect to the natural variable x."""
        if j == 0:
            return float(self(x))
        if not (self.lo < x < self.hi):
            return 0.0
        if not self.log_map:
            t = self.map_a * x + self.map_b
            return self.t_derivative(j, t) * self.map_a**j
        # chain rule through t = log(x)/map_a using Faa di Bruno
        from .oscillatory import faa_di_bruno

        t = math.log(x) / self.map_a
        outer = [self.t_derivative(i, t) for i in range(j + 1)]
        inner = [0.0] + [
            ((-1.0) ** (i - 1)) * math.factorial(i - 1) / (x**i * self.map_a)
            for i in range(1, j + 1)
        ]
        return faa_di_bruno(outer, inner, j)


def symmetric_bump(alpha: float = 2.0) -> Bump:
    """Weight on [1/alpha, alpha], invariant under y -> 1/y."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    la = math.log(alpha)
    return Bump(lo=1.0 / alpha, hi=alpha, log_map=True, map_a=la, map_b=0.0)


def mean_zero_bump(alpha: float = 2.0) -> Bump:
    """Symmetric weight times (t^2 - c), with c chosen so the Mellin value at 0 vanishes."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    x, w = np.polynomial.legendre.leggauss(64)
    g = _core_value(x)
    c = float(np.sum(w * x * x * g) / np.sum(w * g))
    la = math.log(alpha)
    return Bump(lo=1.0 / alpha, hi=alpha, log_map=True, map_a=la, map_b=0.0, poly=(-c, 0.0, 1.0))


def window_12() -> Bump:
    """Aggregation window supported on (1, 2), peak at 3/2."""
    return Bump(lo=1.0, hi=2.0, log_map=False, map_a=2.0, map_b=-3.0)


def make_bump(name: str, alpha: float = 2.0) -> Bump:
    table: dict[str, Callable[[], Bump]] = {
        "symmetric": lambda: symmetric_bump(alpha),
        "meanzero": lambda: mean_zero_bump(alpha),
        "window": window_12,
    }
    try:
        return table[name]()
    except KeyError:
        raise ValueError(f"unknown bump name {name!r}; choose from {sorted(table)}") from None


def canonical_bump(alpha: float, kind: str) -> Bump:
    """The two weights every check runs with: the geodesic weight and the k-window."""
    if alpha <= 1.0:
        raise ValueError("alpha must exceed 1")
    if kind == "psi_symmetric":
        return symmetric_bump(alpha)
    if kind == "h_window":
        return window_12()
    raise ValueError("kind must be psi_symmetric or h_window")


def mellin(bump: Bump, s: complex, order: int = 16) -> complex:
    """int bump(y) y^(-s) dy/y, entire in s; panels track the oscillation in Im s."""
    ulo, uhi = math.log(bump.lo), math.log(bump.hi)
    rate = abs(complex(s).imag)
    edges = oscillatory_panel_edges(ulo, uhi, lambda _t: rate, base_panels=12)

    def f(u: np.ndarray) -> np.ndarray:
        return bump(np.exp(u)) * np.exp(-s * u)

    return complex(integrate_panels(f, edges, order))


def mellin_derivative_at_zero(bump: Bump, step: float = 1e-3) -> float:
    """d/ds of the Mellin transform at s = 0 by a central difference on the real axis."""
    return float((mellin(bump, step).real - mellin(bump, -step).real) / (2 * step))


def mellin_invert(
    psi_tilde: Callable[[complex], complex],
    spec: "ContourSpec",
    y: float,
    tol: float = 1e-6,
) -> float:
    """Recover the weight at y from its Mellin transform along Re s = spec.sigma.

    Trapezoid rule on the truncated line; the discarded tail is estimated
    from the fourth-power decay of the transform, anchored at the largest
    sampled heights, and the call refuses to return a value the tail could
    contaminate beyond tol.
    """
    if spec.sigma <= 0:
        raise ValueError("inversion contour must have sigma > 0")
    lny = math.log(y)
    nodes, weights = spec.points()
    vals = [w * psi_tilde(s) * cmath.exp(s * lny) for s, w in zip(nodes, weights)]
    total = fsum_complex(vals)
    # decay model |psi_tilde(sigma + it)| <= C (t/T)^-4 for t > T, C from the
    # top few sampled heights (a max, so a single near-zero cannot fool it)
    top = sorted(nodes, key=lambda s: s.imag)[-5:]
    big_t = spec.height
    c_fit = max(abs(psi_tilde(s)) * (s.imag / big_t) ** 4 for s in top)
    tail = c_fit * big_t * math.exp(spec.sigma * lny) / (3 * math.pi)
    if tail > tol:
        raise ArithmeticError(
            f"contour truncation tail estimate {tail:.3e} exceeds tolerance {tol:.1e};"
            " raise the contour height"
        )
    return total.real


def fourier_hat(bump: Bump, xi: float, order: int = 16) -> complex:
    """hat f(xi) = int f(x) e(-x xi) dx over the support."""
    rate = 2 * math.pi * abs(xi)
    edges = oscillatory_panel_edges(bump.lo, bump.hi, lambda _t: rate, base_panels=8)

    def f(x: np.ndarray) -> np.ndarray:
        return bump(x) * np.exp(-2j * np.pi * xi * x)

    return complex(integrate_panels(f, edges, order))


def quadratic_phase_transform(
    fn: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    v: float,
    power: complex = 0,
    kind: str = "exp",
    order: int = 16,
) -> complex:
    """sqrt(2/pi) int fn(t) t^power K(v t^2) dt with K one of exp(i.), cos, sin.

    The panel edges follow the local frequency 2|v|t so the rule stays far
    inside its resolution limit even for v in the thousands.  power may be
    complex; the support must then sit in t > 0.
    """
    edges = oscillatory_panel_edges(lo, hi, lambda t: 2.0 * abs(v) * max(abs(t), abs(lo)), base_panels=8)

    if kind == "exp":
        kern = lambda ph: np.exp(1j * ph)
    elif kind == "cos":
        kern = np.cos
    elif kind == "sin":
        kern = np.sin
    else:
        raise ValueError("kind must be exp, cos, or sin")

    w = complex(power)
    is_int_power = w.imag == 0.0 and w.real == int(w.real)

    def f(t: np.ndarray) -> np.ndarray:
        base = fn(t)
        if w != 0:
            base = base * t ** int(w.real) if is_int_power else base * np.exp(w * np.log(t))
        return base * kern(v * t * t)

    return math.sqrt(2.0 / math.pi) * complex(integrate_panels(f, edges, order))


def hbar(h: Bump, v: float, w: complex = 0.0, kind: str = "full") -> complex:
    """The weight-average transform int_0^inf h(sqrt u)/sqrt(2 pi u) u^{w/2} K(uv) du.

    kind "full" takes K = e^{i u v}; "real_part" takes K = cos(uv).  The
    substitution u = t^2 turns both into sqrt(2/pi) int h(t) t^w K(v t^2) dt
    on the compact support of h, which the quadratic-phase rule resolves.
    """
    if kind not in ("full", "real_part"):
        raise ValueError("kind must be full or real_part")
    kern = "exp" if kind == "full" else "cos"
    return quadratic_phase_transform(h, h.lo, h.hi, v, power=w, kind=kern)


def hbar_mellin_defining(h: Bump, s: complex, w: complex = 0.0, v_max: float = 400.0) -> complex:
    """Mellin transform of the real-part transform, straight from its definition.

    int_0^inf hbar^Re_w(v) v^{s-1} dv for 0 < Re s < 1, quadrature split at
    v = 1 so the endpoint power stays resolved.  Absolutely convergent there
    because the transform is bounded at 0 and decays rapidly at infinity.
    """
    s = complex(s)
    if not (0.0 < s.real < 1.0):
        raise ValueError("defining integral converges for 0 < Re s < 1")

    def piece(v: np.ndarray) -> np.ndarray:
        vals = np.array([hbar(h, float(x), w, "real_part").real for x in v])
        return vals * np.exp((s - 1) * np.log(v))

    # head below eps from the even Taylor series of the cosine transform:
    # hbar(v) = m0 - m2 v^2/2 + O(v^4), integrated against v^{s-1} exactly
    eps = 1e-3
    m0 = _u_moment(h, w / 2.0)
    m2 = _u_moment(h, w / 2.0 + 2.0)
    out = m0 * eps**s / s - 0.5 * m2 * eps ** (s + 2) / (s + 2)
    out += complex(integrate_panels(piece, np.geomspace(eps, 1.0, 25), 12))
    out += complex(integrate_panels(piece, np.geomspace(1.0, v_max, 120), 12))
    return out


def _u_moment(h: Bump, exponent: complex) -> complex:
    """int_0^inf h(sqrt u)/sqrt(2 pi u) u^exponent du as a t-integral."""

    def f(t: np.ndarray) -> np.ndarray:
        return h(t) * np.exp(2.0 * exponent * np.log(t))

    val = complex(integrate_panels(f, np.linspace(h.lo, h.hi, 17), 16))
    return math.sqrt(2.0 / math.pi) * val


def hbar_mellin_printed(h: Bump, s: complex, w: complex = 0.0) -> complex:
    """The closed form exactly as displayed: Gamma(s) cos(pi s/2) times the
    plain u^{w/2} moment of the window, with no u^{-s} inside the integral."""
    s = complex(s)
    return gamma_complex(s) * cmath.cos(0.5 * math.pi * s) * _u_moment(h, w / 2.0)


def hbar_mellin_corrected(h: Bump, s: complex, w: complex = 0.0) -> complex:
    """The closed form with the u^{-s} factor restored, valid for 0 < Re s < 1.

    Follows from int_0^inf cos(uv) v^{s-1} dv = Gamma(s) cos(pi s/2) u^{-s}
    applied under the defining integral.
    """
    s = complex(s)
    if not (0.0 < s.real < 1.0):
        raise ValueError("closed form holds for 0 < Re s < 1")
    return gamma_complex(s) * cmath.cos(0.5 * math.pi * s) * _u_moment(h, w / 2.0 - s)


@dataclass(frozen=True)
class ContourSpec:
    """A truncated vertical line Re s = sigma, |Im s| <= height, step size step."""

    sigma: float
    height: float
    step: float = 0.05

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.height < 10 * self.step:
            raise ValueError("height must be at least 10 steps")

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes s and weights w so that (1/2 pi i) int f(s) ds = sum w f(s).

        Trapezoid rule over [-height, height]; the weights fold in the 1/2pi.
        """
        n = int(round(2 * self.height / self.step))
        t = np.linspace(-self.height, self.height, n + 1)
        w = np.full(n + 1, (2 * self.height / n) / (2 * math.pi))
        w[0] *= 0.5
        w[-1] *= 0.5
        return self.sigma + 1j * t, w
