"""Petersson trace identities: the exact weight-k formula and its K-average.

The exact formula ties harmonically weighted eigenvalue sums to Kloosterman
sums and a Bessel kernel; it exercises the eigen-data, the exponential sums,
and the Bessel evaluation jointly, which makes it the main correctness
certificate for everything upstream.  The averaged form replaces the Bessel
kernel by the quadratic-phase transform of a smooth weight window and is
the engine behind the variance computation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .bumps import Bump, fourier_hat, hbar, quadratic_phase_transform
from .expsums import kloosterman
from .forms import Eigenform, lambda_extended
from .kernels import bessel_j
from .quadrature import fsum_real, integrate_panels

__all__ = [
    "WindowWeights",
    "exact_petersson_check",
    "averaged_petersson_lhs",
    "averaged_petersson_rhs",
]


@dataclass(frozen=True)
class WindowWeights:
    """Spectral weight window for averaged trace formulas.

    plain mode weights weight-k forms by window((k-1)/bigK); shifted mode by
    window((k-1)/bigG - bigK/bigG), i.e. the window slides out to k-1 near
    bigK with width bigG.  Either way the effective window g lives on a
    compact subset of the positive axis and the averaged formula applies
    with scale = bigK (plain) or bigG (shifted).
    """

    bigK: float
    bigG: float
    window: Bump
    shift_mode: str = "plain"

    def __post_init__(self) -> None:
        if self.bigK <= 0 or self.bigG <= 0:
            raise ValueError("scales must be positive")
        if self.bigG > self.bigK:
            raise ValueError("bigG must not exceed bigK")
        if self.shift_mode not in ("plain", "shifted"):
            raise ValueError("shift_mode must be plain or shifted")
        if self.window.lo <= 0:
            raise ValueError("window support must sit inside the positive axis")

    @property
    def scale(self) -> float:
        return self.bigK if self.shift_mode == "plain" else self.bigG

    @property
    def shift(self) -> float:
        return 0.0 if self.shift_mode == "plain" else self.bigK / self.bigG

    def effective(self, x: float) -> float:
        """The slid window g(x) = window(x - shift)."""
        return float(self.window(x - self.shift))

    def weight_at(self, k: int) -> float:
        return self.effective((k - 1) / self.scale)

    def k_values(self) -> list[int]:
        """Even weights k with weight_at(k) possibly nonzero."""
        lo = self.scale * (self.window.lo + self.shift) + 1
        hi = self.scale * (self.window.hi + self.shift) + 1
        first = int(math.floor(lo)) + 1
        if first % 2:
            first += 1
        return [k for k in range(max(first, 2), int(math.ceil(hi)) + 1, 2) if self.weight_at(k) > 0]

    def fourier0(self) -> float:
        """integral of the effective window; shifting does not change it."""
        return fourier_hat(self.window, 0.0).real

    def hbar_effective(self, v: float) -> complex:
        """Quadratic-phase transform of the effective window at frequency v."""
        if self.shift_mode == "plain":
            return hbar(self.window, v)
        sh = self.shift
        return quadratic_phase_transform(
            lambda t: self.window(t - sh), self.window.lo + sh, self.window.hi + sh, v
        )

    def v4_budget(self, v_max: float = 60.0) -> float:
        """2 int_0^inf v^4 |window^(v)| dv, the fourth-moment error weight.

        The modulus of the Fourier transform ignores the shift, so the base
        window serves both modes.  The transform decays faster than any
        power; v_max = 60 leaves a tail far below the quadrature floor.
        """
        edges = [0.25 * j for j in range(int(4 * v_max) + 1)]

        def f(v):
            return np.array([abs(fourier_hat(self.window, float(x))) * float(x) ** 4 for x in v])

        return 2.0 * float(integrate_panels(f, edges, order=8).real)


def _bessel_cutoff(nu: int, x_at_1: float, tol: float, c_cap: int = 100000) -> int:
    """Smallest C with the J_nu tail over c > C (argument x_at_1/c) below tol."""
    c = 1
    while True:
        x = x_at_1 / (c + 1)
        if x * x <= 2.0 * (nu + 1):
            # |J_nu(x)| <= 2 (x/2)^nu / nu! in this range; the tail sum is
            # geometric-ish with ratio ((C+1)/(C+2))^nu
            log_head = nu * math.log(x / 2.0) - math.lgamma(nu + 1) + math.log(2.0)
            tail_factor = (c + 2) / max(nu - 1, 1)
            if log_head + math.log1p(tail_factor) < math.log(tol):
                return c
        c += 1
        if c > c_cap:
            raise ArithmeticError(
                f"Bessel tail below {tol} not reachable before c = {c_cap} (order {nu})"
            )


def exact_petersson_check(
    m: int, n: int, k: int, eigen_list: list[Eigenform] | None = None
) -> tuple[float, float]:
    """Both sides of the weight-k Petersson formula at (m, n).

    lhs = sum over eigenforms of omega_f lambda(m) lambda(n) with the
    harmonic weight omega_f = 2 pi^2 / ((k-1) L(1, sym^2 f)); rhs is the
    delta term plus the Kloosterman-Bessel sum truncated where the Bessel
    tail drops below 1e-10.
    """
    if eigen_list is None:
        from .forms import eigenforms

        eigen_list = eigenforms(k)
    if eigen_list and (m > eigen_list[0].truncation or n > eigen_list[0].truncation):
        raise ValueError("m, n exceed the eigen-data range")
    lhs = fsum_real(
        (2 * math.pi**2 / ((k - 1) * f.l_sym2)) * f.lambda_at(m) * f.lambda_at(n)
        for f in eigen_list
    )
    nu = k - 1
    x1 = 4 * math.pi * math.sqrt(m * n)
    cutoff = _bessel_cutoff(nu, x1, 1e-10)
    sign = 1.0 if k % 4 == 0 else -1.0  # i^{-k} for even k
    csum = fsum_real(
        kloosterman(m, n, c) / c * bessel_j(nu, x1 / c) for c in range(1, cutoff + 1)
    )
    rhs = (1.0 if m == n else 0.0) + 2 * math.pi * sign * csum
    return lhs, rhs


def averaged_petersson_lhs(
    m: int, n: int, w: WindowWeights, forms_by_k: Mapping[int, list[Eigenform]]
) -> float:
    """sum over even k of 2 g((k-1)/scale) (2 pi^2/(k-1)) sum_f lambda(m) lambda(n) / L."""
    ks = w.k_values()
    missing = [k for k in ks if k not in forms_by_k]
    if missing:
        raise KeyError(f"eigen-data missing for weights {missing}")
    terms = []
    for k in ks:
        inner = fsum_real(
            lambda_extended(f.lam, m) * lambda_extended(f.lam, n) / f.l_sym2
            for f in forms_by_k[k]
        )
        terms.append(2.0 * w.weight_at(k) * (2 * math.pi**2 / (k - 1)) * inner)
    return fsum_real(terms)


def averaged_petersson_rhs(
    m: int, n: int, w: WindowWeights, c_cap: int = 2000
) -> tuple[float, float, float]:
    """(main, kloosterman_term, error_budget) of the averaged formula.

    main is g^(0) scale for m = n, else 0.  The Kloosterman term carries the
    quadratic-phase transform at frequency c scale^2/(8 pi sqrt(mn)); its
    super-polynomial decay truncates the c-sum (three consecutive values
    below the floor stop the loop).  The budget is the printed fourth-moment
    bound with implied constant 1.
    """
    scale = w.scale
    root = math.sqrt(m * n)
    main = w.fourier0() * scale * (1.0 if m == n else 0.0)

    phase_base = 2.0 * math.pi * 2.0 * root
    acc = []
    quiet = 0
    for c in range(1, c_cap + 1):
        v = c * scale * scale / (8 * math.pi * root)
        hb = w.hbar_effective(v)
        # |S(m,n;c)| <= c, so sqrt(c) bounds |S|/sqrt(c)
        term_scale = abs(hb) * scale * math.sqrt(c)
        if term_scale < 1e-12:
            quiet += 1
            if quiet >= 3:
                break
        else:
            quiet = 0
        s_val = kloosterman(m, n, c)
        acc.append(s_val / math.sqrt(c) * complex(math.cos(phase_base / c), math.sin(phase_base / c)) * hb)
    total = sum(acc)
    rot = complex(math.cos(-math.pi / 4), math.sin(-math.pi / 4))
    kl_term = -math.sqrt(math.pi) * (m * n) ** (-0.25) * scale * (rot * total).imag
    budget = root / scale**4 * w.v4_budget() + (1.0 if m == n else 0.0)
    return main, kl_term, budget
