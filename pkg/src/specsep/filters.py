"""Smooth low-pass filter profiles and the localized trigonometric kernel.

The kernel used everywhere downstream is

    Phi_n(x) = hbar_n * sum_{|l| < n} H(|l|/n) e^{i l x},
    hbar_n   = 1 / sum_{|l| < n} H(|l|/n),

where ``H`` is an even C^inf profile equal to 1 on [0, 1/2], 0 on [1, inf),
and monotone in between.  ``Phi_n`` peaks at 0 with ``Phi_n(0) = 1`` and decays
like ``(n|x|)^{-S}`` where ``S`` is the smoothness order of the profile.

The shipped profile ramps down with the integral of the standard bump
``h(u) = exp(-1/(1 - u^2))``, which makes every derivative vanish at the ends
of the transition band.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from numpy.polynomial import polynomial as _poly
from scipy.integrate import quad

__all__ = [
    "LowPassFilter",
    "KernelConfig",
    "make_bump_filter",
    "hbar",
    "kernel_eval",
    "kernel_grid",
    "spectrum_grid",
    "eval_trig_poly",
]

# Degree of the cached Chebyshev expansion of the bump antiderivative.  The
# bump is C^inf on [-1, 1] so convergence is super-algebraic; 700 keeps the
# ramp within ~1e-13 of adaptive quadrature (checked against the quad oracle
# in the test suite).
_CHEB_DEGREE = 700

_QUAD_RTOL = 1e-8


def _bump(u):
    """exp(-1/(1-u^2)) on (-1, 1), 0 outside; accepts arrays."""
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


@lru_cache(maxsize=1)
def _bump_ramp():
    """Return (ramp, Z): ramp(u) ~ (1/Z) int_u^1 h, and Z = int_{-1}^1 h."""
    cheb = _cheb.Chebyshev.interpolate(lambda u: _bump(u), deg=_CHEB_DEGREE)
    anti = cheb.integ()
    z = float(anti(1.0) - anti(-1.0))
    top = float(anti(1.0))

    def ramp(u):
        u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
        return (top - anti(u)) / z

    return ramp, z


@lru_cache(maxsize=32)
def _bump_deriv_poly(order: int) -> tuple:
    """Polynomial P_k with h^(k)(u) = h(u) * P_k(u) / (1-u^2)^(2k).

    Follows from h' = h * g' with g = -1/(1-u^2):
    P_1 = -2u and P_{k+1} = D*(P_k'*D + 4k*u*P_k) - 2u*P_k, D = 1-u^2.
    Coefficients are exact integers.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    d = _poly.Polynomial([1.0, 0.0, -1.0])
    u = _poly.Polynomial([0.0, 1.0])
    p = -2.0 * u
    for k in range(1, order):
        p = d * (p.deriv() * d + 4.0 * k * u * p) - 2.0 * u * p
    return tuple(p.coef)


def _bump_deriv(u, order: int):
    """h^(order)(u) evaluated exactly through the recurrence polynomial."""
    u = np.asarray(u, dtype=float)
    coef = np.asarray(_bump_deriv_poly(order))
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    d = 1.0 - ui * ui
    out[inside] = _bump(ui) * _poly.polyval(ui, coef) / d ** (2 * order)
    return out


def _abs_integral(f: Callable[[np.ndarray], np.ndarray], roots: np.ndarray) -> float:
    """Integrate |f| over [-1, 1] splitting at interior sign changes."""
    pts = np.concatenate(([-1.0], np.sort(roots), [1.0]))
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b - a < 1e-14:
            continue
        val, _ = quad(lambda x: abs(float(f(np.array([x]))[0])), a, b,
                      epsabs=0.0, epsrel=_QUAD_RTOL, limit=200)
        total += val
    return total


def _interior_roots(coef: tuple) -> np.ndarray:
    r = _poly.Polynomial(np.asarray(coef)).roots()
    r = r[np.abs(r.imag) < 1e-9].real
    return r[(r > -1.0) & (r < 1.0)]


@dataclass(frozen=True)
class LowPassFilter:
    """Even C^S profile H with H=1 on [0,1/2], H=0 on [1,inf).

    ``deriv_l1`` caches L1 norms of derivatives on construction; they feed the
    localization constant and the Euler-Maclaurin style bounds, so they are
    computed by adaptive quadrature to 1e-8 relative tolerance.
    """

    smoothness: int
    profile: Callable[[np.ndarray], np.ndarray]
    norm_l1: float
    deriv_l1: dict = field(default_factory=dict, compare=False)
    name: str = "bump"

    def __post_init__(self):
        if int(self.smoothness) != self.smoothness or self.smoothness < 2:
            raise ValueError("smoothness order must be an integer >= 2")
        self._validate_profile()

    def _validate_profile(self):
        t = np.linspace(0.0, 1.5, 301)
        v = self(t)
        if np.any(v < -1e-12) or np.any(v > 1.0 + 1e-12):
            raise ValueError("profile must take values in [0, 1]")
        if not np.allclose(self(t[t <= 0.5]), 1.0, atol=1e-12):
            raise ValueError("profile must be 1 on [0, 1/2]")
        if not np.allclose(self(t[t >= 1.0]), 0.0, atol=1e-12):
            raise ValueError("profile must vanish on [1, inf)")
        probe = np.linspace(-1.2, 1.2, 97)
        if not np.allclose(self(probe), self(-probe), atol=1e-12):
            raise ValueError("profile must be even")

    def __call__(self, t):
        t = np.abs(np.asarray(t, dtype=float))
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = self.profile(t)
        return float(out[0]) if scalar else out

    def power_l1(self, p: int) -> float:
        """L1 norm of H^p over the line (= integral, H is nonnegative)."""
        key = ("power", p)
        if key not in self.deriv_l1:
            val, _ = quad(lambda x: float(self(x)) ** p, 0.0, 1.0,
                          epsabs=0.0, epsrel=_QUAD_RTOL, limit=200)
            self.deriv_l1[key] = 2.0 * val
        return self.deriv_l1[key]

    def deriv_norm(self, order: int) -> float:
        """L1 norm of the order-th derivative of H."""
        if order < 1:
            raise ValueError("derivative order must be >= 1")
        if order not in self.deriv_l1:
            raise KeyError(f"derivative norm of order {order} was not cached; "
                           f"construct the filter with enough smoothness")
        return self.deriv_l1[order]

    @property
    def localization_constant(self) -> float:
        """L = (14 sqrt(2 pi) / 3) * ||H^(S)||_1 / ||H||_1."""
        return (14.0 * math.sqrt(2.0 * math.pi) / 3.0) * \
            self.deriv_norm(self.smoothness) / self.norm_l1


@lru_cache(maxsize=8)
def make_bump_filter(smoothness: int = 4) -> LowPassFilter:
    """Build the integrated-bump profile with derivative norms cached.

    The ramp on |t| in [1/2, 1] is Psi(4|t|-3) with
    Psi(u) = int_u^1 h / int_{-1}^1 h, so
    H^(S)(t) = -(4^S / Z) h^(S-1)(4|t|-3) on the ramp and
    ||H^(S)||_1 = 2 * 4^(S-1) / Z * int_{-1}^1 |h^(S-1)|.
    """
    ramp, z = _bump_ramp()

    def profile(t: np.ndarray) -> np.ndarray:
        t = np.abs(t)
        out = np.zeros_like(t)
        out[t <= 0.5] = 1.0
        mid = (t > 0.5) & (t < 1.0)
        out[mid] = ramp(4.0 * t[mid] - 3.0)
        return out

    norms = {}
    for order in range(2, smoothness + 1):
        k = order - 1
        coef = _bump_deriv_poly(k)
        roots = _interior_roots(coef)
        integral = _abs_integral(lambda u, k=k: _bump_deriv(u, k), roots)
        norms[order] = 2.0 * 4.0 ** (order - 1) / z * integral
    # ||H'||_1 = 2 * int |H'| = 2 * (H(1/2) - H(1)) = 2 exactly.
    norms[1] = 2.0

    return LowPassFilter(smoothness=smoothness, profile=profile,
                         norm_l1=1.5, deriv_l1=norms)


def _next_pow2(m: int) -> int:
    return 1 << max(0, (m - 1).bit_length())


@dataclass(frozen=True)
class KernelConfig:
    """Kernel order n plus the evaluation grid for [-pi, pi).

    The grid must satisfy grid_size >= ceil(4 pi n) so that the grid maximum
    of any degree-n trigonometric polynomial is at least half its sup norm.
    The default (next power of two >= 16 n) always satisfies that.
    """

    n: int
    filter: LowPassFilter = field(default_factory=make_bump_filter)
    grid_size: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("kernel order n must be >= 1")
        if self.grid_size == 0:
            object.__setattr__(self, "grid_size", _next_pow2(16 * self.n))
        if self.grid_size < math.ceil(4.0 * math.pi * self.n):
            raise ValueError(
                f"grid_size {self.grid_size} violates the mesh condition "
                f">= ceil(4 pi n) = {math.ceil(4.0 * math.pi * self.n)}")

    @property
    def grid(self) -> np.ndarray:
        return -np.pi + 2.0 * np.pi * np.arange(self.grid_size) / self.grid_size

    @property
    def grid_step(self) -> float:
        return 2.0 * np.pi / self.grid_size

    @cached_property
    def taper(self) -> np.ndarray:
        """hbar_n * H(|l|/n) for l = -(n-1) .. n-1."""
        ell = np.arange(-(self.n - 1), self.n)
        h = self.filter(np.abs(ell) / self.n)
        out = hbar(self.filter, self.n) * h
        out.setflags(write=False)
        return out


@lru_cache(maxsize=256)
def _hbar_cached(filt: LowPassFilter, n: int) -> float:
    ell = np.arange(-(n - 1), n)
    vals = filt(np.abs(ell) / n)
    return 1.0 / math.fsum(vals.tolist())


def hbar(filt: LowPassFilter, n: int) -> float:
    """Normalizer 1 / sum_{|l|<n} H(|l|/n); satisfies
    4/(5||H||_1) <= n*hbar_n <= 4/(3||H||_1) once n clears the ncond bound."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _hbar_cached(filt, n)


def eval_trig_poly(coeffs: np.ndarray, grid_size: int) -> np.ndarray:
    """Evaluate sum_l c_l e^{ilx} on x_j = -pi + 2 pi j / G via one FFT.

    ``coeffs`` holds c_l for l = -(m-1) .. m-1 (odd length).  Needs
    G >= len(coeffs) so no two coefficients alias to the same bin.
    """
    coeffs = np.asarray(coeffs)
    m = (coeffs.size + 1) // 2
    if coeffs.size != 2 * m - 1:
        raise ValueError("coefficient array must have odd length")
    if grid_size < coeffs.size:
        raise ValueError("grid smaller than the coefficient support")
    ell = np.arange(-(m - 1), m)
    # e^{il(-pi)} = (-1)^l folded into the bins.
    b = np.zeros(grid_size, dtype=complex)
    signs = np.where(ell % 2 == 0, 1.0, -1.0)
    b[np.mod(ell, grid_size)] = coeffs * signs
    return grid_size * np.fft.ifft(b)


def spectrum_grid(moments: np.ndarray, config: KernelConfig) -> np.ndarray:
    """sigma_n on the grid: hbar_n sum_{|l|<n} H(|l|/n) mu(l) e^{ilx}.

    ``moments`` holds mu(l) for l = -(n-1) .. n-1.  This is the single code
    path shared by the 1D recovery, the kernel grid, and the sliding-window
    operator, so their outputs agree bit for bit on identical input.
    """
    moments = np.asarray(moments, dtype=complex)
    if moments.size != 2 * config.n - 1:
        raise ValueError(f"expected {2 * config.n - 1} moments, got {moments.size}")
    return eval_trig_poly(moments * config.taper, config.grid_size)


def kernel_eval(filt: LowPassFilter, n: int, x) -> np.ndarray:
    """Phi_n(x) by direct cosine summation (real, even; Phi_n(0) = 1)."""
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    ell = np.arange(1, n)
    h = filt(ell / n)
    acc = 1.0 + 2.0 * np.cos(np.outer(x, ell)) @ h
    out = hbar(filt, n) * acc
    return float(out[0]) if scalar else out


def kernel_grid(config: KernelConfig) -> tuple[np.ndarray, np.ndarray]:
    """(grid, Phi_n on grid) through the shared FFT path."""
    vals = spectrum_grid(np.ones(2 * config.n - 1), config)
    if np.max(np.abs(vals.imag)) > 1e-12:
        raise AssertionError("kernel grid should be real up to roundoff")
    return config.grid, vals.real
