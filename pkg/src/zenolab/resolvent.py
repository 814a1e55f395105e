"""Resolvent ``1 / (s + i a + chi Qbar(s))``, its second-sheet pole and spectral density."""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError
from .model import AtomParams, form_factor_squared
from .selfenergy import (
    PATCH_RADIUS,
    Sheet,
    SheetPoint,
    qbar,
    qbar_cut_edge,
    qbar_derivative,
)

PI = math.pi


@dataclass(frozen=True)
class PoleData:
    """Decay pole and its residue.

    ``s_pole`` is dimensionless; ``gamma`` and ``delta_e`` are in rad/s.
    The residue is ``residue_modulus * exp(1j * residue_phase)``.
    """

    s_pole: complex
    gamma: float
    delta_e: float
    residue_modulus: float
    residue_phase: float

    @property
    def residue(self) -> complex:
        return self.residue_modulus * complex(math.cos(self.residue_phase), math.sin(self.residue_phase))

    @property
    def lifetime(self) -> float:
        return 1.0 / self.gamma

    def as_dict(self) -> dict:
        return {
            "s_pole_re": self.s_pole.real,
            "s_pole_im": self.s_pole.imag,
            "gamma": self.gamma,
            "lifetime": self.lifetime,
            "delta_e": self.delta_e,
            "residue_modulus": self.residue_modulus,
            "residue_phase": self.residue_phase,
        }


def _pole_data(s_pole: complex, residue: complex, params: AtomParams) -> PoleData:
    lam = params.cutoff_lambda
    return PoleData(
        s_pole=complex(s_pole),
        gamma=-2.0 * lam * s_pole.real,
        delta_e=lam * (s_pole.imag + params.a),
        residue_modulus=abs(residue),
        residue_phase=math.atan2(residue.imag, residue.real),
    )


def resolvent_value(s, params: AtomParams, sheet: Sheet = Sheet.FIRST, pole_guard: float = 1e-13):
    """``1 / (s + i a + chi Qbar(s))`` on the requested sheet.

    Raises :class:`DomainError` when the denominator falls below
    ``pole_guard`` in modulus, i.e. at (numerically) a pole.
    """
    if isinstance(s, SheetPoint):
        s, sheet = s.s, s.sheet
    s = np.asarray(s, dtype=complex)
    den = s + 1j * params.a + params.chi * qbar(s, sheet)
    if np.any(np.abs(den) < pole_guard):
        raise DomainError("resolvent evaluated at a pole")
    out = 1.0 / den
    return out if np.ndim(out) else complex(out)


def find_pole(params: AtomParams, tol: float = 1e-14, max_iter: int = 50) -> PoleData:
    """Newton search for the zero of ``s + i a + chi Qbar_II(s)``, seeded at ``-i a``.

    The residue is ``1 / (1 + chi Qbar_II'(s_pole))``.
    """
    a, chi = params.a, params.chi
    s = complex(0.0, -a)
    for _ in range(max_iter):
        f = s + 1j * a + chi * qbar(s, Sheet.SECOND)
        df = 1.0 + chi * qbar_derivative(s, Sheet.SECOND)
        step = f / df
        s -= step
        if abs(s + 1j * a) >= a or min(abs(s - 1), abs(s + 1)) < PATCH_RADIUS:
            raise ConvergenceError(f"pole search left the domain around -i a (s = {s})")
        if abs(step) <= 4 * np.finfo(float).eps * abs(s):
            break
    else:
        raise ConvergenceError(f"pole search did not converge in {max_iter} iterations")
    residual = abs(s + 1j * a + chi * qbar(s, Sheet.SECOND))
    if residual >= tol:
        raise ConvergenceError(f"pole residual {residual:.3e} above tol {tol:.1e}")
    residue = 1.0 / (1.0 + chi * qbar_derivative(s, Sheet.SECOND))
    return _pole_data(s, residue, params)


def _outside_integral(f, center, delta, upper=np.inf):
    """``int_0^upper f`` with ``[center - delta, center + delta]`` removed."""
    total, err = 0.0, 0.0
    pts = [0.0, center - delta, center + delta, max(2.0, 2 * center + 2 * delta), upper]
    pieces = [(pts[0], pts[1]), (pts[2], pts[3]), (pts[3], pts[4])]
    for lo, hi in pieces:
        inner = [p for p in (center - 10 * delta, center + 10 * delta, 1.0) if lo < p < hi and np.isfinite(hi)]
        val, e = integrate.quad(f, lo, hi, points=inner or None, epsabs=1e-14, epsrel=1e-12, limit=400)
        total += val
        err += e
    return total, err


def principal_value(x0: float, deltas=None, tol: float = 1e-9) -> float:
    """``PV int_0^inf g(x) / (x - x0) dx`` by symmetric excision.

    The excised remainder is linear in the half-width, so two half-widths
    are combined by Richardson extrapolation.
    """
    if not x0 > 0:
        raise ValueError("x0 must be positive")
    if deltas is None:
        d1 = min(1e-3, x0 / 4)
        deltas = (d1, d1 / 10)
    d1, d2 = deltas

    def f(x):
        return x / (1.0 + x * x) ** 4 / (x - x0)

    i1, e1 = _outside_integral(f, x0, d1)
    i2, e2 = _outside_integral(f, x0, d2)
    if max(e1, e2) > tol:
        raise ConvergenceError(f"principal-value quadrature error {max(e1, e2):.2e} > {tol:.1e}")
    return (d1 * i2 - d2 * i1) / (d1 - d2)


def perturbative_pole(params: AtomParams, eps: float = 1e-9) -> PoleData:
    """Leading-order (golden rule) rate, level shift and pole; residue set to 1."""
    a, chi, lam = params.a, params.chi, params.cutoff_lambda
    gamma = 2 * PI * chi * lam * a / (1 + a * a) ** 4
    delta_e = chi * lam * principal_value(a)
    s_pole = -1j * a - chi * qbar(eps - 1j * a)
    return PoleData(s_pole=complex(s_pole), gamma=gamma, delta_e=delta_e,
                    residue_modulus=1.0, residue_phase=0.0)


def spectral_density(x, params: AtomParams):
    """Spectral density of the excited state at dimensionless energy ``x > 0``.

    ``w(x) = chi g(x) / [(x - a + chi Delta(x))^2 + (pi chi g(x))^2]`` with
    ``Delta`` the principal-value self-energy shift, taken from the cut-edge
    value of the closed-form ``Qbar``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("spectral density is defined for x > 0")
    edge = qbar_cut_edge(x)
    g = form_factor_squared(x)
    chi = params.chi
    shift = -np.imag(edge)
    out = chi * g / ((x - params.a + chi * shift) ** 2 + (PI * chi * g) ** 2)
    return out if out.ndim else float(out)


def resonance_center(params: AtomParams) -> float:
    """Zero of ``x - a + chi Delta(x)``, the peak of the spectral density."""
    x = params.a
    for _ in range(3):
        x = params.a + params.chi * float(np.imag(qbar_cut_edge(x)))
    return x


def spectral_breakpoints(params: AtomParams, k_window: float = 50.0, x_top: float = 20.0) -> list[float]:
    """Quadrature breakpoints for integrals over the spectral density.

    A window of ``k_window`` resonance widths around the peak, then windows
    growing tenfold until they pass ``10 x_peak``, then the form-factor scales.
    """
    x_r = resonance_center(params)
    width = PI * params.chi * float(form_factor_squared(x_r))
    pts = {0.0, 0.1, 0.5, 1.0, 2.0, 5.0, x_top}
    half = k_window * width
    while half < 10 * x_r:
        pts.update((x_r - half, x_r + half))
        half *= 10
    pts.update((0.5 * x_r, 2 * x_r, 10 * x_r))
    return sorted(p for p in pts if 0.0 <= p <= x_top)


def spectral_moments(params: AtomParams, tol: float = 1e-13) -> tuple[float, float, float]:
    """``(int w, int x w, int (x - a)^2 w)`` over ``x > 0``.

    The variance is taken about ``a``: the integrand ``(x - a)^2 w`` has no
    resonance peak, so it is computed without subtracting two large moments.
    """
    pts = spectral_breakpoints(params)
    a = params.a

    def w(x):
        return float(spectral_density(x, params)) if x > 0 else 0.0

    integrands = (w, lambda x: x * w(x), lambda x: (x - a) ** 2 * w(x))
    out = []
    for f in integrands:
        total = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            total += integrate.quad(f, lo, hi, epsabs=tol, epsrel=1e-12, limit=400)[0]
        total += integrate.quad(f, pts[-1], np.inf, epsabs=tol, epsrel=1e-12, limit=400)[0]
        out.append(total)
    return tuple(out)


@dataclass(frozen=True)
class BackgroundPole:
    """Second-sheet zero of the denominator near ``s = -1`` and its residue."""

    s: complex
    residue: complex


def _pole_free_denominator(params: AtomParams):
    """``G(s) = (s + i a + chi Qbar(s)) (s^2 - 1)^4 + 2 pi i chi s`` and ``G'``.

    ``G / (s^2 - 1)^4`` is the second-sheet denominator.
    """
    a, chi = params.a, params.chi

    def d1(s):
        return s + 1j * a + chi * qbar(s)

    def g(s):
        return d1(s) * (s * s - 1) ** 4 + 2j * PI * chi * s

    def dg(s):
        u = s * s - 1
        return (1 + chi * qbar_derivative(s)) * u**4 + d1(s) * 8 * s * u**3 + 2j * PI * chi

    return d1, g, dg


@functools.lru_cache(maxsize=64)
def form_factor_zeros(params: AtomParams, max_iter: int = 100) -> tuple[complex, ...]:
    """The four second-sheet zeros of the denominator clustered around ``s = -1``.

    Near ``s = -1`` the continuation term ``2 pi i s / (s^2 - 1)^4`` dominates,
    so ``(s + 1)^4 ~ 2 pi i chi / (16 D(-1))``; those four estimates seed a
    Newton iteration on the pole-free ``G``.
    """
    d1, g, dg = _pole_free_denominator(params)
    rho = (2j * PI * params.chi / (16 * d1(-1.0 + 0j))) ** 0.25
    roots = []
    for k in range(4):
        s = -1.0 + rho * 1j**k
        for _ in range(max_iter):
            step = g(s) / dg(s)
            s -= step
            if s.real == 0 and s.imag <= 0:
                raise ConvergenceError("form-factor pole search hit the branch cut")
            if abs(step) <= 8 * np.finfo(float).eps * abs(s):
                break
        else:
            raise ConvergenceError("form-factor pole search did not converge")
        roots.append(complex(s))
    for i, r in enumerate(roots):
        if any(abs(r - q) < 1e-6 * abs(rho) for q in roots[:i]):
            raise ConvergenceError("form-factor pole search collapsed onto a repeated root")
    return tuple(roots)


def background_poles(params: AtomParams) -> tuple[BackgroundPole, ...]:
    """Form-factor poles enclosed when the inversion contour is laid on the negative real axis.

    Of the four zeros near ``s = -1`` the two with ``Re s < 0, Im s < 0`` lie
    on the second sheet between the decay pole and the negative real axis.
    Their terms decay like ``exp(-tau)``.
    """
    _, _, dg = _pole_free_denominator(params)
    out = []
    for s in form_factor_zeros(params):
        if s.real < 0 and s.imag < 0:
            out.append(BackgroundPole(s=s, residue=complex((s * s - 1) ** 4 / dg(s))))
    return tuple(out)
