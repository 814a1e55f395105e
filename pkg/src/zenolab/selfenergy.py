"""Reduced self-energy ``Qbar(s) = -i * int_0^inf g(x) / (x - i s) dx``.

``g(x) = x / (1 + x^2)^4``.  The integral has a closed form containing
``s log s``; its logarithmic cut runs from 0 down the negative imaginary axis,
so the log used here takes its argument in ``(-pi/2, 3pi/2]``.  NumPy's
principal log would put the cut on the negative real axis, which is exactly
where the branch-cut integral of the survival amplitude is evaluated.

The second sheet is reached by crossing the cut from the right half plane:
``Qbar_II(s) = Qbar(s) + 2 pi i s / (s^2 - 1)^4``.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError

__all__ = [
    "Sheet",
    "SheetPoint",
    "qbar",
    "qbar_derivative",
    "qbar_cut_edge",
    "qbar_quadrature",
    "discontinuity",
    "qbar_first_scalar",
    "QBAR_AT_ZERO",
]

PI = math.pi

#: ``Qbar(0) = -i * int_0^inf dx / (1 + x^2)^4``
QBAR_AT_ZERO = -5j * PI / 32

# Direct evaluation near s = +-1 divides two quartic zeros; inside this radius a
# Taylor series of the whole ratio is used instead.
PATCH_RADIUS = 0.25
_TAYLOR_ORDER = 40
_CAUCHY_RADIUS = 0.6
_CAUCHY_NODES = 128


class Sheet(enum.Enum):
    FIRST = 1
    SECOND = 2


@dataclass(frozen=True)
class SheetPoint:
    """Complex Laplace variable tagged with its Riemann sheet."""

    s: complex
    sheet: Sheet = Sheet.FIRST

    def __post_init__(self):
        object.__setattr__(self, "s", complex(self.s))
        _check_domain(np.asarray(self.s), self.sheet)


def _check_domain(s, sheet):
    if sheet is Sheet.FIRST:
        on_cut = (s.real == 0) & (s.imag <= 0)
        if np.any(on_cut):
            raise DomainError("first-sheet Qbar is undefined on the cut {Re s = 0, Im s <= 0}")
    elif sheet is Sheet.SECOND:
        bad = (s == 0) | (s == 1) | (s == -1)
        if np.any(bad):
            raise DomainError("second-sheet Qbar is singular at s = 0 and s = +-1")
    else:
        raise TypeError(f"unknown sheet {sheet!r}")


def _unpack(s, sheet):
    if isinstance(s, SheetPoint):
        return np.asarray(s.s, dtype=complex), s.sheet
    return np.asarray(s, dtype=complex), sheet


def _log(s):
    ang = np.angle(s)
    ang = np.where(ang <= -PI / 2, ang + 2 * PI, ang)
    return np.log(np.abs(s)) + 1j * ang


# numerator polynomial (without the s log s term), ascending powers
_NUM = np.array(
    [-15j * PI, -(88 - 48j * PI), -45j * PI, 144, 15j * PI, -72, -3j * PI, 16],
    dtype=complex,
)
_DNUM = _NUM[1:] * np.arange(1, len(_NUM))


def _poly(c, s):
    out = np.zeros_like(s)
    for coef in c[::-1]:
        out = out * s + coef
    return out


def _direct(s):
    num = _poly(_NUM, s) - 96 * s * _log(s)
    return num / (96 * (s * s - 1) ** 4)


def _direct_derivative(s):
    u = s * s - 1
    num = _poly(_NUM, s) - 96 * s * _log(s)
    dnum = _poly(_DNUM, s) - 96 * (_log(s) + 1)
    return (dnum * u - 8 * s * num) / (96 * u**5)


def _taylor_coefficients(center):
    k = np.arange(_CAUCHY_NODES)
    nodes = center + _CAUCHY_RADIUS * np.exp(2j * PI * k / _CAUCHY_NODES)
    c = np.fft.fft(_direct(nodes)) / _CAUCHY_NODES
    n = np.arange(_TAYLOR_ORDER)
    return c[:_TAYLOR_ORDER] / _CAUCHY_RADIUS**n


_PATCHES = {1.0: _taylor_coefficients(1.0), -1.0: _taylor_coefficients(-1.0)}


def _first_sheet(s, derivative=False):
    with np.errstate(invalid="ignore", divide="ignore"):
        out = _direct_derivative(s) if derivative else _direct(s)
    for center, coef in _PATCHES.items():
        near = np.abs(s - center) < PATCH_RADIUS
        if np.any(near):
            h = s[near] - center
            if derivative:
                out[near] = _poly(coef[1:] * np.arange(1, len(coef)), h)
            else:
                out[near] = _poly(coef, h)
    return out


_NUM_LIST = [complex(c) for c in _NUM[::-1]]
_PATCH_LISTS = {center: [complex(c) for c in coef[::-1]] for center, coef in _PATCHES.items()}


def qbar_first_scalar(s: complex) -> complex:
    """Fast scalar first-sheet ``Qbar`` for quadrature kernels (no domain check)."""
    for center, coef in _PATCH_LISTS.items():
        h = s - center
        if abs(h) < PATCH_RADIUS:
            out = 0j
            for c in coef:
                out = out * h + c
            return out
    num = 0j
    for c in _NUM_LIST:
        num = num * s + c
    ang = cmath.phase(s)
    if ang <= -PI / 2:
        ang += 2 * PI
    log_s = complex(math.log(abs(s)), ang)
    u = s * s - 1
    u2 = u * u
    return (num - 96 * s * log_s) / (96 * u2 * u2)


def discontinuity(s):
    """Jump ``Qbar_II - Qbar`` across the cut, ``2 pi i s / (s^2 - 1)^4``."""
    s = np.asarray(s, dtype=complex)
    out = 2j * PI * s / (s * s - 1) ** 4
    return out if out.ndim else complex(out)


def _discontinuity_derivative(s):
    u = s * s - 1
    return 2j * PI * (u - 8 * s * s) / u**5


def qbar(s, sheet: Sheet = Sheet.FIRST):
    """Closed-form ``Qbar`` on either sheet; ``s`` may be an array or a :class:`SheetPoint`."""
    s, sheet = _unpack(s, sheet)
    _check_domain(s, sheet)
    flat = np.atleast_1d(s).astype(complex)
    out = _first_sheet(flat)
    if sheet is Sheet.SECOND:
        out = out + 2j * PI * flat / (flat * flat - 1) ** 4
    out = out.reshape(s.shape)
    return out if out.ndim else complex(out)


def qbar_derivative(s, sheet: Sheet = Sheet.FIRST):
    """``dQbar/ds`` from the differentiated closed form (series near +-1)."""
    s, sheet = _unpack(s, sheet)
    _check_domain(s, sheet)
    flat = np.atleast_1d(s).astype(complex)
    out = _first_sheet(flat, derivative=True)
    if sheet is Sheet.SECOND:
        out = out + _discontinuity_derivative(flat)
    out = out.reshape(s.shape)
    return out if out.ndim else complex(out)


def qbar_cut_edge(x):
    """Boundary value ``Qbar(0+ - i x)`` approached from ``Re s > 0``, for ``x > 0``.

    Equals ``pi g(x) - i PV int g(x') / (x' - x) dx'``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("cut-edge value needs x > 0")
    s = np.atleast_1d(-1j * x)
    num = _poly(_NUM, s) - 96 * s * (np.log(np.atleast_1d(x)) - 0.5j * PI)
    out = (num / (96 * (s * s - 1) ** 4)).reshape(x.shape)
    return out if out.ndim else complex(out)


def _g(x):
    return x / (1.0 + x * x) ** 4


def qbar_quadrature(s: complex, tol: float = 1e-12, limit: int = 400) -> complex:
    """First-sheet ``Qbar`` by adaptive quadrature of its defining integral.

    Independent of the closed form.  The range is split at ``|s|`` and at the
    near-pole ``x = -Im s`` (when ``Re s`` is small); the tail beyond
    ``X = max(4, 4|s|)`` is mapped to a finite interval by ``x = 1/u``.
    """
    s = complex(s)
    if not tol > 0:
        raise ValueError("tol must be positive")
    _check_domain(np.asarray(s), Sheet.FIRST)
    r = abs(s)
    x_tail = max(4.0, 4.0 * r)
    pts = {0.0, r, 0.1 * r, 10 * r, 1.0, x_tail}
    xc, width = -s.imag, abs(s.real)
    if xc > 0:
        for k in (-10, -1, 0, 1, 10):
            pts.add(xc + k * width)
    pts = sorted(p for p in pts if 0.0 <= p <= x_tail)

    def f(x):
        return _g(x) / (x - 1j * s)

    def f_tail(u):
        if u == 0.0:
            return 0j
        x = 1.0 / u
        return f(x) / (u * u)

    pieces = [(f, lo, hi) for lo, hi in zip(pts[:-1], pts[1:]) if hi > lo]
    pieces.append((f_tail, 0.0, 1.0 / x_tail))
    eps = tol / (2 * len(pieces))
    total = 0j
    err = 0.0
    for fun, lo, hi in pieces:
        for part in (np.real, np.imag):
            val, e = integrate.quad(lambda x: part(fun(x)), lo, hi,
                                    epsabs=eps, epsrel=0.0, limit=limit)
            total += val if part is np.real else 1j * val
            err += e
    if err > tol:
        raise ConvergenceError(f"Qbar quadrature at s={s} reached error {err:.2e} > tol {tol:.2e}")
    return -1j * total
