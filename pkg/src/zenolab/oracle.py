"""Brute-force survival amplitudes that bypass the pole/cut decomposition.

Three routes, each taking dimensionless time ``tau``:

* :func:`bromwich_inverse` - numerical Laplace inversion along ``Re s = c``;
* :func:`spectral_inverse` - Fourier transform of the spectral density;
* :func:`discretized_evolution` - exact diagonalization of the one-excitation
  Hamiltonian with the continuum replaced by Gauss-Legendre modes.
"""
from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, linalg

from .errors import ConvergenceError
from .model import AtomParams, form_factor_squared
from .resolvent import spectral_breakpoints, spectral_density
from .selfenergy import qbar_first_scalar

PI = math.pi


class ResolutionWarning(UserWarning):
    """Discrete level spacing too coarse to resolve the decay."""


def _quad_parts(fun, lo, hi, tau, epsabs, limit):
    """``int_lo^hi fun(x) exp(i tau x) dx`` for complex ``fun``; returns (value, error)."""
    last = [None, 0j]

    def f(x):
        if x != last[0]:
            last[0], last[1] = x, fun(x)
        return last[1]

    def fr(x):
        return f(x).real

    def fi(x):
        return f(x).imag

    kw = dict(epsabs=epsabs, epsrel=0.0, limit=limit)
    infinite = not np.isfinite(hi)
    if tau == 0.0:
        cr, e1 = integrate.quad(fr, lo, hi, **kw)
        ci, e2 = integrate.quad(fi, lo, hi, **kw)
        return complex(cr, ci), e1 + e2
    if infinite:
        kw = dict(epsabs=epsabs, limlst=200, limit=limit)
    c_r, e1 = integrate.quad(fr, lo, hi, weight="cos", wvar=tau, **kw)
    s_r, e2 = integrate.quad(fr, lo, hi, weight="sin", wvar=tau, **kw)
    c_i, e3 = integrate.quad(fi, lo, hi, weight="cos", wvar=tau, **kw)
    s_i, e4 = integrate.quad(fi, lo, hi, weight="sin", wvar=tau, **kw)
    return complex(c_r - s_i, s_r + c_i), e1 + e2 + e3 + e4


def bromwich_inverse(tau: float, params: AtomParams, abscissa: float | None = None,
                     tol: float = 1e-10, limit: int = 2000) -> complex:
    """Survival amplitude by direct inversion along ``Re s = abscissa``.

    The free resolvent ``1/(s + i a)`` is inverted exactly and only the
    remainder ``-chi Qbar / ((s + i a)(s + i a + chi Qbar))``, which decays like
    ``|s|^-3``, is integrated.  ``abscissa`` defaults to ``1/tau``; larger
    values amplify rounding by ``exp(abscissa * tau)``.
    """
    tau = float(tau)
    if not tau > 0:
        raise ValueError("bromwich_inverse needs tau > 0")
    c = 1.0 / tau if abscissa is None else float(abscissa)
    if not c > 0:
        raise ValueError("abscissa must be positive")
    a, chi = params.a, params.chi
    gain = math.exp(c * tau) / (2 * PI)
    if gain > 1e8:
        raise ConvergenceError(f"abscissa {c} amplifies errors by {gain:.1e} at tau={tau}")

    def remainder(omega):
        s = complex(c, omega)
        sq = chi * qbar_first_scalar(s)
        d0 = s + 1j * a
        return -sq / (d0 * (d0 + sq))

    w = max(50.0, 50.0 * c)
    pts = {-w, w, 0.0}
    for center in (-a, 0.0):
        for k in (1, 5, 25, 125):
            pts.update((center - k * c, center + k * c))
    pts.update((-20.0, -5.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 5.0, 20.0))
    pts = sorted(p for p in pts if -w <= p <= w)
    pieces = len(pts) + 1
    epsabs = tol / gain / (4 * pieces)

    total, err = 0j, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(pts[:-1], pts[1:]):
            val, e = _quad_parts(remainder, lo, hi, tau, epsabs, limit)
            total += val
            err += e
        val, e = _quad_parts(remainder, w, np.inf, tau, epsabs, limit)
        total += val
        err += e
        # (-inf, -w] mirrored onto [w, inf) with exp(-i omega tau)
        val, e = _quad_parts(lambda om: remainder(-om), w, np.inf, -tau, epsabs, limit)
        total += val
        err += e
    if gain * err > tol:
        raise ConvergenceError(f"Bromwich quadrature error {gain * err:.2e} > tol {tol:.1e} at tau={tau}")
    return complex(np.exp(-1j * a * tau) + gain * total)


def spectral_inverse(tau: float, params: AtomParams, tol: float = 1e-10, limit: int = 2000) -> complex:
    """Survival amplitude ``int_0^inf w(x) exp(-i x tau) dx``.

    The range is cut into a window of 50 widths around the resonance, a
    geometric ladder of wider windows, smooth pieces up to ``x = 20`` and a
    Fourier tail.
    """
    tau = float(tau)
    if tau < 0:
        raise ValueError("tau must be >= 0")
    pts = spectral_breakpoints(params)
    pieces = len(pts)
    epsabs = tol / (2 * pieces)

    def w(x):
        return complex(spectral_density(x, params)) if x > 0 else 0j

    total, err = 0j, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(pts[:-1], pts[1:]):
            val, e = _quad_parts(w, lo, hi, -tau, epsabs, limit)
            total += val
            err += e
        val, e = _quad_parts(w, pts[-1], np.inf, -tau, epsabs, limit)
        total += val
        err += e
    if err > tol:
        raise ConvergenceError(f"spectral quadrature error {err:.2e} > tol {tol:.1e} at tau={tau}")
    return complex(total)


@functools.lru_cache(maxsize=8)
def _legendre_rule(n):
    # numpy's rule is about 10x more accurate than scipy's near the endpoints, but O(n^3)
    return np.polynomial.legendre.leggauss(n)


@dataclass(frozen=True)
class DiscretizedModel:
    """One-excitation Hamiltonian: excited level ``a`` coupled to ``n_modes`` field modes.

    ``couplings[i] = sqrt(chi g(x_i) w_i)`` so that ``sum couplings**2``
    approximates ``chi * int g = chi / 6``.
    """

    n_modes: int
    nodes: np.ndarray
    weights: np.ndarray
    couplings: np.ndarray
    excited_energy: float

    @classmethod
    def build(cls, params: AtomParams, n_modes: int, x_max: float) -> "DiscretizedModel":
        if n_modes < 100:
            raise ValueError("n_modes must be >= 100")
        if x_max < 10:
            raise ValueError("x_max must be >= 10")
        t, wt = _legendre_rule(n_modes)
        nodes = 0.5 * x_max * (t + 1.0)
        weights = 0.5 * x_max * wt
        couplings = np.sqrt(params.chi * form_factor_squared(nodes) * weights)
        return cls(n_modes, nodes, weights, couplings, params.a)

    def hamiltonian(self) -> np.ndarray:
        n = self.n_modes
        h = np.zeros((n + 1, n + 1))
        h[0, 0] = self.excited_energy
        h[np.arange(1, n + 1), np.arange(1, n + 1)] = self.nodes
        h[0, 1:] = self.couplings
        h[1:, 0] = self.couplings
        return h

    def level_spacing_at(self, x: float) -> float:
        i = int(np.clip(np.searchsorted(self.nodes, x), 1, self.n_modes - 1))
        return float(self.nodes[i] - self.nodes[i - 1])


@dataclass(frozen=True)
class Eigendata:
    energies: np.ndarray
    overlaps: np.ndarray  # |<excited|v_m>|^2
    amplitudes: np.ndarray  # <excited|v_m>, for unitarity checks

    def amplitude(self, taus) -> np.ndarray:
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        return np.exp(-1j * np.outer(taus, self.energies)) @ self.overlaps

    def state(self, tau: float, vectors: np.ndarray) -> np.ndarray:
        """Full state at ``tau`` in the site basis (needs the eigenvectors)."""
        return vectors @ (np.exp(-1j * self.energies * tau) * self.amplitudes)


def diagonalize(model: DiscretizedModel, params: AtomParams | None = None, keep_vectors: bool = False):
    """Eigen-decomposition of the model; warns when the decay is unresolved."""
    if params is not None:
        width = PI * params.chi * float(form_factor_squared(params.a))
        spacing = model.level_spacing_at(params.a)
        if spacing > width:
            warnings.warn(f"level spacing {spacing:.2e} near x=a exceeds resonance width {width:.2e}",
                          ResolutionWarning, stacklevel=2)
    try:
        energies, vectors = linalg.eigh(model.hamiltonian(), driver="evr")
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"diagonalization failed: {exc}") from exc
    amps = vectors[0, :].copy()
    data = Eigendata(energies=energies, overlaps=amps * amps, amplitudes=amps)
    return (data, vectors) if keep_vectors else data


def discretized_evolution(params: AtomParams, n_modes: int, x_max: float, taus) -> np.ndarray:
    """Survival amplitudes at each ``tau`` from the diagonalized discrete model."""
    model = DiscretizedModel.build(params, n_modes, x_max)
    return diagonalize(model, params).amplitude(taus)
