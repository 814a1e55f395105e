"""Survival amplitude ``y = y_pole + y_cut`` and the derived probability curves.

Time enters as ``tau = cutoff_lambda * t``.  The cut contribution is an integral
along the negative real axis ``s = -r``::

    y_cut(tau) = chi * int_0^inf r exp(-r tau) / (D(-r) [D(-r) (r^2 - 1)^4 - 2 pi i chi r]) dr
                 + sum_k R_k exp(s_k tau)

with ``D(s) = s + i a + chi Qbar(s)``.  The bracket equals
``D_II(-r) (r^2 - 1)^4``, which keeps the integrand finite at ``r = 1``.
The sum runs over the second-sheet form-factor poles of
:func:`~zenolab.resolvent.background_poles` that the deformed contour
encloses; without them ``y(0) != 1``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, asdict

import numpy as np
from scipy import integrate, optimize

from .errors import ConvergenceError
from .model import AtomParams, zeno_time
from .resolvent import PoleData, background_poles, form_factor_zeros
from .selfenergy import QBAR_AT_ZERO, qbar, qbar_first_scalar

PI = math.pi
XI_MAX = 50.0
# beyond this r the cut integrand is below chi * r**-9
R_CEILING = 1e3


@dataclass(frozen=True)
class CutQuadratureSpec:
    """How to evaluate the cut integral.

    ``adaptive_truncated`` integrates ``xi = r tau`` over ``[0, 50]`` with
    breakpoints at every scale of the integrand; ``gauss_laguerre`` is a fixed
    ``max_nodes``-point rule against ``exp(-xi)``, accurate once
    ``a * tau`` is well above 1.
    """

    method: str = "adaptive_truncated"
    tolerance: float = 1e-11
    max_nodes: int = 128

    def __post_init__(self):
        if self.method not in ("adaptive_truncated", "gauss_laguerre"):
            raise ValueError(f"unknown cut quadrature method {self.method!r}")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_nodes < 32:
            raise ValueError("max_nodes must be >= 32")


DEFAULT_SPEC = CutQuadratureSpec()


@dataclass(frozen=True)
class SurvivalSample:
    t: float
    tau: float
    y: complex
    p: float
    y_pole: complex
    y_cut: complex
    h: float
    eta: float
    p_exponential: float
    p_powerlaw: float
    p_interference: float

    def as_dict(self) -> dict:
        return asdict(self)


def tail_constant(params: AtomParams) -> float:
    """``C`` in ``y_cut ~ -chi C / (omega0 t)^2``: ``(1 - 5 pi chi / (32 a))^-2``."""
    return -(params.a**2) / (1j * params.a + params.chi * QBAR_AT_ZERO) ** 2


def _tail_constant_real(params):
    return float(np.real(tail_constant(params)))


def y_pole_term(tau, pole: PoleData, params: AtomParams | None = None):
    """``residue * exp(s_pole * tau)``."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    out = pole.residue * np.exp(pole.s_pole * tau)
    return out if out.ndim else complex(out)


def _cut_integrand(params):
    a, chi = params.a, params.chi

    def kernel(r):
        # chi r (s^2-1)^-4 / (D_I D_II) at s = -r, without exp(-r tau)
        d = complex(-r, a) + chi * qbar_first_scalar(complex(-r, 0.0))
        u = r * r - 1
        u2 = u * u
        return chi * r / (d * (d * u2 * u2 - 2j * PI * chi * r))

    return kernel


def _breakpoints(params, tau, r_max):
    a = params.a
    pts = {0.0, r_max}
    pts.update(a * k for k in (0.1, 0.5, 1.0, 2.0, 10.0))
    pts.update((0.1, 0.5, 0.8, 1.2, 2.0, 5.0, 20.0, 100.0))
    for z in form_factor_zeros(params):
        width = max(abs(z.imag), 1e-12)
        for k in (-25, -5, -1, 0, 1, 5, 25):
            pts.add(-z.real + k * width)
    if tau > 0:
        pts.update(k / tau for k in (1.0, 5.0, 20.0))
    return sorted(p for p in pts if 0.0 <= p <= r_max)


def _cut_integral_adaptive(tau, params, spec):
    kernel = _cut_integrand(params)
    r_max = R_CEILING if tau == 0 else min(XI_MAX / tau, R_CEILING)
    pts = _breakpoints(params, tau, r_max)

    last = [None, 0j]

    def f(r):
        # quad asks for the real and imaginary parts at the same nodes
        if r != last[0]:
            last[0], last[1] = r, kernel(r) * math.exp(-r * tau)
        return last[1]

    # crude size estimate so tiny segments do not chase a relative tolerance
    scale = params.chi / max(1.0, (params.a * tau) ** 2)
    epsabs = spec.tolerance * scale * 1e-3
    total, err = 0j, 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(pts[:-1], pts[1:]):
            if hi <= lo:
                continue
            re, e_re = integrate.quad(lambda r: f(r).real, lo, hi, epsabs=epsabs,
                                      epsrel=spec.tolerance, limit=spec.max_nodes)
            im, e_im = integrate.quad(lambda r: f(r).imag, lo, hi, epsabs=epsabs,
                                      epsrel=spec.tolerance, limit=spec.max_nodes)
            total += complex(re, im)
            err += e_re + e_im
    if err > 10 * (spec.tolerance * abs(total) + len(pts) * epsabs):
        raise ConvergenceError(f"cut quadrature at tau={tau:.6g} reached error {err:.2e}")
    return total


_LAGUERRE = {}


def _laguerre_rule(n):
    if n not in _LAGUERRE:
        _LAGUERRE[n] = np.polynomial.laguerre.laggauss(n)
    return _LAGUERRE[n]


def _cut_integral_laguerre(tau, params, spec):
    if tau <= 0:
        raise ValueError("Gauss-Laguerre cut quadrature needs tau > 0")
    xi, w = _laguerre_rule(spec.max_nodes)
    r = xi / tau
    a, chi = params.a, params.chi
    d = -r + 1j * a + chi * qbar(-r + 0j)
    kernel = chi * r / (d * (d * (r * r - 1) ** 4 - 2j * PI * chi * r))
    return complex(np.sum(w * kernel) / tau)


def cut_integral(tau: float, params: AtomParams, spec: CutQuadratureSpec = DEFAULT_SPEC) -> complex:
    """Negative-real-axis part of ``y_cut`` only (no form-factor poles)."""
    tau = float(tau)
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if spec.method == "gauss_laguerre":
        return _cut_integral_laguerre(tau, params, spec)
    return _cut_integral_adaptive(tau, params, spec)


def y_cut_term(tau: float, params: AtomParams, spec: CutQuadratureSpec = DEFAULT_SPEC) -> complex:
    """Non-decay-pole part of the survival amplitude at dimensionless time ``tau > 0``."""
    tau = float(tau)
    if not tau > 0:
        raise ValueError("y_cut_term needs tau > 0")
    out = cut_integral(tau, params, spec)
    for bp in background_poles(params):
        out += bp.residue * np.exp(bp.s * tau)
    return complex(out)


def y_cut_asymptotic(tau, params: AtomParams):
    """Leading large-``tau`` form ``-chi C / (a tau)^2``."""
    tau = np.asarray(tau, dtype=float)
    return -params.chi * _tail_constant_real(params) / (params.a * tau) ** 2


def survival_point(t: float, params: AtomParams, pole: PoleData,
                   spec: CutQuadratureSpec = DEFAULT_SPEC) -> SurvivalSample:
    """Full survival sample at ``t`` seconds.

    ``h`` and ``eta`` invert ``y_cut = -chi C h exp(i eta) / (omega0 t)^2``;
    ``p`` is ``|y|^2`` and the three ``p_*`` terms are its expansion into
    exponential, power-law and interference parts.
    """
    if not t > 0:
        raise ValueError("survival_point needs t > 0")
    tau = float(params.to_tau(t))
    yp = y_pole_term(tau, pole)
    yc = y_cut_term(tau, params, spec)
    y = yp + yc
    chi, c = params.chi, _tail_constant_real(params)
    wt2 = (params.a * tau) ** 2
    h = abs(yc) * wt2 / (chi * c)
    eta = math.atan2(-yc.imag, -yc.real)
    z = pole.residue_modulus
    decay = math.exp(pole.s_pole.real * tau)
    phase = -pole.s_pole.imag * tau + eta - pole.residue_phase
    p_exp = z * z * decay * decay
    p_pow = (chi * c * h / wt2) ** 2
    p_int = -2 * chi * c * z / wt2 * decay * h * math.cos(phase)
    p = abs(y) ** 2
    scale = p_exp + p_pow + abs(p_int)
    if abs(p - (p_exp + p_pow + p_int)) > 1e-10 * max(scale, 1e-300):
        raise ArithmeticError(f"probability decomposition inconsistent at t={t:g}")
    return SurvivalSample(t=float(t), tau=tau, y=y, p=p, y_pole=yp, y_cut=yc, h=h, eta=eta,
                          p_exponential=p_exp, p_powerlaw=p_pow, p_interference=p_int)


def approx_short(t, params: AtomParams):
    """Quadratic short-time law ``1 - (t / tau_Z)^2``, clamped at 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("t must be >= 0")
    out = np.maximum(0.0, 1.0 - (t / zeno_time(params)) ** 2)
    return out if out.ndim else float(out)


def approx_long(t, params: AtomParams, pole: PoleData):
    """Long-time expansion: exponential + power tail + their interference (``h = 1``, ``eta = 0``)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be > 0")
    chi, c, z = params.chi, _tail_constant_real(params), pole.residue_modulus
    wt2 = (params.omega0 * t) ** 2
    decay = np.exp(-0.5 * pole.gamma * t)
    out = (z * z * decay * decay + (chi * c / wt2) ** 2
           - 2 * chi * c * z / wt2 * decay
           * np.cos((params.omega0 - pole.delta_e) * t - pole.residue_phase))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class Crossover:
    """End of the exponential era.

    ``t_root`` solves ``(omega0 t)^2 exp(-gamma t / 2) = chi``; ``t_amplitude``
    is where ``|y_pole| = |y_cut|``.  Both in seconds, with lifetimes alongside.
    """

    t_root: float
    lifetimes_root: float
    residual: float
    t_amplitude: float
    lifetimes_amplitude: float


def _crossover_equation(u, params, pole):
    # u = gamma t
    return 2 * math.log(params.omega0 * u / pole.gamma) - 0.5 * u - math.log(params.chi)


def crossover_root(params: AtomParams, pole: PoleData, bracket=(10.0, 1e4),
                   tol: float = 1e-13, max_iter: int = 200) -> tuple[float, float]:
    """Large root of ``2 ln(omega0 t) - gamma t / 2 = ln chi``, as ``(lifetimes, residual)``.

    Newton in ``u = gamma t`` safeguarded by the bracket (bisection whenever a
    Newton step would leave it).
    """
    lo, hi = bracket
    f_lo, f_hi = _crossover_equation(lo, params, pole), _crossover_equation(hi, params, pole)
    if f_lo * f_hi > 0:
        raise ConvergenceError(f"crossover equation does not change sign on {bracket} lifetimes")
    u = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f = _crossover_equation(u, params, pole)
        if abs(f) < tol:
            break
        if f * f_lo > 0:
            lo, f_lo = u, f
        else:
            hi = u
        step = f / (2.0 / u - 0.5)
        u_new = u - step
        u = u_new if lo < u_new < hi else 0.5 * (lo + hi)
    residual = abs(_crossover_equation(u, params, pole))
    if residual >= 1e-10:
        raise ConvergenceError(f"crossover solve stalled at residual {residual:.2e}")
    return u, residual


def crossover_time(params: AtomParams, pole: PoleData,
                   spec: CutQuadratureSpec = DEFAULT_SPEC) -> Crossover:
    """Exponential-to-power-law crossover, from the equation and from the amplitudes."""
    u, residual = crossover_root(params, pole)
    lam = params.cutoff_lambda
    log_z = math.log(pole.residue_modulus)

    def log_ratio(log_u):
        tau = math.exp(log_u) / pole.gamma * lam
        return log_z + pole.s_pole.real * tau - math.log(abs(y_cut_term(tau, params, spec)))

    lo, hi = math.log(10.0), math.log(1e4)
    if log_ratio(lo) * log_ratio(hi) > 0:
        raise ConvergenceError("|y_pole| - |y_cut| does not change sign in [10, 1e4] lifetimes")
    log_u = optimize.bisect(log_ratio, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=200)
    u_amp = math.exp(log_u)
    return Crossover(t_root=u / pole.gamma, lifetimes_root=u, residual=residual,
                     t_amplitude=u_amp / pole.gamma, lifetimes_amplitude=u_amp)


def time_grid(t_min: float, t_max: float, points: int, scale: str = "log") -> np.ndarray:
    if not t_min > 0:
        raise ValueError("t_min must be positive")
    if not t_max > t_min:
        raise ValueError("t_max must exceed t_min")
    if points < 2:
        raise ValueError("need at least 2 points")
    if scale == "log":
        grid = np.geomspace(t_min, t_max, points)
    elif scale == "linear":
        grid = np.linspace(t_min, t_max, points)
    else:
        raise ValueError(f"unknown grid scale {scale!r}")
    grid[0], grid[-1] = t_min, t_max
    return grid


def timeseries(params: AtomParams, pole: PoleData, spec: CutQuadratureSpec = DEFAULT_SPEC,
               t_min: float = 1e-18, t_max: float = 1e-15, points: int = 200,
               scale: str = "log") -> list[SurvivalSample]:
    """Samples on a monotone log or linear grid in seconds."""
    out = []
    for t in time_grid(t_min, t_max, points, scale):
        try:
            out.append(survival_point(float(t), params, pole, spec))
        except (ConvergenceError, ArithmeticError) as exc:
            raise ConvergenceError(f"at t={t!r}: {exc}") from exc
    return out
