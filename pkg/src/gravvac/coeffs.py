"""Master-equation coefficients: closed forms and a quadrature oracle.

Two families of vacuum-induced constants appear in the harmonic-trap master
equations, one per separation variable:

* coordinate separation: decay rate ``gamma`` and frequency shifts
  ``delta_plus`` / ``delta_minus`` with a logarithmic cutoff dependence;
* geodesic separation: the same decay rate and shifts ``big_delta_plus`` /
  ``big_delta_minus`` whose leading cutoff dependence is cubic.

Both shift families are principal-value mode integrals.  With u = Omega/omega
and lam the cutoff ratio, the radial integrals are

    I_pm(lam) = PV int_0^lam u   / (2 +- u) du = +-lam   - 2 ln|(lam +- 2)/2|
    J_pm(lam) = PV int_0^lam u^3 / (2 +- u) du
              = +-lam^3/3 - lam^2 + 4 lam - 8 ln|(lam +- 2)/2|   (upper signs)

and the shifts in units of omega are delta_pm = (gamma/4 pi) I_pm and
Delta_pm = (gamma/16 pi) J_pm.  Renormalization subtracts the free-particle
(trap-independent) part: the linear term for the coordinate shifts, the
quadratic term for the geodesic shifts.

``quadrature_oracle`` re-evaluates the same integrals numerically — the
angular factors analytically, the radial part by panel Gauss-Legendre with
symmetric pole excision and Richardson extrapolation — and is the independent
check that the closed-form antiderivatives and principal-value limits above
are right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .params import RESONANCE_GUARD, PhysicalParams, DimensionlessParams

__all__ = [
    "VacuumCoefficients",
    "ConvergenceError",
    "gamma_rate",
    "shifts_x",
    "shifts_xi",
    "free_particle_constants",
    "quadrature_oracle",
    "vacuum_coefficients",
]

# Angular integrals of the mode sum, done analytically:
# int_0^pi sin^5(theta) dtheta = 16/15,  int_0^{2 pi} cos^2(2 phi) dphi = pi.
ANGULAR_THETA = 16.0 / 15.0
ANGULAR_PHI = math.pi

# Radial prefactors in units of gamma_bar.  Chaining the mode density
# 1/(2 pi)^3, the squared coupling, and the angular factors above gives
# gamma_bar/(4 pi) for the coordinate shifts and gamma_bar/(16 pi) for the
# geodesic shifts once the angular integrals are divided back out.
_PREF_X = 15.0 / (64.0 * math.pi**2)
_PREF_XI = 15.0 / (256.0 * math.pi**2)


@dataclass(frozen=True)
class VacuumCoefficients:
    """Bundle of every master-equation constant, in units of omega.

    The four ``free_*``/``mu_xi`` fields belong to the free-particle sector
    and are only populated when SI parameters are supplied; they default to
    None in purely dimensionless workflows.
    """

    gamma: float
    delta_plus: float
    delta_minus: float
    delta_plus_r: float
    delta_minus_r: float
    big_delta_plus: float
    big_delta_minus: float
    big_delta_plus_r: float
    big_delta_minus_r: float
    lambda_cut: float
    free_delta_x: float | None = None
    free_delta_xi: float | None = None
    free_gamma_xi: float | None = None
    mu_xi: float | None = None


def _guard_lambda(lam: float) -> None:
    if lam <= 2.0:
        raise ValueError("lambda_cut must exceed 2")
    if abs(lam - 2.0) < RESONANCE_GUARD:
        raise ValueError("lambda_cut too close to the two-boson resonance at 2")


def gamma_rate(d: DimensionlessParams) -> float:
    """Decay rate in units of omega (the stored, scale-applied gamma_bar)."""
    return d.gamma_bar


def shifts_x(d: DimensionlessParams) -> tuple[float, float, float, float]:
    """Coordinate-separation shifts (delta+, delta-, delta+R, delta-R).

    delta_pm   = (gamma/2 pi) (+-lam/2 - ln|(lam +- 2)/2|)
    delta_pm_R = -(gamma/2 pi) ln|(lam +- 2)/2|

    The renormalized values drop the linear-in-cutoff term, leaving the pure
    logarithm; the identity delta_pm_R - delta_pm = -+(gamma/2 pi)(lam/2) is
    exact and tested at machine precision.
    """
    _guard_lambda(d.lambda_cut)
    lam = d.lambda_cut
    pref = d.gamma_bar / (2.0 * math.pi)
    log_p = math.log((lam + 2.0) / 2.0)
    log_m = math.log(abs(lam - 2.0) / 2.0)
    delta_p = pref * (lam / 2.0 - log_p)
    delta_m = pref * (-lam / 2.0 - log_m)
    return delta_p, delta_m, -pref * log_p, -pref * log_m


def shifts_xi(d: DimensionlessParams) -> tuple[float, float, float, float]:
    """Geodesic-separation shifts (Delta+, Delta-, Delta+R, Delta-R).

    Delta_pm   = (gamma/2 pi) (+-lam^3/24 - lam^2/8 +- lam/2 - ln|(lam +- 2)/2|)
    Delta_pm_R = Delta_pm + (gamma/2 pi) lam^2/8

    Renormalization removes the quadratic (free-particle) term only; the
    cubic term survives and dominates for large cutoff — the headline
    contrast with the logarithmic coordinate-separation shifts.
    """
    _guard_lambda(d.lambda_cut)
    lam = d.lambda_cut
    pref = d.gamma_bar / (2.0 * math.pi)
    log_p = math.log((lam + 2.0) / 2.0)
    log_m = math.log(abs(lam - 2.0) / 2.0)
    big_p = pref * (lam**3 / 24.0 - lam**2 / 8.0 + lam / 2.0 - log_p)
    big_m = pref * (-(lam**3) / 24.0 - lam**2 / 8.0 - lam / 2.0 - log_m)
    quad = pref * lam**2 / 8.0
    return big_p, big_m, big_p + quad, big_m + quad


def free_particle_constants(p: PhysicalParams) -> tuple[float, float, float, float]:
    """Free-particle constants (Delta_x, Delta_xi, gamma_xi, mu_xi) in SI.

    Delta_x  = (32/15 pi) t_p^2 Omega_max / hbar      [1/J]
    Delta_xi = (8/15 pi) t_p^2 Omega_max^2            [dimensionless]
    gamma_xi = Delta_xi / (2 hbar^2 mu)
    mu_xi    = mu (1 - Delta_xi)^{-1}                 [kg]

    Raises ValueError when Delta_xi >= 1 (renormalized-mass pole).
    """
    tp2 = p.t_p**2
    delta_x = (32.0 / (15.0 * math.pi)) * tp2 * p.omega_max / p.hbar
    delta_xi = (8.0 / (15.0 * math.pi)) * tp2 * p.omega_max**2
    if delta_xi >= 1.0:
        raise ValueError("Delta_xi >= 1: renormalized mass diverges")
    gamma_xi = delta_xi / (2.0 * p.hbar**2 * p.mu)
    mu_xi = p.mu / (1.0 - delta_xi)
    return delta_x, delta_xi, gamma_xi, mu_xi


def vacuum_coefficients(d: DimensionlessParams,
                        physical: PhysicalParams | None = None) -> VacuumCoefficients:
    """Assemble the full coefficient bundle for generator construction."""
    dp, dm, dpr, dmr = shifts_x(d)
    bp, bm, bpr, bmr = shifts_xi(d)
    free: tuple[float, float, float, float] | tuple[None, None, None, None]
    free = free_particle_constants(physical) if physical is not None else (None,) * 4
    return VacuumCoefficients(
        gamma=d.gamma_bar,
        delta_plus=dp, delta_minus=dm, delta_plus_r=dpr, delta_minus_r=dmr,
        big_delta_plus=bp, big_delta_minus=bm,
        big_delta_plus_r=bpr, big_delta_minus_r=bmr,
        lambda_cut=d.lambda_cut,
        free_delta_x=free[0], free_delta_xi=free[1],
        free_gamma_xi=free[2], mu_xi=free[3],
    )


# ---------------------------------------------------------------------------
# quadrature oracle
# ---------------------------------------------------------------------------

_KINDS = {
    "shift_x_plus": (1, +1, _PREF_X),
    "shift_x_minus": (1, -1, _PREF_X),
    "shift_xi_plus": (3, +1, _PREF_XI),
    "shift_xi_minus": (3, -1, _PREF_XI),
}


def _gauss_panels(f, edges: np.ndarray, order: int) -> float:
    """Composite Gauss-Legendre over consecutive [edges[i], edges[i+1]] panels."""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        half = 0.5 * (b - a)
        mid = 0.5 * (b + a)
        total += half * float(np.sum(weights * f(mid + half * nodes)))
    return total


def _graded_edges(far: float, near: float, pole: float, side: int, n_panels: int) -> np.ndarray:
    """Panel edges between distances ``far`` and ``near`` from the pole,
    geometrically refined toward the pole; ``side`` is -1 (left) or +1 (right)."""
    dists = far * (near / far) ** (np.arange(n_panels + 1) / n_panels)
    edges = pole + side * dists
    return edges[::-1] if side > 0 else edges


def _pv_radial(power: int, sign: int, lam: float, n_points: int) -> float:
    """PV int_0^lam u^power / (2 + sign*u) du.

    Regular for sign=+1.  For sign=-1 the pole at u=2 is excised over a
    symmetric window [2-eps, 2+eps]; the excision error is odd in eps, so one
    Richardson step (2*I(eps/2) - I(eps)) removes the O(eps) term.
    """
    def f(u: np.ndarray) -> np.ndarray:
        return u**power / (2.0 + sign * u)

    n_panels = 24
    order = max(8, n_points // (4 * n_panels))
    if sign > 0:
        return _gauss_panels(f, np.linspace(0.0, lam, n_panels + 1), order)

    eps0 = 1e-3 * min(1.0, lam - 2.0)

    def excised(eps: float) -> float:
        left = _graded_edges(2.0, eps, 2.0, -1, n_panels)
        right = _graded_edges(lam - 2.0, eps, 2.0, +1, n_panels)
        return _gauss_panels(f, left, order) + _gauss_panels(f, right, order)

    return 2.0 * excised(eps0 / 2.0) - excised(eps0)


def quadrature_oracle(kind: str, d: DimensionlessParams, n_points: int = 4096,
                      check_tol: float | None = None) -> float:
    """Numerically evaluate one shift coefficient from its mode integral.

    The angular integrals are analytic constants (``ANGULAR_THETA``,
    ``ANGULAR_PHI``); the radial principal-value integral is done by panel
    quadrature, which is where closed forms can actually go wrong.

    Parameters
    ----------
    kind : str
        One of shift_x_plus, shift_x_minus, shift_xi_plus, shift_xi_minus.
    n_points : int
        Total radial point budget, >= 64.
    check_tol : float, optional
        When given, the integral is re-evaluated at double the budget and a
        relative change above ``check_tol`` raises :class:`ConvergenceError`.
    """
    if kind not in _KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    if n_points < 64:
        raise ValueError("n_points must be at least 64")
    _guard_lambda(d.lambda_cut)
    power, sign, pref = _KINDS[kind]
    scale = d.gamma_bar * pref * ANGULAR_THETA * ANGULAR_PHI
    value = scale * _pv_radial(power, sign, d.lambda_cut, n_points)
    if check_tol is not None:
        refined = scale * _pv_radial(power, sign, d.lambda_cut, 2 * n_points)
        denom = max(abs(refined), 1e-300)
        if abs(refined - value) > check_tol * denom:
            raise ConvergenceError(
                f"{kind} quadrature not converged at n_points={n_points}")
        value = refined
    return value
