"""Physical constants and the SI -> dimensionless parameter boundary.

Everything downstream of this module runs in dimensionless units: time in
1/omega, rates and frequency shifts in units of omega.  The reason is scale:
the vacuum-induced decay rate for a laboratory-frequency trap is of order
10^-78 s^-1, which underflows any finite-time integration.  ``coupling_scale``
is the explicit, logged amplification factor that makes desk-scale runs
possible; every quoted result is covariant in it (rates scale linearly), so
nothing physical depends on its value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

# CODATA 2018 values.
G_NEWTON = 6.67430e-11  # m^3 kg^-1 s^-2
HBAR = 1.054571817e-34  # J s
C_LIGHT = 299792458.0  # m/s (exact)

#: Dimensionless prefactor of the vacuum decay rate, Gamma = (32/15) G hbar omega^3 / c^5.
RATE_PREFACTOR = 32.0 / 15.0

#: Reject cutoff ratios this close to the two-boson resonance at lambda = 2;
#: the frequency-shift logarithm diverges there and no regularization is offered.
RESONANCE_GUARD = 1e-9


def planck_time(G: float = G_NEWTON, hbar: float = HBAR, c: float = C_LIGHT) -> float:
    """Planck time sqrt(G*hbar/c^5) in seconds."""
    return math.sqrt(G * hbar / c**5)


def vacuum_decay_rate(omega: float, G: float = G_NEWTON, hbar: float = HBAR,
                      c: float = C_LIGHT) -> float:
    """Two-boson vacuum decay rate Gamma = (32/15) G hbar omega^3 / c^5, in 1/s.

    Cubic in the trap frequency; zero at omega = 0 (no trap, no resonance).
    """
    return RATE_PREFACTOR * G * hbar * omega**3 / c**5


@dataclass(frozen=True)
class PhysicalParams:
    """Laboratory-side parameters in SI units.

    Parameters
    ----------
    mu : float
        Reduced mass of the particle pair (kg).
    omega : float
        Trap angular frequency (rad/s).  Zero selects the free-particle
        sector, which is handled by :mod:`gravvac.freepart`.
    omega_max : float
        UV cutoff angular frequency of the mode integrals (rad/s).
    G, hbar, c : float
        Fundamental constants; override only for unit experiments.

    The Planck time ``t_p`` is derived, never supplied.
    """

    mu: float
    omega: float
    omega_max: float
    G: float = G_NEWTON
    hbar: float = HBAR
    c: float = C_LIGHT
    t_p: float = field(default=0.0)

    def __post_init__(self) -> None:
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")
        if self.omega_max <= 0:
            raise ValueError("omega_max must be positive")
        derived = planck_time(self.G, self.hbar, self.c)
        if self.t_p == 0.0:
            object.__setattr__(self, "t_p", derived)
        elif not math.isclose(self.t_p**2, derived**2, rel_tol=1e-12):
            raise ValueError("t_p inconsistent with sqrt(G*hbar/c^5)")


@dataclass(frozen=True)
class DimensionlessParams:
    """Trap parameters scaled by omega.

    ``lambda_cut`` is the cutoff ratio Omega_max/omega and ``gamma_bar`` the
    decay rate in units of omega (coupling_scale already applied).
    """

    lambda_cut: float
    gamma_bar: float
    coupling_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.lambda_cut <= 2.0:
            raise ValueError("lambda_cut must exceed 2 (resonance inside the mode range)")
        if self.gamma_bar < 0:
            raise ValueError("gamma_bar must be non-negative")


def to_dimensionless(p: PhysicalParams, coupling_scale: float = 1.0) -> DimensionlessParams:
    """Convert SI parameters to the dimensionless set used by all dynamics.

    Raises
    ------
    ValueError
        If ``omega`` is zero (use the free-particle module instead), if the
        cutoff ratio does not exceed 2, or if the scale is negative.
    """
    if p.omega == 0:
        raise ValueError("omega == 0 has no harmonic sector; use the free-particle module")
    if coupling_scale < 0:
        raise ValueError("coupling_scale must be non-negative")
    lam = p.omega_max / p.omega
    if lam <= 2.0:
        raise ValueError("omega_max must exceed 2*omega")
    gamma_bar = coupling_scale * vacuum_decay_rate(p.omega, p.G, p.hbar, p.c) / p.omega
    return DimensionlessParams(lambda_cut=lam, gamma_bar=gamma_bar,
                               coupling_scale=coupling_scale)
