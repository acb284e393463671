"""Stationary perturbation theory for one field mode coupled to the trap.

Independent cross-check of the master-equation frequency shifts.  A single
quantized field mode of frequency ``omega_k`` couples to the trapped
relative motion through

    H = hbar omega_k (a'a + 1/2) + hbar omega (b'b + 1/2)
        + g hbar omega_k (a - a') (b b - b'b'),

with coupling ``g`` (dimensionless, tiny in any physical regime).  The
first-order level shift vanishes; the second-order shift is quadratic in
``g`` and closed-form.  Summing the single-mode result over a continuum of
modes with the angular weight of the interaction reproduces — exactly — the
anharmonic ladder of the geodesic-separation generator, which is the
corroboration this module exists to provide.

``dense_reference_shift`` goes one step further down: it diagonalises the
two-mode Hamiltonian on a truncated product space and extracts the O(g^2)
coefficient numerically, trusting no hand algebra at all.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .coeffs import VacuumCoefficients
from .fock import ladder, number_op
from .params import RESONANCE_GUARD

__all__ = [
    "PTShift",
    "single_mode_shift",
    "multimode_shift",
    "rwa_ladder_split",
    "dense_reference_shift",
]


@dataclass(frozen=True)
class PTShift:
    """Second-order level shift: trap level ``n_b``, mode occupancy ``n_a``
    (zero for vacuum runs), and the shift value itself."""

    n_b: int
    n_a: int
    value: float


def single_mode_shift(
    n_a: int,
    n_b: int,
    omega: float,
    omega_k: float,
    coupling: float,
    hbar: float = 1.0,
) -> float:
    """Second-order energy shift of level ``(n_a, n_b)`` for one field mode.

    Evaluates the closed sum over intermediate states,

        E2 = -g^2 hbar^2 w_k^2 (4 n_a n_b + 2 n_a + n_b^2 + 3 n_b + 2)
             / (2 hbar w + hbar w_k)
           + g^2 hbar^2 w_k^2 (4 n_a n_b + 2 n_a - n_b^2 + n_b)
             / (-2 hbar w + hbar w_k),

    which consolidates the four intermediate-state terms (the test suite
    re-expands them and checks the algebra for every occupancy pair).

    Raises on the resonant mode ``omega_k = 2 omega`` where the expression
    has a genuine pole.
    """
    if n_a < 0 or n_b < 0:
        raise ValueError("occupation numbers must be non-negative")
    if omega <= 0 or omega_k <= 0:
        raise ValueError("frequencies must be positive")
    if abs(omega_k - 2.0 * omega) < RESONANCE_GUARD * omega:
        raise ValueError(
            f"mode frequency {omega_k} resonant with twice the trap frequency"
        )
    pref = coupling**2 * hbar * omega_k**2
    plus_num = 4.0 * n_a * n_b + 2.0 * n_a + n_b**2 + 3.0 * n_b + 2.0
    minus_num = 4.0 * n_a * n_b + 2.0 * n_a - n_b**2 + n_b
    return float(
        -pref * plus_num / (2.0 * omega + omega_k)
        + pref * minus_num / (-2.0 * omega + omega_k)
    )


def multimode_shift(
    n_b: int, big_delta_plus: float, big_delta_minus: float
) -> float:
    """Mode-summed frequency shift of trap level ``n_b`` (units of omega).

    ``(D- - D+) n^2 - (3 D+ + D-) n`` after dropping the level-independent
    offset (a constant ``2 D+``, unobservable in any transition).  Agrees
    identically with the effective-Hamiltonian ladder of the full
    geodesic-separation generator: same n^2 and n coefficients.
    """
    if n_b < 0:
        raise ValueError("n_b must be non-negative")
    d_p, d_m = big_delta_plus, big_delta_minus
    return (d_m - d_p) * n_b**2 - (3.0 * d_p + d_m) * n_b


def rwa_ladder_split(
    c: VacuumCoefficients, n: int, renormalized: bool = True
) -> tuple[float, float]:
    """The secular coordinate-variable shift split into its two advertised
    parts: a level-independent ladder shift ``-delta_minus`` and a
    level-dependent one ``delta_minus (2n + 1)``.

    Their sum is the transition-frequency shift ``omega_{n -> n+1} - omega``
    of the secular generator, in units of omega.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    d = c.delta_minus_r if renormalized else c.delta_minus
    return (-d, d * (2 * n + 1))


def dense_reference_shift(
    n_a: int,
    n_b: int,
    omega: float,
    omega_k: float,
    *,
    couplings: tuple[float, ...] = (1e-3, 5e-4, 2.5e-4),
    dim_a: int = 12,
    dim_b: int = 12,
    hbar: float = 1.0,
) -> float:
    """O(g^2) level-shift coefficient by brute-force diagonalisation.

    Builds the two-mode Hamiltonian on a ``dim_a x dim_b`` product space,
    diagonalises it at several small couplings, follows the perturbed level
    by eigenvector overlap with the unperturbed product state, and fits
    ``shift = c2 g^2 + c4 g^4``.  Returns ``c2`` — directly comparable with
    ``single_mode_shift(..., coupling=1)``.

    The truncation must comfortably contain the intermediate states
    ``n_a +- 1, n_b +- 2``, hence the margin check.
    """
    if n_a + 2 > dim_a - 2 or n_b + 3 > dim_b - 2:
        raise ValueError(
            f"level ({n_a},{n_b}) too close to truncation ({dim_a},{dim_b})"
        )
    low_a, high_a = ladder(dim_a)
    low_b, high_b = ladder(dim_b)
    eye_a = np.eye(dim_a)
    eye_b = np.eye(dim_b)
    h0 = hbar * omega_k * np.kron(number_op(dim_a).real + 0.5 * eye_a, eye_b) + (
        hbar * omega * np.kron(eye_a, number_op(dim_b).real + 0.5 * eye_b)
    )
    # Both factors are real antisymmetric, so their Kronecker product is
    # real symmetric: the coupling is Hermitian with no phase bookkeeping.
    mode_quad = (low_a - high_a).real
    trap_quad = (low_b @ low_b - high_b @ high_b).real
    phi = hbar * omega_k * np.kron(mode_quad, trap_quad)
    target = n_a * dim_b + n_b
    e0 = hbar * omega_k * (n_a + 0.5) + hbar * omega * (n_b + 0.5)
    shifts = []
    for g in couplings:
        vals, vecs = np.linalg.eigh(h0 + g * phi)
        overlaps = np.abs(vecs[target, :])
        k = int(np.argmax(overlaps))
        if overlaps[k] ** 2 < 0.5:
            raise RuntimeError(
                f"cannot follow level ({n_a},{n_b}) at coupling {g}: "
                f"best overlap^2 {overlaps[k]**2:.3f}"
            )
        shifts.append(vals[k] - e0)
    gs = np.asarray(couplings)
    design = np.stack([gs**2, gs**4], axis=1)
    c2, _ = np.linalg.lstsq(design, np.asarray(shifts), rcond=None)[0]
    return float(c2)
