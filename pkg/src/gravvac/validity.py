"""Physical-consistency checks for the truncated generators.

Two families of diagnostics live here.  The first is exact at any size:
every generator must annihilate the trace, and ``check_trace_annihilation``
measures the worst violation over a Hermitian probe basis.  The second is
the short-time positivity analysis for thermal seeds.  Expanding the evolved
state to first order in time turns a geometric diagonal seed into a sparse
Hermitian matrix -- a perturbed diagonal plus one band four places off the
diagonal -- whose entries follow closed formulas in the seed weights.  Its
smallest eigenvalue, and a determinant recursion over four decoupled
tridiagonal chains, give a practical ceiling on how many levels a register
may retain before the (non-completely-positive) generator pushes a thermal
seed below zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coeffs import VacuumCoefficients
from .fock import EIGENVALUE_FLOOR
from .generators import Liouvillian

# The counter-rotating block couples level m to m +/- 4 only, so the
# first-order state decouples into this many independent chains.
_CHAIN_PERIOD = 4

_SWEEP_START = 4
_SWEEP_CEILING = 64


@dataclass(frozen=True)
class PositivityReport:
    """Outcome of a single-size positivity probe plus the analytic ceilings.

    ``passed`` is equivalent to ``min_eigenvalue >= EIGENVALUE_FLOOR``; the
    two bound readings are the floors returned by :func:`n_max_bound`.
    """

    dim_tested: int
    gamma_t: float
    min_eigenvalue: float
    passed: bool
    bound_reading_a: int
    bound_reading_b: int


def thermal_weights(beta_bar: float, count: int) -> np.ndarray:
    """Geometric level weights ``(1 - q) q^m`` with ``q = exp(-beta_bar)``.

    Normalized over the infinite ladder, not the retained block: the tail
    mass is part of the analysis here, unlike ``fock.thermal_state`` which
    renormalizes whatever the register keeps.
    """
    if beta_bar <= 0.0:
        raise ValueError("beta_bar must be positive")
    q = math.exp(-beta_bar)
    return (1.0 - q) * q ** np.arange(count, dtype=float)


def first_order_state(
    beta_bar: float,
    gamma_t: float,
    coeffs: VacuumCoefficients,
    n: int,
    *,
    renormalized: bool = True,
) -> np.ndarray:
    """Thermal seed plus its first time derivative, on levels ``0..n``.

    Acting once with the geodesic-separation generator on a geometric
    diagonal seed produces a matrix that is diagonal apart from entries four
    places off the diagonal.  Both bands have closed forms in the seed
    weights, so the matrix is written down directly -- no generator is
    built, and the result is free of truncation artifacts at every size.

    Parameters
    ----------
    beta_bar:
        Dimensionless inverse temperature of the seed.
    gamma_t:
        Two-quantum decay rate times the elapsed time.  The short-time
        expansion is only meaningful for ``gamma_t`` well below one.
    coeffs:
        Constant bundle; only the shift-to-decay ratios enter, so the
        result depends on the cutoff but not on the overall rate.
    n:
        Highest retained level; the result is ``(n + 1) x (n + 1)``.
    renormalized:
        Use the cutoff-subtracted shift constants (default) or the bare
        ones.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if gamma_t < 0.0:
        raise ValueError("gamma_t must be non-negative")
    sig = thermal_weights(beta_bar, n + 5)
    m = np.arange(n + 1, dtype=float)
    diag = sig[: n + 1] + gamma_t * (
        (m + 1.0) * (m + 2.0) * sig[2 : n + 3] - m * (m - 1.0) * sig[: n + 1]
    )
    out = np.diag(diag.astype(complex))
    if n >= 4 and gamma_t > 0.0:
        if coeffs.gamma <= 0.0:
            raise ValueError("gamma_t > 0 requires coefficients with gamma > 0")
        if renormalized:
            d_plus, d_minus = coeffs.big_delta_plus_r, coeffs.big_delta_minus_r
        else:
            d_plus, d_minus = coeffs.big_delta_plus, coeffs.big_delta_minus
        ratio_plus = d_plus / coeffs.gamma
        ratio_minus = d_minus / coeffs.gamma
        k = np.arange(n - 3, dtype=float)
        root = np.sqrt((k + 1.0) * (k + 2.0) * (k + 3.0) * (k + 4.0))
        band = (
            root
            * (
                1j * ratio_plus * (sig[: n - 3] - sig[2 : n - 1])
                + (1j * ratio_minus + 0.5) * (sig[4 : n + 1] - sig[2 : n - 1])
            )
            * gamma_t
        )
        idx = np.arange(n - 3)
        out[idx, idx + 4] = band
        out[idx + 4, idx] = np.conj(band)
    return out


def chain_determinant(matrix: np.ndarray) -> float:
    """Determinant of a Hermitian diagonal-plus-fourth-band matrix.

    Grouping indices by residue mod 4 is a symmetric permutation (which
    leaves the determinant unchanged) and block-diagonalizes the matrix
    into four Hermitian tridiagonal chains; each chain determinant follows
    the three-term recursion ``d_k = x_k d_{k-1} - |y_{k-1}|^2 d_{k-2}``.
    """
    dim = matrix.shape[0]
    if matrix.shape != (dim, dim):
        raise ValueError("matrix must be square")
    diag = np.diag(matrix).real
    total = 1.0
    for residue in range(_CHAIN_PERIOD):
        prev, cur = 0.0, 1.0
        for count, i in enumerate(range(residue, dim, _CHAIN_PERIOD)):
            coupling = 0.0 if count == 0 else abs(matrix[i - _CHAIN_PERIOD, i]) ** 2
            prev, cur = cur, diag[i] * cur - coupling * prev
        total *= cur
    return float(total)


def check_trace_annihilation(lv: Liouvillian) -> float:
    """Worst ``|trace(L[probe])|`` over a Hermitian matrix-unit basis.

    The probes are the diagonal units plus the symmetric and antisymmetric
    combinations of each off-diagonal pair; they span all Hermitian
    matrices, so a zero here certifies trace preservation by linearity.
    """
    dim = lv.dim
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    worst = 0.0
    for i in range(dim):
        for j in range(i, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            if i == j:
                sym[i, i] = 1.0
                probes = (sym,)
            else:
                sym[i, j] = sym[j, i] = inv_sqrt2
                anti = np.zeros((dim, dim), dtype=complex)
                anti[i, j] = -1j * inv_sqrt2
                anti[j, i] = 1j * inv_sqrt2
                probes = (sym, anti)
            for probe in probes:
                worst = max(worst, abs(np.trace(lv.apply(probe))))
    return float(worst)


def n_max_bound(beta_bar: float) -> tuple[int, int]:
    """Truncation ceilings from the zero-time diagonal positivity quadratic.

    With ``Q = exp(-2 beta_bar)``, keeping every zero-time diagonal weight
    non-negative caps the level index by the positive root of
    ``(1 - Q) n^2 - (1 + 3Q) n - 2Q``.  Two groupings of the surd are in
    circulation, so both floors are reported:

    - ``reading_a`` evaluates ``(1 + 3Q + sqrt(1 + Q^2) + 14Q) / (2(1 - Q))``,
    - ``reading_b`` evaluates ``(1 + 3Q + sqrt(1 + 14Q + Q^2)) / (2(1 - Q))``,
      which is the exact root of the quadratic.

    Downstream checks may compare against either; the empirical sweep is the
    arbiter.
    """
    if beta_bar <= 0.0:
        raise ValueError("beta_bar must be positive")
    big_q = math.exp(-2.0 * beta_bar)
    denom = 2.0 * (1.0 - big_q)
    reading_a = (1.0 + 3.0 * big_q + math.sqrt(1.0 + big_q**2) + 14.0 * big_q) / denom
    reading_b = (1.0 + 3.0 * big_q + math.sqrt(1.0 + 14.0 * big_q + big_q**2)) / denom
    return int(math.floor(reading_a)), int(math.floor(reading_b))


def diagonal_condition_bound(beta_bar: float, gamma_t: float) -> int:
    """Largest level whose first-order diagonal weight stays non-negative.

    The diagonal of :func:`first_order_state` factors as
    ``sigma_m (1 + gamma_t ((m + 1)(m + 2) Q - m (m - 1)))``; the bracket
    changes sign once, at the positive root of a quadratic in ``m``, and
    every level at or below the returned index carries non-negative weight.
    Unlike :func:`n_max_bound` this keeps the elapsed time as a parameter
    instead of pinning it to zero, so the bound actually binds.
    """
    if beta_bar <= 0.0:
        raise ValueError("beta_bar must be positive")
    if gamma_t <= 0.0:
        raise ValueError("gamma_t must be positive for the condition to bind")
    big_q = math.exp(-2.0 * beta_bar)
    linear = 1.0 + 3.0 * big_q
    disc = linear**2 + 4.0 * (1.0 - big_q) * (2.0 * big_q + 1.0 / gamma_t)
    return int(math.floor((linear + math.sqrt(disc)) / (2.0 * (1.0 - big_q))))


def sweep_positivity(
    beta_bar: float,
    gamma_t: float,
    coeffs: VacuumCoefficients,
    *,
    renormalized: bool = True,
    start: int = _SWEEP_START,
    ceiling: int = _SWEEP_CEILING,
) -> list[tuple[int, float]]:
    """Smallest eigenvalue of the first-order state at each swept size."""
    out: list[tuple[int, float]] = []
    for n in range(start, ceiling + 1):
        state = first_order_state(beta_bar, gamma_t, coeffs, n, renormalized=renormalized)
        out.append((n, float(np.linalg.eigvalsh(state)[0])))
    return out


def empirical_n_max(
    beta_bar: float,
    gamma_t: float,
    coeffs: VacuumCoefficients,
    *,
    renormalized: bool = True,
    start: int = _SWEEP_START,
    ceiling: int = _SWEEP_CEILING,
) -> int:
    """Largest swept size whose first-order state passes the eigenvalue floor.

    Sweeps upward from ``start``; the first failing size ends the sweep and
    the preceding one is returned.  With ``gamma_t = 0`` the state is exactly
    thermal and positive at every size, so the sweep ceiling is returned.
    """
    if gamma_t == 0.0:
        return ceiling
    for n, low in sweep_positivity(
        beta_bar, gamma_t, coeffs, renormalized=renormalized, start=start, ceiling=ceiling
    ):
        if low < EIGENVALUE_FLOOR:
            if n == start:
                raise ValueError(
                    "positivity already violated at the smallest swept size"
                )
            return n - 1
    return ceiling


def positivity_report(
    beta_bar: float,
    gamma_t: float,
    coeffs: VacuumCoefficients,
    n: int,
    *,
    renormalized: bool = True,
) -> PositivityReport:
    """Probe one size and bundle the result with the analytic ceilings."""
    state = first_order_state(beta_bar, gamma_t, coeffs, n, renormalized=renormalized)
    low = float(np.linalg.eigvalsh(state)[0])
    reading_a, reading_b = n_max_bound(beta_bar)
    return PositivityReport(
        dim_tested=n,
        gamma_t=gamma_t,
        min_eigenvalue=low,
        passed=low >= EIGENVALUE_FLOOR,
        bound_reading_a=reading_a,
        bound_reading_b=reading_b,
    )
