"""Truncated Fock-space linear algebra: operators, states, expectations.

Operators and density matrices are plain complex ndarrays of shape (N, N);
levels run 0..N-1 with no implicit padding.  Density matrices are validated,
never silently repaired.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-10

#: Combined population allowed in the top two levels of a dynamical run
#: before truncation is deemed to have contaminated the state.
LEAKAGE_THRESHOLD = 1e-8


def lowering(dim: int) -> np.ndarray:
    """Annihilation operator: sqrt(n+1) on the first superdiagonal."""
    if dim < 2:
        raise ValueError("dim must be at least 2")
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def ladder(dim: int) -> tuple[np.ndarray, np.ndarray]:
    """(lower, raise) pair; raise is exactly the conjugate transpose."""
    low = lowering(dim)
    return low, low.conj().T


def number_op(dim: int) -> np.ndarray:
    low, high = ladder(dim)
    return high @ low


def fock_state(n: int, dim: int) -> np.ndarray:
    """Projector |n><n|."""
    if not 0 <= n < dim:
        raise ValueError("level outside truncation")
    rho = np.zeros((dim, dim), dtype=complex)
    rho[n, n] = 1.0
    return rho


def superposition_state(amplitudes: dict[int, complex], dim: int) -> np.ndarray:
    """Pure state from {level: amplitude}; normalized automatically."""
    psi = np.zeros(dim, dtype=complex)
    for n, a in amplitudes.items():
        if not 0 <= n < dim:
            raise ValueError("level outside truncation")
        psi[n] = a
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("zero state")
    psi /= norm
    return np.outer(psi, psi.conj())


def thermal_state(beta_bar: float, dim: int) -> np.ndarray:
    """Thermal state with weights ~ exp(-n*beta_bar), renormalized over the
    truncated space so the trace is exactly 1.  beta_bar = inf gives |0><0|."""
    if dim < 2:
        raise ValueError("dim must be at least 2")
    if not beta_bar > 0:
        raise ValueError("beta_bar must be positive")
    if math.isinf(beta_bar):
        return fock_state(0, dim)
    weights = np.exp(-beta_bar * np.arange(dim))
    weights /= weights.sum()
    return np.diag(weights).astype(complex)


def expectation(op: np.ndarray, rho: np.ndarray) -> complex:
    if op.shape != rho.shape:
        raise ValueError("dimension mismatch")
    return complex(np.trace(op @ rho))


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    ok: bool


def validate_density_matrix(rho: np.ndarray,
                            herm_tol: float = HERMITICITY_TOL,
                            trace_tol: float = TRACE_TOL,
                            eig_floor: float = EIGENVALUE_FLOOR) -> ValidationReport:
    """Check Hermiticity, unit trace, and positivity; report, don't repair."""
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = abs(complex(np.trace(rho)) - 1.0)
    min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))))
    ok = herm <= herm_tol and tr <= trace_tol and min_eig >= eig_floor
    return ValidationReport(herm, tr, min_eig, ok)


def leakage(rho: np.ndarray) -> float:
    """Combined population of the top two truncation levels."""
    return float(rho[-1, -1].real + rho[-2, -2].real)


def to_csv(rho: np.ndarray) -> str:
    """Serialize as interleaved (real, imag) entries, row-major, after a
    one-line dim header."""
    dim = rho.shape[0]
    lines = [str(dim)]
    for row in rho:
        cells = []
        for z in row:
            cells.append(f"{z.real:.17g}")
            cells.append(f"{z.imag:.17g}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def from_csv(text: str) -> np.ndarray:
    lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("#")]
    dim = int(lines[0])
    rho = np.zeros((dim, dim), dtype=complex)
    for i, ln in enumerate(lines[1:1 + dim]):
        vals = [float(v) for v in ln.split(",")]
        rho[i] = np.array(vals[0::2]) + 1j * np.array(vals[1::2])
    return rho
