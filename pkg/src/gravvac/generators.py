"""Master-equation generators for the trapped-particle sector.

Each generator acts on a density matrix truncated to ``dim`` oscillator
levels and is represented as a sparse-in-structure list of triples
``(coeff, left, right)`` meaning ``coeff * left @ rho @ right`` (``None``
stands for the identity).  That keeps ``apply`` cheap, makes the dense
superoperator matrix a one-liner, and — more importantly — lets tests
inspect and perturb individual terms.

Six variants are provided.  For each separation variable (coordinate and
geodesic) there is a secular generator, with number-conserving structure

    -i (omega - c) [n, rho] - i c [n^2, rho] + gamma D[b^2] rho,

and a full generator that adds the counter-rotating block

    -+ i c_plus (B' rho B' - B'B' rho + rho BB - B rho B)
    -+ (i c_minus + gamma/2)(BB rho - B rho B)
    -+ (i c_minus - gamma/2)(B' rho B' - rho B'B')

written here with B = b^2, B' = b^dagger^2; the upper signs apply to the
coordinate variable, the lower signs to the geodesic one, and
(c_plus, c_minus) are the corresponding frequency-shift constants.  The
block is not of Lindblad form — it is the residue of a second-order
expansion — so positivity of the evolved state is *not* structurally
guaranteed; see :mod:`gravvac.validity` for when it fails.  Trace
annihilation and Hermiticity preservation, however, hold exactly at any
truncation, which the test suite checks to machine precision.

Two reference channels, plain two-quantum amplitude damping and pure
dephasing, complete the set; they are the discriminators used to tell the
vacuum-induced channel structure apart from the usual suspects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coeffs import VacuumCoefficients
from .fock import ladder, number_op

__all__ = [
    "Liouvillian",
    "liouvillian_x_rwa",
    "liouvillian_xi_rwa",
    "liouvillian_x_full",
    "liouvillian_xi_full",
    "lindblad_amp",
    "lindblad_pha",
    "effective_hamiltonian",
    "transition_frequencies",
]

# Largest dimension for which the dense superoperator (dim^2 x dim^2) is
# built; beyond this apply() stays matrix-free.
DENSE_DIM_LIMIT = 32

Term = tuple[complex, "np.ndarray | None", "np.ndarray | None"]


@dataclass
class Liouvillian:
    """A generator ``L[rho] = sum_k c_k A_k rho B_k`` on a truncated register.

    Parameters
    ----------
    dim:
        Number of retained oscillator levels.
    variant:
        One of ``x_full``, ``x_rwa``, ``xi_full``, ``xi_rwa``, ``amp_only``,
        ``phase_only`` for the built-in constructors; custom instances may
        use any label.
    terms:
        Triples ``(coeff, left, right)`` with ``None`` meaning identity.
    levels:
        Diagonal of the effective Hamiltonian (coherent part) in the number
        basis, zeroed at the ground state.  All-zero for the pure channels.
    omega:
        Trap frequency used to scale the coherent part; coefficients inside
        ``terms`` are already in absolute units.
    """

    dim: int
    variant: str
    terms: tuple[Term, ...]
    levels: np.ndarray
    omega: float = 1.0
    _matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Evaluate ``L[rho]`` term by term (matrix-free)."""
        if rho.shape != (self.dim, self.dim):
            raise ValueError(f"state shape {rho.shape} != ({self.dim}, {self.dim})")
        out = np.zeros_like(rho, dtype=complex)
        for coeff, left, right in self.terms:
            block = rho if left is None else left @ rho
            if right is not None:
                block = block @ right
            out += coeff * block
        return out

    def matrix(self) -> np.ndarray:
        """Dense superoperator under column-major vectorisation.

        ``vec(A rho B) = kron(B.T, A) vec(rho)`` with ``vec = rho.flatten('F')``.
        Cached after the first call.  Refuses dimensions above
        ``DENSE_DIM_LIMIT`` (the matrix grows as dim^4).
        """
        if self._matrix is not None:
            return self._matrix
        if self.dim > DENSE_DIM_LIMIT:
            raise ValueError(
                f"dense superoperator refused for dim={self.dim} > {DENSE_DIM_LIMIT}; "
                "use apply()"
            )
        eye = np.eye(self.dim, dtype=complex)
        out = np.zeros((self.dim**2, self.dim**2), dtype=complex)
        for coeff, left, right in self.terms:
            a = eye if left is None else left
            b = eye if right is None else right
            out += coeff * np.kron(b.T, a)
        self._matrix = out
        return out


def _commutator_terms(coeff: complex, op: np.ndarray) -> list[Term]:
    """Terms for ``coeff * (op rho - rho op)``."""
    return [(coeff, op, None), (-coeff, None, op)]


def _dissipator_terms(rate: float, op: np.ndarray) -> list[Term]:
    """Terms for ``rate * (op rho op' - {op' op, rho}/2)`` with ``op' = op.H``."""
    opd = op.conj().T
    anti = opd @ op
    return [(rate, op, opd), (-0.5 * rate, anti, None), (-0.5 * rate, None, anti)]


def _build_trap(
    dim: int,
    variant: str,
    omega: float,
    gamma: float,
    c_plus: float,
    c_minus: float,
    counter_sign: int,
    include_counter: bool,
) -> Liouvillian:
    low, high = ladder(dim)
    n_op = number_op(dim)
    b2 = low @ low
    bd2 = high @ high
    b4 = b2 @ b2
    bd4 = bd2 @ bd2

    # Coherent part: -i c1 [n, .] + i c2 [n^2, .]  with the conventions below;
    # in the secular variants c_plus is simply zero, so one formula serves all.
    c1 = omega - c_minus - 3.0 * c_plus
    c2 = c_plus - c_minus

    terms: list[Term] = []
    terms += _commutator_terms(-1j * c1, n_op)
    terms += _commutator_terms(1j * c2, n_op @ n_op)
    terms += _dissipator_terms(gamma, b2)

    if include_counter:
        s = float(counter_sign)
        g4 = s * 1j * c_plus
        g5 = s * (1j * c_minus + 0.5 * gamma)
        g6 = s * (1j * c_minus - 0.5 * gamma)
        terms += [
            (g4, bd2, bd2),
            (-g4, bd4, None),
            (g4, None, b4),
            (-g4, b2, b2),
            (g5, b4, None),
            (-g5, b2, b2),
            (g6, bd2, bd2),
            (-g6, None, bd4),
        ]

    ns = np.arange(dim, dtype=float)
    levels = c1 * ns - c2 * ns**2
    return Liouvillian(
        dim=dim, variant=variant, terms=tuple(terms), levels=levels, omega=omega
    )


def _check_dim(dim: int, minimum: int, what: str) -> None:
    if dim < minimum:
        raise ValueError(f"{what} needs dim >= {minimum}, got {dim}")


def _pick_x(c: VacuumCoefficients, renormalized: bool) -> tuple[float, float]:
    if renormalized:
        return c.delta_plus_r, c.delta_minus_r
    return c.delta_plus, c.delta_minus


def _pick_xi(c: VacuumCoefficients, renormalized: bool) -> tuple[float, float]:
    if renormalized:
        return c.big_delta_plus_r, c.big_delta_minus_r
    return c.big_delta_plus, c.big_delta_minus


def liouvillian_x_rwa(
    c: VacuumCoefficients, dim: int, *, renormalized: bool = True, omega: float = 1.0
) -> Liouvillian:
    """Secular generator for the coordinate separation.

    Number-conserving: a shifted harmonic ladder with an ``n^2`` anharmonic
    correction plus two-quantum amplitude damping at rate ``gamma``.
    """
    _check_dim(dim, 4, "secular generator")
    _, d_minus = _pick_x(c, renormalized)
    return _build_trap(dim, "x_rwa", omega, c.gamma, 0.0, d_minus, -1, False)


def liouvillian_xi_rwa(
    c: VacuumCoefficients, dim: int, *, renormalized: bool = True, omega: float = 1.0
) -> Liouvillian:
    """Secular generator for the geodesic separation (cubic-cutoff shifts)."""
    _check_dim(dim, 4, "secular generator")
    _, d_minus = _pick_xi(c, renormalized)
    return _build_trap(dim, "xi_rwa", omega, c.gamma, 0.0, d_minus, +1, False)


def liouvillian_x_full(
    c: VacuumCoefficients,
    dim: int,
    *,
    renormalized: bool = True,
    counter_rotating: bool = True,
    omega: float = 1.0,
) -> Liouvillian:
    """Full (non-secular) generator for the coordinate separation.

    ``counter_rotating=False`` drops the four-quantum block, which together
    with ``c_plus -> 0`` reproduces the secular generator entrywise — a
    consistency check the tests exercise.
    """
    _check_dim(dim, 6, "full generator")
    d_plus, d_minus = _pick_x(c, renormalized)
    if not counter_rotating:
        return _build_trap(dim, "x_full", omega, c.gamma, 0.0, d_minus, -1, False)
    return _build_trap(dim, "x_full", omega, c.gamma, d_plus, d_minus, -1, True)


def liouvillian_xi_full(
    c: VacuumCoefficients,
    dim: int,
    *,
    renormalized: bool = True,
    counter_rotating: bool = True,
    omega: float = 1.0,
) -> Liouvillian:
    """Full generator for the geodesic separation.

    Identical structure to the coordinate one with the counter-rotating
    block's overall sign flipped and the cubic-cutoff shift constants in
    place of the logarithmic ones.
    """
    _check_dim(dim, 6, "full generator")
    d_plus, d_minus = _pick_xi(c, renormalized)
    if not counter_rotating:
        return _build_trap(dim, "xi_full", omega, c.gamma, 0.0, d_minus, +1, False)
    return _build_trap(dim, "xi_full", omega, c.gamma, d_plus, d_minus, +1, True)


def lindblad_amp(rate: float, dim: int) -> Liouvillian:
    """Two-quantum amplitude damping ``rate * D[b^2]`` with no coherent part.

    Reference channel: populations obey a closed cascade, e.g. the second
    excited level empties at ``2 * rate``.
    """
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    _check_dim(dim, 3, "amplitude channel")
    low, _ = ladder(dim)
    terms = tuple(_dissipator_terms(rate, low @ low))
    return Liouvillian(
        dim=dim,
        variant="amp_only",
        terms=terms,
        levels=np.zeros(dim),
        omega=0.0,
    )


def lindblad_pha(rate: float, dim: int) -> Liouvillian:
    """Pure dephasing ``rate * D[n]``: populations frozen, coherence ``(n, m)``
    decaying at ``rate * (n - m)^2 / 2``."""
    if rate < 0:
        raise ValueError(f"rate must be >= 0, got {rate}")
    _check_dim(dim, 2, "dephasing channel")
    terms = tuple(_dissipator_terms(rate, number_op(dim)))
    return Liouvillian(
        dim=dim,
        variant="phase_only",
        terms=terms,
        levels=np.zeros(dim),
        omega=0.0,
    )


def effective_hamiltonian(lv: Liouvillian) -> np.ndarray:
    """Diagonal of the coherent part in the number basis (ground level zero)."""
    return lv.levels.copy()


def transition_frequencies(lv: Liouvillian) -> np.ndarray:
    """Ladder frequencies ``E_{n+1} - E_n`` of the effective Hamiltonian."""
    return np.diff(lv.levels)
