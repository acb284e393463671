"""Time evolution, steady states, and long-time population extraction.

The integrator is a fixed-step classical Runge-Kutta scheme (the convergence
suite asserts its measured order is 4 to within a tenth); pass ``tol`` instead
of ``dt`` to delegate to scipy's adaptive RK45.  States are evolved in
vectorised form, with the dense superoperator when the register is small
enough and matrix-free otherwise.

Evolution is instrumented: every recorded state carries trace drift,
Hermiticity defect, minimal eigenvalue, and truncation leakage (the summed
population of the two highest retained levels).  A violated invariant marks
the trajectory invalid and truncates it at the first offending time rather
than integrating garbage forward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConvergenceError, IllConditionedKernel
from .fock import LEAKAGE_THRESHOLD, leakage, validate_density_matrix
from .generators import Liouvillian

__all__ = [
    "Trajectory",
    "SteadyStateResult",
    "evolve",
    "steady_state",
    "long_time_populations",
]

# Trace is conserved exactly by every generator here, so drift is pure
# integrator/roundoff error; anything above this is a bug.
TRACE_DRIFT_TOL = 1e-10

# Fraction of a coherent period per default fixed step.
_STEPS_PER_PERIOD = 1.0e-3

# RK4 absolute-stability radius on the negative real axis is ~2.79; stay
# well inside it when capping the step against the generator's norm.
_STABILITY_MARGIN = 0.5


@dataclass
class Trajectory:
    """Recorded evolution with per-sample diagnostics.

    ``states[k]`` is the density matrix at ``times[k]``.  ``valid`` is False
    when an invariant broke; ``first_invalid_time`` then holds the earliest
    offending sample time and the record stops there.
    """

    times: np.ndarray
    states: list[np.ndarray]
    trace_drift: np.ndarray
    herm_defect: np.ndarray
    min_eigenvalue: np.ndarray
    leak: np.ndarray
    valid: bool
    first_invalid_time: float | None

    def final(self) -> np.ndarray:
        return self.states[-1]

    def populations(self) -> np.ndarray:
        """Real diagonal of every recorded state, shape (len(times), dim)."""
        return np.array([np.diag(s).real for s in self.states])


@dataclass
class SteadyStateResult:
    """Kernel of the generator plus any undamped oscillatory modes.

    ``states`` are Hermitian kernel elements, unit trace where the kernel
    direction carries trace (trace-free difference modes are returned as
    such).  ``persistent_frequencies`` lists positive frequencies of modes
    with zero damping but nonzero rotation — these never settle and are
    deliberately kept out of ``states``.
    """

    states: list[np.ndarray]
    kernel_dim: int
    persistent_frequencies: list[float]
    singular_values: np.ndarray
    from_units: bool


def _rk4_step(f, v: np.ndarray, dt: float) -> np.ndarray:
    k1 = f(v)
    k2 = f(v + 0.5 * dt * k1)
    k3 = f(v + 0.5 * dt * k2)
    k4 = f(v + dt * k3)
    return v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _norm_estimate(lv: Liouvillian) -> float:
    """Upper-ish bound on the generator's spectral radius.

    Dense path: infinity norm (a true upper bound).  Matrix-free path: a few
    rounds of power iteration on a random state, padded by a factor two.
    """
    if lv.dim <= 32:
        return float(np.abs(lv.matrix()).sum(axis=1).max())
    rng = np.random.default_rng(0)
    rho = rng.normal(size=(lv.dim, lv.dim)) + 1j * rng.normal(size=(lv.dim, lv.dim))
    rho /= np.linalg.norm(rho)
    est = 0.0
    for _ in range(6):
        rho = lv.apply(rho)
        est = np.linalg.norm(rho)
        if est == 0.0:
            return 0.0
        rho /= est
    return 2.0 * est


def _default_dt(lv: Liouvillian) -> float:
    span = float(lv.levels.max() - lv.levels.min()) if lv.levels.size else 0.0
    omega_eff = max(abs(span), 1.0e-12)
    dt = _STEPS_PER_PERIOD * 2.0 * math.pi / omega_eff
    radius = _norm_estimate(lv)
    if radius > 0.0:
        dt = min(dt, _STABILITY_MARGIN / radius)
    return dt


def default_timestep(lv: Liouvillian) -> float:
    """Step the fixed integrator would pick on its own for this generator."""
    return _default_dt(lv)


def _diagnose(rho: np.ndarray) -> tuple[float, float, float, float]:
    tr = abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag)
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    mineig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    return tr, herm, mineig, leakage(rho)


def evolve(
    lv: Liouvillian,
    rho0: np.ndarray,
    t_final: float,
    *,
    dt: float | None = None,
    tol: float | None = None,
    record_every: int = 1,
    check_invariants: bool = True,
    trace_tol: float = TRACE_DRIFT_TOL,
    leak_tol: float = LEAKAGE_THRESHOLD,
) -> Trajectory:
    """Integrate ``drho/dt = L[rho]`` from ``rho0`` to ``t_final``.

    Parameters
    ----------
    dt:
        Fixed RK4 step.  Default resolves a thousandth of the fastest
        coherent period and stays inside the stability region of the
        generator's norm.  Mutually exclusive with ``tol``.
    tol:
        Relative tolerance for the adaptive (RK45) path.
    record_every:
        Keep every k-th step (first and last always kept).
    check_invariants:
        When True, a trace drift beyond ``trace_tol``, Hermiticity defect,
        negative eigenvalue beyond the validation floor, or leakage beyond
        ``leak_tol`` stops the run at that sample and flags the trajectory.

    Notes
    -----
    Invariant violations do not raise: short runs past the validity horizon
    are legitimate objects of study here, so the caller gets the truncated
    record and the flag instead of an exception.
    """
    if rho0.shape != (lv.dim, lv.dim):
        raise ValueError(f"state shape {rho0.shape} != ({lv.dim}, {lv.dim})")
    if t_final <= 0.0:
        raise ValueError(f"t_final must be > 0, got {t_final}")
    if dt is not None and tol is not None:
        raise ValueError("pass dt (fixed step) or tol (adaptive), not both")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    report = validate_density_matrix(rho0)
    if not report.ok:
        raise ValueError(f"rho0 is not a density matrix: {report}")

    if tol is not None:
        times, states = _run_adaptive(lv, rho0, t_final, tol, record_every)
    else:
        step = _default_dt(lv) if dt is None else float(dt)
        if step <= 0.0:
            raise ValueError(f"dt must be > 0, got {dt}")
        times, states = _run_fixed(lv, rho0, t_final, step, record_every)

    n = len(states)
    tr = np.empty(n)
    he = np.empty(n)
    ei = np.empty(n)
    lk = np.empty(n)
    valid = True
    first_bad: float | None = None
    keep = n
    for k, rho in enumerate(states):
        tr[k], he[k], ei[k], lk[k] = _diagnose(rho)
        if check_invariants and (
            tr[k] > trace_tol
            or he[k] > 1e-10
            or ei[k] < -1e-8
            or lk[k] > leak_tol
        ):
            valid = False
            first_bad = float(times[k])
            keep = k + 1
            break
    return Trajectory(
        times=np.asarray(times[:keep]),
        states=list(states[:keep]),
        trace_drift=tr[:keep],
        herm_defect=he[:keep],
        min_eigenvalue=ei[:keep],
        leak=lk[:keep],
        valid=valid,
        first_invalid_time=first_bad,
    )


def _make_rhs(lv: Liouvillian):
    if lv.dim <= 32:
        mat = lv.matrix()
        return lambda v: mat @ v
    dim = lv.dim
    return lambda v: lv.apply(v.reshape(dim, dim, order="F")).flatten(order="F")


def _run_fixed(lv, rho0, t_final, dt, record_every):
    rhs = _make_rhs(lv)
    v = rho0.astype(complex).flatten(order="F")
    n_steps = max(1, math.ceil(t_final / dt - 1e-12))
    times = [0.0]
    states = [rho0.astype(complex).copy()]
    t = 0.0
    for k in range(n_steps):
        h = min(dt, t_final - t)
        v = _rk4_step(rhs, v, h)
        t = t_final if k == n_steps - 1 else t + h
        if (k + 1) % record_every == 0 or k == n_steps - 1:
            times.append(t)
            states.append(v.reshape(lv.dim, lv.dim, order="F").copy())
    return np.array(times), states


def _run_adaptive(lv, rho0, t_final, tol, record_every):
    rhs = _make_rhs(lv)
    n2 = lv.dim**2

    def f(_t, y):
        w = rhs(y[:n2] + 1j * y[n2:])
        return np.concatenate([w.real, w.imag])

    v0 = rho0.astype(complex).flatten(order="F")
    sol = solve_ivp(
        f,
        (0.0, t_final),
        np.concatenate([v0.real, v0.imag]),
        method="RK45",
        rtol=tol,
        atol=tol * 1e-3,
        dense_output=False,
    )
    if not sol.success:
        raise ConvergenceError(f"adaptive integration failed: {sol.message}")
    idx = list(range(0, len(sol.t), record_every))
    if idx[-1] != len(sol.t) - 1:
        idx.append(len(sol.t) - 1)
    times = sol.t[idx]
    states = [
        (sol.y[:n2, k] + 1j * sol.y[n2:, k]).reshape(lv.dim, lv.dim, order="F")
        for k in idx
    ]
    return times, states


def steady_state(lv: Liouvillian, *, rank_tol: float = 1e-10) -> SteadyStateResult:
    """Stationary states of the generator via an SVD kernel computation.

    The kernel basis is canonicalised: when the stationary subspace is
    spanned by number-basis projectors (the secular generators), those
    projectors are returned directly; otherwise Hermitian combinations are
    formed and unit-trace representatives chosen where possible.

    Raises
    ------
    IllConditionedKernel
        When singular values sit within a decade of the rank cutoff on
        either side, so the kernel dimension depends on the tolerance.
    ValueError
        For registers too large for the dense superoperator.
    """
    mat = lv.matrix()
    dim = lv.dim
    svals = np.linalg.svd(mat, compute_uv=False)
    s_max = svals[0] if svals[0] > 0 else 1.0
    cutoff = rank_tol * s_max
    below = svals < cutoff
    near = (svals > 0.1 * cutoff) & (svals < 10.0 * cutoff)
    if np.any(near):
        raise IllConditionedKernel(
            f"singular values {svals[near]} within a decade of cutoff {cutoff:.3e}"
        )
    kernel_dim = int(below.sum())

    # Projector shortcut: count number-basis units the generator annihilates.
    unit_states: list[np.ndarray] = []
    for n in range(dim):
        unit = np.zeros((dim, dim), dtype=complex)
        unit[n, n] = 1.0
        if np.linalg.norm(lv.apply(unit)) < cutoff:
            unit_states.append(unit)
    if len(unit_states) == kernel_dim:
        states, from_units = unit_states, True
    else:
        _, _, vh = np.linalg.svd(mat)
        raw = [vh[k].conj().reshape(dim, dim, order="F") for k in range(len(svals)) if below[k]]
        states, from_units = _hermitian_basis(raw), False

    freqs = _persistent_frequencies(mat, cutoff)
    return SteadyStateResult(
        states=states,
        kernel_dim=kernel_dim,
        persistent_frequencies=freqs,
        singular_values=svals,
        from_units=from_units,
    )


def _hermitian_basis(raw: list[np.ndarray]) -> list[np.ndarray]:
    """Hermitian, trace-normalised (where possible) basis of a kernel span.

    The kernel of a Hermiticity-preserving map is closed under the adjoint,
    so Hermitian and anti-Hermitian parts of its elements stay inside it.
    """
    candidates: list[np.ndarray] = []
    for m in raw:
        candidates.append(0.5 * (m + m.conj().T))
        candidates.append(0.5j * (m - m.conj().T))
    basis: list[np.ndarray] = []
    for c in candidates:
        for b in basis:
            c = c - np.trace(b.conj().T @ c) / np.trace(b.conj().T @ b) * b
        if np.linalg.norm(c) > 1e-10:
            basis.append(c)
    if len(basis) != len(raw):
        # Orthogonalisation lost directions; fall back to the raw span.
        basis = raw
    out = []
    for b in basis:
        t = np.trace(b).real
        out.append(b / t if abs(t) > 1e-8 else b)
    return out


def _persistent_frequencies(mat: np.ndarray, cutoff: float) -> list[float]:
    vals = np.linalg.eigvals(mat)
    osc = [v.imag for v in vals if abs(v.real) < cutoff and abs(v.imag) > cutoff]
    return sorted(v for v in osc if v > 0)


def long_time_populations(
    lv: Liouvillian,
    rho0: np.ndarray,
    *,
    horizon: float,
    rate_tol: float = 1e-12,
    dt: float | None = None,
    chunks: int = 32,
) -> np.ndarray:
    """Populations once the generator has effectively stopped moving them.

    Integrates in chunks and stops as soon as every diagonal rate falls
    below ``rate_tol``.  Raises :class:`ConvergenceError` if that never
    happens within ``horizon`` — by design there is no silent fallback to
    "whatever the state was at the horizon".
    """
    if horizon <= 0.0:
        raise ValueError(f"horizon must be > 0, got {horizon}")
    rho = rho0.astype(complex)
    rate = float(np.max(np.abs(np.diag(lv.apply(rho)))))
    if rate < rate_tol:
        return np.diag(rho).real.copy()
    step = _default_dt(lv) if dt is None else float(dt)
    t_chunk = horizon / chunks
    for _ in range(chunks):
        _, states = _run_fixed(lv, rho, t_chunk, step, 10**9)
        rho = states[-1]
        rate = float(np.max(np.abs(np.diag(lv.apply(rho)))))
        if rate < rate_tol:
            return np.diag(rho).real.copy()
    raise ConvergenceError(
        f"diagonal rates still {rate:.3e} > {rate_tol:.1e} after t={horizon}"
    )
