"""Command-line front end: scenarios in, deterministic CSV out.

A run is described by a flat config -- a JSON object or ``key=value`` lines,
with command-line flags overriding file values one to one -- and produces a
single CSV artifact on stdout or at ``output``.  Every emitted file opens
with a header that echoes the fully resolved configuration, so a run can be
reproduced from its own output.  Numbers are printed with 17 significant
digits and ``\\n`` line endings; two runs of the same config give identical
bytes.

Exit codes: 0 success, 2 config error, 3 numerical-invariant violation,
4 non-convergence.  Failures print one machine-readable line to stderr:
``error: <code>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import analysis, dynamics, fock, freepart, perturb, validity
from .coeffs import VacuumCoefficients, vacuum_coefficients
from .errors import ConvergenceError, IllConditionedKernel, InvariantViolation
from .generators import (
    Liouvillian,
    effective_hamiltonian,
    lindblad_amp,
    lindblad_pha,
    liouvillian_x_full,
    liouvillian_x_rwa,
    liouvillian_xi_full,
    liouvillian_xi_rwa,
)
from .params import DimensionlessParams, PhysicalParams, to_dimensionless

SCENARIOS = (
    "coeffs",
    "evolve",
    "steady",
    "ladder",
    "sweep-cutoff",
    "free-particle",
    "validity",
    "discriminate",
)
TRAP_VARIANTS = ("x_rwa", "x_full", "xi_rwa", "xi_full")
CHANNEL_VARIANTS = ("amp", "pha")

# Populations below this are omitted from stationary reports.
STATIONARY_FLOOR = 1.0e-12


@dataclass(frozen=True)
class ScenarioConfig:
    """Fully resolved run description; every field is echoed in the output."""

    scenario: str
    variant: str = "x_rwa"
    dim: int = 12
    lambda_cut: float = 100.0
    gamma_bar: float = 1.0
    coupling_scale: float = 1.0
    renormalized: bool = True
    initial_state: str = "superposition:0:1,2:1"
    t_final: float = 10.0
    dt: float | None = None
    samples: int = 100
    coherences: str = "0:2"
    leak_tol: float = 1.0e-8
    gamma_t: float = 1.0e-3
    free_delta: float = 1.0e-3
    mean_q: float = 0.0
    mean_p: float = 0.0
    var_q: float = 1.0
    var_p: float = 1.0
    cov_qp: float = 0.0
    lambda_grid: tuple[float, ...] | None = None
    mu: float | None = None
    omega: float | None = None
    omega_max: float | None = None
    g_newton: float | None = None
    hbar: float | None = None
    c_light: float | None = None
    output: str | None = None
    jobs: int = 1


def _as_str(key: str, value: object) -> str:
    if isinstance(value, str):
        return value
    raise ValueError(f"bad value for '{key}': expected a string")


def _as_int(key: str, value: object) -> int:
    if isinstance(value, bool):
        raise ValueError(f"bad value for '{key}': expected an integer")
    if isinstance(value, int):
        return value
    if isinstance(value, float) and value.is_integer():
        return int(value)
    if isinstance(value, str):
        try:
            return int(value, 10)
        except ValueError:
            pass
    raise ValueError(f"bad value for '{key}': expected an integer")


def _as_float(key: str, value: object) -> float:
    if isinstance(value, bool):
        raise ValueError(f"bad value for '{key}': expected a number")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ValueError(f"bad value for '{key}': expected a number")


def _as_bool(key: str, value: object) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "false"):
        return value.lower() == "true"
    raise ValueError(f"bad value for '{key}': expected true or false")


def _as_grid(key: str, value: object) -> tuple[float, ...]:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p.strip()]
        return tuple(_as_float(key, p.strip()) for p in parts)
    if isinstance(value, (list, tuple)):
        return tuple(_as_float(key, v) for v in value)
    raise ValueError(f"bad value for '{key}': expected a comma list of numbers")


_CASTERS = {
    "scenario": _as_str,
    "variant": _as_str,
    "dim": _as_int,
    "lambda_cut": _as_float,
    "gamma_bar": _as_float,
    "coupling_scale": _as_float,
    "renormalized": _as_bool,
    "initial_state": _as_str,
    "t_final": _as_float,
    "dt": _as_float,
    "samples": _as_int,
    "coherences": _as_str,
    "leak_tol": _as_float,
    "gamma_t": _as_float,
    "free_delta": _as_float,
    "mean_q": _as_float,
    "mean_p": _as_float,
    "var_q": _as_float,
    "var_p": _as_float,
    "cov_qp": _as_float,
    "lambda_grid": _as_grid,
    "mu": _as_float,
    "omega": _as_float,
    "omega_max": _as_float,
    "g_newton": _as_float,
    "hbar": _as_float,
    "c_light": _as_float,
    "output": _as_str,
    "jobs": _as_int,
}

# Scenario-sensitive defaults, applied when the key was not given at all.
_SEED_DEFAULTS = {
    "steady": "thermal:1",
    "validity": "thermal:1",
}
_TFINAL_DEFAULTS = {
    "steady": 40.0,
}


def _parse_text(text: str) -> dict[str, object]:
    """Raw key/value mapping from a JSON object or ``key=value`` lines."""
    text = text.strip()
    if not text:
        return {}
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        obj = None
    if obj is not None:
        if not isinstance(obj, dict):
            raise ValueError("config JSON must be an object")
        return dict(obj)
    raw: dict[str, object] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"cannot parse config line {line!r}")
        raw[key.strip()] = value.strip()
    return raw


def resolve_config(raw: dict[str, object]) -> ScenarioConfig:
    """Validate a raw mapping, apply defaults, and freeze the config."""
    resolved: dict[str, object] = {}
    for key, value in raw.items():
        caster = _CASTERS.get(key)
        if caster is None:
            raise ValueError(f"unknown key '{key}'")
        if value is None:
            continue
        resolved[key] = caster(key, value)

    scenario = resolved.get("scenario")
    if scenario is None:
        raise ValueError("scenario required")
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario '{scenario}'")

    resolved.setdefault("initial_state", _SEED_DEFAULTS.get(scenario, ScenarioConfig.initial_state))
    resolved.setdefault("t_final", _TFINAL_DEFAULTS.get(scenario, ScenarioConfig.t_final))
    if scenario == "sweep-cutoff":
        resolved.setdefault("lambda_grid", tuple(np.geomspace(1.0e2, 1.0e4, 12)))

    cfg = ScenarioConfig(**resolved)

    if cfg.dim < 2:
        raise ValueError(f"dim={cfg.dim} violates the fock register invariant (need at least 2 levels)")
    if cfg.lambda_cut <= 2.0:
        raise ValueError("lambda_cut must exceed 2")
    if cfg.gamma_bar < 0.0:
        raise ValueError("gamma_bar must be non-negative")
    if cfg.t_final <= 0.0:
        raise ValueError("t_final must be positive")
    if cfg.dt is not None and cfg.dt <= 0.0:
        raise ValueError("dt must be positive")
    if cfg.samples < 2:
        raise ValueError("samples must be at least 2")
    if cfg.gamma_t < 0.0:
        raise ValueError("gamma_t must be non-negative")
    if cfg.jobs < 1:
        raise ValueError("jobs must be at least 1")

    physical_keys = ("mu", "omega", "omega_max")
    given = [k for k in physical_keys if getattr(cfg, k) is not None]
    if given and len(given) < len(physical_keys):
        missing = sorted(set(physical_keys) - set(given))
        raise ValueError(f"physical parameters incomplete: missing {', '.join(missing)}")
    if given and ("lambda_cut" in resolved or "gamma_bar" in resolved or "lambda_grid" in resolved):
        raise ValueError("give either physical (mu/omega/omega_max) or dimensionless (lambda_cut/gamma_bar) parameters, not both")

    if cfg.scenario in ("evolve", "steady"):
        if cfg.variant not in TRAP_VARIANTS + CHANNEL_VARIANTS:
            raise ValueError(f"variant '{cfg.variant}' is not a generator variant")
    elif cfg.scenario == "ladder":
        if cfg.variant not in TRAP_VARIANTS:
            raise ValueError(f"ladder needs a trap variant, not '{cfg.variant}'")
    elif cfg.scenario in ("sweep-cutoff", "free-particle"):
        if _sector(cfg.variant) is None:
            raise ValueError(f"variant '{cfg.variant}' does not select the x or xi sector")
    return cfg


def parse_config(text: str) -> ScenarioConfig:
    """Resolve a config document (JSON object or ``key=value`` lines)."""
    return resolve_config(_parse_text(text))


def _sector(variant: str) -> str | None:
    if variant == "x" or variant.startswith("x_"):
        return "x"
    if variant == "xi" or variant.startswith("xi_"):
        return "xi"
    return None


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _config_value(value: object) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _fmt(value)
    if isinstance(value, tuple):
        return ",".join(_fmt(v) for v in value)
    return str(value)


def _header(cfg: ScenarioConfig, extra: dict[str, str] | None = None) -> list[str]:
    # The destination path does not influence the computation and is left
    # out of the echo so equal configs give byte-identical artifacts
    # wherever they are written.
    lines = [
        f"# {f.name}={_config_value(getattr(cfg, f.name))}"
        for f in sorted(fields(cfg), key=lambda f: f.name)
        if f.name != "output"
    ]
    for key in sorted(extra or ()):
        lines.append(f"# {key}={extra[key]}")
    return lines


def _dimensionless(cfg: ScenarioConfig, lambda_cut: float | None = None) -> DimensionlessParams:
    if cfg.omega is not None:
        phys_kwargs = {"mu": cfg.mu, "omega": cfg.omega, "omega_max": cfg.omega_max}
        if cfg.g_newton is not None:
            phys_kwargs["G"] = cfg.g_newton
        if cfg.hbar is not None:
            phys_kwargs["hbar"] = cfg.hbar
        if cfg.c_light is not None:
            phys_kwargs["c"] = cfg.c_light
        return to_dimensionless(PhysicalParams(**phys_kwargs), cfg.coupling_scale)
    return DimensionlessParams(
        lambda_cut=cfg.lambda_cut if lambda_cut is None else lambda_cut,
        gamma_bar=cfg.gamma_bar,
        coupling_scale=cfg.coupling_scale,
    )


def _generator(cfg: ScenarioConfig, c: VacuumCoefficients) -> Liouvillian:
    if cfg.variant == "amp":
        return lindblad_amp(cfg.gamma_bar, cfg.dim)
    if cfg.variant == "pha":
        return lindblad_pha(cfg.gamma_bar, cfg.dim)
    maker = {
        "x_rwa": liouvillian_x_rwa,
        "x_full": liouvillian_x_full,
        "xi_rwa": liouvillian_xi_rwa,
        "xi_full": liouvillian_xi_full,
    }[cfg.variant]
    return maker(c, cfg.dim, renormalized=cfg.renormalized)


def _seed(spec: str, dim: int) -> np.ndarray:
    kind, _, rest = spec.partition(":")
    if kind == "thermal":
        return fock.thermal_state(_as_float("initial_state", rest), dim)
    if kind == "fock":
        return fock.fock_state(_as_int("initial_state", rest), dim)
    if kind == "superposition":
        amplitudes: dict[int, complex] = {}
        for part in rest.split(","):
            level, sep, amp = part.partition(":")
            if not sep:
                raise ValueError(f"bad superposition component {part!r}")
            amplitudes[_as_int("initial_state", level)] = _as_float("initial_state", amp)
        return fock.superposition_state(amplitudes, dim)
    raise ValueError(f"unknown initial_state kind '{kind}'")


def _coherence_pairs(spec: str, dim: int) -> list[tuple[int, int]]:
    pairs = []
    for part in spec.split(","):
        if not part.strip():
            continue
        n, sep, m = part.partition(":")
        if not sep:
            raise ValueError(f"bad coherence pair {part!r}")
        pair = (_as_int("coherences", n.strip()), _as_int("coherences", m.strip()))
        if not (0 <= pair[0] < dim and 0 <= pair[1] < dim):
            raise ValueError(f"coherence pair {part!r} outside the register")
        pairs.append(pair)
    return pairs


def _run_coeffs(cfg: ScenarioConfig) -> str:
    grid = cfg.lambda_grid if cfg.lambda_grid is not None else (cfg.lambda_cut,)

    def one(lam: float) -> VacuumCoefficients:
        return vacuum_coefficients(_dimensionless(cfg, lambda_cut=lam))

    if cfg.jobs > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(one, grid))
    else:
        rows = [one(lam) for lam in grid]

    lines = _header(cfg)
    lines.append(
        "lambda_cut,gamma,delta_plus,delta_minus,delta_minus_r,"
        "big_delta_plus,big_delta_minus,big_delta_minus_r"
    )
    for c in rows:
        lines.append(
            ",".join(
                _fmt(v)
                for v in (
                    c.lambda_cut,
                    c.gamma,
                    c.delta_plus,
                    c.delta_minus,
                    c.delta_minus_r,
                    c.big_delta_plus,
                    c.big_delta_minus,
                    c.big_delta_minus_r,
                )
            )
        )
    return "\n".join(lines) + "\n"


def _run_evolve(cfg: ScenarioConfig) -> str:
    c = vacuum_coefficients(_dimensionless(cfg))
    lv = _generator(cfg, c)
    rho0 = _seed(cfg.initial_state, cfg.dim)
    pairs = _coherence_pairs(cfg.coherences, cfg.dim)
    dt = cfg.dt if cfg.dt is not None else dynamics.default_timestep(lv)
    record_every = max(1, int(math.ceil(cfg.t_final / dt / cfg.samples)))
    traj = dynamics.evolve(
        lv, rho0, cfg.t_final, dt=dt, record_every=record_every, leak_tol=cfg.leak_tol
    )

    lines = _header(cfg, {"dt_effective": _fmt(dt), "record_every": str(record_every)})
    columns = ["time"]
    columns += [f"pop_{n}" for n in range(cfg.dim)]
    for n, m in pairs:
        columns += [f"re_{n}_{m}", f"im_{n}_{m}"]
    columns += ["trace_drift", "herm_defect", "min_eigenvalue", "leak"]
    lines.append(",".join(columns))
    for k, t in enumerate(traj.times):
        state = traj.states[k]
        row = [_fmt(t)]
        row += [_fmt(state[n, n].real) for n in range(cfg.dim)]
        for n, m in pairs:
            row += [_fmt(state[n, m].real), _fmt(state[n, m].imag)]
        row += [
            _fmt(traj.trace_drift[k]),
            _fmt(traj.herm_defect[k]),
            _fmt(traj.min_eigenvalue[k]),
            _fmt(traj.leak[k]),
        ]
        lines.append(",".join(row))
    text = "\n".join(lines) + "\n"
    if not traj.valid:
        err = InvariantViolation(
            f"trajectory invariant broke at t={traj.first_invalid_time:.6g}; output truncated there"
        )
        err.partial_output = text
        raise err
    return text


def _run_steady(cfg: ScenarioConfig) -> str:
    c = vacuum_coefficients(_dimensionless(cfg))
    lv = _generator(cfg, c)
    rho0 = _seed(cfg.initial_state, cfg.dim)
    pops = dynamics.long_time_populations(lv, rho0, horizon=cfg.t_final, dt=cfg.dt)
    extra: dict[str, str] = {}
    if cfg.dim <= 32:
        kernel = dynamics.steady_state(lv)
        extra["kernel_dim"] = str(kernel.kernel_dim)
        extra["persistent_frequencies"] = (
            ",".join(_fmt(f) for f in kernel.persistent_frequencies) or "none"
        )
    lines = _header(cfg, extra)
    lines.append("n,population")
    for n, p in enumerate(pops):
        if p > STATIONARY_FLOOR:
            lines.append(f"{n},{_fmt(p)}")
    return "\n".join(lines) + "\n"


def _run_ladder(cfg: ScenarioConfig) -> str:
    c = vacuum_coefficients(_dimensionless(cfg))
    lv = _generator(cfg, c)
    ladder = analysis.extract_ladder(lv)
    if _sector(cfg.variant) == "x":
        d_plus, d_minus = (
            (c.delta_plus_r, c.delta_minus_r) if cfg.renormalized else (c.delta_plus, c.delta_minus)
        )
    else:
        d_plus, d_minus = (
            (c.big_delta_plus_r, c.big_delta_minus_r)
            if cfg.renormalized
            else (c.big_delta_plus, c.big_delta_minus)
        )
    if cfg.variant.endswith("_rwa"):
        d_plus = 0.0
    levels = effective_hamiltonian(lv)
    lines = _header(cfg, {"overlap_threshold": _fmt(ladder.threshold)})
    lines.append("n,freq,decay,overlap,pt_shift,eff_shift,difference")
    for n in ladder.levels:
        pt = perturb.multimode_shift(n + 1, d_plus, d_minus) - perturb.multimode_shift(
            n, d_plus, d_minus
        )
        eff = levels[n + 1] - levels[n] - 1.0
        spectral = ladder.transition_freqs[n] - 1.0
        lines.append(
            ",".join(
                (
                    str(n),
                    _fmt(ladder.transition_freqs[n]),
                    _fmt(ladder.decay_rates[n]),
                    _fmt(ladder.overlaps[n]),
                    _fmt(pt),
                    _fmt(eff),
                    _fmt(spectral - pt),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _run_sweep_cutoff(cfg: ScenarioConfig) -> str:
    fit = analysis.cutoff_sweep(
        _sector(cfg.variant), np.asarray(cfg.lambda_grid), gamma_bar=cfg.gamma_bar
    )
    extra = {
        "model": fit.model,
        "fit_params": ",".join(_fmt(p) for p in fit.fit_params),
        "residual": _fmt(fit.residual),
        "exponent": _fmt(fit.exponent),
    }
    lines = _header(cfg, extra)
    lines.append("lambda_cut,shift")
    for lam, shift in zip(fit.lambda_grid, fit.shift_values):
        lines.append(f"{_fmt(lam)},{_fmt(shift)}")
    return "\n".join(lines) + "\n"


def _run_free_particle(cfg: ScenarioConfig) -> str:
    sector = _sector(cfg.variant)
    table = freepart.gaussian_moments(
        mean_q=cfg.mean_q,
        mean_p=cfg.mean_p,
        var_q=cfg.var_q,
        var_p=cfg.var_p,
        cov_qp=cfg.cov_qp,
        variant=sector,
    )
    times = np.linspace(0.0, cfg.t_final, cfg.samples)
    momentum_orders = sorted(k for k in (1, 2) if k in _free_at(table, sector, cfg.free_delta, 0.0).momentum)
    lines = _header(cfg)
    columns = ["time", "mean", "second"] + [f"momentum_{k}" for k in momentum_orders]
    lines.append(",".join(columns))
    for t in times:
        fm = _free_at(table, sector, cfg.free_delta, float(t))
        row = [_fmt(t), _fmt(fm.mean), _fmt(fm.second)]
        row += [_fmt(fm.momentum[k]) for k in momentum_orders]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def _free_at(table, sector: str, delta: float, t: float):
    if sector == "x":
        return freepart.closed_form_x(table, delta, t)
    return freepart.closed_form_xi(table, delta, 1.0 / (1.0 - delta), t)


def _run_validity(cfg: ScenarioConfig) -> str:
    kind, _, rest = cfg.initial_state.partition(":")
    if kind != "thermal":
        raise ValueError("validity scenario needs a thermal initial_state")
    beta_bar = _as_float("initial_state", rest)
    c = vacuum_coefficients(_dimensionless(cfg))
    reading_a, reading_b = validity.n_max_bound(beta_bar)
    sweep = validity.sweep_positivity(beta_bar, cfg.gamma_t, c, renormalized=cfg.renormalized)
    empirical = validity.empirical_n_max(beta_bar, cfg.gamma_t, c, renormalized=cfg.renormalized)
    lines = _header(cfg, {"beta_bar": _fmt(beta_bar)})
    lines.append("beta_bar,gamma_t,reading_a,reading_b,empirical_n_max,n,min_eigenvalue")
    for n, low in sweep:
        lines.append(
            ",".join(
                (
                    _fmt(beta_bar),
                    _fmt(cfg.gamma_t),
                    str(reading_a),
                    str(reading_b),
                    str(empirical),
                    str(n),
                    _fmt(low),
                )
            )
        )
    return "\n".join(lines) + "\n"


def _run_discriminate(cfg: ScenarioConfig) -> str:
    rho0 = _seed(cfg.initial_state, cfg.dim)
    report = analysis.channel_discriminator(rho0, cfg.gamma_bar, cfg.t_final, dt=cfg.dt)
    lines = _header(cfg)
    lines.append(
        "rate,horizon,pha_population_drift,pha_coherence_rate,"
        "amp_population_rate,amp_coherence_rate"
    )
    lines.append(
        ",".join(
            _fmt(v)
            for v in (
                report.rate,
                report.horizon,
                report.pha_population_drift,
                report.pha_coherence_rate,
                report.amp_population_rate,
                report.amp_coherence_rate,
            )
        )
    )
    return "\n".join(lines) + "\n"


_RUNNERS = {
    "coeffs": _run_coeffs,
    "evolve": _run_evolve,
    "steady": _run_steady,
    "ladder": _run_ladder,
    "sweep-cutoff": _run_sweep_cutoff,
    "free-particle": _run_free_particle,
    "validity": _run_validity,
    "discriminate": _run_discriminate,
}


def _emit(cfg: ScenarioConfig, text: str) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)


def run(cfg: ScenarioConfig) -> None:
    """Execute one scenario and emit its CSV artifact.

    On an invariant violation the truncated output is still written before
    the error propagates, so partial runs remain inspectable.
    """
    try:
        text = _RUNNERS[cfg.scenario](cfg)
    except Exception as err:
        partial = getattr(err, "partial_output", None)
        if partial is not None:
            _emit(cfg, partial)
        raise
    _emit(cfg, text)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gravvac",
        description="Scenario runner for the gravitational-vacuum register models.",
    )
    parser.add_argument("--config", default=None, help="path to a JSON or key=value config file")
    for key in _CASTERS:
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, default=None, metavar="V")
    return parser


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code instead of raising."""
    args = _build_parser().parse_args(argv)
    try:
        raw = _parse_text(Path(args.config).read_text()) if args.config else {}
        for key in _CASTERS:
            flag_value = getattr(args, key)
            if flag_value is not None:
                raw[key] = flag_value
        cfg = resolve_config(raw)
        run(cfg)
    except (InvariantViolation, IllConditionedKernel) as err:
        print(f"error: 3: {err}", file=sys.stderr)
        return 3
    except ConvergenceError as err:
        print(f"error: 4: {err}", file=sys.stderr)
        return 4
    except (ValueError, TypeError, KeyError, OSError) as err:
        print(f"error: 2: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
