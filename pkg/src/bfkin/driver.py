"""End-to-end time stepping: low-fidelity predict, select, project, run the
high-fidelity update on the selected velocity points, reconstruct.

Reference modes run the single-fidelity solvers on the full grid. The
low-fidelity prediction of a bi-fidelity step always starts from the current
bi-fidelity state, never from an accumulated low-fidelity trajectory.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import boltzmann as bz
from . import semiconductor as sc
from .collision import build_cross_section, build_dvm_tables, q_nb_loss_max
from .errors import ConfigError, NumericsError
from .error_metrics import ErrorReport, empirical_bound, similarity_ratio
from .grids import (
    DistributionField,
    build_centered_velocity_mesh,
    build_spatial_mesh,
    equilibrium_distance,
)
from .presets import (
    PRESET_DEFAULTS,
    PRESET_NAMES,
    potential_test1a,
    preset_initial_condition,
    sigma_test1a,
)
from .selection import bf_reconstruct, greedy_select, project_coefficients

logger = logging.getLogger(__name__)

MODELS = ("semiconductor", "boltzmann")
MODES = ("bifidelity", "hf_reference", "lf_reference")
DIAGNOSTICS = ("off", "light", "full")
STEPPERS = ("penalty_first_order", "imex_typeA")


@dataclass
class RunConfig:
    model: str = "boltzmann"
    preset: str | None = None
    epsilon: float = 1.0
    dt: float | None = None
    t_final: float | None = None
    gamma_max: int = 50
    delta: float = 1e-12
    mode: str = "bifidelity"
    diagnostics: str = "light"
    stepper: str = "imex_typeA"
    bc: str = "periodic"
    x_left: float = 0.0
    x_right: float = 1.0
    n_x: int = 50
    n_v: int = 32
    l_v: float = 8.0
    b0: float = 1.0 / (2.0 * math.pi)
    potential_form: str = "literal"
    transport_order: int = 1
    diag_interval: int = 10
    snapshot_times: tuple = ()
    blast_unit_domain: bool = False

    def validate(self) -> None:
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.diagnostics not in DIAGNOSTICS:
            raise ConfigError(f"unknown diagnostics level {self.diagnostics!r}")
        if self.stepper not in STEPPERS:
            raise ConfigError(f"unknown stepper {self.stepper!r}")
        if self.preset is not None and self.preset not in PRESET_NAMES:
            raise ConfigError(f"unknown preset {self.preset!r}")
        if self.dt is None or self.dt <= 0:
            raise ConfigError("dt must be set and positive")
        if self.t_final is None or self.t_final < 0:
            raise ConfigError("t_final must be set and non-negative")
        if self.gamma_max < 1:
            raise ConfigError("gamma_max must be at least 1")
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.epsilon <= 0:
            raise ConfigError("epsilon must be positive")
        if self.transport_order not in (1, 2):
            raise ConfigError("transport_order must be 1 or 2")
        if self.delta >= self.epsilon:
            logger.warning(
                "delta = %.2e is not below epsilon = %.2e; the stiff-limit "
                "consistency argument assumes delta < epsilon",
                self.delta, self.epsilon,
            )


def make_config(preset: str | None = None, **overrides) -> RunConfig:
    """Resolve preset defaults, apply overrides, and fill the CFL time step."""
    cfg = RunConfig()
    if preset is not None:
        if preset not in PRESET_NAMES:
            raise ConfigError(f"unknown preset {preset!r}")
        cfg = replace(cfg, preset=preset, **PRESET_DEFAULTS[preset])
    unknown = set(overrides) - set(cfg.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config fields: {sorted(unknown)}")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    cfg = replace(cfg, **overrides)
    if cfg.blast_unit_domain and cfg.preset == "test3_blast" and "x_left" not in overrides:
        cfg = replace(cfg, x_left=0.0, x_right=1.0)
    if cfg.dt is None and cfg.model == "boltzmann":
        dx = (cfg.x_right - cfg.x_left) / cfg.n_x
        cfg = replace(cfg, dt=dx / (2.0 * cfg.l_v))
    cfg.validate()
    return cfg


@dataclass(eq=False)
class Problem:
    config: RunConfig
    mesh_x: object
    mesh_v: object
    initial: DistributionField
    ws_semi: sc.SemiconductorWorkspace | None = None
    ws_boltz: bz.BoltzmannWorkspace | None = None

    @property
    def eq_model(self) -> str:
        return "linear" if self.config.model == "semiconductor" else "nonlinear"


def build_problem(config: RunConfig, initial: DistributionField | None = None,
                  sigma_fn=None, potential=None,
                  collision=None, rate_fn=None) -> Problem:
    """Assemble meshes, kernels and the initial state for a configuration.

    `sigma_fn`, `potential`, `collision` and `rate_fn` override the preset
    physics (used by tests to inject synthetic operators).
    """
    config.validate()
    mesh_x = build_spatial_mesh(config.x_left, config.x_right, config.n_x, config.bc)
    mesh_v = build_centered_velocity_mesh(
        1 if config.model == "semiconductor" else 2, config.l_v, config.n_v
    )
    if initial is None:
        if config.preset is None:
            raise ConfigError("no preset selected: an explicit initial condition is required")
        initial = preset_initial_condition(config.preset, mesh_x, mesh_v,
                                           config.blast_unit_domain)

    ws_semi = None
    ws_boltz = None
    if config.model == "semiconductor":
        if sigma_fn is None:
            sigma_fn = sigma_test1a if config.preset == "test1a" else (lambda v, w: 1.0)
        table = build_cross_section(mesh_v, sigma_fn)
        if potential is None:
            if config.preset == "test1a":
                phi_fn, dphi_fn = potential_test1a(config.potential_form)
                potential = sc.potential_from_function(mesh_x, phi_fn, dphi_fn)
            else:
                zeros = np.zeros(mesh_x.N_x)
                potential = sc.PotentialField(zeros, zeros.copy())
        ws_semi = sc.build_semiconductor_workspace(mesh_x, mesh_v, table, potential)
    else:
        tables = None if collision is not None else build_dvm_tables(mesh_v, config.b0)
        ws_boltz = bz.BoltzmannWorkspace(
            mesh_x=mesh_x, mesh_v=mesh_v, tables=tables,
            transport_order=config.transport_order, collision=collision,
            rate_fn=rate_fn,
        )
    return Problem(config, mesh_x, mesh_v, initial, ws_semi, ws_boltz)


@dataclass(eq=False)
class StepRecord:
    step: int
    time: float
    gamma_size: int
    equilibrium_distance: float
    min_value: float
    gamma: np.ndarray | None = None
    report: ErrorReport | None = None
    bound_ratio: float | None = None
    timings: dict = field(default_factory=dict)


def _penalty_rate(problem: Problem, values: np.ndarray) -> float:
    ws = problem.ws_boltz
    if ws.rate_fn is not None:
        return float(ws.rate_fn(values))
    return q_nb_loss_max(ws.tables, values)


def _hf_boltzmann(values, ws, dt, epsilon, lam, stepper, columns):
    if stepper == "imex_typeA":
        return bz.hf_step_imex_typeA(values, ws, dt, epsilon, lam, columns).f_next
    return bz.hf_step_penalty(values, ws, dt, epsilon, lam, columns)


def _bound_ratio(f_h_full, f_b, f_l, delta):
    num = np.max(np.abs(f_h_full - f_b), axis=1)
    den = np.max(np.abs(f_h_full - f_l), axis=1) + delta
    return float(np.max(num / den))


def bifid_step_boltzmann(f: DistributionField, problem: Problem,
                         step: int = 0) -> tuple[DistributionField, StepRecord]:
    cfg = problem.config
    ws = problem.ws_boltz
    timings = {}

    t0 = time.perf_counter()
    lam = _penalty_rate(problem, f.values)
    f_l = bz.lf_step_bgk(f.values, ws, cfg.dt, cfg.epsilon, lam)
    timings["lf"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sel = greedy_select(f_l, cfg.delta, cfg.gamma_max)
    if sel.size == 0:
        raise NumericsError("selection returned no velocity points", step=step)
    coeffs = project_coefficients(f_l, sel)
    timings["select"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    f_h_cols = _hf_boltzmann(f.values, ws, cfg.dt, cfg.epsilon, lam, cfg.stepper, sel.gamma)
    timings["hf"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    f_b = bf_reconstruct(coeffs, f_h_cols)
    timings["reconstruct"] = time.perf_counter() - t0
    if not np.all(np.isfinite(f_b)):
        raise NumericsError("non-finite values in the reconstructed state", step=step)

    f_next = DistributionField(f_b, f.mesh_x, f.mesh_v)
    record = _assemble_record(problem, step, sel, f_l, f_h_cols, f_b, f_next,
                              timings, lambda: _hf_boltzmann(
                                  f.values, ws, cfg.dt, cfg.epsilon, lam,
                                  cfg.stepper, None))
    return f_next, record


def bifid_step_semiconductor(f: DistributionField, problem: Problem,
                             step: int = 0) -> tuple[DistributionField, StepRecord]:
    cfg = problem.config
    ws = problem.ws_semi
    timings = {}

    state = sc.even_odd_decompose(f, cfg.epsilon)

    t0 = time.perf_counter()
    r_l = sc.lf_update_r(state, ws, cfg.dt)
    timings["lf"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    sel = greedy_select(r_l, cfg.delta, cfg.gamma_max)
    if sel.size == 0:
        raise NumericsError("selection returned no velocity points", step=step)
    coeffs = project_coefficients(r_l, sel)
    timings["select"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    r_h_cols = sc.hf_update_r(state, ws, cfg.dt, columns=sel.gamma)
    timings["hf"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    r_b = bf_reconstruct(coeffs, r_h_cols)
    if not np.all(np.isfinite(r_b)):
        raise NumericsError("non-finite values in the reconstructed state", step=step)
    j_b = sc.update_j(state, r_b, ws, cfg.dt)
    f_next = sc.even_odd_recompose(
        sc.EvenOddState(r_b, j_b, state.epsilon, state.phi), f.mesh_x, f.mesh_v
    )
    timings["reconstruct"] = time.perf_counter() - t0

    record = _assemble_record(problem, step, sel, r_l, r_h_cols, r_b, f_next,
                              timings, lambda: sc.hf_update_r(state, ws, cfg.dt))
    return f_next, record


def _assemble_record(problem, step, sel, lf_cols, hf_cols, bf_cols, f_next,
                     timings, full_hf_fn) -> StepRecord:
    cfg = problem.config
    report = None
    bound_ratio = None
    if cfg.diagnostics != "off":
        report = empirical_bound(lf_cols, sel.gamma, hf_cols, bf_cols)
        if cfg.diagnostics == "full" and step % cfg.diag_interval == 0:
            f_h_full = full_hf_fn()
            r_s = similarity_ratio(lf_cols, f_h_full, sel.gamma)
            # worst per-velocity-point relative error of the reconstruction
            err_norms = np.linalg.norm(f_h_full - bf_cols, axis=0)
            h_norms = np.linalg.norm(f_h_full, axis=0)
            ok = h_norms > 1e-300
            true_err = float(np.max(err_norms[ok] / h_norms[ok])) if np.any(ok) else None
            bound_ratio = _bound_ratio(f_h_full, bf_cols, lf_cols, cfg.delta)
            report = replace(report, r_s=r_s, true_error=true_err)
    return StepRecord(
        step=step,
        time=(step + 1) * cfg.dt,
        gamma_size=sel.size,
        equilibrium_distance=equilibrium_distance(f_next, problem.eq_model),
        min_value=float(f_next.values.min()),
        gamma=sel.gamma.copy(),
        report=report,
        bound_ratio=bound_ratio,
        timings=timings,
    )


def reference_step(f: DistributionField, problem: Problem, fidelity: str,
                   step: int = 0) -> tuple[DistributionField, StepRecord]:
    cfg = problem.config
    if cfg.model == "boltzmann":
        ws = problem.ws_boltz
        lam = _penalty_rate(problem, f.values)
        if fidelity == "hf":
            vals = _hf_boltzmann(f.values, ws, cfg.dt, cfg.epsilon, lam, cfg.stepper, None)
        else:
            vals = bz.lf_step_bgk(f.values, ws, cfg.dt, cfg.epsilon, lam)
        f_next = DistributionField(vals, f.mesh_x, f.mesh_v)
    else:
        ws = problem.ws_semi
        state = sc.even_odd_decompose(f, cfg.epsilon)
        if fidelity == "hf":
            r_next = sc.hf_update_r(state, ws, cfg.dt)
        else:
            r_next = sc.lf_update_r(state, ws, cfg.dt)
        j_next = sc.update_j(state, r_next, ws, cfg.dt)
        f_next = sc.even_odd_recompose(
            sc.EvenOddState(r_next, j_next, state.epsilon, state.phi),
            f.mesh_x, f.mesh_v,
        )
    record = StepRecord(
        step=step,
        time=(step + 1) * cfg.dt,
        gamma_size=0,
        equilibrium_distance=equilibrium_distance(f_next, problem.eq_model),
        min_value=float(f_next.values.min()),
    )
    return f_next, record


@dataclass(eq=False)
class RunResult:
    final: DistributionField
    history: list
    problem: Problem


def run_simulation(config: RunConfig, problem: Problem | None = None) -> RunResult:
    """March the configured solver to t_final and record per-step diagnostics."""
    if problem is None:
        problem = build_problem(config)
    cfg = problem.config
    f = problem.initial.copy()
    history: list[StepRecord] = []

    n_full = int(math.floor(cfg.t_final / cfg.dt + 1e-9))
    leftover = cfg.t_final - n_full * cfg.dt
    steps = [cfg.dt] * n_full
    if leftover > 1e-12 * cfg.dt:
        steps.append(leftover)

    for n, dt_n in enumerate(steps):
        step_problem = problem
        if dt_n != cfg.dt:
            step_problem = replace_config_dt(problem, dt_n)
        if cfg.mode == "bifidelity":
            if cfg.model == "boltzmann":
                f, rec = bifid_step_boltzmann(f, step_problem, n)
            else:
                f, rec = bifid_step_semiconductor(f, step_problem, n)
        else:
            fidelity = "hf" if cfg.mode == "hf_reference" else "lf"
            f, rec = reference_step(f, step_problem, fidelity, n)
        if not np.all(np.isfinite(f.values)):
            raise NumericsError("non-finite values in the updated state", step=n)
        rec.time = min((n + 1) * cfg.dt, cfg.t_final)
        history.append(rec)
    return RunResult(final=f, history=history, problem=problem)


def replace_config_dt(problem: Problem, dt: float) -> Problem:
    cfg = replace(problem.config, dt=dt)
    return Problem(cfg, problem.mesh_x, problem.mesh_v, problem.initial,
                   problem.ws_semi, problem.ws_boltz)
