"""One-step updates for the nonlinear kinetic model in hyperbolic scaling.

All implicit relaxation solves exploit that the BGK operator conserves
moments: the Maxwellian entering an implicit stage is built from the moments
of the explicitly known part of the update, then the stage equation is solved
pointwise. Discrete Maxwellians are moment-matched Gaussians so the solves
conserve (rho, rho*u, E) to solver precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .collision import DvmTables, q_nb_dvm_apply
from .errors import CflViolationError
from .grids import (
    MacroMoments,
    SpatialMesh,
    VelocityMesh,
    compute_moments,
    matched_maxwellian,
)


@dataclass(eq=False)
class BoltzmannWorkspace:
    mesh_x: SpatialMesh
    mesh_v: VelocityMesh
    tables: DvmTables | None = None
    transport_order: int = 1
    collision: object = None  # callable (values, columns|None) -> values
    rate_fn: object = None    # callable (values) -> penalty rate lambda

    def collision_op(self):
        if self.collision is not None:
            return self.collision
        if self.tables is None:
            raise ValueError("workspace has neither collision tables nor a collision callable")
        return lambda values, columns=None: q_nb_dvm_apply(self.tables, values, columns)


@dataclass(eq=False)
class TransportedState:
    f_star: np.ndarray
    mesh_v: VelocityMesh
    _moments: MacroMoments | None = None

    @property
    def moments(self) -> MacroMoments:
        # lazy: pure transport of pulse-like test data may hold vacuum cells
        if self._moments is None:
            self._moments = compute_moments(self.f_star, self.mesh_v)
        return self._moments


def _ghost_extend(values: np.ndarray, mesh_v: VelocityMesh, bc: str, layers: int) -> np.ndarray:
    if bc == "periodic":
        top = values[-layers:]
        bot = values[:layers]
    elif bc == "neumann":
        top = np.repeat(values[:1], layers, axis=0)
        bot = np.repeat(values[-1:], layers, axis=0)
    elif bc == "specular":
        flip = mesh_v.axis_negation(0)
        top = values[layers - 1::-1][:, flip]
        bot = values[:-layers - 1:-1][:, flip]
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    return np.concatenate([top, values, bot], axis=0)


def _minmod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    same = a * b > 0
    return np.where(same, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def check_cfl(mesh_x: SpatialMesh, mesh_v: VelocityMesh, dt: float) -> None:
    vmax = float(np.max(np.abs(mesh_v.axis)))
    dt_max = mesh_x.delta_x / vmax
    if dt > dt_max * (1.0 + 1e-12):
        raise CflViolationError(dt, dt_max)


def upwind_divergence(values: np.ndarray, mesh_x: SpatialMesh, mesh_v: VelocityMesh,
                      order: int = 1) -> np.ndarray:
    """Flux difference of v1-upwind transport; conservative by construction."""
    v1 = mesh_v.points[:, 0][None, :]
    bc = mesh_x.bc
    if order == 1:
        ext = _ghost_extend(values, mesh_v, bc, 1)
        upwind = np.where(v1 > 0, ext[:-1], ext[1:])
        flux = v1 * upwind
    elif order == 2:
        ext = _ghost_extend(values, mesh_v, bc, 2)
        slope = _minmod(ext[1:-1] - ext[:-2], ext[2:] - ext[1:-1])
        inner = ext[1:-1]
        left = inner[:-1] + 0.5 * slope[:-1]
        right = inner[1:] - 0.5 * slope[1:]
        flux = v1 * np.where(v1 > 0, left, right)
    else:
        raise ValueError(f"transport order must be 1 or 2, got {order}")
    return (flux[1:] - flux[:-1]) / mesh_x.delta_x


def transport_step(values: np.ndarray, mesh_x: SpatialMesh, mesh_v: VelocityMesh,
                   dt: float, order: int = 1) -> TransportedState:
    """Explicit upwind transport f - dt * v1 * df/dx with the mesh boundary rule."""
    check_cfl(mesh_x, mesh_v, dt)
    f_star = values - dt * upwind_divergence(values, mesh_x, mesh_v, order)
    return TransportedState(f_star, mesh_v)


def lf_step_bgk(values: np.ndarray, ws: BoltzmannWorkspace, dt: float,
                epsilon: float, lam: float) -> np.ndarray:
    """Transport followed by the implicit relaxation toward the local Maxwellian."""
    if lam <= 0:
        raise ValueError(f"relaxation rate must be positive, got {lam}")
    ts = transport_step(values, ws.mesh_x, ws.mesh_v, dt, ws.transport_order)
    m_next = matched_maxwellian(ws.mesh_v, ts.moments.rho, ts.moments.u, ts.moments.T)
    return (epsilon * ts.f_star + lam * dt * m_next) / (epsilon + lam * dt)


def _column_view(arr: np.ndarray, columns):
    return arr if columns is None else arr[:, columns]


def _validate_columns(mesh_v: VelocityMesh, columns):
    if columns is None:
        return None
    cols = np.asarray(columns, dtype=np.int64)
    if cols.size and (cols.min() < 0 or cols.max() >= mesh_v.n_points):
        raise IndexError("velocity column index out of range")
    return cols


def hf_step_penalty(values: np.ndarray, ws: BoltzmannWorkspace, dt: float,
                    epsilon: float, lam: float,
                    columns: np.ndarray | None = None) -> np.ndarray:
    """First-order penalty step; collision evaluated only at `columns`."""
    cols = _validate_columns(ws.mesh_v, columns)
    ts = transport_step(values, ws.mesh_x, ws.mesh_v, dt, ws.transport_order)
    m_star = matched_maxwellian(ws.mesh_v, ts.moments.rho, ts.moments.u, ts.moments.T)
    mom_n = compute_moments(values, ws.mesh_v)
    m_n = matched_maxwellian(ws.mesh_v, mom_n.rho, mom_n.u, mom_n.T)
    q = ws.collision_op()(values, cols)
    num = epsilon * _column_view(ts.f_star, cols) \
        + dt * (q - lam * (_column_view(m_n, cols) - _column_view(values, cols))) \
        + lam * dt * _column_view(m_star, cols)
    return num / (epsilon + lam * dt)


@dataclass(eq=False)
class ImexStepResult:
    f_next: np.ndarray       # stage-2 values at the requested columns
    stage1: np.ndarray       # full-grid relaxation stage
    transported: np.ndarray  # f^n - dt * v d_x stage1, full grid
    moments2: MacroMoments   # moments defining the stage-2 Maxwellian


def hf_step_imex_typeA(values: np.ndarray, ws: BoltzmannWorkspace, dt: float,
                       epsilon: float, lam: float,
                       columns: np.ndarray | None = None) -> ImexStepResult:
    """Two-stage IMEX step: full-grid implicit relaxation, then a stiff stage
    solved only at `columns`.

    Stage 1 carries no transport, so its moments equal those of the input and
    the implicit Maxwellian is available directly. Stage 2 needs the moments
    of f^n - dt * v d_x f^(1); stage-1 values exist on the whole grid and both
    collision terms are conservative, so that Maxwellian is also computable
    without solving stage 2 everywhere.
    """
    cols = _validate_columns(ws.mesh_v, columns)
    check_cfl(ws.mesh_x, ws.mesh_v, dt)
    mom0 = compute_moments(values, ws.mesh_v)
    m1 = matched_maxwellian(ws.mesh_v, mom0.rho, mom0.u, mom0.T)
    stage1 = (epsilon * values + lam * dt * m1) / (epsilon + lam * dt)

    transported = values - dt * upwind_divergence(stage1, ws.mesh_x, ws.mesh_v,
                                                  ws.transport_order)
    mom2 = compute_moments(transported, ws.mesh_v)
    m2 = matched_maxwellian(ws.mesh_v, mom2.rho, mom2.u, mom2.T)

    q1 = ws.collision_op()(stage1, cols)
    num = epsilon * _column_view(transported, cols) \
        + lam * dt * _column_view(m2, cols) \
        + dt * (q1 - lam * (_column_view(m1, cols) - _column_view(stage1, cols)))
    f2 = num / (epsilon + lam * dt)
    return ImexStepResult(f_next=f2, stage1=stage1, transported=transported, moments2=mom2)
