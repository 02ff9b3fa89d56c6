"""Even/odd reformulation and one-step updates for the linear kinetic model
under diffusive scaling.

For v > 0 the distribution is split into r = (f(v) + f(-v))/2 and
j = (f(v) - f(-v))/(2 eps) on the positive half of a centered velocity grid,
where every point has an exact negation partner. Spatial gradients use the
characteristic form of first-order upwinding: central differences on the
coupled variable plus |v|-scaled dissipation on the transported one. The
stiff relaxation is solved pointwise after integrating the update in v, which
determines the new density explicitly because both the collision operator
(symmetric kernel) and the penalty (unit-mass equilibrium) are mass-free.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .collision import CrossSectionTable
from .errors import BfkinError
from .grids import (
    DistributionField,
    SpatialMesh,
    VelocityMesh,
    equilibrium_profile_linear,
)

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class PotentialField:
    phi: np.ndarray   # (N_x,)
    dphi: np.ndarray  # (N_x,) spatial derivative at the cells


def potential_from_function(mesh_x: SpatialMesh, phi_fn, dphi_fn=None) -> PotentialField:
    phi = np.array([phi_fn(x) for x in mesh_x.cells], dtype=float)
    if dphi_fn is not None:
        dphi = np.array([dphi_fn(x) for x in mesh_x.cells], dtype=float)
    else:
        padded = _pad_rows(phi[:, None], mesh_x.bc)[:, 0]
        dphi = (padded[2:] - padded[:-2]) / (2.0 * mesh_x.delta_x)
    return PotentialField(phi, dphi)


@dataclass(eq=False)
class EvenOddState:
    r: np.ndarray        # (N_x, N/2) even part on the positive half-grid
    j: np.ndarray        # (N_x, N/2) scaled odd part
    epsilon: float
    phi: float           # control parameter min(1, 1/eps^2)


def _control_parameter(epsilon: float) -> float:
    return min(1.0, 1.0 / (epsilon * epsilon))


def _half_indices(mesh_v: VelocityMesh) -> tuple[np.ndarray, np.ndarray]:
    if mesh_v.d_v != 1 or not mesh_v.centered or mesh_v.N_v % 2:
        raise BfkinError(
            "even/odd splitting needs a 1-D centered velocity grid with even N_v"
        )
    pos = np.arange(mesh_v.N_v // 2, mesh_v.N_v)
    neg = mesh_v.N_v - 1 - pos
    return pos, neg


def even_odd_decompose(field: DistributionField, epsilon: float) -> EvenOddState:
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    pos, neg = _half_indices(field.mesh_v)
    f = field.values
    r = 0.5 * (f[:, pos] + f[:, neg])
    j = (f[:, pos] - f[:, neg]) / (2.0 * epsilon)
    return EvenOddState(r, j, float(epsilon), _control_parameter(epsilon))


def even_odd_recompose(state: EvenOddState, mesh_x: SpatialMesh,
                       mesh_v: VelocityMesh) -> DistributionField:
    pos, neg = _half_indices(mesh_v)
    values = np.empty((mesh_x.N_x, mesh_v.n_points))
    values[:, pos] = state.r + state.epsilon * state.j
    values[:, neg] = state.r - state.epsilon * state.j
    return DistributionField(values, mesh_x, mesh_v)


@dataclass(eq=False)
class SemiconductorWorkspace:
    """Half-grid views of the meshes, kernel and potential shared by the updates."""

    mesh_x: SpatialMesh
    mesh_v: VelocityMesh
    potential: PotentialField
    v_half: np.ndarray         # (Nh,) positive velocities
    m_half: np.ndarray         # (Nh,) raw Maxwellian samples
    eq_half: np.ndarray        # (Nh,) unit-discrete-mass equilibrium
    a_folded: np.ndarray       # (Nh, Nh) sigma folded over v -> -v
    mu_half: np.ndarray        # (Nh,)
    lam: float


def build_semiconductor_workspace(mesh_x: SpatialMesh, mesh_v: VelocityMesh,
                                  table: CrossSectionTable,
                                  potential: PotentialField) -> SemiconductorWorkspace:
    pos, neg = _half_indices(mesh_v)
    if table.mesh is not mesh_v:
        raise BfkinError("cross-section table was built on a different velocity mesh")
    sigma = table.sigma
    a_folded = sigma[np.ix_(pos, pos)] + sigma[np.ix_(pos, neg)]
    m_half = table.maxwell[pos]
    mu_half = (m_half[None, :] @ a_folded.T)[0] * mesh_v.delta_v
    eq_half = equilibrium_profile_linear(mesh_v)[pos]
    return SemiconductorWorkspace(
        mesh_x=mesh_x,
        mesh_v=mesh_v,
        potential=potential,
        v_half=mesh_v.axis[pos].copy(),
        m_half=m_half,
        eq_half=eq_half,
        a_folded=a_folded,
        mu_half=mu_half,
        lam=table.lambda_lin,
    )


def half_grid_density(ws: SemiconductorWorkspace, r: np.ndarray) -> np.ndarray:
    return 2.0 * ws.mesh_v.delta_v * r.sum(axis=1)


def _pad_rows(arr: np.ndarray, bc: str, negate_ghost: bool = False) -> np.ndarray:
    """Add one ghost row above and below; `negate_ghost` flips specular copies."""
    if bc == "periodic":
        top, bot = arr[-1:], arr[:1]
    elif bc == "neumann":
        top, bot = arr[:1], arr[-1:]
    elif bc == "specular":
        sign = -1.0 if negate_ghost else 1.0
        top, bot = sign * arr[:1], sign * arr[-1:]
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    return np.concatenate([top, arr, bot], axis=0)


def _dx_central(arr: np.ndarray, ws, negate_ghost=False) -> np.ndarray:
    p = _pad_rows(arr, ws.mesh_x.bc, negate_ghost)
    return (p[2:] - p[:-2]) / (2.0 * ws.mesh_x.delta_x)


def _dxx(arr: np.ndarray, ws, negate_ghost=False) -> np.ndarray:
    p = _pad_rows(arr, ws.mesh_x.bc, negate_ghost)
    return (p[2:] - 2.0 * p[1:-1] + p[:-2]) / ws.mesh_x.delta_x ** 2


def _dv_upwind(arr: np.ndarray, ws, parity: float) -> np.ndarray:
    """Flux-form velocity derivative upwinded by the sign of dPhi/dx per cell.

    Interior interface values are upwinded; the v = 0 interface carries the
    parity trace (the even value, or exactly zero for odd functions) and the
    v = L_v interface is closed (zero flux both ways, so a strong field cannot
    pump mass out of the velocity box). The flux differences telescope in v,
    making the drift term exactly mass-free.
    """
    dv = ws.mesh_v.delta_v
    n_x, n_h = arr.shape
    positive = ws.potential.dphi[:, None] > 0
    flux = np.empty((n_x, n_h + 1))
    flux[:, 1:-1] = np.where(positive, arr[:, :-1], arr[:, 1:])
    flux[:, 0] = arr[:, 0] if parity > 0 else 0.0
    flux[:, -1] = 0.0
    return (flux[:, 1:] - flux[:, :-1]) / dv


def _r_transport(ws: SemiconductorWorkspace, r: np.ndarray, j: np.ndarray) -> np.ndarray:
    v = ws.v_half[None, :]
    dx = ws.mesh_x.delta_x
    term = v * _dx_central(j, ws, negate_ghost=True)
    term -= 0.5 * v * dx * _dxx(r, ws)
    term += ws.potential.dphi[:, None] * _dv_upwind(j, ws, parity=-1.0)
    return term


def _j_gradient(ws: SemiconductorWorkspace, r: np.ndarray,
                with_dissipation_on: np.ndarray | None = None) -> np.ndarray:
    v = ws.v_half[None, :]
    term = v * _dx_central(r, ws)
    if with_dissipation_on is not None:
        term -= 0.5 * v * ws.mesh_x.delta_x * _dxx(with_dissipation_on, ws, negate_ghost=True)
    term += ws.potential.dphi[:, None] * _dv_upwind(r, ws, parity=1.0)
    return term


def lf_update_r(state: EvenOddState, ws: SemiconductorWorkspace, dt: float) -> np.ndarray:
    """Low-fidelity update: explicit transport plus implicit relaxation to rho*M."""
    eps2 = state.epsilon ** 2
    r_star = state.r - dt * _r_transport(ws, state.r, state.j)
    rho_next = half_grid_density(ws, r_star)
    if np.any(rho_next <= 0):
        logger.warning("non-positive density in %d cells after transport",
                       int(np.sum(rho_next <= 0)))
    a = dt * ws.lam / eps2
    return (r_star + a * rho_next[:, None] * ws.eq_half[None, :]) / (1.0 + a)


def q_lb_half_apply(ws: SemiconductorWorkspace, r: np.ndarray,
                    columns: np.ndarray | None = None) -> np.ndarray:
    """Linear collision operator on the half-grid (kernel folded over v -> -v)."""
    cols = slice(None) if columns is None else np.asarray(columns, dtype=np.int64)
    rows_a = ws.a_folded[cols]
    t = (r @ rows_a.T) * ws.mesh_v.delta_v
    return ws.m_half[cols][None, :] * t - r[:, cols] * ws.mu_half[cols][None, :]


def hf_update_r(state: EvenOddState, ws: SemiconductorWorkspace, dt: float,
                columns: np.ndarray | None = None) -> np.ndarray:
    """High-fidelity update; the collision evaluation may be restricted to a
    subset of half-grid columns (transport stays full-grid, it is cheap and
    supplies the implicit density)."""
    eps2 = state.epsilon ** 2
    r = state.r
    r_star = r - dt * _r_transport(ws, r, state.j)
    rho_next = half_grid_density(ws, r_star)
    if np.any(rho_next <= 0):
        logger.warning("non-positive density in %d cells after transport",
                       int(np.sum(rho_next <= 0)))
    cols = slice(None) if columns is None else np.asarray(columns, dtype=np.int64)
    q = q_lb_half_apply(ws, r, columns)
    rho_n = half_grid_density(ws, r)
    pen = ws.lam * (rho_n[:, None] * ws.eq_half[cols][None, :] - r[:, cols])
    a = dt * ws.lam / eps2
    num = r_star[:, cols] + (dt / eps2) * (q - pen) \
        + a * rho_next[:, None] * ws.eq_half[cols][None, :]
    return num / (1.0 + a)


def update_j(state: EvenOddState, r_next: np.ndarray, ws: SemiconductorWorkspace,
             dt: float) -> np.ndarray:
    """Pointwise-implicit update of the scaled odd part."""
    eps2 = state.epsilon ** 2
    phi = state.phi
    stiff_coeff = max(0.0, 1.0 - eps2 * phi)
    expl = state.j - dt * phi * _j_gradient(ws, state.r, with_dissipation_on=state.j)
    if stiff_coeff > 0.0:
        expl -= (dt / eps2) * stiff_coeff * _j_gradient(ws, r_next)
    denom = 1.0 + dt * ws.mu_half[None, :] / eps2
    return expl / denom
