"""Velocity/space meshes, distribution storage, Maxwellians, moments and norms.

The velocity box is [-L_v, L_v]^d with uniform spacing dv = 2*L_v/N_v. Two
point layouts are supported:

* node layout: v = -L_v + k*dv (the +L_v endpoint is excluded),
* centered layout: v = -L_v + (k + 1/2)*dv, which is exactly symmetric
  under v -> -v for even N_v and is required by the even/odd solver and by
  specular walls.

Flat indexing of d-dimensional points is row-major over dimensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericsError, VacuumCellError

VACUUM_TOLERANCE = 1e-14

BOUNDARY_CONDITIONS = ("periodic", "neumann", "specular")


@dataclass(frozen=True, eq=False)
class VelocityMesh:
    d_v: int
    L_v: float
    N_v: int
    delta_v: float
    centered: bool
    axis: np.ndarray    # (N_v,) coordinates shared by every dimension
    points: np.ndarray  # (N, d_v) flat list of velocity vectors, row-major

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    def multi_index(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.n_points:
            raise IndexError(f"flat index {flat} out of range")
        if self.d_v == 1:
            return (flat,)
        return (flat // self.N_v, flat % self.N_v)

    def flat_index(self, multi: tuple[int, ...]) -> int:
        if len(multi) != self.d_v:
            raise IndexError(f"expected {self.d_v} index components")
        for k in multi:
            if not 0 <= k < self.N_v:
                raise IndexError(f"index component {k} out of range")
        if self.d_v == 1:
            return multi[0]
        return multi[0] * self.N_v + multi[1]

    def negation_partner(self) -> np.ndarray:
        """Flat-index map ell -> ell' with v_{ell'} = -v_{ell} (centered layout only)."""
        if not self.centered:
            raise ValueError("exact negation partners require the centered layout")
        axis_map = np.arange(self.N_v)[::-1]
        return self._remap(axis_map, axes=tuple(range(self.d_v)))

    def axis_negation(self, dim: int) -> np.ndarray:
        """Flat-index map negating a single velocity component (centered layout only)."""
        if not self.centered:
            raise ValueError("exact negation partners require the centered layout")
        axis_map = np.arange(self.N_v)[::-1]
        return self._remap(axis_map, axes=(dim,))

    def _remap(self, axis_map: np.ndarray, axes: tuple[int, ...]) -> np.ndarray:
        idx = np.arange(self.n_points)
        if self.d_v == 1:
            return axis_map[idx]
        k1, k2 = idx // self.N_v, idx % self.N_v
        if 0 in axes:
            k1 = axis_map[k1]
        if 1 in axes:
            k2 = axis_map[k2]
        return k1 * self.N_v + k2


def _build_mesh(d_v: int, L_v: float, N_v: int, centered: bool) -> VelocityMesh:
    if d_v not in (1, 2):
        raise ValueError(f"velocity dimension must be 1 or 2, got {d_v}")
    if N_v < 2:
        raise ValueError(f"need at least 2 velocity points per dimension, got {N_v}")
    if L_v <= 0:
        raise ValueError(f"velocity half-width must be positive, got {L_v}")
    if centered and N_v % 2 != 0:
        raise ValueError("centered layout requires an even N_v")
    delta_v = 2.0 * L_v / N_v
    offset = 0.5 if centered else 0.0
    axis = -L_v + (np.arange(N_v) + offset) * delta_v
    if d_v == 1:
        points = axis[:, None].copy()
    else:
        g1, g2 = np.meshgrid(axis, axis, indexing="ij")
        points = np.column_stack([g1.ravel(), g2.ravel()])
    return VelocityMesh(d_v, float(L_v), int(N_v), float(delta_v), centered, axis, points)


def build_velocity_mesh(d_v: int, L_v: float, N_v: int) -> VelocityMesh:
    """Node-layout velocity mesh with points -L_v + k*dv."""
    return _build_mesh(d_v, L_v, N_v, centered=False)


def build_centered_velocity_mesh(d_v: int, L_v: float, N_v: int) -> VelocityMesh:
    """Cell-centered velocity mesh, exactly symmetric under v -> -v."""
    return _build_mesh(d_v, L_v, N_v, centered=True)


@dataclass(frozen=True, eq=False)
class SpatialMesh:
    x_left: float
    x_right: float
    N_x: int
    delta_x: float
    bc: str
    cells: np.ndarray  # (N_x,) point coordinates x_left + i*dx


def build_spatial_mesh(x_left: float, x_right: float, N_x: int, bc: str) -> SpatialMesh:
    if N_x < 2:
        raise ValueError(f"need at least 2 spatial cells, got {N_x}")
    if not x_right > x_left:
        raise ValueError("x_right must exceed x_left")
    if bc not in BOUNDARY_CONDITIONS:
        raise ValueError(f"unknown boundary condition {bc!r}; expected one of {BOUNDARY_CONDITIONS}")
    delta_x = (x_right - x_left) / N_x
    cells = x_left + np.arange(N_x) * delta_x
    return SpatialMesh(float(x_left), float(x_right), int(N_x), float(delta_x), bc, cells)


@dataclass(eq=False)
class DistributionField:
    """Discrete distribution f(x_i, v_ell) stored as an N_x-by-N matrix."""

    values: np.ndarray
    mesh_x: SpatialMesh
    mesh_v: VelocityMesh

    def __post_init__(self):
        expected = (self.mesh_x.N_x, self.mesh_v.n_points)
        if self.values.shape != expected:
            raise ValueError(f"field shape {self.values.shape} does not match meshes {expected}")

    @property
    def cell_volume(self) -> float:
        return self.mesh_x.delta_x * self.mesh_v.delta_v ** self.mesh_v.d_v

    def copy(self) -> "DistributionField":
        return DistributionField(self.values.copy(), self.mesh_x, self.mesh_v)


@dataclass(eq=False)
class MacroMoments:
    rho: np.ndarray  # (M,)
    u: np.ndarray    # (M, d_v)
    T: np.ndarray    # (M,)


def maxwellian(mesh: VelocityMesh, rho: float, u, T: float) -> np.ndarray:
    """Sampled Maxwellian profile rho/(2*pi*T)^{d/2} * exp(-|v-u|^2/(2T))."""
    if rho <= 0:
        raise ValueError(f"density must be positive, got {rho}")
    if T <= 0:
        raise ValueError(f"temperature must be positive, got {T}")
    u_arr = np.atleast_1d(np.asarray(u, dtype=float))
    if u_arr.shape != (mesh.d_v,):
        raise ValueError(f"bulk velocity must have {mesh.d_v} components")
    diff = mesh.points - u_arr[None, :]
    expo = -np.sum(diff * diff, axis=1) / (2.0 * T)
    norm = rho / (2.0 * math.pi * T) ** (mesh.d_v / 2.0)
    return norm * np.exp(expo)


def maxwellian_field(mesh_x: SpatialMesh, mesh_v: VelocityMesh,
                     rho, u, T) -> DistributionField:
    """Field whose cell i holds the sampled Maxwellian of (rho_i, u_i, T_i)."""
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (mesh_x.N_x,))
    T = np.broadcast_to(np.asarray(T, dtype=float), (mesh_x.N_x,))
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = np.broadcast_to(u, (mesh_x.N_x, mesh_v.d_v))
    values = np.empty((mesh_x.N_x, mesh_v.n_points))
    for i in range(mesh_x.N_x):
        values[i] = maxwellian(mesh_v, rho[i], u[i], T[i])
    return DistributionField(values, mesh_x, mesh_v)


def compute_moments(values: np.ndarray, mesh: VelocityMesh) -> MacroMoments:
    """Rectangle-rule density, bulk velocity and temperature per row.

    The temperature convention is T = (1/(2 rho)) int |v-u|^2 f dv in 2-D and
    T = (1/rho) int (v-u)^2 f dv in 1-D, so that the temperature of a 1-D
    Maxwellian with variance T is T itself.
    """
    vals = np.atleast_2d(np.asarray(values, dtype=float))
    w = mesh.delta_v ** mesh.d_v
    rho = w * vals.sum(axis=1)
    bad = np.nonzero(rho < VACUUM_TOLERANCE)[0]
    if bad.size:
        raise VacuumCellError(bad[0], rho[bad[0]])
    m1 = w * (vals @ mesh.points)              # (M, d_v)
    u = m1 / rho[:, None]
    vsq = np.sum(mesh.points * mesh.points, axis=1)
    m2 = w * (vals @ vsq)                      # (M,)
    usq = np.sum(u * u, axis=1)
    centered_second = m2 - 2.0 * np.sum(u * m1, axis=1) + rho * usq
    if mesh.d_v == 1:
        T = centered_second / rho
    else:
        T = centered_second / (2.0 * rho)
    if np.any(T <= 0):
        i = int(np.nonzero(T <= 0)[0][0])
        raise NumericsError(f"non-positive temperature {T[i]:.3e} at cell {i}")
    return MacroMoments(rho, u, T)


def field_moments(field: DistributionField) -> MacroMoments:
    return compute_moments(field.values, field.mesh_v)


_MATCH_TOL = 1e-13
_MATCH_MAX_ITER = 40


def matched_maxwellian(mesh: VelocityMesh, rho, u, T) -> np.ndarray:
    """Gaussian profiles whose *discrete* moments equal the targets.

    A plainly sampled Gaussian carries quadrature error in its rectangle-rule
    moments; the implicit relaxation solves rely on the discrete moments being
    exact, so the Gaussian parameters are Newton-corrected until the discrete
    (rho, u, T) hit the targets to ~1e-13 relative. Rows are independent cells.
    """
    if mesh.d_v != 2:
        raise NotImplementedError("moment-matched Maxwellians are only needed for d_v = 2")
    rho_t = np.atleast_1d(np.asarray(rho, dtype=float)).copy()
    T_t = np.atleast_1d(np.asarray(T, dtype=float)).copy()
    u_t = np.atleast_2d(np.asarray(u, dtype=float)).copy()
    m = rho_t.shape[0]
    if np.any(rho_t < VACUUM_TOLERANCE):
        i = int(np.nonzero(rho_t < VACUUM_TOLERANCE)[0][0])
        raise VacuumCellError(i, rho_t[i])
    if np.any(T_t <= 0):
        i = int(np.nonzero(T_t <= 0)[0][0])
        raise NumericsError(f"non-positive target temperature {T_t[i]:.3e} at cell {i}")

    # Match the linear functionals (m0, m1, m2): m2 target follows from T.
    tgt = np.empty((m, 4))
    tgt[:, 0] = rho_t
    tgt[:, 1:3] = rho_t[:, None] * u_t
    tgt[:, 3] = rho_t * (2.0 * T_t + np.sum(u_t * u_t, axis=1))

    pts = mesh.points
    vsq = np.sum(pts * pts, axis=1)
    w = mesh.delta_v ** 2

    theta = np.column_stack([rho_t, u_t, T_t])  # (m, 4): rho, ux, uy, T
    scale = np.maximum(np.abs(tgt), rho_t[:, None] * np.maximum(T_t, 1.0)[:, None])
    for _ in range(_MATCH_MAX_ITER):
        prof = _gaussian_profiles(pts, theta)
        mom = np.empty((m, 4))
        mom[:, 0] = w * prof.sum(axis=1)
        mom[:, 1:3] = w * (prof @ pts)
        mom[:, 3] = w * (prof @ vsq)
        res = tgt - mom
        if np.all(np.abs(res) <= _MATCH_TOL * scale):
            return prof
        jac = _moment_jacobian(pts, vsq, prof, theta, w)
        try:
            delta = np.linalg.solve(jac, res[:, :, None])[:, :, 0]
        except np.linalg.LinAlgError as exc:
            raise NumericsError(f"moment matching Jacobian is singular: {exc}") from exc
        theta = theta + delta
        if np.any(~np.isfinite(theta)) or np.any(theta[:, 0] <= 0) or np.any(theta[:, 3] <= 0):
            raise NumericsError("moment matching left the admissible parameter range")
    raise NumericsError("moment matching failed to converge")


def _gaussian_profiles(pts: np.ndarray, theta: np.ndarray) -> np.ndarray:
    d1 = pts[None, :, 0] - theta[:, 1, None]
    d2 = pts[None, :, 1] - theta[:, 2, None]
    Tc = theta[:, 3, None]
    return theta[:, 0, None] / (2.0 * math.pi * Tc) * np.exp(-(d1 * d1 + d2 * d2) / (2.0 * Tc))


def _moment_jacobian(pts, vsq, prof, theta, w):
    m = theta.shape[0]
    d1 = pts[None, :, 0] - theta[:, 1, None]
    d2 = pts[None, :, 1] - theta[:, 2, None]
    Tc = theta[:, 3, None]
    dsq = d1 * d1 + d2 * d2
    dM = np.empty((m, 4, pts.shape[0]))
    dM[:, 0, :] = prof / theta[:, 0, None]
    dM[:, 1, :] = prof * d1 / Tc
    dM[:, 2, :] = prof * d2 / Tc
    dM[:, 3, :] = prof * (dsq / (2.0 * Tc * Tc) - 1.0 / Tc)
    jac = np.empty((m, 4, 4))
    jac[:, 0, :] = w * dM.sum(axis=2)
    jac[:, 1, :] = w * (dM @ pts[:, 0])
    jac[:, 2, :] = w * (dM @ pts[:, 1])
    jac[:, 3, :] = w * (dM @ vsq)
    return jac


def lp_norm(values: np.ndarray, p, weight: float = 1.0) -> float:
    """Discrete l^p norm; `weight` is the per-entry quadrature weight."""
    vals = np.asarray(values, dtype=float)
    if p == np.inf or p == "inf":
        return float(np.max(np.abs(vals))) if vals.size else 0.0
    if p == 1:
        return float(weight * np.sum(np.abs(vals)))
    if p == 2:
        return float(math.sqrt(weight * np.sum(vals * vals)))
    raise ValueError(f"unsupported norm order {p!r}")


def equilibrium_profile_linear(mesh: VelocityMesh) -> np.ndarray:
    """Background Maxwellian normalized to unit discrete mass.

    The relaxation operator of the linear model must have exactly zero
    discrete mean, otherwise the stiff implicit solve leaks mass at a rate
    amplified by dt/eps^2.
    """
    raw = maxwellian(mesh, 1.0, np.zeros(mesh.d_v), 1.0)
    mass = mesh.delta_v ** mesh.d_v * raw.sum()
    return raw / mass


def equilibrium_distance(field: DistributionField, model: str) -> float:
    """Cell-weighted l^1 distance between f and its local equilibrium."""
    if model not in ("linear", "nonlinear"):
        raise ValueError(f"model must be 'linear' or 'nonlinear', got {model!r}")
    mesh_v = field.mesh_v
    moments = compute_moments(field.values, mesh_v)
    if model == "linear":
        eq = moments.rho[:, None] * equilibrium_profile_linear(mesh_v)[None, :]
    else:
        eq = matched_maxwellian(mesh_v, moments.rho, moments.u, moments.T)
    return lp_norm(field.values - eq, 1, weight=field.cell_volume)
