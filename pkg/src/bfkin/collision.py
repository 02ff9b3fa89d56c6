"""Collision operators: anisotropic linear kernel, relaxation penalty, and the
discrete-velocity (Carleman lattice) nonlinear Boltzmann operator.

The nonlinear operator sums over integer offset pairs (i, j) with i.j = 0:

    Q(v_k) = dv^(2d-1) * sum_i det(L_i) * sum_{j in L_i} B_ij *
             ( f(v_k + i dv) f(v_k + j dv) - f(v_k) f(v_k + (i+j) dv) )

where L_i is the orthogonal lattice of i, det(L_i) = |i|/gcd(i), and for the
constant (Maxwell-molecule) kernel B_ij = 2 B0 / |i dv|^2.

A pair contributes at v_k only when all four stencil points k, k+i, k+j,
k+i+j lie inside the velocity box. Truncating quadruples as a whole keeps the
involution symmetries of the lattice sum intact, so discrete mass, momentum
and energy are conserved to rounding; plain zero-padding of shifted values
would unbalance gain and loss terms near the boundary and leak all three.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateKernelError
from .grids import VelocityMesh, maxwellian

try:  # pragma: no cover - exercised indirectly
    if os.environ.get("BFKIN_DISABLE_NUMBA"):
        raise ImportError("numba disabled via BFKIN_DISABLE_NUMBA")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# Linear (semiconductor) collision operator
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class CrossSectionTable:
    """Dense sigma(v_k, v_l) table with its collision frequency mu and rate bound."""

    mesh: VelocityMesh
    sigma: np.ndarray        # (N, N)
    maxwell: np.ndarray      # (N,) background Maxwellian samples
    mu: np.ndarray           # (N,) collision frequency
    lambda_lin: float        # max_v mu(v), the penalty rate


def _sigma_dot(sigma: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # single matmul path so that mu and q_lb_apply share bitwise reductions
    return rows @ sigma.T


def build_cross_section(mesh: VelocityMesh, sigma_fn) -> CrossSectionTable:
    """Tabulate sigma on the mesh and precompute mu(v) = dv^d sum sigma*M."""
    pts = mesh.points
    n = mesh.n_points
    sigma = np.empty((n, n))
    for k in range(n):
        for ell in range(n):
            sigma[k, ell] = sigma_fn(pts[k], pts[ell])
    if np.any(sigma < 0):
        k, ell = np.argwhere(sigma < 0)[0]
        raise ValueError(f"negative cross-section value at pair ({k}, {ell})")
    mvals = maxwellian(mesh, 1.0, np.zeros(mesh.d_v), 1.0)
    w = mesh.delta_v ** mesh.d_v
    mu = _sigma_dot(sigma, mvals[None, :])[0] * w
    lam = float(mu.max())
    if lam <= 0:
        raise DegenerateKernelError("collision frequency is identically zero; penalty rate undefined")
    return CrossSectionTable(mesh, sigma, mvals, mu, lam)


def q_lb_apply(table: CrossSectionTable, profile: np.ndarray) -> np.ndarray:
    """Apply the linear operator: dv * sum_l sigma_kl (M_k f_l - M_l f_k).

    Written as M * (sigma f) * dv - f * mu so a profile proportional to the
    tabulated Maxwellian is annihilated termwise.
    """
    f = np.asarray(profile, dtype=float)
    rows = np.atleast_2d(f)
    w = table.mesh.delta_v ** table.mesh.d_v
    t = _sigma_dot(table.sigma, rows) * w
    out = table.maxwell[None, :] * t - rows * table.mu[None, :]
    return out[0] if f.ndim == 1 else out


def relaxation_penalty(f_profile: np.ndarray, equilibrium_profile: np.ndarray,
                       lam: float) -> np.ndarray:
    """Relaxation operator lambda * (equilibrium - f)."""
    if lam <= 0:
        raise ValueError(f"relaxation rate must be positive, got {lam}")
    return lam * (np.asarray(equilibrium_profile) - np.asarray(f_profile))


# ---------------------------------------------------------------------------
# Discrete-velocity nonlinear Boltzmann operator (d_v = 2, Maxwell molecules)
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class DvmTables:
    """Precomputed offset lattice for the nonlinear collision sum."""

    mesh: VelocityMesh
    b0: float
    offsets: np.ndarray          # (n_i, 2) integer offsets i != 0
    det: np.ndarray              # (n_i,) |i| / gcd(i)
    members: list                # per offset: (m_j, 2) integer j with i.j = 0
    kernel_values: list          # per offset: (m_j,) values of B_ij
    # flattened (i, j) pairs with j != 0 for the apply kernels
    pair_i: np.ndarray           # (P, 2)
    pair_j: np.ndarray           # (P, 2)
    pair_w: np.ndarray           # (P,) combined weight dv^3 * det(L_i) * B_ij


def build_dvm_tables(mesh: VelocityMesh, b0: float = 1.0 / (2.0 * math.pi)) -> DvmTables:
    """Enumerate offsets |i_c| <= N_v - 1 and their orthogonal lattice members.

    In Z^2 the lattice {j : i.j = 0} is generated by the primitive
    perpendicular p = (-i2, i1)/gcd(i); members inside the offset range are
    the integer multiples of p (including j = 0, which contributes nothing).
    """
    if mesh.d_v != 2:
        raise ValueError("the discrete-velocity operator is implemented for d_v = 2 only")
    nv = mesh.N_v
    rng = nv - 1
    dv = mesh.delta_v

    offsets = []
    dets = []
    members = []
    kernel_values = []
    pi, pj, pw = [], [], []
    for i1 in range(-rng, rng + 1):
        for i2 in range(-rng, rng + 1):
            if i1 == 0 and i2 == 0:
                continue
            g = math.gcd(abs(i1), abs(i2))
            norm_i = math.hypot(i1, i2)
            det = norm_i / g
            p1, p2 = -i2 // g, i1 // g
            mmax = rng // max(abs(p1), abs(p2))
            ms = np.arange(-mmax, mmax + 1)
            js = np.column_stack([ms * p1, ms * p2])
            bc = 2.0 * b0 / (dv * dv * (i1 * i1 + i2 * i2))
            offsets.append((i1, i2))
            dets.append(det)
            members.append(js)
            kernel_values.append(np.full(js.shape[0], bc))
            w = dv ** 3 * det * bc
            for m in ms:
                if m == 0:
                    continue  # j = 0 gain and loss cancel identically
                pi.append((i1, i2))
                pj.append((m * p1, m * p2))
                pw.append(w)

    return DvmTables(
        mesh=mesh,
        b0=float(b0),
        offsets=np.array(offsets, dtype=np.int64),
        det=np.array(dets),
        members=members,
        kernel_values=kernel_values,
        pair_i=np.array(pi, dtype=np.int64),
        pair_j=np.array(pj, dtype=np.int64),
        pair_w=np.array(pw),
    )


@njit(cache=True)
def _dvm_full_kernel(ft, i1a, i2a, j1a, j2a, wa, out):  # pragma: no cover - jitted
    # ft, out: (nv, nv, nx) with the spatial index contiguous
    nv = ft.shape[0]
    nx = ft.shape[2]
    for p in range(i1a.shape[0]):
        i1 = i1a[p]
        i2 = i2a[p]
        j1 = j1a[p]
        j2 = j2a[p]
        s1 = i1 + j1
        s2 = i2 + j2
        lo1 = max(0, -i1, -j1, -s1)
        hi1 = nv - max(0, i1, j1, s1)
        lo2 = max(0, -i2, -j2, -s2)
        hi2 = nv - max(0, i2, j2, s2)
        if lo1 >= hi1 or lo2 >= hi2:
            continue
        w = wa[p]
        for a in range(lo1, hi1):
            for b in range(lo2, hi2):
                fi = ft[a + i1, b + i2]
                fj = ft[a + j1, b + j2]
                f0 = ft[a, b]
                fs = ft[a + s1, b + s2]
                o = out[a, b]
                for x in range(nx):
                    o[x] += w * (fi[x] * fj[x] - f0[x] * fs[x])


@njit(cache=True)
def _dvm_subset_kernel(ft, i1a, i2a, j1a, j2a, wa, ka, kb, out):  # pragma: no cover
    # out: (G, nx)
    nv = ft.shape[0]
    nx = ft.shape[2]
    for p in range(i1a.shape[0]):
        i1 = i1a[p]
        i2 = i2a[p]
        j1 = j1a[p]
        j2 = j2a[p]
        s1 = i1 + j1
        s2 = i2 + j2
        lo1 = max(0, -i1, -j1, -s1)
        hi1 = nv - max(0, i1, j1, s1)
        lo2 = max(0, -i2, -j2, -s2)
        hi2 = nv - max(0, i2, j2, s2)
        if lo1 >= hi1 or lo2 >= hi2:
            continue
        w = wa[p]
        for g in range(ka.shape[0]):
            a = ka[g]
            b = kb[g]
            if a < lo1 or a >= hi1 or b < lo2 or b >= hi2:
                continue
            fi = ft[a + i1, b + i2]
            fj = ft[a + j1, b + j2]
            f0 = ft[a, b]
            fs = ft[a + s1, b + s2]
            o = out[g]
            for x in range(nx):
                o[x] += w * (fi[x] * fj[x] - f0[x] * fs[x])


def _dvm_full_numpy(f3, pair_i, pair_j, pair_w):
    nx, nv = f3.shape[0], f3.shape[1]
    out = np.zeros_like(f3)
    for p in range(pair_i.shape[0]):
        i1, i2 = pair_i[p]
        j1, j2 = pair_j[p]
        s1, s2 = i1 + j1, i2 + j2
        lo1 = max(0, -i1, -j1, -s1)
        hi1 = nv - max(0, i1, j1, s1)
        lo2 = max(0, -i2, -j2, -s2)
        hi2 = nv - max(0, i2, j2, s2)
        if lo1 >= hi1 or lo2 >= hi2:
            continue
        w = pair_w[p]
        gain = f3[:, lo1 + i1:hi1 + i1, lo2 + i2:hi2 + i2] * f3[:, lo1 + j1:hi1 + j1, lo2 + j2:hi2 + j2]
        loss = f3[:, lo1:hi1, lo2:hi2] * f3[:, lo1 + s1:hi1 + s1, lo2 + s2:hi2 + s2]
        out[:, lo1:hi1, lo2:hi2] += w * (gain - loss)
    return out


def q_nb_dvm_apply(tables: DvmTables, profile: np.ndarray,
                   columns: np.ndarray | None = None) -> np.ndarray:
    """Evaluate the nonlinear collision operator.

    `profile` is (N,) or (N_x, N) over the flat velocity index. When
    `columns` is given only those flat indices are produced, but the inner
    lattice sums still range over the full grid.
    """
    mesh = tables.mesh
    nv = mesh.N_v
    f = np.asarray(profile, dtype=float)
    single = f.ndim == 1
    rows = np.atleast_2d(f)
    nx = rows.shape[0]
    if rows.shape[1] != mesh.n_points:
        raise ValueError("profile length does not match the velocity mesh")

    i1a, i2a = tables.pair_i[:, 0], tables.pair_i[:, 1]
    j1a, j2a = tables.pair_j[:, 0], tables.pair_j[:, 1]
    wa = tables.pair_w

    if columns is None:
        if _HAVE_NUMBA:
            ft = np.ascontiguousarray(rows.T).reshape(nv, nv, nx)
            out_t = np.zeros_like(ft)
            _dvm_full_kernel(ft, i1a, i2a, j1a, j2a, wa, out_t)
            out = out_t.reshape(nv * nv, nx).T.copy()
        else:
            f3 = rows.reshape(nx, nv, nv)
            out = _dvm_full_numpy(f3, tables.pair_i, tables.pair_j, wa).reshape(nx, -1)
        return out[0] if single else out

    cols = np.asarray(columns, dtype=np.int64)
    if cols.size and (cols.min() < 0 or cols.max() >= mesh.n_points):
        raise IndexError("collision column index out of range")
    ka = cols // nv
    kb = cols % nv
    if _HAVE_NUMBA:
        ft = np.ascontiguousarray(rows.T).reshape(nv, nv, nx)
        out_g = np.zeros((cols.size, nx))
        _dvm_subset_kernel(ft, i1a, i2a, j1a, j2a, wa, ka, kb, out_g)
        out = out_g.T.copy()
    else:
        f3 = rows.reshape(nx, nv, nv)
        out = _dvm_full_numpy(f3, tables.pair_i, tables.pair_j, wa).reshape(nx, -1)[:, cols]
    return out[0] if single else out


def q_nb_loss_max(tables: DvmTables, profile: np.ndarray) -> float:
    """Upper bound on the discrete loss rate, used as the penalty rate lambda.

    For the constant Maxwell-molecule kernel the loss frequency collapses to
    |S^1| * B0 * rho, so the bound is 2*pi*B0 times the largest cell density.
    """
    mesh = tables.mesh
    rows = np.atleast_2d(np.asarray(profile, dtype=float))
    w = mesh.delta_v ** mesh.d_v
    rho = w * rows.sum(axis=1)
    lam = 2.0 * math.pi * tables.b0 * float(rho.max())
    if lam <= 0:
        raise DegenerateKernelError("zero distribution: penalty rate lambda is undefined")
    return lam
