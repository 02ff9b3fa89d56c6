"""Bundled experiment setups: meshes, kernels, potentials and initial data.

Four named presets are provided:

* ``test1a``   - linear model, smooth equilibrium start, external potential.
* ``test1b``   - nonlinear model, sum of two counter-drifting Maxwellians.
* ``test2_riemann`` - nonlinear model, Riemann data, Neumann walls.
* ``test3_blast``   - nonlinear model, three-state blast data, specular walls.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .grids import DistributionField, SpatialMesh, VelocityMesh, maxwellian

PRESET_NAMES = ("test1a", "test1b", "test2_riemann", "test3_blast")

_TWO_PI = 2.0 * math.pi

PRESET_DEFAULTS: dict[str, dict] = {
    "test1a": dict(
        model="semiconductor",
        bc="periodic",
        x_left=0.0,
        x_right=1.0,
        n_x=150,
        n_v=100,
        l_v=8.0,
        dt=5e-5,
        t_final=0.1,
    ),
    "test1b": dict(
        model="boltzmann",
        bc="periodic",
        x_left=0.0,
        x_right=1.0,
        n_x=50,
        n_v=32,
        l_v=8.0,
        dt=None,  # transport CFL: dx / (2 L_v)
        t_final=0.2,
        b0=1.0 / _TWO_PI,
    ),
    "test2_riemann": dict(
        model="boltzmann",
        bc="neumann",
        x_left=0.0,
        x_right=1.0,
        n_x=50,
        n_v=32,
        l_v=8.0,
        dt=None,
        t_final=0.2,
        b0=1.0 / _TWO_PI,
    ),
    "test3_blast": dict(
        model="boltzmann",
        bc="specular",
        x_left=-0.5,
        x_right=0.5,
        n_x=100,
        n_v=32,
        l_v=8.0,
        dt=None,
        t_final=0.1,
        b0=1.0 / _TWO_PI,
        snapshot_times=(0.05, 0.1),
    ),
}


def _gauss1d(v: float) -> float:
    return math.exp(-0.5 * v * v) / math.sqrt(_TWO_PI)


def sigma_test1a(v, w) -> float:
    """Anisotropic cross-section of the smooth linear-model experiment."""
    vv = float(v[0]) ** 2
    ww = float(w[0]) ** 2
    return (
        1.0
        + _gauss1d(v[0]) * math.exp(-((vv - ww + 1.0) ** 2))
        + _gauss1d(w[0]) * math.exp(-((vv - ww - 1.0) ** 2))
    )


def potential_test1a(form: str):
    """Potential exp(-c (1/4 - x)^2) and its derivative.

    The printed formula carries a stray factor e inside the exponent
    (c = 50e); the corrected variant uses c = 50. Selected per config.
    """
    if form == "literal":
        c = 50.0 * math.e
    elif form == "corrected":
        c = 50.0
    else:
        raise ConfigError(f"unknown potential form {form!r}")

    def phi(x: float) -> float:
        return math.exp(-c * (0.25 - x) ** 2)

    def dphi(x: float) -> float:
        return 2.0 * c * (0.25 - x) * phi(x)

    return phi, dphi


def _two_bump(mesh_x: SpatialMesh, mesh_v: VelocityMesh) -> np.ndarray:
    x = mesh_x.cells
    rho0 = (2.0 + np.sin(_TWO_PI * x)) / 3.0
    u0 = np.cos(_TWO_PI * x)
    t0 = (3.0 + np.cos(_TWO_PI * x)) / 4.0
    pts = mesh_v.points
    values = np.empty((mesh_x.N_x, mesh_v.n_points))
    for i in range(mesh_x.N_x):
        d_plus = (pts[:, 0] - u0[i]) ** 2 + pts[:, 1] ** 2
        d_minus = (pts[:, 0] + u0[i]) ** 2 + pts[:, 1] ** 2
        pref = rho0[i] / (4.0 * math.pi * t0[i])
        values[i] = pref * (np.exp(-d_plus / (2.0 * t0[i])) + np.exp(-d_minus / (2.0 * t0[i])))
    return values


def _riemann(mesh_x: SpatialMesh, mesh_v: VelocityMesh) -> np.ndarray:
    left = maxwellian(mesh_v, 1.0, (0.0, 0.0), 1.0)
    right = maxwellian(mesh_v, 0.125, (0.0, 0.0), 0.25)
    values = np.empty((mesh_x.N_x, mesh_v.n_points))
    for i, x in enumerate(mesh_x.cells):
        values[i] = left if x <= 0.5 else right
    return values


def _blast(mesh_x: SpatialMesh, mesh_v: VelocityMesh, unit_domain: bool) -> np.ndarray:
    states = (
        maxwellian(mesh_v, 1.0, (1.0, 0.0), 2.0),
        maxwellian(mesh_v, 1.0, (0.0, 0.0), 0.25),
        maxwellian(mesh_v, 1.0, (-1.0, 0.0), 2.0),
    )
    shift = -0.5 if unit_domain else 0.0
    values = np.empty((mesh_x.N_x, mesh_v.n_points))
    for i, cell in enumerate(mesh_x.cells):
        x = cell + shift
        if x <= -0.3:
            values[i] = states[0]
        elif x <= 0.3:
            values[i] = states[1]
        else:
            values[i] = states[2]
    return values


def preset_initial_condition(preset: str, mesh_x: SpatialMesh, mesh_v: VelocityMesh,
                             unit_domain: bool = False) -> DistributionField:
    if preset == "test1a":
        profile = maxwellian(mesh_v, 1.0, np.zeros(mesh_v.d_v), 1.0)
        values = np.tile(profile, (mesh_x.N_x, 1))
    elif preset == "test1b":
        values = _two_bump(mesh_x, mesh_v)
    elif preset == "test2_riemann":
        values = _riemann(mesh_x, mesh_v)
    elif preset == "test3_blast":
        values = _blast(mesh_x, mesh_v, unit_domain)
    else:
        raise ConfigError(f"unknown preset {preset!r}")
    return DistributionField(values, mesh_x, mesh_v)
