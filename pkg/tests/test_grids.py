import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import bfkin
from bfkin.errors import NumericsError, VacuumCellError
from bfkin.grids import equilibrium_profile_linear


def test_node_mesh_1d_example():
    mesh = bfkin.build_velocity_mesh(1, 8, 4)
    assert np.allclose(mesh.axis, [-8, -4, 0, 4])
    assert mesh.delta_v == 4


def test_node_mesh_2d_counts():
    mesh = bfkin.build_velocity_mesh(2, 8, 32)
    assert mesh.n_points == 1024
    assert mesh.delta_v == 0.5


def test_node_mesh_1d_endpoints():
    mesh = bfkin.build_velocity_mesh(1, 8, 100)
    assert mesh.n_points == 100
    assert mesh.axis.min() == -8
    assert np.isclose(mesh.axis.max(), 8 - mesh.delta_v)


@pytest.mark.parametrize("bad", [(0, 8, 4), (3, 8, 4), (1, -1.0, 4), (1, 8, 1)])
def test_mesh_rejects_bad_arguments(bad):
    with pytest.raises(ValueError):
        bfkin.build_velocity_mesh(*bad)


def test_centered_mesh_negation_is_exact():
    mesh = bfkin.build_centered_velocity_mesh(2, 8, 8)
    partner = mesh.negation_partner()
    assert np.allclose(mesh.points[partner], -mesh.points)
    flip0 = mesh.axis_negation(0)
    flipped = mesh.points[flip0]
    assert np.allclose(flipped[:, 0], -mesh.points[:, 0])
    assert np.allclose(flipped[:, 1], mesh.points[:, 1])


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_flat_multi_index_bijection(seed):
    rng = np.random.default_rng(seed)
    n_v = int(rng.integers(2, 12))
    mesh = bfkin.build_velocity_mesh(2, 4.0, n_v)
    for ell in rng.integers(0, mesh.n_points, size=8):
        assert mesh.flat_index(mesh.multi_index(int(ell))) == int(ell)


def test_maxwellian_peak_values():
    mesh2 = bfkin.build_centered_velocity_mesh(2, 8, 32)
    prof = bfkin.maxwellian(mesh2, 1.0, (0.0, 0.0), 1.0)
    # closest grid point to the origin on the centered grid is (dv/2, dv/2)
    peak = prof.max()
    v0 = mesh2.delta_v / 2
    assert np.isclose(peak, np.exp(-v0**2) / (2 * np.pi))

    mesh1 = bfkin.build_velocity_mesh(1, 8, 101)  # odd count puts a node near 0
    prof1 = bfkin.maxwellian(mesh1, 1.0, (0.0,), 1.0)
    k0 = int(np.argmin(np.abs(mesh1.axis)))
    assert np.isclose(prof1[k0], np.exp(-mesh1.axis[k0] ** 2 / 2) / np.sqrt(2 * np.pi))


def test_maxwellian_rejects_bad_parameters():
    mesh = bfkin.build_velocity_mesh(1, 8, 16)
    with pytest.raises(ValueError):
        bfkin.maxwellian(mesh, -1.0, (0.0,), 1.0)
    with pytest.raises(ValueError):
        bfkin.maxwellian(mesh, 1.0, (0.0,), 0.0)


def test_maxwellian_moments_recovered():
    mesh = bfkin.build_centered_velocity_mesh(2, 8, 32)
    prof = bfkin.maxwellian(mesh, 2.0, (1.0, 0.0), 0.5)
    mom = bfkin.compute_moments(prof, mesh)
    assert abs(mom.rho[0] - 2.0) < 1e-6
    assert np.abs(mom.u[0] - [1.0, 0.0]).max() < 1e-6
    assert abs(mom.T[0] - 0.5) < 1e-6


def test_moment_error_shrinks_under_refinement():
    errs = []
    for n_v in (16, 32, 64):
        mesh = bfkin.build_centered_velocity_mesh(2, 8, n_v)
        prof = bfkin.maxwellian(mesh, 1.0, (0.4, -0.3), 0.6)
        mom = bfkin.compute_moments(prof, mesh)
        errs.append(abs(mom.rho[0] - 1.0) + np.abs(mom.u[0] - [0.4, -0.3]).max()
                    + abs(mom.T[0] - 0.6))
    assert errs[0] > errs[1] > errs[2] or errs[1] < 1e-14


def test_moments_scaling_linearity():
    mesh = bfkin.build_centered_velocity_mesh(2, 8, 32)
    prof = bfkin.maxwellian(mesh, 1.0, (0.0, 0.0), 1.0)
    mom = bfkin.compute_moments(2.0 * prof, mesh)
    assert np.isclose(mom.rho[0], 2.0, atol=1e-6)
    assert np.abs(mom.u[0]).max() < 1e-12
    assert np.isclose(mom.T[0], 1.0, atol=1e-6)


def test_vacuum_cell_reports_index():
    mesh = bfkin.build_centered_velocity_mesh(2, 8, 8)
    values = np.ones((3, mesh.n_points))
    values[1] = 0.0
    with pytest.raises(VacuumCellError) as exc:
        bfkin.compute_moments(values, mesh)
    assert exc.value.cell_index == 1


def test_matched_maxwellian_moments_exact():
    mesh = bfkin.build_centered_velocity_mesh(2, 8, 16)
    rho = np.array([0.5, 1.0, 2.0])
    u = np.array([[0.3, -0.1], [0.0, 0.0], [-1.0, 0.2]])
    T = np.array([0.25, 1.0, 1.5])
    prof = bfkin.matched_maxwellian(mesh, rho, u, T)
    mom = bfkin.compute_moments(prof, mesh)
    assert np.abs(mom.rho - rho).max() < 1e-12
    assert np.abs(mom.u - u).max() < 1e-12
    assert np.abs(mom.T - T).max() < 1e-12


def test_matched_maxwellian_rejects_vacuum():
    mesh = bfkin.build_centered_velocity_mesh(2, 8, 8)
    with pytest.raises(VacuumCellError):
        bfkin.matched_maxwellian(mesh, np.array([0.0]), np.zeros((1, 2)), np.array([1.0]))
    with pytest.raises(NumericsError):
        bfkin.matched_maxwellian(mesh, np.array([1.0]), np.zeros((1, 2)), np.array([-1.0]))


def test_lp_norm_examples():
    assert bfkin.lp_norm(np.array([3.0, 4.0]), 2) == 5.0
    assert bfkin.lp_norm(np.zeros(7), 1) == 0.0
    assert bfkin.lp_norm(np.zeros(7), np.inf) == 0.0


def test_lp_norm_matches_naive_summation():
    rng = np.random.default_rng(7)
    x = rng.standard_normal(10)
    assert abs(bfkin.lp_norm(x, 1) - sum(abs(v) for v in x)) < 1e-14
    assert abs(bfkin.lp_norm(x, 2) - np.sqrt(sum(v * v for v in x))) < 1e-14


@given(st.integers(0, 10**6), st.floats(1e-3, 8.0), st.sampled_from([-1.0, 1.0]))
@settings(max_examples=40, deadline=None)
def test_lp_norm_homogeneity(seed, mag, sign):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(17)
    alpha = sign * mag
    for p in (1, 2, np.inf):
        assert np.isclose(bfkin.lp_norm(alpha * x, p), abs(alpha) * bfkin.lp_norm(x, p),
                          rtol=1e-12)


def _uniform_field(mesh_x, mesh_v, profile):
    return bfkin.DistributionField(np.tile(profile, (mesh_x.N_x, 1)), mesh_x, mesh_v)


def test_equilibrium_distance_zero_on_equilibrium():
    mesh_x = bfkin.build_spatial_mesh(0, 1, 8, "periodic")
    mesh_v = bfkin.build_centered_velocity_mesh(1, 8, 32)
    f = _uniform_field(mesh_x, mesh_v, 1.3 * equilibrium_profile_linear(mesh_v))
    assert bfkin.equilibrium_distance(f, "linear") < 1e-12

    mesh_v2 = bfkin.build_centered_velocity_mesh(2, 8, 16)
    mom_profile = bfkin.matched_maxwellian(mesh_v2, np.array([1.0]),
                                           np.array([[0.2, 0.0]]), np.array([0.7]))[0]
    f2 = _uniform_field(mesh_x, mesh_v2, mom_profile)
    assert bfkin.equilibrium_distance(f2, "nonlinear") < 1e-11


def test_equilibrium_distance_measures_moment_free_perturbation():
    mesh_x = bfkin.build_spatial_mesh(0, 1, 4, "periodic")
    mesh_v = bfkin.build_centered_velocity_mesh(2, 8, 16)
    base = bfkin.matched_maxwellian(mesh_v, np.array([1.0]), np.zeros((1, 2)),
                                    np.array([1.0]))[0]
    # odd-in-both-components bump: zero mass, momentum and energy
    pts = mesh_v.points
    pert = 1e-3 * pts[:, 0] * pts[:, 1] * np.exp(-np.sum(pts**2, axis=1) / 2)
    f = _uniform_field(mesh_x, mesh_v, base + pert)
    expected = bfkin.lp_norm(np.tile(pert, (4, 1)), 1,
                             weight=mesh_x.delta_x * mesh_v.delta_v**2)
    got = bfkin.equilibrium_distance(f, "nonlinear")
    assert np.isclose(got, expected, rtol=1e-6)


def test_equilibrium_distance_positive_for_two_bumps():
    mesh_x = bfkin.build_spatial_mesh(0, 1, 4, "periodic")
    mesh_v = bfkin.build_centered_velocity_mesh(2, 8, 16)
    bump1 = bfkin.maxwellian(mesh_v, 0.5, (1.0, 0.0), 0.5)
    bump2 = bfkin.maxwellian(mesh_v, 0.5, (-1.0, 0.0), 0.5)
    f = _uniform_field(mesh_x, mesh_v, bump1 + bump2)
    assert bfkin.equilibrium_distance(f, "nonlinear") > 0.01
