import numpy as np
import pytest

from bfkin.error_metrics import (
    empirical_bound,
    relative_l1_error,
    similarity_ratio,
    subspace_distance,
)
from bfkin.selection import bf_reconstruct, greedy_select, project_coefficients


def test_distance_zero_inside_span():
    rng = np.random.default_rng(0)
    basis = rng.standard_normal((9, 3))
    col = basis @ np.array([0.5, -1.0, 2.0])
    assert subspace_distance(col, basis) < 1e-10 * np.linalg.norm(col)


def test_distance_of_orthogonal_column_is_its_norm():
    basis = np.zeros((6, 2))
    basis[0, 0] = 1.0
    basis[1, 1] = 1.0
    col = np.zeros(6)
    col[4] = 3.0
    assert np.isclose(subspace_distance(col, basis), 3.0)


def test_distance_matches_gram_schmidt_oracle():
    rng = np.random.default_rng(1)
    basis = rng.standard_normal((12, 4))
    col = rng.standard_normal(12)
    q, _ = np.linalg.qr(basis)
    expected = np.linalg.norm(col - q @ (q.T @ col))
    assert abs(subspace_distance(col, basis) - expected) < 1e-10


def test_distance_never_exceeds_norm():
    rng = np.random.default_rng(2)
    for _ in range(20):
        basis = rng.standard_normal((8, 3))
        col = rng.standard_normal(8)
        assert subspace_distance(col, basis) <= np.linalg.norm(col) * (1 + 1e-12)


def _bifid_pieces(ens, hf, delta=1e-8, gamma_max=50):
    sel = greedy_select(ens, delta, gamma_max)
    coeffs = project_coefficients(ens, sel)
    bf = bf_reconstruct(coeffs, hf[:, sel.gamma])
    return sel, bf


def test_bound_is_threshold_level_for_exhausted_ensembles():
    rng = np.random.default_rng(3)
    basis = rng.standard_normal((10, 3))
    ens = basis @ rng.standard_normal((3, 14))
    delta = 1e-9
    sel, bf = _bifid_pieces(ens, ens, delta=delta, gamma_max=14)
    assert sel.terminated_by == "threshold"
    report = empirical_bound(ens, sel.gamma, ens[:, sel.gamma], bf)
    min_norm = np.linalg.norm(ens, axis=0).min()
    assert report.empirical_bound <= delta / min_norm * (1.0 + report.r_e_end + 1e-9)


def test_identical_fidelities_give_zero_in_plane_error():
    rng = np.random.default_rng(4)
    ens = rng.standard_normal((8, 6))
    sel, bf = _bifid_pieces(ens, ens, delta=1e-10, gamma_max=4)
    report = empirical_bound(ens, sel.gamma, ens[:, sel.gamma], bf)
    assert report.r_e_end is not None and report.r_e_end < 1e-8
    assert similarity_ratio(ens, ens, sel.gamma) == pytest.approx(1.0)


def test_similarity_ratio_is_scale_invariant():
    rng = np.random.default_rng(5)
    ens = rng.standard_normal((8, 6))
    sel = greedy_select(ens, 1e-10, 3)
    assert similarity_ratio(ens, 2.0 * ens, sel.gamma) == pytest.approx(1.0)
    # common rescaling of the low-fidelity ensemble leaves the bound unchanged
    coeffs = project_coefficients(ens, sel)
    bf = bf_reconstruct(coeffs, ens[:, sel.gamma])
    r1 = empirical_bound(ens, sel.gamma, ens[:, sel.gamma], bf)
    r2 = empirical_bound(3.0 * ens, sel.gamma, 3.0 * ens[:, sel.gamma], 3.0 * bf)
    assert r1.empirical_bound == pytest.approx(r2.empirical_bound)


def test_single_point_selection_reports_absent_ratio():
    col = np.array([1.0, 2.0])
    ens = np.column_stack([col, 2 * col])
    sel, bf = _bifid_pieces(ens, ens, delta=1e-10)
    assert sel.size == 1
    report = empirical_bound(ens, sel.gamma, ens[:, sel.gamma], bf)
    assert report.r_e_end is None
    assert report.empirical_bound is not None
    assert report.notes


def test_bound_dominates_per_point_true_error():
    # triangle-inequality split: relative error <= relative distance + in-plane
    rng = np.random.default_rng(6)
    ens = rng.standard_normal((10, 8))
    hf = ens + 0.05 * rng.standard_normal((10, 8))
    sel, bf = _bifid_pieces(ens, hf, delta=1e-10, gamma_max=4)
    hf_sel = hf[:, sel.gamma]
    report = empirical_bound(ens, sel.gamma, hf_sel, bf)
    for ell in range(8):
        d = subspace_distance(hf[:, ell], hf_sel)
        in_plane = np.linalg.norm((hf[:, ell] - bf[:, ell])) + 0.0
        rel = np.linalg.norm(hf[:, ell] - bf[:, ell]) / np.linalg.norm(hf[:, ell])
        proj = hf_sel @ np.linalg.pinv(hf_sel) @ hf[:, ell]
        split = (d + np.linalg.norm(proj - bf[:, ell])) / np.linalg.norm(hf[:, ell])
        assert rel <= split * (1 + 1e-9)


def test_relative_l1_error_examples():
    rng = np.random.default_rng(7)
    ref = np.abs(rng.standard_normal((5, 9))) + 0.1
    assert relative_l1_error(ref, ref) == 0.0
    assert relative_l1_error(ref, 1.25 * ref) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        relative_l1_error(np.zeros((2, 2)), np.ones((2, 2)))
    with pytest.raises(ValueError):
        relative_l1_error(ref, ref[:2])
