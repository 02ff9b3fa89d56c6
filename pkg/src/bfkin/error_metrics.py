"""Computable error diagnostics for the bi-fidelity reconstruction.

The empirical bound multiplies the worst relative projection distance of the
low-fidelity ensemble onto its selected columns by (1 + R_e). R_e is measured
at the last selected velocity point by leaving it out of the basis: rebuild
it from the other selected points with low-fidelity coefficients, and compare
that surrogate against the orthogonal projection of its high-fidelity column,
relative to the projection distance. With identical fidelities the surrogate
equals the projection and R_e vanishes.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .selection import _pseudo_solve

logger = logging.getLogger(__name__)

_DENOM_GUARD = 1e-300


@dataclass(eq=False)
class ErrorReport:
    empirical_bound: float | None = None
    r_e_end: float | None = None
    r_s: float | None = None
    true_error: float | None = None
    rel_l1: float | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)


def _projection_residuals(columns: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """l2 distances of each column from span(basis), kernel directions cut off."""
    if basis.size == 0:
        return np.linalg.norm(columns, axis=0)
    gram = basis.T @ basis
    coeff = _pseudo_solve(gram, basis.T @ columns)
    return np.linalg.norm(columns - basis @ coeff, axis=0)


def subspace_distance(column: np.ndarray, basis: np.ndarray) -> float:
    """Distance from one spatial profile to the span of the basis profiles."""
    col = np.asarray(column, dtype=float)[:, None]
    b = np.asarray(basis, dtype=float)
    if b.ndim == 1:
        b = b[:, None]
    return float(_projection_residuals(col, b)[0])


def _max_relative_distance(columns: np.ndarray, basis: np.ndarray):
    dists = _projection_residuals(columns, basis)
    norms = np.linalg.norm(columns, axis=0)
    ok = norms > _DENOM_GUARD
    if not np.any(ok):
        return None, int(np.sum(~ok))
    return float(np.max(dists[ok] / norms[ok])), int(np.sum(~ok))


def empirical_bound(lf_columns: np.ndarray, gamma: np.ndarray,
                    hf_selected_columns: np.ndarray,
                    bf_columns: np.ndarray) -> ErrorReport:
    """Evaluate the empirical bound from quantities the bi-fidelity step already has."""
    lf = np.asarray(lf_columns, dtype=float)
    hf_sel = np.asarray(hf_selected_columns, dtype=float)
    bf = np.asarray(bf_columns, dtype=float)
    gamma = np.asarray(gamma, dtype=np.int64)
    notes: list[str] = []

    max_rel, skipped = _max_relative_distance(lf, lf[:, gamma])
    if skipped:
        notes.append(f"skipped {skipped} zero-norm low-fidelity columns")
    if max_rel is None:
        return ErrorReport(notes=("all low-fidelity columns have zero norm",))

    r_e = None
    if gamma.size < 2:
        notes.append("fewer than two selected points: in-plane ratio undefined")
    else:
        v_end = gamma[-1]
        lf_rest = lf[:, gamma[:-1]]
        hf_rest = hf_sel[:, :-1]
        col_end = hf_sel[:, -1]
        # leave-one-out surrogate of the test column
        c = _pseudo_solve(lf_rest.T @ lf_rest, lf_rest.T @ lf[:, v_end][:, None])[:, 0]
        bf_loo = hf_rest @ c
        proj = hf_rest @ _pseudo_solve(hf_rest.T @ hf_rest,
                                       hf_rest.T @ col_end[:, None])[:, 0]
        d_h = float(np.linalg.norm(col_end - proj))
        if d_h <= _DENOM_GUARD:
            notes.append("projection distance at the test point is zero: in-plane ratio undefined")
        else:
            r_e = float(np.linalg.norm(proj - bf_loo) / d_h)

    bound = max_rel * (1.0 + (r_e if r_e is not None else 0.0))
    if notes:
        logger.debug("empirical bound notes: %s", "; ".join(notes))
    return ErrorReport(empirical_bound=bound, r_e_end=r_e, notes=tuple(notes))


def similarity_ratio(lf_columns: np.ndarray, hf_all_columns: np.ndarray,
                     gamma: np.ndarray) -> float | None:
    """Ratio of worst relative projection distances, high-fidelity over low.

    Requires the full high-fidelity sweep, so this is a diagnostic-mode
    quantity only. Returns None when a denominator degenerates.
    """
    lf = np.asarray(lf_columns, dtype=float)
    hf = np.asarray(hf_all_columns, dtype=float)
    gamma = np.asarray(gamma, dtype=np.int64)
    num, _ = _max_relative_distance(hf, hf[:, gamma])
    den, _ = _max_relative_distance(lf, lf[:, gamma])
    if num is None or den is None or den <= _DENOM_GUARD:
        logger.debug("similarity ratio undefined: degenerate denominator")
        return None
    return num / den


def relative_l1_error(f_h_ref: np.ndarray, f_b: np.ndarray) -> float:
    """Relative l1 error over the full phase grid (uniform cell weights cancel)."""
    ref = np.asarray(f_h_ref, dtype=float)
    approx = np.asarray(f_b, dtype=float)
    if ref.shape != approx.shape:
        raise ValueError("fields must share one grid")
    denom = np.abs(ref).sum()
    if denom <= _DENOM_GUARD:
        raise ValueError("reference field has zero l1 norm")
    return float(np.abs(ref - approx).sum() / denom)
