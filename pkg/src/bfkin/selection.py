"""Greedy velocity-point selection and bi-fidelity reconstruction.

The selection is a pivoted Cholesky factorization of the Gramian of the
low-fidelity ensemble columns, run implicitly on the columns themselves:
pivot on the largest remaining residual diagonal, stop when it drops below
the threshold `delta` or when `gamma_max` points are selected. The inner
product is the plain spatial dot product sum_i f(x_i) g(x_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

KERNEL_CUTOFF = 1e-12  # relative eigenvalue cutoff for the Gramian pseudo-solve


@dataclass(eq=False)
class SelectionResult:
    gamma: np.ndarray        # selected flat indices, in pivot order
    chol_factor: np.ndarray  # (N, |gamma|) factor, rows in pivot order
    row_order: np.ndarray    # (N,) original index of each factor row
    residuals: np.ndarray    # (N,) final diagonal values, original index order
    terminated_by: str       # "threshold" or "max_points"

    @property
    def size(self) -> int:
        return int(self.gamma.size)


def greedy_select(ensemble: np.ndarray, delta: float, gamma_max: int) -> SelectionResult:
    """Select an ordered subset of ensemble columns by pivoted Cholesky.

    `ensemble` is N_x-by-N; column ell is the spatial profile at velocity
    point ell. `delta` bounds the residual *norm* of every unselected column
    at termination; the diagonal w holds squared norms, so the loop breaks
    when max w < delta^2. Exact pivot ties go to the lowest original index.
    """
    ens = np.asarray(ensemble, dtype=float)
    if ens.ndim != 2 or ens.shape[1] == 0 or ens.shape[0] == 0:
        raise ValueError("ensemble must be a non-empty N_x-by-N matrix")
    if delta <= 0:
        raise ValueError(f"threshold delta must be positive, got {delta}")
    if gamma_max < 1:
        raise ValueError(f"gamma_max must be at least 1, got {gamma_max}")

    n = ens.shape[1]
    max_pts = min(gamma_max, n)
    cols = ens.copy()
    perm = np.arange(n)
    w = np.einsum("ij,ij->j", cols, cols)
    factor = np.zeros((n, max_pts))

    n_sel = 0
    terminated_by = "max_points"
    threshold = delta  # MEASURE: algorithm-literal squared semantics
    for step in range(max_pts):
        rem = w[step:]
        wmax = rem.max()
        # a non-positive diagonal is pure cancellation noise: the remaining
        # columns are numerically dependent and cannot be pivoted on
        if wmax < threshold or wmax <= 0.0:
            terminated_by = "threshold"
            break
        cand = step + np.nonzero(rem == wmax)[0]
        pivot = cand[np.argmin(perm[cand])]
        if pivot != step:
            cols[:, [step, pivot]] = cols[:, [pivot, step]]
            w[[step, pivot]] = w[[pivot, step]]
            perm[[step, pivot]] = perm[[pivot, step]]
            factor[[step, pivot], :] = factor[[pivot, step], :]
        r = cols[:, step + 1:].T @ cols[:, step]
        if step > 0:
            r -= factor[step + 1:, :step] @ factor[step, :step]
        factor[step, step] = math.sqrt(w[step])
        factor[step + 1:, step] = r / factor[step, step]
        w[step + 1:] -= factor[step + 1:, step] ** 2
        n_sel = step + 1

    residuals = np.empty(n)
    residuals[perm] = w
    return SelectionResult(
        gamma=perm[:n_sel].copy(),
        chol_factor=factor[:, :n_sel],
        row_order=perm.copy(),
        residuals=residuals,
        terminated_by=terminated_by,
    )


@dataclass(eq=False)
class ProjectionCoeffs:
    coeffs: np.ndarray  # (|gamma|, N); column ell holds the weights for point ell


def _pseudo_solve(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve gram @ c = rhs with eigenvalues below the relative cutoff dropped.

    Equivalent to solving with the Gramian minus its kernel projector: the
    right-hand sides are orthogonal to the kernel, so discarding near-null
    eigendirections yields the minimum-norm least-squares coefficients.
    """
    vals, vecs = np.linalg.eigh(gram)
    cutoff = KERNEL_CUTOFF * max(vals.max(initial=0.0), 0.0)
    inv = np.where(vals > cutoff, 1.0 / np.where(vals > cutoff, vals, 1.0), 0.0)
    return vecs @ (inv[:, None] * (vecs.T @ rhs))


def project_coefficients(ensemble: np.ndarray, selection: SelectionResult) -> ProjectionCoeffs:
    """Least-squares coefficients of every column on the selected columns."""
    ens = np.asarray(ensemble, dtype=float)
    sel = ens[:, selection.gamma]
    gram = sel.T @ sel
    rhs = sel.T @ ens
    return ProjectionCoeffs(_pseudo_solve(gram, rhs))


def bf_reconstruct(coeffs: ProjectionCoeffs, hf_columns: np.ndarray) -> np.ndarray:
    """Combine high-fidelity columns with the low-fidelity projection weights.

    `hf_columns` is N_x-by-|gamma|, ordered like the selection; the output
    column ell is sum_k coeffs[k, ell] * hf_columns[:, k].
    """
    hf = np.asarray(hf_columns, dtype=float)
    c = coeffs.coeffs
    if hf.ndim != 2 or hf.shape[1] != c.shape[0]:
        raise ValueError(
            f"high-fidelity block has {hf.shape} columns but {c.shape[0]} were selected"
        )
    return hf @ c
