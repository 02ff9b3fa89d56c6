"""CSV emission for runs, sweeps and velocity-space snapshots.

All files are comma-separated with a header row, floats printed with 17
significant digits (lossless for binary64 round-trips) and LF line endings.
"""

from __future__ import annotations

import os

import numpy as np

from .driver import RunResult
from .grids import DistributionField, MacroMoments, field_moments


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path: str, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _moment_columns(moments: MacroMoments, d_v: int, suffix: str = "") -> tuple[list[str], list]:
    header = [f"rho{suffix}"] + [f"u{a + 1}{suffix}" for a in range(d_v)] + [f"T{suffix}"]
    cols = [moments.rho] + [moments.u[:, a] for a in range(d_v)] + [moments.T]
    return header, cols


def write_profiles(path: str, field: DistributionField,
                   reference: DistributionField | None = None) -> None:
    """Columns x, rho, u components, T, plus *_ref columns when a reference run exists."""
    moments = field_moments(field)
    d_v = field.mesh_v.d_v
    header, cols = _moment_columns(moments, d_v)
    header = ["x"] + header
    cols = [field.mesh_x.cells] + cols
    if reference is not None:
        ref_header, ref_cols = _moment_columns(field_moments(reference), d_v, "_ref")
        header += ref_header
        cols += ref_cols
    _write_csv(path, header, zip(*cols))


HISTORY_HEADER = ["step", "time", "gamma_size", "equilibrium_distance",
                  "empirical_bound", "r_e", "r_s", "true_error", "min_f"]


def write_history(path: str, history) -> None:
    rows = []
    for rec in history:
        rep = rec.report
        rows.append([
            rec.step,
            rec.time,
            rec.gamma_size,
            rec.equilibrium_distance,
            None if rep is None else rep.empirical_bound,
            None if rep is None else rep.r_e_end,
            None if rep is None else rep.r_s,
            None if rep is None else rep.true_error,
            rec.min_value,
        ])
    _write_csv(path, HISTORY_HEADER, rows)


SWEEP_HEADER = ["epsilon", "gamma_max", "time", "rel_l1_error"]


def write_sweep(path: str, rows) -> None:
    """Rows of (epsilon, gamma_max, time, relative l1 error vs. the reference)."""
    _write_csv(path, SWEEP_HEADER, rows)


def write_selected_points(path: str, history, mesh_v) -> None:
    header = ["step", "flat_index"] + [f"v{a + 1}" for a in range(mesh_v.d_v)]
    rows = []
    for rec in history:
        if rec.gamma is None:
            continue
        for ell in rec.gamma:
            rows.append([rec.step, int(ell)] + list(mesh_v.points[int(ell)]))
    _write_csv(path, header, rows)


def write_velocity_slice(path: str, field: DistributionField, x_value: float) -> None:
    """Distribution over velocity space at the cell nearest to x_value."""
    i = int(np.argmin(np.abs(field.mesh_x.cells - x_value)))
    mesh_v = field.mesh_v
    header = [f"v{a + 1}" for a in range(mesh_v.d_v)] + ["f"]
    rows = [list(mesh_v.points[ell]) + [field.values[i, ell]]
            for ell in range(mesh_v.n_points)]
    _write_csv(path, header, rows)


def emit_outputs(result: RunResult, out_dir: str,
                 reference: DistributionField | None = None,
                 slice_positions=(0.25, 0.5, 0.75)) -> list[str]:
    """Write the standard file set for one run; returns the paths written."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = result.problem.config
    written = []

    path = os.path.join(out_dir, "profiles.csv")
    write_profiles(path, result.final, reference)
    written.append(path)

    path = os.path.join(out_dir, "history.csv")
    write_history(path, result.history)
    written.append(path)

    if cfg.mode == "bifidelity":
        path = os.path.join(out_dir, "selected_points.csv")
        write_selected_points(path, result.history, result.problem.mesh_v)
        written.append(path)

    if result.problem.mesh_v.d_v == 2:
        for xv in slice_positions:
            path = os.path.join(out_dir, f"vslice_t{cfg.t_final:g}_x{xv:g}.csv")
            write_velocity_slice(path, result.final, xv)
            written.append(path)
    return written
