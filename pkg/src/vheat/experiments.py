"""Canned experiment drivers shared by the CLI, the demos, and the acceptance suite.

These wire together the built-in zigzag data, the two schemes, and the error
tables for the standard protocol: theta = 1/2, lambda = 100, T = 0.04 on
[0, 1], grid ladders labeled by their point count N+1, with parity deciding
whether the degenerate points x = 1/4, 3/4 fall on nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import initial_data as data
from .coefficients import CoefficientModel, k_w
from .diagnostics import ConvergenceTable, error_table
from .grid import GridFunction, PeriodicGrid, cross_grid_error
from .scheme_v import run_v, u_from_w, u_from_v
from .scheme_w import ThetaSchemeConfig, Trajectory, run

__all__ = ["ExperimentSpec", "cells_for", "make_model", "builtin_w0",
           "run_w_case", "run_v_case", "converge", "k1_sweep"]


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment configuration; fields mirror the CLI flags."""

    scheme: str = "w"                 # w | v
    k1: float = 0.0
    k2: float = 1.0
    theta: float = 0.5
    lam: float = 100.0
    grids: tuple = (100,)             # N+1 values; for converge the last is the reference
    parity: str = "as_given"          # odd | even | as_given
    T: float = 0.04
    init: str = "default"             # w: point_sample | cell_average; v: exact | tan
    compare_in: str = "w"             # w | u
    sample_at: str = "fine_midpoints"  # or coarse_nodes
    out: str = "."
    seed: int = 0
    cfl_policy: str = "warn"
    snapshot_times: tuple = ()

    def __post_init__(self):
        if self.scheme not in ("w", "v"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if len(self.grids) < 1 or any(g < 4 for g in self.grids):
            raise ValueError("grids must hold point counts N+1 >= 4")
        if list(self.grids) != sorted(set(self.grids)):
            raise ValueError("grid ladder must be strictly increasing")

    def config(self) -> ThetaSchemeConfig:
        mode = self.init if self.scheme == "w" and self.init != "default" else "point_sample"
        return ThetaSchemeConfig(theta=self.theta, lam=self.lam,
                                 cfl_policy=self.cfl_policy, init_mode=mode)


def cells_for(n_plus_1: int, parity: str) -> int:
    """Cell count for a requested point count, nudged by at most one for parity."""
    n = n_plus_1 - 1
    if parity == "odd" and n % 2 == 0:
        n += 1
    elif parity == "even" and n % 2 == 1:
        n += 1
    return n


def make_model(k1: float, k2: float) -> CoefficientModel:
    return CoefficientModel.oseen_frank(k1, k2)


def builtin_w0(model: CoefficientModel):
    """Initial w data consistent with the model: the transform of the zigzag angle."""
    if model.kind == "quadratic":
        return data.w_initial
    return lambda x: k_w(data.u_initial(x), model.of)


def run_w_case(spec: ExperimentSpec, n_plus_1: int, store_all: bool = False) -> Trajectory:
    n = cells_for(n_plus_1, spec.parity)
    grid = PeriodicGrid(n)
    model = make_model(spec.k1, spec.k2)
    return run(builtin_w0(model), grid, model, spec.config(), spec.T,
               snapshot_times=spec.snapshot_times, store_all=store_all)


def run_v_case(spec: ExperimentSpec, n_plus_1: int, store_all: bool = False) -> Trajectory:
    n = cells_for(n_plus_1, spec.parity)
    grid = PeriodicGrid(n)
    model = make_model(spec.k1, spec.k2)
    source = spec.init if spec.init != "default" else "exact"
    return run_v(grid, model, spec.config(), spec.T, source=source,
                 snapshot_times=spec.snapshot_times, store_all=store_all)


def converge(spec: ExperimentSpec) -> ConvergenceTable:
    """Run the ladder (all grids but the last) against the reference (the last).

    The reference is always a w-scheme run: the v-ladder is measured against
    the w-based solution, which is how the two formulations cross-validate.
    """
    if len(spec.grids) < 2:
        raise ValueError("converge needs a ladder plus a final reference level")
    runner = run_w_case if spec.scheme == "w" else run_v_case
    runs = [runner(spec, g) for g in spec.grids[:-1]]
    ref = run_w_case(replace(spec, scheme="w", init="default"), spec.grids[-1])
    return error_table(runs, ref, compare_in=spec.compare_in, sample_at=spec.sample_at)


def k1_sweep(spec: ExperimentSpec, k1_list) -> list:
    """Distances of positive-k1 solutions to the degenerate odd-grid baseline.

    Each k1 runs on the spec's grid (default N+1 = 401, i.e. 400 cells); the
    k1 = 0 baseline uses one cell fewer so its nodes miss the degenerate
    points.  Returns rows (k1, L1 distance in w, L1 distance in u).
    """
    n_run = cells_for(spec.grids[-1], spec.parity)
    base_spec = replace(spec, k1=0.0, k2=spec.k2, parity="as_given",
                        grids=(n_run,))  # n_run points -> n_run - 1 cells, odd
    base = run_w_case(base_spec, n_run)
    base_model = base.model
    base_u = u_from_w(base.final_state, base_model)

    rows = []
    for k1 in k1_list:
        if not k1 > 0:
            raise ValueError("k1 sweep values must be positive")
        tr = run_w_case(replace(spec, k1=k1), n_run + 1)
        wdist = cross_grid_error(base.final_state, tr.final_state, 1, "linear")
        u = u_from_w(tr.final_state, tr.model)
        udist = cross_grid_error(base_u, u, 1, "linear")
        rows.append((float(k1), wdist, udist))
    return rows
