"""Conservative-form scheme for the v-formulation v_t = (c^2(kv^{-1}(v)) v_x)_x.

The flux coefficient at a half node is the arithmetic average of the two
neighboring nodal coefficients,

    a_{j-1/2}(v) = (c^2(kv^{-1}(v_j)) + c^2(kv^{-1}(v_{j-1}))) / 2,

and the update carries the same theta time-weighting as the w-scheme,
evaluated at m = theta*v^{n+1} + (1-theta)*v^n.  With theta = 0 this is the
plain explicit conservative update.  Implicit steps are solved by a
frozen-coefficient iteration: freeze a(m) at the current iterate, solve the
resulting cyclic tridiagonal M-matrix system, repeat until the true nonlinear
residual meets the tolerance.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .coefficients import CoefficientModel, c2_of_v, kv_inverse, kw_inverse
from .cyclic import solve_cyclic_tridiagonal
from .errors import (CFLViolation, CoefficientBlowup, DegenerateNodeError,
                     NewtonDivergence, NonfiniteState)
from .grid import GridFunction, PeriodicGrid
from .initial_data import u_initial, v_initial_tan
from .scheme_w import (StepReport, ThetaSchemeConfig, Trajectory, _stats_for,
                       cfl_check)
from . import coefficients as _coef

__all__ = ["VState", "v_initial", "v_step", "run_v", "u_from_v", "u_from_w"]


@dataclass
class VState:
    grid: PeriodicGrid
    v: GridFunction
    t: float
    step_index: int
    model: CoefficientModel


def v_initial(grid: PeriodicGrid, source: str, model: CoefficientModel) -> GridFunction:
    """Discrete v data: ``exact`` applies k_v to the director angle, ``tan``
    uses the piecewise +-tan(2 pi x) closed form.

    Raises :class:`DegenerateNodeError` when a node sits on a zero of the
    wave speed (x = 1/4 or 3/4 for the built-in data), where v is infinite.
    """
    if model.of is None:
        raise ValueError("the v-scheme needs a wave-speed model, not a bare closed form")
    x = grid.nodes
    if source == "exact":
        u = u_initial(x)
        bad = (u < 1e-12) | (u > np.pi - 1e-12)
        if model.of.a1 == 0.0 and np.any(bad):
            raise DegenerateNodeError("grid node hits a zero of the wave speed; "
                                      "use an odd cell count")
        vals = _coef.k_v(u, model.of)
    elif source == "tan":
        if np.any(np.isclose(np.mod(x, 0.5), 0.25, rtol=0, atol=1e-12)):
            raise DegenerateNodeError("tan data diverges at x = 1/4, 3/4; "
                                      "use an odd cell count")
        vals = v_initial_tan(x)
    else:
        raise ValueError(f"unknown v-data source {source!r}")
    return GridFunction(grid, vals)


def _coefficients(m, model):
    try:
        return c2_of_v(m, model)
    except ValueError as exc:
        raise CoefficientBlowup(str(exc)) from None


def _half_averages(a):
    ap = 0.5 * (a + np.roll(a, -1))  # a_{j+1/2} from nodes j, j+1
    return ap, np.roll(ap, 1)        # and a_{j-1/2}


def _flux_div(ap, am, g):
    return ap * (np.roll(g, -1) - g) - am * (g - np.roll(g, 1))


def v_step(state: VState, config: ThetaSchemeConfig, dt: float | None = None):
    """One conservative step; returns (new_state, StepReport)."""
    ok = cfl_check(config.theta, config.lam)
    if not ok and config.cfl_policy == "strict":
        raise CFLViolation(
            f"lambda={config.lam} violates the bound 1/(2(1-theta)) for theta={config.theta}")
    grid = state.grid
    dx = grid.dx
    if dt is None:
        dt = config.lam * dx * dx
    lam = dt / dx**2
    v = state.v.values
    theta = config.theta

    if theta == 0.0:
        a = _coefficients(v, state.model)
        ap, am = _half_averages(a)
        V = v + lam * _flux_div(ap, am, v)
        nit, res = 0, 0.0
    else:
        V = v.copy()
        nit = 0
        max_iter = config.newton_max_iter
        while True:
            m = theta * V + (1.0 - theta) * v
            a = _coefficients(m, state.model)
            ap, am = _half_averages(a)
            F = V - v - lam * _flux_div(ap, am, m)
            res = float(np.max(np.abs(F)))
            if res <= config.newton_tol:
                break
            if nit >= max_iter:
                raise NewtonDivergence(f"frozen-coefficient iteration stalled at {res:.3e}")
            diag = 1.0 + lam * theta * (ap + am)
            rhs = v + lam * (1.0 - theta) * _flux_div(ap, am, v)
            V = solve_cyclic_tridiagonal(-lam * theta * am, diag, -lam * theta * ap,
                                         -lam * theta * am[0], -lam * theta * ap[-1], rhs)
            nit += 1

    if not np.all(np.isfinite(V)):
        raise NonfiniteState(f"non-finite values after step {state.step_index + 1}")
    new = VState(grid=grid, v=GridFunction(grid, V), t=state.t + dt,
                 step_index=state.step_index + 1, model=state.model)
    return new, StepReport(newton_iterations=nit, final_residual=res, cfl_satisfied=ok)


def u_from_v(v: GridFunction, model: CoefficientModel) -> GridFunction:
    """Nodewise inverse transform back to the director angle."""
    return GridFunction(v.grid, kv_inverse(v.values, model.of, model.inversion))


def u_from_w(w: GridFunction, model: CoefficientModel) -> GridFunction:
    return GridFunction(w.grid, kw_inverse(w.values, model.of, model.inversion))


def run_v(grid: PeriodicGrid, model: CoefficientModel, config: ThetaSchemeConfig,
          T: float, source: str = "exact", snapshot_times=(),
          store_all: bool = False, v0: GridFunction | None = None) -> Trajectory:
    """March the v-scheme to time T; mirrors :func:`vheat.scheme_w.run`."""
    if not T > 0:
        raise ValueError("T must be positive")
    vinit = v0 if v0 is not None else v_initial(grid, source, model)

    dt = config.lam * grid.dx**2
    K = max(1, int(np.ceil(T / dt - 1e-12)))
    level_times = np.minimum(np.arange(K + 1) * dt, T)
    level_times[-1] = T

    if not cfl_check(config.theta, config.lam) and config.cfl_policy == "warn":
        warnings.warn(f"CFL violated: theta={config.theta}, lambda={config.lam}; "
                      "proceeding (policy=warn)", stacklevel=2)

    keep = set(range(K + 1)) if store_all else {0, K}
    for s in snapshot_times:
        keep.add(int(np.argmin(np.abs(level_times - s))))

    state = VState(grid=grid, v=vinit, t=0.0, step_index=0, model=model)
    stats = [_stats_for(0.0, vinit.values, grid.dx)]
    reports = []
    stored_times, stored = [], []
    if 0 in keep:
        stored_times.append(0.0)
        stored.append(vinit)
    for k in range(K):
        dt_k = level_times[k + 1] - level_times[k]
        state, rep = v_step(state, config, dt=dt_k)
        state.t = level_times[k + 1]
        reports.append(rep)
        stats.append(_stats_for(state.t, state.v.values, grid.dx))
        if (k + 1) in keep:
            stored_times.append(state.t)
            stored.append(state.v)

    return Trajectory(scheme="v", grid=grid, model=model, config=config,
                      times=np.asarray(stored_times), states=stored,
                      level_times=level_times, reports=reports, stats=stats,
                      t_final=T)
