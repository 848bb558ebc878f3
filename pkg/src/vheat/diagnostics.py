"""Executable forms of the scheme's structural guarantees.

* an extended Harten-lemma checker and solver for the five-point
  implicit/explicit nodal relation, with randomized property trials,
* per-trajectory monitors for the maximum principle and BV bounds,
* the explicit time-continuity bound for the piecewise-linear interpolant,
* the weak-form residual of a trajectory against a smooth test function,
* refinement error tables with observed rates.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .cyclic import solve_cyclic_tridiagonal
from .grid import (GridFunction, bv_of, cross_grid_error, discrete_norms,
                   eval_interpolant, forward_diff)
from .scheme_w import Trajectory

__all__ = [
    "HartenCoefficients",
    "HartenCheckResult",
    "HartenTrialReport",
    "harten_check",
    "harten_solve",
    "harten_property_test",
    "BoundReport",
    "monitor_bounds",
    "time_modulus_w",
    "SpaceTimeTestFunction",
    "smooth_bump",
    "weak_residual",
    "ConvergenceTable",
    "error_table",
]


# ---------------------------------------------------------------------------
# extended Harten lemma
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HartenCoefficients:
    """Half-index coefficient arrays of the nodal relation

        v_j = u_j - A_{j-1/2} D-u_j + B_{j+1/2} D+u_j
                  - C_{j-1/2} D-v_j + D_{j+1/2} D+v_j,

    stored so that entry k of each array is the value at half-index k+1/2.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(a, dtype=float) for a in (self.A, self.B, self.C, self.D)]
        n = arrays[0].shape[0]
        if any(a.shape != (n,) for a in arrays):
            raise ValueError("coefficient arrays must share one length")
        if any(not np.all(np.isfinite(a)) for a in arrays):
            raise ValueError("coefficient arrays must be finite")
        for name, a in zip("ABCD", arrays):
            object.__setattr__(self, name, a)

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class HartenCheckResult:
    passed: bool
    witness: int | None  # first node index violating the condition


def harten_check(coeffs: HartenCoefficients, condition: str) -> HartenCheckResult:
    """Exact evaluation of condition (i) or (ii) of the extended lemma.

    (i):  all coefficients >= 0 and A_{j+1/2} + B_{j+1/2} <= 1 for all j
          (guarantees the total variation cannot grow),
    (ii): all coefficients >= 0 and A_{j-1/2} + B_{j+1/2} <= 1 for all j
          (guarantees the discrete maximum principle).
    """
    A, B, C, D = coeffs.A, coeffs.B, coeffs.C, coeffs.D
    nonneg = (A >= 0) & (B >= 0) & (C >= 0) & (D >= 0)
    if condition == "i":
        ok = nonneg & (A + B <= 1.0)
    elif condition == "ii":
        ok = nonneg & (np.roll(A, 1) + B <= 1.0)
    else:
        raise ValueError("condition must be 'i' or 'ii'")
    if np.all(ok):
        return HartenCheckResult(True, None)
    return HartenCheckResult(False, int(np.argmin(ok)))


def harten_solve(coeffs: HartenCoefficients, u: GridFunction) -> GridFunction:
    """Solve the implicit nodal relation for v given u (cyclic tridiagonal).

    Rearranged per node j:
        (1 + C_{j-1/2} + D_{j+1/2}) v_j - C_{j-1/2} v_{j-1} - D_{j+1/2} v_{j+1} = rhs_j,
        rhs_j = u_j - A_{j-1/2}(u_j - u_{j-1}) + B_{j+1/2}(u_{j+1} - u_j).
    Nonnegative C, D make the matrix strictly diagonally dominant.
    """
    if coeffs.n != u.grid.n:
        raise ValueError("coefficient length does not match the grid")
    uv = u.values
    Am = np.roll(coeffs.A, 1)  # A_{j-1/2} at node j
    Cm = np.roll(coeffs.C, 1)
    Bp, Dp = coeffs.B, coeffs.D
    rhs = uv - Am * (uv - np.roll(uv, 1)) + Bp * (np.roll(uv, -1) - uv)
    diag = 1.0 + Cm + Dp
    v = solve_cyclic_tridiagonal(-Cm, diag, -Dp, -Cm[0], -Dp[-1], rhs)
    return GridFunction(u.grid, v)


@dataclass(frozen=True)
class HartenTrialReport:
    trials: int
    bv_violations: int
    range_violations: int
    max_bv_excess: float
    max_range_excess: float

    @property
    def clean(self) -> bool:
        return self.bv_violations == 0 and self.range_violations == 0


def harten_property_test(trials: int, n: int, seed: int) -> HartenTrialReport:
    """Randomized oracle run of both lemma conclusions.

    Per trial, draws condition-(i)-admissible coefficients and checks the BV
    conclusion, then condition-(ii)-admissible coefficients and checks the
    range conclusion, each against a fresh random u.  Violations beyond 1e-10
    are counted, not raised.
    """
    rng = np.random.default_rng(seed)
    from .grid import PeriodicGrid

    grid = PeriodicGrid(n)
    bv_bad = 0
    rng_bad = 0
    worst_bv = 0.0
    worst_rng = 0.0
    for _ in range(trials):
        u = GridFunction(grid, rng.uniform(-1.0, 1.0, size=n))

        # condition (i): A_j + B_j <= 1 pointwise at each half index
        r = rng.uniform(0.0, 1.0, size=n)
        q = rng.uniform(0.0, 1.0, size=n)
        ci = HartenCoefficients(A=r * q, B=r * (1.0 - q),
                                C=rng.uniform(0.0, 3.0, size=n),
                                D=rng.uniform(0.0, 3.0, size=n))
        assert harten_check(ci, "i").passed
        v = harten_solve(ci, u)
        excess = bv_of(v.values) - bv_of(u.values)
        worst_bv = max(worst_bv, excess)
        if excess > 1e-10:
            bv_bad += 1

        # condition (ii): A_{k} + B_{k+1} <= 1
        B = rng.uniform(0.0, 1.0, size=n)
        A = rng.uniform(0.0, 1.0, size=n) * (1.0 - np.roll(B, -1))
        cii = HartenCoefficients(A=A, B=B,
                                 C=rng.uniform(0.0, 3.0, size=n),
                                 D=rng.uniform(0.0, 3.0, size=n))
        assert harten_check(cii, "ii").passed
        v = harten_solve(cii, u)
        excess = max(float(np.max(v.values)) - float(np.max(u.values)),
                     float(np.min(u.values)) - float(np.min(v.values)))
        worst_rng = max(worst_rng, excess)
        if excess > 1e-10:
            rng_bad += 1

    return HartenTrialReport(trials=trials, bv_violations=bv_bad, range_violations=rng_bad,
                             max_bv_excess=worst_bv, max_range_excess=worst_rng)


# ---------------------------------------------------------------------------
# trajectory bound monitors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    """Per-step exceedances of the four a priori bounds, with drift allowance.

    Allowance at step k is k * newton_tol.  ``violations`` lists
    (step, quantity, excess) for every exceedance beyond the allowance.
    """

    records: list
    violations: list
    newton_tol: float

    @property
    def violation_count(self) -> int:
        return len(self.violations)

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None


_BOUND_NAMES = ("w_min", "w_max", "w_bv", "z_min", "z_max", "z_bv")


def monitor_bounds(trajectory: Trajectory) -> BoundReport:
    """Check every stored level against the level-0 extrema and variations."""
    base = trajectory.stats[0]
    tol = trajectory.config.newton_tol
    violations = []
    for k, s in enumerate(trajectory.stats[1:], start=1):
        allowance = k * tol
        exceed = (
            base.w_min - s.w_min,
            s.w_max - base.w_max,
            s.w_bv - base.w_bv,
            base.z_min - s.z_min,
            s.z_max - base.z_max,
            s.z_bv - base.z_bv,
        )
        for name, e in zip(_BOUND_NAMES, exceed):
            if e > allowance:
                violations.append((k, name, float(e - allowance)))
    return BoundReport(records=list(trajectory.stats), violations=violations, newton_tol=tol)


def time_modulus_w(trajectory: Trajectory, t: float, tau: float):
    """L1 distance of the linear interpolants at t and t+tau, and its a priori bound.

    The bound carries the explicit constants (tau + dt) * |z0|_BV +
    (dx/2) * |w0|_BV; it is guaranteed only on CFL-satisfying runs.  The
    trajectory must store all levels.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    if t < 0 or t + tau > trajectory.t_final + 1e-12:
        raise ValueError("times outside the trajectory span")
    if not trajectory.stores_all_levels:
        raise ValueError("time_modulus_w needs a trajectory with store_all=True")
    a = trajectory.state_at(t)
    b = trajectory.state_at(t + tau)
    measured = cross_grid_error(a, b, 1, "linear")
    dt = trajectory.config.lam * trajectory.grid.dx**2
    s0 = trajectory.stats[0]
    bound = (tau + dt) * s0.z_bv + 0.5 * trajectory.grid.dx * s0.w_bv
    return measured, bound


# ---------------------------------------------------------------------------
# weak-form residual
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpaceTimeTestFunction:
    """Smooth compactly supported test function with exact partial derivatives."""

    value: callable
    dx: callable
    dt: callable


def _mollifier(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


def _mollifier_prime(s):
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    si = s[inside]
    out[inside] = np.exp(-1.0 / (1.0 - si**2)) * (-2.0 * si / (1.0 - si**2) ** 2)
    return out


def _cutoff(s):
    # smooth transition: 1 for s <= 0, 0 for s >= 1
    s = np.clip(s, 0.0, 1.0)
    f = lambda t: np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
    return f(1.0 - s) / (f(1.0 - s) + f(s))


def _cutoff_prime(s, h=1e-6):
    return (_cutoff(s + h) - _cutoff(s - h)) / (2.0 * h)


def smooth_bump(center: float = 0.5, radius: float = 0.3,
                t_on: float = 0.0, t_off: float = 1.0) -> SpaceTimeTestFunction:
    """Mollifier bump in space times a smooth temporal cutoff.

    The function is 1-periodic-compatible (supported strictly inside one
    period), equals the spatial bump for t <= t_on, and vanishes for
    t >= t_off.
    """
    def fx(x):
        return _mollifier((np.asarray(x, dtype=float) - center) / radius)

    def fxp(x):
        return _mollifier_prime((np.asarray(x, dtype=float) - center) / radius) / radius

    def ft(t):
        return _cutoff((np.asarray(t, dtype=float) - t_on) / (t_off - t_on))

    def ftp(t):
        return _cutoff_prime((np.asarray(t, dtype=float) - t_on) / (t_off - t_on)) / (t_off - t_on)

    return SpaceTimeTestFunction(
        value=lambda x, t: fx(x) * ft(t),
        dx=lambda x, t: fxp(x) * ft(t),
        dt=lambda x, t: fx(x) * ftp(t),
    )


def weak_residual(trajectory: Trajectory, phi: SpaceTimeTestFunction) -> float:
    """Substitute the trajectory into the weak formulation and return the defect.

    Quadrature follows the interpolants' piecewise structure: the w * phi_t
    term integrates the piecewise-constant-in-time solution exactly (the time
    integral of phi_t telescopes), the flux and gradient-squared terms use the
    left endpoint in time and the interval midpoints in space, where the
    derivative interpolant is exact.
    """
    if not trajectory.stores_all_levels:
        raise ValueError("weak_residual needs a trajectory with store_all=True")
    grid = trajectory.grid
    dx = grid.dx
    xn = grid.nodes
    xm = grid.midpoints
    times = trajectory.level_times
    model = trajectory.model

    if abs(float(np.max(np.abs(phi.value(xn, trajectory.t_final))))) > 1e-14:
        warnings.warn("test function does not vanish at the final time; "
                      "the residual misses part of its support", stacklevel=2)

    res = 0.0
    phi_n_now = phi.value(xn, times[0])
    for k in range(len(times) - 1):
        w = trajectory.states[k].values
        phi_n_next = phi.value(xn, times[k + 1])
        # int w phi_t over the slab, exact in time for piecewise-constant w
        res += dx * float(np.sum(w * (phi_n_next - phi_n_now)))
        phi_n_now = phi_n_next

        dt_k = times[k + 1] - times[k]
        z = (np.roll(w, -1) - w) / dx
        w_mid = np.roll(w, -1)  # cell interpolant is right-continuous at x_{j+1/2}
        B, dB, _ = model.B_derivs(w_mid)
        res -= dt_k * dx * float(np.sum(B * z * phi.dx(xm, times[k])))
        res -= dt_k * dx * float(np.sum(dB * z * z * phi.value(xm, times[k])))

    res += dx * float(np.sum(trajectory.states[0].values * phi.value(xn, 0.0)))
    return res


# ---------------------------------------------------------------------------
# refinement error tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    n_plus_1: int
    err1: float
    rate1: float | None
    err11: float
    rate11: float | None
    errinf: float
    rateinf: float | None
    err1inf: float
    rate1inf: float | None


_CSV_HEADER = "N_plus_1,err1,rate1,err11,rate11,errinf,rateinf,err1inf,rate1inf"


@dataclass(frozen=True)
class ConvergenceTable:
    rows: list
    compare_in: str
    sample_at: str

    def to_csv(self) -> str:
        """Errors with 2 significant digits, rates with 1 decimal, blank first rates."""
        lines = [_CSV_HEADER]
        for r in self.rows:
            cells = [str(r.n_plus_1)]
            for e, rt in ((r.err1, r.rate1), (r.err11, r.rate11),
                          (r.errinf, r.rateinf), (r.err1inf, r.rate1inf)):
                cells.append(f"{e:.1e}")
                cells.append("" if rt is None else f"{rt:.1f}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def column(self, name: str):
        return [getattr(r, name) for r in self.rows]


def _nodal_in_space(traj: Trajectory, space: str) -> GridFunction:
    state = traj.final_state
    if space == "w":
        if traj.scheme == "w":
            return state
        from .coefficients import k_w
        from .scheme_v import u_from_v
        u = u_from_v(state, traj.model)
        return GridFunction(traj.grid, k_w(u.values, traj.model.of))
    if space == "u":
        from .scheme_v import u_from_v, u_from_w
        return u_from_v(state, traj.model) if traj.scheme == "v" else u_from_w(state, traj.model)
    raise ValueError("compare_in must be 'w' or 'u'")


def _pair_errors(coarse: GridFunction, fine: GridFunction, sample_at: str):
    """(L1, sup) distances of solution and derivative interpolants."""
    if sample_at == "fine_midpoints":
        xq = fine.grid.midpoints
        weight = fine.grid.dx
    elif sample_at == "coarse_nodes":
        xq = coarse.grid.nodes
        weight = coarse.grid.dx
    else:
        raise ValueError("sample_at must be 'fine_midpoints' or 'coarse_nodes'")
    ds = np.abs(eval_interpolant(coarse, xq, "constant_cell")
                - eval_interpolant(fine, xq, "constant_cell"))
    zc, zf = forward_diff(coarse), forward_diff(fine)
    dz = np.abs(eval_interpolant(zc, xq, "constant_interval")
                - eval_interpolant(zf, xq, "constant_interval"))
    return (float(weight * np.sum(ds)), float(np.max(ds)),
            float(weight * np.sum(dz)), float(np.max(dz)))


def error_table(runs, reference: Trajectory, compare_in: str = "w",
                sample_at: str = "fine_midpoints") -> ConvergenceTable:
    """Errors of a refinement ladder against a finer reference at the final time.

    Solution errors compare the piecewise-constant cell interpolants, derivative
    errors the piecewise-constant interval interpolants of the one-sided
    differences; ``compare_in='u'`` maps nodal values through the inverse
    transforms first.  ``sample_at`` picks the evaluation points: the
    reference grid's cell midpoints (default), or the nodes of each run's own
    grid, which is the right choice for nested-parity ladders where nodal
    coincidence carries the superconvergence.  Rates are log2 ratios of
    consecutive rows.
    """
    for tr in runs:
        if abs(tr.t_final - reference.t_final) > 1e-10:
            raise ValueError("runs and reference end at different times")
        if tr.grid.n >= reference.grid.n:
            raise ValueError("reference must be strictly finer than every run")
    ref_sol = _nodal_in_space(reference, compare_in)
    rows = []
    prev = None
    for tr in runs:
        sol = _nodal_in_space(tr, compare_in)
        e1, einf, e11, e1inf = _pair_errors(sol, ref_sol, sample_at)
        if prev is None:
            rates = (None, None, None, None)
        else:
            rates = tuple(np.log2(p / e) if e > 0 and p > 0 else None
                          for p, e in zip(prev, (e1, e11, einf, e1inf)))
        rows.append(ConvergenceRow(tr.grid.n + 1, e1, rates[0], e11, rates[1],
                                   einf, rates[2], e1inf, rates[3]))
        prev = (e1, e11, einf, e1inf)
    return ConvergenceTable(rows=rows, compare_in=compare_in, sample_at=sample_at)
