"""Wave-speed models, diffusion coefficients, and the antiderivative transforms.

The director dynamics use the anisotropic speed c(u) = sqrt(k1 cos^2 u + k2 sin^2 u).
Two substitutions turn the non-divergence equation into tractable forms:

  * w = k_w(u) = int_{pi/2}^u c           ->  w_t = B(w) w_xx with B = c^2 o k_w^{-1},
  * v = k_v(u) = int_{pi/2}^u 1/c         ->  v_t = (c^2(k_v^{-1}(v)) v_x)_x.

For k1 <= k2 both integrals are incomplete elliptic integrals with parameter
m = 1 - k1/k2; for k1 = 0, k2 = 1 they collapse to w = -cos u and B(w) = 1 - w^2.
All forward maps, inverses (safeguarded Newton with bisection fallback), and
the derivatives B', B'' live here.

Internally the elastic constants are rescaled so that c <= 1 whenever
max(k1, k2) > 1; the applied factor is recorded on the model.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from scipy import special as _sp

from .errors import NewtonDivergence

__all__ = [
    "EPS_DEGENERATE",
    "InversionConfig",
    "OseenFrankModel",
    "CoefficientModel",
    "c_of_u",
    "ellip_F",
    "ellip_E",
    "jacobi_am",
    "k_w",
    "kw_inverse",
    "B_of_w",
    "k_v",
    "kv_inverse",
    "c2_of_v",
]

# Nodes with normalized wave speed below this are treated as degenerate.
EPS_DEGENERATE = 1e-8

_PHI_SLACK = 1e-12


@dataclass(frozen=True)
class InversionConfig:
    """Controls for the scalar Newton inversions of the transforms."""

    tol: float = 1e-12
    max_iter: int = 60
    bracket_fallback: bool = True

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


_DEFAULT_INVERSION = InversionConfig()


@dataclass(frozen=True)
class OseenFrankModel:
    """Elastic constants k1 >= 0, k2 > 0 of the anisotropic wave speed."""

    k1: float
    k2: float

    def __post_init__(self):
        if self.k1 < 0:
            raise ValueError("k1 must be nonnegative")
        if not self.k2 > 0:
            raise ValueError("k2 must be positive")

    @property
    def scale_factor(self) -> float:
        """Factor dividing c so the normalized speed stays <= 1."""
        top = max(self.k1, self.k2)
        return float(np.sqrt(top)) if top > 1.0 else 1.0

    @property
    def a1(self) -> float:
        """Normalized k1 (divided by scale_factor**2)."""
        return self.k1 / self.scale_factor**2

    @property
    def a2(self) -> float:
        """Normalized k2."""
        return self.k2 / self.scale_factor**2


def c_of_u(u, model: OseenFrankModel):
    """Raw wave speed sqrt(k1 cos^2 u + k2 sin^2 u), overflow/cancellation safe."""
    u = np.asarray(u, dtype=float)
    out = np.hypot(np.sqrt(model.k1) * np.cos(u), np.sqrt(model.k2) * np.sin(u))
    return float(out) if out.ndim == 0 else out


def _c_norm(u, model: OseenFrankModel):
    return np.hypot(np.sqrt(model.a1) * np.cos(u), np.sqrt(model.a2) * np.sin(u))


# ---------------------------------------------------------------------------
# special-function kernels
# ---------------------------------------------------------------------------


def _check_phi_m(phi, m, name, m1_needs_open_phi):
    phi = np.asarray(phi, dtype=float)
    if np.any(np.abs(phi) > np.pi / 2 + _PHI_SLACK):
        raise ValueError(f"{name}: phi outside [-pi/2, pi/2]")
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"{name}: parameter m={m} outside [0, 1]")
    if m1_needs_open_phi and m == 1.0 and np.any(np.abs(phi) >= np.pi / 2):
        raise ValueError(f"{name}: diverges at |phi| = pi/2 for m = 1")
    return np.clip(phi, -np.pi / 2, np.pi / 2)


def ellip_F(phi, m):
    """Incomplete elliptic integral of the first kind, int_0^phi (1 - m sin^2 t)^(-1/2) dt."""
    phi = _check_phi_m(phi, m, "ellip_F", m1_needs_open_phi=True)
    out = _sp.ellipkinc(phi, m)
    return float(out) if np.ndim(out) == 0 else out


def ellip_E(phi, m):
    """Incomplete elliptic integral of the second kind, int_0^phi (1 - m sin^2 t)^(1/2) dt."""
    phi = _check_phi_m(phi, m, "ellip_E", m1_needs_open_phi=False)
    out = _sp.ellipeinc(phi, m)
    return float(out) if np.ndim(out) == 0 else out


def _gudermannian(x):
    # gd(x) = 2 atan(tanh(x/2)); saturates smoothly, no overflow for any x
    return 2.0 * np.arctan(np.tanh(0.5 * np.asarray(x, dtype=float)))


@functools.lru_cache(maxsize=128)
def _complete_K(m: float) -> float:
    return float(_sp.ellipk(m))


def jacobi_am(x, m):
    """Amplitude function: the inverse of phi -> ellip_F(phi, m) on |phi| <= pi/2.

    Safeguarded Newton on F(phi) - x (analytic derivative), with bisection
    fallback; for m = 1 the inverse is the Gudermannian and is evaluated in
    closed form for any finite x.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    if not 0.0 <= m <= 1.0:
        raise ValueError(f"jacobi_am: parameter m={m} outside [0, 1]")
    if m == 1.0:
        out = _gudermannian(x)
        return float(out) if scalar else out
    if m == 0.0:
        if np.any(np.abs(x) > np.pi / 2 + _PHI_SLACK):
            raise ValueError("jacobi_am: |x| exceeds the attainable range for m = 0")
        out = np.clip(x, -np.pi / 2, np.pi / 2)
        return float(out) if scalar else out

    K = _complete_K(m)
    if np.any(np.abs(x) > K * (1.0 + 1e-12) + 1e-300):
        raise ValueError("jacobi_am: |x| exceeds the attainable range K(m)")
    xa = np.atleast_1d(np.clip(x, -K, K))

    lo = np.full_like(xa, -np.pi / 2)
    hi = np.full_like(xa, np.pi / 2)
    phi = np.clip(xa / K * (np.pi / 2), -np.pi / 2, np.pi / 2)
    for _ in range(100):
        f = _sp.ellipkinc(phi, m) - xa
        if np.max(np.abs(f)) <= 1e-13:
            break
        lo = np.where(f < 0, phi, lo)
        hi = np.where(f > 0, phi, hi)
        step = phi - f * np.sqrt(1.0 - m * np.sin(phi) ** 2)
        outside = (step <= lo) | (step >= hi)
        phi = np.where(outside, 0.5 * (lo + hi), step)
    else:
        raise NewtonDivergence("jacobi_am: inversion did not converge")
    return float(phi[0]) if scalar else phi.reshape(x.shape)


# ---------------------------------------------------------------------------
# quadrature fallback for k1 > k2 (outside the elliptic parameter range)
# ---------------------------------------------------------------------------

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(48)


def _gauss_from_base(f, u):
    """int_{pi/2}^{u} f, one 48-point Gauss panel per target (f analytic here)."""
    u = np.atleast_1d(u)
    half = 0.5 * (u - np.pi / 2)
    mid = 0.5 * (u + np.pi / 2)
    pts = mid[:, None] + half[:, None] * _GAUSS_X[None, :]
    return half * np.sum(_GAUSS_W[None, :] * f(pts), axis=1)


# ---------------------------------------------------------------------------
# the w-transform
# ---------------------------------------------------------------------------


def _check_u_range(u):
    u = np.asarray(u, dtype=float)
    if np.any(u < -_PHI_SLACK) or np.any(u > np.pi + _PHI_SLACK):
        raise ValueError("u outside [0, pi]")
    return np.clip(u, 0.0, np.pi)


def k_w(u, model: OseenFrankModel):
    """Antiderivative of the normalized speed from the base point pi/2."""
    u = _check_u_range(u)
    scalar = u.ndim == 0
    a1, a2 = model.a1, model.a2
    if a1 == 0.0:
        out = -np.sqrt(a2) * np.cos(u)
    elif a1 <= a2:
        out = np.sqrt(a2) * ellip_E(u - np.pi / 2, 1.0 - a1 / a2)
    else:
        out = _gauss_from_base(lambda p: _c_norm(p, model), u)
    out = np.asarray(out)
    return float(out) if scalar or out.ndim == 0 else out


@functools.lru_cache(maxsize=128)
def w_range(model: OseenFrankModel) -> tuple:
    """Attainable [w_min, w_max] = [k_w(0), k_w(pi)]."""
    return (float(k_w(0.0, model)), float(k_w(np.pi, model)))


def kw_inverse(w, model: OseenFrankModel, cfg: InversionConfig = _DEFAULT_INVERSION):
    """Invert k_w on [0, pi]: returns u with |k_w(u) - w| <= cfg.tol.

    Closed form for the k1 = 0 family; otherwise a bracketed vector Newton
    iteration (the derivative is the speed c, which is positive away from the
    endpoints), falling back to bisection whenever an update leaves the
    current bracket.
    """
    w = np.asarray(w, dtype=float)
    scalar = w.ndim == 0
    wmin, wmax = w_range(model)
    slack = 10 * cfg.tol
    if np.any(w < wmin - slack) or np.any(w > wmax + slack):
        raise ValueError(f"w outside the attainable range [{wmin:.6g}, {wmax:.6g}]")
    wa = np.atleast_1d(np.clip(w, wmin, wmax))

    root = np.sqrt(model.a2)
    u = np.arccos(-np.clip(wa / root, -1.0, 1.0))
    if model.a1 == 0.0:
        return float(u[0]) if scalar else u.reshape(w.shape)

    lo = np.zeros_like(wa)
    hi = np.full_like(wa, np.pi)
    for _ in range(cfg.max_iter):
        f = k_w(u, model) - wa
        if np.max(np.abs(f)) <= cfg.tol:
            break
        lo = np.where(f < 0, u, lo)
        hi = np.where(f > 0, u, hi)
        step = u - f / np.maximum(_c_norm(u, model), 1e-300)
        if cfg.bracket_fallback:
            outside = (step < lo) | (step > hi)
            step = np.where(outside, 0.5 * (lo + hi), step)
        u = np.clip(step, 0.0, np.pi)
    else:
        raise NewtonDivergence("kw_inverse: Newton iteration did not converge")
    return float(u[0]) if scalar else u.reshape(w.shape)


# ---------------------------------------------------------------------------
# the v-transform
# ---------------------------------------------------------------------------


def k_v(u, model: OseenFrankModel):
    """Antiderivative of 1/c from the base point pi/2; diverges at zeros of c."""
    u = _check_u_range(u)
    scalar = u.ndim == 0
    a1, a2 = model.a1, model.a2
    if a1 == 0.0:
        if np.any(u <= 0.0) or np.any(u >= np.pi):
            raise ValueError("k_v diverges at u in {0, pi} when k1 = 0")
        out = np.log(np.tan(0.5 * u)) / np.sqrt(a2)
    elif a1 <= a2:
        out = ellip_F(u - np.pi / 2, 1.0 - a1 / a2) / np.sqrt(a2)
    else:
        out = _gauss_from_base(lambda p: 1.0 / _c_norm(p, model), u)
    out = np.asarray(out)
    return float(out) if scalar or out.ndim == 0 else out


def kv_inverse(v, model: OseenFrankModel, cfg: InversionConfig = _DEFAULT_INVERSION):
    """Invert k_v: amplitude-function path for k1 <= k2, bracketed Newton otherwise."""
    v = np.asarray(v, dtype=float)
    scalar = v.ndim == 0
    a1, a2 = model.a1, model.a2
    root = np.sqrt(a2)
    if a1 == 0.0:
        out = _gudermannian(root * v) + np.pi / 2
        return float(out) if scalar else out
    if a1 <= a2:
        out = jacobi_am(root * v, 1.0 - a1 / a2) + np.pi / 2
        out = np.asarray(out)
        return float(out) if scalar or out.ndim == 0 else out

    vmin = float(k_v(0.0, model))
    vmax = float(k_v(np.pi, model))
    if np.any(v < vmin - 10 * cfg.tol) or np.any(v > vmax + 10 * cfg.tol):
        raise ValueError("v outside the attainable range")
    va = np.atleast_1d(np.clip(v, vmin, vmax))
    lo = np.zeros_like(va)
    hi = np.full_like(va, np.pi)
    u = np.full_like(va, np.pi / 2)
    for _ in range(cfg.max_iter):
        f = k_v(u, model) - va
        if np.max(np.abs(f)) <= cfg.tol:
            break
        lo = np.where(f < 0, u, lo)
        hi = np.where(f > 0, u, hi)
        step = u - f * _c_norm(u, model)
        if cfg.bracket_fallback:
            outside = (step < lo) | (step > hi)
            step = np.where(outside, 0.5 * (lo + hi), step)
        u = np.clip(step, 0.0, np.pi)
    else:
        raise NewtonDivergence("kv_inverse: Newton iteration did not converge")
    return float(u[0]) if scalar else u.reshape(v.shape)


# ---------------------------------------------------------------------------
# diffusion coefficient B(w) = c^2(k_w^{-1}(w)) and its derivatives
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoefficientModel:
    """Diffusion coefficient B(w) with derivatives and the valid w-range.

    Three kinds:
      * ``quadratic``  -- B = 1 - w^2 on [-1, 1] (the k1=0, k2=1 closed form),
      * ``oseen_frank``-- B = c^2 o k_w^{-1} for general elastic constants,
      * ``closed_form``-- user-supplied (B, B', B'') callables.
    """

    kind: str
    w_min: float
    w_max: float
    of: OseenFrankModel | None = None
    inversion: InversionConfig = _DEFAULT_INVERSION
    fns: tuple = field(default=None, repr=False, compare=False)
    # where B's formula can be evaluated at all; [w_min, w_max] is where the
    # model is meaningful (B >= 0), but polynomial kinds extend beyond it
    eval_min: float = -np.inf
    eval_max: float = np.inf

    # -- factories ---------------------------------------------------------
    @classmethod
    def quadratic(cls) -> "CoefficientModel":
        return cls(kind="quadratic", w_min=-1.0, w_max=1.0, of=OseenFrankModel(0.0, 1.0))

    @classmethod
    def oseen_frank(cls, k1, k2, inversion: InversionConfig = _DEFAULT_INVERSION) -> "CoefficientModel":
        of = OseenFrankModel(float(k1), float(k2))
        if of.a1 == 0.0:
            root = float(np.sqrt(of.a2))
            return cls(kind="quadratic", w_min=-root, w_max=root, of=of, inversion=inversion)
        wmin, wmax = w_range(of)
        # the general path needs the inverse transform, which only exists on the range
        return cls(kind="oseen_frank", w_min=wmin, w_max=wmax, of=of, inversion=inversion,
                   eval_min=wmin, eval_max=wmax)

    @classmethod
    def from_closed_form(cls, B, dB, d2B, w_range=(-np.inf, np.inf)) -> "CoefficientModel":
        return cls(kind="closed_form", w_min=float(w_range[0]), w_max=float(w_range[1]),
                   fns=(B, dB, d2B), eval_min=float(w_range[0]), eval_max=float(w_range[1]))

    @property
    def scale_factor(self) -> float:
        return self.of.scale_factor if self.of is not None else 1.0

    # -- evaluation --------------------------------------------------------
    def B(self, w):
        return B_of_w(w, self)[0]

    def B_pair(self, w):
        """(B, B') without the second derivative; the stepper's hot path."""
        w = np.asarray(w, dtype=float)
        if self.kind == "closed_form":
            return np.broadcast_to(np.asarray(self.fns[0](w), dtype=float), w.shape).copy(), \
                   np.broadcast_to(np.asarray(self.fns[1](w), dtype=float), w.shape).copy()
        a1, a2 = self.of.a1, self.of.a2
        if a1 == 0.0:
            return a2 - w * w, -2.0 * w
        u = kw_inverse(w, self.of, self.inversion)
        c = _c_norm(u, self.of)
        return c * c, (a2 - a1) * np.sin(2.0 * u) / np.maximum(c, 1e-300)

    def B_derivs(self, w):
        return B_of_w(w, self)


def B_of_w(w, model: CoefficientModel):
    """Return (B, B', B'') at w.

    The quadratic family is exact: (1 - w^2, -2w, -2) up to the k2 scale.
    On the general path u = k_w^{-1}(w) and

        B = c^2(u),   B' = 2 c'(u),   B'' = 2 c''(u)/c(u),

    with the removable singularity of B'' at degenerate nodes (c < 1e-8)
    replaced by a one-sided difference of B' in w.
    """
    w = np.asarray(w, dtype=float)
    scalar = w.ndim == 0
    wa = np.atleast_1d(w)

    if model.kind == "closed_form":
        B, dB, d2B = (np.broadcast_to(np.asarray(f(wa), dtype=float), wa.shape).copy()
                      for f in model.fns)
    else:
        of = model.of
        a1, a2 = of.a1, of.a2
        if a1 == 0.0:
            B = a2 - wa * wa
            dB = -2.0 * wa
            d2B = np.full_like(wa, -2.0)
        else:
            u = kw_inverse(wa, of, model.inversion)
            c = _c_norm(u, of)
            cp = (a2 - a1) * np.sin(2.0 * u) / np.maximum(2.0 * c, 1e-300)
            B = c * c
            dB = 2.0 * cp
            d2B = 2.0 * ((a2 - a1) * np.cos(2.0 * u) - cp * cp) / np.maximum(c * c, 1e-300)
            low = c < EPS_DEGENERATE
            if np.any(low):
                # one-sided difference of B' pointing into the valid range
                h = np.sqrt(np.finfo(float).eps)
                sgn = np.where(wa[low] > 0.5 * (model.w_min + model.w_max), -1.0, 1.0)
                wh = np.clip(wa[low] + sgn * h, model.w_min, model.w_max)
                uh = kw_inverse(wh, of, model.inversion)
                ch = _c_norm(uh, of)
                dBh = (a2 - a1) * np.sin(2.0 * uh) / np.maximum(ch, 1e-300)
                d2B[low] = (dBh - dB[low]) / (wh - wa[low])

    if scalar:
        return float(B[0]), float(dB[0]), float(d2B[0])
    return B, dB, d2B


def c2_of_v(v, model: CoefficientModel):
    """The v-equation's diffusion coefficient c^2(k_v^{-1}(v)).

    Closed form a2 * sech^2(sqrt(a2) v) for the k1 = 0 family (stable for any
    v); amplitude-function path otherwise.  Raises ValueError when sqrt(a2)*v
    leaves the attainable range of the amplitude inversion.
    """
    if model.of is None:
        raise ValueError("c2_of_v needs a wave-speed model, not a bare closed form")
    v = np.asarray(v, dtype=float)
    scalar = v.ndim == 0
    a1, a2 = model.of.a1, model.of.a2
    if a1 == 0.0:
        t = np.sqrt(a2) * v
        at = np.abs(t)
        e = np.exp(-at)
        sech = 2.0 * e / (1.0 + e * e)
        out = a2 * sech * sech
    else:
        u = kv_inverse(v, model.of, model.inversion)
        c = _c_norm(u, model.of)
        out = c * c
    return float(out) if scalar else out
