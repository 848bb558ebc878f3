"""Built-in initial data and steady-state profiles for the standard experiment.

The director angle starts as a periodic zigzag between 0 and pi with corners
at x = 1/4 and 3/4; under the k1 = 0, k2 = 1 speed its w-transform is the
smooth profile -sin(2 pi x).  The steady state reached on grids whose nodes
pin the degenerate points is the piecewise-linear tent profile below.
"""

import numpy as np

__all__ = [
    "u_initial",
    "w_initial",
    "v_initial_tan",
    "v_initial_exact",
    "w_steady",
    "u_steady",
]


def u_initial(x):
    """Zigzag angle: pi/2 at x = 0, down to 0 at 1/4, up to pi at 3/4, back to pi/2."""
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(
        x <= 0.25, -2.0 * np.pi * x + 0.5 * np.pi,
        np.where(x <= 0.75, 2.0 * np.pi * x - 0.5 * np.pi, -2.0 * np.pi * x + 2.5 * np.pi))


def w_initial(x):
    """w-transform of the zigzag under k1 = 0, k2 = 1: exactly -sin(2 pi x)."""
    return -np.sin(2.0 * np.pi * np.asarray(x, dtype=float))


def v_initial_tan(x):
    """Piecewise +-tan(2 pi x) closed form for the v data (diverges at 1/4, 3/4)."""
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    t = np.tan(2.0 * np.pi * x)
    return np.where((x > 0.25) & (x <= 0.75), t, -t)


def v_initial_exact(x):
    """v-transform of the zigzag for k1 = 0, k2 = 1: ln tan(u0/2)."""
    return np.log(np.tan(0.5 * u_initial(x)))


def w_steady(x):
    """Long-time limit on degenerate-pinned grids: tent profile with kinks at 1/4, 3/4."""
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(x <= 0.25, -4.0 * x, np.where(x <= 0.75, 4.0 * x - 2.0, 4.0 - 4.0 * x))


def u_steady(x):
    """Angle profile corresponding to :func:`w_steady`; gradient blows up at the kinks."""
    x = np.mod(np.asarray(x, dtype=float), 1.0)
    return np.where(
        x <= 0.25, np.arccos(4.0 * x),
        np.where(x <= 0.75, np.arccos(2.0 - 4.0 * x), np.arccos(np.clip(4.0 * x - 4.0, -1, 1))))
