"""Direct solver for cyclic (periodic) tridiagonal systems.

The periodic stencils produce matrices that are tridiagonal except for two
corner entries A[0, n-1] and A[n-1, 0].  They are removed by a rank-one
Sherman-Morrison correction on top of scipy's banded solver, so the solve is
direct and exact to rounding.
"""

import numpy as np
from scipy.linalg import solve_banded

__all__ = ["solve_cyclic_tridiagonal"]


def solve_cyclic_tridiagonal(sub, diag, sup, corner_top, corner_bottom, rhs):
    """Solve A x = rhs where A is cyclic tridiagonal.

    Row j of A reads  sub[j]*x_{j-1} + diag[j]*x_j + sup[j]*x_{j+1} = rhs[j]
    with periodic wrap, i.e. ``corner_top = A[0, n-1]`` (overrides sub[0]'s
    natural position) and ``corner_bottom = A[n-1, 0]``.  sub[0] and sup[-1]
    are ignored; pass the wrap entries through the two corner arguments.
    """
    diag = np.asarray(diag, dtype=float)
    sub = np.asarray(sub, dtype=float)
    sup = np.asarray(sup, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    n = diag.shape[0]
    if n < 3:
        raise ValueError("cyclic solver needs n >= 3")

    # A = T + u v^T with u = (gamma, 0, .., 0, corner_bottom),
    # v = (1, 0, .., 0, corner_top/gamma); gamma is any nonzero scalar and is
    # chosen to keep T's first/last diagonal entries away from zero.
    gamma = -(abs(diag[0]) + abs(corner_top) + 1.0)
    d = diag.copy()
    d[0] -= gamma
    d[-1] -= corner_top * corner_bottom / gamma

    ab = np.zeros((3, n))
    ab[0, 1:] = sup[:-1]
    ab[1] = d
    ab[2, :-1] = sub[1:]

    u = np.zeros(n)
    u[0] = gamma
    u[-1] = corner_bottom
    sol = solve_banded((1, 1), ab, np.column_stack([rhs, u]))
    y, z = sol[:, 0], sol[:, 1]

    vy = y[0] + (corner_top / gamma) * y[-1]
    vz = z[0] + (corner_top / gamma) * z[-1]
    return y - z * (vy / (1.0 + vz))
