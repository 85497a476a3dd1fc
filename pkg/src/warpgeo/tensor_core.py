"""Small dense linear algebra and finite-difference helpers."""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

# first derivatives of metric/connection fields
FD_STEP = 1e-5
# nested derivatives inside numerical curvature
FD_STEP_NESTED = 1e-4
DEGENERACY_RTOL = 1e-12


class DegenerateMatrix(np.linalg.LinAlgError):
    """Raised when a metric matrix fails the nondegeneracy guard.

    This is a geometric signal (a degenerate warped metric), so it is never
    regularised away.
    """

    def __init__(self, det: float, scale: float):
        self.det = det
        self.scale = scale
        super().__init__(f"degenerate matrix: |det|={abs(det):.3e} <= {DEGENERACY_RTOL:g}*scale ({scale:.3e})")


def symmetrize(a: np.ndarray) -> np.ndarray:
    """Copy the upper triangle onto the lower one, so symmetry is exact."""
    a = np.array(a, dtype=float)
    iu = np.triu_indices(a.shape[0], 1)
    a[(iu[1], iu[0])] = a[iu]
    return a


def det_scale(a: np.ndarray) -> float:
    """Product of the row max-norms; the reference scale for the determinant guard."""
    return float(np.prod(np.max(np.abs(a), axis=1)))


def check_nondegenerate(a: np.ndarray) -> float:
    det = float(np.linalg.det(a))
    scale = det_scale(a)
    if not abs(det) > DEGENERACY_RTOL * scale:
        raise DegenerateMatrix(det, scale)
    return det


def solve_sym(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` for a symmetric nondegenerate ``a``.

    ``b`` may be a vector or a matrix of right-hand-side columns.
    """
    a = np.asarray(a, dtype=float)
    check_nondegenerate(a)
    return np.linalg.solve(a, np.asarray(b, dtype=float))


def inverse_sym(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    check_nondegenerate(a)
    return symmetrize(np.linalg.inv(a))


def central_fd(f: Callable[[np.ndarray], float | np.ndarray], p: Sequence[float], i: int, h: float = FD_STEP):
    """Central difference ``(f(p + h e_i) - f(p - h e_i)) / 2h``.

    Works for scalar- and array-valued ``f``.
    """
    p = np.asarray(p, dtype=float)
    e = np.zeros_like(p)
    e[i] = h
    return (np.asarray(f(p + e)) - np.asarray(f(p - e))) / (2.0 * h)


def fd_gradient(f, p: Sequence[float], h: float = FD_STEP) -> np.ndarray:
    """Stack of central differences along every coordinate (derivative index first)."""
    return np.stack([central_fd(f, p, i, h) for i in range(len(p))])
