"""Grid and 2x2-matrix checks of the operator identities behind the radial problem.

Matrices are kept real. The momentum is p = -i hbar D, with D the
antisymmetric central-difference matrix, and the factor -i hbar is tracked
by hand. Hence [x, p] = -i hbar [X, D] and the expected value i hbar f
correspond to [X, D] = -f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import InvalidGrid, InvalidParameter
from .params import DeformationParams, PhysicalConstants


@dataclass(frozen=True)
class GridOperator:
    matrix: NDArray[np.float64]
    x: NDArray[np.float64]

    def __post_init__(self) -> None:
        n = self.x.size
        if self.matrix.shape != (n, n):
            raise InvalidGrid(f"operator shape {self.matrix.shape} does not match grid size {n}")


@dataclass(frozen=True)
class LambdaMatrix:
    matrix: NDArray[np.float64]

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    @property
    def det(self) -> float:
        (p, q), (r, s) = self.matrix
        return float(p * s - q * r)


def uniform_grid(length: float, n_points: int) -> NDArray[np.float64]:
    if n_points < 3 or not length > 0:
        raise InvalidGrid("need n_points >= 3 and length > 0")
    return np.linspace(0.0, length, n_points)


def central_difference(x: NDArray[np.float64]) -> GridOperator:
    """Antisymmetric first-derivative matrix (u_{j+1} - u_{j-1}) / 2h."""
    n = x.size
    h = x[1] - x[0]
    D = np.zeros((n, n))
    idx = np.arange(n - 1)
    D[idx, idx + 1] = 0.5 / h
    D[idx + 1, idx] = -0.5 / h
    return GridOperator(D, x)


def deformed_momentum(nu: float, x: NDArray[np.float64]) -> GridOperator:
    """Real part D_f of P = -i hbar D_f with D_f = f^(1/2) D f^(1/2), f = 1 + nu x."""
    sf = np.sqrt(1.0 + nu * x)
    D = central_difference(x).matrix
    return GridOperator(sf[:, None] * D * sf[None, :], x)


def _commutator_with_x(op: GridOperator) -> NDArray[np.float64]:
    # ([X, M])_ij = (x_i - x_j) M_ij, with x_i - x_j = (i - j) h to avoid cancellation
    n = op.x.size
    h = op.x[1] - op.x[0]
    idx = np.arange(n)
    return (idx[:, None] - idx[None, :]) * h * op.matrix


def deformed_commutator_residual(
    nu: float,
    grid: NDArray[np.float64],
    hbar: float = 1.0,
    test_function: NDArray[np.float64] | None = None,
    exclude: float = 0.05,
) -> float:
    """Max over interior rows of |([x, P] psi)_j - i hbar f_j psi_j|.

    The discrete commutator is not a diagonal matrix: for central differences
    it averages the two neighbours. So the identity is checked on a test
    vector, which defaults to psi = 1 (row sums). For nu = 0 this is exact. For
    nu > 0 the error is (hbar h^2 / 2) f^(1/2) (f^(1/2))'' + O(h^4). Rows within
    ``exclude`` of either end, as a fraction of the domain length, are dropped.
    """
    if nu < 0:
        raise InvalidParameter(f"nu must be >= 0, got {nu}")
    x = np.asarray(grid, dtype=float)
    psi = np.ones_like(x) if test_function is None else np.asarray(test_function, dtype=float)
    comm = _commutator_with_x(deformed_momentum(nu, x))
    # [x, P] = -i hbar [X, D_f], expected i hbar f
    resid = hbar * np.abs(-(comm @ psi) - (1.0 + nu * x) * psi)
    return float(np.max(resid[_interior_mask(x, exclude)]))


def _interior_mask(x: NDArray[np.float64], exclude: float) -> NDArray[np.bool_]:
    # cut by coordinate, not row count, so refined grids compare the same region
    h = x[1] - x[0]
    margin = max(exclude * (x[-1] - x[0]), h) - 1e-9 * h
    mask = (x >= x[0] + margin) & (x <= x[-1] - margin)
    if not mask.any():
        raise InvalidGrid("grid too coarse for the requested boundary exclusion")
    return mask


def lambda_matrix(consts: PhysicalConstants, C1: float, C2: float, k: int) -> LambdaMatrix:
    hbar, m, c = consts.hbar, consts.m, consts.c
    u = C1 / (hbar * c)
    v = m * c * C2 / hbar
    return LambdaMatrix(np.array([[k, u + v], [-u + v, -k]], dtype=float))


def lambda_matrix_numeric(
    consts: PhysicalConstants, C1: float, C2: float, k: int
) -> tuple[LambdaMatrix, tuple[float, float]]:
    """Lambda matrix and its eigenvalues from the characteristic quadratic.

    Returns ``(matrix, (lam_plus, lam_minus))``. The eigenvalues are real
    only when k^2 + (mc C2/hbar)^2 - (C1/hbar c)^2 > 0. Otherwise NaNs are
    returned.
    """
    if k == 0:
        raise InvalidParameter("k must be nonzero")
    L = lambda_matrix(consts, C1, C2, k)
    tr, det = L.trace, L.det
    disc = tr * tr - 4.0 * det
    if disc < 0.0:
        return L, (math.nan, math.nan)
    root = math.sqrt(disc)
    return L, (0.5 * (tr + root), 0.5 * (tr - root))


def radial_dirac_matrices() -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """(beta, alpha_r) in the 2x2 radial representation."""
    beta = np.array([[1, 0], [0, -1]], dtype=complex)
    alpha_r = np.array([[0, -1j], [1j, 0]], dtype=complex)
    return beta, alpha_r


def lambda_from_operators(consts: PhysicalConstants, C1: float, C2: float, k: int) -> NDArray[np.complex128]:
    """k beta + (i/hbar c) C1 alpha_r - i (mc/hbar) C2 alpha_r beta, built from the matrices."""
    beta, alpha_r = radial_dirac_matrices()
    hbar, m, c = consts.hbar, consts.m, consts.c
    return k * beta + 1j / (hbar * c) * C1 * alpha_r - 1j * m * c / hbar * C2 * (alpha_r @ beta)


def _central_derivative(values: NDArray[np.float64], h: float) -> NDArray[np.float64]:
    return (values[2:] - values[:-2]) / (2.0 * h)


def separability_residual(
    consts: PhysicalConstants,
    deform: DeformationParams,
    r: NDArray[np.float64],
    exclude: float = 0.05,
) -> tuple[float, float]:
    """Residuals of C1 d(f/r)/dr = dU/dr and C2 d(f/r)/dr = df1/dr.

    Uses f = 1 + nu r, f1 = 1 + a/r, U = -e^2/r with C1 = -e^2 and C2 = a.
    d(f/r)/dr is taken by central differences on the uniform grid ``r`` and
    the right-hand sides analytically, so the residuals measure the h^2
    truncation error. The two sides would cancel identically if both were
    differenced, since the difference operator is linear. Points within
    ``exclude`` of either end, as a fraction of the domain length, are dropped.
    """
    r = np.asarray(r, dtype=float)
    if r.size < 3 or np.any(r <= 0):
        raise InvalidGrid("r-grid must be strictly positive with at least 3 points")
    h = r[1] - r[0]
    e2, nu, a = consts.e2, deform.nu, deform.a
    C1, C2 = -e2, a
    d_f_over_r = _central_derivative((1.0 + nu * r) / r, h)
    ri = r[1:-1]
    dU = e2 / ri**2
    df1 = -a / ri**2
    mask = _interior_mask(r, exclude)[1:-1]
    res1 = float(np.max(np.abs(C1 * d_f_over_r - dU)[mask]))
    res2 = float(np.max(np.abs(C2 * d_f_over_r - df1)[mask]))
    return res1, res2


def separability_residual_analytic(
    consts: PhysicalConstants, deform: DeformationParams, r: NDArray[np.float64]
) -> tuple[float, float]:
    """Same identities with every derivative analytic; zero up to rounding."""
    r = np.asarray(r, dtype=float)
    e2, a = consts.e2, deform.a
    d_f_over_r = -1.0 / r**2
    res1 = float(np.max(np.abs(-e2 * d_f_over_r - e2 / r**2)))
    res2 = float(np.max(np.abs(a * d_f_over_r + a / r**2)))
    return res1, res2
