"""Numerical route to the spectrum, independent of the closed-form levels.

The radial equation is solved in the mapped coordinate x = ln(1 + nu r)/nu,
where the kinetic term is a constant-coefficient second derivative and the
potential takes the hyperbolic Eckart form. Two eigensolvers are provided:

* :func:`fd_eigen` -- three-point finite differences, Dirichlet at both ends,
  symmetric tridiagonal eigenproblem.
* :func:`shooting_eigen` -- RK4 outward integration with node-count bisection.

Because the Eckart parameters depend on the trial energy E,
:func:`self_consistent_energy` root-finds on E: the n_r-th numerical
eigenvalue must equal the target eigenvalue implied by the same E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import quad
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.optimize import brentq

from .closed_form import (
    EckartParams,
    eckart_level,
    eckart_mapping,
    energy_quadratic_roots,
)
from .errors import (
    BracketingFailure,
    ConvergenceFailure,
    DeformationRequired,
    InvalidGrid,
    InvalidParameter,
)
from .params import DeformationParams, PhysicalConstants, QuantumState

# exp(-kappa * x_max) < 1e-12
_DECAY_LENGTHS = 12.0 * math.log(10.0)


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid on [0, x_max]; eigenproblems live on the interior points."""

    x_max: float
    n_points: int

    def __post_init__(self) -> None:
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise InvalidGrid(f"n_points must be an integer >= 3, got {self.n_points}")
        if not (math.isfinite(self.x_max) and self.x_max > 0.0):
            raise InvalidGrid(f"x_max must be positive, got {self.x_max}")

    @property
    def h(self) -> float:
        return self.x_max / (self.n_points - 1)

    @property
    def x(self) -> NDArray[np.float64]:
        return np.arange(self.n_points) * self.h

    @property
    def interior(self) -> NDArray[np.float64]:
        return self.x[1:-1]


@dataclass(frozen=True)
class PotentialSamples:
    """Potential values on the interior of ``grid``.

    ``func`` evaluates the same potential off-grid (needed by the shooting
    solver). Near the origin V = g/x^2 + v1/x + v0 + O(x); the triple
    ``origin_series = (g, v1, v0)`` seeds the regular Frobenius solution
    x^s (1 + c1 x + c2 x^2) with s = 1/2 + sqrt(1/4 + g).
    """

    grid: RadialGrid
    values: NDArray[np.float64]
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]] | None = None
    origin_series: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if self.values.shape != (self.grid.n_points - 2,):
            raise InvalidGrid("potential must be sampled on the interior points")
        if not np.all(np.isfinite(self.values)):
            raise InvalidGrid("potential is not finite on the interior grid")


@dataclass
class WavefunctionSamples:
    x: NDArray[np.float64]
    r: NDArray[np.float64]
    chi: NDArray[np.float64]
    h: float
    meta: dict = field(default_factory=dict)

    @property
    def norm(self) -> float:
        return float(np.sum(self.chi**2) * self.h)


@dataclass(frozen=True)
class SolverOptions:
    n_points: int = 4001
    x_max: float | str = "auto"
    tol: float = 1e-10
    scan_steps: int = 64
    scan_factor: float = 1.5
    kappa_min: float = 1e-3
    scheme: str = "regularized"


# --- coordinates and grids ---------------------------------------------------


def coordinate_map(value, nu: float, direction: str = "r->x"):
    """Map r to x = ln(1 + nu r)/nu or back with r = (exp(nu x) - 1)/nu.

    log1p/expm1 keep full relative precision when nu*r is tiny, and nu = 0
    is the identity.
    """
    if nu < 0:
        raise InvalidParameter(f"nu must be >= 0, got {nu}")
    v = np.asarray(value, dtype=float)
    if np.any(v < 0):
        raise InvalidParameter("coordinates must be >= 0")
    if direction not in ("r->x", "x->r"):
        raise InvalidParameter(f"direction must be 'r->x' or 'x->r', got {direction!r}")
    if nu == 0.0:
        out = v.copy()
    elif direction == "r->x":
        out = np.log1p(nu * v) / nu
    else:
        out = np.expm1(nu * v) / nu
    return float(out) if out.ndim == 0 else out


def build_grid(
    epsilon_scale: float,
    nu: float,
    n_points: int,
    x_max_policy: float | str = "auto",
    kappa_min: float = 1e-3,
) -> RadialGrid:
    """Grid whose length covers the decay length sqrt(|epsilon_scale|)^-1.

    With ``x_max_policy="auto"`` the box satisfies exp(-kappa x_max) < 1e-12,
    clamped to [10/nu', 200/nu'] with nu' = max(nu, kappa). A numeric
    policy is used verbatim.
    """
    if int(n_points) != n_points or n_points < 3:
        raise InvalidGrid(f"n_points must be an integer >= 3, got {n_points}")
    if x_max_policy != "auto":
        x_max = float(x_max_policy)
        if not x_max > 0.0:
            raise InvalidGrid(f"x_max must be positive, got {x_max}")
        return RadialGrid(x_max, int(n_points))
    kappa = math.sqrt(max(abs(epsilon_scale), kappa_min**2))
    x_max = _DECAY_LENGTHS / kappa * (1.0 + 1e-9)
    nu_p = max(nu, kappa)
    x_max = min(max(x_max, 10.0 / nu_p), 200.0 / nu_p)
    return RadialGrid(x_max, int(n_points))


# --- potentials --------------------------------------------------------------


def eckart_function(p: EckartParams) -> Callable[[NDArray[np.float64]], NDArray[np.float64]]:
    if p.nu <= 0.0:
        raise DeformationRequired("Eckart potential needs nu > 0")
    centrifugal = p.A * (p.A - 0.5 * p.nu)

    def V(x):
        y = 0.5 * p.nu * np.asarray(x, dtype=float)
        return centrifugal / np.sinh(y) ** 2 - 2.0 * p.B / np.tanh(y)

    return V


def eckart_potential(p: EckartParams, grid: RadialGrid) -> PotentialSamples:
    V = eckart_function(p)
    # 1/sinh^2(y) = 1/y^2 - 1/3 + O(y^2), coth(y) = 1/y + O(y)
    centrifugal = p.A * (p.A - 0.5 * p.nu)
    series = (4.0 * centrifugal / p.nu**2, -4.0 * p.B / p.nu, -centrifugal / 3.0)
    return PotentialSamples(grid, V(grid.interior), func=V, origin_series=series)


def sample_potential(
    func: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    grid: RadialGrid,
    origin_series: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> PotentialSamples:
    return PotentialSamples(grid, np.asarray(func(grid.interior), dtype=float), func, origin_series)


# --- eigensolvers ------------------------------------------------------------


def count_nodes(values) -> int:
    """Strict sign changes, skipping entries below 1e-12 of the peak magnitude."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        raise InvalidParameter("count_nodes needs a nonempty array")
    peak = np.max(np.abs(v))
    if peak == 0.0:
        return 0
    s = np.sign(v[np.abs(v) >= 1e-12 * peak])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def _tridiagonal(pot: PotentialSamples) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    h2 = pot.grid.h**2
    diag = 2.0 / h2 + pot.values
    off = np.full(pot.values.size - 1, -1.0 / h2)
    return diag, off


def fd_eigenvalues(pot: PotentialSamples, count: int) -> NDArray[np.float64]:
    """Lowest ``count`` eigenvalues of -d2/dx2 + V (no eigenvectors)."""
    if count < 1:
        raise InvalidParameter(f"count must be >= 1, got {count}")
    diag, off = _tridiagonal(pot)
    count = min(count, diag.size)
    try:
        return eigh_tridiagonal(
            diag, off, eigvals_only=True, select="i", select_range=(0, count - 1)
        )
    except (LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc


def fd_eigen(pot: PotentialSamples, count: int) -> list[tuple[float, WavefunctionSamples]]:
    """Lowest ``count`` eigenpairs with normalized eigenvectors.

    Eigenvectors include the Dirichlet end points and carry sum(chi^2) h = 1.
    The sign is fixed so that chi is positive next to the origin.
    """
    if count < 1:
        raise InvalidParameter(f"count must be >= 1, got {count}")
    diag, off = _tridiagonal(pot)
    count = min(count, diag.size)
    try:
        w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))
    except (LinAlgError, ValueError) as exc:
        raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc
    grid = pot.grid
    x = grid.x
    out = []
    for i in range(count):
        chi = np.zeros(grid.n_points)
        chi[1:-1] = v[:, i]
        chi /= math.sqrt(np.sum(chi**2) * grid.h)
        first = np.flatnonzero(np.abs(chi) > 1e-8 * np.max(np.abs(chi)))
        if first.size and chi[first[0]] < 0:
            chi = -chi
        out.append((float(w[i]), WavefunctionSamples(x=x, r=x.copy(), chi=chi, h=grid.h)))
    return out


def _rk4_shoot(
    V: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    eps: float,
    x0: float,
    y0: float,
    dy0: float,
    h: float,
    steps: int,
    v_nodes: NDArray[np.float64],
    v_mid: NDArray[np.float64],
) -> tuple[int, float]:
    """Integrate chi'' = (V - eps) chi; returns (interior node count, chi at the end)."""
    y, dy = y0, dy0
    nodes = 0
    last = 1.0 if y0 >= 0 else -1.0
    half = 0.5 * h
    for j in range(steps):
        q0 = v_nodes[j] - eps
        qm = v_mid[j] - eps
        q1 = v_nodes[j + 1] - eps
        k1y, k1d = dy, q0 * y
        k2y, k2d = dy + half * k1d, qm * (y + half * k1y)
        k3y, k3d = dy + half * k2d, qm * (y + half * k2y)
        k4y, k4d = dy + h * k3d, q1 * (y + h * k3y)
        y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y)
        dy += h / 6.0 * (k1d + 2 * k2d + 2 * k3d + k4d)
        if j < steps - 1 and y != 0.0:
            s = 1.0 if y > 0 else -1.0
            if s != last:
                nodes += 1
                last = s
        scale = abs(y) + abs(dy)
        if scale > 1e100:
            y /= scale
            dy /= scale
    return nodes, y * last


def shooting_eigen(
    pot: PotentialSamples,
    n_r: int,
    *,
    tol: float = 1e-13,
    max_iter: int = 200,
    window: tuple[float, float] | None = None,
) -> float:
    """Level with exactly ``n_r`` interior nodes, by outward RK4 shooting.

    The solution starts from the Frobenius series of ``pot.origin_series``
    at the first grid point and is integrated to x_max with step h. By Sturm
    oscillation the node count does not decrease as epsilon grows, so
    bisection keeps the bracket where the count jumps from n_r to n_r + 1.
    That jump happens where an extra node enters through x_max, i.e. where
    chi(x_max) changes sign.
    """
    if pot.func is None:
        raise InvalidParameter("shooting needs a potential with an evaluable func")
    grid = pot.grid
    h = grid.h
    steps = grid.n_points - 2
    xs = grid.x[1:]
    v_nodes = np.asarray(pot.func(xs), dtype=float)
    v_mid = np.asarray(pot.func(xs[:-1] + 0.5 * h), dtype=float)
    g, v1, v0 = pot.origin_series
    s = 0.5 + math.sqrt(max(0.25 + g, 0.0))
    x0 = xs[0]
    c1 = v1 / (2.0 * s)

    def shoot(eps):
        c2 = (v1 * c1 + v0 - eps) / (4.0 * s + 2.0)
        y0 = x0**s * (1.0 + c1 * x0 + c2 * x0**2)
        dy0 = x0 ** (s - 1.0) * (s + (s + 1.0) * c1 * x0 + (s + 2.0) * c2 * x0**2)
        return _rk4_shoot(pot.func, eps, x0, y0, dy0, h, steps, v_nodes, v_mid)

    if window is None:
        lo = float(np.min(v_nodes)) - 1.0
        hi = float(np.max(pot.values[-max(1, len(pot.values) // 10):])) + 1.0
    else:
        lo, hi = window
    if shoot(lo)[0] > n_r:
        raise BracketingFailure(f"lower window edge {lo} already has more than {n_r} nodes")
    grow = max(1.0, abs(hi - lo))
    for _ in range(60):
        if shoot(hi)[0] > n_r:
            break
        hi += grow
        grow *= 2.0
    else:
        raise BracketingFailure(f"no energy with more than {n_r} nodes found up to {hi}")

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi) or hi - lo <= tol * max(1.0, abs(mid)):
            break
        if shoot(mid)[0] > n_r:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class RegularizedEckart:
    """Finite-volume Eckart operator with the origin behaviour factored out.

    Writes chi = w u with w = ((1 - exp(-nu x))/2)^s, s = 2A/nu. Since w ~ x^s
    is the regular solution at the origin, the A(A - nu/2)/sinh^2 term cancels
    and the eigenproblem becomes -(w^2 u')' + w^2 [-2(B - A^2) coth(nu x/2)
    - 2A^2] u = eps w^2 u for a smooth u. A three-point cell-centred scheme on
    the same uniform grid is then second order even when s < 1. The plain
    stencil degrades there, which happens for |k| = 1 on the plus branch.

    u(x_max) = 0; no condition is imposed at x = 0 because w^2 vanishes there.
    The cell integrals do not depend on B, so one instance serves every trial
    energy of a self-consistent solve.
    """

    _QUAD_CELLS = 16

    def __init__(self, grid: RadialGrid, nu: float, A: float):
        if nu <= 0.0 or A <= 0.0:
            raise DeformationRequired("regularized scheme needs nu > 0 and A > 0")
        self.grid, self.nu, self.A = grid, nu, A
        self.s = 2.0 * A / nu
        h = grid.h
        x = grid.x[:-1]
        lo = np.maximum(x - 0.5 * h, 0.0)
        hi = x + 0.5 * h
        self.weight = self._cells(self._w2, lo, hi)
        self.coth_weight = self._cells(self._w2_coth, lo, hi)
        self.flux = self._w2(x + 0.5 * h) / h

    def _w2(self, t):
        return (-np.expm1(-self.nu * np.asarray(t, dtype=float)) / 2.0) ** (2.0 * self.s)

    def _w2_coth(self, t):
        t = np.asarray(t, dtype=float)
        return self._w2(t) / np.tanh(0.5 * self.nu * t)

    def _cells(self, f, lo, hi):
        mid = 0.5 * (lo + hi)
        out = np.empty_like(lo)
        j0 = min(self._QUAD_CELLS, lo.size)
        # Simpson away from the origin, adaptive quadrature where w^2 ~ x^(2s)
        out[j0:] = (hi[j0:] - lo[j0:]) / 6.0 * (f(lo[j0:]) + 4.0 * f(mid[j0:]) + f(hi[j0:]))
        for j in range(j0):
            out[j] = quad(f, lo[j], hi[j], epsabs=0.0, epsrel=1e-13, limit=200)[0]
        return out

    def _tridiagonal(self, B: float):
        A = self.A
        diag = self.flux.copy()
        diag[1:] += self.flux[:-1]
        diag += -2.0 * (B - A * A) * self.coth_weight - 2.0 * A * A * self.weight
        off = -self.flux[:-1]
        sr = np.sqrt(self.weight)
        return diag / self.weight, off / (sr[:-1] * sr[1:])

    def eigenvalues(self, B: float, count: int) -> NDArray[np.float64]:
        d, e = self._tridiagonal(B)
        try:
            return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, count - 1))
        except (LinAlgError, ValueError) as exc:
            raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc

    def eigen(self, B: float, count: int) -> list[tuple[float, WavefunctionSamples]]:
        d, e = self._tridiagonal(B)
        try:
            w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
        except (LinAlgError, ValueError) as exc:
            raise ConvergenceFailure(f"tridiagonal eigensolver failed: {exc}") from exc
        grid = self.grid
        x = grid.x
        wx = np.sqrt(self._w2(x))
        out = []
        for i in range(count):
            chi = np.zeros(grid.n_points)
            chi[:-1] = wx[:-1] * v[:, i] / np.sqrt(self.weight)
            chi /= math.sqrt(np.sum(chi**2) * grid.h)
            first = np.flatnonzero(np.abs(chi) > 1e-8 * np.max(np.abs(chi)))
            if first.size and chi[first[0]] < 0:
                chi = -chi
            out.append((float(w[i]), WavefunctionSamples(x=x, r=x.copy(), chi=chi, h=grid.h)))
        return out


# --- self-consistent level ---------------------------------------------------


class _MappedProblem:
    """Eckart eigenproblem for one state on a fixed grid, as a function of E."""

    def __init__(self, state, consts, deform, grid: RadialGrid, scheme: str):
        if scheme not in ("regularized", "plain"):
            raise InvalidParameter(f"unknown scheme {scheme!r}")
        self.state, self.consts, self.deform, self.grid = state, consts, deform, grid
        self.scheme = scheme
        self._reg = None
        if scheme == "regularized":
            A = 0.5 * deform.nu * (state.l_star + 1.0)
            self._reg = RegularizedEckart(grid, deform.nu, A)

    def mapping(self, E: float) -> tuple[EckartParams, float]:
        return eckart_mapping(self.state, self.consts, self.deform, E)

    def eigenvalue(self, E: float) -> tuple[float, float]:
        """(n_r-th numerical eigenvalue, target eigenvalue) at trial energy E."""
        p, eps_target = self.mapping(E)
        idx = self.state.n_r
        if self._reg is not None:
            eig = self._reg.eigenvalues(p.B, idx + 1)[idx]
        else:
            eig = fd_eigenvalues(eckart_potential(p, self.grid), idx + 1)[idx]
        return float(eig), eps_target

    def eigenpair(self, E: float) -> tuple[float, WavefunctionSamples]:
        p, _ = self.mapping(E)
        idx = self.state.n_r
        if self._reg is not None:
            return self._reg.eigen(p.B, idx + 1)[idx]
        return fd_eigen(eckart_potential(p, self.grid), idx + 1)[idx]


def grid_for_state(
    state: QuantumState,
    consts: PhysicalConstants,
    deform: DeformationParams,
    opts: SolverOptions,
    E_guess: float,
) -> RadialGrid:
    """Box sized from the asymptotic decay rate at ``E_guess``.

    Far out the potential tends to -2B, so the state decays like
    exp(-sqrt(-(epsilon + 2B)) x).
    """
    p, eps_target = eckart_mapping(state, consts, deform, E_guess)
    binding = eps_target + 2.0 * p.B
    scale = binding if binding < 0.0 else 0.0
    return build_grid(scale, deform.nu, opts.n_points, opts.x_max, opts.kappa_min)


def _solve(state, consts, deform, opts: SolverOptions):
    if deform.nu <= 0.0:
        raise DeformationRequired("self-consistent solve needs nu > 0")
    _, E_high = energy_quadratic_roots(state, consts, deform)
    grid = grid_for_state(state, consts, deform, opts, E_high)
    problem = _MappedProblem(state, consts, deform, grid, opts.scheme)
    idx = state.n_r

    def g(E: float) -> float:
        eig, target = problem.eigenvalue(E)
        return eig - target

    top = opts.scan_factor * E_high
    Es = top * np.arange(1, opts.scan_steps + 1) / opts.scan_steps
    gs = np.array([g(E) for E in Es])
    candidates = []
    for j in range(len(Es) - 1):
        if gs[j] == 0.0:
            candidates.append(float(Es[j]))
        elif gs[j] * gs[j + 1] < 0.0:
            root = brentq(g, Es[j], Es[j + 1], xtol=1e-300, rtol=max(opts.tol, 4.5e-16), maxiter=500)
            candidates.append(float(root))
    if not candidates:
        raise BracketingFailure(
            f"no sign change of g(E) on (0, {top:.6g}] for k={state.k}, n_r={state.n_r}"
        )

    accepted = []
    for E in candidates:
        p, _ = problem.mapping(E)
        _, wf = problem.eigenpair(E)
        nodes = count_nodes(wf.chi[1:-1])
        if eckart_level(p, idx)[1] and nodes == idx:
            accepted.append((E, nodes, wf, p))
    if not accepted:
        raise BracketingFailure(
            f"roots {candidates} of g(E) are not bound level n_r={idx} (k={state.k})"
        )
    E, nodes, wf, p = accepted[-1]
    diag = {
        "g_final": abs(g(E)),
        "x_max": grid.x_max,
        "n_points": grid.n_points,
        "h": grid.h,
        "scheme": opts.scheme,
        "node_count": nodes,
        "candidates": candidates,
        "tail": float(abs(wf.chi[-2]) / np.max(np.abs(wf.chi))),
        "A": p.A,
        "B": p.B,
    }
    return E, diag, wf


def self_consistent_energy(
    state: QuantumState,
    consts: PhysicalConstants,
    deform: DeformationParams,
    solver_opts: SolverOptions | None = None,
) -> tuple[float, dict]:
    """Energy at which the numerical Eckart eigenvalue meets its target.

    g(E) = eps_num(E) - eps_target(E) is scanned over (0, scan_factor * E_high],
    where E_high is the upper root of the quadratic energy relation and only
    sets the scan range. Every sign change is refined with Brent's method.
    The accepted root is the one whose mapped potential supports level n_r
    and whose eigenvector has n_r nodes. The grid is fixed for the whole
    search so g stays continuous.

    ``solver_opts.scheme`` picks the eigensolver: ``"regularized"`` (default,
    see :class:`RegularizedEckart`) or ``"plain"`` (:func:`fd_eigenvalues`).
    """
    E, diag, _ = _solve(state, consts, deform, solver_opts or SolverOptions())
    return E, diag


def export_wavefunction(
    state: QuantumState,
    consts: PhysicalConstants,
    deform: DeformationParams,
    grid: RadialGrid | None = None,
    solver_opts: SolverOptions | None = None,
) -> WavefunctionSamples:
    """Self-consistent chi(x) on the x-grid with r-values from the inverse map.

    chi = r R is normalized as sum(chi^2) h = 1 on the uniform x-grid. An
    explicit ``grid`` overrides the solver's box and point count.
    """
    opts = solver_opts or SolverOptions()
    if grid is not None:
        opts = SolverOptions(**{**opts.__dict__, "n_points": grid.n_points, "x_max": grid.x_max})
    E, diag, wf = _solve(state, consts, deform, opts)
    wf.r = coordinate_map(wf.x, deform.nu, "x->r")
    wf.meta = {
        "E": E,
        "k": state.k,
        "n_r": state.n_r,
        "branch": state.branch.label,
        "nu": deform.nu,
        "a": deform.a,
        "node_count": count_nodes(wf.chi[1:-1]),
    }
    return wf


def refinement_slope(hs: Sequence[float], errors: Sequence[float]) -> float:
    """Least-squares slope of log|error| against log h."""
    return float(np.polyfit(np.log(hs), np.log(np.abs(errors)), 1)[0])
