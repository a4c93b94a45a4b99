"""Analytic spectrum of the Dirac-Kepler problem with deformation and variable mass.

Everything here is a closed-form expression. The numerical cross-checks live
in :mod:`defdirac.radial_numeric`.

Two versions of the exact level formula are available:

``"corrected"`` (default)
    the larger root of the quadratic energy relation, written in the same
    shape as the literal closed form. It differs from the literal
    formula only inside the square root, where the literal version carries
    ``(nu e^2/2mc^2)^2 (1+K)(1 + a nu + K)`` instead of
    ``(1+K)[(nu e^2/2mc^2)^2 (1+K) - a nu]`` with ``K = (k^2+abar^2)/n^2``.
``"printed"``
    the literal closed form. It satisfies the quadratic only when
    ``a * nu == 0``; :func:`energy_exact` reports its residual so the
    disagreement is always visible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .errors import (
    ComplexRoots,
    DeformationRequired,
    DomainError,
    InvalidParameter,
    MassParameterTooLarge,
    NoBoundState,
)
from .params import (
    Branch,
    DeformationParams,
    PhysicalConstants,
    QuantumState,
    bound_state_condition,
    derive_couplings,
    make_state,
)

Form = Literal["corrected", "printed"]


@dataclass(frozen=True)
class EckartParams:
    """Parameters of -d2/dx2 + A(A - nu/2)/sinh^2(nu x/2) - 2B coth(nu x/2)."""

    A: float
    B: float
    nu: float


@dataclass(frozen=True)
class EffectiveParams:
    lstar_product: float
    e_star_sq: float
    E_star: float


@dataclass(frozen=True)
class CorrectionBreakdown:
    delta1: float
    delta2: float
    delta3: float

    @property
    def total(self) -> float:
        return self.delta1 + self.delta2 + self.delta3


@dataclass
class SpectrumRecord:
    """One energy level: closed-form value, optional numerical value and flags.

    ``quadratic_residual`` is the relative residual of ``E_closed`` in the
    quadratic energy relation and ``printed_residual`` the same for the
    literal closed form. ``level_exists`` is the per-level guard
    B > (A + nu n_r/2)^2, ``literal_exists`` the bare B > A^2, A >= 0, B >= 0.
    """

    k: int
    n_r: int
    branch: str
    lam: float
    l_star: float
    n: float
    E_closed: float
    E_printed: float
    quadratic_residual: float
    printed_residual: float
    root: str
    bound_ok: bool
    level_exists: bool
    literal_exists: bool
    E_numeric: float | None = None
    node_count: int | None = None
    status: str = "ok"
    extra: dict = field(default_factory=dict)

    COLUMNS = (
        "k", "n_r", "branch", "lam", "l_star", "n", "E_closed", "E_printed",
        "E_numeric", "quadratic_residual", "printed_residual", "root",
        "bound_ok", "level_exists", "literal_exists", "node_count", "status",
    )

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.COLUMNS}


# --- Eckart-type potential ---------------------------------------------------


def eckart_condition(p: EckartParams) -> bool:
    """Bare existence condition B > A^2, A >= 0, B >= 0."""
    return bool(p.B > p.A**2 and p.A >= 0.0 and p.B >= 0.0)


def eckart_level(p: EckartParams, n_r: int) -> tuple[float, bool]:
    """Level ``n_r`` of the hyperbolic potential and whether it is a bound state.

    epsilon = -(A + nu n_r/2)^2 - B^2/(A + nu n_r/2)^2. The state is normalizable
    only while B > (A + nu n_r/2)^2, so ``exists`` combines that per-level
    guard with :func:`eckart_condition`.
    """
    if n_r < 0:
        raise InvalidParameter(f"n_r must be >= 0, got {n_r}")
    s = p.A + 0.5 * p.nu * n_r
    if s == 0.0:
        return -math.inf, False
    eps = -(s**2) - p.B**2 / s**2
    return eps, bool(eckart_condition(p) and p.B > s**2)


# --- mapping of the radial equation onto the Eckart form ----------------------


def effective_params(
    E: float, state: QuantumState, consts: PhysicalConstants, deform: DeformationParams
) -> EffectiveParams:
    """The starred quantities l*(l*+1), e*^2 and E* entering the Coulomb-like radial equation."""
    hbar, m, c, e2 = consts.hbar, consts.m, consts.c, consts.e2
    nu, a, k, lam = deform.nu, deform.a, state.k, state.lam
    mc2 = m * c**2
    lstar_product = k * k + (m * c * a / hbar) ** 2 - lam - (e2 / (hbar * c)) ** 2
    e_star_sq = E / mc2 * e2 - hbar**2 * k * k * nu / m + hbar**2 * nu / (2 * m) * lam - mc2 * a
    E_star = (E * E - mc2**2) / (2 * mc2) - hbar**2 * k * k * nu**2 / (2 * m)
    return EffectiveParams(lstar_product, e_star_sq, E_star)


def eckart_mapping(
    state: QuantumState, consts: PhysicalConstants, deform: DeformationParams, E: float
) -> tuple[EckartParams, float]:
    """Eckart parameters and the target eigenvalue implied by trial energy ``E``.

    Returns ``(EckartParams(A, B, nu), epsilon_target)``. ``E`` is a physical
    eigenvalue exactly when the Eckart operator has ``epsilon_target`` in its
    spectrum.
    """
    nu = deform.nu
    if nu <= 0.0:
        raise DeformationRequired("the hyperbolic mapping needs nu > 0; use energy_nu_zero")
    hbar, m = consts.hbar, consts.m
    eff = effective_params(E, state, consts, deform)
    L = eff.lstar_product
    A = 0.5 * nu * (state.l_star + 1.0)
    B = m * eff.e_star_sq * nu / (2 * hbar**2) + nu**2 * L / 4.0
    eps = 2 * m / hbar**2 * (eff.E_star - hbar**2 * nu**2 * L / (4 * m) - eff.e_star_sq * nu / 2)
    return EckartParams(A=A, B=B, nu=nu), eps


def level_exists(
    state: QuantumState, consts: PhysicalConstants, deform: DeformationParams, E: float
) -> tuple[bool, bool]:
    """(per-level guard, bare condition) for the mapped potential at energy ``E``.

    Without deformation the radial problem is Coulombic and every n_r is
    bound as soon as e*^2 > 0.
    """
    if deform.nu == 0.0:
        ok = effective_params(E, state, consts, deform).e_star_sq > 0.0
        return bool(ok), bool(ok)
    p, _ = eckart_mapping(state, consts, deform, E)
    return eckart_level(p, state.n_r)[1], eckart_condition(p)


# --- quadratic energy relation -----------------------------------------------


def _abar_sq(consts: PhysicalConstants, deform: DeformationParams) -> float:
    return derive_couplings(consts, deform).alpha_bar_sq


def energy_quadratic_coefficients(
    state: QuantumState, consts: PhysicalConstants, deform: DeformationParams
) -> tuple[float, float, float]:
    """Coefficients (p2, p1, p0) of p2 E^2 + p1 E + p0 = 0, i.e. LHS - RHS of the energy relation."""
    hbar, m, c, e2 = consts.hbar, consts.m, consts.c, consts.e2
    nu, a, k, n = deform.nu, deform.a, state.k, state.n
    mc2 = m * c**2
    ab2 = _abar_sq(consts, deform)
    w = m / (hbar**2 * n * n)
    beta = e2 / mc2
    gamma = mc2 * a + hbar**2 * nu / (2 * m) * (k * k + ab2)
    p2 = 1.0 / mc2 + w * beta**2
    p1 = -nu * e2 / mc2 - 2 * w * beta * gamma
    p0 = (
        -mc2
        - hbar**2 * nu**2 / (2 * m) * (k * k - ab2)
        + hbar**2 * nu**2 / (4 * m) * n * n
        + nu * a * mc2
        + w * gamma**2
    )
    return p2, p1, p0


def quadratic_residual(
    E: float, state: QuantumState, consts: PhysicalConstants, deform: DeformationParams
) -> float:
    """LHS - RHS of the quadratic energy relation, term by term, in units of mc^2."""
    hbar, m, c, e2 = consts.hbar, consts.m, consts.c, consts.e2
    nu, a, k, n = deform.nu, deform.a, state.k, state.n
    mc2 = m * c**2
    ab2 = _abar_sq(consts, deform)
    lhs = (E * E - mc2**2) / mc2
    bracket = e2 * E / mc2 - mc2 * a - hbar**2 * nu / (2 * m) * (k * k + ab2)
    rhs = (
        hbar**2 * nu**2 / (2 * m) * (k * k - ab2)
        - hbar**2 * nu**2 / (4 * m) * n * n
        + nu * e2 * E / mc2
        - nu * a * mc2
        - m / (hbar**2 * n * n) * bracket**2
    )
    return (lhs - rhs) / mc2


def energy_quadratic_roots(
    state: QuantumState, consts: PhysicalConstants, deform: DeformationParams
) -> tuple[float, float]:
    p2, p1, p0 = energy_quadratic_coefficients(state, consts, deform)
    disc = p1 * p1 - 4.0 * p2 * p0
    if disc < 0.0:
        raise ComplexRoots(f"quadratic discriminant {disc:.6g} < 0: no real level")
    q = -0.5 * (p1 + math.copysign(math.sqrt(disc), p1))
    r1 = q / p2
    r2 = p0 / q if q != 0.0 else -r1
    return (r1, r2) if r1 <= r2 else (r2, r1)


# --- closed-form levels ------------------------------------------------------


def energy_closed_form(
    state: QuantumState,
    consts: PhysicalConstants,
    deform: DeformationParams,
    form: Form = "corrected",
) -> float:
    hbar, m, c, e2 = consts.hbar, consts.m, consts.c, consts.e2
    nu, a, k, n = deform.nu, deform.a, state.k, state.n
    mc2 = m * c**2
    al2 = (e2 / (hbar * c)) ** 2
    ab2 = _abar_sq(consts, deform)
    n2 = n * n
    K = (k * k + ab2) / n2
    g = (nu * e2 / (2 * mc2)) ** 2

    linear = nu * e2 * (n2 + k * k + ab2) / (2 * (n2 + al2)) + (m * c / hbar) ** 2 * e2 * a / (n2 + al2)
    if form == "corrected":
        mixed = (1 + K) * (g * (1 + K) - a * nu)
    elif form == "printed":
        mixed = g * (1 + K) * (1 + a * nu + K)
    else:
        raise InvalidParameter(f"unknown form {form!r}")
    inner = (
        1
        + ab2 / n2
        + mixed
        + (hbar * nu / (2 * m * c)) ** 2 * (1 + al2 / n2) * (2 * (k * k - ab2) - n2 - (k * k + ab2) ** 2 / n2)
    )
    if inner < 0.0:
        raise ComplexRoots(f"closed form ({form}) has a negative radicand {inner:.6g}")
    return linear + mc2 / (1 + al2 / n2) * math.sqrt(inner)


def energy_exact(
    state: QuantumState,
    consts: PhysicalConstants,
    deform: DeformationParams,
    *,
    strict: bool = False,
) -> SpectrumRecord:
    """Closed-form level with quadratic residuals and bound-state flags.

    Levels violating the bound-state condition are returned with
    ``bound_ok=False``; pass ``strict=True`` to raise :class:`NoBoundState`
    instead.
    """
    E = energy_closed_form(state, consts, deform, "corrected")
    try:
        E_printed = energy_closed_form(state, consts, deform, "printed")
    except ComplexRoots:
        E_printed = math.nan
    res = abs(quadratic_residual(E, state, consts, deform))
    printed_res = abs(quadratic_residual(E_printed, state, consts, deform))
    try:
        lo, hi = energy_quadratic_roots(state, consts, deform)
        root = "high" if abs(E - hi) <= abs(E - lo) else "low"
    except ComplexRoots:
        root = "none"
    bound_ok = bound_state_condition(E, consts, deform, state.k)
    exists, literal = level_exists(state, consts, deform, E)
    if strict and not bound_ok:
        raise NoBoundState(f"bound-state condition fails for k={state.k}, n_r={state.n_r}, E={E}")
    status = "ok" if bound_ok and exists else ("unbound" if not bound_ok else "no-level")
    return SpectrumRecord(
        k=state.k, n_r=state.n_r, branch=state.branch.label, lam=state.lam,
        l_star=state.l_star, n=state.n, E_closed=E, E_printed=E_printed,
        quadratic_residual=res, printed_residual=printed_res, root=root,
        bound_ok=bound_ok, level_exists=exists, literal_exists=literal, status=status,
    )


def energy_nu_zero(
    consts: PhysicalConstants, a: float, k: int, branch: Branch | int | str, n_r: int
) -> float:
    """Undeformed levels of a Dirac particle with mass m(1 + a/r)."""
    hbar, m, c, e2 = consts.hbar, consts.m, consts.c, consts.e2
    mc2 = m * c**2
    if a >= e2 / mc2 and not (a == 0.0 and e2 == 0.0):
        raise MassParameterTooLarge(f"a = {a} must be below e^2/mc^2 = {e2 / mc2}")
    deform = DeformationParams.build(consts, 0.0, a=a)
    coup = derive_couplings(consts, deform)
    state = make_state(coup, k, n_r, branch)
    n2 = state.n**2
    return mc2 / (1 + coup.alpha**2 / n2) * (
        m * e2 * a / (hbar**2 * n2) + math.sqrt(1 + coup.alpha_bar_sq / n2)
    )


# --- nonrelativistic limit and its comparisons --------------------------------


def energy_nonrelativistic(
    m: float, hbar: float, e2: float, nu: float, abar: float, k: int, n: float
) -> tuple[float, bool]:
    """Leading c -> infinity level E - mc^2 with a = abar e^2/mc^2, and the spectrum bound flag."""
    if not n > 0:
        raise InvalidParameter(f"n must be > 0, got {n}")
    t = hbar**2 * nu / (2 * m) * k * k
    E = (
        -m / (2 * hbar**2 * n * n) * (e2 - t) ** 2
        - hbar**2 * nu**2 / (8 * m) * n * n
        + nu / 2 * (e2 + t)
        + m * e2**2 / (2 * hbar**2 * n * n) * abar * (2 - abar)
    )
    bounded = e2 > hbar**2 * nu / m * k * k + e2 * abar
    return E, bool(bounded)


def energy_qt(m: float, hbar: float, e2: float, nu: float, l: int, n: float) -> float:
    """Schrodinger-Coulomb level in the deformed algebra without the spin-orbit term."""
    _check_l_n(l, n)
    t = hbar**2 * nu / (2 * m) * (l * (l + 1) + 1)
    return (
        -m / (2 * hbar**2 * n * n) * (e2 - t) ** 2
        - hbar**2 * nu**2 / (8 * m) * n * n
        + nu / 2 * (e2 + t)
    )


def qt_bound_condition(m: float, hbar: float, e2: float, nu: float, l: int) -> bool:
    return bool(e2 > hbar**2 * nu / (2 * m) * ((l + 1) * (2 * l + 1) + 1))


def _check_l_n(l: int, n: float) -> None:
    if int(l) != l or l < 0:
        raise InvalidParameter(f"l must be an integer >= 0, got {l}")
    if n < l + 1:
        raise InvalidParameter(f"n must be >= l + 1, got n={n}, l={l}")


def spin_orbit_shift(m: float, hbar: float, nu: float, k: int, l: int) -> tuple[float, float]:
    """Coefficients of the spin-orbit deformation term with S.L at its eigenvalue.

    Returns ``(const_coeff, coulomb_like_coeff)``; the second multiplies 1/r.
    """
    so = hbar**2 * (k * k - l * (l + 1) - 1) / 2.0
    return nu**2 / m * so, nu / m * so


def qt_reconciliation(m: float, hbar: float, e2: float, nu: float, l: int, n: float) -> float:
    """Remove the spin-orbit deformation term from the Dirac-derived limit.

    Uses k^2 = (l+1)^2. The constant part of the term is subtracted and the
    1/r part is absorbed into the Coulomb coupling.
    """
    _check_l_n(l, n)
    k = l + 1
    const, coulomb = spin_orbit_shift(m, hbar, nu, k, l)
    E, _ = energy_nonrelativistic(m, hbar, e2 + coulomb, nu, 0.0, k, n)
    return E - const


def relativistic_correction(
    consts: PhysicalConstants, nu: float, abar: float, k: int, n: float
) -> CorrectionBreakdown:
    """First-order 1/c^2 correction split into its nu-free, pure-deformation and cross parts."""
    hbar, m, c, e2 = consts.hbar, consts.m, consts.c, consts.e2
    if k == 0 or not n > 0:
        raise InvalidParameter("need k != 0 and n > 0")
    al2 = (e2 / (hbar * c)) ** 2
    ak = abs(k)
    k2 = k * k
    n2 = n * n
    n4 = n2 * n2
    d1 = (
        -m * e2**2 * al2 / (2 * hbar**2 * n4)
        * (1 - abar) ** 3
        * (n / ak * (1 + abar) - 0.75 * (1 + abar / 3))
    )
    d2 = -((hbar * nu / (8 * m * c)) ** 2) * hbar**2 * nu**2 * (n2 - k2) ** 4 / (2 * m * n4)
    d3 = nu * e2 * al2 / (2 * n4) * ((1 - abar**2) * n * ak - k2 - n2 * abar**2) + (
        hbar**2 * nu**2 * al2 / (8 * m * n4)
        * ((n2 + k2) ** 2 + (1 - abar**2) * (2 * k2 * k2 - 1.5 * (n2 + k2) ** 2 + n / ak * (n4 - k2 * k2)))
    )
    return CorrectionBreakdown(d1, d2, d3)


def sommerfeld(consts: PhysicalConstants, k: int, n: float) -> float:
    """Textbook fine-structure correction -(m e^4 alpha^2 / 2 hbar^2 n^4)(n/|k| - 3/4)."""
    al2 = consts.alpha**2
    return -consts.m * consts.e2**2 * al2 / (2 * consts.hbar**2 * n**4) * (n / abs(k) - 0.75)


def mass_potential_u1(
    consts: PhysicalConstants, deform: DeformationParams
) -> Callable[[float | np.ndarray], float | np.ndarray]:
    """Potential mc^2 (f1^2 - 1)/2 generated by the position-dependent mass."""
    mc2 = consts.rest_energy
    a = deform.a

    def u1(r):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr <= 0.0):
            raise DomainError("U1 is defined for r > 0 only")
        # (f1^2 - 1)/2 factored as (a/r)(1 + a/2r) to avoid cancellation at large r
        ar = a / r_arr
        out = mc2 * ar * (1.0 + 0.5 * ar)
        return float(out) if out.ndim == 0 else out

    return u1
