"""Physical constants, deformation parameters and derived quantum numbers.

Units are whatever the caller injects: every formula keeps hbar, m, c and
e^2 explicit. The defaults are natural units hbar = m = c = 1 with e^2 equal
to the fine-structure constant.

The deforming function is f(r) = 1 + nu*r and the mass function is
f1(r) = 1 + a/r. The mass parameter may be given directly as ``a`` or in
the dimensionless form ``abar`` with a = abar * e^2 / (m c^2).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InvalidParameter, NonPositivePrincipal, SupercriticalCoupling

FINE_STRUCTURE = 1.0 / 137.035999084


class Branch(enum.IntEnum):
    """Sign of the Lambda-operator eigenvalue."""

    PLUS = 1
    MINUS = -1

    @classmethod
    def parse(cls, value: "Branch | int | str") -> "Branch":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            key = value.strip().lower()
            table = {"plus": cls.PLUS, "+": cls.PLUS, "+1": cls.PLUS, "1": cls.PLUS,
                     "minus": cls.MINUS, "-": cls.MINUS, "-1": cls.MINUS}
            if key not in table:
                raise InvalidParameter(f"unknown branch {value!r}")
            return table[key]
        if value in (1, -1):
            return cls(int(value))
        raise InvalidParameter(f"unknown branch {value!r}")

    @property
    def label(self) -> str:
        return "plus" if self is Branch.PLUS else "minus"


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidParameter(f"{name} must be finite, got {value}")
    return value


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0
    m: float = 1.0
    c: float = 1.0
    e2: float = FINE_STRUCTURE

    def __post_init__(self) -> None:
        for name in ("hbar", "m", "c"):
            if _finite(name, getattr(self, name)) <= 0.0:
                raise InvalidParameter(f"{name} must be > 0, got {getattr(self, name)}")
        if _finite("e2", self.e2) < 0.0:
            raise InvalidParameter(f"e2 must be >= 0, got {self.e2}")

    @property
    def rest_energy(self) -> float:
        return self.m * self.c**2

    @property
    def alpha(self) -> float:
        return self.e2 / (self.hbar * self.c)

    def a_from_abar(self, abar: float) -> float:
        return abar * self.e2 / (self.m * self.c**2)

    def abar_from_a(self, a: float) -> float:
        """a mc^2/e^2; NaN when undefined (e2 = 0 with a != 0, or overflow)."""
        if a == 0.0:
            return 0.0
        if self.e2 == 0.0:
            return math.nan
        out = a * self.m * self.c**2 / self.e2
        return out if math.isfinite(out) else math.nan


@dataclass(frozen=True)
class DeformationParams:
    """Deformation strength ``nu`` and mass parameter ``a`` (with its ``abar`` twin).

    Build through :meth:`build` so that ``a`` and ``abar`` stay consistent for
    the constants in use. ``primary`` records which of the two was supplied;
    the derived twin is NaN when it is undefined (``abar`` at e2 = 0).
    """

    nu: float = 0.0
    a: float = 0.0
    abar: float = 0.0
    primary: str = "a"

    def __post_init__(self) -> None:
        if _finite("nu", self.nu) < 0.0:
            # x = ln(1 + nu r)/nu is not defined on the whole half line for nu < 0
            raise InvalidParameter(f"nu must be >= 0, got {self.nu}")
        if self.primary not in ("a", "abar"):
            raise InvalidParameter(f"primary must be 'a' or 'abar', got {self.primary!r}")
        _finite(self.primary, getattr(self, self.primary))
        _finite("a", self.a)

    @classmethod
    def build(
        cls,
        consts: PhysicalConstants,
        nu: float = 0.0,
        *,
        a: float | None = None,
        abar: float | None = None,
    ) -> "DeformationParams":
        if a is not None and abar is not None:
            raise InvalidParameter("give exactly one of a, abar")
        if abar is not None:
            return cls(nu=nu, a=consts.a_from_abar(abar), abar=float(abar), primary="abar")
        a = 0.0 if a is None else float(a)
        return cls(nu=nu, a=a, abar=consts.abar_from_a(a), primary="a")

    def replace_nu(self, nu: float) -> "DeformationParams":
        return DeformationParams(nu=nu, a=self.a, abar=self.abar, primary=self.primary)


@dataclass(frozen=True)
class Couplings:
    alpha: float
    alpha_bar_sq: float
    mca_over_hbar: float


@dataclass(frozen=True)
class QuantumState:
    """One (k, n_r, branch) level with its derived lambda, l* and principal number n."""

    k: int
    n_r: int
    branch: Branch
    lam: float
    l_star: float
    n: float

    @property
    def lstar_product(self) -> float:
        return self.l_star * (self.l_star + 1.0)


def derive_couplings(consts: PhysicalConstants, deform: DeformationParams) -> Couplings:
    alpha = consts.e2 / (consts.hbar * consts.c)
    mca = consts.m * consts.c * deform.a / consts.hbar
    return Couplings(alpha=alpha, alpha_bar_sq=alpha**2 - mca**2, mca_over_hbar=mca)


def _check_k(k: int) -> int:
    if int(k) != k or k == 0:
        raise InvalidParameter(f"k must be a nonzero integer, got {k}")
    return int(k)


def _root_k2_minus_alpha_bar_sq(coup: Couplings, k: int) -> float:
    k = _check_k(k)
    # k^2 + (mca/hbar)^2 - alpha^2 evaluated without forming alpha_bar_sq first
    disc = k * k + coup.mca_over_hbar**2 - coup.alpha**2
    if not disc > 0.0:
        raise SupercriticalCoupling(
            f"k^2 - alpha_bar^2 = {disc:.6g} <= 0 for k={k}: Lambda eigenvalue is imaginary"
        )
    return math.sqrt(disc)


def lambda_eigenvalue(coup: Couplings, k: int, branch: Branch | int | str) -> float:
    """Eigenvalue +-sqrt(k^2 - alpha_bar^2) of the spin-radial separation operator."""
    return int(Branch.parse(branch)) * _root_k2_minus_alpha_bar_sq(coup, k)


def effective_orbital(coup: Couplings, k: int, branch: Branch | int | str) -> float:
    """Effective orbital number l*, the root of l*(l*+1) = lambda(lambda-1).

    The plus branch gives sqrt(k^2 - alpha_bar^2) - 1, the minus branch one more.
    """
    s = _root_k2_minus_alpha_bar_sq(coup, k)
    return s - 1.0 if Branch.parse(branch) is Branch.PLUS else s


def principal_quantum_number(n_r: int, l_star: float) -> float:
    if int(n_r) != n_r or n_r < 0:
        raise InvalidParameter(f"n_r must be an integer >= 0, got {n_r}")
    n = n_r + l_star + 1.0
    if not n > 0.0:
        raise NonPositivePrincipal(f"n = n_r + l* + 1 = {n} is not positive")
    return n


def make_state(
    coup: Couplings, k: int, n_r: int, branch: Branch | int | str = Branch.PLUS
) -> QuantumState:
    branch = Branch.parse(branch)
    lam = lambda_eigenvalue(coup, k, branch)
    l_star = effective_orbital(coup, k, branch)
    n = principal_quantum_number(n_r, l_star)
    return QuantumState(k=int(k), n_r=int(n_r), branch=branch, lam=lam, l_star=l_star, n=n)


def state_for(
    consts: PhysicalConstants,
    deform: DeformationParams,
    k: int,
    n_r: int,
    branch: Branch | int | str = Branch.PLUS,
) -> QuantumState:
    return make_state(derive_couplings(consts, deform), k, n_r, branch)


def bound_state_condition(
    E: float, consts: PhysicalConstants, deform: DeformationParams, k: int
) -> bool:
    """(E/mc^2) e^2 > (hbar^2 nu/m) k^2 + m c^2 a."""
    mc2 = consts.rest_energy
    lhs = E / mc2 * consts.e2
    rhs = consts.hbar**2 * deform.nu / consts.m * k * k + mc2 * deform.a
    return bool(lhs > rhs)
