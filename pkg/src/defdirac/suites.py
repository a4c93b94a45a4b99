"""Verification suites and limit studies driven by the ``verify`` and ``limits`` commands.

Every check returns a :class:`Check` with the measured value, its bound and a
pass flag; solver exceptions become failed checks rather than crashes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import algebra_checks as alg
from .closed_form import (
    EckartParams,
    eckart_level,
    energy_closed_form,
    energy_exact,
    energy_nonrelativistic,
    energy_nu_zero,
    energy_qt,
    qt_reconciliation,
    quadratic_residual,
    relativistic_correction,
    sommerfeld,
)
from .errors import DefDiracError
from .params import (
    Branch,
    DeformationParams,
    PhysicalConstants,
    derive_couplings,
    lambda_eigenvalue,
    state_for,
)
from .radial_numeric import (
    SolverOptions,
    build_grid,
    eckart_potential,
    fd_eigenvalues,
    refinement_slope,
    self_consistent_energy,
    shooting_eigen,
)

SUITES = ("all", "eckart", "susy", "limits", "algebra", "corrections")

# sweep used for the numerical cross-validation and the degeneracy check
SWEEP_E2 = (0.1, 0.5)
SWEEP_NU = (0.005, 0.02)
SWEEP_A = (0.0, 0.02)
SWEEP_K = (1, 2)
SWEEP_NR = (0, 1, 2)


@dataclass
class Check:
    name: str
    value: float
    bound: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.name}: value={self.value:.6g} bound={self.bound:.6g} {self.detail}".rstrip()


def _guard(name: str, fn: Callable[[], list[Check]]) -> list[Check]:
    try:
        return fn()
    except DefDiracError as exc:
        return [Check(name, math.nan, math.nan, False, f"error: {exc}")]


# --- studies shared with the limits command -----------------------------------


def nu_zero_study(
    consts: PhysicalConstants,
    a: float,
    k: int,
    branch: Branch | str | int,
    n_r: int,
    nus: Iterable[float] = (1e-4, 1e-5, 1e-6),
) -> dict:
    """Approach of the deformed level to the undeformed one as nu -> 0.

    Returns per-nu rows, the log-log slope of the disagreement and the
    Richardson extrapolation (linear in nu) of the two smallest nu values.
    """
    nus = sorted(nus, reverse=True)
    E0 = energy_nu_zero(consts, a, k, branch, n_r)
    rows = []
    for nu in nus:
        deform = DeformationParams.build(consts, nu, a=a)
        E = energy_exact(state_for(consts, deform, k, n_r, branch), consts, deform).E_closed
        rows.append({"nu": nu, "E_exact": E, "E_nu0": E0, "residual": abs(E - E0)})
    slope = refinement_slope([r["nu"] for r in rows], [r["residual"] for r in rows])
    (n1, e1), (n2, e2) = [(r["nu"], r["E_exact"]) for r in rows[-2:]]
    extrapolated = (n1 * e2 - n2 * e1) / (n1 - n2)
    return {"rows": rows, "slope": slope, "extrapolated": extrapolated,
            "extrapolation_error": abs(extrapolated - E0), "E_nu0": E0}


def nonrel_study(
    e2: float,
    nu: float,
    abar: float,
    k: int,
    branch: Branch | str | int,
    n_r: int,
    cs: Iterable[float] = (10.0, 20.0, 40.0, 80.0),
    form: str = "corrected",
    hbar: float = 1.0,
    m: float = 1.0,
) -> dict:
    """c-scaling of the exact level against the leading and first-corrected limits.

    The mass parameter follows a = abar e^2/mc^2 at every c. ``n`` in the
    limit formulas is the c -> infinity principal number n_r + |k| (plus
    branch) or n_r + |k| + 1 (minus branch).
    """
    branch = Branch.parse(branch)
    n0 = n_r + abs(k) + (0 if branch is Branch.PLUS else 1)
    rows = []
    for c in cs:
        consts = PhysicalConstants(hbar=hbar, m=m, c=c, e2=e2)
        deform = DeformationParams.build(consts, nu, abar=abar)
        state = state_for(consts, deform, k, n_r, branch)
        E = energy_closed_form(state, consts, deform, form) - m * c**2
        E0, _ = energy_nonrelativistic(m, hbar, e2, nu, abar, k, n0)
        E1 = relativistic_correction(consts, nu, abar, k, n0).total
        rows.append({"c": c, "E_minus_mc2": E, "E_nonrel": E0, "E1": E1,
                     "residual": abs(E - E0), "residual_corrected": abs(E - E0 - E1)})
    inv_c = [1.0 / r["c"] for r in rows]
    # slopes against c (not 1/c): expected -2 and -4
    slope0 = -refinement_slope(inv_c, [r["residual"] for r in rows])
    slope1 = -refinement_slope(inv_c, [max(r["residual_corrected"], 1e-300) for r in rows])
    return {"rows": rows, "slope": slope0, "slope_corrected": slope1, "n0": n0}


def sommerfeld_coefficient(
    e2: float, k: int, branch: Branch | str | int, n_r: int,
    cs: Iterable[float] = (10.0, 20.0, 40.0, 80.0),
) -> dict:
    """First 1/c^2 coefficient extracted from exact levels at abar = nu = 0.

    (E - mc^2 - E_nonrel) c^2 tends to the coefficient of 1/c^2; one Richardson
    step removes the next 1/c^2 term.
    """
    study = nonrel_study(e2, 0.0, 0.0, k, branch, n_r, cs)
    rows = study["rows"]
    scaled = [(r["E_minus_mc2"] - r["E_nonrel"]) * r["c"] ** 2 for r in rows]
    c1, c2 = rows[-2]["c"], rows[-1]["c"]
    extrapolated = (c2**2 * scaled[-1] - c1**2 * scaled[-2]) / (c2**2 - c1**2)
    consts = PhysicalConstants(c=1.0, e2=e2)
    predicted = relativistic_correction(consts, 0.0, 0.0, k, study["n0"]).delta1
    return {"scaled": scaled, "extracted": extrapolated, "predicted": predicted,
            "relative_error": abs(extrapolated - predicted) / abs(predicted)}


def sweep_points(bound_only: bool = True):
    """(consts, deform, k, n_r, branch, record) for the documented sweep."""
    for e2, nu, a, k, n_r, br in itertools.product(
        SWEEP_E2, SWEEP_NU, SWEEP_A, SWEEP_K, SWEEP_NR, (Branch.PLUS, Branch.MINUS)
    ):
        consts = PhysicalConstants(e2=e2)
        deform = DeformationParams.build(consts, nu, a=a)
        rec = energy_exact(state_for(consts, deform, k, n_r, br), consts, deform)
        if bound_only and not (rec.bound_ok and rec.level_exists):
            continue
        yield consts, deform, k, n_r, br, rec


# --- suites ------------------------------------------------------------------


def suite_eckart() -> list[Check]:
    p = EckartParams(A=1.0, B=3.0, nu=2.0)
    eps0, _ = eckart_level(p, 0)
    scale = eps0 + 2 * p.B
    sizes = (2001, 4001, 8001)
    grids = [build_grid(scale, p.nu, n) for n in sizes]
    vals = [fd_eigenvalues(eckart_potential(p, g), 2) for g in grids]
    errs = [v[0] - eps0 for v in vals]
    slope = refinement_slope([g.h for g in grids], errs)
    richardson = (4 * vals[2][0] - vals[1][0]) / 3
    shoot = shooting_eigen(eckart_potential(p, grids[2]), 0)
    eps1, exists1 = eckart_level(p, 1)
    rel_fd = abs(shoot - vals[2][0]) / abs(vals[2][0])
    rel_rich = abs(shoot - richardson) / abs(richardson)
    errs1 = [v[1] - eckart_level(p, 1)[0] for v in vals]
    slope1 = refinement_slope([g.h for g in grids], errs1)
    checks = [
        Check("eckart n_r=0 FD error (8001 pts)", abs(errs[-1]), 1e-4, abs(errs[-1]) < 1e-4),
        Check("eckart n_r=0 FD convergence slope", slope, 0.1, abs(slope - 2.0) <= 0.1),
        Check("eckart n_r=0 shooting vs FD at 8001 pts (rel)", rel_fd, 1e-6, rel_fd <= 1e-6,
              "(FD truncation error dominates)"),
        Check("eckart n_r=0 shooting vs extrapolated FD (rel)", rel_rich, 1e-6, rel_rich <= 1e-6),
        Check("eckart second FD eigenvalue convergence slope to -6.25", slope1, 0.1, abs(slope1 - 2.0) <= 0.1,
              "(the formal n_r=1 level does not exist)"),
        Check("eckart n_r=1 flagged non-existent", float(exists1), 0.0, not exists1,
              f"(formal value {eps1:g}; B={p.B} <= (A+nu/2)^2={(p.A + p.nu / 2) ** 2})"),
        Check("eckart second FD eigenvalue above continuum -2B", vals[2][1], -2 * p.B,
              vals[2][1] > -2 * p.B),
    ]
    q = EckartParams(A=1.0, B=6.0, nu=2.0)
    qv = [fd_eigenvalues(eckart_potential(q, build_grid(eckart_level(q, 1)[0] + 2 * q.B, q.nu, n)), 2)
          for n in sizes]
    exact = [eckart_level(q, i)[0] for i in range(2)]
    for i in range(2):
        e = [v[i] - exact[i] for v in qv]
        hs = [build_grid(exact[1] + 2 * q.B, q.nu, n).h for n in sizes]
        s = refinement_slope(hs, e)
        checks.append(Check(f"eckart(B=6) n_r={i} FD convergence slope", s, 0.1, abs(s - 2.0) <= 0.1))
    return checks


def suite_susy(numeric: bool = True, opts: SolverOptions | None = None) -> list[Check]:
    closed, num = 0.0, 0.0
    count = 0
    for consts, deform, k, n_r, br, rec in sweep_points():
        if br is not Branch.MINUS:
            continue
        partner = energy_exact(state_for(consts, deform, k, n_r + 1, Branch.PLUS), consts, deform)
        closed = max(closed, abs(rec.E_closed - partner.E_closed) / consts.rest_energy)
        if numeric:
            Em, _ = self_consistent_energy(state_for(consts, deform, k, n_r, br), consts, deform, opts)
            Ep, _ = self_consistent_energy(state_for(consts, deform, k, n_r + 1, Branch.PLUS),
                                           consts, deform, opts)
            num = max(num, abs(Em - Ep) / consts.rest_energy)
        count += 1
    checks = [Check(f"susy closed-form degeneracy ({count} pairs)", closed, 1e-12, closed <= 1e-12)]
    if numeric:
        checks.append(Check(f"susy numerical degeneracy ({count} pairs)", num, 1e-6, num <= 1e-6))
    return checks


def suite_crossval(opts: SolverOptions | None = None) -> list[Check]:
    worst, count = 0.0, 0
    for consts, deform, k, n_r, br, rec in sweep_points():
        E, _ = self_consistent_energy(state_for(consts, deform, k, n_r, br), consts, deform, opts)
        worst = max(worst, abs(E - rec.E_closed) / abs(rec.E_closed))
        count += 1
    return [Check(f"self-consistent vs closed form ({count} levels, rel)", worst, 1e-6, worst <= 1e-6)]


def suite_limits() -> list[Check]:
    consts = PhysicalConstants(e2=0.5)
    checks = []
    st = nu_zero_study(consts, 0.1, 1, Branch.PLUS, 0)
    checks.append(Check("nu->0 residual slope", st["slope"], 0.1, abs(st["slope"] - 1.0) <= 0.1))
    checks.append(Check("nu->0 extrapolated disagreement", st["extrapolation_error"], 1e-8,
                        st["extrapolation_error"] <= 1e-8))
    dc = energy_nu_zero(consts, 0.0, 1, Branch.PLUS, 0)
    exact = math.sqrt(1 - consts.alpha**2)
    deform = DeformationParams.build(consts, 0.0, a=0.0)
    E = energy_exact(state_for(consts, deform, 1, 0, Branch.PLUS), consts, deform).E_closed
    err = max(abs(dc - exact), abs(E - exact))
    checks.append(Check("a=0 Dirac-Coulomb ground level", err, 1e-12, err <= 1e-12))
    for label, nu, abar in (("abar=0", 0.05, 0.0), ("nu=0", 0.0, 0.3), ("generic", 0.05, 0.3)):
        s = nonrel_study(1.0, nu, abar, 1, Branch.PLUS, 0)
        checks.append(Check(f"nonrel slope ({label}, nu={nu}, abar={abar})", s["slope"], 0.3,
                            abs(s["slope"] + 2.0) <= 0.3))
        checks.append(Check(f"nonrel corrected slope ({label})", s["slope_corrected"], -3.5,
                            s["slope_corrected"] <= -3.5))
    return checks


def suite_corrections() -> list[Check]:
    checks = []
    consts = PhysicalConstants(e2=0.1)
    worst = 0.0
    for k, n in itertools.product((1, 2, 3, -1, -2), (1, 2, 3, 4)):
        if n < abs(k):
            continue
        d = relativistic_correction(consts, 0.0, 0.0, k, n)
        worst = max(worst, abs(d.total - sommerfeld(consts, k, n)) / abs(sommerfeld(consts, k, n)))
    checks.append(Check("Sommerfeld identity at abar=nu=0", worst, 1e-14, worst <= 1e-14))
    sc = sommerfeld_coefficient(1.0, 1, Branch.PLUS, 0)
    checks.append(Check("1/c^2 coefficient extracted vs delta1 (rel)", sc["relative_error"], 0.01,
                        sc["relative_error"] <= 0.01))
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for _ in range(1000):
        l = int(rng.integers(0, 5))
        n = int(rng.integers(l + 1, 7))
        nu = float(rng.uniform(0, 0.1))
        qt = energy_qt(1.0, 1.0, 1.0, nu, l, n)
        worst = max(worst, abs(qt_reconciliation(1.0, 1.0, 1.0, nu, l, n) - qt) / abs(qt))
    checks.append(Check("QT reconciliation (1000 draws, rel)", worst, 1e-12, worst <= 1e-12))
    return checks


def suite_algebra() -> list[Check]:
    checks = []
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        e2 = rng.uniform(0, 0.9)
        a = rng.uniform(-0.5, 0.5)
        k = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        consts = PhysicalConstants(e2=e2)
        deform = DeformationParams.build(consts, 0.0, a=a)
        coup = derive_couplings(consts, deform)
        if k * k <= coup.alpha_bar_sq:
            continue
        _, (lp, lm) = alg.lambda_matrix_numeric(consts, -e2, a, k)
        ref = lambda_eigenvalue(coup, k, Branch.PLUS)
        worst = max(worst, abs(lp - ref) / abs(ref), abs(lm + ref) / abs(ref))
    checks.append(Check("Lambda eigenvalues vs closed form (rel)", worst, 1e-12, worst <= 1e-12))
    exact0 = alg.deformed_commutator_residual(0.0, alg.uniform_grid(10.0, 201))
    checks.append(Check("commutator residual nu=0", exact0, 1e-12, exact0 <= 1e-12))
    sizes = (101, 201, 401, 801)
    hs = [10.0 / (n - 1) for n in sizes]
    res = [alg.deformed_commutator_residual(0.5, alg.uniform_grid(10.0, n)) for n in sizes]
    s = refinement_slope(hs, res)
    checks.append(Check("commutator residual slope (nu=0.5)", s, 0.1, abs(s - 2.0) <= 0.1))
    consts = PhysicalConstants(e2=0.5)
    deform = DeformationParams.build(consts, 0.01, a=0.1)
    rs = [alg.separability_residual(consts, deform, np.linspace(0.5, 5.0, n)) for n in sizes]
    hs = [4.5 / (n - 1) for n in sizes]
    for i, label in enumerate(("U", "f1")):
        s = refinement_slope(hs, [r[i] for r in rs])
        checks.append(Check(f"separability residual slope ({label})", s, 0.1, abs(s - 2.0) <= 0.1))
    return checks


def quadratic_consistency(draws: int = 500, seed: int = 12345) -> dict:
    """Relative residual of both closed forms in the quadratic relation over random draws."""
    rng = np.random.default_rng(seed)
    worst = {"corrected": 0.0, "printed": 0.0, "printed_a_nu_zero": 0.0}
    done = 0
    while done < draws:
        e2 = float(rng.uniform(0.01, 0.9))
        consts = PhysicalConstants(e2=e2)
        nu = float(rng.choice([0.0, rng.uniform(0, 0.05)]))
        a = float(rng.choice([0.0, rng.uniform(0, 0.5 * e2)]))
        k = int(rng.choice([-3, -2, -1, 1, 2, 3]))
        n_r = int(rng.integers(0, 4))
        br = Branch.PLUS if rng.random() < 0.5 else Branch.MINUS
        deform = DeformationParams.build(consts, nu, a=a)
        try:
            state = state_for(consts, deform, k, n_r, br)
            Ec = energy_closed_form(state, consts, deform, "corrected")
            Ep = energy_closed_form(state, consts, deform, "printed")
        except DefDiracError:
            continue
        rc = abs(quadratic_residual(Ec, state, consts, deform))
        rp = abs(quadratic_residual(Ep, state, consts, deform))
        worst["corrected"] = max(worst["corrected"], rc)
        worst["printed"] = max(worst["printed"], rp)
        if a * nu == 0.0:
            worst["printed_a_nu_zero"] = max(worst["printed_a_nu_zero"], rp)
        done += 1
    return worst


def suite_quadratic() -> list[Check]:
    w = quadratic_consistency()
    return [
        Check("quadratic residual, corrected closed form", w["corrected"], 1e-10, w["corrected"] <= 1e-10),
        Check("quadratic residual, printed closed form with a*nu=0", w["printed_a_nu_zero"], 1e-10,
              w["printed_a_nu_zero"] <= 1e-10),
        Check("quadratic residual, printed closed form (all draws)", w["printed"], 1e-10,
              w["printed"] <= 1e-10, "(printed form misplaces the a*nu term when a*nu != 0)"),
    ]


def run_suite(name: str, opts: SolverOptions | None = None) -> list[Check]:
    if name not in SUITES:
        raise KeyError(name)
    table: dict[str, Callable[[], list[Check]]] = {
        "eckart": lambda: suite_eckart() + suite_crossval(opts),
        "susy": lambda: suite_susy(True, opts),
        "limits": lambda: suite_quadratic() + suite_limits(),
        "algebra": suite_algebra,
        "corrections": suite_corrections,
    }
    names = [n for n in SUITES[1:]] if name == "all" else [name]
    out: list[Check] = []
    for n in names:
        out.extend(_guard(n, table[n]))
    return out
