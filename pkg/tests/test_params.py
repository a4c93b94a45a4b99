import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defdirac.errors import (
    InvalidParameter,
    NonPositivePrincipal,
    SupercriticalCoupling,
)
from defdirac.params import (
    Branch,
    DeformationParams,
    PhysicalConstants,
    bound_state_condition,
    derive_couplings,
    effective_orbital,
    lambda_eigenvalue,
    make_state,
    principal_quantum_number,
)


def couplings(e2, a=0.0, nu=0.0):
    consts = PhysicalConstants(e2=e2)
    return derive_couplings(consts, DeformationParams.build(consts, nu, a=a))


def test_couplings_without_mass_term():
    coup = couplings(0.5)
    assert coup.alpha == 0.5
    assert coup.alpha_bar_sq == 0.25


def test_couplings_with_mass_term():
    assert couplings(0.5, a=0.1).alpha_bar_sq == pytest.approx(0.24, abs=1e-15)


def test_couplings_zero_charge():
    coup = couplings(0.0)
    assert coup.alpha == 0.0 and coup.alpha_bar_sq == 0.0


def test_lambda_undeformed():
    assert lambda_eigenvalue(couplings(0.0), 3, Branch.PLUS) == 3.0


def test_lambda_with_mass_term_both_branches():
    coup = couplings(0.5, a=0.1)
    assert lambda_eigenvalue(coup, 1, "plus") == pytest.approx(0.8717797887, abs=1e-10)
    assert lambda_eigenvalue(coup, 1, "minus") == pytest.approx(-0.8717797887, abs=1e-10)


def test_effective_orbital_values():
    coup = couplings(0.0)
    assert effective_orbital(coup, 2, "plus") == 1.0
    assert effective_orbital(coup, 2, "minus") == 2.0
    assert effective_orbital(couplings(0.5), 1, "plus") == pytest.approx(math.sqrt(0.75) - 1, abs=1e-15)


def test_principal_number():
    assert principal_quantum_number(2, 1.0) == 4.0
    assert principal_quantum_number(0, math.sqrt(0.75) - 1) == pytest.approx(math.sqrt(0.75), abs=1e-15)
    with pytest.raises(NonPositivePrincipal):
        principal_quantum_number(0, -1.5)
    with pytest.raises(InvalidParameter):
        principal_quantum_number(-1, 0.0)


def test_bound_state_condition_examples():
    consts = PhysicalConstants(e2=0.5)
    assert bound_state_condition(1.0, consts, DeformationParams.build(consts, 0.1), 2)
    assert not bound_state_condition(1.0, consts, DeformationParams.build(consts, 0.2), 2)
    assert bound_state_condition(0.3, consts, DeformationParams.build(consts, 0.0), 5)


def test_supercritical_coupling_raises():
    with pytest.raises(SupercriticalCoupling):
        lambda_eigenvalue(couplings(1.5), 1, "plus")


def test_large_mass_parameter_keeps_alpha_bar_negative_but_admissible():
    coup = couplings(0.1, a=0.5)
    assert coup.alpha_bar_sq < 0
    assert lambda_eigenvalue(coup, 1, "plus") > 1.0


@pytest.mark.parametrize("kwargs", [dict(hbar=0), dict(m=-1), dict(c=0), dict(e2=-0.1), dict(e2=math.nan)])
def test_constants_validation(kwargs):
    with pytest.raises(InvalidParameter):
        PhysicalConstants(**kwargs)


def test_negative_nu_rejected():
    with pytest.raises(InvalidParameter):
        DeformationParams.build(PhysicalConstants(), -0.1)


def test_a_abar_roundtrip():
    consts = PhysicalConstants(c=10.0, e2=1.0)
    d = DeformationParams.build(consts, 0.0, abar=0.3)
    assert d.a == pytest.approx(0.003, abs=1e-17) and d.primary == "abar"
    assert DeformationParams.build(consts, 0.0, a=d.a).abar == pytest.approx(0.3, rel=1e-15)
    with pytest.raises(InvalidParameter):
        DeformationParams.build(consts, 0.0, a=0.1, abar=0.1)


def test_zero_k_rejected():
    with pytest.raises(InvalidParameter):
        make_state(couplings(0.1), 0, 0)


def test_branch_parse():
    assert Branch.parse("+") is Branch.PLUS
    assert Branch.parse(-1) is Branch.MINUS
    assert Branch.MINUS.label == "minus"
    with pytest.raises(InvalidParameter):
        Branch.parse("up")


admissible = st.tuples(
    st.floats(0.0, 0.9), st.floats(-0.5, 0.5), st.sampled_from([-3, -2, -1, 1, 2, 3])
)


@settings(max_examples=1000, deadline=None)
@given(admissible)
def test_lambda_and_orbital_identities(draw):
    e2, a, k = draw
    coup = couplings(e2, a=a)
    if k * k <= coup.alpha_bar_sq:
        return
    lp = lambda_eigenvalue(coup, k, "plus")
    lm = lambda_eigenvalue(coup, k, "minus")
    assert lp == -lm
    assert lp**2 == pytest.approx(k * k - coup.alpha_bar_sq, rel=1e-14)
    for br, lam in (("plus", lp), ("minus", lm)):
        ls = effective_orbital(coup, k, br)
        assert ls * (ls + 1) - lam * (lam - 1) == pytest.approx(0.0, abs=1e-12 * max(1.0, abs(lam * lam)))
    assert effective_orbital(coup, k, "minus") - effective_orbital(coup, k, "plus") == pytest.approx(1.0, abs=1e-14)
