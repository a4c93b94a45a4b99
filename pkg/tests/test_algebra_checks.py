import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defdirac.algebra_checks import (
    central_difference,
    deformed_commutator_residual,
    deformed_momentum,
    lambda_from_operators,
    lambda_matrix,
    lambda_matrix_numeric,
    separability_residual,
    separability_residual_analytic,
    uniform_grid,
)
from defdirac.errors import InvalidGrid, InvalidParameter
from defdirac.params import (
    DeformationParams,
    PhysicalConstants,
    derive_couplings,
    lambda_eigenvalue,
)
from defdirac.radial_numeric import refinement_slope

UNIT = PhysicalConstants(e2=0.5)


def test_commutator_exact_without_deformation():
    for n in (51, 201, 801):
        assert deformed_commutator_residual(0.0, uniform_grid(10.0, n)) <= 1e-12


@pytest.mark.parametrize("nu", [0.01, 0.5])
def test_commutator_h_squared(nu):
    sizes = (101, 201, 401, 801)
    res = [deformed_commutator_residual(nu, uniform_grid(10.0, n)) for n in sizes]
    assert all(b <= a for a, b in zip(res, res[1:]))
    assert refinement_slope([10.0 / (n - 1) for n in sizes], res) == pytest.approx(2.0, abs=0.1)


def test_commutator_on_smooth_test_vector():
    # the discrete commutator averages neighbours, so a nonconstant psi sees hbar h^2 psi''/2
    res = []
    for n in (201, 401, 801):
        x = uniform_grid(5.0, n)
        psi = np.exp(-((x - 2.5) ** 2))
        r1 = deformed_commutator_residual(0.0, x, hbar=1.0, test_function=psi)
        assert deformed_commutator_residual(0.0, x, hbar=2.0, test_function=psi) == pytest.approx(2 * r1, rel=1e-12)
        assert r1 == pytest.approx((x[1] - x[0]) ** 2, rel=1e-2)  # max |psi''| / 2 = 1
        res.append(r1)
    assert refinement_slope([5.0 / 200, 5.0 / 400, 5.0 / 800], res) == pytest.approx(2.0, abs=0.05)


def test_unit_deformation_is_plain_momentum():
    x = uniform_grid(3.0, 31)
    assert np.array_equal(deformed_momentum(0.0, x).matrix, central_difference(x).matrix)


def test_commutator_rejects_negative_nu():
    with pytest.raises(InvalidParameter):
        deformed_commutator_residual(-0.1, uniform_grid(1.0, 11))
    with pytest.raises(InvalidGrid):
        uniform_grid(1.0, 2)


def test_lambda_matrix_examples():
    L, (lp, lm) = lambda_matrix_numeric(UNIT, 0.0, 0.0, 2)
    assert (lp, lm) == (2.0, -2.0)
    L, (lp, lm) = lambda_matrix_numeric(UNIT, -0.5, 0.1, 1)
    assert lp == pytest.approx(np.sqrt(0.76), rel=1e-15)
    assert lm == pytest.approx(-np.sqrt(0.76), rel=1e-15)
    assert L.trace == 0.0


def test_lambda_matrix_from_dirac_matrices():
    consts = PhysicalConstants(hbar=1.3, m=0.7, c=2.1, e2=0.4)
    built = lambda_from_operators(consts, -0.4, 0.05, -2)
    assert np.allclose(built.imag, 0.0)
    assert np.allclose(built.real, lambda_matrix(consts, -0.4, 0.05, -2).matrix, rtol=1e-15, atol=0)


def test_lambda_matrix_rejects_zero_k():
    with pytest.raises(InvalidParameter):
        lambda_matrix_numeric(UNIT, 0.0, 0.0, 0)


@settings(max_examples=1000, deadline=None)
@given(st.floats(0.0, 0.9), st.floats(-0.5, 0.5), st.sampled_from([-3, -2, -1, 1, 2, 3]))
def test_lambda_eigenvalues_match_closed_form(e2, a, k):
    consts = PhysicalConstants(e2=e2)
    coup = derive_couplings(consts, DeformationParams.build(consts, 0.0, a=a))
    if k * k <= coup.alpha_bar_sq:
        return
    L, (lp, lm) = lambda_matrix_numeric(consts, -e2, a, k)
    ref = lambda_eigenvalue(coup, k, "plus")
    assert lp == pytest.approx(ref, rel=1e-12)
    assert lm == pytest.approx(-ref, rel=1e-12)
    assert L.trace == 0.0


def test_separability_analytic_is_exact():
    deform = DeformationParams.build(UNIT, 0.3, a=0.1)
    assert max(separability_residual_analytic(UNIT, deform, np.linspace(0.2, 7, 100))) <= 1e-15


def test_separability_h_squared():
    deform = DeformationParams.build(UNIT, 0.01, a=0.1)
    sizes = (101, 201, 401, 801)
    res = [separability_residual(UNIT, deform, np.linspace(0.5, 5.0, n)) for n in sizes]
    hs = [4.5 / (n - 1) for n in sizes]
    for i in range(2):
        assert refinement_slope(hs, [r[i] for r in res]) == pytest.approx(2.0, abs=0.1)


def test_separability_zero_mass_parameter():
    deform = DeformationParams.build(UNIT, 0.2, a=0.0)
    assert separability_residual(UNIT, deform, np.linspace(0.5, 5.0, 51))[1] == 0.0


def test_separability_rejects_origin():
    with pytest.raises(InvalidGrid):
        separability_residual(UNIT, DeformationParams(), np.linspace(0.0, 1.0, 11))
