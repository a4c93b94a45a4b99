import math

import numpy as np
import pytest

from defdirac.closed_form import (
    EckartParams,
    eckart_level,
    eckart_mapping,
    energy_exact,
)
from defdirac.errors import DeformationRequired, InvalidGrid, InvalidParameter
from defdirac.params import Branch, DeformationParams, PhysicalConstants, state_for
from defdirac.radial_numeric import (
    RadialGrid,
    RegularizedEckart,
    SolverOptions,
    build_grid,
    coordinate_map,
    count_nodes,
    eckart_function,
    eckart_potential,
    export_wavefunction,
    fd_eigen,
    fd_eigenvalues,
    refinement_slope,
    sample_potential,
    self_consistent_energy,
    shooting_eigen,
)

ECKART = EckartParams(A=1.0, B=3.0, nu=2.0)


def test_coordinate_map():
    assert coordinate_map(2.5, 0.0) == 2.5
    assert coordinate_map(math.e - 1, 1.0) == pytest.approx(1.0, abs=1e-15)
    assert coordinate_map(0.0, 0.7) == 0.0
    r = np.geomspace(1e-6, 1e4, 100)
    for nu in (1e-9, 1e-3, 0.5):
        back = coordinate_map(coordinate_map(r, nu), nu, "x->r")
        assert np.max(np.abs(back - r) / r) < 1e-12
    with pytest.raises(InvalidParameter):
        coordinate_map(1.0, -0.1)


def test_build_grid():
    g = build_grid(-1.0, 0.0, 101)
    assert g.x_max >= 12 * math.log(10)
    with pytest.raises(InvalidGrid):
        build_grid(-1.0, 0.1, 2)
    g1 = build_grid(-1.0, 0.1, 101, x_max_policy=10.0)
    g2 = build_grid(-1.0, 0.1, 201, x_max_policy=10.0)
    assert g1.h == 2 * g2.h


def test_eckart_potential_examples():
    V = eckart_function(ECKART)
    assert V(1.0) == pytest.approx(-6.0 / math.tanh(1.0), abs=1e-14)
    assert V(1.0) == pytest.approx(-7.8782, abs=1e-4)
    free = eckart_function(EckartParams(A=0.25, B=0.7, nu=0.5))
    x = np.linspace(0.1, 10, 50)
    assert np.allclose(free(x), -1.4 / np.tanh(0.25 * x), rtol=1e-15)
    pot = eckart_potential(ECKART, RadialGrid(40.0, 2001))
    assert pot.values[-1] + 2 * ECKART.B <= 1e-10
    with pytest.raises(DeformationRequired):
        eckart_function(EckartParams(1.0, 1.0, 0.0))


def test_count_nodes():
    assert count_nodes([1, 2, 3]) == 0
    assert count_nodes([1, -1, 1]) == 2
    assert count_nodes([1, 0, -1]) == 1


def oscillator(n_points, x_max=8.0):
    return sample_potential(lambda x: np.asarray(x) ** 2, RadialGrid(x_max, n_points))


def test_fd_half_line_oscillator():
    vals = fd_eigenvalues(oscillator(4001), 3)
    assert np.allclose(vals, [3.0, 7.0, 11.0], atol=2e-5)


def test_fd_eigenvectors_node_count_and_norm():
    for i, (eps, wf) in enumerate(fd_eigen(oscillator(1001), 4)):
        assert count_nodes(wf.chi[1:-1]) == i
        assert wf.norm == pytest.approx(1.0, abs=1e-12)


def test_shooting_half_line_oscillator():
    pot = oscillator(4001)
    for n_r, exact in ((0, 3.0), (1, 7.0)):
        assert shooting_eigen(pot, n_r) == pytest.approx(exact, rel=1e-6)


def test_fd_eckart_converges():
    eps0, _ = eckart_level(ECKART, 0)
    grids = [build_grid(eps0 + 2 * ECKART.B, ECKART.nu, n) for n in (2001, 4001, 8001)]
    errs = [fd_eigenvalues(eckart_potential(ECKART, g), 1)[0] - eps0 for g in grids]
    assert abs(errs[-1]) < 1e-4
    assert refinement_slope([g.h for g in grids], errs) == pytest.approx(2.0, abs=0.1)


def test_shooting_eckart():
    eps0, _ = eckart_level(ECKART, 0)
    g = build_grid(eps0 + 2 * ECKART.B, ECKART.nu, 8001)
    assert shooting_eigen(eckart_potential(ECKART, g), 0) == pytest.approx(eps0, rel=1e-7)


def test_regularized_scheme_converges_for_small_exponent():
    p = EckartParams(A=0.2, B=0.5, nu=0.3)  # chi ~ x^(4/3) at the origin
    exact = np.array([eckart_level(p, i)[0] for i in range(2)])
    x_max = build_grid(exact[1] + 2 * p.B, p.nu, 3).x_max
    sizes = (2001, 4001, 8001)
    errs = [RegularizedEckart(RadialGrid(x_max, n), p.nu, p.A).eigenvalues(p.B, 2) - exact for n in sizes]
    hs = [x_max / (n - 1) for n in sizes]
    assert np.max(np.abs(errs[-1] / exact)) < 1e-5
    for i in range(2):
        assert refinement_slope(hs, [e[i] for e in errs]) == pytest.approx(2.0, abs=0.1)


def test_mapped_residual_vanishes_at_h_squared():
    consts = PhysicalConstants(e2=0.5)
    deform = DeformationParams.build(consts, 0.02, a=0.02)
    state = state_for(consts, deform, 2, 0, "plus")
    E = energy_exact(state, consts, deform).E_closed
    p, target = eckart_mapping(state, consts, deform, E)
    x_max = build_grid(target + 2 * p.B, p.nu, 3).x_max
    sizes = (1001, 2001, 4001)
    res = [fd_eigenvalues(eckart_potential(p, RadialGrid(x_max, n)), 1)[0] - target for n in sizes]
    assert refinement_slope([x_max / (n - 1) for n in sizes], res) == pytest.approx(2.0, abs=0.1)


def test_self_consistent_reproduces_closed_form():
    consts = PhysicalConstants(e2=0.5)
    deform = DeformationParams.build(consts, 0.01, a=0.02)
    state = state_for(consts, deform, 1, 0, "plus")
    E, diag = self_consistent_energy(state, consts, deform)
    E_exact = energy_exact(state, consts, deform).E_closed
    assert abs(E - E_exact) / E_exact <= 1e-6
    assert diag["node_count"] == 0 and diag["n_points"] == 4001


def test_self_consistent_branch_degeneracy():
    consts = PhysicalConstants(e2=0.5)
    deform = DeformationParams.build(consts, 0.02, a=0.0)
    lower, _ = self_consistent_energy(state_for(consts, deform, 2, 0, Branch.MINUS), consts, deform)
    upper, _ = self_consistent_energy(state_for(consts, deform, 2, 1, Branch.PLUS), consts, deform)
    assert abs(lower - upper) <= 1e-6


def test_plain_scheme_available():
    consts = PhysicalConstants(e2=0.5)
    deform = DeformationParams.build(consts, 0.02, a=0.0)
    state = state_for(consts, deform, 2, 0, "plus")
    E, diag = self_consistent_energy(state, consts, deform, SolverOptions(scheme="plain"))
    assert diag["scheme"] == "plain"
    assert abs(E - energy_exact(state, consts, deform).E_closed) <= 1e-5


def test_self_consistent_requires_deformation():
    consts = PhysicalConstants(e2=0.5)
    deform = DeformationParams.build(consts, 0.0)
    with pytest.raises(DeformationRequired):
        self_consistent_energy(state_for(consts, deform, 1, 0), consts, deform)


def test_export_wavefunction():
    consts = PhysicalConstants(e2=0.5)
    deform = DeformationParams.build(consts, 0.01, a=0.02)
    for n_r in (0, 1):
        wf = export_wavefunction(state_for(consts, deform, 1, n_r, "minus"), consts, deform)
        assert wf.meta["node_count"] == n_r
        assert wf.norm == pytest.approx(1.0, abs=1e-10)
        assert abs(wf.chi[-1]) <= 1e-8 * np.max(np.abs(wf.chi))
        assert wf.x[0] == 0.0 and np.all(np.diff(wf.x) > 0)
        inner = wf.r > 0
        assert np.allclose(np.log1p(0.01 * wf.r[inner]) / 0.01, wf.x[inner], rtol=1e-12, atol=0)
        assert {"E", "k", "n_r", "branch"} <= set(wf.meta)
