import numpy as np
import pytest
from hypothesis import given, strategies as st

from solerlab import char_roots as cr
from solerlab.errors import (ConfigurationError, ContourError, ContourTooClose,
                             HypothesisError, MultiplicityError)
from solerlab.ground_state import solve_ground_state

UNIT = cr.Contour(0.0, 1.0, 128)


def diagonal_family(roots):
    roots = np.asarray(roots, dtype=complex)
    return cr.HoloFamily(lambda z: np.diag(z - roots), roots.size,
                         lambda z: np.eye(roots.size, dtype=complex))


def _same_multiset(found, expected, tol):
    found, expected = list(found), list(expected)
    for e in expected:
        j = int(np.argmin([abs(f - e) for f in found]))
        assert abs(found[j] - e) < tol
        found.pop(j)
    assert not found


points_in_disc = st.builds(
    lambda r, t: r * np.exp(1j * t),
    st.floats(0.0, 0.8), st.floats(0.0, 2 * np.pi))


@given(st.lists(points_in_disc, min_size=1, max_size=3), st.lists(
    st.floats(1.3, 3.0), min_size=0, max_size=2))
def test_diagonal_family_roots_are_its_entries(inside, outside):
    # separated distinct roots keep the clusters unambiguous
    for i, a in enumerate(inside):
        for b in inside[:i]:
            if abs(a - b) < 0.05:
                return
    rep = cr.find_char_roots(diagonal_family(inside + outside), UNIT)
    assert rep.total == len(inside)
    _same_multiset(rep.roots, inside, 1e-8)


def test_companion_family_reproduces_polynomial_roots():
    coeffs = [1.0, 0.4, -1.5, 0.3, 0.2]   # highest degree first
    companion = np.diag(np.ones(3), -1).astype(complex)
    companion[0, :] = -np.array(coeffs[1:]) / coeffs[0]
    fam = cr.matrix_polynomial([-companion, np.eye(4)])
    expected = [r for r in np.roots(coeffs) if abs(r) < 1]
    rep = cr.find_char_roots(fam, UNIT)
    assert rep.total == len(expected)
    _same_multiset(rep.roots, expected, 1e-9)


def test_jordan_block_has_multiplicity_two():
    fam = cr.matrix_polynomial([[[0, 1], [0, 0]], np.eye(2)])
    rep = cr.find_char_roots(fam, UNIT)
    assert rep.total == 2 and rep.multiplicities == [2]
    mult = cr.multiplicity_report(fam, 0.0)
    assert (mult.algebraic, mult.geometric) == (2, 1)


def test_order_of_vanishing_exceeds_kernel_dimension():
    # diag(z^2, z): determinant vanishes to order 3, kernel is two dimensional
    fam = cr.HoloFamily(lambda z: np.diag([z * z, z]), 2, lambda z: np.diag([2 * z, 1]))
    mult = cr.multiplicity_report(fam, 0.0, delta=0.5)
    assert (mult.algebraic, mult.geometric) == (3, 2)
    assert cr.find_char_roots(fam, cr.Contour(0.0, 0.5)).total == 3


def test_regular_point_is_not_a_root():
    with pytest.raises(MultiplicityError):
        cr.multiplicity_report(diagonal_family([0.5]), 0.0, delta=0.1)


def test_root_on_the_contour_is_rejected():
    with pytest.raises(ContourTooClose):
        cr.find_char_roots(diagonal_family([1.0]), UNIT)


def test_contour_validation():
    with pytest.raises(ConfigurationError):
        cr.Contour(0.0, 1.0, 16)
    with pytest.raises(ConfigurationError):
        cr.Contour(0.0, 0.0)
    fam = cr.HoloFamily(lambda z: np.eye(1) * z, 1, domain=(0.0, 1.0))
    with pytest.raises(ContourError):
        cr.find_char_roots(fam, cr.Contour(0.5, 0.6))


def test_winding_count_matches_total():
    rng = np.random.default_rng(3)
    coeffs = [rng.standard_normal((4, 4)) for _ in range(3)]
    fam = cr.matrix_polynomial(coeffs)
    rep = cr.find_char_roots(fam, UNIT)
    assert abs(cr.winding_count(fam, UNIT) - rep.total) < 1e-6
    for z in rep.roots:
        s = np.linalg.svd(fam(z), compute_uv=False)
        assert s[-1] / s[0] < 1e-8


def test_small_perturbation_keeps_total_multiplicity():
    rng = np.random.default_rng(11)
    coeffs = [rng.standard_normal((3, 3)) for _ in range(3)]
    fam = cr.matrix_polynomial(coeffs)
    B = 1e-4 * rng.standard_normal((3, 3))
    check = cr.perturbation_report(fam, lambda z: B * (1 + z), UNIT)
    assert check.stable and check.bound < 1
    assert check.total_unperturbed == check.total_perturbed


def test_large_perturbation_violates_the_hypothesis():
    fam = diagonal_family([0.0, 0.2])
    with pytest.raises(HypothesisError):
        cr.perturbation_report(fam, lambda z: 10 * np.eye(2), UNIT)


def test_finite_difference_derivative_is_accurate():
    fam = cr.HoloFamily(lambda z: np.array([[np.exp(z)]]), 1)
    z = 0.3 + 0.2j
    assert abs(fam.deriv(z)[0, 0] - np.exp(z)) < 1e-10
    assert fam.cauchy_riemann_residual(z) < 1e-6


@pytest.fixture(scope="module")
def reduction():
    from solerlab.soliton import Nonlinearity, solve_soliton
    eps = 0.05
    return cr.build_reduction(solve_soliton(1, Nonlinearity(1.5), 1.0, np.sqrt(1 - eps * eps)))


def test_limit_family_has_a_simple_root_at_the_origin(reduction):
    _, S0 = cr.build_T_and_S(solve_ground_state(1, 1.5), reduction, epsilon=0)
    rep = cr.find_char_roots(S0, cr.Contour(0.0, 0.4))
    assert rep.total == 1
    assert abs(rep.roots[0]) < 1e-6
    assert cr.multiplicity_at(S0, rep.roots[0]) == 1


def test_reduced_family_is_holomorphic(reduction):
    _, S = cr.build_T_and_S(reduction.lin.profile, reduction)
    assert S.cauchy_riemann_residual(0.1 + 0.05j, h=1e-3) < 1e-4


def test_mismatched_epsilon_is_rejected(reduction):
    with pytest.raises(ConfigurationError):
        cr.build_T_and_S(reduction.lin.profile, reduction, epsilon=0.1)
