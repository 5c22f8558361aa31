import numpy as np
import pytest
import scipy.linalg as la
from hypothesis import given, settings
from hypothesis import strategies as st

from solerlab import birman_schwinger as bsm
from solerlab import nls_linearization as nl
from solerlab.errors import NotCritical
from solerlab.ground_state import solve_ground_state
from solerlab.numerics import EigenRequest, eigs_near, richardson


def poschl_teller_l_minus(k, m=1.0):
    """Exact eigenvalues of l_- below 1/(2m) for n = 1: (1 - (1 - j k)^2)/(2m), j < 1/k."""
    js = np.arange(0, int(np.ceil(1 / k)))
    js = js[js < 1 / k]
    return (1 - (1 - js * k) ** 2) / (2 * m)


def poschl_teller_l_plus(k, m=1.0):
    js = np.arange(0, int(np.ceil((1 + k) / k)))
    js = js[js < (1 + k) / k]
    return (1 - (1 + k - js * k) ** 2) / (2 * m)


@pytest.fixture(scope="module")
def lin_half():
    return nl.build_l_operators(solve_ground_state(1, 0.5))


@pytest.fixture(scope="module")
def lin_cubic():
    return nl.build_l_operators(solve_ground_state(1, 1.0))


@pytest.fixture(scope="module")
def lin_critical():
    return nl.build_l_operators(solve_ground_state(1, 2.0))


def test_ground_state_is_in_the_discrete_kernel(lin_cubic):
    assert np.max(np.abs(lin_cubic.l_minus @ lin_cubic.u)) < 1e-12


def test_translation_mode_in_kernel_of_l_plus(lin_cubic):
    assert np.max(np.abs(lin_cubic.l_plus @ lin_cubic.translation_mode())) < 1e-5


def test_l_minus_spectrum_matches_poschl_teller(lin_half):
    exact = poschl_teller_l_minus(0.5)
    assert np.allclose(nl.l_minus_bound_states(lin_half), exact[exact > 0], atol=1e-6)


def test_l_plus_spectrum_matches_poschl_teller(lin_half):
    exact = poschl_teller_l_plus(0.5)
    res = eigs_near(lin_half.l_plus, EigenRequest(-0.6, count=exact.size))
    assert np.allclose(np.sort(res.values.real), np.sort(exact), atol=1e-6)


def test_jl_spectrum_is_symmetric(lin_cubic):
    res = nl.spectrum_jl(lin_cubic, EigenRequest(0.3j, count=4, tol=1e-6))
    for lam in res.values:
        assert abs(lam.real) < 1e-6 or abs(lam.imag) < 1e-6


def test_zero_has_algebraic_multiplicity_four_below_criticality(lin_cubic):
    zm = nl.zero_multiplicity(lin_cubic)
    assert (zm.algebraic, zm.geometric) == (4, 2)


@settings(max_examples=5)
@given(st.floats(min_value=0.6, max_value=3.0))
def test_critical_pairing_formula(k):
    lin = nl.build_l_operators(solve_ground_state(1, k))
    assert nl.critical_pairing(lin) == pytest.approx(0.5 - 1 / k, abs=1e-4)


def test_jordan_chain_at_critical_exponent(lin_critical):
    # theta is sampled from the continuous profile, so the chain closes only
    # up to the discretisation error of the 4th-order stencil
    chain = nl.jordan_chain(lin_critical)
    assert max(chain.residuals["l_minus_alpha"], chain.residuals["l_plus_beta"]) < 1e-5
    assert chain.beta_u > 0
    # <beta, u> = <alpha, l_- alpha>
    assert chain.residuals["beta_u_identity"] < 1e-5 * chain.beta_u


def test_jordan_chain_needs_criticality(lin_cubic):
    with pytest.raises(NotCritical):
        nl.jordan_chain(lin_cubic)


@pytest.mark.parametrize("k, kind", [(1.0, "threshold_resonance"),
                                     (0.5, "threshold_resonance"),
                                     (1.5, "regular")])
def test_threshold_classification_against_poschl_teller(k, kind):
    # integer l = 1/k makes the potential reflectionless: a resonance at threshold
    lin = nl.build_l_operators(solve_ground_state(1, k))
    assert nl.detect_threshold_resonance(lin).kind == kind


def test_birman_schwinger_count_matches_spectrum():
    # l = 1/k = 2.5 is not an integer, so the threshold is regular
    gs = solve_ground_state(1, 0.4)
    exact = poschl_teller_l_minus(0.4)
    inside = exact[(exact > 0) & (exact < 0.5)]
    assert nl.nontrivial_threshold_spectrum(gs) == inside.size


def test_birman_schwinger_zero_energy_kernel_is_the_limit():
    gs = solve_ground_state(1, 1.5)
    b0 = bsm.bs_eigenvalues(gs, 1, 0.0)[:3]
    b_small = bsm.bs_eigenvalues(gs, 1, 1e-5)[:3]
    assert np.allclose(b0, b_small, atol=1e-4)


def test_weighted_resolvent_matches_direct_inverse(lin_cubic):
    # the finite-difference l_- on the full line against the Nystrom route
    z = -0.3
    coarse, fine = (nl.weighted_resolvent_l_minus(lin_cubic, z,
                                                  bsm.default_bs_grid(1, 1.0, h)).norm
                    for h in (0.05, 0.025))
    nystrom = richardson(fine, coarse, 2)
    L = lin_cubic.l_minus.matrix.toarray()
    root = np.sqrt(lin_cubic.grid.weights)
    uk = lin_cubic.u ** lin_cubic.k
    A = uk[:, None] * la.inv(L - z * np.eye(L.shape[0])) * uk[None, :]
    direct = la.svdvals(root[:, None] * A / root[None, :])[0]
    assert nystrom == pytest.approx(direct, rel=1e-5)
