import numpy as np
import pytest

from solerlab import dirac_linearization as dl
from solerlab import nls_linearization as nl
from solerlab.errors import Unsupported
from solerlab.ground_state import solve_ground_state
from solerlab.numerics import EigenRequest, eigs_near
from solerlab.soliton import Nonlinearity, charge_curve, solve_soliton


@pytest.fixture(scope="module")
def lin_cubic():
    return dl.build_linearization(solve_soliton(1, Nonlinearity(1.0), 1.0, 0.99))


@pytest.fixture(scope="module")
def lin_unstable():
    return dl.build_linearization(solve_soliton(1, Nonlinearity(3.0), 1.0, 0.995))


def test_symmetry_kernel_vectors(lin_cubic):
    res = dl.structure_residuals(lin_cubic)
    assert res["L_J_phi"] <= 10 * lin_cubic.grid_error
    assert res["L_dx_phi"] <= 1e-8


def test_frequency_derivative_generates_the_jordan_partner(lin_cubic):
    dphi, err = dl.dphi_domega(lin_cubic, with_error=True)
    res = dl.structure_residuals(lin_cubic, dphi)
    # J L d_omega phi = J phi holds up to the finite-difference error in omega
    assert res["JL_dw_phi_minus_J_phi"] <= 10 * (err + lin_cubic.grid_error) * np.max(
        np.abs(lin_cubic.L_op.matrix).sum(axis=1))


def test_exact_eigenvalue_at_two_omega(lin_cubic):
    rep = dl.verify_pm2omega(lin_cubic)
    assert rep.residual <= 10 * lin_cubic.grid_error
    assert rep.extrapolated_error <= 1e-6


def test_spectrum_has_hamiltonian_symmetry(lin_cubic):
    vals = np.array([md.value for md in dl.full_spectrum(lin_cubic) if md.kind == "point"])
    scale = 1e-7
    for lam in vals:
        assert np.min(np.abs(vals + lam)) < scale
        assert np.min(np.abs(vals - np.conj(lam))) < scale


def test_unstable_pair_has_vanishing_krein_forms(lin_unstable):
    pairs = dl.real_pairs(dl.full_spectrum(lin_unstable))
    assert pairs, "k = 3 should carry a real pair"
    lam = pairs[0]
    A = lin_unstable.sector_matrix(1)
    res = eigs_near(A, EigenRequest(lam, count=1, tol=1e-8))
    vec = lin_unstable.sector_basis(1) @ res.vectors[:, 0]
    check = dl.krein_check(lin_unstable, vec, res.values[0])
    assert check["ok"], check


def test_potential_blocks_scale_with_eps():
    eps = np.array([0.1, 0.05, 0.025])
    rows = [dl.potential_block_bounds(dl.build_linearization(
        solve_soliton(1, Nonlinearity(1.0), 1.0, float(np.sqrt(1 - e * e))))) for e in eps]
    cross = np.polyfit(np.log(eps), np.log([r["cross"] for r in rows]), 1)[0]
    diag = np.polyfit(np.log(eps), np.log([r["diag_P"] for r in rows]), 1)[0]
    assert cross == pytest.approx(1.0, abs=0.1)
    assert diag >= 2 * 1.0 - 0.1


def test_reduced_block_predicts_the_small_eigenvalues_at_criticality():
    chain = nl.jordan_chain(nl.build_l_operators(solve_ground_state(1, 2.0)))
    curve = charge_curve(1, Nonlinearity(2.0), 1.0, [0.993, 0.994, 0.995, 0.996, 0.997])
    block = dl.reduced_block(chain, curve)
    i = block.omegas.index(0.995)
    eps2 = 1 - 0.995 ** 2
    predicted = block.predicted_lambda[i] / eps2
    scan = dl.spectrum_scan(1, Nonlinearity(2.0), 1.0, (0.995,))
    computed = [L for L in scan.Lambda_values[0] if abs(L) > 1e-3]
    assert computed
    assert min(abs(abs(L) - abs(predicted)) for L in computed) < 0.02 * abs(predicted)
    assert all(abs(L.real) < 1e-6 for L in computed)


def test_origin_tracking_agrees_with_charge_sign():
    nonlin = Nonlinearity(3.0)
    scan = dl.spectrum_scan(1, nonlin, 1.0, (0.995, 0.998, 0.999))
    curve = charge_curve(1, nonlin, 1.0)
    verdict = dl.track_origin(scan, curve)
    assert verdict["dQ_sign"] == "positive"
    assert verdict["consistent"] is True


def test_band_modes_are_not_reported_as_point_spectrum(lin_cubic):
    edge = 1 - lin_cubic.omega
    for md in dl.full_spectrum(lin_cubic):
        if md.kind == "point" and abs(md.value.real) < 1e-8:
            # localised imaginary modes lie in the gap or are the exact +-2 omega i,
            # kernel or bifurcating modes
            im = abs(md.value.imag)
            assert im < edge or abs(im - 2 * lin_cubic.omega) < 1e-6 or im < 1e-6


def test_higher_dimensions_are_out_of_scope():
    with pytest.raises(Unsupported):
        dl.spectrum_scan(2, Nonlinearity(1.0), 1.0, (0.99,))
