import numpy as np
import pytest

from solerlab.errors import DomainError, InputError
from solerlab.ground_state import solve_ground_state
from solerlab.numerics import Grid1D, fourier_derivative
from solerlab.soliton import (Nonlinearity, beta_pairing, bifrequency_pair, charge,
                              charge_curve, rescaled_profiles, solve_soliton,
                              sup_scaling_exponent)


@pytest.fixture(scope="module")
def wave():
    return solve_soliton(1, Nonlinearity(1.0), 1.0, 0.99)


def test_radial_system_residual(wave):
    assert wave.residual < 1e-8
    assert np.all(wave.v ** 2 >= 3 * wave.u ** 2)


def test_profile_solves_the_dirac_equation_directly(wave):
    # omega phi = -i sigma_x phi' + m sigma_z phi - f(phi* sigma_z phi) sigma_z phi
    # with phi = (v, i u), differentiated spectrally on a periodic box
    grid = Grid1D(30 / wave.epsilon, 1024, periodic=True)
    x = grid.nodes
    v, u = wave(x)
    phi = np.stack([v + 0j, 1j * u])
    D = fourier_derivative(grid)
    dphi = phi @ D.T
    tau = np.abs(phi[0]) ** 2 - np.abs(phi[1]) ** 2
    f = Nonlinearity(1.0)(tau)
    sz = np.array([1.0, -1.0])[:, None]
    lhs = wave.omega * phi
    rhs = -1j * dphi[::-1] + wave.m * sz * phi - f * sz * phi
    assert np.max(np.abs(lhs - rhs)) < 1e-9 * np.max(np.abs(v))


def test_nonrelativistic_limit_rate():
    # ||e^(gamma <t>) (V - V_hat, U - U_hat)||_H1 = O(eps^2) for the pure power
    gs = solve_ground_state(1, 1.0)
    eps = np.array([0.05, 0.025, 0.0125])
    norms = [rescaled_profiles(solve_soliton(1, Nonlinearity(1.0), 1.0, np.sqrt(1 - e * e)),
                               gs).weighted_norm for e in eps]
    slope = np.polyfit(np.log(eps), np.log(norms), 1)[0]
    assert slope >= 2 * 1.0 - 0.1


def test_amplitude_scales_like_eps_to_one_over_k():
    for k in (1.0, 2.0):
        p = sup_scaling_exponent(1, Nonlinearity(k), omegas=(0.99, 0.995, 0.999))
        assert p == pytest.approx(1 / k, abs=0.02)


def test_charge_reduces_to_nls_charge():
    # Q ~ eps^(2/k - n) ||u_k||^2; for n = k = 1, ||sech||^2 = 2
    p = solve_soliton(1, Nonlinearity(1.0), 1.0, 0.9995)
    assert charge(p) / p.epsilon == pytest.approx(2.0, rel=5e-3)


def test_mass_scaling_symmetry():
    lam, k = 2.0, 1.0
    p1 = solve_soliton(1, Nonlinearity(k), 1.0, 0.99)
    p2 = solve_soliton(1, Nonlinearity(k), lam, 0.99 * lam)
    x = np.linspace(0, 40, 41)
    v1, _ = p1(lam * x)
    v2, _ = p2(x)
    assert np.allclose(v2, lam ** (1 / (2 * k)) * v1, atol=1e-8)


def test_bifrequency_fields_are_beta_orthogonal(wave):
    xi, eta = np.sqrt(2.0), 1.0
    _, phi, chi = bifrequency_pair(wave, xi, eta)
    assert np.max(np.abs(beta_pairing(phi, chi))) < 1e-14


def test_bifrequency_normalisation_enforced(wave):
    with pytest.raises(InputError):
        bifrequency_pair(wave, 1.0, 1.0)


def test_frequency_must_lie_below_mass():
    with pytest.raises(DomainError):
        solve_soliton(1, Nonlinearity(1.0), 1.0, 1.0)
    with pytest.raises(DomainError):
        solve_soliton(1, Nonlinearity(1.0), 1.0, 0.4)


def test_correction_exponent_must_exceed_k():
    with pytest.raises(DomainError):
        Nonlinearity(2.0, 1.5, 0.1)


def test_charge_curve_needs_five_frequencies():
    with pytest.raises(InputError):
        charge_curve(1, Nonlinearity(1.0), 1.0, [0.99, 0.995, 0.999])


def test_nonlinearity_derivative_is_consistent():
    f = Nonlinearity(1.5, 3.0, 0.2)
    tau = np.linspace(-0.8, 0.8, 17)
    tau = tau[tau != 0]
    h = 1e-6
    assert np.allclose(f.derivative(tau), (f(tau + h) - f(tau - h)) / (2 * h), atol=1e-6)
    assert f.varkappa == 1.0
    assert Nonlinearity(2.0, 3.0, 0.1).varkappa == pytest.approx(0.5)
