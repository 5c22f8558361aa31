import numpy as np
import pytest
import scipy.linalg as la
import scipy.sparse as sp
from hypothesis import given
from hypothesis import strategies as st

from solerlab.errors import ConfigurationError, SingularBlock
from solerlab.numerics import (DiscreteOperator, EigenRequest, Grid1D, RadialGrid,
                               block_ldu, build_laplacian_1d, build_laplacian_radial,
                               eigs_near, fourier_derivative, fourier_second_derivative,
                               numerical_rank, observed_order, residual, richardson,
                               riesz_projector, schur_complement, sphere_area, split_blocks)


def test_sphere_area_values():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * np.pi)
    assert sphere_area(3) == pytest.approx(4 * np.pi)


def test_coarse_grids_are_rejected():
    with pytest.raises(ConfigurationError):
        RadialGrid(3, 10.0, 15)
    with pytest.raises(ConfigurationError):
        Grid1D(10.0, 8)


def test_graded_scheme_not_available():
    with pytest.raises(ConfigurationError):
        RadialGrid(3, 10.0, 100, "graded")


def test_dirichlet_laplacian_eigenvalues_match_sine_modes():
    # values beyond the end nodes are zero, so the box is [-L - h, L + h]
    grid = Grid1D(1.0, 801)
    lap = build_laplacian_1d(grid, order=2)
    vals = np.sort(la.eigvalsh(-lap.matrix.toarray()))[:3]
    width = 2 * (grid.x_max + grid.spacing)
    h = grid.spacing
    discrete = 4 / h ** 2 * np.sin(np.arange(1, 4) * np.pi * h / (2 * width)) ** 2
    assert np.allclose(vals, discrete, rtol=1e-10)
    assert np.allclose(vals, (np.arange(1, 4) * np.pi / width) ** 2, rtol=2e-5)


@pytest.mark.parametrize("n", [2, 3])
def test_radial_laplacian_symmetric_in_weighted_product(n):
    grid = RadialGrid(n, 10.0, 200)
    op = build_laplacian_radial(grid)
    S = op.symmetric_matrix().toarray()
    assert np.max(np.abs(S - S.T)) < 1e-12 * np.max(np.abs(S))


def test_radial_laplacian_second_order_convergence():
    # -Delta u + u on a ball, lowest eigenvalue of the 3D Dirichlet problem
    # on radius R is (pi/R)^2
    def lowest(points):
        grid = RadialGrid(3, 1.0, points)
        op = build_laplacian_radial(grid)
        res = eigs_near(DiscreteOperator(-op.matrix, grid, 1, op.bc, True, grid.weights),
                        EigenRequest(0.0, 1))
        return res.values[0].real
    q = [lowest(p) for p in (50, 100, 200)]
    assert observed_order(*q) >= 1.9
    assert richardson(q[2], q[1], 2) == pytest.approx(np.pi ** 2, rel=1e-5)


def test_fourier_derivatives_are_exact_on_trigonometric_polynomials():
    grid = Grid1D(np.pi, 64, periodic=True)
    x = grid.nodes
    f = np.sin(3 * x) + np.cos(5 * x)
    assert np.allclose(fourier_derivative(grid) @ f, 3 * np.cos(3 * x) - 5 * np.sin(5 * x),
                       atol=1e-10)
    assert np.allclose(fourier_second_derivative(grid) @ f,
                       -9 * np.sin(3 * x) - 25 * np.cos(5 * x), atol=1e-9)


def test_fourier_requires_periodic_grid():
    with pytest.raises(ConfigurationError):
        fourier_derivative(Grid1D(1.0, 32))


def test_eigs_near_residuals_are_recomputable():
    grid = Grid1D(10.0, 1001)
    lap = build_laplacian_1d(grid)
    x = grid.nodes
    A = (-lap.matrix + sp.diags(x ** 2)).tocsr()
    op = DiscreteOperator(A, grid, 1, "dirichlet", hermitian=True)
    res = eigs_near(op, EigenRequest(2.9, count=3))
    # harmonic oscillator levels 1, 3, 5
    assert np.allclose(np.sort(res.values.real), [1, 3, 5], atol=1e-2)
    for p in res.pairs:
        assert abs(residual(A, p.value, p.vector) - p.residual) < 1e-13


def test_eigs_near_is_deterministic():
    grid = Grid1D(5.0, 901)
    op = build_laplacian_1d(grid)
    a = eigs_near(op, EigenRequest(-1.0, count=2)).values
    b = eigs_near(op, EigenRequest(-1.0, count=2)).values
    assert np.array_equal(a, b)


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_schur_reassembly_identity(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((7, 7)) + 7 * np.eye(7)
    blocks = split_blocks(M, 3)
    L, D, U = block_ldu(blocks)
    assert np.max(np.abs(L @ D @ U - M)) < 1e-10 * np.max(np.abs(M))
    S = schur_complement(blocks)
    assert la.det(M) == pytest.approx(la.det(blocks[0][0]) * la.det(S), rel=1e-8)


def test_determinant_factorisation_on_random_10x10():
    rng = np.random.default_rng(3)
    M = rng.standard_normal((10, 10))
    blocks = split_blocks(M, 4)
    S = schur_complement(blocks)
    assert la.det(M) == pytest.approx(la.det(blocks[0][0]) * la.det(S), rel=1e-8)


def test_singular_block_is_reported():
    M = np.eye(4)
    M[0, 0] = 0.0
    with pytest.raises(SingularBlock):
        schur_complement(split_blocks(M, 2))


def test_riesz_projector_rank_counts_jordan_block():
    # Jordan block of size 2 at 0 plus a simple eigenvalue at 3
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 3.0]])
    P = riesz_projector(A, 0.0, 1.0)
    assert numerical_rank(P) == 2
    assert np.allclose(P @ P, P, atol=1e-10)
