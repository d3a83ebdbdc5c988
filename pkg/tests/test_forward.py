import numpy as np
import pytest

from cgolab import (Grid2D, BoundaryPartition, VectorField, MatrixField,
                    remark_partition, GAMMA_TILDE, OperatorFactorization,
                    solve_dirichlet, cauchy_data, cauchy_distance,
                    hat_profiles, fourier_profiles, PartialCauchyData,
                    RealFormCoefficients, real_form_to_complex,
                    complex_to_real_form, CoefficientTriple,
                    random_trig_spec, GridError, neumann_trace)

from conftest import make_triple


def manufactured(grid, t, seed=5):
    """Exact smooth solution, its Dirichlet trace, and the matching source."""
    n = t.n_sys
    uspec = random_trig_spec(np.random.default_rng(seed), (n,), 1.0)
    u_ex = uspec.sample(grid)
    rhs = VectorField(grid, uspec.lap(grid)
                      + 2 * np.einsum("xyab,xyb->xya", t.a_coef.data, uspec.dz(grid))
                      + 2 * np.einsum("xyab,xyb->xya", t.b_coef.data, uspec.dzbar(grid))
                      + np.einsum("xyab,xyb->xya", t.q_coef.data, u_ex))
    ii, jj, _, _ = BoundaryPartition(grid).nodes()
    return u_ex, u_ex[ii, jj], rhs


def test_manufactured_solution_small_grid(grid33):
    t = make_triple(11, 2, grid33)
    u_ex, bv, rhs = manufactured(grid33, t)
    uh = solve_dirichlet(t, boundary_values=bv, rhs=rhs)
    assert np.max(np.abs(uh.data - u_ex)) < 3e-4


def test_zero_data_gives_zero_solution(grid33):
    t = make_triple(11, 1, grid33)
    uh = solve_dirichlet(t)
    assert np.max(np.abs(uh.data)) == 0.0


def test_factorization_reuse_is_consistent(grid33):
    t = make_triple(12, 1, grid33)
    fac = OperatorFactorization(t)
    _, bv, rhs = manufactured(grid33, t)
    u1 = solve_dirichlet(t, boundary_values=bv, rhs=rhs)
    u2 = solve_dirichlet(t, boundary_values=bv, rhs=rhs, factorization=fac)
    assert np.allclose(u1.data, u2.data)


def test_solver_linearity(grid33):
    t = make_triple(13, 2, grid33)
    fac = OperatorFactorization(t)
    ii, jj, _, _ = BoundaryPartition(grid33).nodes()
    rng = np.random.default_rng(0)
    b1 = rng.standard_normal((len(ii), 2)) + 1j * rng.standard_normal((len(ii), 2))
    b2 = rng.standard_normal((len(ii), 2)) + 1j * rng.standard_normal((len(ii), 2))
    u1 = fac.solve(b1, None)
    u2 = fac.solve(b2, None)
    u12 = fac.solve(2.0 * b1 - 0.5j * b2, None)
    assert np.max(np.abs(u12.data - 2.0 * u1.data + 0.5j * u2.data)) < 1e-10


def test_real_form_round_trip(grid33):
    rng = np.random.default_rng(3)
    ar = MatrixField(grid33, rng.standard_normal((33, 33, 2, 2)) + 0j)
    br = MatrixField(grid33, rng.standard_normal((33, 33, 2, 2)) + 0j)
    a, b = real_form_to_complex(RealFormCoefficients(ar, br))
    back = complex_to_real_form(a, b)
    assert np.allclose(back.a_real.data, ar.data, atol=1e-13)
    assert np.allclose(back.b_real.data, br.data, atol=1e-13)
    # the real-form operator A dx1 + B dx2 equals 2 Re-combined Wirtinger pair
    assert np.allclose(a.data + b.data, 2 * ar.data)
    assert np.allclose(a.data - b.data, 2j * br.data)


def test_hat_profiles_count_and_bounds(grid33):
    part = remark_partition(grid33)
    profs = hat_profiles(part, 6)
    assert len(profs) == 6
    fi, fj, _, _ = BoundaryPartition(grid33).nodes()
    hidden = (fi == 0) | (fi == 32)  # unobserved side edges stay zero
    for p in profs:
        assert p.shape == (len(fi),)
        assert p.max() == 1.0
        assert np.all(p[hidden] == 0.0)
    with pytest.raises(GridError):
        hat_profiles(part, 10 ** 4)


def test_fourier_profiles_are_grid_resamplable():
    part_a = remark_partition(Grid2D(nx=17, ny=17))
    part_b = remark_partition(Grid2D(nx=33, ny=33))
    fa = fourier_profiles(part_a, 3)
    fb = fourier_profiles(part_b, 3)
    # same continuum profile: coarse nodes are every other fine node per arc
    na = len(fa[0]) // 2
    nb = len(fb[0]) // 2
    for a, b in zip(fa, fb):
        assert np.allclose(a[:na], b[:nb][::2], atol=1e-12)


def test_cauchy_data_round_trip_and_distance(tmp_path, grid33):
    t = make_triple(3, 1, grid33)
    part = remark_partition(grid33)
    cd = cauchy_data(t, part, 3)
    assert len(cd) == 3
    path = tmp_path / "cd.json"
    cd.save(path)
    back = PartialCauchyData.load(path)
    assert cauchy_distance(cd, back) == 0.0


def test_cauchy_distance_rejects_basis_mismatch(grid33):
    t = make_triple(3, 1, grid33)
    part = remark_partition(grid33)
    c1 = cauchy_data(t, part, 3, basis="hat")
    c2 = cauchy_data(t, part, 3, basis="fourier")
    with pytest.raises(GridError):
        cauchy_distance(c1, c2)


def test_cauchy_distance_separates_different_potentials(grid33):
    part = remark_partition(grid33)
    t1 = make_triple(3, 1, grid33)
    q2 = MatrixField(grid33, t1.q_coef.data + 1.0)
    t2 = CoefficientTriple(t1.a_coef, t1.b_coef, q2)
    d = cauchy_distance(cauchy_data(t1, part, 3), cauchy_data(t2, part, 3))
    assert d > 1e-2


def test_neumann_trace_of_coordinate(grid33):
    part = remark_partition(grid33)
    X, _ = grid33.meshgrid()
    _, Y = grid33.meshgrid()
    f = VectorField(grid33, Y[:, :, None].astype(complex))
    dn = neumann_trace(f, part, GAMMA_TILDE)
    ii, jj, normals, _ = part.nodes(GAMMA_TILDE)
    assert np.allclose(dn[:, 0], normals[:, 1], atol=1e-11)
