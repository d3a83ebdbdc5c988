import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cgolab import (Grid2D, MatrixField, CoefficientTriple, remark_partition,
                    remark_gauge, gauge_transform, check_relations,
                    coefficient_gap, corollary_pipeline, carleman_probe,
                    random_h01_spec, CarlemanConvexWeight, full_operator_setup,
                    SineWindow1D, ProfileX2, GaugeSpec, LabError,
                    random_trig_spec)

from conftest import make_triple, refinement_orders


def test_window_is_compactly_supported_and_smooth():
    win = SineWindow1D(0.125, 0.875, power=6, amp=1.0)
    t = np.linspace(0, 1, 2001)
    v = win.val(t)
    assert np.all(v[t <= 0.125] == 0.0)
    assert np.all(v[t >= 0.875] == 0.0)
    # finite difference of the closed-form first derivative
    fd = np.gradient(v, t)
    assert np.max(np.abs(fd - win.d1(t))) < 5e-4


def test_window_rejects_odd_or_low_power():
    with pytest.raises(LabError):
        SineWindow1D(0.1, 0.9, power=3)
    with pytest.raises(LabError):
        SineWindow1D(0.1, 0.9, power=2)


def test_remark_gauge_is_flat_on_observed_edges():
    gauge = remark_gauge(0.7)
    grid = Grid2D(nx=33, ny=33)
    eta = gauge.eta(grid)
    assert np.all(eta[:, 0] == 0.0) and np.all(eta[:, -1] == 0.0)
    assert np.all(gauge.eta_z(grid)[:, 0] == 0.0)
    assert gauge.flat_on_gamma_tilde
    assert gauge.zero_band > 0


def test_gauge_transform_identity_at_zero_strength(grid33):
    t = make_triple(1, 2, grid33)
    t0 = gauge_transform(t, remark_gauge(0.0))
    assert coefficient_gap(t, t0) == 0.0


@settings(max_examples=10, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_gauge_transforms_compose_additively(s, r):
    grid = Grid2D(nx=17, ny=17)
    t = make_triple(4, 1, grid)
    one = gauge_transform(gauge_transform(t, remark_gauge(s)), remark_gauge(r))
    two = gauge_transform(t, remark_gauge(s + r))
    assert coefficient_gap(one, two) < 1e-10


def test_relation_residuals_refine_on_gauge_pairs():
    gauge = remark_gauge(0.7)
    errs, gaps = [], []
    for nx in (33, 65, 129):
        grid = Grid2D(nx=nx, ny=nx)
        t1 = make_triple(3, 1, grid)
        res = check_relations(t1, gauge_transform(t1, gauge),
                              remark_partition(grid))
        errs.append(max(res.norms["r_a1_l2"], res.norms["r_a2_l2"]))
        gaps.append(res.boundary_gap)
    assert min(refinement_orders(errs)) > 1.8
    assert max(gaps) == 0.0  # the window vanishes identically on the band


def test_single_term_perturbation_reproduces_bump_norm(grid33):
    """Perturbing Q alone turns both relations into -(Q1-Q2) exactly."""
    t1 = make_triple(6, 2, grid33)
    bump = random_trig_spec(np.random.default_rng(0), (2, 2), 1.0)
    q2 = MatrixField(grid33, t1.q_coef.data + bump.sample(grid33))
    t2 = CoefficientTriple(t1.a_coef, t1.b_coef, q2)
    res = check_relations(t1, t2, remark_partition(grid33))
    dq = MatrixField(grid33, bump.sample(grid33))
    assert res.norms["r_a1_l2"] == dq.l2()
    assert res.norms["r_a2_max"] == dq.max_abs()


def test_corollary_case_preconditions(grid33):
    t1 = make_triple(7, 1, grid33)
    t2 = gauge_transform(t1, remark_gauge(0.5))
    with pytest.raises(LabError):
        corollary_pipeline("Q_known", t1, t2)  # Q differs
    with pytest.raises(LabError):
        corollary_pipeline("nonsense", t1, t1)


def test_corollary_b_known_reduction(grid33):
    """With B shared and Q adjusted to the substitution identity, the
    case-reduced equation residual is pure differencing error."""
    t1 = make_triple(8, 2, grid33)
    # build t2 sharing B, with A2 = A1 + delta for a constant-in-space delta
    rng = np.random.default_rng(1)
    delta = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    a2 = MatrixField(grid33, t1.a_coef.data - delta)
    dA = np.broadcast_to(delta, (33, 33, 2, 2))
    q2 = MatrixField(grid33, t1.q_coef.data
                     - np.einsum("xyab,xybc->xyac", dA, t1.b_coef.data))
    t2 = CoefficientTriple(a2, t1.b_coef, q2)
    rep = corollary_pipeline("B_known", t1, t2)
    assert rep["residuals"]["substitution"]["max"] < 1e-12
    # 2 dz(const) = 0, so only the commutator term survives analytically;
    # check the reported residual equals it
    comm = (np.einsum("xyab,xybc->xyac", t2.b_coef.data, dA)
            - np.einsum("xyab,xybc->xyac", dA, t1.b_coef.data))
    assert rep["residuals"]["case_reduced"]["max"] == pytest.approx(
        np.max(np.abs(comm)), rel=1e-12)


def test_corollary_a_known_mirror(grid33):
    t1 = make_triple(9, 1, grid33)
    rep = corollary_pipeline("A_known", t1, t1)
    assert rep["residuals"]["case_reduced"]["max"] == 0.0
    assert rep["residuals"]["substitution"]["max"] == 0.0


def test_carleman_first_order_probe_decays(grid33):
    cw = CarlemanConvexWeight(gx=1.0, gy=0.1, lam=2.0)
    rng = np.random.default_rng(2)
    fam = [random_h01_spec(rng, (1,), 1.0) for _ in range(3)]
    rep = carleman_probe("first_order_dz", cw, [8.0, 16.0, 32.0, 64.0],
                         fam, grid33)
    assert rep["passed"]
    assert rep["ratios"][-1] < rep["ratios"][0]


def test_carleman_probe_rejects_bad_ladder(grid33):
    cw = CarlemanConvexWeight(gx=1.0, gy=0.1, lam=2.0)
    with pytest.raises(LabError):
        carleman_probe("first_order_dz", cw, [8.0], [], grid33)
    with pytest.raises(LabError):
        carleman_probe("first_order_dz", cw, [8.0, 4.0], [], grid33)


def test_carleman_probe_kind_weight_mismatch(grid33):
    cw = CarlemanConvexWeight(gx=1.0, gy=0.1, lam=2.0)
    with pytest.raises(LabError):
        carleman_probe("full_operator", cw, [8.0, 16.0], [], grid33)


def test_h01_spec_vanishes_on_boundary(grid33):
    spec = random_h01_spec(np.random.default_rng(0), (2,), 1.0)
    v = spec.sample(grid33)
    assert np.max(np.abs(v[0, :])) < 1e-14
    assert np.max(np.abs(v[:, -1])) < 1e-14


def test_full_operator_setup_flags():
    part, w = full_operator_setup(Grid2D(nx=33, ny=33))
    assert w.condition_flags["im_vanishes_on_gamma0"]
    assert w.condition_flags["critical_points_off_gamma_tilde"]
    assert part.labels["left"] == "gamma_0"
