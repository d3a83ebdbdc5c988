"""Gauge non-uniqueness family, coefficient relations, and Carleman probes.

The gauge profile eta is always closed-form with closed-form
derivatives: the exact-cancellation checks on the coefficient relations
would be contaminated by numerically differentiating eta.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridError, LabError, OverflowGuardError
from .grid import Grid2D, BoundaryPartition, GAMMA_TILDE, remark_partition
from .fields import MatrixField, VectorField, identity_matrix
from .calculus import (wirtinger_dz, wirtinger_dzbar, dz_array, dzbar_array,
                       laplacian_array, normal_derivative)
from .synthetic import TrigSpec, random_trig_spec, N_MODES
from .forward import CoefficientTriple, cauchy_data, cauchy_distance
from .weights import HolomorphicWeight, CarlemanConvexWeight


class SineWindow1D:
    """amp * sin^p(pi (t-a)/(b-a)) on (a, b), identically zero outside.

    p >= 4 keeps enough continuous derivatives at the window edges for the
    4th-order stencils used downstream.
    """

    def __init__(self, a: float, b: float, power: int = 6, amp: float = 1.0):
        if not a < b:
            raise LabError("empty window")
        if power < 4 or power % 2:
            raise LabError("window power must be even and >= 4")
        self.a, self.b, self.p, self.amp = a, b, power, amp
        self.w = np.pi / (b - a)

    def _u(self, t):
        return (np.asarray(t, dtype=float) - self.a) * self.w

    def _mask(self, t):
        t = np.asarray(t, dtype=float)
        return (t > self.a) & (t < self.b)

    def val(self, t):
        u, m = self._u(t), self._mask(t)
        return np.where(m, self.amp * np.sin(u) ** self.p, 0.0)

    def d1(self, t):
        u, m = self._u(t), self._mask(t)
        return np.where(m, self.amp * self.p * self.w
                        * np.sin(u) ** (self.p - 1) * np.cos(u), 0.0)

    def d2(self, t):
        u, m = self._u(t), self._mask(t)
        s, c = np.sin(u), np.cos(u)
        return np.where(m, self.amp * self.p * self.w ** 2 * s ** (self.p - 2)
                        * ((self.p - 1) * c ** 2 - s ** 2), 0.0)


class ProfileX2:
    """Gauge profile depending on x2 only, as in the unit-square example."""

    def __init__(self, window: SineWindow1D):
        self.window = window

    def value(self, X, Y):
        return self.window.val(Y)

    def dx(self, X, Y):
        return np.zeros_like(np.asarray(X, dtype=float))

    def dy(self, X, Y):
        return self.window.d1(Y)

    def lap(self, X, Y):
        return self.window.d2(Y)


class ProfileSeparable:
    """Product profile wx(x) * wy(y); compact support in both directions."""

    def __init__(self, wx: SineWindow1D, wy: SineWindow1D):
        self.wx, self.wy = wx, wy

    def value(self, X, Y):
        return self.wx.val(X) * self.wy.val(Y)

    def dx(self, X, Y):
        return self.wx.d1(X) * self.wy.val(Y)

    def dy(self, X, Y):
        return self.wx.val(X) * self.wy.d1(Y)

    def lap(self, X, Y):
        return self.wx.d2(X) * self.wy.val(Y) + self.wx.val(X) * self.wy.d2(Y)


@dataclass(frozen=True)
class GaugeSpec:
    """Scalar conjugation profile and strength for the gauge family."""

    s: float
    profile: object
    flat_on_gamma_tilde: bool = False
    zero_band: float = 0.0

    def eta(self, grid: Grid2D):
        X, Y = grid.meshgrid()
        return self.profile.value(X, Y)

    def eta_z(self, grid: Grid2D):
        X, Y = grid.meshgrid()
        return 0.5 * (self.profile.dx(X, Y) - 1j * self.profile.dy(X, Y))

    def eta_zbar(self, grid: Grid2D):
        X, Y = grid.meshgrid()
        return 0.5 * (self.profile.dx(X, Y) + 1j * self.profile.dy(X, Y))

    def lap_eta(self, grid: Grid2D):
        X, Y = grid.meshgrid()
        return self.profile.lap(X, Y)

    def grad_sq(self, grid: Grid2D):
        X, Y = grid.meshgrid()
        return self.profile.dx(X, Y) ** 2 + self.profile.dy(X, Y) ** 2

    def with_strength(self, s: float) -> "GaugeSpec":
        return GaugeSpec(s=s, profile=self.profile,
                         flat_on_gamma_tilde=self.flat_on_gamma_tilde,
                         zero_band=self.zero_band)


def remark_gauge(s: float, a: float = 0.125, b: float = 0.875,
                 power: int = 6, amp: float = 1.0) -> GaugeSpec:
    """eta(x2) compactly supported in (0, 1): flat on the top/bottom arcs."""
    return GaugeSpec(s=s, profile=ProfileX2(SineWindow1D(a, b, power, amp)),
                     flat_on_gamma_tilde=True, zero_band=min(a, 1.0 - b))


def gauge_transform(coefs: CoefficientTriple, gauge: GaugeSpec) -> CoefficientTriple:
    """Coefficients of  e^{-s eta} L e^{s eta}:

    A -> A + 2 s eta_zbar,  B -> B + 2 s eta_z,
    Q -> Q + (s lap(eta) + s^2 |grad eta|^2) I + 2 s eta_z A + 2 s eta_zbar B.
    """
    grid = coefs.grid
    s = gauge.s
    ez = gauge.eta_z(grid)[:, :, None, None]
    ezb = gauge.eta_zbar(grid)[:, :, None, None]
    eye = np.eye(coefs.n_sys)
    a2 = coefs.a_coef.data + 2 * s * ezb * eye
    b2 = coefs.b_coef.data + 2 * s * ez * eye
    scal = (s * gauge.lap_eta(grid) + s * s * gauge.grad_sq(grid))[:, :, None, None]
    q2 = (coefs.q_coef.data + scal * eye
          + 2 * s * ez * coefs.a_coef.data + 2 * s * ezb * coefs.b_coef.data)
    return CoefficientTriple(MatrixField(grid, a2), MatrixField(grid, b2),
                             MatrixField(grid, q2))


@dataclass(frozen=True)
class RelationResidual:
    """Residual fields of the two first-order coefficient relations."""

    r_a1: MatrixField
    r_a2: MatrixField
    boundary_gap: float
    norms: dict


def check_relations(t1: CoefficientTriple, t2: CoefficientTriple,
                    partition: BoundaryPartition) -> RelationResidual:
    """Residuals of
    2 dz(A1-A2) + B2 (A1-A2) + (B1-B2) A1 - (Q1-Q2)   and
    2 dzbar(B1-B2) + A2 (B1-B2) + (A1-A2) B1 - (Q1-Q2),
    plus the max coefficient gap on the observed arcs.
    """
    if t1.grid != t2.grid or t1.n_sys != t2.n_sys:
        raise GridError("triples live on different grids")
    grid = t1.grid
    dA = t1.a_coef.data - t2.a_coef.data
    dB = t1.b_coef.data - t2.b_coef.data
    dQ = t1.q_coef.data - t2.q_coef.data

    def mm(a, b):
        return np.einsum("xyab,xybc->xyac", a, b)

    r1 = 2 * dz_array(dA, grid) + mm(t2.b_coef.data, dA) + mm(dB, t1.a_coef.data) - dQ
    r2 = 2 * dzbar_array(dB, grid) + mm(t2.a_coef.data, dB) + mm(dA, t1.b_coef.data) - dQ

    ii, jj, _, _ = partition.nodes(GAMMA_TILDE)
    gap = float(np.max(np.max(np.abs(dA[ii, jj]), axis=(1, 2))
                       + np.max(np.abs(dB[ii, jj]), axis=(1, 2)))) if len(ii) else 0.0

    f1, f2 = MatrixField(grid, r1), MatrixField(grid, r2)
    norms = {"r_a1_l2": f1.l2(), "r_a1_max": f1.max_abs(),
             "r_a2_l2": f2.l2(), "r_a2_max": f2.max_abs()}
    return RelationResidual(r_a1=f1, r_a2=f2, boundary_gap=gap, norms=norms)


def coefficient_gap(t1: CoefficientTriple, t2: CoefficientTriple) -> float:
    return max((t1.a_coef - t2.a_coef).max_abs(),
               (t1.b_coef - t2.b_coef).max_abs(),
               (t1.q_coef - t2.q_coef).max_abs())


def gauge_equivalence_experiment(make_triple, gauge: GaugeSpec, nx_ladder,
                                 m: int = 4, basis: str = "fourier",
                                 make_partition=remark_partition) -> dict:
    """Cauchy-data distance of a triple vs its gauge transform on a grid ladder.

    ``make_triple(grid)`` must sample one fixed continuum triple on any
    grid.  The continuum claim is equality of the data; discretely the
    distance must vanish under refinement while the coefficient gap stays
    put.
    """
    if not gauge.flat_on_gamma_tilde:
        raise LabError("gauge must be flat on the observed arcs")
    distances, gaps = [], []
    for nx in nx_ladder:
        grid = Grid2D(nx=nx, ny=nx)
        part = make_partition(grid)
        t1 = make_triple(grid)
        t2 = gauge_transform(t1, gauge)
        c1 = cauchy_data(t1, part, m, basis=basis)
        c2 = cauchy_data(t2, part, m, basis=basis)
        distances.append(cauchy_distance(c1, c2))
        gaps.append(coefficient_gap(t1, t2))
    orders = [float(np.log2(a / b)) if b > 0 else float("inf")
              for a, b in zip(distances[:-1], distances[1:])]
    return {"nx_ladder": list(nx_ladder), "distances": distances,
            "orders": orders, "coefficient_gap": max(gaps)}


def off_gauge_separation(make_triple, gauge: GaugeSpec, nx: int, m: int = 4,
                         basis: str = "fourier", n_samples: int = 20,
                         seed: int = 0, amplitude: float = 3.0,
                         make_partition=remark_partition) -> dict:
    """Distances for a seeded family of non-gauge Q perturbations vs the gauge pair."""
    grid = Grid2D(nx=nx, ny=nx)
    part = make_partition(grid)
    t1 = make_triple(grid)
    c1 = cauchy_data(t1, part, m, basis=basis)
    gauge_dist = cauchy_distance(
        c1, cauchy_data(gauge_transform(t1, gauge), part, m, basis=basis))
    rng = np.random.default_rng(seed)
    n = t1.n_sys
    off = []
    for _ in range(n_samples):
        spec = random_trig_spec(rng, (n, n), amplitude=amplitude)
        q = MatrixField(grid, t1.q_coef.data + spec.sample(grid))
        t2 = CoefficientTriple(t1.a_coef, t1.b_coef, q)
        off.append(cauchy_distance(c1, cauchy_data(t2, part, m, basis=basis)))
    return {"gauge_distance": gauge_dist, "off_gauge_distances": off,
            "separation": min(off) / max(gauge_dist, 1e-300)}


# ---------------------------------------------------------------------------
# Carleman probes

def random_h01_spec(rng: np.random.Generator, value_shape=(),
                    amplitude: float = 1.0) -> TrigSpec:
    """Random trig polynomial built from sine modes only: vanishes on the boundary."""
    spec = random_trig_spec(rng, value_shape, amplitude)
    c = spec.coeffs.copy()
    keep = np.zeros((N_MODES, N_MODES), dtype=bool)
    for i in (1, 3):
        for j in (1, 3):
            keep[i, j] = True
    c[~keep] = 0.0
    return TrigSpec(c)


def _weighted_l2(data: np.ndarray, wexp: np.ndarray, grid: Grid2D) -> float:
    qw = grid.quad_weights()
    flat = np.abs(data.reshape(data.shape[0], data.shape[1], -1)) ** 2
    return float(np.sqrt(np.sum(qw[:, :, None] * (wexp ** 2)[:, :, None] * flat)))


def carleman_probe(kind: str, weight, tau_ladder, test_family, grid: Grid2D,
                   partition: BoundaryPartition | None = None,
                   coefs: CoefficientTriple | None = None,
                   b_pair=None) -> dict:
    """Empirical left/right ratios of one Carleman inequality over a tau ladder.

    kinds: 'first_order_dz', 'first_order_dzbar' (convex weight, H^1_0
    scalar/vector test functions), 'system_zero_order' (convex weight,
    matrix unknowns, coefficient pair ``b_pair``), 'full_operator'
    (holomorphic weight phi, full elliptic operator, needs ``coefs`` and
    ``partition``).

    PASS surrogate for the existential constant: the sup ratio over the
    upper half of the ladder must not exceed the sup over the lower half.
    """
    taus = list(tau_ladder)
    if len(taus) < 2 or any(b <= a for a, b in zip(taus[:-1], taus[1:])):
        raise LabError("tau ladder must be increasing with >= 2 rungs")
    X, Y = grid.meshgrid()
    if kind in ("first_order_dz", "first_order_dzbar", "system_zero_order"):
        if not isinstance(weight, CarlemanConvexWeight):
            raise LabError(f"{kind} needs a CarlemanConvexWeight")
        phi = weight.phi_c(X, Y)
    else:
        if not isinstance(weight, HolomorphicWeight):
            raise LabError("full_operator needs a HolomorphicWeight")
        phi = weight.phi(grid.nodes_z())
    phi = phi - phi.max()  # ratio-invariant normalization against overflow

    ratios = []
    for tau in taus:
        wexp = np.exp(tau * phi)
        sup = 0.0
        for tf in test_family:
            num, den = _probe_sides(kind, tf, tau, wexp, grid, partition,
                                    coefs, b_pair, weight)
            if num == 0.0 and den == 0.0:
                continue  # vacuous member
            if den == 0.0:
                raise LabError("zero right-hand side with nonzero left side")
            sup = max(sup, num / den)
        ratios.append(sup)
    half = len(taus) // 2
    sup_low, sup_high = max(ratios[:half]), max(ratios[half:])
    result = {"kind": kind, "taus": taus, "ratios": ratios,
              "sup_low": sup_low, "sup_high": sup_high,
              "passed": bool(sup_high <= sup_low)}
    if not np.all(np.isfinite(ratios)):
        raise OverflowGuardError("non-finite Carleman ratio; normalize the weight")
    return result


def _probe_sides(kind, tf, tau, wexp, grid, partition, coefs, b_pair, weight):
    X, Y = grid.meshgrid()
    w = tf.sample(grid)
    if kind == "first_order_dz":
        lhs = np.sqrt(tau) * _weighted_l2(w, wexp, grid)
        rhs = _weighted_l2(tf.dz(grid), wexp, grid)
        return lhs, rhs
    if kind == "first_order_dzbar":
        lhs = np.sqrt(tau) * _weighted_l2(w, wexp, grid)
        rhs = _weighted_l2(tf.dzbar(grid), wexp, grid)
        return lhs, rhs
    if kind == "system_zero_order":
        b1, b2 = b_pair
        f = (2 * tf.dz(grid) + np.einsum("xyab,xybc->xyac", b2.data, w)
             - np.einsum("xyab,xybc->xyac", w, b1.data))
        lhs = np.sqrt(tau) * _weighted_l2(w, wexp, grid)
        rhs = _weighted_l2(f, wexp, grid)
        return lhs, rhs
    if kind == "full_operator":
        if partition is None or coefs is None:
            raise LabError("full_operator probe needs a partition and coefficients")
        lap = tf.lap(grid)
        lu = (lap + 2 * np.einsum("xyab,xyb->xya", coefs.a_coef.data, tf.dz(grid))
              + 2 * np.einsum("xyab,xyb->xya", coefs.b_coef.data, tf.dzbar(grid))
              + np.einsum("xyab,xyb->xya", coefs.q_coef.data, w))
        dphi = weight.dPhi(grid.nodes_z())
        gx = tf.sample(grid, 1, 0)
        gy = tf.sample(grid, 0, 1)
        # grad(u e^{tau phi}) = (grad u + tau u grad phi) e^{tau phi};
        # grad phi = (Re dPhi, -Im dPhi) for holomorphic Phi
        px, py = dphi.real, -dphi.imag
        h1 = (_weighted_l2(w, wexp, grid) ** 2
              + _weighted_l2(gx + tau * px[:, :, None] * w, wexp, grid) ** 2
              + _weighted_l2(gy + tau * py[:, :, None] * w, wexp, grid) ** 2)
        lhs = (tau * _weighted_l2(w, wexp, grid) ** 2 + h1
               + tau ** 2 * _weighted_l2(np.abs(dphi)[:, :, None] * w, wexp, grid) ** 2)
        rhs = _weighted_l2(lu, wexp, grid) ** 2
        from .grid import GAMMA_0
        uf = VectorField(grid, w)
        for label in (GAMMA_0, GAMMA_TILDE):
            if label not in partition.labels.values():
                continue
            dn = normal_derivative(uf, partition, label)
            ii, jj, _, _ = partition.nodes(label)
            aw = partition.arc_weights(label)
            bterm = float(np.sum(aw[:, None] * np.abs(dn) ** 2
                                 * (wexp[ii, jj] ** 2)[:, None]))
            if label == GAMMA_0:
                lhs += bterm
            else:
                rhs += tau * bterm
        return float(np.sqrt(lhs)), float(np.sqrt(rhs))
    raise LabError(f"unknown probe kind {kind!r}")


def full_operator_setup(grid: Grid2D):
    """Partition/weight pair meeting the side conditions of the full probe.

    Only the left edge is hidden; the quadratic phase centered on it has
    vanishing imaginary part there and its critical point sits on the
    hidden arc.  The real part then peaks on an observed arc, which is
    what lets the observed-flux term control the left side.
    """
    from .grid import GAMMA_0
    from .weights import weight_catalog
    part = BoundaryPartition(grid, {"left": GAMMA_0, "bottom": GAMMA_TILDE,
                                    "right": GAMMA_TILDE, "top": GAMMA_TILDE})
    w = weight_catalog("quadratic", {"c": 0.5j}, partition=part)
    return part, w


# ---------------------------------------------------------------------------
# Corollary residual logic

def corollary_pipeline(case: str, t1: CoefficientTriple,
                       t2: CoefficientTriple) -> dict:
    """Case-reduced residual equations of the uniqueness corollary.

    Given the case's shared coefficient, evaluates the equations the two
    relations collapse to; this is residual logic, not a uniqueness proof.
    """
    if t1.grid != t2.grid or t1.n_sys != t2.n_sys:
        raise GridError("triples live on different grids")
    grid = t1.grid
    dA = t1.a_coef.data - t2.a_coef.data
    dB = t1.b_coef.data - t2.b_coef.data
    dQ = t1.q_coef.data - t2.q_coef.data

    def mm(a, b):
        return np.einsum("xyab,xybc->xyac", a, b)

    def summarize(name, r):
        f = MatrixField(grid, r)
        return name, {"l2": f.l2(), "max": f.max_abs()}

    tol = 1e-12
    if case == "Q_known":
        if np.max(np.abs(dQ)) > tol:
            raise LabError("Q coefficients differ; Q_known case rejected")
        r1 = 2 * dz_array(dA, grid) + mm(t2.b_coef.data, dA) + mm(dB, t1.a_coef.data)
        r2 = 2 * dzbar_array(dB, grid) + mm(t2.a_coef.data, dB) + mm(dA, t1.b_coef.data)
        res = dict([summarize("coupled_first", r1), summarize("coupled_second", r2)])
    elif case == "B_known":
        if np.max(np.abs(dB)) > tol:
            raise LabError("B coefficients differ; B_known case rejected")
        r13 = 2 * dz_array(dA, grid) + mm(t2.b_coef.data, dA) - mm(dA, t1.b_coef.data)
        sub = mm(dA, t1.b_coef.data) - dQ
        res = dict([summarize("case_reduced", r13), summarize("substitution", sub)])
    elif case == "A_known":
        if np.max(np.abs(dA)) > tol:
            raise LabError("A coefficients differ; A_known case rejected")
        r = 2 * dzbar_array(dB, grid) + mm(t2.a_coef.data, dB) - mm(dB, t1.a_coef.data)
        sub = mm(dB, t1.a_coef.data) - dQ
        res = dict([summarize("case_reduced", r), summarize("substitution", sub)])
    else:
        raise LabError(f"unknown case {case!r}")
    return {"case": case, "residuals": res}
