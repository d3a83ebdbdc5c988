"""Holomorphic phase weights, critical points, and stationary phase.

A weight is Phi(z) = phi + i*psi with closed-form first and second
z-derivatives.  Its imaginary part is a harmonic Morse function whose
saddles drive the oscillatory-integral asymptotics; the catalog carries
honest condition flags for each instance instead of the existence
constructions they replace.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import GridError, ConvergenceError, LabError
from .grid import Grid2D, BoundaryPartition, GAMMA_0, GAMMA_TILDE, remark_partition

_NEWTON_TOL = 1e-12
_NEWTON_MAX_ITER = 50


@dataclass(frozen=True)
class HolomorphicWeight:
    """Closed-form holomorphic weight from the catalog.

    kind: 'linear' (alpha*z), 'quadratic' ((z-c)^2), or
    'cubic' ((z-c)^3/3 - m*(z-c)).
    """

    kind: str
    params: dict
    condition_flags: dict = field(default_factory=dict)

    def Phi(self, z):
        z = np.asarray(z, dtype=complex)
        p = self.params
        if self.kind == "linear":
            return p["alpha"] * z
        if self.kind == "quadratic":
            return (z - p["c"]) ** 2
        if self.kind == "cubic":
            w = z - p["c"]
            return w ** 3 / 3.0 - p["m"] * w
        raise LabError(f"unknown weight kind {self.kind!r}")

    def dPhi(self, z):
        z = np.asarray(z, dtype=complex)
        p = self.params
        if self.kind == "linear":
            return np.broadcast_to(np.asarray(p["alpha"], dtype=complex), z.shape).copy()
        if self.kind == "quadratic":
            return 2.0 * (z - p["c"])
        if self.kind == "cubic":
            return (z - p["c"]) ** 2 - p["m"]
        raise LabError(f"unknown weight kind {self.kind!r}")

    def d2Phi(self, z):
        z = np.asarray(z, dtype=complex)
        p = self.params
        if self.kind == "linear":
            return np.zeros(z.shape, dtype=complex)
        if self.kind == "quadratic":
            return np.full(z.shape, 2.0, dtype=complex)
        if self.kind == "cubic":
            return 2.0 * (z - p["c"])
        raise LabError(f"unknown weight kind {self.kind!r}")

    def phi(self, z):
        return self.Phi(z).real

    def psi(self, z):
        return self.Phi(z).imag

    def psi_hessian(self, z: complex) -> np.ndarray:
        """Hessian of psi at a point; [[Im P'', Re P''], [Re P'', -Im P'']]."""
        d2 = complex(self.d2Phi(np.asarray(z)))
        return np.array([[d2.imag, d2.real], [d2.real, -d2.imag]])

    def closed_form_critical_points(self) -> list[complex]:
        p = self.params
        if self.kind == "linear":
            return []
        if self.kind == "quadratic":
            return [complex(p["c"])]
        if self.kind == "cubic":
            r = cmath.sqrt(p["m"])
            return [complex(p["c"]) + r, complex(p["c"]) - r]
        raise LabError(f"unknown weight kind {self.kind!r}")

    def to_json_dict(self) -> dict:
        params = {}
        for k, v in self.params.items():
            if isinstance(v, complex):
                params[k] = [v.real, v.imag]
            else:
                params[k] = v
        return {"kind": self.kind, "params": params}


@dataclass(frozen=True)
class CriticalPoint:
    """Nondegenerate zero of dPhi/dz, refined off-grid by Newton iteration."""

    location: complex
    psi_value: float
    hessian: np.ndarray
    margin: float  # |d2Phi| at the point

    def __post_init__(self):
        if self.margin <= 0.0:
            raise LabError("degenerate critical point")


@dataclass(frozen=True)
class CarlemanConvexWeight:
    """Convexified weight phi_c = exp(lam * psi_c) with linear psi_c.

    psi_c = scale * (gx*x + gy*y + offset); |grad psi_c| > 0 on the whole
    closed rectangle by construction.
    """

    gx: float
    gy: float
    lam: float
    scale: float = 1.0
    offset: float = 0.0

    def __post_init__(self):
        if self.lam < 1.0:
            raise LabError("convexification parameter must be >= 1")
        if self.scale * np.hypot(self.gx, self.gy) <= 0.0:
            raise LabError("psi_c must have a nonvanishing gradient")

    def psi_c(self, X, Y):
        return self.scale * (self.gx * X + self.gy * Y + self.offset)

    def phi_c(self, X, Y):
        return np.exp(self.lam * self.psi_c(X, Y))

    def min_grad_psi(self, grid: Grid2D) -> float:
        return abs(self.scale) * float(np.hypot(self.gx, self.gy))


def _domain_contains(grid: Grid2D, z: complex, pad: float = 0.0) -> bool:
    return (grid.x_min - pad <= z.real <= grid.x_max + pad
            and grid.y_min - pad <= z.imag <= grid.y_max + pad)


def weight_catalog(kind: str, params: dict,
                   partition: BoundaryPartition | None = None) -> HolomorphicWeight:
    """Build a catalog weight and evaluate its condition flags honestly.

    Flags are evaluated against the given boundary partition (default:
    the unit square with observed top/bottom edges).
    """
    if partition is None:
        partition = remark_partition(Grid2D(nx=33, ny=33))
    grid = partition.grid

    params = dict(params)
    if kind == "quadratic":
        c = complex(params["c"])
        if not _domain_contains(grid, c):
            raise LabError(f"quadratic center {c} outside the closed domain")
    elif kind == "cubic":
        c = complex(params["c"])
        if not _domain_contains(grid, c):
            raise LabError(f"cubic center {c} outside the closed domain")
    elif kind != "linear":
        raise LabError(f"unknown weight kind {kind!r}")

    w = HolomorphicWeight(kind=kind, params=params)
    crit = w.closed_form_critical_points()

    flags = {"holomorphic": True}  # closed-form: dPhi/dzbar vanishes identically

    i0, j0, _, _ = partition.nodes(GAMMA_0) if GAMMA_0 in partition.labels.values() else (None,) * 4
    Z = grid.nodes_z()
    if i0 is not None:
        flags["im_vanishes_on_gamma0"] = bool(
            np.max(np.abs(w.psi(Z[i0, j0]))) < 1e-12)
    else:
        flags["im_vanishes_on_gamma0"] = True  # vacuous

    flags["nondegenerate_critical_points"] = all(
        abs(w.d2Phi(np.asarray(p))) > 1e-12 for p in crit)

    it, jt, _, _ = partition.nodes(GAMMA_TILDE)
    zt = Z[it, jt]
    flags["critical_points_off_gamma_tilde"] = all(
        np.min(np.abs(zt - p)) > 1e-8 for p in crit)

    return HolomorphicWeight(kind=kind, params=params, condition_flags=flags)


def weight_from_json_dict(d: dict) -> HolomorphicWeight:
    params = {}
    for k, v in d["params"].items():
        params[k] = complex(v[0], v[1]) if isinstance(v, list) else v
    return weight_catalog(d["kind"], params)


def find_critical_points(w: HolomorphicWeight, grid: Grid2D) -> list[CriticalPoint]:
    """Sign-change cell scan on dPhi followed by complex Newton refinement."""
    Z = grid.nodes_z()
    d = w.dPhi(Z)
    re, im = d.real, d.imag

    def changes(a):
        # sign change (or zero) across any corner pair of each cell
        c00, c10, c01, c11 = a[:-1, :-1], a[1:, :-1], a[:-1, 1:], a[1:, 1:]
        mx = np.maximum(np.maximum(c00, c10), np.maximum(c01, c11))
        mn = np.minimum(np.minimum(c00, c10), np.minimum(c01, c11))
        return (mn <= 0) & (mx >= 0)

    cells = np.argwhere(changes(re) & changes(im))
    points: list[complex] = []
    for ci, cj in cells:
        z = Z[ci, cj] + 0.5 * (grid.h_x + 1j * grid.h_y)
        ok = False
        for _ in range(_NEWTON_MAX_ITER):
            dp = complex(w.dPhi(np.asarray(z)))
            if abs(dp) < _NEWTON_TOL:
                ok = True
                break
            d2 = complex(w.d2Phi(np.asarray(z)))
            if d2 == 0:
                break
            z = z - dp / d2
        if not ok:
            raise ConvergenceError(
                f"Newton refinement failed to converge in cell ({ci}, {cj})")
        if not _domain_contains(grid, z, pad=1e-9):
            continue
        if all(abs(z - p) > 10 * max(grid.h_x, grid.h_y) * 1e-3 + 1e-9
               for p in points):
            points.append(z)

    out = []
    for z in points:
        d2 = abs(complex(w.d2Phi(np.asarray(z))))
        out.append(CriticalPoint(location=z, psi_value=float(w.psi(np.asarray(z))),
                                 hessian=w.psi_hessian(z), margin=d2))
    return out


def resolution_nodes_per_period(w: HolomorphicWeight, grid: Grid2D, tau: float) -> float:
    """Grid nodes per oscillation period of exp(2 i tau psi), worst case."""
    Z = grid.nodes_z()
    grad = 2.0 * np.max(np.abs(w.dPhi(Z)))  # |grad psi| = |dPhi| -> phase grad 2 tau |dPhi|
    if tau == 0 or grad == 0:
        return np.inf
    wavelength = 2 * np.pi / (2 * abs(tau) * np.max(np.abs(w.dPhi(Z))))
    return wavelength / max(grid.h_x, grid.h_y)


def oscillatory_integral(g, w: HolomorphicWeight, tau: float, grid: Grid2D) -> complex:
    """Tensor trapezoid quadrature of the phase integral of g against exp(2 i tau psi)."""
    gd = np.asarray(getattr(g, "data", g))
    if gd.ndim == 3:
        gd = gd[:, :, 0]
    if gd.shape != grid.shape:
        raise GridError("sample shape does not match the grid")
    if resolution_nodes_per_period(w, grid, tau) < 8:
        warnings.warn("fewer than 8 nodes per oscillation period at this tau",
                      stacklevel=2)
    Z = grid.nodes_z()
    return complex(np.sum(grid.quad_weights() * gd * np.exp(2j * tau * w.psi(Z))))


def stationary_phase_leading(g, w: HolomorphicWeight, point: CriticalPoint,
                             tau: float, grid: Grid2D | None = None) -> complex:
    """Leading stationary-phase term of the phase integral at one critical point.

    (2 pi / (2 tau)) |det psi''|^{-1/2} e^{i pi sigma / 4} g(z~) e^{2 i tau psi(z~)}
    with sigma the Hessian signature (0 for the harmonic saddles of the
    catalog).  ``g`` may be a callable of z or a field sampled on ``grid``.
    """
    det = float(np.linalg.det(point.hessian))
    if abs(det) < 1e-12:
        raise LabError("degenerate Hessian at the stationary point")
    eigs = np.linalg.eigvalsh(point.hessian)
    sigma = int(np.sum(eigs > 0) - np.sum(eigs < 0))

    z = point.location
    if callable(g):
        g0 = complex(g(z))
    else:
        if grid is None:
            raise LabError("grid required to interpolate a sampled g")
        gd = np.asarray(getattr(g, "data", g))
        if gd.ndim == 3:
            gd = gd[:, :, 0]
        interp_r = RegularGridInterpolator((grid.xs(), grid.ys()), gd.real,
                                           method="cubic")
        interp_i = RegularGridInterpolator((grid.xs(), grid.ys()), gd.imag,
                                           method="cubic")
        g0 = complex(interp_r((z.real, z.imag)) + 1j * interp_i((z.real, z.imag)))

    pref = (2 * np.pi / (2 * tau)) * abs(det) ** -0.5
    return pref * np.exp(1j * np.pi * sigma / 4) * g0 * np.exp(2j * tau * point.psi_value)
