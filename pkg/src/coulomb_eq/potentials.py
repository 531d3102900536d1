"""Pair-interaction kernels and energy derivatives in chart coordinates.

The energy of a configuration is ``sum_{i<j} q_i q_j * phi(d_ij)`` for a
pluggable kernel ``phi`` (inverse-distance, inverse power, logarithmic).

For the torus space the chart is simply the two free central angles and
derivatives are assembled from the per-pair angle derivatives.  For the
polygon space derivatives are first computed in the full coordinates of
the movable vertices (vertex 0 stays pinned), then projected onto the
tangent space of the perimeter constraint intersected with the
complement of the rotation direction.  That projected chart has
dimension ``2*(n-2)`` and is also what the finite-difference oracles
probe, via the scaling retraction ``y -> y / perimeter(y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .spaces import (
    Config,
    ChargeVector,
    PolygonConfig,
    TorusConfig,
    pairwise_distances,
)
from .spaces import POLE_RADIUS_FACTOR

EPS = float(np.finfo(float).eps)
#: default relative step of the finite-difference gradient
FD_GRADIENT_STEP = 1e-5
#: default relative step of the finite-difference Hessian; the larger
#: value keeps the double-difference rounding floor well below the
#: advertised tolerances
FD_HESSIAN_STEP = EPS ** 0.25


class PoleError(ValueError):
    """Raised when a configuration with coincident charges is evaluated."""


@dataclass(frozen=True)
class PotentialSpec:
    """Interaction kernel: ``coulomb`` (1/d), ``power`` (1/d**k, k > 1) or ``log``."""

    kind: str
    exponent: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in ("coulomb", "power", "log"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "power" and not self.exponent > 1.0:
            raise ValueError("power-law exponent must exceed 1")

    @classmethod
    def coulomb(cls) -> "PotentialSpec":
        return cls("coulomb")

    @classmethod
    def power(cls, k: float) -> "PotentialSpec":
        return cls("power", float(k))

    @classmethod
    def log(cls) -> "PotentialSpec":
        return cls("log")

    @classmethod
    def parse(cls, text: str) -> "PotentialSpec":
        """Parse a CLI-style selector: ``coulomb``, ``power:K`` or ``log``."""
        t = text.strip().lower()
        if t == "coulomb":
            return cls.coulomb()
        if t == "log":
            return cls.log()
        if t.startswith("power:"):
            return cls.power(float(t.split(":", 1)[1]))
        raise ValueError(f"unknown potential {text!r}")

    @property
    def label(self) -> str:
        return f"power:{self.exponent:g}" if self.kind == "power" else self.kind


def kernel_eval(spec: PotentialSpec, d: float) -> tuple[float, float, float]:
    """Kernel value and first two derivatives at distance ``d > 0``."""
    if not d > 0.0:
        raise ValueError(f"kernel needs a positive distance, got {d!r}")
    if spec.kind == "coulomb":
        inv = 1.0 / d
        return inv, -inv * inv, 2.0 * inv ** 3
    if spec.kind == "power":
        k = spec.exponent
        v = d ** -k
        return v, -k * v / d, k * (k + 1.0) * v / (d * d)
    return math.log(d), 1.0 / d, -1.0 / (d * d)


@dataclass(frozen=True)
class EnergyReport:
    """Energy with chart-coordinate derivatives at a configuration."""

    value: float
    gradient: np.ndarray
    hessian: np.ndarray
    pole_flag: bool


def _pair_terms(n: int):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def energy_of_points(points: np.ndarray, charges: ChargeVector,
                     spec: PotentialSpec | None = None) -> float:
    """Energy of raw planar points (no perimeter normalization applied)."""
    spec = spec or PotentialSpec.coulomb()
    q = charges.array
    total = 0.0
    for i, j in _pair_terms(points.shape[0]):
        d = float(np.linalg.norm(points[i] - points[j]))
        total += q[i] * q[j] * kernel_eval(spec, d)[0]
    return total


def energy(config: Config, charges: ChargeVector,
           spec: PotentialSpec | None = None) -> float:
    """Total pair energy; ``inf`` when the configuration sits on a pole."""
    spec = spec or PotentialSpec.coulomb()
    _check_charges(config, charges)
    if config.has_pole:
        return math.inf
    d = pairwise_distances(config)
    q = charges.array
    total = 0.0
    for i, j in _pair_terms(len(charges)):
        total += q[i] * q[j] * kernel_eval(spec, float(d[i, j]))[0]
    return total


def _check_charges(config: Config, charges: ChargeVector) -> None:
    n = config.n if isinstance(config, PolygonConfig) else 3
    if len(charges) != n:
        raise ValueError(f"need {n} charges, got {len(charges)}")


def _require_regular(config: Config) -> None:
    if config.has_pole:
        raise PoleError("configuration has coincident charges")


# ---------------------------------------------------------------------------
# polygon space: full-coordinate derivatives and the constrained chart
# ---------------------------------------------------------------------------

def polygon_full_gradient(points: np.ndarray, charges: ChargeVector,
                          spec: PotentialSpec) -> np.ndarray:
    """Gradient of the energy w.r.t. the movable vertices, flattened."""
    n = points.shape[0]
    q = charges.array
    grad = np.zeros((n, 2))
    for i, j in _pair_terms(n):
        delta = points[i] - points[j]
        d = float(np.linalg.norm(delta))
        _, dphi, _ = kernel_eval(spec, d)
        pull = q[i] * q[j] * dphi / d * delta
        grad[i] += pull
        grad[j] -= pull
    return grad[1:].ravel()


def polygon_full_hessian(points: np.ndarray, charges: ChargeVector,
                         spec: PotentialSpec) -> np.ndarray:
    """Hessian of the energy w.r.t. the movable vertices, flattened."""
    n = points.shape[0]
    q = charges.array
    hess = np.zeros((2 * n, 2 * n))
    eye = np.eye(2)
    for i, j in _pair_terms(n):
        delta = points[i] - points[j]
        d = float(np.linalg.norm(delta))
        _, dphi, ddphi = kernel_eval(spec, d)
        u = delta / d
        block = q[i] * q[j] * (ddphi * np.outer(u, u) + dphi / d * (eye - np.outer(u, u)))
        si, sj = 2 * i, 2 * j
        hess[si:si + 2, si:si + 2] += block
        hess[sj:sj + 2, sj:sj + 2] += block
        hess[si:si + 2, sj:sj + 2] -= block
        hess[sj:sj + 2, si:si + 2] -= block
    return hess[2:, 2:]


def perimeter_value(points: np.ndarray) -> float:
    return float(np.linalg.norm(points - np.roll(points, -1, axis=0), axis=1).sum())


def perimeter_gradient(points: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    grad = np.zeros((n, 2))
    for i in range(n):
        j = (i + 1) % n
        delta = points[i] - points[j]
        u = delta / np.linalg.norm(delta)
        grad[i] += u
        grad[j] -= u
    return grad[1:].ravel()


def perimeter_hessian(points: np.ndarray) -> np.ndarray:
    n = points.shape[0]
    hess = np.zeros((2 * n, 2 * n))
    eye = np.eye(2)
    for i in range(n):
        j = (i + 1) % n
        delta = points[i] - points[j]
        d = float(np.linalg.norm(delta))
        u = delta / d
        block = (eye - np.outer(u, u)) / d
        si, sj = 2 * i, 2 * j
        hess[si:si + 2, si:si + 2] += block
        hess[sj:sj + 2, sj:sj + 2] += block
        hess[si:si + 2, sj:sj + 2] -= block
        hess[sj:sj + 2, si:si + 2] -= block
    return hess[2:, 2:]


def rotation_direction(points: np.ndarray) -> np.ndarray:
    """Tangent of the rotation orbit at a configuration, flattened."""
    rot = np.column_stack([-points[1:, 1], points[1:, 0]])
    return rot.ravel()


def chart_basis(points: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the constrained chart at a configuration.

    Columns span the null space of the perimeter-constraint normal and
    the rotation direction, i.e. the ``2*(n-2)``-dimensional tangent of
    the quotient space.
    """
    rows = np.vstack([perimeter_gradient(points), rotation_direction(points)])
    _, _, vt = np.linalg.svd(rows)
    return vt[2:].T


def aligned_chart_basis(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Chart basis of an aligned (x-axis) configuration, split into the
    in-line block and the transverse block.

    Returns ``(Zx, Zy)``: in-line motions orthogonal to the perimeter
    normal, and transverse motions orthogonal to the rotation direction.
    """
    if np.abs(points[:, 1]).max() > 1e-9 * np.abs(points[:, 0]).max():
        raise ValueError("aligned basis requested at a non-aligned configuration")
    m = 2 * (points.shape[0] - 1)
    x_idx = np.arange(0, m, 2)
    y_idx = np.arange(1, m, 2)
    g_x = perimeter_gradient(points)[x_idx]
    r_y = rotation_direction(points)[y_idx]
    zx_small = np.linalg.svd(g_x[None, :])[2][1:].T
    zy_small = np.linalg.svd(r_y[None, :])[2][1:].T
    zx = np.zeros((m, zx_small.shape[1]))
    zy = np.zeros((m, zy_small.shape[1]))
    zx[x_idx] = zx_small
    zy[y_idx] = zy_small
    return zx, zy


def _polygon_chart_derivatives(config: PolygonConfig, charges: ChargeVector,
                               spec: PotentialSpec,
                               basis: np.ndarray | None = None,
                               ) -> tuple[np.ndarray, np.ndarray]:
    pts = config.points
    z = chart_basis(pts) if basis is None else basis
    g_full = polygon_full_gradient(pts, charges, spec)
    h_full = polygon_full_hessian(pts, charges, spec)
    # multiplier of the scaling retraction; equals the Lagrange
    # multiplier of the perimeter constraint at critical points
    mult = -float(pts[1:].ravel() @ g_full)
    h_chart = z.T @ (h_full + mult * perimeter_hessian(pts)) @ z
    return z.T @ g_full, 0.5 * (h_chart + h_chart.T)


# ---------------------------------------------------------------------------
# torus space: the (alpha1, alpha2) chart is global
# ---------------------------------------------------------------------------

def _torus_pair_data(config: TorusConfig, charges: ChargeVector,
                     spec: PotentialSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-pair energy derivatives w.r.t. the pair's own central angle.

    Pair ``i`` joins the two points other than point ``i``; its distance
    depends only on ``alpha_i`` through the cosine rule.
    """
    r = np.array(config.radii)
    q = charges.array
    alphas = np.array(config.alphas)
    d = np.array(config.side_distances())
    other = [(1, 2), (2, 0), (0, 1)]
    u1 = np.empty(3)
    u2 = np.empty(3)
    vals = np.empty(3)
    for i, (a, b) in enumerate(other):
        rr = r[a] * r[b]
        qq = q[a] * q[b]
        phi, dphi, ddphi = kernel_eval(spec, float(d[i]))
        sin_a, cos_a = math.sin(alphas[i]), math.cos(alphas[i])
        d1 = rr * sin_a / d[i]
        d2 = rr * cos_a / d[i] - (rr * sin_a) ** 2 / d[i] ** 3
        vals[i] = qq * phi
        u1[i] = qq * dphi * d1
        u2[i] = qq * (ddphi * d1 * d1 + dphi * d2)
    return vals, u1, u2


def _torus_chart_derivatives(config: TorusConfig, charges: ChargeVector,
                             spec: PotentialSpec) -> tuple[np.ndarray, np.ndarray]:
    _, u1, u2 = _torus_pair_data(config, charges, spec)
    grad = np.array([u1[0] - u1[2], u1[1] - u1[2]])
    hess = np.array([
        [u2[0] + u2[2], u2[2]],
        [u2[2], u2[1] + u2[2]],
    ])
    return grad, hess


# ---------------------------------------------------------------------------
# public chart-derivative API
# ---------------------------------------------------------------------------

def gradient(config: Config, charges: ChargeVector,
             spec: PotentialSpec | None = None) -> np.ndarray:
    """Analytic energy gradient in the chart of the configuration space."""
    spec = spec or PotentialSpec.coulomb()
    _check_charges(config, charges)
    _require_regular(config)
    if isinstance(config, PolygonConfig):
        return _polygon_chart_derivatives(config, charges, spec)[0]
    return _torus_chart_derivatives(config, charges, spec)[0]


def hessian(config: Config, charges: ChargeVector,
            spec: PotentialSpec | None = None) -> np.ndarray:
    """Analytic energy Hessian in the chart of the configuration space."""
    spec = spec or PotentialSpec.coulomb()
    _check_charges(config, charges)
    _require_regular(config)
    if isinstance(config, PolygonConfig):
        return _polygon_chart_derivatives(config, charges, spec)[1]
    return _torus_chart_derivatives(config, charges, spec)[1]


def energy_report(config: Config, charges: ChargeVector,
                  spec: PotentialSpec | None = None) -> EnergyReport:
    """Energy, chart gradient and chart Hessian in one pass."""
    spec = spec or PotentialSpec.coulomb()
    _check_charges(config, charges)
    if config.has_pole:
        dim = 2 * (config.n - 2) if isinstance(config, PolygonConfig) else 2
        nan = np.full(dim, math.nan)
        return EnergyReport(math.inf, nan, np.full((dim, dim), math.nan), True)
    if isinstance(config, PolygonConfig):
        g, h = _polygon_chart_derivatives(config, charges, spec)
    else:
        g, h = _torus_chart_derivatives(config, charges, spec)
    return EnergyReport(energy(config, charges, spec), g, h, False)


def dilation_derivative(config: PolygonConfig, charges: ChargeVector,
                        spec: PotentialSpec | None = None) -> float:
    """Derivative of the energy along uniform scaling of the configuration.

    Strictly negative for the inverse-distance and inverse-power
    kernels, which is why no equilibrium exists at sub-maximal
    perimeter: inflating the polygon always lowers the energy.
    """
    spec = spec or PotentialSpec.coulomb()
    _require_regular(config)
    pts = config.points
    return float(pts[1:].ravel() @ polygon_full_gradient(pts, charges, spec))


# ---------------------------------------------------------------------------
# finite-difference oracles
# ---------------------------------------------------------------------------

def _chart_probe(config: Config, charges: ChargeVector, spec: PotentialSpec,
                 ) -> tuple[Callable[[np.ndarray], float], int, float]:
    """Energy as a function of chart displacements around ``config``.

    For the polygon the displacement is applied through the chart basis
    and the perimeter is restored by uniform rescaling; for the torus
    the displacement perturbs the two free angles directly.
    """
    if isinstance(config, PolygonConfig):
        base = config.points
        z = chart_basis(base)
        dim = z.shape[1]

        def probe(u: np.ndarray) -> float:
            pts = base.copy()
            pts[1:] += (z @ u).reshape(-1, 2)
            pts /= perimeter_value(pts)
            return energy_of_points(pts, charges, spec)

        return probe, dim, config.diameter
    a1, a2 = config.angles
    radii = config.radii

    def probe(u: np.ndarray) -> float:
        return energy(TorusConfig(radii, (a1 + u[0], a2 + u[1])), charges, spec)

    # the torus chart is angular, so the probe step is an O(1) radian scale
    return probe, 2, 1.0


def fd_gradient(config: Config, charges: ChargeVector,
                spec: PotentialSpec | None = None,
                step: float | None = None) -> np.ndarray:
    """Central-difference gradient in the same chart as ``gradient``."""
    spec = spec or PotentialSpec.coulomb()
    _require_regular(config)
    probe, dim, scale = _chart_probe(config, charges, spec)
    h = FD_GRADIENT_STEP * scale if step is None else float(step)
    _check_step(config, h)
    out = np.empty(dim)
    for k in range(dim):
        e = np.zeros(dim)
        e[k] = h
        out[k] = (probe(e) - probe(-e)) / (2.0 * h)
    return out


def fd_hessian(config: Config, charges: ChargeVector,
               spec: PotentialSpec | None = None,
               step: float | None = None) -> np.ndarray:
    """Central second differences of the energy in the same chart."""
    spec = spec or PotentialSpec.coulomb()
    _require_regular(config)
    probe, dim, scale = _chart_probe(config, charges, spec)
    h = FD_HESSIAN_STEP * scale if step is None else float(step)
    _check_step(config, h)
    center = probe(np.zeros(dim))
    out = np.empty((dim, dim))
    for k in range(dim):
        ek = np.zeros(dim)
        ek[k] = h
        out[k, k] = (probe(ek) - 2.0 * center + probe(-ek)) / (h * h)
        for l in range(k + 1, dim):
            el = np.zeros(dim)
            el[l] = h
            val = (probe(ek + el) - probe(ek - el) - probe(-ek + el) + probe(-ek - el)) \
                / (4.0 * h * h)
            out[k, l] = out[l, k] = val
    return out


def _check_step(config: Config, step: float) -> None:
    if not step > 0.0:
        raise ValueError("finite-difference step must be positive")
    if step >= 0.5 * _min_separation(config):
        raise ValueError("finite-difference step collides with the pole radius")


def _min_separation(config: Config) -> float:
    d = pairwise_distances(config)
    n = d.shape[0]
    return float(min(d[i, j] for i in range(n) for j in range(i + 1, n)))


# ---------------------------------------------------------------------------
# stationarity system consumed by the solver
# ---------------------------------------------------------------------------

def polygon_free_indices(n: int) -> np.ndarray:
    """Indices of the flattened movable coordinates kept by the gauge.

    The y-coordinate of vertex 1 is pinned to zero; rotation invariance
    makes its stationarity equation redundant whenever vertex 1 is off
    the origin.
    """
    return np.array([k for k in range(2 * (n - 1)) if k != 1])


def polygon_stationarity(points: np.ndarray, multiplier: float,
                         charges: ChargeVector, spec: PotentialSpec,
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Residual and Jacobian of the constrained stationarity system.

    Unknowns are the gauge-free vertex coordinates plus the perimeter
    multiplier; equations are the corresponding components of
    ``grad E + multiplier * grad perimeter`` plus the perimeter defect.
    """
    n = points.shape[0]
    keep = polygon_free_indices(n)
    g_e = polygon_full_gradient(points, charges, spec)
    g_l = perimeter_gradient(points)
    res = np.empty(keep.size + 1)
    res[:-1] = (g_e + multiplier * g_l)[keep]
    res[-1] = perimeter_value(points) - 1.0
    h = polygon_full_hessian(points, charges, spec) \
        + multiplier * perimeter_hessian(points)
    jac = np.zeros((keep.size + 1, keep.size + 1))
    jac[:-1, :-1] = h[np.ix_(keep, keep)]
    jac[:-1, -1] = g_l[keep]
    jac[-1, :-1] = g_l[keep]
    return res, jac


def least_squares_multiplier(points: np.ndarray, charges: ChargeVector,
                             spec: PotentialSpec) -> float:
    """Perimeter multiplier minimizing the stationarity residual."""
    g_e = polygon_full_gradient(points, charges, spec)
    g_l = perimeter_gradient(points)
    return -float(g_e @ g_l) / float(g_l @ g_l)


def polygon_pole_radius() -> float:
    return POLE_RADIUS_FACTOR

