"""Critical-point search on both configuration spaces.

Closed forms cover the three-charge cases: the collinear equilibria
(one per choice of intermediate vertex) and the triangle equilibrium
whose side lengths are proportional to inverse square roots of the
charges.  Everything else runs through multistart Newton polishing of
the stationarity system: a Lagrange system with explicit perimeter
constraint for polygons, the plain two-angle gradient for the torus.
Converged points are deduplicated modulo the rotation gauge, paired
with their reflection partners, and classified by the spectrum of the
constrained Hessian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import potentials as pot
from .inverse import stationarity_relation_residual
from .morse import classify_spectrum
from .potentials import PotentialSpec
from .spaces import (
    ChargeVector,
    Config,
    PolygonConfig,
    TorusConfig,
    TORUS_ALIGNED_LABELS,
    alignment_defect,
    apply_involution,
    canonicalize,
    distance_key,
    reduce_angle,
)

TWO_PI = 2.0 * math.pi

#: closed-form relation residual accepted for a reported critical point
RELATION_TOL = 1e-9
#: deterministic seed for the low-discrepancy multistart pools
MULTISTART_SEED = 20160


@dataclass(frozen=True)
class PolygonSpace:
    """Fixed-perimeter polygons with ``n`` labeled vertices."""

    n: int

    def __post_init__(self) -> None:
        if self.n < 3:
            raise ValueError("polygon space needs n >= 3")

    @property
    def name(self) -> str:
        return f"polygon:{self.n}"


@dataclass(frozen=True)
class TorusSpace:
    """Triples of points on concentric circles of the given radii."""

    radii: tuple[float, float, float]

    def __post_init__(self) -> None:
        r = tuple(float(v) for v in self.radii)
        if len(r) != 3 or not all(v > 0.0 and math.isfinite(v) for v in r):
            raise ValueError("torus space needs three positive radii")
        object.__setattr__(self, "radii", r)

    @property
    def name(self) -> str:
        return "torus:" + ",".join(f"{r:g}" for r in self.radii)


Space = PolygonSpace | TorusSpace


@dataclass(frozen=True)
class SolveSettings:
    """Knobs of the multistart search."""

    grid_density: int = 24
    newton_tol: float = 1e-11
    max_iters: int = 100
    dedup_tol: float = 1e-7
    pole_radius: float | None = None

    def __post_init__(self) -> None:
        if self.grid_density < 8:
            raise ValueError("grid density below 8 gives useless coverage")
        if min(self.newton_tol, self.dedup_tol, self.max_iters) <= 0:
            raise ValueError("tolerances and iteration budget must be positive")
        if self.pole_radius is not None and self.pole_radius <= 0:
            raise ValueError("pole radius must be positive")


@dataclass(frozen=True)
class CriticalPoint:
    """A converged, classified stationary configuration."""

    config: Config
    energy: float
    grad_norm: float
    hessian_eigenvalues: tuple[float, ...]
    morse_index: int
    degenerate: bool
    aligned: bool
    key: tuple[int, ...]
    symmetry_partner: tuple[int, ...] | None = None

    @property
    def kind(self) -> str:
        if self.degenerate:
            return "degenerate"
        dim = len(self.hessian_eigenvalues)
        if self.morse_index == 0:
            return "minimum"
        if self.morse_index == dim:
            return "maximum"
        return "saddle"


# ---------------------------------------------------------------------------
# closed forms for three charges
# ---------------------------------------------------------------------------

def _ratio_exponent(spec: PotentialSpec) -> float:
    """Exponent p such that collinear balance gives d12/d23 = (q1/q3)**p."""
    if spec.kind == "coulomb":
        return 0.5
    if spec.kind == "power":
        return 1.0 / (spec.exponent + 1.0)
    return 1.0


def solve_line_three(charges: ChargeVector,
                     spec: PotentialSpec | None = None) -> list[PolygonConfig]:
    """The three collinear equilibria of three charges, one per choice of
    intermediate vertex (list index = intermediate vertex).

    Each is a segment of length one half (so the cyclic perimeter is
    one); the intermediate vertex divides it according to
    ``d_left / d_right = (q_left / q_right) ** p`` with ``p`` fixed by
    the kernel (one half for the inverse-distance kernel).  The split
    does not depend on the intermediate charge, which is the root of
    the fixing effect.
    """
    if len(charges) != 3:
        raise ValueError("closed form needs exactly three charges")
    spec = spec or PotentialSpec.coulomb()
    p = _ratio_exponent(spec)
    q = charges.array
    out = []
    for mid in range(3):
        left, right = [i for i in range(3) if i != mid]
        ratio = (q[left] / q[right]) ** p
        d_left = 0.5 * ratio / (1.0 + ratio)  # distance from left outer to mid
        coords = np.zeros((3, 2))
        if mid == 0:
            # vertex 0 pinned at the origin sits between vertices 1 and 2
            coords[left] = (-d_left, 0.0)
            coords[right] = (0.5 - d_left, 0.0)
        else:
            coords[mid] = (d_left, 0.0)
            coords[right] = (0.5, 0.0)
        out.append(PolygonConfig.from_points(coords))
    return out


def line_three_energies(charges: ChargeVector,
                        spec: PotentialSpec | None = None) -> list[float]:
    spec = spec or PotentialSpec.coulomb()
    return [pot.energy(cfg, charges, spec) for cfg in solve_line_three(charges, spec)]


def critical_triangle(charges: ChargeVector,
                      spec: PotentialSpec | None = None) -> PolygonConfig | None:
    """The non-collinear equilibrium triangle, or ``None`` if the side
    proportion fails the strict triangle inequality (collinear regime).

    Sides opposite each vertex are proportional to ``q_i ** -p`` with
    the kernel exponent ``p``; for the inverse-distance kernel that is
    the inverse square root of the charge.
    """
    if len(charges) != 3:
        raise ValueError("closed form needs exactly three charges")
    spec = spec or PotentialSpec.coulomb()
    p = _ratio_exponent(spec)
    sides = charges.array ** -p
    sides = sides / sides.sum()
    l1, l2, l3 = sides  # l1 opposite vertex 0, etc.
    if not (l1 < l2 + l3 and l2 < l3 + l1 and l3 < l1 + l2):
        return None
    x = (l3 * l3 + l2 * l2 - l1 * l1) / (2.0 * l3)
    y = math.sqrt(max(l2 * l2 - x * x, 0.0))
    return PolygonConfig.from_points([[0.0, 0.0], [l3, 0.0], [x, y]])


def solve_line_interior(charges: ChargeVector,
                        spec: PotentialSpec | None = None,
                        tol: float = 1e-13,
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Collinear equilibrium with the vertices in index order.

    Vertices sit at increasing positions on a segment of length one
    half (cyclic perimeter one); the interior positions solve the
    one-dimensional stationarity equations.  Returns ``(positions,
    hessian)`` where the Hessian is taken w.r.t. the interior positions
    and its index is the one-dimensional Morse index.
    """
    spec = spec or PotentialSpec.coulomb()
    n = len(charges)
    q = charges.array
    span = 0.5
    x = np.linspace(0.0, span, n)

    def grad_hess(xs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = np.zeros(n)
        h = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d = xs[j] - xs[i]
                _, dphi, ddphi = pot.kernel_eval(spec, abs(d))
                s = math.copysign(1.0, d)
                g[i] += -q[i] * q[j] * dphi * s
                g[j] += q[i] * q[j] * dphi * s
                blk = q[i] * q[j] * ddphi
                h[i, i] += blk
                h[j, j] += blk
                h[i, j] -= blk
                h[j, i] -= blk
        return g, h

    idx = np.arange(1, n - 1)
    for _ in range(80):
        g, h = grad_hess(x)
        gi = g[idx]
        if np.abs(gi).max() < tol:
            break
        step = np.linalg.solve(h[np.ix_(idx, idx)], -gi)
        # keep the ordering: damp steps that would cross a neighbour
        scale = 1.0
        for k, i in enumerate(idx):
            lo, hi = x[i - 1], x[i + 1]
            target = x[i] + step[k]
            if target <= lo or target >= hi:
                scale = min(scale, 0.4 * min(x[i] - lo, hi - x[i]) / (abs(step[k]) + 1e-300))
        x[idx] += scale * step
    g, h = grad_hess(x)
    if np.abs(g[idx]).max() > 1e-9:
        raise RuntimeError("interior line equilibrium did not converge")
    return x, h[np.ix_(idx, idx)]


def line_config_from_positions(positions: np.ndarray) -> PolygonConfig:
    """Embed ordered line positions as an aligned polygon configuration."""
    pts = np.column_stack([positions - positions[0], np.zeros_like(positions)])
    return PolygonConfig.from_points(pts, rescale=True)


def enumerate_aligned(space: Space, charges: ChargeVector,
                      spec: PotentialSpec | None = None) -> list[Config]:
    """All aligned critical configurations of the space.

    Polygon (n=3): the three collinear equilibria.  Torus: the four
    angle labels with every central angle zero or pi, all of which are
    stationary for every positive charge vector.
    """
    spec = spec or PotentialSpec.coulomb()
    if isinstance(space, TorusSpace):
        return [TorusConfig(space.radii, (lab[0], lab[1]))
                for lab in TORUS_ALIGNED_LABELS]
    if space.n == 3:
        return list(solve_line_three(charges, spec))
    raise ValueError("aligned enumeration is closed-form only for n=3; "
                     "use find_critical_points for larger polygons")


# ---------------------------------------------------------------------------
# multistart machinery: polygon
# ---------------------------------------------------------------------------

def _pack(points: np.ndarray, lam: float) -> np.ndarray:
    free = points[1:].ravel()
    return np.concatenate([np.delete(free, 1), [lam]])


def _unpack(u: np.ndarray, n: int) -> tuple[np.ndarray, float]:
    free = np.insert(u[:-1], 1, 0.0)
    pts = np.vstack([np.zeros(2), free.reshape(n - 1, 2)])
    return pts, float(u[-1])


def _min_gap(points: np.ndarray) -> float:
    # raw-array version so mid-iteration states need no config object
    n = points.shape[0]
    best = math.inf
    for i in range(n):
        for j in range(i + 1, n):
            best = min(best, float(np.hypot(*(points[i] - points[j]))))
    return best


def _polish_polygon(points0: np.ndarray, charges: ChargeVector,
                    spec: PotentialSpec, settings: SolveSettings,
                    pole_radius: float) -> PolygonConfig | None:
    """Levenberg-damped Newton on the Lagrange stationarity system."""
    n = points0.shape[0]
    pts = points0.copy()
    if _min_gap(pts) < pole_radius:
        return None
    lam = pot.least_squares_multiplier(pts, charges, spec)
    u = _pack(pts, lam)
    res, jac = pot.polygon_stationarity(pts, lam, charges, spec)
    rnorm = float(np.linalg.norm(res))
    damping = 0.0
    target = min(1e-13, 0.01 * settings.newton_tol)
    for _ in range(settings.max_iters):
        if rnorm < target:
            break
        try:
            if damping == 0.0:
                step = np.linalg.solve(jac, -res)
            else:
                a = jac.T @ jac
                a[np.diag_indices_from(a)] += damping
                step = np.linalg.solve(a, -(jac.T @ res))
        except np.linalg.LinAlgError:
            damping = max(damping * 10.0, 1e-8)
            continue
        trial = u + step
        pts_t, lam_t = _unpack(trial, n)
        if _min_gap(pts_t) < pole_radius or not np.isfinite(pts_t).all():
            damping = max(damping * 10.0, 1e-8)
            if damping > 1e14:
                return None
            continue
        res_t, jac_t = pot.polygon_stationarity(pts_t, lam_t, charges, spec)
        rnorm_t = float(np.linalg.norm(res_t))
        if rnorm_t < rnorm:
            u, res, jac, rnorm = trial, res_t, jac_t, rnorm_t
            damping = 0.0 if rnorm_t < 1e-6 else damping / 3.0
        else:
            damping = max(damping * 10.0, 1e-8)
            if damping > 1e14:
                break
    if rnorm > math.sqrt(settings.newton_tol):
        return None
    pts, _ = _unpack(u, n)
    try:
        cfg = PolygonConfig.from_points(pts)
    except ValueError:
        return None
    if cfg.has_pole:
        return None
    grad = pot.gradient(cfg, charges, spec)
    if float(np.linalg.norm(grad)) > settings.newton_tol:
        return None
    return cfg


def _triangle_from_sides(l1: float, l2: float, l3: float,
                         flip: bool = False) -> np.ndarray | None:
    """Vertex coordinates of a triangle with side i opposite vertex i."""
    if not (l1 < l2 + l3 and l2 < l3 + l1 and l3 < l1 + l2):
        return None
    x = (l3 * l3 + l2 * l2 - l1 * l1) / (2.0 * l3)
    y2 = l2 * l2 - x * x
    if y2 <= 0.0:
        return None
    y = math.sqrt(y2)
    return np.array([[0.0, 0.0], [l3, 0.0], [x, -y if flip else y]])


def _polygon_seeds(space: PolygonSpace, charges: ChargeVector,
                   spec: PotentialSpec, settings: SolveSettings) -> list[np.ndarray]:
    n = space.n
    seeds: list[np.ndarray] = []
    if n == 3:
        for cfg in solve_line_three(charges, spec):
            seeds.append(cfg.points.copy())
        tri = critical_triangle(charges, spec)
        if tri is not None:
            seeds.append(tri.points.copy())
            seeds.append(apply_involution(tri).points.copy())
        g = settings.grid_density
        for i in range(1, g):
            for j in range(1, g - i):
                l1, l2 = i / g, j / g
                l3 = 1.0 - l1 - l2
                for flip in (False, True):
                    tri_pts = _triangle_from_sides(l1, l2, l3, flip)
                    if tri_pts is not None:
                        seeds.append(tri_pts)
        return seeds
    # n >= 4: aligned seeds for sweep orderings plus structured and
    # random convex shapes; coverage is heuristic at this size
    try:
        xs, _ = solve_line_interior(charges, spec)
        seeds.append(np.column_stack([xs, np.zeros(n)]))
    except RuntimeError:
        pass
    for positions in _sweep_position_seeds(n):
        seeds.append(np.column_stack([positions - positions.min(), np.zeros(n)]))
    base = TWO_PI * np.arange(n) / n
    for phase in (0.0, math.pi / n):
        ring = np.column_stack([np.cos(base + phase), np.sin(base + phase)])
        seeds.append(ring)
    rng = np.random.default_rng(MULTISTART_SEED + n)
    count = settings.grid_density ** 2
    for _ in range(count):
        pts = rng.uniform(-1.0, 1.0, size=(n, 2))
        if _min_gap(pts) > 1e-3:
            seeds.append(pts)
    return seeds


def _sweep_position_seeds(n: int) -> list[np.ndarray]:
    """Seed positions for every collinear stratum whose cyclic tour is a
    single sweep (span equal to half the perimeter).

    A stratum is fixed by the choice of leftmost and rightmost vertex:
    the cycle arc from one to the other ascends, the complementary arc
    descends.  Interior vertices start evenly spaced.
    """
    seeds = []
    seen = set()
    for lo in range(n):
        for hi in range(n):
            if lo == hi:
                continue
            rising = [(lo + k) % n for k in range(1, (hi - lo) % n)]
            falling = [(hi + k) % n for k in range(1, (lo - hi) % n)]
            positions = np.empty(n)
            positions[lo] = 0.0
            positions[hi] = 0.5
            for ascending, verts in ((True, rising), (False, falling)):
                ticks = np.linspace(0.0, 0.5, len(verts) + 2)[1:-1]
                if not ascending:
                    # stagger the descending arc so the two arcs never
                    # start on top of each other
                    ticks = ticks[::-1] * 0.85 + 0.04
                for t, v in zip(ticks, verts):
                    positions[v] = t
            key = tuple(np.argsort(positions))
            mirror = tuple(np.argsort(-positions))
            if key in seen or mirror in seen:
                continue
            seen.add(key)
            seeds.append(positions)
    return seeds


# ---------------------------------------------------------------------------
# multistart machinery: torus (vectorized over seeds)
# ---------------------------------------------------------------------------

def _kernel_d1_d2_vec(spec: PotentialSpec, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if spec.kind == "coulomb":
        return -1.0 / d ** 2, 2.0 / d ** 3
    if spec.kind == "power":
        k = spec.exponent
        return -k * d ** -(k + 1.0), k * (k + 1.0) * d ** -(k + 2.0)
    return 1.0 / d, -1.0 / d ** 2


def _torus_batch_derivatives(radii: tuple[float, float, float],
                             charges: ChargeVector, spec: PotentialSpec,
                             angles: np.ndarray, floor: float,
                             ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Gradient (k,2), Hessian (k,2,2) and min distance (k,) per seed.

    Distances are clamped at ``floor`` so pole-adjacent seeds produce
    finite garbage instead of overflow; callers kill those seeds by the
    returned minimum distance.
    """
    r = np.array(radii)
    q = charges.array
    a1 = angles[:, 0]
    a2 = angles[:, 1]
    a3 = TWO_PI - a1 - a2
    alphas = (a1, a2, a3)
    other = ((1, 2), (2, 0), (0, 1))
    u2 = []
    u1 = []
    dmin = np.full(angles.shape[0], np.inf)
    for i in range(3):
        a, b = other[i]
        rr = r[a] * r[b]
        qq = q[a] * q[b]
        cos_a = np.cos(alphas[i])
        sin_a = np.sin(alphas[i])
        d = np.sqrt(np.maximum(r[a] ** 2 + r[b] ** 2 - 2.0 * rr * cos_a, 0.0))
        dmin = np.minimum(dmin, d)
        safe = np.maximum(d, floor)
        dphi, ddphi = _kernel_d1_d2_vec(spec, safe)
        d1 = rr * sin_a / safe
        d2 = rr * cos_a / safe - (rr * sin_a) ** 2 / safe ** 3
        u1.append(qq * dphi * d1)
        u2.append(qq * (ddphi * d1 * d1 + dphi * d2))
    grad = np.stack([u1[0] - u1[2], u1[1] - u1[2]], axis=1)
    hess = np.empty((angles.shape[0], 2, 2))
    hess[:, 0, 0] = u2[0] + u2[2]
    hess[:, 1, 1] = u2[1] + u2[2]
    hess[:, 0, 1] = hess[:, 1, 0] = u2[2]
    return grad, hess, dmin


def _torus_seeds(space: TorusSpace, settings: SolveSettings) -> np.ndarray:
    g = settings.grid_density
    ticks = TWO_PI * (np.arange(g) + 0.5) / g
    grid = np.array([(x, y) for x in ticks for y in ticks])
    aligned = np.array([(lab[0], lab[1]) for lab in TORUS_ALIGNED_LABELS])
    extra = [aligned]
    r = space.radii
    if max(r) - min(r) < 1e-12:
        third = TWO_PI / 3.0
        extra.append(np.array([(third, third), (-third, -third)]))
    # injected seeds go first so the exact representatives win the dedup
    return np.vstack([*extra, grid])


def _solve_torus(space: TorusSpace, charges: ChargeVector, spec: PotentialSpec,
                 settings: SolveSettings, pole_radius: float) -> list[TorusConfig]:
    return _polish_torus_seeds(space, charges, spec, settings, pole_radius,
                               _torus_seeds(space, settings))


def _polish_torus_seeds(space: TorusSpace, charges: ChargeVector,
                        spec: PotentialSpec, settings: SolveSettings,
                        pole_radius: float, seeds: np.ndarray,
                        ) -> list[TorusConfig]:
    angles = np.array(seeds, dtype=float)
    floor = 0.5 * pole_radius
    alive = np.ones(angles.shape[0], dtype=bool)
    target = min(1e-13, 0.01 * settings.newton_tol)
    for _ in range(settings.max_iters):
        grad, hess, dmin = _torus_batch_derivatives(
            space.radii, charges, spec, angles, floor)
        alive &= dmin > pole_radius
        gnorm = np.linalg.norm(grad, axis=1)
        todo = alive & (gnorm > target)
        if not todo.any():
            break
        h = hess[todo]
        g = grad[todo]
        det = h[:, 0, 0] * h[:, 1, 1] - h[:, 0, 1] * h[:, 1, 0]
        ok = np.abs(det) > 1e-14 * np.maximum(1.0, np.abs(h).max(axis=(1, 2)) ** 2)
        step = np.zeros_like(g)
        step[ok, 0] = (-g[ok, 0] * h[ok, 1, 1] + g[ok, 1] * h[ok, 0, 1]) / det[ok]
        step[ok, 1] = (-g[ok, 1] * h[ok, 0, 0] + g[ok, 0] * h[ok, 1, 0]) / det[ok]
        # kill seeds with a singular Hessian, clamp wild steps
        sub_alive = np.where(todo)[0]
        alive[sub_alive[~ok]] = False
        norms = np.linalg.norm(step, axis=1)
        big = norms > 0.5
        step[big] *= (0.5 / norms[big])[:, None]
        angles[todo] += step
    grad, _, dmin = _torus_batch_derivatives(space.radii, charges, spec, angles, floor)
    gnorm = np.linalg.norm(grad, axis=1)
    good = alive & (gnorm <= settings.newton_tol) & (dmin > pole_radius)
    configs = []
    for a1, a2 in angles[good]:
        configs.append(TorusConfig(space.radii, (float(a1), float(a2))))
    return configs


# ---------------------------------------------------------------------------
# dedup, reflection pairing, classification
# ---------------------------------------------------------------------------

def _config_coords(config: Config) -> np.ndarray:
    if isinstance(config, PolygonConfig):
        return config.points.ravel()
    return np.array(config.angles)


def configs_match(a: Config, b: Config, tol: float = 1e-7) -> bool:
    """Whether two configurations coincide within ``tol`` (wrap-aware)."""
    return _same_config(a, b, tol)


def _same_config(a: Config, b: Config, tol: float) -> bool:
    ca, cb = _config_coords(a), _config_coords(b)
    if isinstance(a, TorusConfig):
        diff = np.abs(np.array([reduce_angle(x) for x in ca - cb]))
        return bool(diff.max() < tol)
    return bool(np.abs(ca - cb).max() < tol)


def _compare_coords(config: Config) -> np.ndarray:
    """Coordinates used for dedup comparisons; angles are embedded on the
    circle so mirror-boundary values (+pi vs -pi) compare as equal."""
    if isinstance(config, PolygonConfig):
        return config.points.ravel()
    a1, a2 = config.angles
    return np.array([math.cos(a1), math.sin(a1), math.cos(a2), math.sin(a2)])


def _dedup_configs(configs: Iterable[Config], tol: float) -> list[Config]:
    # the number of distinct critical points is tiny, so a linear scan
    # against the accepted representatives is cheap and wrap-safe
    unique: list[Config] = []
    coords: list[np.ndarray] = []
    for cfg in configs:
        canon, _ = canonicalize(cfg)
        c = _compare_coords(canon)
        if not any(np.abs(c - other).max() < tol for other in coords):
            unique.append(canon)
            coords.append(c)
    return unique


def _build_point(config: Config, charges: ChargeVector, spec: PotentialSpec,
                 ) -> CriticalPoint:
    report = pot.energy_report(config, charges, spec)
    eigs = np.linalg.eigvalsh(report.hessian)
    index, degenerate = classify_spectrum(eigs)
    return CriticalPoint(
        config=config,
        energy=float(report.value),
        grad_norm=float(np.linalg.norm(report.gradient)),
        hessian_eigenvalues=tuple(float(v) for v in eigs),
        morse_index=index,
        degenerate=degenerate,
        aligned=alignment_defect(config) == 0.0,
        key=distance_key(config),
    )


def _link_partners(points: list[CriticalPoint], tol: float) -> list[CriticalPoint]:
    out = []
    for cp in points:
        mirror = apply_involution(cp.config)
        partner_key = None
        if not _same_config(mirror, cp.config, tol):
            for other in points:
                if other is cp:
                    continue
                if _same_config(mirror, other.config, tol):
                    partner_key = other.key
                    break
        out.append(replace(cp, symmetry_partner=partner_key))
    return out


def _finalize(configs: list[Config], charges: ChargeVector, spec: PotentialSpec,
              settings: SolveSettings) -> list[CriticalPoint]:
    """Dedup, mirror-close, classify and sort converged configurations."""
    unique = _dedup_configs(configs, settings.dedup_tol)
    # close under the involution: the mirror of a critical point is
    # critical with the same spectrum, so synthesize missing partners
    for cfg in list(unique):
        mirror, _ = canonicalize(apply_involution(cfg))
        if not any(_same_config(mirror, u, settings.dedup_tol) for u in unique):
            unique.append(mirror)
    points = []
    for cfg in unique:
        cp = _build_point(cfg, charges, spec)
        if cp.grad_norm > settings.newton_tol:
            continue
        if stationarity_relation_residual(cfg, charges, spec) > RELATION_TOL:
            continue
        points.append(cp)
    points = _link_partners(points, settings.dedup_tol)
    points.sort(key=lambda cp: (cp.energy, cp.key))
    return points


def polish_candidates(space: Space, charges: ChargeVector,
                      candidates: Sequence[np.ndarray | Config],
                      spec: PotentialSpec | None = None,
                      settings: SolveSettings | None = None,
                      ) -> list[CriticalPoint]:
    """Polish explicit candidate configurations only (no grid multistart).

    Candidates are vertex arrays / configs (polygon) or angle pairs /
    configs (torus); non-convergent candidates are dropped and the
    survivors go through the same dedup / mirror / classify pipeline as
    the full search.
    """
    spec = spec or PotentialSpec.coulomb()
    settings = settings or SolveSettings()
    configs: list[Config] = []
    if isinstance(space, TorusSpace):
        pole_radius = settings.pole_radius or 1e-7 * min(space.radii)
        seeds = []
        for cand in candidates:
            if isinstance(cand, TorusConfig):
                seeds.append(cand.angles)
            else:
                arr = np.asarray(cand, dtype=float).ravel()
                seeds.append((arr[0], arr[1]))
        if seeds:
            configs = _polish_torus_seeds(space, charges, spec, settings,
                                          pole_radius, np.array(seeds))
    else:
        pole_radius = settings.pole_radius or 1e-7
        for cand in candidates:
            pts = cand.points if isinstance(cand, PolygonConfig) else np.asarray(cand)
            seed = _gauge_seed(pts)
            if seed is None:
                continue
            polished = _polish_polygon(seed, charges, spec, settings, pole_radius)
            if polished is not None:
                configs.append(polished)
    return _finalize(configs, charges, spec, settings)


def find_critical_points(space: Space, charges: ChargeVector,
                         spec: PotentialSpec | None = None,
                         settings: SolveSettings | None = None,
                         threads: int = 1) -> list[CriticalPoint]:
    """Multistart search for every stationary point of the energy.

    Grid seeds plus the closed-form and aligned configurations are
    polished by damped Newton on the stationarity system; runs that do
    not converge are dropped.  The survivors are deduplicated modulo
    the rotation gauge, closed under the reflection involution (both
    members of a mirror pair are reported and linked), classified by
    their constrained Hessian spectrum and sorted by (energy, key).

    ``threads`` parallelizes the independent seed polishes; the merge
    is a deterministic sort, so the result does not depend on it.
    """
    spec = spec or PotentialSpec.coulomb()
    settings = settings or SolveSettings()
    if isinstance(space, TorusSpace):
        if len(charges) != 3:
            raise ValueError("torus space carries exactly three charges")
        pole_radius = settings.pole_radius or 1e-7 * min(space.radii)
        configs = _solve_torus(space, charges, spec, settings, pole_radius)
    else:
        if len(charges) != space.n:
            raise ValueError(f"need {space.n} charges for {space.name}")
        pole_radius = settings.pole_radius or 1e-7
        seeds = [s for s in (_gauge_seed(raw) for raw in
                             _polygon_seeds(space, charges, spec, settings))
                 if s is not None]

        def polish(seed: np.ndarray) -> PolygonConfig | None:
            return _polish_polygon(seed, charges, spec, settings, pole_radius)

        if threads > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(polish, seeds))
        else:
            results = [polish(s) for s in seeds]
        configs = [cfg for cfg in results if cfg is not None]
    return _finalize(configs, charges, spec, settings)


def _gauge_seed(points: np.ndarray) -> np.ndarray | None:
    try:
        return PolygonConfig.from_points(points).points.copy()
    except ValueError:
        return None
