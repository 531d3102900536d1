"""Configuration spaces for constrained point-charge systems.

Two spaces are supported:

* ``PolygonConfig`` -- planar n-gons of perimeter one, with the first
  vertex pinned at the origin and the rotation freedom removed by a
  gauge (second vertex on the non-negative x half-axis);
* ``TorusConfig`` -- triples of points on three concentric circles,
  charted by two of the three central angles between consecutive
  points (the third angle is derived so the three always sum to a
  full turn).

Both spaces carry the reflection involution that mirrors a
configuration across the gauge axis.  Helpers here compute pairwise
distances, measure how far a configuration is from being collinear,
and produce canonical representatives plus distance-multiset keys for
deduplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * math.pi

#: perimeter drift allowed in a valid polygon configuration
PERIMETER_TOL = 1e-12
#: fraction of the perimeter / smallest radius below which two points
#: count as coincident (the energy has a pole there)
POLE_RADIUS_FACTOR = 1e-7
#: relative threshold (scaled by diameter) below which a configuration
#: counts as aligned
ALIGNMENT_TOL = 1e-10
#: rounding applied to distance multisets used as symmetry keys
KEY_DECIMALS = 9

#: the four aligned angle labels of the concentric-circle space, as
#: (alpha1, alpha2, alpha3) with the angles summing to 0 or 2*pi
TORUS_ALIGNED_LABELS = (
    (math.pi, math.pi, 0.0),
    (0.0, math.pi, math.pi),
    (math.pi, 0.0, math.pi),
    (0.0, 0.0, 0.0),
)


def reduce_angle(a: float) -> float:
    """Reduce an angle to the interval (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a + 0.0  # normalize -0.0


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ChargeVector:
    """Ordered positive charges; the normalized view lives on the open simplex."""

    q: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.q) < 2:
            raise ValueError("need at least two charges")
        if not all(math.isfinite(v) and v > 0.0 for v in self.q):
            raise ValueError(f"charges must be positive and finite, got {self.q}")

    @classmethod
    def of(cls, values: Sequence[float]) -> "ChargeVector":
        return cls(tuple(float(v) for v in values))

    def __len__(self) -> int:
        return len(self.q)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.q)

    @property
    def normalized(self) -> np.ndarray:
        a = self.array
        return a / a.sum()

    def scaled(self, factor: float) -> "ChargeVector":
        return ChargeVector(tuple(factor * v for v in self.q))


@dataclass(frozen=True)
class PolygonConfig:
    """Gauge-fixed point of the fixed-perimeter polygon space.

    Invariants: the first vertex is the origin, the gauge vertex
    (normally the second) sits on the non-negative x half-axis, and the
    cyclic perimeter equals one up to ``PERIMETER_TOL``.  Coincident
    vertices are representable; they flag a pole of the energy.
    """

    points: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        pts = _readonly(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValueError("points must be an (n, 2) array with n >= 3")
        object.__setattr__(self, "points", pts)
        if pts[0, 0] != 0.0 or pts[0, 1] != 0.0:
            raise ValueError("first vertex must be pinned at the origin")
        g = self.gauge_index
        if pts[g, 1] != 0.0 or pts[g, 0] < 0.0:
            raise ValueError("gauge vertex must lie on the non-negative x half-axis")
        per = self.perimeter
        if abs(per - 1.0) > PERIMETER_TOL:
            raise ValueError(f"perimeter must be 1, got {per!r}")

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]] | np.ndarray,
                    rescale: bool = True) -> "PolygonConfig":
        """Pin, gauge-fix and (optionally) rescale raw vertices to perimeter one."""
        return cls(gauge_fix(np.asarray(points, dtype=float), rescale=rescale))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def gauge_index(self) -> int:
        """Index of the vertex the rotation gauge is pinned to.

        Normally vertex 1 (the second point); if that point coincides
        with the origin the first non-origin vertex takes the role.
        """
        pts = self.points
        for i in range(1, pts.shape[0]):
            if pts[i, 0] != 0.0 or pts[i, 1] != 0.0:
                return i
        return 1

    @property
    def perimeter(self) -> float:
        return float(np.linalg.norm(self.points - np.roll(self.points, -1, axis=0),
                                    axis=1).sum())

    @property
    def diameter(self) -> float:
        d = pairwise_distances(self)
        return float(d.max())

    @property
    def pole_radius(self) -> float:
        return POLE_RADIUS_FACTOR * 1.0

    def pole_pairs(self) -> list[tuple[int, int]]:
        """Vertex pairs closer than the pole radius (energy diverges there)."""
        d = pairwise_distances(self)
        n = self.n
        return [(i, j) for i in range(n) for j in range(i + 1, n)
                if d[i, j] < self.pole_radius]

    @property
    def has_pole(self) -> bool:
        return bool(self.pole_pairs())


@dataclass(frozen=True)
class TorusConfig:
    """Central-angle chart point of the concentric-circle space.

    ``angles`` stores (alpha1, alpha2) reduced to (-pi, pi]; the third
    angle is always derived as ``2*pi - alpha1 - alpha2`` so the sum
    constraint holds exactly.
    """

    radii: tuple[float, float, float]
    angles: tuple[float, float]

    def __post_init__(self) -> None:
        r = tuple(float(v) for v in self.radii)
        if len(r) != 3 or not all(math.isfinite(v) and v > 0.0 for v in r):
            raise ValueError(f"radii must be three positive reals, got {self.radii}")
        a = tuple(reduce_angle(float(v)) for v in self.angles)
        if len(a) != 2:
            raise ValueError("angles must be the pair (alpha1, alpha2)")
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "angles", a)

    @property
    def alpha3(self) -> float:
        return reduce_angle(TWO_PI - self.angles[0] - self.angles[1])

    @property
    def alphas(self) -> tuple[float, float, float]:
        return (self.angles[0], self.angles[1], self.alpha3)

    def side_distances(self) -> tuple[float, float, float]:
        """(d1, d2, d3) where d_i is the distance of the pair opposite point i.

        Each side comes from the cosine rule on its own central angle,
        e.g. ``d3**2 = r1**2 + r2**2 - 2*r1*r2*cos(alpha3)``.
        """
        r1, r2, r3 = self.radii
        a1, a2, a3 = self.alphas
        return (
            chord_distance(r2, r3, a1),
            chord_distance(r3, r1, a2),
            chord_distance(r1, r2, a3),
        )

    def embedded_points(self) -> np.ndarray:
        """Plane embedding with the first point on the positive x-axis."""
        r1, r2, r3 = self.radii
        a1, _, a3 = self.alphas
        th1 = 0.0
        th2 = a3          # angle between points 1 and 2 is alpha3
        th3 = a3 + a1     # then alpha1 on to point 3
        return np.array([
            [r1 * math.cos(th1), r1 * math.sin(th1)],
            [r2 * math.cos(th2), r2 * math.sin(th2)],
            [r3 * math.cos(th3), r3 * math.sin(th3)],
        ])

    @property
    def diameter(self) -> float:
        return float(max(self.side_distances()))

    @property
    def pole_radius(self) -> float:
        return POLE_RADIUS_FACTOR * min(self.radii)

    @property
    def has_pole(self) -> bool:
        return min(self.side_distances()) < self.pole_radius


def chord_distance(ra: float, rb: float, angle: float) -> float:
    # cosine rule; the radicand is ((ra-rb)^2 + ...) >= 0, clip float dust
    val = ra * ra + rb * rb - 2.0 * ra * rb * math.cos(angle)
    return math.sqrt(max(val, 0.0))


Config = PolygonConfig | TorusConfig


@dataclass(frozen=True)
class AlignedLabel:
    """Identifies an aligned configuration.

    For the polygon space ``value`` is the index (0-based) of the
    intermediate vertex of the collinear arrangement; for the torus it
    is one of the four ``TORUS_ALIGNED_LABELS`` angle triples.
    """

    space: str  # "polygon" | "torus"
    value: int | tuple[float, float, float]

    def __post_init__(self) -> None:
        if self.space == "torus":
            if tuple(self.value) not in TORUS_ALIGNED_LABELS:
                raise ValueError(f"not an aligned angle triple: {self.value}")
        elif self.space == "polygon":
            if not isinstance(self.value, int) or self.value < 0:
                raise ValueError("polygon aligned label is the intermediate vertex index")
        else:
            raise ValueError(f"unknown space {self.space!r}")


def pairwise_distances(config: Config) -> np.ndarray:
    """Symmetric matrix of pairwise distances, zero diagonal."""
    if isinstance(config, PolygonConfig):
        pts = config.points
        diff = pts[:, None, :] - pts[None, :, :]
        return np.sqrt((diff ** 2).sum(axis=2))
    d1, d2, d3 = config.side_distances()
    return np.array([
        [0.0, d3, d2],
        [d3, 0.0, d1],
        [d2, d1, 0.0],
    ])


def gauge_fix(points: np.ndarray, rescale: bool = True) -> np.ndarray:
    """Translate vertex 0 to the origin, rotate the gauge vertex onto the
    non-negative x half-axis and optionally renormalize the perimeter."""
    pts = np.asarray(points, dtype=float).copy()
    pts -= pts[0]
    gauge = 0
    for i in range(1, pts.shape[0]):
        if pts[i, 0] != 0.0 or pts[i, 1] != 0.0:
            gauge = i
            break
    if gauge:
        x, y = pts[gauge]
        r = math.hypot(x, y)
        c, s = x / r, y / r
        rot = np.array([[c, s], [-s, c]])
        pts = pts @ rot.T
        pts[gauge, 0] = r
        pts[gauge, 1] = 0.0
    if rescale:
        per = float(np.linalg.norm(pts - np.roll(pts, -1, axis=0), axis=1).sum())
        if per <= 0.0:
            raise ValueError("cannot rescale a fully coincident configuration")
        # skip the division for pure rounding dust so re-gauging an
        # already canonical configuration is a bitwise no-op
        if abs(per - 1.0) > 4.0 * np.finfo(float).eps:
            pts /= per
    pts[0] = 0.0
    # kill signed zeros so reflected copies compare bit-for-bit
    pts += 0.0
    return pts


def apply_involution(config: Config) -> Config:
    """Reflect across the gauge axis and re-gauge.

    Aligned configurations are fixed points; applying the involution
    twice returns the input exactly.
    """
    if isinstance(config, PolygonConfig):
        pts = config.points.copy()
        pts[:, 1] = -pts[:, 1] + 0.0
        return PolygonConfig(pts)
    a1, a2 = config.angles
    return TorusConfig(config.radii, (reduce_angle(-a1), reduce_angle(-a2)))


def alignment_defect(config: Config) -> float:
    """Max distance of any point to the best-fit line, or 0 if collinear.

    The fit line is the largest principal axis of the centered second
    moment; a defect below ``ALIGNMENT_TOL`` times the diameter counts
    as exactly collinear.
    """
    pts = config.points if isinstance(config, PolygonConfig) else config.embedded_points()
    centered = pts - pts.mean(axis=0)
    moment = centered.T @ centered
    eigvals, eigvecs = np.linalg.eigh(moment)
    normal = eigvecs[:, 0]  # smallest-variance axis is the line normal
    defect = float(np.abs(centered @ normal).max())
    diam = pairwise_distances(config).max()
    if diam == 0.0 or defect <= ALIGNMENT_TOL * diam:
        return 0.0
    return defect


def is_aligned(config: Config) -> bool:
    return alignment_defect(config) == 0.0


def distance_key(config: Config, decimals: int = KEY_DECIMALS) -> tuple[int, ...]:
    """Sorted distance multiset rounded to 10**-decimals, as a hashable key.

    Reflection partners share a key because reflections preserve all
    pairwise distances.
    """
    d = pairwise_distances(config)
    upper = d[np.triu_indices(d.shape[0], k=1)]
    scale = 10 ** decimals
    return tuple(sorted(int(round(v * scale)) for v in upper))


def canonicalize(config: Config | np.ndarray,
                 radii: tuple[float, float, float] | None = None,
                 ) -> tuple[Config, tuple[int, ...]]:
    """Return the gauge-fixed representative and its symmetry key.

    Accepts a valid config, a raw (n, 2) vertex array (gauge and
    perimeter are re-imposed), or a raw angle pair together with
    ``radii``.  Idempotent: canonicalizing twice gives the same bits.
    """
    if isinstance(config, PolygonConfig):
        canon = PolygonConfig.from_points(config.points)
    elif isinstance(config, TorusConfig):
        canon = TorusConfig(config.radii, config.angles)
    elif radii is not None:
        a = np.asarray(config, dtype=float).ravel()
        canon = TorusConfig(tuple(radii), (a[0], a[1]))
    else:
        canon = PolygonConfig.from_points(np.asarray(config, dtype=float))
    return canon, distance_key(canon)


def serialize_config(config: Config, charges: ChargeVector | None = None) -> dict:
    """JSON-ready dict; field names are part of the CLI wire format."""
    out: dict = {}
    if isinstance(config, PolygonConfig):
        out["space"] = "polygon"
        out["points"] = [[float(x), float(y)] for x, y in config.points]
    else:
        out["space"] = "torus"
        out["angles"] = [float(a) for a in config.angles]
        out["radii"] = [float(r) for r in config.radii]
    if charges is not None:
        out["charges"] = [float(v) for v in charges.q]
    return out


def deserialize_config(data: dict) -> tuple[Config, ChargeVector | None]:
    space = data.get("space")
    charges = ChargeVector.of(data["charges"]) if data.get("charges") else None
    if space == "polygon":
        return PolygonConfig(np.asarray(data["points"], dtype=float)), charges
    if space == "torus":
        radii = tuple(float(r) for r in data["radii"])
        a = data["angles"]
        return TorusConfig(radii, (float(a[0]), float(a[1]))), charges
    raise ValueError(f"unknown space {space!r}")
