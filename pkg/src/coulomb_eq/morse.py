"""Morse classification of critical points and topological count checks.

The Morse index is the number of negative eigenvalues of the
constrained Hessian.  On the polygon space with three charges the
sphere-level bookkeeping counts the three coincidence poles as maxima,
so ``#min - #saddle + #max + 3 = 2``; on the torus (distinct radii, so
the energy is smooth everywhere) the alternating count must vanish:
``#min - #saddle + #max = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from . import potentials as pot
from .potentials import PotentialSpec
from .spaces import AlignedLabel, ChargeVector, PolygonConfig, TorusConfig, chord_distance

if TYPE_CHECKING:  # pragma: no cover
    from .solver import CriticalPoint, Space

#: eigenvalues below this fraction of the spectral scale flag degeneracy
DEGENERACY_TOL = 1e-8


class DegenerateCriticalPointError(ValueError):
    """Raised when a Morse index is requested at a degenerate point."""


def classify_spectrum(eigenvalues: Sequence[float]) -> tuple[int, bool]:
    """(index, degenerate) from a constrained-Hessian spectrum."""
    eigs = np.asarray(eigenvalues, dtype=float)
    scale = max(1.0, float(np.abs(eigs).max()))
    degenerate = bool(np.abs(eigs).min() < DEGENERACY_TOL * scale)
    index = int((eigs < 0.0).sum())
    return index, degenerate


def morse_index(cp: "CriticalPoint") -> int:
    """Number of negative constrained-Hessian eigenvalues; refuses
    degenerate points, which carry no Morse index."""
    if cp.degenerate:
        raise DegenerateCriticalPointError(
            "degenerate critical point has no Morse index")
    return cp.morse_index


@dataclass(frozen=True)
class MorseSummary:
    """Counts per Morse index plus the topological consistency verdict."""

    counts: dict[int, int]
    poles_count: int
    euler_check: str  # "passed" | "failed" | "not-applicable"
    exactness: bool
    reason: str = ""

    @property
    def minima(self) -> int:
        return self.counts.get(0, 0)


def torus_label_config(radii: Sequence[float],
                       label: Sequence[float]) -> TorusConfig:
    """The aligned torus configuration carrying the given angle label."""
    lab = tuple(float(v) for v in label)
    AlignedLabel("torus", lab)  # validates
    return TorusConfig(tuple(radii), (lab[0], lab[1]))


def torus_aligned_hessian_form(radii: Sequence[float],
                               label: Sequence[float]) -> np.ndarray:
    """Coefficients (c1, c2, c3) of the sign form of the aligned Hessian
    determinant: ``det(H) = q1*q2*q3*r1*r2*r3 * (c1*q1 + c2*q2 + c3*q3)``.

    Each coefficient is ``r_i * cos(a_j) * cos(a_k) / (d_j**3 * d_k**3)``
    with cosine-rule distances evaluated at the label angles, so its
    sign is positive exactly when the charge's own angle is zero.
    """
    r = tuple(float(v) for v in radii)
    if len(r) != 3 or min(r) <= 0.0:
        raise ValueError("need three positive radii")
    spread = max(r)
    if (abs(r[0] - r[1]) <= 1e-12 * spread or abs(r[1] - r[2]) <= 1e-12 * spread
            or abs(r[0] - r[2]) <= 1e-12 * spread):
        raise ValueError("aligned sign forms need pairwise distinct radii")
    lab = tuple(float(v) for v in label)
    AlignedLabel("torus", lab)
    pair = ((1, 2), (2, 0), (0, 1))
    d = [(chord_distance(r[a], r[b], lab[i])) for i, (a, b) in enumerate(pair)]
    cos = [math.cos(a) for a in lab]
    coeffs = np.empty(3)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        coeffs[i] = r[i] * cos[j] * cos[k] / (d[j] ** 3 * d[k] ** 3)
    return coeffs


def evaluate_aligned_form(radii: Sequence[float], label: Sequence[float],
                          charges: ChargeVector) -> float:
    """Sign form of the aligned Hessian determinant at given charges."""
    return float(torus_aligned_hessian_form(radii, label) @ charges.array)


def aligned_blocks(config: PolygonConfig, charges: ChargeVector,
                   spec: PotentialSpec | None = None,
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """In-line block, transverse block and mixed block of the constrained
    Hessian at an aligned polygon configuration.

    The reflection symmetry of the energy forces the mixed block to
    vanish, so the spectrum is the union of the two diagonal blocks and
    the in-line block is exactly the Hessian of the one-dimensional
    problem.
    """
    spec = spec or PotentialSpec.coulomb()
    pts = config.points
    zx, zy = pot.aligned_chart_basis(pts)
    grad = pot.polygon_full_gradient(pts, charges, spec)
    mult = -float(pts[1:].ravel() @ grad)
    h = pot.polygon_full_hessian(pts, charges, spec) \
        + mult * pot.perimeter_hessian(pts)
    return zx.T @ h @ zx, zy.T @ h @ zy, zx.T @ h @ zy


def transverse_min_eigenvalue(config: PolygonConfig, charges: ChargeVector,
                              spec: PotentialSpec | None = None) -> float:
    """Smallest eigenvalue of the transverse (off-line) Hessian block."""
    _, hyy, _ = aligned_blocks(config, charges, spec)
    return float(np.linalg.eigvalsh(hyy)[0])


def euler_count_check(points: Iterable["CriticalPoint"],
                      space: "Space") -> MorseSummary:
    """Tally Morse indices and test the space's alternating-count identity."""
    from .solver import TorusSpace  # local import, no cycle at runtime

    pts = list(points)
    counts: dict[int, int] = {}
    degenerate = False
    for cp in pts:
        if cp.degenerate:
            degenerate = True
            continue
        counts[cp.morse_index] = counts.get(cp.morse_index, 0) + 1
    if not pts:
        return MorseSummary(counts, 0, "not-applicable", False,
                            "no critical points found")
    if isinstance(space, TorusSpace):
        poles = 0
        exactness = len(pts) == 4
        if max(space.radii) - min(space.radii) < 1e-12:
            return MorseSummary(counts, poles, "not-applicable", exactness,
                                "energy has poles when radii coincide")
        if degenerate:
            return MorseSummary(counts, poles, "not-applicable", exactness,
                                "degenerate points present")
        alternating = sum((-1) ** idx * c for idx, c in counts.items())
        verdict = "passed" if alternating == 0 else "failed"
        return MorseSummary(counts, poles, verdict, exactness)
    if space.n != 3:
        return MorseSummary(counts, 0, "not-applicable", False,
                            "sphere-level count is defined for three charges only")
    poles = 3
    if degenerate:
        return MorseSummary(counts, poles, "not-applicable", False,
                            "degenerate points present")
    alternating = sum((-1) ** idx * c for idx, c in counts.items()) + poles
    verdict = "passed" if alternating == 2 else "failed"
    return MorseSummary(counts, poles, verdict, False)
