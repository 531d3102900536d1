"""Equilibria of point charges on fixed-perimeter polygons and
concentric-circle triples: solvers, Morse classification, bifurcation
tracing and the inverse (stabilizing-charges) problem."""

__version__ = "0.1.0"

from .spaces import (
    AlignedLabel,
    ChargeVector,
    PolygonConfig,
    TorusConfig,
    TORUS_ALIGNED_LABELS,
    alignment_defect,
    apply_involution,
    canonicalize,
    distance_key,
    pairwise_distances,
)
from .potentials import (
    EnergyReport,
    PoleError,
    PotentialSpec,
    dilation_derivative,
    energy,
    energy_report,
    fd_gradient,
    fd_hessian,
    gradient,
    hessian,
    kernel_eval,
)
from .solver import (
    CriticalPoint,
    PolygonSpace,
    SolveSettings,
    TorusSpace,
    critical_triangle,
    enumerate_aligned,
    find_critical_points,
    polish_candidates,
    solve_line_three,
)
from .morse import (
    MorseSummary,
    euler_count_check,
    morse_index,
    torus_aligned_hessian_form,
)
from .inverse import (
    InverseResult,
    stabilizing_charges_aligned,
    stabilizing_charges_torus,
    stabilizing_charges_triangle,
    verify_equilibrium,
)
from .bifurcation import (
    BranchDiagram,
    ControlPoint,
    charge_sweep_path,
    detect_threshold,
    fixing_effect_probe,
    polygon_bifurcation_set,
    torus_bifurcation_set,
    trace_pitchfork,
)

__all__ = [
    "AlignedLabel",
    "ChargeVector",
    "PolygonConfig",
    "TorusConfig",
    "TORUS_ALIGNED_LABELS",
    "alignment_defect",
    "apply_involution",
    "canonicalize",
    "distance_key",
    "pairwise_distances",
    "EnergyReport",
    "PoleError",
    "PotentialSpec",
    "dilation_derivative",
    "energy",
    "energy_report",
    "fd_gradient",
    "fd_hessian",
    "gradient",
    "hessian",
    "kernel_eval",
    "CriticalPoint",
    "PolygonSpace",
    "SolveSettings",
    "TorusSpace",
    "critical_triangle",
    "enumerate_aligned",
    "find_critical_points",
    "polish_candidates",
    "solve_line_three",
    "MorseSummary",
    "euler_count_check",
    "morse_index",
    "torus_aligned_hessian_form",
    "InverseResult",
    "stabilizing_charges_aligned",
    "stabilizing_charges_torus",
    "stabilizing_charges_triangle",
    "verify_equilibrium",
    "BranchDiagram",
    "ControlPoint",
    "charge_sweep_path",
    "detect_threshold",
    "fixing_effect_probe",
    "polygon_bifurcation_set",
    "torus_bifurcation_set",
    "trace_pitchfork",
]
