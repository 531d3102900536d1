"""Acceptance suite: one test per quantitative exit criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one PASS/FAIL
line per criterion.  Tolerances are stated inline; runtime budgets use
the monotonic clock.
"""

import math
import time

import numpy as np

from coulomb_eq.bifurcation import (
    charge_sweep_path,
    detect_threshold,
    fit_branch_exponent,
    three_charge_equilibria,
    trace_pitchfork,
)
from coulomb_eq.inverse import stabilizing_charges_triangle
from coulomb_eq.morse import (
    aligned_blocks,
    classify_spectrum,
    euler_count_check,
    torus_aligned_hessian_form,
    torus_label_config,
)
from coulomb_eq.potentials import (
    PotentialSpec,
    fd_gradient,
    fd_hessian,
    gradient,
    hessian,
)
from coulomb_eq.solver import (
    PolygonSpace,
    SolveSettings,
    TorusSpace,
    critical_triangle,
    find_critical_points,
    line_config_from_positions,
    solve_line_interior,
    solve_line_three,
)
from coulomb_eq.spaces import (
    ChargeVector,
    PolygonConfig,
    TorusConfig,
    pairwise_distances,
)

PI = math.pi
COULOMB = PotentialSpec.coulomb()


def _finish(number: int, name: str, ok: bool, detail: str) -> None:
    verdict = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {number:2d} {name}: {verdict} ({detail})")
    assert ok, f"criterion {number} failed: {detail}"


def test_criterion_01_collinear_closed_form():
    start = time.monotonic()
    pts = three_charge_equilibria(ChargeVector.of([4.0, 1.0, 1.0]))
    mid1 = [cp for cp in pts if cp.aligned
            and int(np.argsort(cp.config.points[:, 0])[1]) == 1]
    d = pairwise_distances(mid1[0].config)
    err = max(abs(d[0, 1] - 1 / 3), abs(d[1, 2] - 1 / 6))
    splits = []
    for q2 in (0.01, 0.1, 0.2):
        sample = three_charge_equilibria(ChargeVector.of([4.0, q2, 1.0]))
        best = min(sample, key=lambda cp: cp.energy)
        assert best.aligned and best.morse_index == 0
        splits.append(pairwise_distances(best.config)[0, 1])
    spread = max(splits) - min(splits)
    elapsed = time.monotonic() - start
    ok = err < 1e-9 and spread < 1e-8 and elapsed < 1.0
    _finish(1, "collinear closed form", ok,
            f"split err {err:.2e}, spread {spread:.2e}, {elapsed:.2f}s")


def test_criterion_02_triangle_taxonomy():
    start = time.monotonic()
    detail = []
    ok = True
    for charges, want_min, want_saddle in (((1.0, 1.0, 1.0), 2, 3),
                                           ((1 / 8, 1.0, 1.0), 1, 2)):
        q = ChargeVector.of(charges)
        pts = find_critical_points(PolygonSpace(3), q)
        minima = [cp for cp in pts if cp.morse_index == 0]
        saddles = [cp for cp in pts if cp.morse_index == 1]
        summary = euler_count_check(pts, PolygonSpace(3))
        side_err = 0.0
        for cp in minima:
            if cp.aligned:
                continue
            d = pairwise_distances(cp.config)
            sides = np.array([d[1, 2], d[0, 2], d[0, 1]])
            want = np.array(charges) ** -0.5
            side_err = max(side_err,
                           float(np.abs(sides - want / want.sum()).max()))
        ok &= (len(minima), len(saddles)) == (want_min, want_saddle)
        ok &= summary.euler_check == "passed" and side_err < 1e-8
        detail.append(f"{charges}: {len(minima)}min/{len(saddles)}sad "
                      f"euler={summary.euler_check} sides {side_err:.1e}")
    elapsed = time.monotonic() - start
    ok &= elapsed < 5.0
    _finish(2, "triangle taxonomy", ok, "; ".join(detail) + f", {elapsed:.2f}s")


def test_criterion_03_degenerate_boundary():
    results = []
    for scale in (1.0, 3.0):
        q = ChargeVector.of([scale / 9, 4 * scale / 9, 4 * scale / 9])
        cfg = solve_line_three(q)[0]  # first vertex intermediate
        eigs = np.linalg.eigvalsh(hessian(cfg, q))
        _, degenerate = classify_spectrum(eigs)
        rel = float(np.abs(eigs).min() / max(1.0, np.abs(eigs).max()))
        results.append((degenerate, rel))
    ok = all(d for d, _ in results)
    _finish(3, "degenerate boundary", ok,
            ", ".join(f"|eig|/rad {r:.1e}" for _, r in results))


def test_criterion_04_pitchfork_quantitative():
    path = charge_sweep_path([1.0, 1.0, 1.0], 1)
    threshold = detect_threshold(PolygonSpace(3), path, (0.05, 0.6))
    diagram = trace_pitchfork(PolygonSpace(3), path, (0.05, 0.6), steps=60)
    exponent = fit_branch_exponent(diagram, window=0.05)
    ok = abs(threshold - 0.25) < 1e-4 and 0.45 <= exponent <= 0.55
    _finish(4, "pitchfork threshold and exponent", ok,
            f"threshold {threshold:.6f}, exponent {exponent:.3f}")


def test_criterion_05_equal_radii_exact_value():
    q = ChargeVector.of([1.0, 1.0, 1.0])
    pts = find_critical_points(TorusSpace((1.0, 1.0, 1.0)), q)
    third = 2 * PI / 3
    target = [cp for cp in pts
              if abs(cp.config.angles[0] - third) < 1e-8
              and abs(cp.config.angles[1] - third) < 1e-8]
    ok = len(target) == 1
    det_err = math.inf
    paired = False
    if ok:
        cp = target[0]
        det = float(np.linalg.det(hessian(cp.config, q)))
        det_err = abs(det - 25 / 144)
        paired = cp.symmetry_partner is not None and any(
            other is not cp and other.symmetry_partner is not None
            for other in pts)
        ok = det_err < 1e-9 and cp.morse_index == 0 and paired
    _finish(5, "equal radii exact determinant", ok,
            f"det err {det_err:.1e}, mirror pair {paired}")


def test_criterion_06_aligned_sign_forms():
    coeffs = torus_aligned_hessian_form((1.0, 2.0, 3.0), (PI, PI, 0.0))
    want = np.array([-1 / 64, -2 / 125, 3 / 8000])
    ratios = coeffs / want
    ratio_err = float(np.abs(ratios / ratios[0] - 1.0).max())
    cfg = torus_label_config((1.0, 2.0, 3.0), (PI, PI, 0.0))
    rng = np.random.default_rng(11)
    flips = 0
    for _ in range(20):
        base = rng.uniform(0.1, 3.0, 2)
        q3_zero = -(coeffs[0] * base[0] + coeffs[1] * base[1]) / coeffs[2]
        signs = []
        for factor in (0.95, 1.05):
            q = ChargeVector.of([base[0], base[1], q3_zero * factor])
            det = float(np.linalg.det(hessian(cfg, q)))
            form = float(coeffs @ q.array)
            signs.append((det > 0, form > 0))
        flips += (signs[0][0] == signs[0][1] and signs[1][0] == signs[1][1]
                  and signs[0][0] != signs[1][0])
    ok = ratio_err < 1e-12 and flips == 20
    _finish(6, "aligned sign-form coefficients", ok,
            f"ratio err {ratio_err:.1e}, sign flips {flips}/20")


def test_criterion_07_torus_morse_counting():
    start = time.monotonic()
    space = TorusSpace((1.0, 2.0, 3.0))
    settings = SolveSettings(grid_density=96)
    rng = np.random.default_rng(42)
    euler_ok = counts_ok = True
    exact_cases = 0
    for _ in range(25):
        q = ChargeVector.of(rng.dirichlet((0.6, 0.6, 0.6)) + 1e-3)
        pts = find_critical_points(space, q, settings=settings)
        summary = euler_count_check(pts, space)
        euler_ok &= summary.euler_check == "passed"
        if any(cp.aligned and cp.morse_index == 0 for cp in pts):
            exact_cases += 1
            counts_ok &= len(pts) == 4
        else:
            minima = [cp for cp in pts if cp.morse_index == 0]
            counts_ok &= (len(pts) >= 5 and len(minima) == 2
                          and minima[0].symmetry_partner is not None)
    elapsed = time.monotonic() - start
    ok = euler_ok and counts_ok and elapsed < 60.0
    _finish(7, "concentric-circles Morse counting", ok,
            f"euler {euler_ok}, counts {counts_ok}, "
            f"exact cases {exact_cases}/25, {elapsed:.1f}s")


def test_criterion_08_fixing_effect_four_charges():
    delta = 1e-3
    q = ChargeVector.of([1.0, delta, delta, 1.0])
    xs, h1 = solve_line_interior(q)
    one_d_index = int((np.linalg.eigvalsh(h1) < 0).sum())
    cfg = line_config_from_positions(xs)
    _, hyy, _ = aligned_blocks(cfg, q)
    transverse_definite = bool(np.linalg.eigvalsh(hyy)[0] > 0.0)
    full_index = int((np.linalg.eigvalsh(hessian(cfg, q)) < 0).sum())

    rng = np.random.default_rng(3)
    settings = SolveSettings(grid_density=8)
    convex = 0
    triples_clear = True
    trials = 0
    while convex < 20 and trials < 30:
        trials += 1
        qv = ChargeVector.of(rng.uniform(0.5, 2.0, 4))
        for cp in find_critical_points(PolygonSpace(4), qv, settings=settings):
            if cp.aligned or not _is_convex(cp.config.points):
                continue
            convex += 1
            triples_clear &= _min_triple_defect(cp.config) > 1e-6
    ok = (one_d_index == 0 and transverse_definite
          and full_index == one_d_index and convex >= 20 and triples_clear)
    _finish(8, "four-charge fixing effect", ok,
            f"1-D index {one_d_index}, full index {full_index}, "
            f"transverse definite {transverse_definite}, "
            f"convex checked {convex}, collinear triples none: {triples_clear}")


def _is_convex(points: np.ndarray) -> bool:
    n = points.shape[0]
    signs = []
    for i in range(n):
        a, b, c = points[i], points[(i + 1) % n], points[(i + 2) % n]
        u, v = b - a, c - b
        signs.append(u[0] * v[1] - u[1] * v[0])
    arr = np.array(signs)
    return bool((arr > 0).all() or (arr < 0).all())


def _min_triple_defect(config: PolygonConfig) -> float:
    import itertools

    pts = config.points
    diam = pairwise_distances(config).max()
    best = math.inf
    for tri in itertools.combinations(range(pts.shape[0]), 3):
        sub = pts[list(tri)]
        centered = sub - sub.mean(axis=0)
        _, vecs = np.linalg.eigh(centered.T @ centered)
        best = min(best, float(np.abs(centered @ vecs[:, 0]).max()) / diam)
    return best


def _random_triangle(rng):
    while True:
        sides = rng.dirichlet((2.0, 2.0, 2.0))
        if sides.min() > 0.12 and sides.max() < 0.47:
            break
    l1, l2, l3 = sides
    x = (l3 * l3 + l2 * l2 - l1 * l1) / (2 * l3)
    y = math.sqrt(max(l2 * l2 - x * x, 0.0)) * (1 if rng.random() < 0.5 else -1)
    return PolygonConfig.from_points([[0, 0], [l3, 0], [x, y]])


def test_criterion_09_derivative_oracles():
    rng = np.random.default_rng(7)
    worst_grad = worst_hess = 0.0
    for spec in (COULOMB, PotentialSpec.power(2.0), PotentialSpec.log()):
        for make in (lambda: _random_triangle(rng),
                     lambda: TorusConfig((1.0, 2.0, 3.0),
                                         tuple(rng.uniform(-PI, PI, 2)))):
            for _ in range(100):
                cfg = make()
                q = ChargeVector.of(rng.uniform(0.2, 5.0, 3))
                g = gradient(cfg, q, spec)
                gf = fd_gradient(cfg, q, spec)
                worst_grad = max(worst_grad, float(
                    np.linalg.norm(g - gf) / max(np.linalg.norm(g), 1e-12)))
                h = hessian(cfg, q, spec)
                hf = fd_hessian(cfg, q, spec)
                worst_hess = max(worst_hess, float(
                    np.linalg.norm(h - hf) / np.linalg.norm(h)))
    ok = worst_grad < 1e-6 and worst_hess < 1e-4
    _finish(9, "derivative oracles", ok,
            f"grad rel {worst_grad:.1e}, hess rel {worst_hess:.1e}")


def test_criterion_10_inverse_roundtrip():
    rng = np.random.default_rng(5)
    worst = 0.0
    done = 0
    while done < 100:
        q = rng.dirichlet((1.0, 1.0, 1.0))
        if q.min() < 1e-3:
            continue
        inv = 1.0 / np.sqrt(q)
        if 2.0 * inv.max() >= inv.sum():
            continue
        done += 1
        charges = ChargeVector.of(q)
        tri = critical_triangle(charges)
        d = pairwise_distances(tri)
        result = stabilizing_charges_triangle(d[1, 2], d[0, 2], d[0, 1])
        worst = max(worst, float(np.abs(result.charges.normalized
                                        - charges.normalized).max()))
    ok = worst < 1e-8
    _finish(10, "inverse roundtrip", ok, f"worst recovery err {worst:.1e}")
