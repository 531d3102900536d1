import math

import numpy as np
import pytest

from coulomb_eq.potentials import PotentialSpec, fd_gradient
from coulomb_eq.solver import (
    PolygonSpace,
    SolveSettings,
    TorusSpace,
    configs_match,
    critical_triangle,
    enumerate_aligned,
    find_critical_points,
    line_config_from_positions,
    polish_candidates,
    solve_line_interior,
    solve_line_three,
    line_three_energies,
)
from coulomb_eq.spaces import (
    ChargeVector,
    apply_involution,
    pairwise_distances,
)

COULOMB = PotentialSpec.coulomb()
Q111 = ChargeVector.of([1.0, 1.0, 1.0])


class TestLineClosedForm:
    def test_equal_charges_split_in_half(self):
        cfg = solve_line_three(Q111)[1]
        d = pairwise_distances(cfg)
        assert d[0, 1] == pytest.approx(0.25, abs=1e-15)
        assert d[1, 2] == pytest.approx(0.25, abs=1e-15)

    def test_heavy_left_charge_pushes_middle_right(self):
        cfg = solve_line_three(ChargeVector.of([4.0, 1.0, 1.0]))[1]
        d = pairwise_distances(cfg)
        assert d[0, 1] == pytest.approx(1 / 3, abs=1e-15)
        assert d[1, 2] == pytest.approx(1 / 6, abs=1e-15)

    def test_each_arrangement_is_stationary(self):
        q = ChargeVector.of([2.0, 0.7, 1.3])
        for cfg in solve_line_three(q):
            from coulomb_eq.potentials import gradient
            assert np.linalg.norm(gradient(cfg, q, COULOMB)) < 1e-11

    def test_global_line_minimum_has_smallest_intermediate_charge(self):
        q = ChargeVector.of([3.0, 0.2, 1.0])
        energies = line_three_energies(q)
        assert int(np.argmin(energies)) == 1
        q2 = ChargeVector.of([0.1, 5.0, 2.0])
        assert int(np.argmin(line_three_energies(q2))) == 0

    def test_split_ignores_intermediate_charge(self):
        positions = []
        for mid_charge in (0.01, 0.1, 1.0, 10.0):
            cfg = solve_line_three(ChargeVector.of([4.0, mid_charge, 1.0]))[1]
            positions.append(pairwise_distances(cfg)[0, 1])
        assert max(positions) - min(positions) == 0.0


class TestCriticalTriangle:
    def test_equal_charges_give_equilateral(self):
        cfg = critical_triangle(Q111)
        d = pairwise_distances(cfg)
        assert d[0, 1] == pytest.approx(1 / 3, abs=1e-12)
        assert d[1, 2] == pytest.approx(1 / 3, abs=1e-12)

    def test_side_charge_products_are_balanced(self):
        cfg = critical_triangle(ChargeVector.of([1.0, 1.0, 4.0]))
        d = pairwise_distances(cfg)
        sides = np.array([d[1, 2], d[0, 2], d[0, 1]])
        assert np.allclose(sides, [2 / 5, 2 / 5, 1 / 5], atol=1e-12)
        products = sides ** 2 * np.array([1.0, 1.0, 4.0])
        assert products == pytest.approx([4 / 25] * 3, abs=1e-12)

    def test_no_triangle_when_one_charge_tiny(self):
        assert critical_triangle(ChargeVector.of([1 / 8, 1.0, 1.0])) is None

    def test_boundary_charge_vector_is_just_inside(self):
        # strictly inside the triangle region, arbitrarily close to the edge
        eps = 1e-6
        cfg = critical_triangle(ChargeVector.of([0.25 + eps, 1.0, 1.0]))
        assert cfg is not None


class TestEnumerateAligned:
    def test_three_collinear_arrangements(self):
        configs = enumerate_aligned(PolygonSpace(3), Q111)
        assert len(configs) == 3
        from coulomb_eq.spaces import alignment_defect
        assert all(alignment_defect(c) == 0.0 for c in configs)

    def test_four_torus_labels(self):
        configs = enumerate_aligned(TorusSpace((1.0, 2.0, 3.0)), Q111)
        assert len(configs) == 4

    def test_every_aligned_config_is_stationary(self):
        from coulomb_eq.potentials import gradient
        q = ChargeVector.of([0.5, 2.0, 1.0])
        for space in (PolygonSpace(3), TorusSpace((1.0, 2.0, 3.0))):
            for cfg in enumerate_aligned(space, q):
                assert np.linalg.norm(gradient(cfg, q, COULOMB)) < 1e-11


class TestFindCriticalPointsPolygon:
    def test_balanced_charges_census(self):
        pts = find_critical_points(PolygonSpace(3), Q111)
        assert len(pts) == 5
        minima = [cp for cp in pts if cp.morse_index == 0]
        saddles = [cp for cp in pts if cp.morse_index == 1]
        assert len(minima) == 2 and len(saddles) == 3
        assert all(not cp.aligned for cp in minima)
        assert all(cp.aligned for cp in saddles)
        # the two minima are each other's mirror image
        assert configs_match(apply_involution(minima[0].config), minima[1].config)

    def test_tiny_charge_census(self):
        pts = find_critical_points(PolygonSpace(3), ChargeVector.of([1 / 8, 1, 1]))
        assert len(pts) == 3
        assert sum(cp.morse_index == 0 for cp in pts) == 1
        assert all(cp.aligned for cp in pts)

    def test_results_sorted_by_energy(self):
        pts = find_critical_points(PolygonSpace(3), ChargeVector.of([1, 2, 3]))
        energies = [cp.energy for cp in pts]
        assert energies == sorted(energies)

    def test_every_point_passes_fd_gradient_check(self):
        # the independent finite-difference probe confirms stationarity;
        # its own truncation noise floors out near 1e-8 at these energies
        pts = find_critical_points(PolygonSpace(3), ChargeVector.of([1, 2, 3]))
        for cp in pts:
            fd = fd_gradient(cp.config, ChargeVector.of([1, 2, 3]), COULOMB)
            assert np.linalg.norm(fd) < 5e-8

    def test_mirror_closure(self):
        pts = find_critical_points(PolygonSpace(3), ChargeVector.of([1, 2, 3]))
        for cp in pts:
            mirror = apply_involution(cp.config)
            assert any(configs_match(mirror, other.config) for other in pts)

    def test_mirror_partners_linked_both_ways(self):
        pts = find_critical_points(PolygonSpace(3), ChargeVector.of([1, 2, 3]))
        nonaligned = [cp for cp in pts if not cp.aligned]
        assert nonaligned and all(cp.symmetry_partner is not None
                                  for cp in nonaligned)
        aligned = [cp for cp in pts if cp.aligned]
        assert all(cp.symmetry_partner is None for cp in aligned)

    def test_no_extra_points_at_high_density(self):
        base = find_critical_points(PolygonSpace(3), ChargeVector.of([1, 2, 3]))
        dense = find_critical_points(PolygonSpace(3), ChargeVector.of([1, 2, 3]),
                                     settings=SolveSettings(grid_density=96))
        assert len(base) == len(dense)
        for cp in dense:
            assert any(configs_match(cp.config, other.config) for other in base)


class TestFindCriticalPointsTorus:
    def test_equal_radii_equilateral_pair(self):
        pts = find_critical_points(TorusSpace((1.0, 1.0, 1.0)), Q111)
        assert len(pts) == 2
        third = 2 * math.pi / 3
        angles = sorted(tuple(round(a, 9) for a in cp.config.angles) for cp in pts)
        assert angles[0] == (round(-third, 9), round(-third, 9))
        assert angles[1] == (round(third, 9), round(third, 9))
        assert all(cp.morse_index == 0 for cp in pts)
        assert all(cp.symmetry_partner is not None for cp in pts)

    def test_distinct_radii_generic_census(self):
        pts = find_critical_points(TorusSpace((1.0, 2.0, 3.0)), Q111)
        assert len(pts) == 6
        by_index = sorted(cp.morse_index for cp in pts)
        assert by_index == [0, 0, 1, 1, 1, 2]
        aligned = [cp for cp in pts if cp.aligned]
        assert len(aligned) == 4

    def test_aligned_minimum_census_is_exact(self):
        pts = find_critical_points(TorusSpace((1.0, 2.0, 3.0)),
                                   ChargeVector.of([1.0, 1.0, 100.0]))
        assert len(pts) == 4
        minimum = [cp for cp in pts if cp.morse_index == 0]
        assert len(minimum) == 1 and minimum[0].aligned

    def test_dense_grid_finds_nothing_new(self):
        space = TorusSpace((1.0, 2.0, 3.0))
        q = ChargeVector.of([0.4, 1.3, 0.8])
        base = find_critical_points(space, q)
        dense = find_critical_points(space, q,
                                     settings=SolveSettings(grid_density=96))
        assert len(base) == len(dense)
        for cp in dense:
            assert any(configs_match(cp.config, other.config) for other in base)

    def test_relation_residual_of_reported_points(self):
        # proportion residual of reported points stays at solver precision
        from coulomb_eq.inverse import stationarity_relation_residual
        pts = find_critical_points(TorusSpace((1.0, 2.0, 3.0)), Q111)
        for cp in pts:
            assert stationarity_relation_residual(cp.config, Q111, COULOMB) < 1e-9


class TestLineInterior:
    def test_three_charges_reduces_to_closed_form(self):
        q = ChargeVector.of([4.0, 1.0, 1.0])
        xs, h = solve_line_interior(q)
        assert xs[1] == pytest.approx(1 / 3, abs=1e-12)
        assert np.linalg.eigvalsh(h)[0] > 0.0

    def test_four_charges_symmetric_interior(self):
        q = ChargeVector.of([1.0, 0.001, 0.001, 1.0])
        xs, h = solve_line_interior(q)
        assert xs[0] == 0.0 and xs[3] == 0.5
        assert xs[1] + xs[2] == pytest.approx(0.5, abs=1e-9)
        assert (np.linalg.eigvalsh(h) > 0).all()
        cfg = line_config_from_positions(xs)
        from coulomb_eq.potentials import gradient
        assert np.linalg.norm(gradient(cfg, q, COULOMB)) < 1e-9


class TestPolishCandidates:
    def test_polishes_near_miss_to_equilibrium(self):
        tri = critical_triangle(Q111)
        noisy = tri.points + 1e-3 * np.array([[0, 0], [0.3, 0], [-0.2, 0.4]])
        pts = polish_candidates(PolygonSpace(3), Q111, [noisy])
        assert pts and any(configs_match(cp.config, tri) for cp in pts)

    def test_pole_locked_seed_dropped_silently(self):
        wild = np.array([[0.0, 0.0], [1e-9, 0.0], [0.5, 0.0]])
        pts = polish_candidates(PolygonSpace(3), Q111, [wild])
        assert pts == []


class TestSettings:
    def test_grid_density_floor(self):
        with pytest.raises(ValueError):
            SolveSettings(grid_density=4)

    def test_charge_count_must_match_space(self):
        with pytest.raises(ValueError):
            find_critical_points(PolygonSpace(3), ChargeVector.of([1, 1, 1, 1]))
        with pytest.raises(ValueError):
            find_critical_points(TorusSpace((1, 2, 3)), ChargeVector.of([1, 1]))
