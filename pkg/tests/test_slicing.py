import math
import random
from fractions import Fraction

import numpy as np
import pytest

from conftest import octahedron, square_loop
from isochain.chain_core import ChainError, boundary, equivalent, mass, reduce
from isochain.clipping import Ball, split_by_ball
from isochain.generators import polyhedral_sphere, regular_polygon, thin_rectangle
from isochain.normed_space import NormSpec
from isochain.slicing import (
    LIP_RHO,
    critical_radius,
    growth_function,
    slice_chain,
    slice_mass_vs_derivative,
    synthetic_growth,
)

E2 = NormSpec.euclidean(2)
LINF2 = NormSpec.linf(2)


def square_beta_euclid(r):
    """Length of the (±1, ±1) square inside the Euclidean disc of radius r."""
    if r < 1:
        return 0.0
    if r >= math.sqrt(2):
        return 8.0
    return 8 * math.sqrt(r * r - 1)


def loop_beta(r, y, corners):
    """Length of a closed polygon inside the disc B(y, r), side by side."""
    total = 0.0
    for a, b in zip(corners, corners[1:] + corners[:1]):
        d = (b[0] - a[0], b[1] - a[1])
        w = (a[0] - y[0], a[1] - y[1])
        A, B, C = d[0] ** 2 + d[1] ** 2, 2 * (d[0] * w[0] + d[1] * w[1]), w[0] ** 2 + w[1] ** 2 - r * r
        disc = B * B - 4 * A * C
        if disc <= 0:
            continue
        t1, t2 = (-B - math.sqrt(disc)) / (2 * A), (-B + math.sqrt(disc)) / (2 * A)
        total += max(0.0, min(t2, 1) - max(t1, 0)) * math.sqrt(A)
    return total


class TestSlice:
    def test_sphere_misses_support(self):
        assert not slice_chain(square_loop(E2), (0, 0), Fraction(1, 2)).chain

    def test_eight_crossings(self):
        s = slice_chain(square_loop(E2), (0, 0), Fraction(6, 5))
        assert s.chain.dim == 0 and len(s.chain) == 8
        assert set(s.chain.terms.values()) == {1, -1}
        assert s.chain.total_weight() == 0
        assert s.deviation <= float(s.tol)

    def test_sphere_slice_is_closed_polygon(self):
        T = polyhedral_sphere(1)
        s = slice_chain(T, (0, 0, 0), Fraction(99, 100))
        assert s.chain and not boundary(s.chain)

    def test_slice_reconstructs_outside(self):
        T = octahedron(NormSpec.l1(3))
        ball = Ball((Fraction(1, 5), 0, Fraction(1, 3)), Fraction(7, 10), T.space)
        split = split_by_ball(T, ball)
        s = slice_chain(T, ball.center, ball.radius)
        assert s.chain == boundary(split.inside)
        assert equivalent(s.chain, -boundary(split.outside))

    def test_non_cycle_subtracts_boundary_term(self):
        T = reduce([([(0, 0), (3, 0)], 1)], E2)
        s = slice_chain(T, (0, 0), Fraction(1))
        # ∂(T⌊B) = [1,0] − [0,0]; (∂T)⌊B = −[0,0]
        assert s.chain.total_weight() == 1 and len(s.chain) == 1

    def test_bad_radius(self):
        with pytest.raises(ValueError):
            slice_chain(square_loop(E2), (0, 0), 0)


class TestGrowth:
    def test_unit_segment_from_endpoint(self):
        g = growth_function(reduce([([(0, 0), (1, 0)], 1)], E2), (0, 0))
        for r in (0.1, 0.5, 0.99, 1.0, 3.0):
            assert g.value(r) == pytest.approx(min(r, 1.0))

    def test_linf_square_jumps_at_tangency(self):
        g = growth_function(square_loop(LINF2), (0, 0))
        assert g.value(Fraction(99, 100)) == 0
        assert g.value(1) == 8
        assert Fraction(1) in g.tangencies

    def test_euclidean_square_closed_form(self):
        g = growth_function(square_loop(E2), (0, 0))
        assert g.value(1) == 0
        assert g.value(math.sqrt(2)) == pytest.approx(8)
        rs = np.linspace(1.0, math.sqrt(2), 40)
        vals = [g.value(r) for r in rs]
        assert all(a < b for a, b in zip(vals, vals[1:]))
        for r in rs:
            assert g.value(r) == pytest.approx(square_beta_euclid(r), abs=1e-12)

    @pytest.mark.parametrize("space", [E2, LINF2, NormSpec.l1(2)], ids=lambda s: s.kind + s.describe()[-6:])
    def test_monotone_and_total(self, space):
        T = regular_polygon(9, 2, space)
        g = growth_function(T, (Fraction(1, 3), Fraction(-1, 2)))
        rs = np.linspace(0, g.max_distance * 1.2, 200)
        vals = [g.value(r) for r in rs]
        assert vals[0] == 0
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        assert vals[-1] == pytest.approx(mass(T))

    def test_polytope_pieces_match_values(self):
        T = octahedron(NormSpec.linf(3))
        g = growth_function(T, (Fraction(1, 5), Fraction(-2, 5), Fraction(1, 10)))
        for a, b, poly in zip(g.breakpoints, g.breakpoints[1:], g.pieces):
            for t in (Fraction(1, 7), Fraction(1, 2), Fraction(6, 7)):
                r = a + (b - a) * t
                assert np.polyval(poly, float(r)) == pytest.approx(g.value(r), abs=1e-9)
            assert len(poly) <= 3

    def test_lip_constant(self):
        assert LIP_RHO == 1


class TestCriticalRadius:
    def test_min_r_one(self):
        g = synthetic_growth(lambda r: min(r, 1.0), lambda r: float(r < 1), [0, 1], 1)
        assert critical_radius(g, 1, 1) == pytest.approx(1)

    def test_constant_beta(self):
        # a chain of mass M concentrated near y: β(r) ≥ r iff r ≤ M
        M = 5.0
        g = synthetic_growth(lambda r: M, lambda r: 0.0, [0, 1e-9], 1)
        assert critical_radius(g, 1, 1) == pytest.approx(M)

    def test_loop_crossing_by_bisection(self):
        # for a convex loop the plateau always dominates; a 10 × 1 rectangle
        # seen from the middle of a short side has β ≈ 1 + 2r and an interior crossing
        corners = [(0, 0), (10, 0), (10, 1), (0, 1)]
        y = (0.0, 0.5)
        g = growth_function(thin_rectangle(10), (0, Fraction(1, 2)))
        F = 2.5
        top = math.hypot(10, 0.5)
        assert 22 < F * top
        grid = np.linspace(0, top, 4001)
        j = max(i for i, r in enumerate(grid) if loop_beta(r, y, corners) >= F * r)
        lo, hi = grid[j], grid[j + 1]
        for _ in range(200):
            mid = (lo + hi) / 2
            lo, hi = (mid, hi) if loop_beta(mid, y, corners) >= F * mid else (lo, mid)
        r0 = critical_radius(g, F, 1)
        assert 1 < r0 < top
        assert r0 == pytest.approx(lo, abs=1e-9)
        assert g.value(r0) >= F * r0 - 1e-9

    def test_unit_f_captures_whole_square(self):
        g = growth_function(square_loop(E2), (0, 0))
        assert critical_radius(g, 1, 1) == pytest.approx(8)

    @pytest.mark.parametrize("seed", range(5))
    def test_maximality(self, seed):
        rng = random.Random(seed)
        space = [E2, LINF2][seed % 2]
        T = regular_polygon(7, 3, space) + regular_polygon(5, 1, space, center=(9, 0))
        y = (Fraction(rng.randint(-12, 40), 4), Fraction(rng.randint(-12, 12), 4))
        g = growth_function(T, y)
        F = rng.choice([2, 3, 5])
        r0 = critical_radius(g, F, 1)
        if r0 > 0:
            assert g.value(r0) >= F * r0 * (1 - 1e-12)
        for r in np.linspace(r0 + 1e-9, r0 + 20, 300):
            assert g.value(r) < F * r

    def test_zero_when_nothing_qualifies(self):
        g = growth_function(square_loop(E2), (50, 50))
        assert critical_radius(g, 1, 1) == 0.0


class TestSlicingInequality:
    def test_square_loop(self):
        rep = slice_mass_vs_derivative(square_loop(E2), (0, 0), [Fraction(11, 10), Fraction(6, 5), Fraction(13, 10)])
        assert rep.ok(1e-6)
        for c in rep.checks:
            assert c.slice_mass == pytest.approx(8)
            assert c.derivative >= 8

    def test_empty_slice(self):
        rep = slice_mass_vs_derivative(square_loop(E2), (0, 0), [Fraction(1, 2)])
        assert rep.checks[0].slice_mass == 0 and rep.max_violation == 0

    def test_polyhedral_sphere(self):
        rng = random.Random(3)
        radii = [Fraction(rng.randint(30, 130), 100) for _ in range(10)]
        rep = slice_mass_vs_derivative(polyhedral_sphere(1), (Fraction(1, 10), 0, 0), radii)
        assert rep.ok(1e-6)

    def test_exact_mode_is_tight(self):
        T = regular_polygon(11, 2, NormSpec.l1(2))
        rep = slice_mass_vs_derivative(T, (Fraction(1, 3), Fraction(1, 4)), [Fraction(j, 10) for j in range(5, 30, 2)])
        assert rep.max_violation <= 1e-9

    def test_needs_cycle(self):
        with pytest.raises(ChainError):
            slice_mass_vs_derivative(reduce([([(0, 0), (1, 0)], 1)], E2), (0, 0), [1])
