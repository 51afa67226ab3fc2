import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import square_loop
from isochain.chain_core import Chain, equivalent, is_zero_current, mass, support_diameter
from isochain.decomposition import (
    DecompositionError,
    NoSplitRadius,
    constants,
    constants_for,
    decompose,
    extremal_beta,
    find_split_radius,
    glued_flat_beta,
    ode_bound,
    ode_hypotheses_hold,
    ode_lower_bound_check,
    split_off,
    split_ratio,
    synthetic_beta,
)
from isochain.generators import figure_eight, multi_loop, perturbed_polygon, polyhedral_sphere, regular_polygon, thin_rectangle
from isochain.isofill import FillConfig, fill
from isochain.normed_space import NormSpec
from isochain.chain_core import AffineMap, pushforward
from isochain.product_cone import is_current_cycle
from isochain.slicing import critical_radius, growth_function

E2 = NormSpec.euclidean(2)
LINF2 = NormSpec.linf(2)


def formula_constants(k, lam=1 / 6):
    """Independent float recomputation of the constant chain."""
    out = {}
    C = None
    for j in range(1, k + 1):
        Ck = j + 1
        a = 5.0**-j
        if j == 1:
            F, l, E = 1.0, 0.0, 4.0
        else:
            l = lam
            while True:
                F = l ** (j - 1) / (C ** (j - 1) * j**j)
                if F < math.pi ** (j / 2) / math.gamma(j / 2 + 1) / j ** (j / 2):
                    break
                l /= 2
            E = 4 / (F * (1 - l)) ** (1 / j)
        delta = a * (1 - l)
        D = Ck * E * ((1 + l) / delta) ** ((j + 1) / j)
        out[j] = dict(F=F, lam=l, delta=delta, E=E, Ck=Ck, D=D, C=C)
        C = D
    return out


class TestConstants:
    def test_k1(self):
        c = constants(1)
        assert (c.F, c.lam, c.delta, c.E, c.Ck, c.D) == (1, 0, Fraction(1, 5), 4.0, 2, 200.0)

    def test_k2_values(self):
        c = constants_for(2)[-1]
        assert c.C == 200.0
        assert c.F == Fraction(1, 4800)
        assert c.delta == Fraction(1, 30)
        assert c.E == pytest.approx(4 * math.sqrt(5760), rel=1e-12)
        assert c.D == pytest.approx(3 * c.E * 35**1.5, rel=1e-12)

    @pytest.mark.parametrize("k", [1, 2, 3])
    @pytest.mark.parametrize("lam", [Fraction(1, 6), Fraction(1, 10), Fraction(1, 50)])
    def test_against_formula(self, k, lam):
        oracle = formula_constants(k, float(lam))
        for c in constants_for(k, lam):
            o = oracle[c.k]
            assert float(c.F) == pytest.approx(o["F"], rel=1e-9)
            assert float(c.lam) == pytest.approx(o["lam"], rel=1e-9)
            assert float(c.delta) == pytest.approx(o["delta"], rel=1e-9)
            assert c.E == pytest.approx(o["E"], rel=1e-9)
            assert c.Ck == o["Ck"]
            assert c.D == pytest.approx(o["D"], rel=1e-9)

    def test_invariants(self):
        for c in constants_for(3):
            if c.k >= 2:
                assert float(c.F) < math.pi ** (c.k / 2) / math.gamma(c.k / 2 + 1) / c.k ** (c.k / 2)
                assert 3 * c.lam <= Fraction(1, 2)
                assert c.support_factor <= 2 + 1e-12
            assert c.delta == c.alpha * (1 - c.lam)

    @pytest.mark.parametrize("lam", [0, Fraction(1, 5), -1])
    def test_bad_lambda(self, lam):
        with pytest.raises(ValueError):
            constants(2, 200, lam)

    def test_needs_previous_constant(self):
        with pytest.raises(ValueError):
            constants(2)


class TestGrowthLemma:
    @pytest.mark.parametrize("k", [2, 3])
    def test_extremal(self, k):
        b = extremal_beta(5.0, k, 0.5, 3.0)
        assert ode_hypotheses_hold(5.0, k, b, 0.5, 3.0)
        assert ode_lower_bound_check(5.0, k, b, 0.5, 3.0)
        for r in np.linspace(0.5, 3.0, 11):
            assert b.value(r) == pytest.approx(ode_bound(5.0, k, r))

    @pytest.mark.parametrize("seed", range(8))
    def test_synthetic(self, seed):
        k = 2 + seed % 2
        b = synthetic_beta(3.0, k, 0.2, 2.0, seed)
        assert ode_hypotheses_hold(3.0, k, b, 0.2, 2.0)
        assert ode_lower_bound_check(3.0, k, b, 0.2, 2.0)

    def test_glued_flat_is_detected(self):
        b = glued_flat_beta(2.0, 2, 0.5, 4.0, 1.0)
        assert not ode_hypotheses_hold(2.0, 2, b, 0.5, 4.0)
        assert not ode_lower_bound_check(2.0, 2, b, 0.5, 4.0)

    def test_invalid_interval(self):
        b = extremal_beta(1.0, 2, 0.0, 1.0)
        with pytest.raises(ValueError):
            ode_lower_bound_check(1.0, 2, b, 1.0, 0.5)
        with pytest.raises(ValueError):
            ode_lower_bound_check(1.0, 1, b, 0.0, 1.0)


def sampled_distance_range(a, b, y, n=2001):
    ts = np.linspace(0, 1, n)
    pts = np.outer(1 - ts, np.array(a, float)) + np.outer(ts, np.array(b, float))
    d = np.linalg.norm(pts - np.array(y, float), axis=1)
    return d.min(), d.max()


class TestSplitRadius:
    def test_single_loop(self):
        T = regular_polygon(12, 1)
        y = T.vertices()[0]
        c = constants(1)
        g = growth_function(T, y)
        r0 = critical_radius(g, c.F, 1)
        r = find_split_radius(T, y, g, c, r0)
        assert r0 <= r < 2 * r0
        for (a, b), _ in T.terms.items():
            lo, hi = sampled_distance_range(a, b, y)
            assert not lo - 1e-9 <= float(r) <= hi + 1e-9

    def test_two_loops(self):
        T = multi_loop(2, 100, 12, 1)
        y = T.vertices()[0]
        c = constants(1)
        g = growth_function(T, y)
        r0 = critical_radius(g, c.F, 1)
        r = find_split_radius(T, y, g, c, r0)
        assert r0 <= r < 2 * r0
        # beyond loop 1, short of loop 2
        assert 2 < float(r) < 98

    def test_k2_sphere(self):
        T = polyhedral_sphere(1)
        c = constants_for(2)[-1]
        y = T.vertices()[0]
        g = growth_function(T, y)
        r0 = critical_radius(g, c.F, 2)
        r = find_split_radius(T, y, g, c, r0)
        assert r0 <= r <= Fraction(4, 3) * Fraction(r0) + Fraction(1, 10**9)
        # oracle: central difference of β, away from the breakpoints
        h = 1e-7
        d = (g.value(float(r) + h) - g.value(float(r) - h)) / (2 * h)
        assert c.C * d**2 < float(c.lam) * g.value(float(r))
        assert split_ratio(g, float(r), c.C, float(c.lam), 2) < 1

    def test_zero_critical_radius(self):
        T = square_loop(E2)
        g = growth_function(T, (0, 0))
        with pytest.raises(NoSplitRadius):
            find_split_radius(T, (0, 0), g, constants(1), 0)


class TestSplitOff:
    def test_two_loops(self):
        T = multi_loop(2, 100, 8, 1)
        loop1 = regular_polygon(8, 1)
        c = constants(1)
        piece, rest, rec = split_off(T, (0, 0), Fraction(10), c, Fraction(8))
        assert piece == loop1
        assert rest == regular_polygon(8, 1, center=(100, 0))
        assert rec.mass == pytest.approx(mass(loop1))

    def test_radius_through_support(self):
        with pytest.raises(DecompositionError):
            split_off(square_loop(E2), (0, 0), Fraction(6, 5), constants(1), Fraction(1))

    def test_k2_far_spheres(self):
        a = polyhedral_sphere(0)
        b = pushforward(a, AffineMap(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (100, 0, 0)))
        T = a + b
        c = constants_for(2)[-1]
        piece, rest, rec = split_off(T, (0, 0, 0), Fraction(2), c, Fraction(3, 2))
        assert piece == a
        assert equivalent(rest, b)
        assert rec.fill_mass == 0

    def test_k2_slice_filled(self):
        T = polyhedral_sphere(1)
        c = constants_for(2)[-1]
        y = T.vertices()[0]
        g = growth_function(T, y)
        r0 = critical_radius(g, c.F, 2)
        r = find_split_radius(T, y, g, c, r0)
        filler = lambda s: fill(s, FillConfig())[0]
        piece, rest, rec = split_off(T, y, r, c, r0, filler)
        assert is_current_cycle(piece) and is_current_cycle(rest)
        assert equivalent(piece + rest, T)
        assert rec.fill_mass <= float(c.lam) * rec.beta * (1 + 1e-12)
        lam = float(c.lam)
        assert (1 - lam) * rec.beta <= rec.mass * (1 + 1e-12) <= (1 + lam) * rec.beta * (1 + 1e-12)


def check_invariants(T, d):
    c = d.constants
    total = Chain.zero(T.dim, T.space)
    for p in d.pieces:
        total = total + p
        assert is_current_cycle(p)
        assert float(support_diameter(p)) <= c.E * mass(p) ** (1 / c.k) * (1 + 1e-12)
    assert is_current_cycle(d.remainder)
    assert is_zero_current(T - total - d.remainder)
    M = mass(T)
    assert mass(d.remainder) <= float(1 - c.delta) * M * (1 + 1e-12) + 1e-15
    assert sum(mass(p) for p in d.pieces) <= float(1 + c.lam) * M * (1 + 1e-12) + 1e-15


class TestDecompose:
    def test_two_far_loops(self):
        T = multi_loop(2, 100, 12, 1)
        d = decompose(T, constants(1))
        assert d.n == 2
        assert not d.remainder
        check_invariants(T, d)

    def test_zero(self):
        d = decompose(Chain.zero(1, E2), constants(1))
        assert d.n == 0 and not d.remainder

    def test_thin_rectangle(self):
        T = thin_rectangle(100)
        d = decompose(T, constants(1))
        assert d.n >= 1
        check_invariants(T, d)
        assert mass(d.remainder) <= float(1 - constants(1).delta) * mass(T)

    def test_figure_eight(self):
        # the lobes share a vertex, so every sphere around a point of one lobe that
        # clears it also meets the other: a single piece takes both lobes
        T = figure_eight()
        d = decompose(T, constants(1))
        check_invariants(T, d)
        assert d.n == 1 and d.pieces[0] == T

    @pytest.mark.parametrize("space", [E2, LINF2, NormSpec.l1(2), NormSpec.lp(2, 3)], ids=["e", "linf", "l1", "l3"])
    @pytest.mark.parametrize("seed", range(3))
    def test_k1_corpus(self, space, seed):
        T = perturbed_polygon(10, 2, 0.3, seed=seed, space=space) + regular_polygon(6, 1, space, center=(5 + seed, 1))
        c = constants(1)
        d = decompose(T, c)
        check_invariants(T, d)
        # k = 1 pieces are restrictions: no λ-slack, and E = 4
        assert sum(mass(p) for p in d.pieces) <= mass(T) * (1 + 1e-12)
        assert c.E <= 4 and c.lam == 0
        assert all(d.checks.values())

    def test_k2_sphere(self):
        T = polyhedral_sphere(1)
        c = constants_for(2)[-1]
        filler = lambda s: fill(s, FillConfig())[0]
        d = decompose(T, c, filler)
        check_invariants(T, d)

    def test_k2_two_spheres(self):
        # with F = 1/4800 the critical radius of one octahedron is about 129, so
        # the 2r₀ balls separate only beyond roughly 520
        a = polyhedral_sphere(0)
        b = pushforward(a, AffineMap(((1, 0, 0), (0, 1, 0), (0, 0, 1)), (10000, 0, 0)))
        d = decompose(a + b, constants_for(2)[-1])
        assert d.n == 2 and not d.remainder

    def test_wrong_dimension(self):
        with pytest.raises(ValueError):
            decompose(square_loop(E2), constants_for(2)[-1])

    def test_ledger_lines(self):
        d = decompose(multi_loop(2, 100, 8, 1), constants(1))
        lines = d.ledger()
        assert lines[1] == "pieces=2"
        assert any(l.startswith("piece.1=") for l in lines)
        assert all(l.endswith("pass") for l in lines if l.startswith("check."))
