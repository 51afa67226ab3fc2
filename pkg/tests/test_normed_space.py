import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isochain.normed_space import (
    DegeneratePlaneError,
    DimensionError,
    NormSpec,
    PlaneBasis,
    busemann_density,
    in_ball,
    norm_eval,
    unit_ball_volume,
)

SPACES = [
    NormSpec.euclidean(3),
    NormSpec.linf(3),
    NormSpec.l1(3),
    NormSpec.lp(3, 3),
    NormSpec(3, "polytope", vertices=((2, 1, 0), (-2, -1, 0), (0, 1, 1), (0, -1, -1), (1, 0, 3), (-1, 0, -3))),
]

rationals = st.fractions(min_value=-50, max_value=50, max_denominator=20)
vec3 = st.tuples(rationals, rationals, rationals)


@pytest.mark.parametrize(
    "space, v, expected",
    [
        (NormSpec.euclidean(2), (3, 4), 5),
        (NormSpec.linf(2), (1, 1), 1),
        (NormSpec.lp(2, 1), (1, 1), 2),
        (NormSpec.l1(2), (1, -1), 2),
        (NormSpec.linf(3), (Fraction(1, 3), -2, 1), 2),
    ],
)
def test_norm_examples(space, v, expected):
    assert norm_eval(space, v) == pytest.approx(expected, rel=1e-15)


def test_polytope_norm_is_exact():
    assert norm_eval(NormSpec.l1(2), (Fraction(1, 3), Fraction(1, 7))) == Fraction(10, 21)


@pytest.mark.parametrize("space", SPACES, ids=lambda s: s.kind + str(s.p or ""))
@settings(max_examples=150, deadline=None)
@given(u=vec3, v=vec3, a=rationals)
def test_norm_axioms(space, u, v, a):
    nu, nv = norm_eval(space, u), norm_eval(space, v)
    nuv = norm_eval(space, [x + y for x, y in zip(u, v)])
    assert nuv <= nu + nv + 1e-9 * (1 + float(nu + nv))
    scaled = norm_eval(space, [a * x for x in u])
    if space.exact:
        assert scaled == abs(a) * nu
    else:
        assert scaled == pytest.approx(abs(float(a)) * nu, rel=1e-12, abs=1e-12)
    assert (nu == 0) == all(x == 0 for x in u)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        norm_eval(NormSpec.euclidean(3), (1, 2))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(dimension=2, kind="polytope", vertices=((1, 0), (0, 1), (-1, 0))),
        dict(dimension=2, kind="polytope", vertices=((1, 1), (-1, -1))),
        dict(dimension=2, kind="lp", p=Fraction(1, 2)),
        dict(dimension=2, kind="hexagonal"),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        NormSpec(**kwargs)


def test_facets_of_square():
    assert set(NormSpec.linf(2).facets) == {(1, 0), (-1, 0), (0, 1), (0, -1)}


@pytest.mark.parametrize(
    "space, expected",
    [
        (NormSpec.euclidean(2), 1.0),
        (NormSpec.linf(2), math.pi / 4),
        (NormSpec.l1(2), math.pi / 2),
    ],
)
def test_full_plane_density(space, expected):
    plane = PlaneBasis(((1, 0), (0, 1)))
    assert busemann_density(space, plane) == pytest.approx(expected, rel=1e-14)


def test_lp2_density_matches_euclidean():
    plane = PlaneBasis(((1, 2, 0), (0, 1, 1)))
    assert busemann_density(NormSpec.lp(3, 2), plane) == pytest.approx(1.0, rel=1e-8)


def test_density_invariant_under_change_of_basis():
    space = NormSpec.linf(3)
    a = PlaneBasis(((1, 2, 0), (0, 1, 1)))
    b = PlaneBasis(((1, 3, 1), (2, 3, -1)))  # same plane, other basis
    assert busemann_density(space, a) == busemann_density(space, b)


def test_density_monotone_under_nested_balls():
    # the l1 ball sits inside the linf ball, so its sections are smaller
    for vecs in [((1, 0, 0), (0, 1, 0)), ((1, 1, 0), (0, 1, 2)), ((1, 2, 3), (3, -1, 1))]:
        plane = PlaneBasis(vecs)
        assert busemann_density(NormSpec.l1(3), plane) >= busemann_density(NormSpec.linf(3), plane)


def test_density_of_a_line_is_norm_ratio():
    plane = PlaneBasis(((1, 1),))
    assert busemann_density(NormSpec.linf(2), plane) == pytest.approx(1 / math.sqrt(2))


def test_degenerate_plane():
    with pytest.raises(DegeneratePlaneError):
        PlaneBasis(((1, 2, 3), (2, 4, 6)))


def test_unit_ball_volumes():
    assert unit_ball_volume(1) == pytest.approx(2)
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)


def test_in_ball_is_closed():
    assert in_ball(NormSpec.linf(2), (1, 1), (0, 0), Fraction(1))
    assert in_ball(NormSpec.euclidean(2), (Fraction(3, 5), Fraction(4, 5)), (0, 0), Fraction(1))
