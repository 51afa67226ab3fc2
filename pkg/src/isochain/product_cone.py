"""Interval products and cone fillings along straight segments."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .chain_core import Chain, ChainError, boundary, diameter_with, is_cycle, is_zero_current, mass, reduce
from .linalg import Point, as_point
from .normed_space import NormSpec

# straight segments: length(c_xy) = d(x, y) and d(c_xy(t), c_xy'(t)) = t d(y, y')
GAMMA = 1


class ConeBoundViolation(RuntimeError):
    pass


def _lift(v: Point, t: int) -> Point:
    return (Fraction(t),) + v


def product_space(space: NormSpec) -> NormSpec:
    # prisms are only used for their chain algebra; no mass is taken on [0,1] x X
    return NormSpec.euclidean(space.dimension + 1)


def level(T: Chain, t: int) -> Chain:
    """[t] x T: the chain T placed at first coordinate t."""
    space = product_space(T.space)
    return Chain(T.dim, space, {tuple(_lift(v, t) for v in key): w for key, w in T.terms.items()})


def interval_product(T: Chain) -> Chain:
    """[0,1] x T by the staircase triangulation of each prism.

    Orientation: interval first, so ∂([0,1]×T) = [1]×T − [0]×T − [0,1]×∂T.
    """
    space = product_space(T.space)
    raw = []
    for key, w in T.terms.items():
        for i in range(len(key)):
            cell = [_lift(v, 0) for v in key[: i + 1]] + [_lift(v, 1) for v in key[i:]]
            raw.append((cell, (-1) ** i * w))
    if not raw:
        return Chain.zero(T.dim + 1, space)
    return reduce(raw, space, T.dim + 1)


def is_current_cycle(T: Chain) -> bool:
    """∂T = 0 as a current (syntactic cancellation is not required)."""
    if T.dim == 0 or not T:
        return is_cycle(T)
    return is_zero_current(boundary(T))


def cone_bound(T: Chain, apex: Point) -> float:
    """(k+1) γ^(k+1) diam(spt T ∪ {apex}) M(T)."""
    if not T:
        return 0.0
    return (T.dim + 1) * GAMMA ** (T.dim + 1) * float(diameter_with(T, apex)) * mass(T)


@dataclass
class ConeFilling:
    chain: Chain
    apex: Point
    mass: float
    bound: float


def cone(T: Chain, apex, check: bool = True) -> Chain:
    return cone_filling(T, apex, check).chain


def cone_filling(T: Chain, apex, check: bool = True) -> ConeFilling:
    """Cone over the cycle T from ``apex``; ∂S = T as currents."""
    apex = as_point(apex)
    if len(apex) != T.space.dimension:
        raise ChainError("apex has the wrong dimension")
    if not is_current_cycle(T):
        raise ChainError("cone needs a cycle")
    raw = [((apex,) + key, w) for key, w in T.terms.items()]
    S = reduce(raw, T.space, T.dim + 1) if raw else Chain.zero(T.dim + 1, T.space)
    if T and not S and not is_zero_current(T):
        raise ChainError("internal error: every cone cell degenerated for a nonzero cycle")
    m = mass(S)
    bound = cone_bound(T, apex)
    if check and m > bound * (1 + 1e-12) + 1e-15:
        raise ConeBoundViolation(f"cone mass {m} exceeds certified bound {bound}")
    return ConeFilling(S, apex, m, bound)


def support_apex(T: Chain) -> Point:
    """Apex taken from spt T; every vertex gives the same diameter, so take the smallest."""
    return T.vertices()[0]


def cone_from_support(T: Chain, check: bool = True) -> Chain:
    if not T:
        return Chain.zero(T.dim + 1, T.space)
    return cone(T, support_apex(T), check)
