"""Vitali-type covering: disjoint dilated balls that capture a fixed mass fraction."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .chain_core import Chain, ChainError, mass
from .linalg import Point, centroid, dot, sub
from .normed_space import NormSpec, norm_eval
from .slicing import GrowthFunction, critical_radius, growth_function


def alpha(k: int) -> Fraction:
    """Captured-mass fraction guaranteed by greedy selection (5r-covering)."""
    return Fraction(1, 5**k)


@dataclass
class WeightedCandidate:
    point: Point
    r0: Fraction
    captured: float
    growth: GrowthFunction | None = None


@dataclass
class CoverSelection:
    selected: list
    fraction: float
    total_mass: float

    @property
    def points(self) -> list:
        return [c.point for c in self.selected]


def candidate_points(T: Chain, extra: int = 0, seed: int = 0) -> list[Point]:
    """Vertices and barycentres, plus ``extra`` random points per simplex."""
    pts = set(T.vertices())
    pts.update(centroid(key) for key in T.terms)
    if extra:
        rng = np.random.default_rng(seed)
        denom = 1024
        for key in sorted(T.terms):
            for _ in range(extra):
                w = rng.integers(1, denom, size=len(key))
                bary = [Fraction(int(x), int(w.sum())) for x in w]
                pts.add(tuple(sum((b * v[i] for b, v in zip(bary, key)), Fraction(0)) for i in range(len(key[0]))))
    return sorted(pts)


def select_candidates(T: Chain, F, k: int | None = None, extra: int = 0, seed: int = 0, keep_growth: bool = False) -> list[WeightedCandidate]:
    """Candidates with their critical radii; those with r₀ = 0 are dropped."""
    if not T:
        raise ChainError("no candidates on the zero chain")
    k = T.dim if k is None else k
    out = []
    for y in candidate_points(T, extra, seed):
        g = growth_function(T, y)
        r0 = critical_radius(g, F, k)
        if r0 <= 0:
            continue
        out.append(WeightedCandidate(y, Fraction(r0), g.value(r0), g if keep_growth else None))
    return out


def balls_disjoint(space: NormSpec, x: Point, rx: Fraction, y: Point, ry: Fraction) -> bool:
    """Closed balls B(x, rx) and B(y, ry) are disjoint (exact except for lp norms)."""
    d = sub(x, y)
    s = rx + ry
    if space.kind == "polytope":
        return norm_eval(space, d) > s
    if space.kind == "euclidean":
        return dot(d, d) > s * s
    return float(norm_eval(space, d)) > float(s)


def greedy_cover(cands: Sequence[WeightedCandidate], space: NormSpec, total_mass: float) -> CoverSelection:
    """Greedy by decreasing r₀ (ties: smallest point) keeping the 2r₀-balls disjoint."""
    if not cands:
        raise ChainError("greedy cover needs at least one candidate")
    order = sorted(cands, key=lambda c: (-c.r0, c.point))
    chosen: list[WeightedCandidate] = []
    for c in order:
        if all(balls_disjoint(space, c.point, 2 * c.r0, s.point, 2 * s.r0) for s in chosen):
            chosen.append(c)
    frac = sum(c.captured for c in chosen) / total_mass if total_mass > 0 else 0.0
    return CoverSelection(chosen, frac, total_mass)


def cover(T: Chain, F, k: int | None = None, retries: int = 3, seed: int = 0, keep_growth: bool = False) -> CoverSelection:
    """Select, cover, and double the candidate density until the α fraction is met."""
    k = T.dim if k is None else k
    M = mass(T)
    extra = 0
    sel = None
    for attempt in range(retries + 1):
        cands = select_candidates(T, F, k, extra, seed, keep_growth)
        sel = greedy_cover(cands, T.space, M)
        if sel.fraction >= float(alpha(k)):
            return sel
        extra = max(1, 2 * extra)
    return sel


def is_pairwise_disjoint(sel: CoverSelection, space: NormSpec) -> bool:
    return all(
        balls_disjoint(space, a.point, 2 * a.r0, b.point, 2 * b.r0)
        for a, b in itertools.combinations(sel.selected, 2)
    )


def five_r_cover_holds(cands: Sequence[WeightedCandidate], sel: CoverSelection, space: NormSpec) -> bool:
    """Each B(y, r₀(y)) lies in some B(y_i, 5r₀(y_i)) with r₀(y_i) ≥ r₀(y)."""
    for c in cands:
        ok = False
        for s in sel.selected:
            if s.r0 < c.r0:
                continue
            d = norm_eval(space, sub(c.point, s.point))
            if (d if space.exact else Fraction(d)) + c.r0 <= 5 * s.r0 * (1 if space.exact else 1 + Fraction(1, 10**12)):
                ok = True
                break
        if not ok:
            return False
    return True


def best_disjoint_capture(cands: Sequence[WeightedCandidate], space: NormSpec) -> float:
    """Exhaustive maximum of Σ captured over subsets with disjoint 2r₀-balls."""
    n = len(cands)
    if n > 20:
        raise ValueError("exhaustive search is limited to 20 candidates")
    clash = [[not balls_disjoint(space, a.point, 2 * a.r0, b.point, 2 * b.r0) for b in cands] for a in cands]
    best = 0.0
    for mask in range(1, 1 << n):
        idx = [i for i in range(n) if mask >> i & 1]
        if any(clash[i][j] for i, j in itertools.combinations(idx, 2)):
            continue
        best = max(best, sum(cands[i].captured for i in idx))
    return best
