"""Ambient normed spaces and Busemann volume densities."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate
from scipy.spatial import ConvexHull

from .linalg import Point, as_point, dot, gram_det, rank, shoelace, solve, sort_ccw

KINDS = ("euclidean", "lp", "polytope")
QUAD_TOL = 1e-9


class DimensionError(ValueError):
    pass


class DegeneratePlaneError(ValueError):
    pass


def unit_ball_volume(k: int) -> float:
    """omega_k, Lebesgue measure of the Euclidean unit ball in R^k."""
    return math.pi ** (k / 2) / math.gamma(k / 2 + 1)


@dataclass(frozen=True)
class NormSpec:
    dimension: int
    kind: str = "euclidean"
    p: Fraction | None = None
    vertices: tuple[Point, ...] | None = field(default=None)

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.kind not in KINDS:
            raise ValueError(f"unknown norm kind {self.kind!r}")
        if self.kind == "lp":
            if self.p is None or Fraction(self.p) < 1:
                raise ValueError("lp exponent must be >= 1")
            object.__setattr__(self, "p", Fraction(self.p))
        if self.kind == "polytope":
            if not self.vertices:
                raise ValueError("polytope norm needs vertices")
            verts = tuple(sorted(set(as_point(v) for v in self.vertices)))
            if any(len(v) != self.dimension for v in verts):
                raise DimensionError("polytope vertex of wrong dimension")
            vs = set(verts)
            if any(tuple(-c for c in v) not in vs for v in verts):
                raise ValueError("polytope vertex set must be centrally symmetric")
            if rank(verts) != self.dimension:
                raise ValueError("polytope vertices must span the space")
            object.__setattr__(self, "vertices", verts)

    @classmethod
    def euclidean(cls, n: int) -> "NormSpec":
        return cls(n, "euclidean")

    @classmethod
    def lp(cls, n: int, p) -> "NormSpec":
        return cls(n, "lp", p=Fraction(p))

    @classmethod
    def linf(cls, n: int) -> "NormSpec":
        verts = [as_point(s) for s in itertools.product((-1, 1), repeat=n)]
        return cls(n, "polytope", vertices=tuple(verts))

    @classmethod
    def l1(cls, n: int) -> "NormSpec":
        verts = []
        for i in range(n):
            for s in (-1, 1):
                v = [0] * n
                v[i] = s
                verts.append(as_point(v))
        return cls(n, "polytope", vertices=tuple(verts))

    @property
    def exact(self) -> bool:
        """Polytope norms keep every sphere crossing rational."""
        return self.kind == "polytope"

    @cached_property
    def facets(self) -> tuple[Point, ...]:
        """Outer facet normals a with ``||v|| = max a.v`` (polytope kind only)."""
        if self.kind != "polytope":
            raise TypeError("facets only exist for polytope norms")
        n = self.dimension
        found = set()
        for subset in itertools.combinations(self.vertices, n):
            a = solve(subset, [Fraction(1)] * n)
            if a is None or a in found:
                continue
            if max(dot(a, w) for w in self.vertices) == 1:
                found.add(a)
        return tuple(sorted(found))

    def describe(self) -> str:
        if self.kind == "euclidean":
            return "euclidean"
        if self.kind == "lp":
            return f"lp {self.p}"
        return "polytope " + " ".join(",".join(str(c) for c in v) for v in self.vertices)


def _check(space: NormSpec, v: Sequence) -> None:
    if len(v) != space.dimension:
        raise DimensionError(f"vector of length {len(v)} in {space.dimension}-space")


def norm_eval(space: NormSpec, v: Sequence):
    """||v||: a Fraction for polytope norms, a float otherwise."""
    _check(space, v)
    if space.kind == "polytope":
        v = as_point(v)
        return max(dot(a, v) for a in space.facets)
    if space.kind == "euclidean":
        return math.sqrt(sum(c * c for c in v))
    p = float(space.p)
    return sum(abs(float(c)) ** p for c in v) ** (1.0 / p)


def distance(space: NormSpec, x: Sequence, y: Sequence):
    return norm_eval(space, [a - b for a, b in zip(x, y)])


def in_ball(space: NormSpec, x: Point, center: Point, r) -> bool:
    """Closed-ball membership, exact whenever the norm allows it."""
    d = [a - b for a, b in zip(x, center)]
    if space.kind == "polytope":
        return norm_eval(space, d) <= r
    if space.kind == "euclidean" and isinstance(r, Fraction):
        return dot(d, d) <= r * r
    return norm_eval(space, d) <= float(r)


@dataclass(frozen=True)
class PlaneBasis:
    vectors: tuple[Point, ...]

    def __post_init__(self):
        vecs = tuple(as_point(v) for v in self.vectors)
        if not 1 <= len(vecs) <= 3:
            raise ValueError("plane dimension must be 1, 2 or 3")
        if rank(vecs) != len(vecs):
            raise DegeneratePlaneError("plane basis vectors are dependent")
        object.__setattr__(self, "vectors", vecs)

    @property
    def k(self) -> int:
        return len(self.vectors)


def section_area_squared(space: NormSpec, plane: PlaneBasis) -> Fraction:
    """Squared Euclidean area of (unit ball) ∩ plane, exact, for k = 2 polytopes."""
    b1, b2 = plane.vectors
    lines = [(dot(a, b1), dot(a, b2)) for a in space.facets]
    lines = [ln for ln in lines if ln != (0, 0)]
    pts = set()
    for (a1, c1), (a2, c2) in itertools.combinations(lines, 2):
        st = solve([[a1, c1], [a2, c2]], [Fraction(1), Fraction(1)])
        if st is None:
            continue
        if all(al * st[0] + be * st[1] <= 1 for al, be in lines):
            pts.add(st)
    poly = sort_ccw(list(pts), (Fraction(0), Fraction(0)))
    area_st = shoelace(poly)
    return area_st * area_st * gram_det(plane.vectors)


def _orthonormal(plane: PlaneBasis) -> np.ndarray:
    q, _ = np.linalg.qr(np.array([[float(c) for c in v] for v in plane.vectors]).T)
    return q.T


def _lp_section_volume(space: NormSpec, plane: PlaneBasis) -> float:
    e = _orthonormal(plane)
    p = float(space.p)

    def nrm(u):
        return float(np.sum(np.abs(u) ** p) ** (1.0 / p))

    if plane.k == 2:
        f = lambda th: 0.5 * nrm(math.cos(th) * e[0] + math.sin(th) * e[1]) ** -2
        val, _ = integrate.quad(f, 0.0, 2 * math.pi, epsabs=QUAD_TOL, limit=200)
        return val

    def g(phi, th):
        u = math.sin(phi) * (math.cos(th) * e[0] + math.sin(th) * e[1]) + math.cos(phi) * e[2]
        return nrm(u) ** -3 * math.sin(phi) / 3.0

    val, _ = integrate.dblquad(g, 0.0, 2 * math.pi, 0.0, math.pi, epsabs=QUAD_TOL)
    return val


def _polytope_volume(space: NormSpec) -> float:
    if space.dimension == 1:
        return 2.0 * float(max(abs(v[0]) for v in space.vertices))
    if space.dimension == 2:
        verts = space.vertices
        hull = ConvexHull(np.array(verts, dtype=float))
        ordered = [verts[i] for i in hull.vertices]
        return float(abs(shoelace(ordered)))
    return float(ConvexHull(np.array(space.vertices, dtype=float)).volume)


@lru_cache(maxsize=4096)
def busemann_density(space: NormSpec, plane: PlaneBasis) -> float:
    """Factor turning Euclidean k-volume inside ``plane`` into Busemann volume.

    Equals omega_k divided by the Euclidean k-volume of the unit-ball section.
    """
    k, n = plane.k, space.dimension
    if any(len(v) != n for v in plane.vectors):
        raise DimensionError("plane lives in a different dimension")
    if k > n:
        raise DegeneratePlaneError("plane dimension exceeds ambient dimension")
    if space.kind == "euclidean":
        return 1.0
    if k == 1:
        (u,) = plane.vectors
        return float(norm_eval(space, u)) / math.sqrt(dot(u, u))
    if space.kind == "polytope":
        if k == n:
            return unit_ball_volume(k) / _polytope_volume(space)
        return unit_ball_volume(2) / math.sqrt(section_area_squared(space, plane))
    return unit_ball_volume(k) / _lp_section_volume(space, plane)
