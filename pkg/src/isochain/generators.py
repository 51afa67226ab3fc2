"""Test-cycle families with rational coordinates."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .chain_core import Chain, ChainError, is_cycle, reduce
from .linalg import Point
from .normed_space import NormSpec

FAMILIES = ("regular_polygon", "perturbed_polygon", "multi_loop", "polyhedral_sphere", "thin_rectangle", "figure_eight")
SNAP = 10**6


def _q(x: float) -> Fraction:
    return Fraction(round(x * SNAP), SNAP)


def _loop(points: list[Point], space: NormSpec) -> Chain:
    n = len(points)
    return reduce([((points[i], points[(i + 1) % n]), 1) for i in range(n)], space, 1)


def _pad(p: tuple, n: int) -> Point:
    return tuple(Fraction(c) for c in p) + (Fraction(0),) * (n - len(p))


def regular_polygon(n: int, radius=1, space: NormSpec | None = None, center=(0, 0)) -> Chain:
    if n < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    space = space or NormSpec.euclidean(2)
    r = float(radius)
    if r <= 0:
        raise ValueError("radius must be positive")
    cx, cy = (Fraction(c) for c in center)
    pts = [_pad((cx + _q(r * math.cos(2 * math.pi * i / n)), cy + _q(r * math.sin(2 * math.pi * i / n))), space.dimension) for i in range(n)]
    return _loop(pts, space)


def perturbed_polygon(n: int, radius=1, noise=0.2, seed: int = 0, space: NormSpec | None = None) -> Chain:
    """Star-shaped polygon: radii jittered by up to ``noise``·radius, angles by a fraction of a step."""
    if n < 3:
        raise ValueError("a polygon needs at least 3 vertices")
    if not 0 <= float(noise) < 1:
        raise ValueError("noise must lie in [0, 1)")
    space = space or NormSpec.euclidean(2)
    rng = np.random.default_rng(seed)
    r = float(radius)
    step = 2 * math.pi / n
    pts = []
    for i in range(n):
        rho = r * (1 + float(noise) * rng.uniform(-1, 1))
        th = step * (i + 0.3 * rng.uniform(-1, 1))
        pts.append(_pad((_q(rho * math.cos(th)), _q(rho * math.sin(th))), space.dimension))
    return _loop(pts, space)


def multi_loop(count: int, spacing=100, n: int = 16, radius=1, space: NormSpec | None = None) -> Chain:
    if count < 1:
        raise ValueError("count must be positive")
    space = space or NormSpec.euclidean(2)
    out = Chain.zero(1, space)
    for j in range(count):
        out = out + regular_polygon(n, radius, space, center=(Fraction(spacing) * j, 0))
    return out


def thin_rectangle(aspect, space: NormSpec | None = None) -> Chain:
    """Boundary of [0, aspect] × [0, 1]."""
    a = Fraction(aspect)
    if a <= 0:
        raise ValueError("aspect must be positive")
    space = space or NormSpec.euclidean(2)
    pts = [_pad(p, space.dimension) for p in ((0, 0), (a, 0), (a, 1), (0, 1))]
    return _loop(pts, space)


def figure_eight(space: NormSpec | None = None) -> Chain:
    """Two unit squares sharing the vertex at the origin."""
    space = space or NormSpec.euclidean(2)
    a = [_pad(p, space.dimension) for p in ((0, 0), (1, 0), (1, 1), (0, 1))]
    b = [_pad(p, space.dimension) for p in ((0, 0), (-1, 0), (-1, -1), (0, -1))]
    return _loop(a, space) + _loop(b, space)


def polyhedral_sphere(level: int = 0, space: NormSpec | None = None, radius=1) -> Chain:
    """Octahedron surface, midpoint-subdivided ``level`` times and pushed to the sphere."""
    if level < 0:
        raise ValueError("level must be non-negative")
    space = space or NormSpec.euclidean(3)
    if space.dimension != 3:
        raise ValueError("polyhedral spheres live in 3-space")
    r = float(radius)
    faces = []
    for sx in (1, -1):
        for sy in (1, -1):
            for sz in (1, -1):
                tri = [(sx, 0.0, 0.0), (0.0, sy, 0.0), (0.0, 0.0, sz)]
                if sx * sy * sz < 0:
                    tri = [tri[0], tri[2], tri[1]]
                faces.append(tri)
    for _ in range(level):
        nxt = []
        for a, b, c in faces:
            ab, bc, ca = (_mid(a, b), _mid(b, c), _mid(c, a))
            nxt += [[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]
        faces = nxt
    snapped = {}

    def q(p):
        if p not in snapped:
            snapped[p] = tuple(_q(r * c) for c in p)
        return snapped[p]

    return reduce([([q(p) for p in f], 1) for f in faces], space, 2)


def _mid(a, b):
    m = [(x + y) / 2 for x, y in zip(a, b)]
    nrm = math.sqrt(sum(c * c for c in m))
    return tuple(round(c / nrm, 15) for c in m)


@dataclass
class GeneratorSpec:
    family: str
    params: dict = field(default_factory=dict)
    space: NormSpec | None = None


def generate(spec: GeneratorSpec, seed: int = 0) -> Chain:
    """Build a member of a family and check that it is a cycle."""
    p = dict(spec.params)
    if spec.family == "regular_polygon":
        T = regular_polygon(int(p.get("n", 16)), p.get("radius", 1), spec.space)
    elif spec.family == "perturbed_polygon":
        T = perturbed_polygon(int(p.get("n", 16)), p.get("radius", 1), p.get("noise", 0.2), int(p.get("seed", seed)), spec.space)
    elif spec.family == "multi_loop":
        T = multi_loop(int(p.get("count", 2)), p.get("spacing", 100), int(p.get("n", 16)), p.get("radius", 1), spec.space)
    elif spec.family == "polyhedral_sphere":
        T = polyhedral_sphere(int(p.get("level", 0)), spec.space)
    elif spec.family == "thin_rectangle":
        T = thin_rectangle(p.get("aspect", 100), spec.space)
    elif spec.family == "figure_eight":
        T = figure_eight(spec.space)
    else:
        raise ValueError(f"unknown family {spec.family!r}; choose from {', '.join(FAMILIES)}")
    if not is_cycle(T):
        raise ChainError(f"generated {spec.family} is not a cycle")
    return T
