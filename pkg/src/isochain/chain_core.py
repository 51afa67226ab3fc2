"""Integer-weighted polyhedral chains with exact rational vertices."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .linalg import Point, affine_flat_key, as_point, gram_det, rank, solve, sub
from .normed_space import NormSpec, PlaneBasis, busemann_density, norm_eval

Key = tuple[Point, ...]


class ChainError(ValueError):
    pass


def permutation_sign(perm: Sequence[int]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, length = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def canonical(vertices: Sequence[Point]) -> tuple[Key, int]:
    """Sort vertices lexicographically; return the sorted tuple and the orientation sign."""
    order = sorted(range(len(vertices)), key=lambda i: vertices[i])
    return tuple(vertices[i] for i in order), permutation_sign(order)


def is_degenerate(vertices: Sequence[Point]) -> bool:
    if len(set(vertices)) < len(vertices):
        return True
    if len(vertices) <= 2:
        return False
    return rank([sub(v, vertices[0]) for v in vertices[1:]]) < len(vertices) - 1


class Chain:
    """A reduced integer combination of oriented k-simplices.

    ``terms`` maps canonically ordered vertex tuples to nonzero integer weights.
    """

    __slots__ = ("dim", "space", "terms")

    def __init__(self, dim: int, space: NormSpec, terms: Mapping[Key, int] | None = None):
        self.dim = dim
        self.space = space
        self.terms: dict[Key, int] = dict(terms or {})

    @classmethod
    def zero(cls, dim: int, space: NormSpec) -> "Chain":
        return cls(dim, space)

    def __iter__(self) -> Iterator[tuple[Key, int]]:
        return iter(sorted(self.terms.items()))

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    __hash__ = None

    def __repr__(self) -> str:
        return f"Chain(dim={self.dim}, terms={len(self.terms)})"

    def _combine(self, other: "Chain", sgn: int) -> "Chain":
        if other.dim != self.dim:
            raise ChainError(f"cannot add {self.dim}-chain and {other.dim}-chain")
        out = dict(self.terms)
        for key, w in other.terms.items():
            v = out.get(key, 0) + sgn * w
            if v:
                out[key] = v
            else:
                out.pop(key, None)
        return Chain(self.dim, self.space, out)

    def __add__(self, other: "Chain") -> "Chain":
        return self._combine(other, 1)

    def __sub__(self, other: "Chain") -> "Chain":
        return self._combine(other, -1)

    def __neg__(self) -> "Chain":
        return Chain(self.dim, self.space, {k: -w for k, w in self.terms.items()})

    def __mul__(self, a: int) -> "Chain":
        if a == 0:
            return Chain(self.dim, self.space)
        return Chain(self.dim, self.space, {k: a * w for k, w in self.terms.items()})

    __rmul__ = __mul__

    def vertices(self) -> list[Point]:
        return sorted({v for key in self.terms for v in key})

    def total_weight(self) -> int:
        return sum(self.terms.values())


def chain_sum(chains: Iterable[Chain], dim: int, space: NormSpec) -> Chain:
    out = Chain.zero(dim, space)
    for c in chains:
        out = out + c
    return out


def reduce(raw: Iterable[tuple[Sequence, int]], space: NormSpec, dim: int | None = None) -> Chain:
    """Canonicalize, merge orientation-equivalent simplices, drop zeros and degenerate cells."""
    terms: dict[Key, int] = {}
    for verts, w in raw:
        verts = tuple(as_point(v) for v in verts)
        k = len(verts) - 1
        if dim is None:
            dim = k
        elif k != dim:
            raise ChainError(f"mixed dimensions {dim} and {k}")
        if any(len(v) != space.dimension for v in verts):
            raise ChainError("vertex of wrong ambient dimension")
        if w == 0 or is_degenerate(verts):
            continue
        key, sgn = canonical(verts)
        terms[key] = terms.get(key, 0) + sgn * int(w)
    if dim is None:
        raise ChainError("cannot infer dimension of an empty raw list")
    return Chain(dim, space, {k: w for k, w in terms.items() if w})


def faces(key: Key) -> Iterator[tuple[Key, int]]:
    for i in range(len(key)):
        yield key[:i] + key[i + 1 :], (-1) ** i


def boundary(T: Chain) -> Chain:
    if T.dim < 1:
        raise ChainError("boundary of a 0-chain is undefined")
    out: dict[Key, int] = {}
    for key, w in T.terms.items():
        # faces of a sorted tuple are sorted, so they are already canonical
        for face, s in faces(key):
            out[face] = out.get(face, 0) + s * w
    return Chain(T.dim - 1, T.space, {k: w for k, w in out.items() if w})


def is_cycle(T: Chain) -> bool:
    """Zero boundary; for 0-chains, zero total weight (augmented boundary)."""
    if T.dim == 0:
        return T.total_weight() == 0
    return not boundary(T)


def is_zero_current(T: Chain) -> bool:
    """Exact test that the chain vanishes as a current.

    Pieces lying in different affine k-flats cannot cancel, and a top-dimensional
    chain inside its flat vanishes iff its boundary does; recurse on dimension.
    """
    if not T:
        return True
    if T.dim == 0:
        return False
    groups: dict[tuple, dict[Key, int]] = {}
    for key, w in T.terms.items():
        groups.setdefault(affine_flat_key(key), {})[key] = w
    for terms in groups.values():
        if not is_zero_current(boundary(Chain(T.dim, T.space, terms))):
            return False
    return True


def equivalent(A: Chain, B: Chain) -> bool:
    return is_zero_current(A - B)


def plane_of(key: Key) -> PlaneBasis:
    """Canonical basis of the linear span of a simplex's edge vectors."""
    rows, _ = affine_flat_key(key)
    return PlaneBasis(rows)


def simplex_volume(key: Key) -> float:
    """Euclidean k-volume."""
    k = len(key) - 1
    if k == 0:
        return 1.0
    edges = [sub(v, key[0]) for v in key[1:]]
    return math.sqrt(gram_det(edges)) / math.factorial(k)


def simplex_mass(key: Key, space: NormSpec) -> float:
    k = len(key) - 1
    if k == 0:
        return 1.0
    if k == 1:
        return float(norm_eval(space, sub(key[1], key[0])))
    if space.kind == "euclidean":
        return simplex_volume(key)
    return busemann_density(space, plane_of(key)) * simplex_volume(key)


def mass(T: Chain) -> float:
    return float(sum(abs(w) * simplex_mass(key, T.space) for key, w in T.terms.items()))


def support_diameter(T: Chain):
    if not T:
        raise ChainError("support of the zero chain is empty")
    vs = T.vertices()
    best = 0
    for u, v in itertools.combinations(vs, 2):
        d = norm_eval(T.space, sub(u, v))
        if d > best:
            best = d
    return best


def diameter_with(T: Chain, point: Point):
    """diam(spt T ∪ {point})."""
    best = support_diameter(T) if T else 0
    for v in T.vertices():
        d = norm_eval(T.space, sub(v, point))
        if d > best:
            best = d
    return best


@dataclass(frozen=True)
class AffineMap:
    matrix: tuple[tuple[Fraction, ...], ...]
    offset: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "matrix", tuple(as_point(r) for r in self.matrix))
        object.__setattr__(self, "offset", as_point(self.offset))

    @classmethod
    def identity(cls, n: int) -> "AffineMap":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), (0,) * n)

    @classmethod
    def scaling(cls, n: int, c) -> "AffineMap":
        c = Fraction(c)
        return cls(tuple(tuple(c if i == j else 0 for j in range(n)) for i in range(n)), (0,) * n)

    def __call__(self, x: Point) -> Point:
        return tuple(sum((a * b for a, b in zip(row, x)), Fraction(0)) + o for row, o in zip(self.matrix, self.offset))

    def operator_norm(self, source: NormSpec, target: NormSpec, samples: int = 2000) -> float:
        """Lipschitz constant estimate (exact sup over unit-ball vertices for polytope sources)."""
        import numpy as np

        if source.kind == "polytope":
            pts = [self(v) for v in source.vertices]
            z = self(tuple(Fraction(0) for _ in range(source.dimension)))
            return max(float(norm_eval(target, sub(p, z))) for p in pts)
        rng = np.random.default_rng(0)
        best = 0.0
        z = self(tuple(Fraction(0) for _ in range(source.dimension)))
        for _ in range(samples):
            u = rng.normal(size=source.dimension)
            u /= float(norm_eval(source, u))
            img = [float(c) for c in self(as_point(u))]
            d = [a - float(b) for a, b in zip(img, z)]
            best = max(best, float(norm_eval(target, d)))
        return best


@dataclass(frozen=True)
class PiecewiseAffineMap:
    """Affine maps on the cells (n-simplices) of a simplicial partition."""

    pieces: tuple[tuple[Key, AffineMap], ...]

    def map_for(self, key: Key) -> AffineMap:
        for cell, phi in self.pieces:
            if all(_in_simplex(v, cell) for v in key):
                return phi
        raise ChainError(f"map is not affine on simplex {key}; refine the chain first")


def _in_simplex(x: Point, cell: Key) -> bool:
    n = len(cell) - 1
    a = [[cell[j + 1][i] - cell[0][i] for j in range(n)] for i in range(len(x))]
    lam = solve(a, sub(x, cell[0])) if len(x) == n else None
    if lam is None:
        return False
    return all(c >= 0 for c in lam) and sum(lam) <= 1


def pushforward(T: Chain, phi, target: NormSpec | None = None) -> Chain:
    """Push the chain forward under an affine or piecewise-affine map.

    Degenerate images are dropped, so naturality holds as currents.
    """
    target = target or T.space
    raw = []
    for key, w in T.terms.items():
        f = phi.map_for(key) if isinstance(phi, PiecewiseAffineMap) else phi
        raw.append(([f(v) for v in key], w))
    if not raw:
        return Chain.zero(T.dim, target)
    return reduce(raw, target, T.dim)
