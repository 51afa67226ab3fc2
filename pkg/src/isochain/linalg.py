"""Small exact linear algebra over the rationals.

Everything here works on tuples/lists of ``Fraction`` and never rounds.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

Point = tuple[Fraction, ...]


def as_point(coords) -> Point:
    return tuple(c if isinstance(c, Fraction) else Fraction(c) for c in coords)


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Point:
    return tuple(x - y for x, y in zip(a, b))


def add(a: Sequence[Fraction], b: Sequence[Fraction]) -> Point:
    return tuple(x + y for x, y in zip(a, b))


def scale(c, a: Sequence[Fraction]) -> Point:
    return tuple(c * x for x in a)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def lerp(a: Sequence[Fraction], b: Sequence[Fraction], t: Fraction) -> Point:
    return tuple(x + t * (y - x) for x, y in zip(a, b))


def centroid(points: Sequence[Sequence[Fraction]]) -> Point:
    m = len(points)
    return tuple(sum(cs, Fraction(0)) / m for cs in zip(*points))


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(r) for r in rows]
    if not m:
        return m, []
    ncols = len(m[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[1])


def solve(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Point | None:
    """Solve the square system ``a x = b``; None if singular."""
    n = len(a)
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    red, piv = rref(aug)
    if piv != list(range(n)):
        return None
    return tuple(red[i][n] for i in range(n))


def det(a: Sequence[Sequence[Fraction]]) -> Fraction:
    m = [list(r) for r in a]
    n = len(m)
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] / m[c][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def gram_det(vectors: Sequence[Sequence[Fraction]]) -> Fraction:
    """det(V V^T): squared Euclidean k-volume of the parallelotope."""
    return det([[dot(u, v) for v in vectors] for u in vectors])


def affine_flat_key(points: Sequence[Point]) -> tuple:
    """Canonical, hashable description of the affine hull of ``points``.

    Two point sets get the same key iff they span the same affine flat.
    """
    base = points[0]
    dirs = [sub(p, base) for p in points[1:]]
    red, piv = rref(dirs)
    # reduce the base point against the direction rows so it is canonical
    p = list(base)
    for row, c in zip(red, piv):
        f = p[c]
        if f != 0:
            p = [x - f * y for x, y in zip(p, row)]
    return (tuple(tuple(r) for r in red), tuple(p))


def _half(v: Sequence[Fraction]) -> int:
    return 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1


def sort_ccw(points: Sequence[Sequence[Fraction]], center: Sequence[Fraction]) -> list:
    """Sort 2D points counter-clockwise around an interior ``center`` (exact)."""
    from functools import cmp_to_key

    def cmp(p, q):
        u = (p[0] - center[0], p[1] - center[1])
        v = (q[0] - center[0], q[1] - center[1])
        hu, hv = _half(u), _half(v)
        if hu != hv:
            return hu - hv
        c = u[0] * v[1] - u[1] * v[0]
        return -1 if c > 0 else (1 if c < 0 else 0)

    return sorted(points, key=cmp_to_key(cmp))


def shoelace(poly: Sequence[Sequence[Fraction]]) -> Fraction:
    """Signed area of a 2D polygon given in order."""
    s = Fraction(0)
    m = len(poly)
    for i in range(m):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % m]
        s += x0 * y1 - x1 * y0
    return s / 2
