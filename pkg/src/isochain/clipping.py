"""Restriction of chains to closed balls.

Simplices are cut along the sphere so that the inside and outside parts share
their crossing vertices exactly; ``T = T⌊B + T⌊Bᶜ`` then holds as currents with
no residual. Polytope norms are cut exactly; other norms snap each crossing to a
nearby rational point (shared by both sides).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from scipy.optimize import brentq, minimize_scalar

from .chain_core import Chain, ChainError, Key, reduce
from .linalg import Point, as_point, centroid, dot, lerp, shoelace, sub
from .normed_space import NormSpec, in_ball, norm_eval

DEFAULT_TOL = Fraction(1, 10**9)

Local = tuple[Fraction, Fraction]
Affine2 = tuple[Fraction, Fraction, Fraction]


@dataclass(frozen=True)
class Ball:
    center: Point
    radius: Fraction
    space: NormSpec

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        object.__setattr__(self, "radius", Fraction(self.radius))
        if self.radius < 0:
            raise ValueError("negative radius")

    def contains(self, x: Point) -> bool:
        return in_ball(self.space, x, self.center, self.radius)


@dataclass
class BallSplit:
    inside: Chain
    outside: Chain
    radius: Fraction  # radius actually realized (perturbed in snap mode)


def resolve_mode(space: NormSpec, mode: str | None) -> str:
    if mode is None:
        return "exact" if space.exact else "snap"
    if mode not in ("exact", "snap"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "exact" and not space.exact:
        raise ValueError("exact mode needs a polytope norm")
    return mode


def snap(x: float, tol: Fraction) -> Fraction:
    f = Fraction(x).limit_denominator(max(1, int(1 / tol)))
    if abs(f - Fraction(x)) > tol:
        return Fraction(x)
    return f


def perturb_radius(T: Chain, center: Point, r: Fraction, tol: Fraction, max_steps: int = 1000) -> Fraction:
    """Move r upward by 2·tol until no vertex sits within tol of the sphere."""
    dists = [float(norm_eval(T.space, sub(v, center))) for v in T.vertices()]
    for _ in range(max_steps):
        if all(abs(d - float(r)) > float(tol) for d in dists):
            return r
        r += 2 * tol
    raise ChainError("could not move the radius off the vertex distances")


# ---------------------------------------------------------------- 2D helpers


def _ev(f: Affine2, p: Local) -> Fraction:
    return f[0] + f[1] * p[0] + f[2] * p[1]


def _dedupe(poly: list) -> list:
    out = []
    for p in poly:
        if not out or out[-1] != p:
            out.append(p)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    return out


def clip_polygon(poly: Sequence[Local], f: Affine2) -> list:
    """Keep the part where f <= 0 (Sutherland–Hodgman, exact)."""
    out = []
    m = len(poly)
    for i in range(m):
        p, q = poly[i], poly[(i + 1) % m]
        fp, fq = _ev(f, p), _ev(f, q)
        if fp <= 0:
            out.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            out.append(lerp(p, q, fp / (fp - fq)))
    return _dedupe(out)


def _cross(o, a, b) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _in_closed_triangle(p, a, b, c) -> bool:
    return _cross(a, b, p) >= 0 and _cross(b, c, p) >= 0 and _cross(c, a, p) >= 0


def ear_clip(poly: Sequence[Local]) -> list[tuple[Local, Local, Local]]:
    """Triangulate a ccw simple polygon without adding vertices.

    Collinear boundary vertices are kept as triangle vertices.
    """
    idx = list(range(len(poly)))
    tris = []
    while len(idx) > 3:
        m = len(idx)
        for j in range(m):
            ia, ib, ic = idx[j - 1], idx[j], idx[(j + 1) % m]
            a, b, c = poly[ia], poly[ib], poly[ic]
            if _cross(a, b, c) <= 0:
                continue
            if any(
                _in_closed_triangle(poly[i], a, b, c) for i in idx if i not in (ia, ib, ic)
            ):
                continue
            tris.append((a, b, c))
            idx.pop(j)
            break
        else:
            raise ChainError("ear clipping failed on a non-simple polygon")
    a, b, c = (poly[i] for i in idx)
    if _cross(a, b, c) > 0:
        tris.append((a, b, c))
    return tris


def _fan(poly: Sequence[Local]) -> list:
    c = centroid(poly)
    m = len(poly)
    return [(c, poly[i], poly[(i + 1) % m]) for i in range(m) if _cross(c, poly[i], poly[(i + 1) % m]) > 0]


def _boundary_pos(q: Local, tri: Sequence[Local]) -> Fraction | None:
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        if _cross(a, b, q) != 0:
            continue
        d = sub(b, a)
        lam = (q[0] - a[0]) / d[0] if d[0] != 0 else (q[1] - a[1]) / d[1]
        if 0 <= lam <= 1:
            return (i + lam) % 3
    return None


def _edge_func(a: Local, b: Local) -> Affine2:
    """Affine f with f <= 0 exactly on the left of a→b."""
    dx, dy = b[0] - a[0], b[1] - a[1]
    return (dx * a[1] - dy * a[0], dy, -dx)


def split_triangle(tri: Sequence[Local], funcs: Sequence[Affine2]):
    """Split a ccw triangle into (inside, outside) triangle lists for {all f <= 0}."""
    q = list(tri)
    for f in funcs:
        q = clip_polygon(q, f)
        if len(q) < 3:
            return [], [tuple(tri)]
    return split_region(tri, q)


def split_region(tri: Sequence[Local], q: Sequence[Local]):
    """Split a ccw triangle along a convex ccw polygon q contained in it."""
    tri, q = list(tri), _dedupe(list(q))
    if len(q) < 3:
        return [], [tuple(tri)]
    area_q, area_t = shoelace(q), shoelace(tri)
    if area_q == 0:
        return [], [tuple(tri)]
    if area_q == area_t:
        return [tuple(tri)], []
    on_boundary = [(pos, p) for p in q if (pos := _boundary_pos(p, tri)) is not None]
    if len(on_boundary) <= 1:
        # Q floats inside or pinches the boundary at one point: cut into three
        # sectors around its centroid, each of which meets Q along two edges
        # the inside is fanned directly so that its boundary keeps only the
        # vertices of q; the sector cuts only subdivide the outside
        c = centroid(q)
        outs = []
        for i in range(3):
            sector = (tri[i], tri[(i + 1) % 3], c)
            qs = list(q)
            for j in range(3):
                qs = clip_polygon(qs, _edge_func(sector[j], sector[(j + 1) % 3]))
                if len(qs) < 3:
                    break
            outs += split_region(sector, qs)[1]
        return _fan(q), outs
    qset = set(q)
    ring = {p: pos for pos, p in on_boundary}
    for i, corner in enumerate(tri):
        ring.setdefault(corner, Fraction(i))
    ring_pts = sorted(ring, key=lambda p: ring[p])
    n = len(ring_pts)
    start = next(i for i, p in enumerate(ring_pts) if p in qset)
    rp = ring_pts[start:] + ring_pts[:start]
    outs = []
    i = 0
    while i < n:
        if rp[(i + 1) % n] in qset:
            i += 1
            continue
        e, run, k = rp[i], [], i + 1
        while rp[k % n] not in qset:
            run.append(rp[k % n])
            k += 1
        s = rp[k % n]
        ie, is_ = q.index(e), q.index(s)
        arc = []
        t = (ie + 1) % len(q)
        while t != is_:
            arc.append(q[t])
            t = (t + 1) % len(q)
        poly = [e] + run + ([s] if s != e else []) + arc[::-1]
        outs += ear_clip(_dedupe(poly))
        i = k
    return _fan(q), outs


# ------------------------------------------------------------ per-simplex cuts


def _segment_interval_exact(a: Point, b: Point, ball: Ball):
    lo, hi = Fraction(0), Fraction(1)
    d = sub(b, a)
    for fa in ball.space.facets:
        c0 = dot(fa, sub(a, ball.center)) - ball.radius
        c1 = dot(fa, d)
        if c1 == 0:
            if c0 > 0:
                return None
        elif c1 > 0:
            hi = min(hi, -c0 / c1)
        else:
            lo = max(lo, -c0 / c1)
    return (lo, hi) if lo < hi else None


def _rho_along(space: NormSpec, a: Point, b: Point, y: Point):
    fa = [float(c) for c in sub(a, y)]
    fd = [float(c) for c in sub(b, a)]
    return lambda t: float(norm_eval(space, [x + t * dd for x, dd in zip(fa, fd)]))


def _segment_interval_snap(a: Point, b: Point, ball: Ball, tol: Fraction):
    # solve on the canonically oriented edge so that neighbours share crossings
    if b < a:
        iv = _segment_interval_snap(b, a, ball, tol)
        return None if iv is None else (1 - iv[1], 1 - iv[0])
    ain, bin_ = ball.contains(a), ball.contains(b)
    if ain and bin_:
        return Fraction(0), Fraction(1)
    r = ball.radius
    if ball.space.kind == "euclidean":
        d = sub(b, a)
        w = sub(a, ball.center)
        A, B, C = dot(d, d), 2 * dot(d, w), dot(w, w) - r * r
        disc = B * B - 4 * A * C
        if disc <= 0:
            return None
        sq = math.sqrt(disc)
        t_lo, t_hi = (-float(B) - sq) / (2 * float(A)), (-float(B) + sq) / (2 * float(A))
    else:
        rho = _rho_along(ball.space, a, b, ball.center)
        if ain:
            t_lo, t_hi = 0.0, brentq(lambda t: rho(t) - float(r), 0.0, 1.0, xtol=1e-15)
        elif bin_:
            t_lo, t_hi = brentq(lambda t: rho(t) - float(r), 0.0, 1.0, xtol=1e-15), 1.0
        else:
            m = minimize_scalar(rho, bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-12})
            if m.fun >= float(r):
                return None
            t_lo = brentq(lambda t: rho(t) - float(r), 0.0, m.x, xtol=1e-15)
            t_hi = brentq(lambda t: rho(t) - float(r), m.x, 1.0, xtol=1e-15)
    # a parameter error dt moves the point by dt·||b − a||; keep that within tol
    tol_t = tol / max(1, math.ceil(float(norm_eval(ball.space, sub(b, a)))))
    lo = Fraction(0) if ain else snap(t_lo, tol_t)
    hi = Fraction(1) if bin_ else snap(t_hi, tol_t)
    lo, hi = max(lo, Fraction(0)), min(hi, Fraction(1))
    return (lo, hi) if lo < hi else None


def _split_segment(key: Key, w: int, ball: Ball, mode: str, tol: Fraction, ins: list, outs: list):
    a, b = key
    iv = _segment_interval_exact(a, b, ball) if mode == "exact" else _segment_interval_snap(a, b, ball, tol)
    if iv is None:
        outs.append((key, w))
        return
    lo, hi = iv
    pa, pb = lerp(a, b, lo), lerp(a, b, hi)
    ins.append(((pa, pb), w))
    if lo > 0:
        outs.append(((a, pa), w))
    if hi < 1:
        outs.append(((pb, b), w))


ARC_STEP = math.pi / 16  # largest angle spanned by one inscribed chord


class _PlaneFrame:
    """Float orthonormal frame of a triangle's plane, with local coordinates."""

    def __init__(self, key: Key, ball: Ball):
        self.v0 = [float(c) for c in key[0]]
        self.e1 = [float(x) - o for x, o in zip(key[1], self.v0)]
        self.e2 = [float(x) - o for x, o in zip(key[2], self.v0)]
        n1 = math.sqrt(sum(x * x for x in self.e1))
        self.f1 = [x / n1 for x in self.e1]
        d = sum(x * y for x, y in zip(self.e2, self.f1))
        g = [x - d * y for x, y in zip(self.e2, self.f1)]
        n2 = math.sqrt(sum(x * x for x in g))
        self.f2 = [x / n2 for x in g]
        self.y = [float(c) for c in ball.center]
        self.r = float(ball.radius)
        self.space = ball.space
        # local (u, v) from frame coordinates (s, t): e1 = (n1, 0), e2 = (d, n2)
        self._inv = (1 / n1, -d / (n1 * n2), 1 / n2)

    def point(self, s: float, t: float) -> list:
        return [o + s * a + t * b for o, a, b in zip(self.v0, self.f1, self.f2)]

    def frame_of_local(self, p: Local) -> tuple[float, float]:
        u, v = float(p[0]), float(p[1])
        n1 = 1 / self._inv[0]
        n2 = 1 / self._inv[2]
        d = -self._inv[1] * n1 * n2
        return u * n1 + v * d, v * n2

    def local_of_frame(self, s: float, t: float) -> tuple[float, float]:
        a, b, c = self._inv
        return s * a + t * b, t * c

    def rho(self, s: float, t: float) -> float:
        return float(norm_eval(self.space, [x - o for x, o in zip(self.point(s, t), self.y)]))

    def radial(self, o: tuple[float, float], theta: float) -> tuple[float, float]:
        """Boundary point of the ball section on the ray from o at angle theta."""
        c, sn = math.cos(theta), math.sin(theta)
        if self.space.kind == "euclidean":
            w = [x - yy for x, yy in zip(self.point(*o), self.y)]
            u = [c * a + sn * b for a, b in zip(self.f1, self.f2)]
            B = sum(x * z for x, z in zip(w, u))
            C = sum(x * x for x in w) - self.r * self.r
            s = -B + math.sqrt(max(B * B - C, 0.0))
        else:
            f = lambda s: self.rho(o[0] + s * c, o[1] + s * sn) - self.r
            hi = self.r
            while f(hi) < 0:
                hi *= 2
            s = brentq(f, 0.0, hi, xtol=1e-15)
        return o[0] + s * c, o[1] + s * sn

    def inner_point(self) -> tuple[float, float] | None:
        """A frame point of the triangle strictly inside the ball, if any."""
        if self.space.kind == "euclidean":
            w = [yy - o for yy, o in zip(self.y, self.v0)]
            cand = (sum(x * z for x, z in zip(w, self.f1)), sum(x * z for x, z in zip(w, self.f2)))
        else:
            def obj(x):
                u, v = self.local_of_frame(x[0], x[1])
                pen = max(0.0, -u) + max(0.0, -v) + max(0.0, u + v - 1)
                return self.rho(x[0], x[1]) + 1e3 * pen
            from scipy.optimize import minimize

            s0, t0 = self.frame_of_local((Fraction(1, 3), Fraction(1, 3)))
            cand = tuple(minimize(obj, [s0, t0], method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-14}).x)
        u, v = self.local_of_frame(*cand)
        if u > 0 and v > 0 and u + v < 1 and self.rho(*cand) < self.r:
            return cand
        return None


def _arc(frame: _PlaneFrame, o, start, end, full: bool, tol: Fraction) -> list[Local]:
    """Inscribed points strictly between start and end, ccw about o."""
    th0 = math.atan2(start[1] - o[1], start[0] - o[0])
    if full:
        span = 2 * math.pi
    else:
        th1 = math.atan2(end[1] - o[1], end[0] - o[0])
        span = (th1 - th0) % (2 * math.pi)
    n = max(1, math.ceil(span / ARC_STEP))
    out = []
    for i in range(1, n + (1 if full else 0)):
        s, t = frame.radial(o, th0 + span * i / n)
        u, v = frame.local_of_frame(s, t)
        p = (snap(u, tol), snap(v, tol))
        if p[0] > 0 and p[1] > 0 and p[0] + p[1] < 1:
            out.append(p)
    return out


def _snap_region(key: Key, ball: Ball, tol: Fraction):
    """Convex polygon approximating the part of a triangle inside the ball.

    Returns None (outside), [] (all inside) or local ccw vertices. Edge
    crossings are snapped per edge, so neighbours share them; the arcs in
    between are replaced by inscribed chords.
    """
    flags = [ball.contains(v) for v in key]
    if all(flags):
        return []
    local = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    runs = []
    for i in range(3):
        j = (i + 1) % 3
        iv = _segment_interval_snap(key[i], key[j], ball, tol)
        if iv is not None:
            runs.append((lerp(local[i], local[j], iv[0]), lerp(local[i], local[j], iv[1])))
    frame = _PlaneFrame(key, ball)
    scale = max(1, math.ceil(max(float(norm_eval(ball.space, sub(key[i], key[0]))) for i in (1, 2))))
    ltol = tol / (4 * scale)
    if not runs:
        o = frame.inner_point()
        if o is None:
            return None
        start = frame.radial(o, 0.0)
        return _dedupe(_arc(frame, o, start, start, True, ltol))
    fpts = [frame.frame_of_local(p) for run in runs for p in run]
    if ball.space.kind == "euclidean":
        w = [yy - o for yy, o in zip(frame.y, frame.v0)]
        o = (sum(x * z for x, z in zip(w, frame.f1)), sum(x * z for x, z in zip(w, frame.f2)))
    else:
        o = (sum(p[0] for p in fpts) / len(fpts), sum(p[1] for p in fpts) / len(fpts))
    q = []
    for idx, (entry, exit_) in enumerate(runs):
        q += [entry, exit_]
        nxt = runs[(idx + 1) % len(runs)][0]
        if nxt != exit_:
            q += _arc(frame, o, frame.frame_of_local(exit_), frame.frame_of_local(nxt), False, ltol)
    return _dedupe(q)


def _split_triangle_key(key: Key, w: int, ball: Ball, mode: str, tol: Fraction, ins: list, outs: list):
    unit = ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    if mode == "exact":
        v0, v1, v2 = key
        e1, e2 = sub(v1, v0), sub(v2, v0)
        wv = sub(v0, ball.center)
        funcs = [(dot(a, wv) - ball.radius, dot(a, e1), dot(a, e2)) for a in ball.space.facets]
        tin, tout = split_triangle(unit, funcs)
    else:
        q = _snap_region(key, ball, tol)
        if q is None:
            outs.append((key, w))
            return
        if not q:
            ins.append((key, w))
            return
        tin, tout = split_region(unit, q)
    v0, v1, v2 = key
    e1, e2 = sub(v1, v0), sub(v2, v0)

    def amb(p: Local) -> Point:
        return tuple(x + p[0] * a + p[1] * b for x, a, b in zip(v0, e1, e2))

    ins.extend((tuple(amb(p) for p in t), w) for t in tin)
    outs.extend((tuple(amb(p) for p in t), w) for t in tout)


def split_by_ball(T: Chain, ball: Ball, mode: str | None = None, tol: Fraction = DEFAULT_TOL) -> BallSplit:
    """Cut T along the sphere of ``ball`` into T⌊B and T⌊Bᶜ.

    Parts of T lying on the sphere count as inside (closed ball).
    """
    mode = resolve_mode(T.space, mode)
    tol = Fraction(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if T.dim > 2:
        raise ChainError("restriction is implemented for chains of dimension <= 2")
    r = ball.radius
    if mode == "snap" and T:
        r = perturb_radius(T, ball.center, r, tol)
        ball = Ball(ball.center, r, ball.space)
    ins: list = []
    outs: list = []
    for key, w in T.terms.items():
        if T.dim == 0:
            (ins if ball.contains(key[0]) else outs).append((key, w))
        elif all(ball.contains(v) for v in key) and mode == "snap":
            ins.append((key, w))
        elif T.dim == 1:
            _split_segment(key, w, ball, mode, tol, ins, outs)
        else:
            _split_triangle_key(key, w, ball, mode, tol, ins, outs)
    inside = reduce(ins, T.space, T.dim) if ins else Chain.zero(T.dim, T.space)
    outside = reduce(outs, T.space, T.dim) if outs else Chain.zero(T.dim, T.space)
    return BallSplit(inside, outside, r)


def restrict_to_ball(T: Chain, ball: Ball, mode: str | None = None, tol: Fraction = DEFAULT_TOL) -> Chain:
    return split_by_ball(T, ball, mode, tol).inside
