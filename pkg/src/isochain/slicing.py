"""Slices by distance functions and the growth function r ↦ ‖T‖(B(y, r)).

For polytope norms the mass of each simplex inside B(y, r) is a polynomial of
degree at most k in r between finitely many event radii; those events are
enumerated exactly and the pieces are recovered by interpolation. Other norms
are evaluated directly (closed forms for the Euclidean norm) and sampled.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .chain_core import Chain, ChainError, Key, boundary, mass, plane_of, simplex_mass
from .clipping import DEFAULT_TOL, Ball, clip_polygon, split_by_ball
from .linalg import Point, as_point, dot, gram_det, shoelace, solve, sub
from .normed_space import NormSpec, busemann_density, norm_eval

# distance functions are 1-Lipschitz in every norm
LIP_RHO = 1


# ------------------------------------------------------------------ slices


@dataclass
class SliceResult:
    radius: Fraction
    chain: Chain
    tol: Fraction
    deviation: float  # max | ‖v − y‖ − r | over slice vertices


def slice_chain(T: Chain, y, r, mode: str | None = None, tol=DEFAULT_TOL) -> SliceResult:
    """⟨T, ρ, r⟩ = ∂(T⌊B(y, r)) − (∂T)⌊B(y, r) with ρ = ‖· − y‖.

    In snap mode r may be moved up slightly off the vertex distances; the
    radius actually used is returned.
    """
    if T.dim < 1:
        raise ChainError("cannot slice a 0-chain")
    y = as_point(y)
    r = Fraction(r)
    if r <= 0:
        raise ValueError("slice radius must be positive")
    split = split_by_ball(T, Ball(y, r, T.space), mode, tol)
    ball = Ball(y, split.radius, T.space)
    S = boundary(split.inside) if split.inside else Chain.zero(T.dim - 1, T.space)
    dT = boundary(T)
    if dT:
        S = S - split_by_ball(dT, ball, "exact" if T.space.exact else "snap", tol).inside
    dev = max((abs(float(norm_eval(T.space, sub(v, y))) - float(split.radius)) for v in S.vertices()), default=0.0)
    return SliceResult(split.radius, S, Fraction(tol), dev)


# -------------------------------------------------------- per-simplex mass


def _local_frame(key: Key):
    v0 = key[0]
    return v0, [sub(v, v0) for v in key[1:]]


class _PolytopeSimplex:
    """Exact in-ball measure of one simplex for a polytope norm."""

    def __init__(self, key: Key, w: int, space: NormSpec, y: Point):
        self.k = len(key) - 1
        self._events = None
        v0, edges = _local_frame(key)
        off = sub(v0, y)
        # facet i in local coordinates: a·(x − y) = c0 + Σ c_j x_j
        self.funcs = [(dot(a, off),) + tuple(dot(a, e) for e in edges) for a in space.facets]
        if self.k == 1:
            self.factor = abs(w) * float(norm_eval(space, edges[0]))
        else:
            self.factor = abs(w) * busemann_density(space, plane_of(key)) * math.sqrt(gram_det(edges))

    def local_measure(self, r: Fraction) -> Fraction:
        if self.k == 1:
            lo, hi = Fraction(0), Fraction(1)
            for c0, c1 in self.funcs:
                c0 -= r
                if c1 == 0:
                    if c0 > 0:
                        return Fraction(0)
                elif c1 > 0:
                    hi = min(hi, -c0 / c1)
                else:
                    lo = max(lo, -c0 / c1)
            return max(hi - lo, Fraction(0))
        poly = [(Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)), (Fraction(0), Fraction(1))]
        for c0, c1, c2 in self.funcs:
            poly = clip_polygon(poly, (c0 - r, c1, c2))
            if len(poly) < 3:
                return Fraction(0)
        return abs(shoelace(poly))

    def value(self, r) -> float:
        return self.factor * float(self.local_measure(Fraction(r)))

    def events(self) -> set[Fraction]:
        """Radii where the combinatorics of simplex ∩ B(y, r) can change."""
        if self._events is None:
            self._events = self._compute_events()
        return self._events

    def _compute_events(self) -> set[Fraction]:
        m = self.k
        if m == 1:
            edges = [(Fraction(0), Fraction(1)), (Fraction(1), Fraction(-1))]
        else:
            edges = [
                (Fraction(0), Fraction(1), Fraction(0)),
                (Fraction(0), Fraction(0), Fraction(1)),
                (Fraction(1), Fraction(-1), Fraction(-1)),
            ]
        # unknowns (x_1..x_m, r); an edge row is e(x) = 0, a facet row is f(x) − r = 0
        rows = [(e[1:] + (Fraction(0),), -e[0]) for e in edges]
        rows += [(f[1:] + (Fraction(-1),), -f[0]) for f in self.funcs]
        out = set()
        nfix = len(edges)
        for combo in itertools.combinations(range(len(rows)), m + 1):
            if all(i < nfix for i in combo):
                continue
            sol = solve([rows[i][0] for i in combo], [rows[i][1] for i in combo])
            if sol is None or sol[-1] <= 0:
                continue
            # keep only points of the closed simplex lying on the sphere
            x, r = sol[:-1], sol[-1]
            if any(e[0] + sum(c * t for c, t in zip(e[1:], x)) < 0 for e in edges):
                continue
            if max(f[0] + sum(c * t for c, t in zip(f[1:], x)) for f in self.funcs) != r:
                continue
            out.add(r)
        return out


class _EuclideanSegment:
    def __init__(self, key: Key, w: int, y: Point):
        a, b = key
        self.w = abs(w)
        self.wv = [float(c) for c in sub(a, y)]
        self.d = [float(c) for c in sub(b, a)]
        self.A = sum(c * c for c in self.d)
        self.B = 2 * sum(p * q for p, q in zip(self.d, self.wv))
        self.C0 = sum(c * c for c in self.wv)
        self.length = math.sqrt(self.A)
        self.key, self.y = key, y

    def value(self, r) -> float:
        r = float(r)
        disc = self.B * self.B - 4 * self.A * (self.C0 - r * r)
        if disc <= 0:
            return 0.0
        sq = math.sqrt(disc)
        lo = max(0.0, (-self.B - sq) / (2 * self.A))
        hi = min(1.0, (-self.B + sq) / (2 * self.A))
        return self.w * self.length * max(0.0, hi - lo)

    def events(self) -> set:
        out = {math.sqrt(self.C0), math.sqrt(self.A + self.B + self.C0)}
        t = -self.B / (2 * self.A)
        if 0 < t < 1:
            out.add(math.sqrt(max(0.0, self.C0 - self.B * self.B / (4 * self.A))))
        return out


def _disc_edge_area(p, q, R: float) -> float:
    """Signed area of disc(0, R) ∩ triangle(0, p, q)."""
    dx, dy = q[0] - p[0], q[1] - p[1]
    a = dx * dx + dy * dy
    b = 2 * (p[0] * dx + p[1] * dy)
    c = p[0] * p[0] + p[1] * p[1] - R * R
    ts = [0.0]
    disc = b * b - 4 * a * c
    if a > 0 and disc > 0:
        sq = math.sqrt(disc)
        for t in sorted(((-b - sq) / (2 * a), (-b + sq) / (2 * a))):
            if 0 < t < 1:
                ts.append(t)
    ts.append(1.0)
    total = 0.0
    for t0, t1 in zip(ts, ts[1:]):
        u = (p[0] + t0 * dx, p[1] + t0 * dy)
        v = (p[0] + t1 * dx, p[1] + t1 * dy)
        tm = 0.5 * (t0 + t1)
        mx, my = p[0] + tm * dx, p[1] + tm * dy
        cr = u[0] * v[1] - u[1] * v[0]
        if mx * mx + my * my <= R * R:
            total += 0.5 * cr
        else:
            total += 0.5 * R * R * math.atan2(cr, u[0] * v[0] + u[1] * v[1])
    return total


class _EuclideanTriangle:
    def __init__(self, key: Key, w: int, y: Point):
        self.w = abs(w)
        v0 = np.array([float(c) for c in key[0]])
        e1 = np.array([float(c) for c in key[1]]) - v0
        e2 = np.array([float(c) for c in key[2]]) - v0
        u1 = e1 / np.linalg.norm(e1)
        e2p = e2 - np.dot(e2, u1) * u1
        u2 = e2p / np.linalg.norm(e2p)
        yv = np.array([float(c) for c in y]) - v0
        self.c = (float(np.dot(yv, u1)), float(np.dot(yv, u2)))
        self.h2 = max(0.0, float(np.dot(yv, yv)) - self.c[0] ** 2 - self.c[1] ** 2)
        pts = [(0.0, 0.0), (float(np.linalg.norm(e1)), 0.0), (float(np.dot(e2, u1)), float(np.dot(e2, u2)))]
        self.pts = [(p[0] - self.c[0], p[1] - self.c[1]) for p in pts]
        self.key, self.y = key, y

    def value(self, r) -> float:
        s2 = float(r) ** 2 - self.h2
        if s2 <= 0:
            return 0.0
        s = math.sqrt(s2)
        tot = sum(_disc_edge_area(self.pts[i], self.pts[(i + 1) % 3], s) for i in range(3))
        return self.w * abs(tot)

    def events(self) -> set:
        out = {math.sqrt(self.h2)}
        for i in range(3):
            p, q = self.pts[i], self.pts[(i + 1) % 3]
            out.add(math.sqrt(self.h2 + p[0] ** 2 + p[1] ** 2))
            d = (q[0] - p[0], q[1] - p[1])
            dd = d[0] ** 2 + d[1] ** 2
            t = -(p[0] * d[0] + p[1] * d[1]) / dd
            if 0 < t < 1:
                f = (p[0] + t * d[0], p[1] + t * d[1])
                out.add(math.sqrt(self.h2 + f[0] ** 2 + f[1] ** 2))
        return out


class _SampledSimplex:
    """Fallback for lp norms: mass of the snapped restriction."""

    def __init__(self, key: Key, w: int, space: NormSpec, y: Point):
        self.chain = Chain(len(key) - 1, space, {key: w})
        self.y = y
        self.space = space

    def value(self, r) -> float:
        r = Fraction(r)
        if r <= 0:
            return 0.0
        return mass(split_by_ball(self.chain, Ball(self.y, r, self.space), "snap").inside)

    def events(self) -> set:
        return {float(norm_eval(self.space, sub(v, self.y))) for v in next(iter(self.chain.terms))}


def _simplex_evaluator(key: Key, w: int, space: NormSpec, y: Point):
    k = len(key) - 1
    if space.kind == "polytope":
        return _PolytopeSimplex(key, w, space, y)
    if space.kind == "euclidean":
        return _EuclideanSegment(key, w, y) if k == 1 else _EuclideanTriangle(key, w, y)
    return _SampledSimplex(key, w, space, y)


# -------------------------------------------------------- growth functions


@dataclass
class GrowthFunction:
    """β(r) = ‖T‖(B(y, r)) for the closed ball; right-continuous and non-decreasing.

    ``pieces[i]`` holds polynomial coefficients (highest degree first) valid on
    [breakpoints[i], breakpoints[i+1]) when the norm is a polytope norm.
    """

    center: Point
    dim: int
    total_mass: float
    breakpoints: list
    exact: bool
    _evaluators: list = field(repr=False)
    pieces: list | None = None
    tangencies: list = field(default_factory=list)

    @property
    def max_distance(self) -> float:
        return float(self.breakpoints[-1])

    def value(self, r) -> float:
        if r <= 0:
            return 0.0
        if self.exact:
            r = Fraction(r)
        elif float(r) >= self.max_distance:
            return self.total_mass
        return sum(e.value(r) for e in self._evaluators)

    __call__ = value

    def _piece_index(self, r: float) -> int:
        return bisect.bisect_right([float(b) for b in self.breakpoints], float(r)) - 1

    def right_derivative(self, r) -> float:
        r = float(r)
        if r >= self.max_distance:
            return 0.0
        if self.pieces is not None:
            i = self._piece_index(r)
            if i < 0:
                return 0.0
            return float(np.polyval(np.polyder(self.pieces[i]), r))
        # one-sided difference with Richardson extrapolation, inside one smooth piece
        i = self._piece_index(r)
        nxt = float(self.breakpoints[i + 1]) if 0 <= i + 1 < len(self.breakpoints) else r + 1.0
        h = min(1e-5 * max(r, 1.0), 0.25 * (nxt - r))
        f0 = self.value(r)
        d1 = (self.value(r + h) - f0) / h
        d2 = (self.value(r + h / 2) - f0) / (h / 2)
        return max(0.0, 2 * d2 - d1)

    def samples(self, per_piece: int = 16, upto: float | None = None) -> list[float]:
        """A grid containing every breakpoint and ``per_piece`` points inside each piece."""
        bps = [float(b) for b in self.breakpoints]
        top = bps[-1] if upto is None else min(upto, bps[-1])
        grid = {0.0, top}
        for a, b in zip(bps, bps[1:]):
            if a >= top:
                break
            b = min(b, top)
            grid.update(np.linspace(a, b, per_piece + 2).tolist())
        return sorted(g for g in grid if g <= top)


def _breakpoints(evaluators, exact: bool) -> list:
    pts = set()
    for e in evaluators:
        pts |= e.events()
    if exact:
        pts = {Fraction(0)} | {p for p in pts if p > 0}
    else:
        pts = {0.0} | {float(p) for p in pts if p > 0}
    return sorted(pts)


def _fit_pieces(evals, bps: list, k: int) -> tuple[list, list]:
    """Interpolate each piece from k+1 interior samples and check with one more."""
    # a simplex is empty below its smallest event radius and full above its largest
    spans = []
    for e in evals:
        ev = e.events()
        lo, hi = (min(ev), max(ev)) if ev else (Fraction(0), Fraction(0))
        if e.value(lo) > 0:  # y lies on the simplex
            lo = Fraction(0)
        spans.append((lo, hi, e.value(hi)))
    pieces, tangencies = [], []
    for a, b in zip(bps, bps[1:]):
        full = sum(m for lo, hi, m in spans if hi <= a)
        active = [e for e, (lo, hi, _) in zip(evals, spans) if lo < b and hi > a]
        nodes = [a + (b - a) * Fraction(j + 1, k + 3) for j in range(k + 2)]
        vals = [full + sum(e.value(t) for e in active) for t in nodes]
        xs = np.array([float(t) for t in nodes[: k + 1]])
        coef = np.linalg.solve(np.vander(xs, k + 1), np.array(vals[: k + 1])) if k > 0 else np.array([vals[0]])
        check = float(np.polyval(coef, float(nodes[-1])))
        if abs(check - vals[-1]) > 1e-9 * max(1.0, abs(vals[-1])):
            raise ChainError(f"growth function is not polynomial on [{a}, {b}]; missing event radius")
        pieces.append(coef)
        left = sum(e.value(a) for e in evals) if a > 0 else 0.0
        limit = float(np.polyval(coef, float(a)))
        if a > 0 and abs(left - limit) > 1e-9 * max(1.0, abs(left)):
            tangencies.append(a)
    far = bps[-1]
    if pieces and abs(sum(e.value(far) for e in evals) - float(np.polyval(pieces[-1], float(far)))) > 1e-9 * max(1.0, abs(float(far))):
        tangencies.append(far)
    return pieces, tangencies


def growth_function(T: Chain, y) -> GrowthFunction:
    """Growth function of T around y (exact pieces for polytope norms)."""
    y = as_point(y)
    if len(y) != T.space.dimension:
        raise ChainError("center has the wrong dimension")
    evals = [_simplex_evaluator(key, w, T.space, y) for key, w in T.terms.items()]
    exact = T.space.kind == "polytope"
    vdist = [norm_eval(T.space, sub(v, y)) for v in T.vertices()] if T else [0]
    bps = _breakpoints(evals, exact)
    far = max(vdist) if exact else float(max(vdist))
    bps = [b for b in bps if b < far] + [far]
    if bps[0] != 0:
        bps = [Fraction(0) if exact else 0.0] + bps
    total = sum(e.value(far) for e in evals) if T else 0.0
    g = GrowthFunction(y, T.dim, total, bps, exact, evals)
    if exact and T:
        g.pieces, g.tangencies = _fit_pieces(evals, bps, T.dim)
    return g


def synthetic_growth(func: Callable[[float], float], derivative: Callable[[float], float], breakpoints: Sequence[float], dim: int) -> GrowthFunction:
    """A GrowthFunction from closed-form callables (used by oracles and tests)."""

    class _F:
        def value(self, r):
            return func(float(r))

    g = GrowthFunction((), dim, func(float(breakpoints[-1])), [float(b) for b in breakpoints], False, [_F()])
    g.right_derivative = lambda r: derivative(float(r))  # type: ignore[method-assign]
    return g


# -------------------------------------------------------- critical radius


def critical_radius(g: GrowthFunction, F, k: int, per_piece: int = 32) -> float:
    """Largest r ≥ 0 with β(r) ≥ F·r^k (0 if only r = 0 qualifies)."""
    F = float(F)
    if F <= 0:
        raise ValueError("F must be positive")
    if g.total_mass <= 0:
        return 0.0
    r_max = (g.total_mass / F) ** (1.0 / k)
    if r_max >= g.max_distance:
        return r_max

    def h(r: float) -> float:
        return g.value(r) - F * r**k

    bps = [float(b) for b in g.breakpoints] + [r_max]
    for i in range(len(g.breakpoints) - 1, -1, -1):
        a = float(g.breakpoints[i])
        b = min(bps[i + 1], r_max)
        if a >= r_max:
            continue
        pts = [a, b]
        if g.pieces is not None:
            poly = np.array(g.pieces[i], dtype=float)
            poly = np.polysub(poly, np.concatenate([[F], np.zeros(k)]))
            pts += [float(z.real) for z in np.roots(poly) if abs(z.imag) < 1e-12 and a < z.real < b]
        else:
            pts += np.linspace(a, b, per_piece + 2)[1:-1].tolist()
        pts = sorted(set(pts))
        # the piece is continuous on [a, b); find the last stretch where h ≥ 0
        for x0, x1 in reversed(list(zip(pts, pts[1:]))):
            mid = 0.5 * (x0 + x1)
            if h(mid) >= 0:
                # at a piece end, monotonicity of β makes the end itself qualify
                if g.pieces is not None or x1 == b:
                    return x1
                return _bisect(h, mid, x1)
            if x0 > 0 and h(x0) >= 0:
                return x0 if g.pieces is not None else _bisect(h, x0, mid)
    return 0.0


def _bisect(h, lo: float, hi: float) -> float:
    """h(lo) ≥ 0 > h(hi); return the last point with h ≥ 0 to machine precision."""
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if h(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return lo


# -------------------------------------------------- slicing inequality check


@dataclass
class SliceCheck:
    radius: float
    slice_mass: float
    derivative: float
    violation: float


@dataclass
class SliceReport:
    checks: list
    max_violation: float

    def ok(self, tol: float) -> bool:
        return self.max_violation <= tol


def slice_mass_vs_derivative(T: Chain, y, radii: Sequence, mode: str | None = None, g: GrowthFunction | None = None, tol=DEFAULT_TOL) -> SliceReport:
    """Compare M(⟨T, ρ, r⟩) with Lip(ρ)·β′(r) at each radius."""
    if T.dim >= 1 and boundary(T):
        raise ChainError("slicing inequality check needs a cycle")
    y = as_point(y)
    g = g or growth_function(T, y)
    checks = []
    for r in radii:
        s = slice_chain(T, y, Fraction(r), mode, tol)
        m = mass(s.chain) if s.chain else 0.0
        d = LIP_RHO * g.right_derivative(s.radius)
        checks.append(SliceCheck(float(s.radius), m, d, max(0.0, m - d)))
    return SliceReport(checks, max((c.violation for c in checks), default=0.0))


def simplex_masses(T: Chain) -> list[float]:
    return [abs(w) * simplex_mass(key, T.space) for key, w in T.terms.items()]
