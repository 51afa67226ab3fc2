"""Splitting a cycle into round pieces plus a remainder of smaller mass.

Also houses the constant chain (F, α, δ, E, C_k, D_k) and the growth-lemma
checker used as a test oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .chain_core import Chain, ChainError, boundary, equivalent, is_zero_current, mass, support_diameter
from .clipping import DEFAULT_TOL, Ball, split_by_ball
from .covering import CoverSelection, alpha, cover
from .linalg import Point, dot, sub
from .normed_space import in_ball, norm_eval, unit_ball_volume
from .product_cone import GAMMA, cone_filling, is_current_cycle
from .slicing import GrowthFunction, slice_chain, synthetic_growth

MAX_LAMBDA = Fraction(1, 6)


class NoSplitRadius(RuntimeError):
    pass


class DecompositionError(RuntimeError):
    def __init__(self, message: str, ledger=None):
        super().__init__(message)
        self.ledger = ledger


# ----------------------------------------------------------------- constants


@dataclass(frozen=True)
class ConstantsChain:
    k: int
    C: float | None
    lam: Fraction
    F: Fraction | float
    alpha: Fraction
    delta: Fraction
    E: float
    Ck: int
    D: float
    support_factor: float | None = None

    def lines(self) -> list[str]:
        out = [f"k={self.k}"]
        if self.C is not None:
            out.append(f"C={self.C!r}")
        out += [
            f"lambda={self.lam}",
            f"F={self.F}",
            f"alpha={self.alpha}",
            f"delta={self.delta}",
            f"E={self.E!r}",
            f"C_k={self.Ck}",
            f"D_k={self.D!r}",
        ]
        if self.support_factor is not None:
            out.append(f"support_factor={self.support_factor!r}")
        return out


def cone_constant(k: int) -> int:
    return (k + 1) * GAMMA ** (k + 1)


def constants(k: int, C_prev=None, lam=MAX_LAMBDA) -> ConstantsChain:
    """Constant chain for dimension k.

    k = 1 needs no filling of slices, so λ drops out (F = 1, E = 4). For k ≥ 2,
    ``C_prev`` is the isoperimetric constant of dimension k − 1 and λ is halved
    until F < ω_k / k^(k/2).
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    Ck = cone_constant(k)
    a = alpha(k)
    if k == 1:
        F, lam0 = Fraction(1), Fraction(0)
        delta = a * (1 - lam0)
        E = 4.0
        D = Ck * E * float((1 + lam0) / delta) ** 2
        return ConstantsChain(1, None, lam0, F, a, delta, E, Ck, D)
    if C_prev is None:
        raise ValueError("k >= 2 needs the constant of dimension k - 1")
    lam = Fraction(lam)
    if not 0 < lam <= MAX_LAMBDA:
        raise ValueError("lambda must lie in (0, 1/6]")
    C = float(C_prev)
    if C <= 0:
        raise ValueError("C must be positive")
    cap = unit_ball_volume(k) / k ** (k / 2)
    while True:
        F = _F(lam, C, k)
        if float(F) < cap:
            break
        lam /= 2
    delta = a * (1 - lam)
    E = 4 / float(F * (1 - lam)) ** (1 / k)
    D = Ck * E * float((1 + lam) / delta) ** ((k + 1) / k)
    # r̄ ≤ (4/3)(1 + 3Ck(λF)^{1/k}/C^{1/k}) r₀, and the inner term equals 3λ
    inner = 3 * C * k * float(lam * F) ** (1 / k) / C ** (1 / k)
    support = 4 / 3 * (1 + inner)
    if 3 * lam > Fraction(1, 2) or support > 2 * (1 + 1e-12):
        raise ValueError("support condition 3λ ≤ 1/2 fails")
    return ConstantsChain(k, C, lam, F, a, delta, E, Ck, D, support)


def _F(lam: Fraction, C: float, k: int):
    num = lam ** (k - 1)
    if float(C).is_integer():
        return num / (Fraction(int(C)) ** (k - 1) * k**k)
    return float(num) / (C ** (k - 1) * k**k)


def constants_for(k: int, lam=MAX_LAMBDA) -> list[ConstantsChain]:
    """Constant chains for dimensions 1..k, each feeding D into the next."""
    chain = [constants(1)]
    for j in range(2, k + 1):
        chain.append(constants(j, chain[-1].D, lam))
    return chain


# -------------------------------------------------------- growth lemma oracle


def ode_bound(Cbar: float, k: int, r: float) -> float:
    return r**k / (Cbar ** (k - 1) * k**k)


def ode_lower_bound_check(Cbar: float, k: int, beta: GrowthFunction, r0: float, r1: float, grid: int = 2001, rtol: float = 1e-6) -> bool:
    """β(r) ≥ r^k/(C̄^(k−1) k^k) on a grid over [r0, r1]."""
    if k < 2:
        raise ValueError("the growth lemma needs k >= 2")
    if not 0 <= r0 < r1:
        raise ValueError("invalid interval")
    for r in np.linspace(r0, r1, grid):
        b = ode_bound(Cbar, k, float(r))
        if beta.value(float(r)) < b * (1 - rtol):
            return False
    return True


def ode_hypotheses_hold(Cbar: float, k: int, beta: GrowthFunction, r0: float, r1: float, grid: int = 2001, rtol: float = 1e-6) -> bool:
    """(i) β(r0) equals the bound and (ii) β ≤ C̄ β′^(k/(k−1)) on a grid."""
    b0 = ode_bound(Cbar, k, r0)
    if abs(beta.value(r0) - b0) > rtol * max(b0, 1e-300):
        return False
    for r in np.linspace(r0, r1, grid)[:-1]:
        d = max(beta.right_derivative(float(r)), 0.0)
        if beta.value(float(r)) > Cbar * d ** (k / (k - 1)) * (1 + rtol):
            return False
    return True


def extremal_beta(Cbar: float, k: int, r0: float, r1: float) -> GrowthFunction:
    """The equality solution β(r) = r^k/(C̄^(k−1) k^k)."""
    c = 1.0 / (Cbar ** (k - 1) * k**k)
    return synthetic_growth(lambda r: c * r**k, lambda r: c * k * r ** (k - 1), [r0, r1], k)


def synthetic_beta(Cbar: float, k: int, r0: float, r1: float, seed: int) -> GrowthFunction:
    """Integrate β′ = (β/C̄)^((k−1)/k)·(1 + φ(r)) with a random bump φ ≥ 0.

    Starts on the extremal value at r0, so hypotheses (i) and (ii) hold.
    """
    rng = np.random.default_rng(seed)
    amps = rng.uniform(0, 2, size=3)
    freqs = rng.uniform(0.5, 4, size=3)
    phases = rng.uniform(0, 2 * math.pi, size=3)

    def phi(r):
        return float(np.sum(amps * (1 + np.sin(freqs * r + phases)) / 2))

    e = (k - 1) / k

    def rhs(r, b):
        return [(max(b[0], 0.0) / Cbar) ** e * (1 + phi(r))]

    sol = solve_ivp(rhs, (r0, r1), [ode_bound(Cbar, k, r0)], dense_output=True, rtol=1e-11, atol=1e-14)
    f = lambda r: float(sol.sol(min(max(r, r0), r1))[0])
    return synthetic_growth(f, lambda r: rhs(r, [f(r)])[0], [r0, r1], k)


def glued_flat_beta(Cbar: float, k: int, r0: float, r1: float, flat_from: float) -> GrowthFunction:
    """Extremal solution that stops growing at ``flat_from``; violates (ii) afterwards."""
    c = 1.0 / (Cbar ** (k - 1) * k**k)
    f = lambda r: c * min(r, flat_from) ** k
    d = lambda r: c * k * r ** (k - 1) if r < flat_from else 0.0
    return synthetic_growth(f, d, [r0, flat_from, r1], k)


# ------------------------------------------------------------- split radius


def _distance_ranges_k1(T: Chain, y: Point):
    """Per-segment [min, max] of ρ, as exact values (squared for euclidean)."""
    space = T.space
    out = []
    for (a, b), _ in T.terms.items():
        if space.kind == "polytope":
            # ρ along the segment is the max of affine functions; its minimum is
            # at an endpoint or where two of them cross
            d, off = sub(b, a), sub(a, y)
            lines = [(dot(f, off), dot(f, d)) for f in space.facets]
            ts = {Fraction(0), Fraction(1)}
            for i in range(len(lines)):
                for j in range(i + 1, len(lines)):
                    if lines[i][1] != lines[j][1]:
                        t = (lines[j][0] - lines[i][0]) / (lines[i][1] - lines[j][1])
                        if 0 < t < 1:
                            ts.add(t)
            vals = [max(c0 + c1 * t for c0, c1 in lines) for t in ts]
            out.append((min(vals), max(vals)))
        elif space.kind == "euclidean":
            d, off = sub(b, a), sub(a, y)
            da, db = dot(off, off), dot(sub(b, y), sub(b, y))
            t = -dot(off, d) / dot(d, d)
            lo = min(da, db)
            if 0 < t < 1:
                p = tuple(o + t * c for o, c in zip(off, d))
                lo = dot(p, p)
            out.append((lo, max(da, db)))
        else:
            from scipy.optimize import minimize_scalar

            fa = [float(c) for c in sub(a, y)]
            fd = [float(c) for c in sub(b, a)]
            rho = lambda t: float(norm_eval(space, [x + t * c for x, c in zip(fa, fd)]))
            m = minimize_scalar(rho, bounds=(0.0, 1.0), method="bounded")
            lo = min(rho(0.0), rho(1.0), m.fun) * (1 - 1e-9)
            out.append((lo, max(rho(0.0), rho(1.0)) * (1 + 1e-9)))
    return out


def _k1_gap(T: Chain, y: Point, r0: Fraction) -> Fraction:
    """Smallest gap of the distance ranges inside [r0, 2r0); returns its midpoint."""
    sq = T.space.kind == "euclidean"
    ranges = sorted(_distance_ranges_k1(T, y))
    to_key = (lambda r: r * r) if sq else (lambda r: r)
    lo_end, hi_end = to_key(r0), to_key(2 * r0)
    # walk right from r0 through every closed range that covers the current point
    cur = lo_end
    while True:
        cover = [hi for lo, hi in ranges if lo <= cur <= hi]
        if not cover or max(cover) == cur:
            break
        cur = max(cover)
    nxt = min((lo for lo, _ in ranges if lo > cur), default=None)
    top = hi_end if nxt is None else min(nxt, hi_end)
    if top <= cur:
        raise NoSplitRadius(f"every radius in [{float(r0)}, {2 * float(r0)}) meets the support")
    mid = (cur + top) / 2
    if not sq:
        return mid
    r = Fraction(math.sqrt(mid)).limit_denominator(10**12)
    if not cur < r * r < top:
        r = Fraction(math.sqrt(float(mid)))
    if not cur < r * r < top:
        raise NoSplitRadius("gap too narrow to place a rational radius")
    return r


def split_ratio(g: GrowthFunction, r: float, C: float, lam: float, k: int) -> float:
    b = g.value(r)
    if b <= 0:
        return math.inf
    return C * g.right_derivative(r) ** (k / (k - 1)) / (lam * b)


def find_split_radius(T: Chain, y: Point, g: GrowthFunction, consts: ConstantsChain, r0=None, samples: int = 400) -> Fraction:
    """A radius in the admissible window where the cut is cheap.

    k = 1: the sphere misses spt T entirely, r ∈ [r0, 2r0).
    k ≥ 2: C·β′(r)^(k/(k−1)) < λ·β(r) with r ∈ [r0, 4r0/3]; the grid point with
    the smallest ratio is taken, with one density doubling on failure.
    """
    from .slicing import critical_radius

    r0 = Fraction(r0) if r0 is not None else Fraction(critical_radius(g, consts.F, consts.k))
    if r0 <= 0:
        raise NoSplitRadius("critical radius is zero")
    if consts.k == 1:
        return _k1_gap(T, y, r0)
    lo, hi = float(r0), 4 * float(r0) / 3
    bps = [float(b) for b in g.breakpoints]
    for attempt in range(2):
        n = samples * 2**attempt
        grid = np.linspace(lo, hi, n + 1)
        best, best_r = math.inf, None
        for r in grid:
            if any(abs(r - b) < 1e-9 * max(1.0, r) for b in bps):
                continue
            q = split_ratio(g, float(r), consts.C, float(consts.lam), consts.k)
            if q < best:
                best, best_r = q, float(r)
                if q == 0.0:
                    break
        if best < 1.0:
            top = 4 * r0 / 3
            r = Fraction(best_r).limit_denominator(10**9)
            if not r0 <= r <= top:
                r = min(max(Fraction(best_r), r0), top)
            return r
    raise NoSplitRadius(f"no radius in [{lo}, {hi}] with C·β′^(k/(k−1)) < λβ (best ratio {best})")


# ------------------------------------------------------------------ split off


@dataclass
class PieceRecord:
    center: Point
    r0: Fraction
    radius: Fraction
    beta: float
    mass: float
    diameter: float
    roundness: float
    fill_mass: float = 0.0
    fill_kind: str = "none"


def _within(space, chain: Chain, y: Point, R: Fraction) -> bool:
    return all(in_ball(space, v, y, R) for v in chain.vertices())


def split_off(T: Chain, y: Point, r: Fraction, consts: ConstantsChain, r0: Fraction, filler: Callable | None = None, mode=None, tol=DEFAULT_TOL):
    """Cut the ball piece out of T; returns (piece, rest, record).

    For k ≥ 2 the slice ∂(T⌊B) is filled by ``filler`` (or a cone) and the
    filling is subtracted so that both parts are cycles.
    """
    space = T.space
    if consts.k == 1:
        key = r * r if space.kind == "euclidean" else r
        if any(lo <= key < hi for lo, hi in _distance_ranges_k1(T, y)):
            raise DecompositionError(f"the sphere of radius {float(r)} meets the support")
        ball = Ball(y, r, space)
        inside = {key: w for key, w in T.terms.items() if all(ball.contains(v) for v in key)}
        piece = Chain(1, space, inside)
        rest = T - piece
        if boundary(piece):
            raise DecompositionError("split radius meets the support")
        m = mass(piece)
        return piece, rest, PieceRecord(y, r0, r, m, m, 0.0, 0.0)
    s = slice_chain(T, y, r, mode, tol)
    split = split_by_ball(T, Ball(y, s.radius, space), mode, tol)
    inside = split.inside
    beta = mass(inside)
    lam = float(consts.lam)
    S, kind = Chain.zero(T.dim, space), "none"
    if s.chain:
        tries = []
        if filler is not None:
            tries.append(("fill", lambda: filler(s.chain)))
        tries.append(("cone", lambda: _cone_nearest(s.chain, y)))
        for kind, make in tries:
            S = make()
            if mass(S) <= lam * beta * (1 + 1e-12) and _within(space, S, y, 2 * r0):
                break
        else:
            raise DecompositionError(
                f"slice filling mass {mass(S)} exceeds λβ = {lam * beta} or leaves B(y, 2r0)"
            )
    piece = inside - S
    rest = T - piece
    mS, mp = mass(S), mass(piece)
    if not (1 - lam) * beta <= mp * (1 + 1e-12) or not mp <= (1 + lam) * beta * (1 + 1e-12):
        raise DecompositionError(f"piece mass {mp} outside [(1−λ)β, (1+λ)β] with β = {beta}")
    if not _within(space, piece, y, 2 * r0):
        raise DecompositionError("piece support leaves B(y, 2r0)")
    return piece, rest, PieceRecord(y, r0, s.radius, beta, mp, 0.0, 0.0, mS, kind)


def _cone_nearest(c: Chain, y: Point) -> Chain:
    apex = min(c.vertices(), key=lambda v: (norm_eval(c.space, sub(v, y)), v))
    return cone_filling(c, apex).chain


# ------------------------------------------------------------------ decompose


@dataclass
class Decomposition:
    pieces: list
    remainder: Chain
    records: list
    constants: ConstantsChain
    fraction: float = 0.0
    input_mass: float = 0.0
    checks: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.pieces)

    def ledger(self) -> list[str]:
        out = [f"input_mass={self.input_mass!r}", f"pieces={self.n}", f"captured_fraction={self.fraction!r}"]
        for i, rec in enumerate(self.records):
            y = ",".join(str(c) for c in rec.center)
            out.append(
                f"piece.{i}=center:{y} r0:{float(rec.r0)!r} r:{float(rec.radius)!r} mass:{rec.mass!r} "
                f"diam:{rec.diameter!r} roundness:{rec.roundness!r} fill:{rec.fill_kind}:{rec.fill_mass!r}"
            )
        out.append(f"remainder_mass={mass(self.remainder)!r}")
        out += [f"check.{k}={'pass' if v else 'FAIL'}" for k, v in self.checks.items()]
        return out


def check_decomposition(T: Chain, d: Decomposition) -> dict:
    c = d.constants
    k = c.k
    M = mass(T)
    total = Chain.zero(T.dim, T.space)
    for p in d.pieces:
        total = total + p
    checks = {}
    checks["exact_sum"] = (T == total + d.remainder) if k == 1 else equivalent(T, total + d.remainder)
    checks["cycles"] = all(is_current_cycle(p) for p in d.pieces) and is_current_cycle(d.remainder)
    checks["roundness"] = all(
        float(support_diameter(p)) <= c.E * mass(p) ** (1 / k) * (1 + 1e-12) for p in d.pieces
    )
    checks["remainder_decay"] = mass(d.remainder) <= float(1 - c.delta) * M * (1 + 1e-12) + 1e-15
    checks["piece_total"] = sum(mass(p) for p in d.pieces) <= float(1 + c.lam) * M * (1 + 1e-12) + 1e-15
    return checks


def decompose(T: Chain, consts: ConstantsChain, filler: Callable | None = None, mode=None, seed: int = 0, tol=DEFAULT_TOL) -> Decomposition:
    """Round pieces around greedily selected centres plus a remainder."""
    if T.dim != consts.k:
        raise ValueError("constants are for a different dimension")
    if not is_current_cycle(T):
        raise ChainError("decompose needs a cycle")
    if not T or is_zero_current(T):
        d = Decomposition([], Chain.zero(T.dim, T.space), [], consts, 1.0, 0.0)
        d.checks = {"exact_sum": True, "cycles": True, "roundness": True, "remainder_decay": True, "piece_total": True}
        return d
    M = mass(T)
    sel: CoverSelection = cover(T, consts.F, consts.k, seed=seed, keep_growth=True)
    pieces, records = [], []
    rest = T
    for cand in sel.selected:
        r = find_split_radius(T, cand.point, cand.growth, consts, cand.r0)
        piece, rest, rec = split_off(rest, cand.point, r, consts, cand.r0, filler, mode, tol)
        if not piece:
            continue
        rec.diameter = float(support_diameter(piece))
        rec.roundness = rec.diameter / mass(piece) ** (1 / consts.k)
        pieces.append(piece)
        records.append(rec)
    d = Decomposition(pieces, rest, records, consts, sel.fraction, M)
    d.checks = check_decomposition(T, d)
    if not all(d.checks.values()):
        raise DecompositionError("decomposition invariant failed", d.ledger())
    return d
