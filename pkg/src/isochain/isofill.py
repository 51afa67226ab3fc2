"""Isoperimetric fillings with certificates.

The remainder of a cycle is decomposed repeatedly; every round piece is coned
off, and once the remainder is negligible it is coned directly. The resulting
filling S satisfies ∂S = T exactly and M(S) ≤ D_k·M(T)^((k+1)/k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .chain_core import Chain, ChainError, boundary, is_zero_current, mass
from .clipping import DEFAULT_TOL
from .decomposition import MAX_LAMBDA, ConstantsChain, constants_for, decompose
from .product_cone import cone_filling, is_current_cycle, support_apex

REL_TOL = 1e-9


@dataclass
class FillConfig:
    lam: Fraction = MAX_LAMBDA
    eps_stop: float = 1e-6
    mode: str | None = None
    seed: int = 0
    max_rounds: int = 200
    tol: Fraction = DEFAULT_TOL


@dataclass
class RoundRecord:
    pieces: int
    remainder_mass: float
    piece_mass_total: float


@dataclass
class FillingCertificate:
    k: int
    lam: Fraction
    input_mass: float
    output_mass: float
    constants: list
    rounds: list = field(default_factory=list)
    piece_bounds: list = field(default_factory=list)  # (mass M(T_i), cone bound, C_k E M^{(k+1)/k})
    final_remainder_mass: float = 0.0
    final_cone_bound: float = 0.0
    boundary_residual_zero: bool = False
    ratio: float = 0.0
    checks: dict = field(default_factory=dict)

    @property
    def D(self) -> float:
        return self.constants[-1].D

    @property
    def certified_total(self) -> float:
        return sum(b for _, b, _ in self.piece_bounds) + self.final_cone_bound

    @property
    def ok(self) -> bool:
        return self.boundary_residual_zero and all(self.checks.values())

    def to_lines(self) -> list[str]:
        out = [
            f"k={self.k}",
            f"lambda={self.lam}",
            f"input_mass={self.input_mass!r}",
            f"output_mass={self.output_mass!r}",
            f"ratio={self.ratio!r}",
            f"D_k={self.D!r}",
        ]
        for c in self.constants:
            out += [f"constants.{c.k}.{line}" for line in c.lines()]
        for i, r in enumerate(self.rounds):
            out.append(f"round.{i}=pieces:{r.pieces} remainder_mass:{r.remainder_mass!r} piece_mass_total:{r.piece_mass_total!r}")
        for i, (m, b, e) in enumerate(self.piece_bounds):
            out.append(f"piece.{i}=mass:{m!r} cone_bound:{b!r} round_bound:{e!r}")
        out += [
            f"final_remainder_mass={self.final_remainder_mass!r}",
            f"final_cone_bound={self.final_cone_bound!r}",
            f"certified_total={self.certified_total!r}",
            f"boundary_residual={'zero' if self.boundary_residual_zero else 'NONZERO'}",
        ]
        out += [f"check.{k}={'pass' if v else 'FAIL'}" for k, v in self.checks.items()]
        out.append(f"status={'pass' if self.ok else 'FAIL'}")
        return out


def parse_certificate(lines) -> dict[str, str]:
    """Key=value lines into a dict (values left as strings)."""
    out = {}
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key] = value
    return out


def filling_ratio(T: Chain, S: Chain) -> float:
    m = mass(T)
    if m == 0:
        return 0.0
    return mass(S) / m ** ((T.dim + 1) / T.dim)


def _slice_filler(config: FillConfig):
    def filler(c: Chain) -> Chain:
        return fill(c, config)[0]

    return filler


def fill(T: Chain, config: FillConfig | None = None) -> tuple[Chain, FillingCertificate]:
    """Filling of the cycle T with a certificate of ∂S = T and M(S) ≤ D_k M(T)^((k+1)/k)."""
    config = config or FillConfig()
    k = T.dim
    if k not in (1, 2):
        raise ChainError("fill supports cycles of dimension 1 and 2")
    if not is_current_cycle(T):
        raise ChainError("fill needs a cycle")
    chain = constants_for(k, config.lam)
    consts: ConstantsChain = chain[-1]
    M = mass(T)
    cert = FillingCertificate(k, consts.lam, M, 0.0, chain)
    S = Chain.zero(k + 1, T.space)
    filler = _slice_filler(config) if k >= 2 else None
    R = T
    expo = (k + 1) / k
    while R and not is_zero_current(R) and mass(R) > config.eps_stop * M and len(cert.rounds) < config.max_rounds:
        d = decompose(R, consts, filler, config.mode, config.seed, config.tol)
        if not d.pieces:
            break
        for piece in d.pieces:
            cf = cone_filling(piece, support_apex(piece))
            S = S + cf.chain
            mp = mass(piece)
            cert.piece_bounds.append((mp, cf.bound, consts.Ck * consts.E * mp**expo))
        R = d.remainder
        prev = cert.rounds[-1].piece_mass_total if cert.rounds else 0.0
        cert.rounds.append(RoundRecord(d.n, mass(R), prev + sum(mass(p) for p in d.pieces)))
    if R and not is_zero_current(R):
        cf = cone_filling(R, support_apex(R))
        S = S + cf.chain
        cert.final_remainder_mass = mass(R)
        cert.final_cone_bound = cf.bound
    cert.output_mass = mass(S)
    cert.boundary_residual_zero = is_zero_current(boundary(S) - T) if S or T else True
    cert.ratio = filling_ratio(T, S)
    cert.checks = _ledger_checks(cert, consts)
    return S, cert


def _ledger_checks(cert: FillingCertificate, consts: ConstantsChain) -> dict:
    M, k = cert.input_mass, cert.k
    slack = 1 + REL_TOL
    delta, lam = float(consts.delta), float(consts.lam)
    expo = (k + 1) / k
    checks = {}
    checks["geometric_decay"] = all(r.remainder_mass <= (1 - delta) ** (n + 1) * M * slack + 1e-15 for n, r in enumerate(cert.rounds))
    checks["piece_total"] = all(r.piece_mass_total <= (1 + lam) / delta * M * slack + 1e-15 for r in cert.rounds)
    checks["cone_bounds"] = all(b <= e * slack + 1e-15 for _, b, e in cert.piece_bounds)
    # the cones of the pieces after round n obey the tail estimate C_k E (Σ M(T_i))^{(k+1)/k}
    tail_ok = True
    masses = [m for m, _, _ in cert.piece_bounds]
    bounds = [b for _, b, _ in cert.piece_bounds]
    for j in range(len(masses)):
        tail_ok &= sum(bounds[j:]) <= consts.Ck * consts.E * sum(masses[j:]) ** expo * slack + 1e-15
    checks["tail_bound"] = tail_ok
    checks["certified_total"] = cert.output_mass <= cert.certified_total * slack + 1e-15
    checks["ratio"] = cert.ratio <= consts.D * slack
    checks["total_within_D"] = M == 0 or cert.certified_total <= consts.D * M**expo * slack
    return checks


# -------------------------------------------------------------------- verify


@dataclass
class VerifyReport:
    lines: list
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures


def verify(T: Chain, S: Chain, cert) -> VerifyReport:
    """Re-derive the certificate from T and S alone and compare.

    ``cert`` may be a FillingCertificate, a key=value dict, or its lines.
    """
    if isinstance(cert, FillingCertificate):
        cert = parse_certificate(cert.to_lines())
    elif not isinstance(cert, dict):
        cert = parse_certificate(cert)
    lines, failures = [], []

    def record(name: str, ok: bool, detail: str = ""):
        lines.append(f"verify.{name}={'pass' if ok else 'FAIL'}" + (f" {detail}" if detail else ""))
        if not ok:
            failures.append(name)

    k = T.dim
    record("dimension", S.dim == k + 1 and str(k) == cert.get("k", str(k)), f"k={k} S.dim={S.dim}")
    residual_zero = is_zero_current(boundary(S) - T) if (S and S.dim >= 1) else not T
    record("boundary_residual", residual_zero)
    mT, mS = mass(T), mass(S)
    record("input_mass", _close(mT, cert.get("input_mass")), f"{mT!r}")
    record("output_mass", _close(mS, cert.get("output_mass")), f"{mS!r}")
    ratio = filling_ratio(T, S) if S.dim == k + 1 else math.inf
    record("ratio_matches", _close(ratio, cert.get("ratio")), f"{ratio!r}")
    try:
        lam = Fraction(cert.get("lambda", str(MAX_LAMBDA)))
        if k == 1:
            lam = MAX_LAMBDA
        D = constants_for(k, lam)[-1].D
    except (ValueError, ZeroDivisionError) as exc:
        record("constants", False, str(exc))
        return VerifyReport(lines, failures)
    record("D_k_matches", _close(D, cert.get("D_k")), f"D_k={D!r}")
    claimed_D = _float(cert.get("D_k"))
    record("ratio_within_D", ratio <= D * (1 + REL_TOL) and (claimed_D is None or ratio <= claimed_D * (1 + REL_TOL)))
    return VerifyReport(lines, failures)


def _float(v) -> float | None:
    if v is None:
        return None
    try:
        return float(Fraction(v)) if "/" in v else float(v)
    except ValueError:
        return None


def _close(x: float, v) -> bool:
    y = _float(v)
    if y is None:
        return False
    return abs(x - y) <= REL_TOL * max(1.0, abs(x), abs(y))
