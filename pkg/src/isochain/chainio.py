"""Plain-text chain files and OBJ export.

Format::

    format 1
    ambient 2
    norm euclidean | lp 3 | polytope 1,1 1,-1 -1,1 -1,-1
    dim 1
    vertex 0 1/2
    simplex 0 1 1

Coordinates are exact rationals ``p/q``; a simplex line lists vertex indices
followed by an integer weight.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from pathlib import Path

from .chain_core import Chain, ChainError, is_degenerate, reduce
from .normed_space import NormSpec

log = logging.getLogger(__name__)
FORMAT_VERSION = 1


class ChainFileError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f"line {line}" + (f", column {column}" if column is not None else "") if line else "input"
        super().__init__(f"{where}: {message}")
        self.line, self.column = line, column


def _frac(tok: str, line: int, col: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ChainFileError(f"bad rational {tok!r}", line, col) from None


def _norm(tokens: list[str], n: int, line: int) -> NormSpec:
    if not tokens:
        raise ChainFileError("missing norm kind", line)
    kind = tokens[0]
    try:
        if kind == "euclidean":
            return NormSpec.euclidean(n)
        if kind == "lp":
            return NormSpec.lp(n, _frac(tokens[1], line, 3))
        if kind == "polytope":
            verts = [tuple(_frac(c, line, i + 2) for c in t.split(",")) for i, t in enumerate(tokens[1:])]
            return NormSpec(n, "polytope", vertices=tuple(verts))
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ChainFileError):
            raise
        raise ChainFileError(f"bad norm: {exc}", line) from None
    raise ChainFileError(f"unknown norm kind {kind!r}", line, 2)


def loads(text: str) -> Chain:
    header: dict[str, object] = {}
    verts: list = []
    raw: list = []
    seen: set = set()
    for ln, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        head = tok[0]
        if head == "format":
            if len(tok) != 2 or tok[1] != str(FORMAT_VERSION):
                raise ChainFileError(f"unsupported format {' '.join(tok[1:])!r}", ln, 2)
            header["format"] = FORMAT_VERSION
        elif head == "ambient":
            try:
                header["ambient"] = int(tok[1])
            except (IndexError, ValueError):
                raise ChainFileError("ambient needs an integer", ln, 2) from None
        elif head == "norm":
            if "ambient" not in header:
                raise ChainFileError("norm before ambient", ln)
            header["norm"] = _norm(tok[1:], header["ambient"], ln)
        elif head == "dim":
            try:
                header["dim"] = int(tok[1])
            except (IndexError, ValueError):
                raise ChainFileError("dim needs an integer", ln, 2) from None
        elif head == "vertex":
            if "ambient" not in header:
                raise ChainFileError("vertex before ambient", ln)
            if len(tok) - 1 != header["ambient"]:
                raise ChainFileError(f"vertex needs {header['ambient']} coordinates", ln)
            verts.append(tuple(_frac(t, ln, i + 2) for i, t in enumerate(tok[1:])))
        elif head == "simplex":
            if "dim" not in header:
                raise ChainFileError("simplex before dim", ln)
            k = header["dim"]
            if len(tok) != k + 3:
                raise ChainFileError(f"simplex needs {k + 1} indices and a weight", ln)
            idx = []
            for i, t in enumerate(tok[1 : k + 2]):
                try:
                    j = int(t)
                except ValueError:
                    raise ChainFileError(f"bad index {t!r}", ln, i + 2) from None
                if not 0 <= j < len(verts):
                    raise ChainFileError(f"index {j} out of range", ln, i + 2)
                idx.append(j)
            try:
                w = int(tok[-1])
            except ValueError:
                raise ChainFileError(f"bad weight {tok[-1]!r}", ln, k + 3) from None
            if w == 0:
                raise ChainFileError("zero weight", ln, k + 3)
            pts = [verts[j] for j in idx]
            if is_degenerate(pts):
                raise ChainFileError("degenerate simplex", ln)
            key = frozenset(idx)
            if key in seen:
                log.warning("line %d: repeated simplex merged on reduction", ln)
            seen.add(key)
            raw.append((pts, w))
        else:
            raise ChainFileError(f"unknown record {head!r}", ln, 1)
    for need in ("format", "ambient", "norm", "dim"):
        if need not in header:
            raise ChainFileError(f"missing header line {need!r}")
    space, k = header["norm"], header["dim"]
    if not raw:
        return Chain.zero(k, space)
    try:
        return reduce(raw, space, k)
    except ChainError as exc:
        raise ChainFileError(str(exc)) from None


def dumps(T: Chain) -> str:
    verts = T.vertices()
    index = {v: i for i, v in enumerate(verts)}
    lines = [
        f"format {FORMAT_VERSION}",
        f"ambient {T.space.dimension}",
        f"norm {T.space.describe()}",
        f"dim {T.dim}",
    ]
    lines += ["vertex " + " ".join(str(c) for c in v) for v in verts]
    for key, w in sorted(T.terms.items()):
        lines.append("simplex " + " ".join(str(index[v]) for v in key) + f" {w}")
    return "\n".join(lines) + "\n"


def parse(path) -> Chain:
    return loads(Path(path).read_text())


def serialize(T: Chain, path) -> None:
    Path(path).write_text(dumps(T))


def obj_text(T: Chain) -> str:
    """Wavefront OBJ: ``l`` elements for 1-chains, ``f`` elements for 2-chains."""
    if T.dim not in (1, 2):
        raise ChainError("OBJ export supports dimensions 1 and 2")
    lines = [f"# chain of dimension {T.dim}, {len(T)} simplices"]
    if not T:
        return "\n".join(lines) + "\n"
    verts = T.vertices()
    index = {v: i + 1 for i, v in enumerate(verts)}
    for v in verts:
        c = [float(x) for x in v] + [0.0] * (3 - len(v))
        lines.append("v " + " ".join(repr(x) for x in c[:3]))
    tag = "l" if T.dim == 1 else "f"
    for key, w in sorted(T.terms.items()):
        ids = [index[v] for v in key]
        if w < 0:
            ids = ids[::-1]
        if abs(w) > 1:
            lines.append(f"# weight {w}")
        lines += [f"{tag} " + " ".join(map(str, ids))] * abs(w)
    return "\n".join(lines) + "\n"


def export_obj(T: Chain, path) -> None:
    Path(path).write_text(obj_text(T))
