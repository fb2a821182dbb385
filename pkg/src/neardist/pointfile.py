"""Read and write the line-oriented point-set text format.

::

    # optional comments anywhere
    dim=3 count=2 mode=exact
    0 1/2 3
    1 0 -7/3

Coordinates are decimal literals or rationals ``p/q``. An optional
``tol=<x>`` key in the header sets the floating tolerance.
"""

from __future__ import annotations

import io
import os
from fractions import Fraction

from .geometry import DEFAULT_TOL, EXACT, FLOAT, PointSet


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _parse_header(text: str, lineno: int) -> dict:
    fields = {}
    for token in text.split():
        if "=" not in token:
            raise ParseError(f"malformed header token {token!r}", lineno)
        key, value = token.split("=", 1)
        fields[key] = value
    missing = {"dim", "count", "mode"} - fields.keys()
    if missing:
        raise ParseError(f"header missing {', '.join(sorted(missing))}", lineno)
    unknown = fields.keys() - {"dim", "count", "mode", "tol"}
    if unknown:
        raise ParseError(f"unknown header key(s) {', '.join(sorted(unknown))}", lineno)
    try:
        dim, count = int(fields["dim"]), int(fields["count"])
        tol = float(fields.get("tol", DEFAULT_TOL))
    except ValueError as exc:
        raise ParseError(str(exc), lineno) from None
    if dim < 1 or count < 0:
        raise ParseError("dim must be positive and count nonnegative", lineno)
    if fields["mode"] not in (EXACT, FLOAT):
        raise ParseError(f"mode must be exact or float, got {fields['mode']!r}", lineno)
    return {"dim": dim, "count": count, "mode": fields["mode"], "tol": tol}


def _parse_coord(token: str, mode: str, lineno: int):
    try:
        value = Fraction(token)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad coordinate {token!r}", lineno) from None
    return value if mode == EXACT else float(value)


def loads(text: str) -> PointSet:
    header = None
    rows = []
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = _strip(raw)
        if not line:
            continue
        if header is None:
            header = _parse_header(line, lineno)
            continue
        tokens = line.split()
        if len(tokens) != header["dim"]:
            raise ParseError(f"expected {header['dim']} coordinates, got {len(tokens)}", lineno)
        if len(rows) == header["count"]:
            raise ParseError(f"more than count={header['count']} points", lineno)
        rows.append([_parse_coord(t, header["mode"], lineno) for t in tokens])
    if header is None:
        raise ParseError("missing header line")
    if len(rows) != header["count"]:
        raise ParseError(f"expected {header['count']} points, found {len(rows)}")
    try:
        return PointSet(rows, dim=header["dim"], mode=header["mode"], tol=header["tol"])
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def load(path) -> PointSet:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _format_coord(x, exact: bool) -> str:
    if exact:
        x = Fraction(x)
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def dumps(ps: PointSet, comments: list[str] | None = None) -> str:
    out = [f"# {c}" for c in comments or []]
    header = f"dim={ps.dim} count={len(ps)} mode={ps.mode}"
    if not ps.is_exact and ps.tol != DEFAULT_TOL:
        header += f" tol={ps.tol!r}"
    out.append(header)
    for row in ps.points:
        out.append(" ".join(_format_coord(x, ps.is_exact) for x in row))
    return "\n".join(out) + "\n"


def dump(ps: PointSet, path, comments: list[str] | None = None) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(dumps(ps, comments))
    os.replace(tmp, path)
