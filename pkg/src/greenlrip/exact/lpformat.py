"""LP-file writer for :class:`MilpModel` and a small independent reader used to validate it."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..io import atomic_write_text
from .milp import MilpModel

MAX_LINE = 255
Z2_ROW = "z2_eps"
# Stand-in rhs for the emission row; an external sweep overwrites it per step.
Z2_PLACEHOLDER = 1e30
_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]{0,254}$")


class LpFormatError(ValueError):
    pass


def _num(x: float) -> str:
    return format(float(x), ".17g")


def _terms(coeffs: dict[str, float]) -> list[str]:
    out = []
    for name, c in coeffs.items():
        if c == 0:
            continue
        sign = "-" if c < 0 else "+"
        out.append(f"{sign} {_num(abs(c))} {name}")
    return out


def _wrap(head: str, parts: list[str]) -> list[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + 1 + len(p) > MAX_LINE:
            lines.append(cur)
            cur = "   " + p
        else:
            cur = f"{cur} {p}"
    lines.append(cur)
    return lines


def _check_names(model: MilpModel) -> None:
    for v in model.variables:
        if not _NAME_RE.match(v.name):
            raise LpFormatError(f"variable name {v.name!r} is not LP-safe")
    for c in model.constraints:
        if not _NAME_RE.match(c.name):
            raise LpFormatError(f"constraint name {c.name!r} is not LP-safe")


def lp_text(model: MilpModel) -> str:
    _check_names(model)
    lines = [f"\\ {model.name}", "Minimize"]
    z1 = model.objectives.get("z1")
    obj_terms = _terms(z1.terms) if z1 is not None else []
    if z1 is not None and z1.constant:
        lines.append(f"\\ z1 constant offset {_num(z1.constant)}")
    if not model.variables:
        raise LpFormatError("model has no variables")
    # An empty linear body still needs one term to be valid LP syntax.
    filler = ["0 " + model.variables[0].name]
    lines += _wrap(" z1:", obj_terms or filler)
    lines.append("Subject To")
    for c in model.constraints:
        body = _terms(c.coeffs) or filler
        lines += _wrap(f" {c.name}:", body + [c.sense, _num(c.rhs)])
    z2 = model.objectives.get("z2")
    if z2 is not None and z2.terms:
        lines += _wrap(f" {Z2_ROW}:", _terms(z2.terms) + ["<=", _num(Z2_PLACEHOLDER - z2.constant)])
    lines.append("Bounds")
    for v in model.variables:
        if v.kind == "binary":
            continue
        lo = "-inf" if v.lb == -math.inf else _num(v.lb)
        if v.lb == -math.inf and v.ub == math.inf:
            lines.append(f" {v.name} free")
        elif v.ub == math.inf:
            if v.lb != 0.0:
                lines.append(f" {v.name} >= {lo}")
        else:
            lines.append(f" {lo} <= {v.name} <= {_num(v.ub)}")
    generals = [v.name for v in model.variables if v.kind == "integer"]
    binaries = [v.name for v in model.variables if v.kind == "binary"]
    if generals:
        lines.append("Generals")
        lines += _wrap("", generals)
    if binaries:
        lines.append("Binaries")
        lines += _wrap("", binaries)
    lines.append("End")
    return "\n".join(line.rstrip() for line in lines) + "\n"


def export_lp(model: MilpModel, path: str | Path) -> Path:
    """Write ``model`` in LP format: z1 as the objective, z2 as row ``z2_eps``."""
    path = Path(path)
    try:
        atomic_write_text(path, lp_text(model))
    except OSError as exc:
        raise LpFormatError(f"cannot write {path}: {exc}") from exc
    return path


@dataclass
class ParsedLp:
    objective: dict[str, float] = field(default_factory=dict)
    rows: dict[str, tuple[dict[str, float], str, float]] = field(default_factory=dict)
    bounds: dict[str, tuple[float, float]] = field(default_factory=dict)
    generals: list[str] = field(default_factory=list)
    binaries: list[str] = field(default_factory=list)


_SECTIONS = {"minimize": "obj", "subject to": "st", "bounds": "bounds", "generals": "gen",
             "binaries": "bin", "end": "end"}
_TOKEN = re.compile(r"<=|>=|=|[+-]|[A-Za-z_][A-Za-z0-9_.]*|[0-9.]+(?:[eE][+-]?[0-9]+)?|:")


def _parse_linear(tokens: list[str]) -> dict[str, float]:
    coeffs: dict[str, float] = {}
    sign, coef = 1.0, None
    for tok in tokens:
        if tok in "+-":
            sign = -1.0 if tok == "-" else 1.0
        elif re.fullmatch(r"[0-9.]+(?:[eE][+-]?[0-9]+)?", tok):
            coef = float(tok)
        else:
            coeffs[tok] = coeffs.get(tok, 0.0) + sign * (1.0 if coef is None else coef)
            sign, coef = 1.0, None
    return {n: c for n, c in coeffs.items() if c != 0.0}


def parse_lp(text: str) -> ParsedLp:
    """Read the LP subset emitted by :func:`lp_text`; raises on grammar violations."""
    out = ParsedLp()
    section = None
    stmts: dict[str, list[str]] = {"obj": [], "st": []}
    current: list[str] = []
    for raw in text.splitlines():
        if len(raw) > MAX_LINE:
            raise LpFormatError(f"line longer than {MAX_LINE} characters")
        line = raw.split("\\", 1)[0].strip()
        if not line:
            continue
        key = line.lower()
        if key in _SECTIONS:
            if current:
                stmts[section].append(" ".join(current))
                current = []
            section = _SECTIONS[key]
            if section == "end":
                break
            continue
        if section is None:
            raise LpFormatError(f"content before the first section: {line!r}")
        if section in ("obj", "st"):
            if re.match(r"^[A-Za-z_][A-Za-z0-9_.]*\s*:", line) and current:
                stmts[section].append(" ".join(current))
                current = []
            current.append(line)
        elif section == "bounds":
            parts = line.split()
            if len(parts) == 2 and parts[1] == "free":
                out.bounds[parts[0]] = (-math.inf, math.inf)
            elif len(parts) == 5 and parts[1] == "<=" and parts[3] == "<=":
                out.bounds[parts[2]] = (float(parts[0]), float(parts[4]))
            elif len(parts) == 3 and parts[1] == ">=":
                out.bounds[parts[0]] = (float(parts[2]), math.inf)
            else:
                raise LpFormatError(f"unreadable bound {line!r}")
        elif section == "gen":
            out.generals += line.split()
        elif section == "bin":
            out.binaries += line.split()
    else:
        raise LpFormatError("missing End section")

    for stmt in stmts["obj"]:
        name, body = stmt.split(":", 1)
        out.objective = _parse_linear(_TOKEN.findall(body))
    for stmt in stmts["st"]:
        if ":" not in stmt:
            raise LpFormatError(f"unnamed row {stmt!r}")
        name, body = stmt.split(":", 1)
        toks = _TOKEN.findall(body)
        if len(toks) >= 2 and toks[-2] in "+-" and toks[-3:-2] and toks[-3] in ("<=", ">=", "="):
            toks[-2:] = [toks[-2] + toks[-1]]
        senses = [j for j, t in enumerate(toks) if t in ("<=", ">=", "=")]
        if len(senses) != 1 or senses[0] != len(toks) - 2:
            raise LpFormatError(f"row {name.strip()} lacks a single sense followed by a constant")
        j = senses[0]
        out.rows[name.strip()] = (_parse_linear(toks[:j]), toks[j], float(toks[j + 1]))
    return out
