"""Text grammars for inputs and the versioned report document.

Coordinates::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | atom
    atom    := NUMBER | NUMBER '.' DIGITS | '(' expr ')'
             | 'sqrt(' expr ')' | 'golden' | 'liouville(' INT ')' | 'cf(' NAME ')'

``sqrt`` takes a rational argument; division is only by rationals.  Vectors are
comma-separated expressions.  Weights are comma-separated rationals; a weight
set is several weights separated by ``;``, a file with one weight per line, or
``grid(mesh)``.

Polynomial maps (for the probe) use ``s`` or ``s1, s2, ...`` as parameters,
for example ``1/3 + 2*s^2 - s1*s2``.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import mpmath

from .core import DEFAULT_PRECISION, Weight, WeightSet
from .errors import DimensionMismatch, DomainError, InputError
from .reals import CF_RULES, ComputableReal, Liouville, Sqrt, continued_fraction, golden

FORMAT_NAME = "wdiophantine.report"
FORMAT_VERSION = 1

_TOKEN = re.compile(r"\s*(?:(\d+(?:\.\d+)?)|([A-Za-z_][A-Za-z_0-9]*)|(.))")


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m.end() == pos:
                break
            if m.group(1):
                self.items.append(("num", m.group(1), m.start(1)))
            elif m.group(2):
                self.items.append(("name", m.group(2), m.start(2)))
            elif m.group(3):
                self.items.append(("op", m.group(3), m.start(3)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.items[self.i] if self.i < len(self.items) else ("end", "", len(self.text))

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v, col = self.take()
        if v != value:
            raise InputError(f"expected {value!r}, found {v or 'end of input'!r}", self.text, col)

    def error(self, message: str):
        raise InputError(message, self.text, self.peek()[2])


def _rational_literal(s: str) -> Fraction:
    return Fraction(s)


class _CoordParser:
    def __init__(self, text: str):
        self.t = _Tokens(text)

    def parse(self):
        v = self.expr()
        if self.t.peek()[0] != "end":
            self.t.error(f"unexpected {self.t.peek()[1]!r}")
        return v

    def expr(self):
        v = self.term()
        while self.t.peek()[1] in ("+", "-"):
            op = self.t.take()[1]
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self):
        v = self.unary()
        while self.t.peek()[1] in ("*", "/"):
            _, op, col = self.t.take()
            rhs = self.unary()
            if op == "*":
                v = rhs * v if isinstance(v, Fraction) else v * rhs
            else:
                if not isinstance(rhs, Fraction):
                    raise InputError("division is only allowed by rationals", self.t.text, col)
                if rhs == 0:
                    raise InputError("division by zero", self.t.text, col)
                v = v / rhs
        return v

    def unary(self):
        if self.t.peek()[1] == "-":
            self.t.take()
            return -self.unary()
        if self.t.peek()[1] == "+":
            self.t.take()
            return self.unary()
        return self.atom()

    def atom(self):
        kind, v, col = self.t.take()
        if kind == "num":
            return _rational_literal(v)
        if v == "(":
            inner = self.expr()
            self.t.expect(")")
            return inner
        if kind == "name":
            if v == "golden":
                return golden()
            if v == "sqrt":
                self.t.expect("(")
                arg = self.expr()
                self.t.expect(")")
                if not isinstance(arg, Fraction):
                    raise InputError("sqrt takes a rational argument", self.t.text, col)
                if arg < 0:
                    raise InputError("sqrt of a negative number", self.t.text, col)
                r = Fraction(arg)
                # perfect squares stay exact
                n, d = r.numerator, r.denominator
                from math import isqrt

                if isqrt(n) ** 2 == n and isqrt(d) ** 2 == d:
                    return Fraction(isqrt(n), isqrt(d))
                return Sqrt(r)
            if v == "liouville":
                self.t.expect("(")
                k, b, c2 = self.t.take()
                if k != "num" or "." in b:
                    raise InputError("liouville takes an integer base", self.t.text, c2)
                self.t.expect(")")
                try:
                    return Liouville(int(b))
                except DomainError as e:
                    raise InputError(str(e), self.t.text, c2) from None
            if v == "cf":
                self.t.expect("(")
                k, name, c2 = self.t.take()
                if name not in CF_RULES:
                    raise InputError(f"unknown continued-fraction rule {name!r}; known: {', '.join(sorted(CF_RULES))}", self.t.text, c2)
                self.t.expect(")")
                return continued_fraction(name)
            raise InputError(f"unknown name {v!r}", self.t.text, col)
        raise InputError(f"unexpected {v or 'end of input'!r}", self.t.text, col)


def _split_top(text: str, sep: str = ",") -> list[tuple[str, int]]:
    """Split on ``sep`` outside parentheses; returns (piece, start column)."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == sep and depth == 0:
            parts.append((text[start:i], start))
            start = i + 1
    parts.append((text[start:], start))
    return parts


def parse_coordinate(text: str):
    """One coordinate: a Fraction or a ComputableReal."""
    return _CoordParser(text).parse()


def parse_vector(text: str) -> list:
    out = []
    for piece, start in _split_top(text):
        if not piece.strip():
            raise InputError("empty coordinate", text, start)
        try:
            out.append(parse_coordinate(piece))
        except InputError as e:
            col = (e.column or 0) + start
            raise InputError(e.base_message, text, col) from None
    return out


def parse_weight(text: str) -> Weight:
    entries = []
    for piece, start in _split_top(text):
        s = piece.strip()
        try:
            entries.append(Fraction(s))
        except (ValueError, ZeroDivisionError):
            raise InputError("malformed rational in weight", text, start + (len(piece) - len(piece.lstrip()))) from None
    try:
        return Weight(tuple(entries))
    except (ValueError, DomainError) as e:
        raise InputError(f"invalid weight: {e}", text, 0) from None


_GRID = re.compile(r"\s*grid\(\s*([^)]*)\)\s*$")


def parse_weight_set(text: str, d: int | None = None) -> WeightSet:
    """Inline weights separated by ``;``, ``grid(mesh)``, or ``@path`` to a line-per-weight file."""
    m = _GRID.match(text)
    if m:
        if d is None:
            raise InputError("grid(mesh) needs the dimension of x", text, 0)
        try:
            mesh = Fraction(m.group(1).strip())
        except (ValueError, ZeroDivisionError):
            raise InputError("malformed mesh", text, m.start(1)) from None
        try:
            return WeightSet.grid(d, mesh)
        except (ValueError, DomainError) as e:
            raise InputError(str(e), text, m.start(1)) from None
    if text.startswith("@"):
        return read_weight_file(text[1:])
    weights = []
    for piece, start in _split_top(text, ";"):
        if piece.strip():
            try:
                weights.append(parse_weight(piece))
            except InputError as e:
                raise InputError(e.base_message, text, start + (e.column or 0)) from None
    if not weights:
        raise InputError("empty weight set", text, 0)
    try:
        return WeightSet(tuple(weights))
    except (ValueError, DimensionMismatch, DomainError) as e:
        raise InputError(str(e), text, 0) from None


def read_weight_file(path: str) -> WeightSet:
    weights = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise InputError(f"cannot read weight file: {e}") from None
    for lineno, line in enumerate(lines, 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        try:
            weights.append(parse_weight(s))
        except InputError as e:
            raise InputError(f"{path}:{lineno}: {e.base_message}", s, e.column or 0) from None
    if not weights:
        raise InputError(f"{path}: no weights")
    return WeightSet(tuple(weights))


def parse_int_matrix(text: str) -> list[list[int]]:
    """Rows separated by ``;``, entries by ``,``."""
    rows = []
    for piece, start in _split_top(text, ";"):
        row = []
        for cell, c0 in _split_top(piece, ","):
            try:
                row.append(int(cell.strip()))
            except ValueError:
                raise InputError("malformed integer", text, start + c0) from None
        rows.append(row)
    return rows


def parse_rational_matrix(text: str) -> list[list[Fraction]]:
    rows = []
    for piece, start in _split_top(text, ";"):
        row = []
        for cell, c0 in _split_top(piece, ","):
            try:
                row.append(Fraction(cell.strip()))
            except (ValueError, ZeroDivisionError):
                raise InputError("malformed rational", text, start + c0) from None
        rows.append(row)
    return rows


_MONO = re.compile(r"s(\d*)(?:\^(\d+))?$")


def parse_polynomial(text: str, params: int) -> dict[tuple[int, ...], Fraction]:
    """``{exponents: coefficient}`` from text such as ``1/3 + 2*s^2 - s1*s2``."""
    out: dict[tuple[int, ...], Fraction] = {}
    s = text.replace(" ", "")
    if not s:
        raise InputError("empty polynomial", text, 0)
    pos = 0
    for m in re.finditer(r"([+-]?)([^+-]+)", s):
        sign = -1 if m.group(1) == "-" else 1
        coef = Fraction(sign)
        exps = [0] * params
        for factor in m.group(2).split("*"):
            mono = _MONO.match(factor)
            if mono:
                idx = int(mono.group(1) or 1) - 1
                if not 0 <= idx < params:
                    raise InputError(f"parameter index out of range (have {params})", text, m.start(2))
                exps[idx] += int(mono.group(2) or 1)
            else:
                try:
                    coef *= Fraction(factor)
                except (ValueError, ZeroDivisionError):
                    raise InputError(f"malformed factor {factor!r}", text, m.start(2)) from None
        key = tuple(exps)
        out[key] = out.get(key, Fraction(0)) + coef
        pos = m.end()
    if pos != len(s):
        raise InputError("trailing characters in polynomial", text, pos)
    return out


# --------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    precision_bits: int = DEFAULT_PRECISION
    Q_max: int = 10**5
    t_max: float = 12.0
    t_step: float = 0.25
    window: float = 0.5
    weights_source: str | None = None
    seed: int = 0
    output_format: str = "json"

    _KEYS = {
        "precision": ("precision_bits", int),
        "precision_bits": ("precision_bits", int),
        "Qmax": ("Q_max", int),
        "Q_max": ("Q_max", int),
        "tmax": ("t_max", float),
        "t_max": ("t_max", float),
        "tstep": ("t_step", float),
        "t_step": ("t_step", float),
        "window": ("window", float),
        "W": ("weights_source", str),
        "weights": ("weights_source", str),
        "seed": ("seed", int),
        "format": ("output_format", str),
    }

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        cfg = cls()
        try:
            lines = Path(path).read_text().splitlines()
        except OSError as e:
            raise InputError(f"cannot read config file: {e}") from None
        for lineno, line in enumerate(lines, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise InputError(f"{path}:{lineno}: expected key=value", s, 0)
            key, value = (p.strip() for p in s.split("=", 1))
            cfg.set(key, value, where=f"{path}:{lineno}")
        return cfg

    def set(self, key: str, value, where: str = "config"):
        if key not in self._KEYS:
            raise InputError(f"{where}: unknown key {key!r}", key, 0)
        attr, typ = self._KEYS[key]
        try:
            if typ is int and isinstance(value, str):
                value = int(float(value)) if re.fullmatch(r"\d+(\.0*)?([eE]\+?\d+)?", value) else int(value)
            else:
                value = typ(value)
        except ValueError:
            raise InputError(f"{where}: bad value for {key}", str(value), 0) from None
        if attr == "output_format" and value not in ("json", "csv"):
            raise InputError(f"{where}: format must be json or csv", value, 0)
        setattr(self, attr, value)

    def as_dict(self):
        return {k: v for k, v in asdict(self).items()}


# --------------------------------------------------------------------------
# documents


def _clean(v):
    """JSON-safe primary payload: exact values as strings, mp numbers with 17 digits."""
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, mpmath.mpf):
        return mpmath.nstr(v, 17)
    if isinstance(v, float):
        if v != v or v in (float("inf"), float("-inf")):
            return str(v)
        return float(repr(v))
    if isinstance(v, ComputableReal):
        return v.describe()
    return v


def make_document(kind: str, config: RunConfig, inputs: dict, result: dict, status: str = "ok") -> dict:
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": kind,
        "status": status,
        "config": _clean(config.as_dict()),
        "inputs": _clean(inputs),
        "result": _clean(result),
        "metadata": {"created": datetime.now(timezone.utc).isoformat(timespec="seconds")},
    }


def primary_bytes(doc: dict) -> bytes:
    """Canonical bytes of everything except the metadata envelope."""
    body = {k: v for k, v in doc.items() if k != "metadata"}
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode()


def dump_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_document(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"not a JSON document: {e.msg}", None, None) from None
    if doc.get("format") != FORMAT_NAME:
        raise InputError("not a wdiophantine report")
    if doc.get("version") != FORMAT_VERSION:
        raise InputError(f"unsupported report version {doc.get('version')}")
    return doc


def dump_csv(columns: dict[str, list], order: list[str]) -> str:
    """Columnar CSV with a fixed column order."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(order)
    n = max((len(columns[c]) for c in order), default=0)
    for i in range(n):
        writer.writerow([_csv_cell(columns[c][i]) for c in order])
    return buf.getvalue()


def _csv_cell(v):
    v = _clean(v)
    if isinstance(v, list):
        return " ".join(str(x) for x in v)
    return v
