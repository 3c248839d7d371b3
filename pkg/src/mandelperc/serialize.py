"""Self-describing text documents: key = value sections plus embedded CSV
tables, written and parsed losslessly.

One flat format carries every structured output of the package (reports,
certificates, trajectories).  Scalars are typed by their spelling so a
parsed document reproduces the original Python values exactly:

    none | true | false
    integers        42, -7
    rationals       377/13  (exact, never reduced to float)
    floats          repr() spelling, round-trip exact
    strings         always double-quoted, backslash escapes

A document begins with a format line, then named blocks:

    mandelperc-document 1

    [section name]
    key = value

    [table name]
    col1,col2
    a,b
    [end]

Writers are deterministic: same data, same bytes.  No timestamps.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ValidationError

Scalar = Union[None, bool, int, float, str, Fraction]
Value = Union[Scalar, tuple]

_MAGIC = "mandelperc-document 1"
_INT_RE = re.compile(r"-?\d+$")
_FRACTION_RE = re.compile(r"-?\d+/\d+$")
_KEY_RE = re.compile(r"[A-Za-z0-9_.-]+$")
_NAME_RE = re.compile(r"[A-Za-z0-9_.: -]+$")


def encode_scalar(v: Scalar) -> str:
    if v is None:
        return "none"
    if isinstance(v, (bool, np.bool_)):
        return "true" if bool(v) else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    raise ValidationError(f"cannot encode {type(v).__name__}", code="encode")


def decode_scalar(text: str) -> Scalar:
    text = text.strip()
    if text == "none":
        return None
    if text == "true":
        return True
    if text == "false":
        return False
    if text.startswith('"'):
        if not text.endswith('"') or len(text) < 2:
            raise ValidationError(f"unterminated string: {text}", code="document")
        body = text[1:-1]
        out: list[str] = []
        i = 0
        while i < len(body):
            ch = body[i]
            if ch == "\\":
                if i + 1 >= len(body) or body[i + 1] not in '\\"':
                    raise ValidationError(f"bad escape in {text}", code="document")
                out.append(body[i + 1])
                i += 2
            else:
                out.append(ch)
                i += 1
        return "".join(out)
    if _INT_RE.match(text):
        return int(text)
    if _FRACTION_RE.match(text):
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    try:
        return float(text)
    except ValueError:
        raise ValidationError(f"cannot decode value: {text!r}", code="document")


def encode_value(v: Value) -> str:
    if isinstance(v, tuple):
        return "[" + ", ".join(encode_scalar(x) for x in v) + "]"
    return encode_scalar(v)


def _split_list(body: str) -> list[str]:
    """Split a [...] body on commas outside quotes."""
    parts: list[str] = []
    buf: list[str] = []
    in_str = False
    i = 0
    while i < len(body):
        ch = body[i]
        if in_str:
            buf.append(ch)
            if ch == "\\" and i + 1 < len(body):
                buf.append(body[i + 1])
                i += 1
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
            buf.append(ch)
        elif ch == ",":
            parts.append("".join(buf))
            buf = []
        else:
            buf.append(ch)
        i += 1
    if buf or parts:
        parts.append("".join(buf))
    return parts


def decode_value(text: str) -> Value:
    text = text.strip()
    if text.startswith("["):
        if not text.endswith("]"):
            raise ValidationError(f"unterminated list: {text}", code="document")
        body = text[1:-1].strip()
        if not body:
            return ()
        return tuple(decode_scalar(p) for p in _split_list(body))
    return decode_scalar(text)


@dataclass
class Section:
    name: str
    pairs: dict[str, Value] = field(default_factory=dict)

    def set(self, key: str, value: Value) -> "Section":
        if not _KEY_RE.match(key):
            raise ValidationError(f"bad key {key!r}", code="document")
        self.pairs[key] = value
        return self

    def get(self, key: str) -> Value:
        if key not in self.pairs:
            raise ValidationError(
                f"section [{self.name}] has no key {key!r}", code="document"
            )
        return self.pairs[key]

    def get_or(self, key: str, default: Value = None) -> Value:
        return self.pairs.get(key, default)


@dataclass
class Table:
    name: str
    header: tuple[str, ...]
    rows: list[tuple[str, ...]] = field(default_factory=list)

    def add(self, *cells: object) -> "Table":
        row = tuple(str(c) for c in cells)
        if len(row) != len(self.header):
            raise ValidationError(
                f"table {self.name}: row width {len(row)} != {len(self.header)}",
                code="document",
            )
        for cell in row:
            if any(ch in cell for ch in ',"\n'):
                raise ValidationError(
                    f"table cell may not contain commas, quotes, or newlines: {cell!r}",
                    code="document",
                )
        self.rows.append(row)
        return self


@dataclass
class Document:
    blocks: list[Union[Section, Table]] = field(default_factory=list)

    def add_section(self, name: str) -> Section:
        if not _NAME_RE.match(name):
            raise ValidationError(f"bad section name {name!r}", code="document")
        sec = Section(name)
        self.blocks.append(sec)
        return sec

    def add_table(self, name: str, header: Sequence[str]) -> Table:
        if not _NAME_RE.match(name):
            raise ValidationError(f"bad table name {name!r}", code="document")
        tab = Table(name, tuple(header))
        self.blocks.append(tab)
        return tab

    def sections(self, name: str) -> list[Section]:
        return [b for b in self.blocks if isinstance(b, Section) and b.name == name]

    def section(self, name: str) -> Section:
        found = self.sections(name)
        if not found:
            raise ValidationError(f"document has no section [{name}]", code="document")
        return found[0]

    def tables(self, name: str) -> list[Table]:
        return [b for b in self.blocks if isinstance(b, Table) and b.name == name]

    def table(self, name: str) -> Table:
        found = self.tables(name)
        if not found:
            raise ValidationError(f"document has no table [{name}]", code="document")
        return found[0]

    def has(self, name: str) -> bool:
        return any(
            b.name == name for b in self.blocks if isinstance(b, (Section, Table))
        )

    def to_text(self) -> str:
        out = [_MAGIC, ""]
        for block in self.blocks:
            if isinstance(block, Section):
                out.append(f"[{block.name}]")
                for key, value in block.pairs.items():
                    out.append(f"{key} = {encode_value(value)}")
            else:
                out.append(f"[table {block.name}]")
                out.append(",".join(block.header))
                for row in block.rows:
                    out.append(",".join(row))
                out.append("[end]")
            out.append("")
        return "\n".join(out)

    @classmethod
    def parse(cls, text: str) -> "Document":
        lines = text.splitlines()
        if not lines or lines[0].strip() != _MAGIC:
            raise ValidationError(
                "not a mandelperc document (missing format line)", code="document"
            )
        doc = cls()
        i = 1
        current: Section | None = None
        while i < len(lines):
            line = lines[i].rstrip()
            i += 1
            if not line:
                continue
            if line.startswith("[table "):
                if not line.endswith("]"):
                    raise ValidationError(f"line {i}: bad table header", code="document")
                name = line[len("[table ") : -1]
                if i >= len(lines):
                    raise ValidationError(f"line {i}: truncated table", code="document")
                header = tuple(lines[i].rstrip().split(","))
                i += 1
                tab = doc.add_table(name, header)
                while True:
                    if i >= len(lines):
                        raise ValidationError(
                            f"table {name} missing [end]", code="document"
                        )
                    row = lines[i].rstrip()
                    i += 1
                    if row == "[end]":
                        break
                    tab.add(*row.split(","))
                current = None
            elif line.startswith("["):
                if not line.endswith("]"):
                    raise ValidationError(
                        f"line {i}: bad section header {line!r}", code="document"
                    )
                current = doc.add_section(line[1:-1])
            else:
                if current is None:
                    raise ValidationError(
                        f"line {i}: key outside any section", code="document"
                    )
                if "=" not in line:
                    raise ValidationError(
                        f"line {i}: expected key = value, got {line!r}", code="document"
                    )
                key, _, raw = line.partition("=")
                current.set(key.strip(), decode_value(raw))
        return doc


def int_row(cells: Iterable[object]) -> tuple[str, ...]:
    return tuple(str(int(c)) for c in cells)
