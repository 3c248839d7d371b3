"""Bitmap renders of level-n approximations.

1-D systems render as a horizontal barcode (covered cells black on white);
2-D systems as a bitmap in grid orientation (row 0 is the top, so the
y coordinate is flipped).  Two sources:

  * a percolation realization, binary coverage at a chosen level;
  * the deterministic full tree, where gray encodes cylinder multiplicity
    (the number of map words landing on each cell: darker = more).

Output is binary PGM (P5) or PPM (P6) with the exact header
``P5\\n{width} {height}\\n255\\n`` followed by the raster, so files are
reproducible byte for byte.
"""

from __future__ import annotations

from .branching import Realization, covered_positions
from .errors import BudgetError, ValidationError
from .ifs import CodingFamily, IfsSpec

_PIXEL_BUDGET = 1 << 24
_BARCODE_HEIGHT = 32


def _spans(spec: IfsSpec, level: int) -> tuple[int, ...]:
    """Per-coordinate number of level-`level` grid cells the attractor
    hull occupies: positions run 0 .. max_t * (L^n - 1) / (L - 1)."""
    geom = (spec.L**level - 1) // (spec.L - 1)
    return tuple(
        max(t[j] for t in spec.translations) * geom + 1 for j in range(spec.d)
    )


def _check_budget(spans: tuple[int, ...]) -> None:
    pixels = 1
    for s in spans:
        pixels *= s
    if pixels > _PIXEL_BUDGET:
        raise BudgetError(
            f"render needs {pixels} pixels, budget is {_PIXEL_BUDGET}",
            required=f"pixels <= {_PIXEL_BUDGET}; lower the level",
        )


def _emit(gray_rows: list[bytes], width: int, fmt: str) -> bytes:
    height = len(gray_rows)
    if fmt == "pgm":
        return b"P5\n%d %d\n255\n" % (width, height) + b"".join(gray_rows)
    if fmt == "ppm":
        rgb = bytearray()
        for row in gray_rows:
            for value in row:
                rgb += bytes((value, value, value))
        return b"P6\n%d %d\n255\n" % (width, height) + bytes(rgb)
    raise ValidationError(f"unknown image format {fmt!r}", code="format")


def _grid_to_image(
    values: dict[tuple[int, ...], int],
    spans: tuple[int, ...],
    max_value: int,
    fmt: str,
) -> bytes:
    """Map cell values to gray (0 hits = white 255, max = black 0)."""
    if len(spans) == 1:
        width = spans[0]
        row = bytearray(b"\xff" * width)
        for pos, count in values.items():
            row[pos[0]] = 255 - (255 * count) // max_value
        return _emit([bytes(row)] * _BARCODE_HEIGHT, width, fmt)
    width, height = spans[0], spans[1]
    rows = [bytearray(b"\xff" * width) for _ in range(height)]
    for pos, count in values.items():
        x, y = pos[0], pos[1]
        rows[height - 1 - y][x] = 255 - (255 * count) // max_value
    return _emit([bytes(r) for r in rows], width, fmt)


def render_coverage(realization: Realization, level: int, fmt: str = "pgm") -> bytes:
    """Binary coverage of a realization at the given level: covered cells
    black, everything else white."""
    if not 0 <= level <= realization.depth:
        raise ValidationError(
            f"level must be in 0..{realization.depth}", code="level"
        )
    spec = realization.spec
    if spec.d > 2:
        raise ValidationError("renders support 1-D and 2-D systems", code="dimension")
    spans = _spans(spec, level)
    _check_budget(spans)
    covered = {pos: 1 for pos in covered_positions(realization, level)}
    return _grid_to_image(covered, spans, 1, fmt)


def render_multiplicity(family: CodingFamily, level: int, fmt: str = "pgm") -> bytes:
    """Deterministic full-tree render: gray level encodes how many length-
    `level` map words land on each grid cell, darker for more."""
    if family.spec is None:
        raise ValidationError(
            "multiplicity render needs a family built from a system",
            code="spec-mismatch",
        )
    if level < 0:
        raise ValidationError("level must be >= 0", code="level")
    spec = family.spec
    if spec.d > 2:
        raise ValidationError("renders support 1-D and 2-D systems", code="dimension")
    spans = _spans(spec, level)
    _check_budget(spans)
    counts: dict[tuple[int, ...], int] = {(0,) * spec.d: 1}
    for _ in range(level):
        nxt: dict[tuple[int, ...], int] = {}
        for pos, count in counts.items():
            for t in spec.translations:
                child = tuple(pos[j] * spec.L + t[j] for j in range(spec.d))
                nxt[child] = nxt.get(child, 0) + count
        counts = nxt
    return _grid_to_image(counts, spans, max(counts.values()), fmt)


def multiplicity_counts(family: CodingFamily, level: int) -> dict[tuple[int, ...], int]:
    """The exact per-cell word counts behind render_multiplicity (exposed
    for cross-checks against coding-matrix products)."""
    if family.spec is None:
        raise ValidationError(
            "multiplicity counts need a family built from a system",
            code="spec-mismatch",
        )
    spec = family.spec
    counts: dict[tuple[int, ...], int] = {(0,) * spec.d: 1}
    for _ in range(level):
        nxt: dict[tuple[int, ...], int] = {}
        for pos, count in counts.items():
            for t in spec.translations:
                child = tuple(pos[j] * spec.L + t[j] for j in range(spec.d))
                nxt[child] = nxt.get(child, 0) + count
        counts = nxt
    return counts
