"""Built-in example systems.

Five validated systems plus one synthetic single-matrix family:

- ``carpet``: 1-D projection of the Sierpinski carpet, L = 3, eight maps
  with doubled translations, two basic cells.
- ``gasket``: 1-D projection of the right-angle gasket, L = 2, three maps,
  two basic cells; the classic positive-measure / empty-interior example.
- ``line4``: L = 2 with translations (0, 1, 2, 4); four basic cells and the
  smallest known family where the two-vector dominance certificate beats the
  plain column-sum one.
- ``overlap2d``: planar overlapping percolation, L = 2, the nine maps with
  translations {0, 1, 2}^2, four basic cells.
- ``interval2``: L = 2, translations (0, 1); one basic cell, full interval.
- ``doubling``: synthetic one-digit family {[2]} (not an IFS), handy because
  every growth quantity is exactly log 2 or 2.
"""

from __future__ import annotations

from itertools import product as _product

from .ifs import CodingFamily, IfsSpec, coding_matrices, family_from_matrices, validate_ifs


def carpet() -> IfsSpec:
    return validate_ifs(1, 3, (0, 1, 1, 2, 2, 3, 3, 4), name="carpet")


def gasket() -> IfsSpec:
    return validate_ifs(1, 2, (0, 1, 2), name="gasket")


def line4() -> IfsSpec:
    return validate_ifs(1, 2, (0, 1, 2, 4), name="line4")


def overlap2d() -> IfsSpec:
    return validate_ifs(
        2, 2, tuple(_product((0, 1, 2), repeat=2)), name="overlap2d"
    )


def interval2() -> IfsSpec:
    return validate_ifs(1, 2, (0, 1), name="interval2")


def doubling() -> CodingFamily:
    return family_from_matrices([[[2]]], name="doubling")


SPECS = {
    "carpet": carpet,
    "gasket": gasket,
    "line4": line4,
    "overlap2d": overlap2d,
    "interval2": interval2,
}


def example_spec(name: str) -> IfsSpec:
    try:
        return SPECS[name]()
    except KeyError:
        raise KeyError(f"unknown example {name!r}; known: {sorted(SPECS)}") from None


def example_family(name: str) -> CodingFamily:
    """Coding family of a named example; includes the synthetic ``doubling``."""
    if name == "doubling":
        return doubling()
    return coding_matrices(example_spec(name))


FAMILY_NAMES = sorted(SPECS) + ["doubling"]
