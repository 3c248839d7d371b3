"""Integer self-similar IFS: validation, basic cells, coding matrices.

A system is a family of M contractions x -> x/L + t_i on R^d with integer
base L >= 2 and nonnegative integer translation vectors t_i.  The attractor
decomposes over "basic cells", the L-adic cubes [b*L, (b+1)*L]^d that carry
natural measure; for each base-L digit vector theta there is an N x N
counting matrix B_theta whose (U, V) entry is the number of maps sending
basic cell V onto the theta-digit subcell of basic cell U.  Everything
downstream (growth brackets, branching processes, interior certificates)
consumes these matrices.

Basic cells are found as the forward closure of the zero cell under
b -> floor((b + t_k)/L).  The zero cell always carries mass (t_0 = 0 pins
the fixed point 0 there) and the closure stays inside the box
[0, h/(L-1) - 1]^d, so the search terminates unconditionally.  The depth-n
coverage statistics in `branching` give an independent cross-check at p = 1.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConsistencyError, ValidationError

Vector = tuple[int, ...]

# Entry-magnitude ceiling below which int64 products are provably exact.
_INT64_SAFE = 2**62


def _as_vectors(dimension: int, translations: Sequence) -> list[Vector]:
    out: list[Vector] = []
    for t in translations:
        if isinstance(t, (int, np.integer)):
            vec = (int(t),)
        else:
            vec = tuple(int(x) for x in t)
        if len(vec) != dimension:
            raise ValidationError(
                f"translation {vec} has {len(vec)} coordinates, expected {dimension}",
                code="dimension",
            )
        out.append(vec)
    return out


@dataclass(frozen=True)
class IfsSpec:
    """A validated integer self-similar IFS."""

    d: int
    L: int
    translations: tuple[Vector, ...]
    name: str = ""

    @property
    def M(self) -> int:
        return len(self.translations)

    @property
    def n_digits(self) -> int:
        return self.L**self.d

    @property
    def h(self) -> int:
        """Common per-coordinate maximum of the translations."""
        return max(t[0] for t in self.translations) if self.d == 1 else max(
            max(t[j] for t in self.translations) for j in range(self.d)
        )


def validate_ifs(
    dimension: int, base: int, translations: Sequence, name: str = ""
) -> IfsSpec:
    """Validate raw integers into an IfsSpec or reject with a coded error.

    For d = 1 the translations are sorted and must start at 0 with the last
    one divisible by L - 1.  For d >= 2 the given order is kept and every
    coordinate must range from 0 to a common maximum h divisible by L - 1.
    """
    if dimension < 1:
        raise ValidationError(f"dimension must be >= 1, got {dimension}", code="dimension")
    if base < 2:
        raise ValidationError(f"base must be >= 2, got {base}", code="base-too-small")
    vecs = _as_vectors(dimension, translations)
    if len(vecs) < 2:
        raise ValidationError(
            f"need at least 2 maps, got {len(vecs)}", code="too-few-maps"
        )
    for vec in vecs:
        if any(x < 0 for x in vec):
            raise ValidationError(
                f"translation {vec} has a negative component", code="negative-translation"
            )
    if dimension == 1:
        vecs.sort()
        if vecs[0][0] != 0:
            raise ValidationError(
                f"smallest translation must be 0, got {vecs[0][0]}",
                code="first-translation",
            )
        last = vecs[-1][0]
        if last % (base - 1) != 0:
            raise ValidationError(
                f"largest translation {last} is not divisible by L-1 = {base - 1}",
                code="divisibility",
            )
    else:
        maxes = [max(v[j] for v in vecs) for j in range(dimension)]
        mins = [min(v[j] for v in vecs) for j in range(dimension)]
        h = maxes[0]
        if any(m != 0 for m in mins) or any(mx != h for mx in maxes):
            raise ValidationError(
                f"coordinates must range from 0 to a common maximum, "
                f"got mins {mins} and maxes {maxes}",
                code="coordinate-range",
            )
        if h % (base - 1) != 0:
            raise ValidationError(
                f"coordinate maximum {h} is not divisible by L-1 = {base - 1}",
                code="divisibility",
            )
    return IfsSpec(d=dimension, L=base, translations=tuple(vecs), name=name)


@dataclass(frozen=True)
class BasicCells:
    """The L-adic cells [b*L, (b+1)*L]^d carrying natural measure."""

    cells: tuple[Vector, ...]
    _index: dict[Vector, int] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self) -> None:
        self._index.update({b: i for i, b in enumerate(self.cells)})

    @property
    def N(self) -> int:
        return len(self.cells)

    def index(self, b: Vector) -> int:
        return self._index[b]


def cell_step(spec: IfsSpec, b: Vector, k: int) -> tuple[Vector, int]:
    """Apply map k to cell b: return the target cell and the packed digit.

    S_k(J^(b)) is the digit-delta subcell of J^(b') where b' and delta come
    from u = b + t_k via b' = floor(u/L), delta = u mod L, with the digit
    vector packed base L, coordinate 0 most significant.
    """
    L = spec.L
    t = spec.translations[k]
    nxt = []
    packed = 0
    for j in range(spec.d):
        u = b[j] + t[j]
        nxt.append(u // L)
        packed = packed * L + (u % L)
    return tuple(nxt), packed


def basic_cells(spec: IfsSpec) -> BasicCells:
    """Forward closure of the zero cell under b -> floor((b + t_k)/L)."""
    zero = (0,) * spec.d
    seen = {zero}
    queue = deque([zero])
    while queue:
        b = queue.popleft()
        for k in range(spec.M):
            nxt, _ = cell_step(spec, b, k)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    cells = tuple(sorted(seen))
    bound = spec.h // (spec.L - 1) - 1
    for b in cells:
        if any(x < 0 or x > bound for x in b):
            raise ConsistencyError(f"cell {b} escaped the bounding box [0, {bound}]^d")
    return BasicCells(cells=cells)


@dataclass(frozen=True)
class CodingFamily:
    """The L^d coding matrices of a system, indexed by packed digit.

    ``matrices[theta]`` is an N x N nonnegative integer array; entry (U, V)
    counts the maps sending basic cell V onto the theta-subcell of basic
    cell U.  Synthetic families (built from raw matrices, no originating
    system) have ``spec`` and ``basics`` set to None.
    """

    matrices: tuple[np.ndarray, ...]
    spec: IfsSpec | None = None
    basics: BasicCells | None = None
    name: str = ""

    @property
    def n_digits(self) -> int:
        return len(self.matrices)

    @property
    def N(self) -> int:
        return int(self.matrices[0].shape[0])

    def check_column_mass(self) -> None:
        """Every source cell receives exactly one unit per map."""
        if self.spec is None:
            return
        total = sum(m.sum(axis=0) for m in self.matrices)
        if not np.all(total == self.spec.M):
            raise ConsistencyError(
                f"column mass {total.tolist()} != M = {self.spec.M}"
            )


def coding_matrices(spec: IfsSpec) -> CodingFamily:
    """Construct the coding-matrix family of a validated system."""
    basics = basic_cells(spec)
    N = basics.N
    mats = [np.zeros((N, N), dtype=np.int64) for _ in range(spec.n_digits)]
    for V, b in enumerate(basics.cells):
        for k in range(spec.M):
            target, digit = cell_step(spec, b, k)
            try:
                U = basics.index(target)
            except KeyError:
                raise ConsistencyError(
                    f"map {k} sends cell {b} to non-basic cell {target}"
                ) from None
            mats[digit][U, V] += 1
    for m in mats:
        m.setflags(write=False)
    family = CodingFamily(
        matrices=tuple(mats), spec=spec, basics=basics, name=spec.name
    )
    family.check_column_mass()
    return family


def family_from_matrices(
    matrices: Sequence, name: str = ""
) -> CodingFamily:
    """Wrap raw nonnegative square matrices as a synthetic family.

    Used for single-matrix systems and for scaled families in tests; no
    originating system, so the column-mass identity is not enforced.
    """
    mats = []
    shape = None
    for m in matrices:
        arr = np.asarray(m)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"matrix {arr!r} is not square", code="matrix-shape")
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise ValidationError("matrices differ in shape", code="matrix-shape")
        if np.any(arr < 0):
            raise ValidationError("matrix has a negative entry", code="matrix-negative")
        arr = arr.copy()
        arr.setflags(write=False)
        mats.append(arr)
    if not mats:
        raise ValidationError("need at least one matrix", code="too-few-maps")
    return CodingFamily(matrices=tuple(mats), name=name)


def _check_digits(family: CodingFamily, word: Sequence[int]) -> tuple[int, ...]:
    digits = tuple(int(x) for x in word)
    for x in digits:
        if not 0 <= x < family.n_digits:
            raise ValidationError(
                f"digit {x} out of range [0, {family.n_digits})", code="digit-range"
            )
    return digits


def _product_dtype(family: CodingFamily, length: int):
    """int64 when entry growth is provably safe, else exact object dtype."""
    top = max(int(m.sum()) for m in family.matrices)
    if top == 0 or length == 0:
        return np.int64
    return np.int64 if top**length < _INT64_SAFE else object


def word_product(family: CodingFamily, word: Sequence[int]) -> np.ndarray:
    """Product B_w1 * ... * B_wn of coding matrices; empty word -> identity."""
    digits = _check_digits(family, word)
    dtype = _product_dtype(family, len(digits))
    out = np.eye(family.N, dtype=dtype)
    for x in digits:
        out = out @ family.matrices[x].astype(dtype, copy=False)
    return out


def iter_word_products(
    family: CodingFamily, length: int
) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
    """Yield (word, product) for every word of the given length, in
    lexicographic order, reusing prefix products depth-first."""
    dtype = _product_dtype(family, length)
    mats = [m.astype(dtype, copy=False) for m in family.matrices]
    word: list[int] = []

    def rec(prefix: np.ndarray) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        if len(word) == length:
            yield tuple(word), prefix
            return
        for digit, mat in enumerate(mats):
            word.append(digit)
            yield from rec(prefix @ mat)
            word.pop()

    yield from rec(np.eye(family.N, dtype=dtype))


@dataclass(frozen=True)
class GoodnessCertificate:
    """Allowability per digit plus a strictly positive product witness."""

    allowable: tuple[bool, ...]
    positive_word: tuple[int, ...] | None
    max_length_searched: int

    @property
    def good(self) -> bool:
        return all(self.allowable) and self.positive_word is not None


def is_allowable(matrix: np.ndarray) -> bool:
    """Every row and every column contains a strictly positive entry."""
    pos = matrix > 0
    return bool(pos.any(axis=0).all() and pos.any(axis=1).all())


def goodness_check(family: CodingFamily, max_len: int) -> GoodnessCertificate:
    """Exact allowability per matrix plus a breadth-first search (on
    zero/nonzero patterns only) for a strictly positive product."""
    if max_len < 1:
        raise ValidationError(f"max_len must be >= 1, got {max_len}", code="max-len")
    allowable = tuple(is_allowable(m) for m in family.matrices)
    patterns = [(m > 0).astype(np.int8) for m in family.matrices]
    positive: tuple[int, ...] | None = None
    seen: set[bytes] = set()
    queue: deque[tuple[tuple[int, ...], np.ndarray]] = deque()
    for digit, pat in enumerate(patterns):
        queue.append(((digit,), pat))
    while queue:
        word, pat = queue.popleft()
        if pat.all():
            positive = word
            break
        key = pat.tobytes()
        if key in seen or len(word) >= max_len:
            continue
        seen.add(key)
        for digit, dpat in enumerate(patterns):
            queue.append((word + (digit,), ((pat @ dpat) > 0).astype(np.int8)))
    return GoodnessCertificate(
        allowable=allowable, positive_word=positive, max_length_searched=max_len
    )
