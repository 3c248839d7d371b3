"""Interior-existence certificates via vector dominance.

The random set contains an interval (almost surely on survival) once two
finite checks succeed for a set of test vectors U:

1. some row of some word product dominates a member of U componentwise (the
   seeding condition: one retained cylinder carries at least u* offspring
   mass of each type), together with the geometric assumption that the
   deterministic attractor meets that cylinder's interior; and
2. mass propagates: for every digit word of a fixed length S, each u in U
   pushed through the word product dominates gamma times some member of U,
   with gamma > 1 after the probability scaling p^S.

The propagation constant c(S) = min over words, min over u, max over v of
the exact rational min_j (u^T B_w)_j / v_j is supermultiplicative, and the
derived threshold is p_hat = c(S)^(-1/S) minimized over S.  All comparisons
are arbitrary-precision integer or rational arithmetic; no floating point
enters any decision, and the reported float p_hat is rounded up one ulp so
the claim "p > p_hat implies interior" stays on the safe side.

The all-ones test vector reduces c(S) to the minimal column sum of word
products, giving the cheap sufficient check `colsum_interior_threshold`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .ifs import CodingFamily

Vector = tuple[int, ...]
IntMatrix = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class VectorFamily:
    """Nonzero nonnegative integer test vectors, all of the same length."""

    vectors: tuple[Vector, ...]

    def __post_init__(self) -> None:
        if not self.vectors:
            raise ValidationError("need at least one test vector", code="empty-uset")
        width = len(self.vectors[0])
        for v in self.vectors:
            if len(v) != width:
                raise ValidationError(
                    "test vectors must all have the same length", code="uset-width"
                )
            if any(not isinstance(x, int) or x < 0 for x in v):
                raise ValidationError(
                    f"test vectors must be nonnegative integers, got {v}",
                    code="uset-negative",
                )
            if not any(v):
                raise ValidationError("zero test vector not allowed", code="uset-zero")

    @property
    def N(self) -> int:
        return len(self.vectors[0])

    @property
    def size(self) -> int:
        return len(self.vectors)

    @classmethod
    def of(cls, *vectors: Sequence[int]) -> "VectorFamily":
        return cls(tuple(tuple(int(x) for x in v) for v in vectors))


def binary_candidates(N: int, max_ones: int = 2) -> tuple[Vector, ...]:
    """All 0/1 vectors of length N with 1..max_ones ones, in lexicographic
    position order; a heuristic candidate pool for test-vector search."""
    out: list[Vector] = []
    for k in range(1, min(max_ones, N) + 1):
        for ones in combinations(range(N), k):
            v = [0] * N
            for i in ones:
                v[i] = 1
            out.append(tuple(v))
    return tuple(out)


def _int_mats(family: CodingFamily) -> list[IntMatrix]:
    mats = []
    for m in family.matrices:
        arr = np.asarray(m)
        if arr.dtype.kind not in "iu" and arr.dtype != object:
            raise ValidationError(
                "interior checks need exact integer matrices", code="not-integer"
            )
        mats.append(tuple(tuple(int(x) for x in row) for row in arr))
    return mats


def _identity(n: int) -> IntMatrix:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def _mat_mul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    n = len(a)
    cols = range(len(b[0]))
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in cols) for i in range(n)
    )


def _walk(
    mats: Sequence[IntMatrix], max_depth: int
) -> Iterator[tuple[tuple[int, ...], IntMatrix]]:
    """Lexicographic depth-first walk yielding (word, exact product) for
    every word of length 1..max_depth."""
    n = len(mats[0])

    def rec(word: tuple[int, ...], prod: IntMatrix):
        for digit, m in enumerate(mats):
            nxt = _mat_mul(prod, m) if word else m
            grown = word + (digit,)
            yield grown, nxt
            if len(grown) < max_depth:
                yield from rec(grown, nxt)

    yield from rec((), _identity(n))


def _row_times(u: Vector, mat: IntMatrix) -> Vector:
    n = len(u)
    return tuple(sum(u[i] * mat[i][j] for i in range(n)) for j in range(len(mat[0])))


def _best_ratio(x: Vector, vectors: Sequence[Vector]) -> tuple[Fraction, int]:
    """max over v of min over coordinates j with v_j > 0 of x_j / v_j,
    with the index of a maximizing v."""
    best = Fraction(-1)
    best_idx = 0
    for idx, v in enumerate(vectors):
        ratio = min(Fraction(x[j], v[j]) for j in range(len(v)) if v[j])
        if ratio > best:
            best, best_idx = ratio, idx
    return best, best_idx


@dataclass(frozen=True)
class RowDominationWitness:
    """A word product with a row that dominates a test vector: row `row` of
    the product over `word` is componentwise >= `vector`.  The geometric
    side condition (the deterministic attractor reaches the interior of the
    witness cylinder) is recorded as an assumption, not computed."""

    row: int
    word: tuple[int, ...]
    vector: Vector
    attractor_interior_assumed: bool = True


def row_domination_witness(
    family: CodingFamily, uset: VectorFamily, max_len: int
) -> RowDominationWitness | None:
    """Breadth-first search (by word length, then lexicographic, then row,
    then test-vector order) for a dominating row.  None means exhaustion up
    to max_len, which refutes nothing."""
    if max_len < 1:
        raise ValidationError("max_len must be >= 1", code="word-length")
    if uset.N != family.N:
        raise ValidationError(
            f"test vectors have length {uset.N}, family needs {family.N}",
            code="uset-width",
        )
    mats = _int_mats(family)
    for length in range(1, max_len + 1):
        for word, prod in _walk(mats, length):
            if len(word) != length:
                continue
            for row_idx, row in enumerate(prod):
                for u in uset.vectors:
                    if all(row[j] >= u[j] for j in range(len(u))):
                        return RowDominationWitness(
                            row=row_idx, word=word, vector=u
                        )
    return None


def dominance_constant(
    family: CodingFamily, uset: VectorFamily, S: int
) -> Fraction:
    """The exact propagation constant c(S): min over length-S words and
    u in the family of the best dominated multiple of a test vector in
    u^T B_w.  c(0) = 1 (empty product, u dominates itself)."""
    if S < 0:
        raise ValidationError("word length must be >= 0", code="word-length")
    if uset.N != family.N:
        raise ValidationError(
            f"test vectors have length {uset.N}, family needs {family.N}",
            code="uset-width",
        )
    if S == 0:
        return Fraction(1)
    mats = _int_mats(family)
    best: Fraction | None = None
    for word, prod in _walk(mats, S):
        if len(word) != S:
            continue
        for u in uset.vectors:
            ratio, _ = _best_ratio(_row_times(u, prod), uset.vectors)
            if best is None or ratio < best:
                best = ratio
                if best == 0:
                    return Fraction(0)
    assert best is not None
    return best


@dataclass(frozen=True)
class DominanceMatrices:
    """Transfer matrices certifying mass propagation at scale (S, p): for
    the lex-rank-i word w, matrices[i] is a nonnegative rational matrix A
    with row sums > 1 such that stacking the test vectors as rows U gives
    U * (p^S B_w) >= A U componentwise."""

    S: int
    p: Fraction
    gamma_prime: Fraction
    matrices: tuple[tuple[tuple[Fraction, ...], ...], ...]


def dominance_matrices(
    family: CodingFamily, uset: VectorFamily, S: int, p: float | Fraction
) -> DominanceMatrices | None:
    """Build per-word transfer matrices greedily (fixed lexicographic order
    over test vectors, with a best-single-vector fallback per row) and
    return them iff every row sum exceeds 1.  None means this (S, p) did
    not certify; it refutes nothing."""
    if S < 1:
        raise ValidationError("word length must be >= 1", code="word-length")
    p = Fraction(p)
    if not 0 < p <= 1:
        raise ValidationError(f"probability must be in (0, 1], got {p}", code="prob")
    mats = _int_mats(family)
    scale = p**S
    vectors = uset.vectors
    out: list[tuple[tuple[Fraction, ...], ...]] = []
    gamma_prime: Fraction | None = None
    for word, prod in _walk(mats, S):
        if len(word) != S:
            continue
        rows: list[tuple[Fraction, ...]] = []
        for u in vectors:
            x = _row_times(u, prod)
            remaining = [scale * xi for xi in x]
            coeffs = [Fraction(0)] * len(vectors)
            for idx, v in enumerate(vectors):
                t = min(remaining[j] / v[j] for j in range(len(v)) if v[j])
                if t > 0:
                    coeffs[idx] = t
                    for j in range(len(v)):
                        remaining[j] -= t * v[j]
            ratio, best_idx = _best_ratio(x, vectors)
            single = scale * ratio
            if sum(coeffs) < single:
                coeffs = [Fraction(0)] * len(vectors)
                coeffs[best_idx] = single
            rows.append(tuple(coeffs))
            row_sum = sum(coeffs)
            if gamma_prime is None or row_sum < gamma_prime:
                gamma_prime = row_sum
        out.append(tuple(rows))
    assert gamma_prime is not None
    if gamma_prime <= 1:
        return None
    return DominanceMatrices(
        S=S, p=p, gamma_prime=gamma_prime, matrices=tuple(out)
    )


@dataclass(frozen=True)
class InteriorCertificate:
    """Everything needed to replay the interior-existence argument.

    gamma = c(S) as an exact rational > 1; p_hat = gamma^(-1/S) rounded up;
    witness_map[i][k] is the index of the test vector dominated by test
    vector k pushed through the lex-rank-i word of length S (certifying
    c(S) >= gamma); binding_word achieves the minimum (certifying
    c(S) <= gamma).  condition1 carries the seeding witness when one was
    found within the search budget.
    """

    uset: VectorFamily
    S: int
    gamma: Fraction
    p_hat: float
    binding_word: tuple[int, ...]
    witness_map: tuple[tuple[int, ...], ...]
    condition1: RowDominationWitness | None


def _root_upper(gamma: Fraction, S: int) -> float:
    """float(gamma^(-1/S)), nudged up until the exact inequality
    p_hat^S * gamma >= 1 holds."""
    val = math.exp(-(math.log(gamma.numerator) - math.log(gamma.denominator)) / S)
    while Fraction(val) ** S * gamma < 1:
        val = math.nextafter(val, 2.0)
    return val


def interior_threshold(
    family: CodingFamily, uset: VectorFamily, max_S: int, threads: int = 1
) -> InteriorCertificate | None:
    """p_hat = min over 1 <= S <= max_S with c(S) > 1 of c(S)^(-1/S), with
    a replayable certificate; None when no S qualifies (refutes nothing:
    interior may still exist via other vectors or longer words)."""
    if max_S < 1:
        raise ValidationError("max_S must be >= 1", code="word-length")
    if uset.N != family.N:
        raise ValidationError(
            f"test vectors have length {uset.N}, family needs {family.N}",
            code="uset-width",
        )
    mats = _int_mats(family)
    vectors = uset.vectors
    # one walk computes c(S) for every S <= max_S
    c_of: dict[int, Fraction] = {}
    binding: dict[int, tuple[int, ...]] = {}
    for word, prod in _walk(mats, max_S):
        depth = len(word)
        for u in vectors:
            ratio, _ = _best_ratio(_row_times(u, prod), vectors)
            if depth not in c_of or ratio < c_of[depth]:
                c_of[depth] = ratio
                binding[depth] = word

    qualifying = [S for S in range(1, max_S + 1) if c_of[S] > 1]
    if not qualifying:
        return None
    # minimize gamma^(-1/S) exactly: compare gamma_a^Sb against gamma_b^Sa
    best_S = qualifying[0]
    for S in qualifying[1:]:
        if c_of[S] ** best_S > c_of[best_S] ** S:
            best_S = S
    gamma = c_of[best_S]

    # second walk at the chosen length records the dominated-vector choices
    witness_rows: list[tuple[int, ...]] = []
    for word, prod in _walk(mats, best_S):
        if len(word) != best_S:
            continue
        witness_rows.append(
            tuple(
                _best_ratio(_row_times(u, prod), vectors)[1] for u in vectors
            )
        )

    return InteriorCertificate(
        uset=uset,
        S=best_S,
        gamma=gamma,
        p_hat=_root_upper(gamma, best_S),
        binding_word=binding[best_S],
        witness_map=tuple(witness_rows),
        condition1=row_domination_witness(family, uset, max_S),
    )


def verify_interior(family: CodingFamily, cert: InteriorCertificate) -> bool:
    """Replay an interior certificate with exact arithmetic: each recorded
    vector choice must dominate at ratio >= gamma (so c(S) >= gamma), the
    binding word must achieve gamma (so c(S) <= gamma), gamma must exceed 1,
    p_hat^S * gamma must be >= 1, and any seeding witness must re-check."""
    mats = _int_mats(family)
    vectors = cert.uset.vectors
    if cert.uset.N != family.N or cert.gamma <= 1:
        return False
    if Fraction(cert.p_hat) ** cert.S * cert.gamma < 1:
        return False
    rank = 0
    binding_seen = False
    for word, prod in _walk(mats, cert.S):
        if len(word) != cert.S:
            continue
        if rank >= len(cert.witness_map):
            return False
        choices = cert.witness_map[rank]
        rank += 1
        for k, u in enumerate(vectors):
            x = _row_times(u, prod)
            v = vectors[choices[k]]
            ratio = min(Fraction(x[j], v[j]) for j in range(len(v)) if v[j])
            if ratio < cert.gamma:
                return False
        if word == cert.binding_word:
            binding_seen = True
            worst = min(
                _best_ratio(_row_times(u, prod), vectors)[0] for u in vectors
            )
            if worst != cert.gamma:
                return False
    if rank != len(cert.witness_map) or not binding_seen:
        return False
    w = cert.condition1
    if w is not None:
        prod = _identity(family.N)
        for digit in w.word:
            prod = _mat_mul(prod, mats[digit])
        row = prod[w.row]
        if not all(row[j] >= w.vector[j] for j in range(len(w.vector))):
            return False
    return True


@dataclass(frozen=True)
class ColsumThreshold:
    """The all-ones shortcut: if every length-m word product has minimal
    column sum b >= 2, mass propagates above p = b^(-1/m) with no test-
    vector search."""

    applies: bool
    threshold: float | None
    length: int | None
    min_col_sum: int | None


def colsum_interior_threshold(family: CodingFamily, max_len: int) -> ColsumThreshold:
    """Scan word lengths m <= max_len for min over words of min_col_sum > 1;
    report the best resulting threshold (exact integer comparisons across
    lengths: value_a^(1/a) vs value_b^(1/b) as value_a^b vs value_b^a)."""
    if max_len < 1:
        raise ValidationError("max_len must be >= 1", code="word-length")
    mats = _int_mats(family)
    per_depth: dict[int, int] = {}
    for word, prod in _walk(mats, max_len):
        depth = len(word)
        mcs = min(sum(prod[i][j] for i in range(len(prod))) for j in range(len(prod)))
        if depth not in per_depth or mcs < per_depth[depth]:
            per_depth[depth] = mcs
    best: tuple[int, int] | None = None  # (value, length)
    for length in range(1, max_len + 1):
        value = per_depth[length]
        if value < 2:
            continue
        if best is None or value**best[1] > best[0] ** length:
            best = (value, length)
    if best is None:
        return ColsumThreshold(
            applies=False, threshold=None, length=None, min_col_sum=None
        )
    value, length = best
    return ColsumThreshold(
        applies=True,
        threshold=_root_upper(Fraction(value), length),
        length=length,
        min_col_sum=value,
    )
