"""Certified growth-rate brackets for coding-matrix families.

Two growth rates drive the phase diagram of the coin-tossing randomization:
the Lyapunov exponent lambda (almost-sure growth of random products under
i.i.d. uniform digits) and the lower spectral radius rho-check (minimal
growth over all digit words).  Both get certified two-sided brackets from
finite enumeration:

- lambda: the mean of log min-column-sum over words of length m is
  superadditive in m, so (1/m) * mean is a lower bound for every m; the mean
  of log entrywise-sum norm is subadditive, giving an upper bound.
- rho-check: (min over words of min-column-sum)^(1/m) is a lower bound by
  supermultiplicativity; min norm^(1/m) and min spectralRadius^(1/m) over
  single words are upper bounds.

Integer allowable matrices force rho-check >= 1, so an exact spectral-radius-1
witness collapses the rho-check bracket to the point 1; exact spectral radii
of integer matrices are certified combinatorially (strongly connected
components that are simple cycles), never by floating point.

All logs are taken of exact integer functionals; enumeration sums are reduced
in fixed lexicographic chunk order, so results do not depend on the worker
count.  The Monte-Carlo estimator uses the counter-based Philox generator and
records seed, stream, and renormalization cadence for bit reproducibility.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import ConsistencyError, ValidationError
from .ifs import CodingFamily, is_allowable

# Renormalization must keep entries far below overflow; 2^512 leaves room
# for one more unrenormalized multiplication in float64-of-big-int terms.
_MAGNITUDE_CAP_LOG2 = 512.0
_BLOCK_TABLE_LIMIT = 4096
_MIN_BATCHES = 32


def sum_norm(matrix) -> float:
    """Entrywise sum of a nonnegative matrix."""
    return np.asarray(matrix).sum().item()


def min_col_sum(matrix) -> float:
    """Minimum over columns of the column sum."""
    return np.asarray(matrix).sum(axis=0).min().item()


@dataclass(frozen=True)
class Bracket:
    """A certified interval [lo, hi] with provenance for each side."""

    lo: float
    hi: float
    lo_witness: str
    hi_witness: str
    exact: bool = False

    def __post_init__(self) -> None:
        if not self.lo <= self.hi:
            raise ConsistencyError(f"bracket lo {self.lo} > hi {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass(frozen=True)
class McEstimate:
    """A seeded Monte-Carlo estimate with batch-means standard error."""

    value: float
    std_error: float
    steps: int
    seed: int
    renorm_interval: int
    stream: int = 0


def _require_allowable(family: CodingFamily) -> None:
    for digit, m in enumerate(family.matrices):
        if not is_allowable(m):
            raise ValidationError(
                f"matrix for digit {digit} is not allowable "
                f"(a row or column is entirely zero)",
                code="not-allowable",
            )


def _float_mats(family: CodingFamily) -> list[np.ndarray]:
    return [m.astype(np.float64, copy=False) for m in family.matrices]


def fold_words(
    family: CodingFamily,
    length: int,
    make_acc: Callable[[], object],
    leaf: Callable[[object, np.ndarray], object],
    threads: int = 1,
    every_depth: bool = False,
):
    """Depth-first fold over all words of the given length (or all lengths
    up to it, with ``every_depth``), chunked by first digit.

    Returns the per-chunk accumulators in digit order.  Threads only change
    which worker computes a chunk; within a chunk the walk is sequential and
    lexicographic, so results are independent of the worker count.
    """
    mats = _float_mats(family)
    n = family.N

    def chunk(first: int):
        acc = make_acc()
        stack: list[tuple[np.ndarray, int]] = [(mats[first], 1)]
        while stack:
            prod, depth = stack.pop()
            if every_depth or depth == length:
                acc = leaf(acc, prod, depth) if every_depth else leaf(acc, prod)
            if depth < length:
                # push in reverse so digit 0 is processed first
                for digit in range(family.n_digits - 1, -1, -1):
                    stack.append((prod @ mats[digit], depth + 1))
        return acc

    digits = range(family.n_digits)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(chunk, digits))
    return [chunk(d) for d in digits]


def lyapunov_bracket(family: CodingFamily, m: int, threads: int = 1) -> Bracket:
    """Certified bracket for the Lyapunov exponent at word length m.

    lo = (1/m) * mean over all words of log min-column-sum (superadditive),
    hi = (1/m) * mean over all words of log entrywise-sum norm (subadditive).
    """
    if m < 1:
        raise ValidationError(f"word length must be >= 1, got {m}", code="word-length")
    _require_allowable(family)

    def leaf(acc, prod):
        lo_sum, hi_sum = acc
        cols = prod.sum(axis=0)
        return lo_sum + math.log(cols.min()), hi_sum + math.log(cols.sum())

    chunks = fold_words(family, m, lambda: (0.0, 0.0), leaf, threads=threads)
    lo_total = 0.0
    hi_total = 0.0
    for clo, chi in chunks:
        lo_total += clo
        hi_total += chi
    count = family.n_digits**m
    scale = 1.0 / (m * count)
    return Bracket(
        lo=lo_total * scale,
        hi=hi_total * scale,
        lo_witness=f"mean log min-column-sum over all {count} words of length {m}",
        hi_witness=f"mean log entrywise-sum norm over all {count} words of length {m}",
    )


def _scc_partition(adj: list[list[int]]) -> list[list[int]]:
    """Tarjan strongly connected components (matrices here are tiny)."""
    n = len(adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    sccs: list[list[int]] = []
    counter = 0

    def strongconnect(v: int) -> None:
        nonlocal counter
        work = [(v, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            advanced = False
            for j in range(pi, len(adj[node])):
                w = adj[node][j]
                if index[w] == -1:
                    work[-1] = (node, j + 1)
                    work.append((w, 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[node] = min(low[node], index[w])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == node:
                        break
                sccs.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for v in range(n):
        if index[v] == -1:
            strongconnect(v)
    return sccs


def exact_spectral_radius(matrix: np.ndarray) -> Fraction | None:
    """Exact spectral radius of a nonnegative integer matrix, when certifiable.

    Decomposes the digraph into strongly connected components.  A cyclic
    component that is a single simple cycle has Perron root
    (product of weights)^(1/length), exact whenever that root is an integer;
    any other cyclic component defeats exact certification and None is
    returned.  No floating point is involved.
    """
    A = np.asarray(matrix)
    if A.dtype.kind not in "iu" and not (
        A.dtype == object and all(isinstance(x, int) for x in A.flat)
    ):
        return None
    n = A.shape[0]
    adj = [[j for j in range(n) if A[i, j] > 0] for i in range(n)]
    best = Fraction(0)
    for comp in _scc_partition(adj):
        inside = set(comp)
        if len(comp) == 1:
            i = comp[0]
            if A[i, i] == 0:
                continue
            value = Fraction(int(A[i, i]))
        else:
            weight = 1
            ok = True
            for i in comp:
                outs = [j for j in adj[i] if j in inside]
                ins = [j for j in comp if i in adj[j] and j in inside]
                if len(outs) != 1 or len(ins) != 1:
                    ok = False
                    break
                weight *= int(A[i, outs[0]])
            if not ok:
                return None
            c = len(comp)
            root = round(weight ** (1.0 / c))
            value = None
            for cand in (root - 1, root, root + 1):
                if cand >= 0 and cand**c == weight:
                    value = Fraction(cand)
                    break
            if value is None:
                return None
        best = max(best, value)
    return best


def spectral_radius_upper(matrix, tol: float = 1e-12, iters: int = 200) -> float:
    """Certified upper bound on the spectral radius of a nonnegative matrix.

    For any strictly positive x, max_i (Ax)_i / x_i bounds the Perron root
    from above; power iteration tightens the bound.  The first iterate (x of
    all ones) is the max row sum.  A relative slack of 1e-12 covers float
    rounding in the ratios.
    """
    A = np.asarray(matrix, dtype=np.float64)
    n = A.shape[0]
    if not A.any():
        return 0.0
    x = np.ones(n)
    best = math.inf
    for _ in range(iters):
        y = A @ x
        ratio = (y / x).max()
        if ratio <= 0.0:
            return 0.0
        if ratio < best:
            if best - ratio < tol * ratio:
                best = ratio
                break
            best = ratio
        top = y.max()
        x = np.maximum(y / top, 1e-300)
    return best * (1.0 + 1e-12)


def lsr_bracket(family: CodingFamily, n: int, threads: int = 1) -> Bracket:
    """Certified bracket for the lower spectral radius over word lengths <= n.

    hi = min over m <= n of min(min_w norm(B_w), min_w rho(B_w))^(1/m);
    lo = max over m <= n of (min_w min-column-sum(B_w))^(1/m).
    Integer allowable families have rho-check >= 1, so an exact spectral
    radius 1 witness collapses the bracket to [1, 1] (flagged exact); an
    exact length-1 spectral radius equal to lo collapses likewise.
    """
    if n < 1:
        raise ValidationError(f"max word length must be >= 1, got {n}", code="word-length")
    _require_allowable(family)
    int_mats = [np.asarray(m) for m in family.matrices]
    integer_family = all(m.dtype.kind in "iu" for m in int_mats)

    # per-depth aggregates: min norm, min mcs, min rho upper bound,
    # best exact rho witness (smallest exact value seen)
    def make_acc():
        return {
            d: [math.inf, math.inf, math.inf, None] for d in range(1, n + 1)
        }

    def leaf(acc, prod, depth):
        slot = acc[depth]
        cols = prod.sum(axis=0)
        slot[0] = min(slot[0], cols.sum())
        slot[1] = min(slot[1], cols.min())
        # float64 products of integer matrices are exact below 2^53
        exact = (
            exact_spectral_radius(prod.astype(np.int64))
            if integer_family and prod.max() < 2.0**53
            else None
        )
        if exact is not None:
            rho_ub = float(exact)
            if slot[3] is None or exact < slot[3]:
                slot[3] = exact
        else:
            rho_ub = spectral_radius_upper(prod)
        slot[2] = min(slot[2], rho_ub)
        return acc

    chunks = fold_words(
        family, n, make_acc, leaf, threads=threads, every_depth=True
    )
    lo, hi = 0.0, math.inf
    lo_witness = hi_witness = ""
    exact_hits: list[tuple[int, Fraction]] = []
    lo_exact: Fraction | None = None
    for depth in range(1, n + 1):
        norm_min = min(c[depth][0] for c in chunks)
        mcs_min = min(c[depth][1] for c in chunks)
        rho_min = min(c[depth][2] for c in chunks)
        for c in chunks:
            if c[depth][3] is not None:
                exact_hits.append((depth, c[depth][3]))
        cand_lo = mcs_min ** (1.0 / depth)
        if cand_lo > lo:
            lo = cand_lo
            lo_witness = f"min-column-sum {mcs_min:g} at word length {depth}"
            root = round(mcs_min ** (1.0 / depth))
            lo_exact = (
                Fraction(root) if integer_family and root**depth == mcs_min else None
            )
        if rho_min ** (1.0 / depth) < hi:
            hi = rho_min ** (1.0 / depth)
            hi_witness = f"spectral radius {rho_min:g} at word length {depth}"
        if norm_min ** (1.0 / depth) < hi:
            hi = norm_min ** (1.0 / depth)
            hi_witness = f"entrywise-sum norm {norm_min:g} at word length {depth}"

    if integer_family:
        # rho-check >= 1 always holds here; exact witnesses can pin the value
        for depth, value in exact_hits:
            if value == 1 and lo <= 1.0:
                return Bracket(
                    lo=1.0,
                    hi=1.0,
                    lo_witness="integer allowable family forces >= 1",
                    hi_witness=f"exact spectral radius 1 witness at word length {depth}",
                    exact=True,
                )
            if value == 1 and lo > 1.0:
                raise ConsistencyError(
                    f"lower bound {lo} exceeds exact spectral-radius-1 witness"
                )
        for depth, value in exact_hits:
            if depth == 1 and lo_exact is not None and value == lo_exact:
                return Bracket(
                    lo=float(value),
                    hi=float(value),
                    lo_witness=lo_witness,
                    hi_witness=f"exact spectral radius {value} at word length 1",
                    exact=True,
                )
    return Bracket(lo=lo, hi=hi, lo_witness=lo_witness, hi_witness=hi_witness)


def _block_length(n_digits: int, renorm_interval: int) -> int:
    best = 1
    for k in range(1, renorm_interval + 1):
        if n_digits**k > _BLOCK_TABLE_LIMIT:
            break
        if renorm_interval % k == 0:
            best = k
    return best


def lyapunov_mc(
    family: CodingFamily,
    steps: int,
    seed: int,
    renorm_interval: int = 64,
    stream: int = 0,
) -> McEstimate:
    """Monte-Carlo Lyapunov estimate: iterate P <- B_theta P over i.i.d.
    uniform digits, renormalizing by the entry sum every renorm_interval
    steps.  Standard error from batch means over the renormalization chunks
    (at least 32 batches).  Bit-reproducible for fixed (seed, stream)."""
    _require_allowable(family)
    if steps < 1:
        raise ValidationError("steps must be >= 1", code="steps")
    if renorm_interval < 1:
        raise ValidationError("renorm_interval must be >= 1", code="renorm")
    max_row = max(float(np.asarray(m).sum(axis=1).max()) for m in family.matrices)
    growth_log2 = math.log2(max_row) if max_row > 1 else 0.0
    if renorm_interval * growth_log2 > _MAGNITUDE_CAP_LOG2:
        raise ValidationError(
            f"renorm_interval {renorm_interval} can push entries past "
            f"2^{_MAGNITUDE_CAP_LOG2:.0f}; reduce it below "
            f"{int(_MAGNITUDE_CAP_LOG2 / growth_log2)}",
            code="overflow-guard",
        )
    n_renorms = steps // renorm_interval
    if n_renorms < _MIN_BATCHES:
        raise ValidationError(
            f"need at least {_MIN_BATCHES} renormalization chunks for batch "
            f"means; got {n_renorms} (steps // renorm_interval)",
            code="too-few-batches",
        )

    Q = family.n_digits
    N = family.N
    k = _block_length(Q, renorm_interval)
    mats = _float_mats(family)
    # table[j] = product over the base-Q expansion of j (first digit most
    # significant), built level by level
    table = np.stack(mats)
    for _ in range(k - 1):
        table = np.einsum("aij,bjk->abik", table, np.stack(mats)).reshape(
            -1, N, N
        )

    bitgen = np.random.Philox(key=seed)
    if stream:
        bitgen = bitgen.jumped(stream)
    rng = np.random.Generator(bitgen)
    digits = rng.integers(0, Q, size=steps)

    blocks_per_renorm = renorm_interval // k
    packer = Q ** np.arange(k - 1, -1, -1, dtype=np.int64)
    main = n_renorms * renorm_interval
    block_ids = digits[:main].reshape(-1, k) @ packer

    P = np.ones(N)
    total = -math.log(N)
    chunk_logs = np.empty(n_renorms)
    idx = 0
    for r in range(n_renorms):
        for _ in range(blocks_per_renorm):
            P = table[block_ids[idx]] @ P
            idx += 1
        s = P.sum()
        chunk_logs[r] = math.log(s)
        P /= s
    for digit in digits[main:]:
        P = mats[digit] @ P
    total += chunk_logs.sum() + math.log(P.sum())
    value = float(total / steps)

    # batch means over the renorm chunks, contiguous, 32 batches
    n_batches = _MIN_BATCHES
    edges = np.linspace(0, n_renorms, n_batches + 1).astype(int)
    rates = np.array(
        [
            chunk_logs[a:b].sum() / ((b - a) * renorm_interval)
            for a, b in zip(edges[:-1], edges[1:])
        ]
    )
    std_error = float(rates.std(ddof=1) / math.sqrt(n_batches))
    return McEstimate(
        value=value,
        std_error=std_error,
        steps=steps,
        seed=seed,
        renorm_interval=renorm_interval,
        stream=stream,
    )


@dataclass(frozen=True)
class CriticalProbabilities:
    """Derived thresholds: extinction, positive measure, empty interior."""

    p_extinct: float | None
    p_lebesgue: Bracket
    p_interior_empty: Bracket


def column_mass(family: CodingFamily) -> int | None:
    """Total offspring per source cell (equals the map count M when uniform)."""
    total = sum(np.asarray(m).sum(axis=0) for m in family.matrices)
    first = total.flat[0]
    if np.all(total == first):
        return int(first)
    return None


def critical_probabilities(
    family: CodingFamily, m: int, n: int, threads: int = 1
) -> tuple[float | None, Bracket, Bracket]:
    """(p_extinct, p_lebesgue bracket, p_interior_empty bracket).

    p_extinct = 1/M; p_lebesgue = exp(-lambda) via the negated Lyapunov
    bracket; p_interior_empty = 1/rho-check.  Uses the exact scaling
    identities lambda(p*B) = log p + lambda(B) and
    rho-check(p*B) = p * rho-check(B).
    """
    lam = lyapunov_bracket(family, m, threads=threads)
    rho = lsr_bracket(family, n, threads=threads)
    mass = column_mass(family)
    if family.spec is not None:
        mass = family.spec.M
    p_extinct = 1.0 / mass if mass else None
    p_lebesgue = Bracket(
        lo=math.exp(-lam.hi),
        hi=math.exp(-lam.lo),
        lo_witness=f"exp(-upper): {lam.hi_witness}",
        hi_witness=f"exp(-lower): {lam.lo_witness}",
        exact=lam.lo == lam.hi,
    )
    p_interior_empty = Bracket(
        lo=1.0 / rho.hi,
        hi=1.0 / rho.lo,
        lo_witness=f"1/upper: {rho.hi_witness}",
        hi_witness=f"1/lower: {rho.lo_witness}",
        exact=rho.exact,
    )
    return p_extinct, p_lebesgue, p_interior_empty
