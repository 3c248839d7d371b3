"""Multitype branching semantics of the retained-cell process.

Randomizing an integer system keeps each composed map independently with
probability p.  Counting surviving cylinders inside each basic cell, level
by level, yields a multitype branching process whose offspring law in
environment digit theta is binomially thinned from the coding matrix: a
type-V individual spawns Binomial(B_theta(V, W), p) children of type W.

This module provides the exact extinction-probability iteration through
probability generating functions, a distribution-preserving Monte-Carlo
population simulation, full percolation-tree realizations, and geometric
statistics of realizations (covered cells, a Lebesgue-measure proxy, a
largest fully-covered-block interior proxy, and a box-counting style
dimension estimate from retained-address growth).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import BudgetError, ValidationError
from .ifs import CodingFamily, IfsSpec

_DEFAULT_CAP = 10**6
_DEFAULT_NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class EnvWord:
    """A finite environment: one digit per level, plus how it was made."""

    digits: tuple[int, ...]
    source: str = "fixed"

    def __post_init__(self) -> None:
        if any(not isinstance(x, int) or x < 0 for x in self.digits):
            raise ValidationError(
                "environment digits must be nonnegative integers", code="env-digit"
            )

    def __len__(self) -> int:
        return len(self.digits)

    @classmethod
    def fixed(cls, digits: Sequence[int]) -> "EnvWord":
        return cls(tuple(int(x) for x in digits), "fixed")

    @classmethod
    def periodic(cls, word: Sequence[int], length: int) -> "EnvWord":
        word = tuple(int(x) for x in word)
        if not word:
            raise ValidationError("periodic pattern must be nonempty", code="env-empty")
        if length < 1:
            raise ValidationError("environment length must be >= 1", code="env-length")
        digits = tuple(word[i % len(word)] for i in range(length))
        return cls(digits, f"periodic({','.join(map(str, word))})")

    @classmethod
    def sampled(cls, n_digits: int, length: int, seed: int) -> "EnvWord":
        """Uniform i.i.d. digits, the Bernoulli environment measure."""
        if n_digits < 1:
            raise ValidationError("need at least one digit value", code="env-digit")
        if length < 1:
            raise ValidationError("environment length must be >= 1", code="env-length")
        rng = np.random.Generator(np.random.Philox(key=seed))
        digits = tuple(int(x) for x in rng.integers(0, n_digits, size=length))
        return cls(digits, f"sampled(seed={seed})")


def _check_env(family: CodingFamily, env: EnvWord) -> None:
    if any(d >= family.n_digits for d in env.digits):
        raise ValidationError(
            f"environment digit out of range 0..{family.n_digits - 1}",
            code="env-digit",
        )


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 < p <= 1.0:
        raise ValidationError(f"probability must be in (0, 1], got {p}", code="prob")
    return p


@dataclass(frozen=True)
class PgfState:
    """Extinction probabilities by a finite level: s[i] = P(the process
    started from one type-i individual dies by level `depth`)."""

    s: tuple[float, ...]
    depth: int
    converged: bool = False

    def __post_init__(self) -> None:
        if any(not 0.0 <= x <= 1.0 for x in self.s):
            raise ValidationError("probabilities must lie in [0, 1]", code="pgf-range")


def _pgf_backward(mats: Sequence[np.ndarray], p: float, digits: Sequence[int]) -> np.ndarray:
    """s <- 0; for t = depth..1: s_i <- prod_W (1 - p + p s_W)^B[theta_t](i, W)."""
    n = mats[0].shape[0]
    s = np.zeros(n)
    for digit in reversed(digits):
        base = 1.0 - p + p * s
        s = np.prod(base[None, :] ** mats[digit], axis=1)
    return np.clip(s, 0.0, 1.0)


def extinction_iterate(family: CodingFamily, p: float, env: EnvWord) -> PgfState:
    """Exact extinction probability by level len(env): the generating
    function of Binomial(B_theta(i, W), p) offspring composed backward
    through the environment.  Monotone nondecreasing in depth, converging
    to the true extinction probability from below."""
    p = _check_p(p)
    _check_env(family, env)
    mats = [np.asarray(m, dtype=float) for m in family.matrices]
    s = _pgf_backward(mats, p, env.digits)
    return PgfState(s=tuple(float(x) for x in s), depth=len(env))


def extinction_probability(
    family: CodingFamily,
    p: float,
    env: EnvWord,
    tol: float = 1e-12,
    window: int = 5,
) -> PgfState:
    """The depth-limited approximant with a stopping heuristic: evaluate
    extinction_iterate on growing prefixes of env and stop once the vector
    moves less than tol for `window` consecutive levels.  The result is
    still a finite-depth lower bound, never the exact limit."""
    p = _check_p(p)
    _check_env(family, env)
    mats = [np.asarray(m, dtype=float) for m in family.matrices]
    prev = np.zeros(family.N)
    quiet = 0
    for depth in range(1, len(env) + 1):
        s = _pgf_backward(mats, p, env.digits[:depth])
        if np.max(np.abs(s - prev)) < tol:
            quiet += 1
            if quiet >= window:
                return PgfState(
                    s=tuple(float(x) for x in s), depth=depth, converged=True
                )
        else:
            quiet = 0
        prev = s
    return PgfState(s=tuple(float(x) for x in prev), depth=len(env))


@dataclass(frozen=True)
class PopulationState:
    """Type counts after consuming a prefix of the environment."""

    counts: tuple[int, ...]
    level: int
    consumed: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts):
            raise ValidationError("counts must be nonnegative", code="counts")
        if len(self.consumed) != self.level:
            raise ValidationError(
                "level must equal the number of consumed digits", code="level"
            )

    @property
    def total(self) -> int:
        return sum(self.counts)


@dataclass(frozen=True)
class PopulationTrajectory:
    states: tuple[PopulationState, ...]
    truncated: bool
    p: float
    seed: int

    @property
    def final(self) -> PopulationState:
        return self.states[-1]

    @property
    def survived(self) -> bool:
        """Alive at the end, counting a capped blow-up as survival."""
        return self.truncated or self.final.total > 0


def simulate_population(
    family: CodingFamily,
    p: float,
    env: EnvWord,
    levels: int,
    seed: int,
    cap: int = _DEFAULT_CAP,
    start_type: int = 0,
) -> PopulationTrajectory:
    """Monte-Carlo population counts: each type-V individual independently
    spawns Binomial(B_theta(V, W), p) children of each type W, so the level
    sum Binomial(Z_V * B_theta(V, W), p) over V preserves the distribution.
    Truncates with a flag once the total count exceeds cap."""
    p = _check_p(p)
    _check_env(family, env)
    if levels < 0:
        raise ValidationError("levels must be >= 0", code="levels")
    if levels > len(env):
        raise ValidationError(
            f"need {levels} environment digits, have {len(env)}", code="env-short"
        )
    if cap < 1:
        raise ValidationError("cap must be >= 1", code="cap")
    if not 0 <= start_type < family.N:
        raise ValidationError(f"start type must be in 0..{family.N - 1}", code="type")
    rng = np.random.Generator(np.random.Philox(key=seed))
    mats = [np.asarray(m, dtype=np.int64) for m in family.matrices]
    counts = np.zeros(family.N, dtype=np.int64)
    counts[start_type] = 1
    states = [PopulationState(counts=tuple(map(int, counts)), level=0, consumed=())]
    truncated = False
    for t in range(1, levels + 1):
        digit = env.digits[t - 1]
        trials = counts[:, None] * mats[digit]
        counts = rng.binomial(trials, p).sum(axis=0)
        states.append(
            PopulationState(
                counts=tuple(map(int, counts)),
                level=t,
                consumed=env.digits[:t],
            )
        )
        if counts.sum() > cap:
            truncated = True
            break
        if counts.sum() == 0:
            break
    return PopulationTrajectory(
        states=tuple(states), truncated=truncated, p=p, seed=seed
    )


def mean_population(
    family: CodingFamily, p: float, env: EnvWord, levels: int, start_type: int = 0
) -> np.ndarray:
    """The exact mean vector e_U^T prod_t (p B_theta_t), the oracle for
    simulate_population averages."""
    p = _check_p(p)
    _check_env(family, env)
    if levels > len(env):
        raise ValidationError(
            f"need {levels} environment digits, have {len(env)}", code="env-short"
        )
    vec = np.zeros(family.N)
    vec[start_type] = 1.0
    for t in range(levels):
        vec = vec @ (p * np.asarray(family.matrices[env.digits[t]], dtype=float))
    return vec


@dataclass(frozen=True)
class Realization:
    """A percolation tree sample: per-level retained addresses of the
    M-ary composition tree, packed as integers in base M (level k entries
    lie in [0, M^k)).  Prefix-closed by construction: every retained
    address's parent (address // M) is retained at the previous level."""

    spec: IfsSpec
    p: float
    seed: int
    levels: tuple[tuple[int, ...], ...] = field(repr=False)

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    @property
    def retained_counts(self) -> tuple[int, ...]:
        return tuple(len(lv) for lv in self.levels)

    @property
    def survived(self) -> bool:
        return len(self.levels[-1]) > 0


def simulate_tree(
    spec: IfsSpec,
    p: float,
    depth: int,
    seed: int,
    node_budget: int = _DEFAULT_NODE_BUDGET,
) -> Realization:
    """Recursive-descent percolation: starting from the root address, each
    of the M children of a retained node is kept independently with
    probability p.  Refuses (with the budget it would need) rather than
    expand more than node_budget child slots at one level."""
    p = _check_p(p)
    if depth < 0:
        raise ValidationError("depth must be >= 0", code="depth")
    if node_budget < 1:
        raise ValidationError("node budget must be >= 1", code="budget")
    M = spec.M
    rng = np.random.Generator(np.random.Philox(key=seed))
    use_numpy = depth * math.log2(M) <= 62
    levels: list[tuple[int, ...]] = [(0,)]
    current: Sequence[int] = (0,)
    for _ in range(depth):
        slots = len(current) * M
        if slots > node_budget:
            raise BudgetError(
                f"expanding {len(current)} retained nodes needs {slots} child"
                f" slots, budget is {node_budget}",
                required=f"node_budget >= {slots}",
            )
        if not current:
            levels.append(())
            continue
        keep = rng.random(slots) < p
        if use_numpy:
            arr = np.asarray(current, dtype=np.int64)
            children = (arr[:, None] * M + np.arange(M, dtype=np.int64)[None, :]).ravel()
            current = tuple(int(c) for c in children[keep])
        else:
            kept: list[int] = []
            flat = keep.tolist()
            idx = 0
            for addr in current:
                base = addr * M
                for digit in range(M):
                    if flat[idx]:
                        kept.append(base + digit)
                    idx += 1
            current = tuple(kept)
        levels.append(current)
    return Realization(spec=spec, p=p, seed=seed, levels=tuple(levels))


def _address_digits(addresses: Sequence[int], level: int, M: int) -> list[tuple[int, ...]]:
    """Unpack base-M addresses into digit words of the given length."""
    out = []
    for addr in addresses:
        word = []
        for _ in range(level):
            word.append(addr % M)
            addr //= M
        out.append(tuple(reversed(word)))
    return out


def covered_positions(realization: Realization, level: int) -> set[tuple[int, ...]]:
    """The distinct level-`level` grid cells hit by retained addresses:
    position = sum_k t_{digit_k} L^(level-k), an integer vector whose cell
    [pos, pos+1] L^(-level) is the image cylinder."""
    spec = realization.spec
    L, d = spec.L, spec.d
    positions: set[tuple[int, ...]] = set()
    for word in _address_digits(realization.levels[level], level, spec.M):
        pos = (0,) * d
        for digit in word:
            t = spec.translations[digit]
            pos = tuple(pos[j] * L + t[j] for j in range(d))
        positions.add(pos)
    return positions


@dataclass(frozen=True)
class CoverageStats:
    """Geometric summary of a realization: per-level distinct covered
    cells, their total volume (the Lebesgue proxy), and the side length in
    cells of the largest fully covered grid block at the deepest level
    (the interior proxy; 0 when extinct)."""

    covered: tuple[int, ...]
    lebesgue_proxy: tuple[float, ...]
    interior_proxy: int
    depth: int


def coverage_stats(realization: Realization, family: CodingFamily) -> CoverageStats:
    """Push retained addresses to grid cells per level and measure them.
    The Lebesgue proxy at level n is covered_n * L^(-dn): the exact volume
    of the union of covered cells, an upper bound for the limit set's
    measure that stays bounded away from zero iff coverage persists."""
    if family.spec is None or family.spec != realization.spec:
        raise ValidationError(
            "realization and coding family come from different systems",
            code="spec-mismatch",
        )
    spec = realization.spec
    L, d = spec.L, spec.d
    covered: list[int] = []
    proxy: list[float] = []
    deepest: set[tuple[int, ...]] = set()
    for level in range(realization.depth + 1):
        positions = covered_positions(realization, level)
        covered.append(len(positions))
        proxy.append(len(positions) * float(L) ** (-d * level))
        if level == realization.depth:
            deepest = positions
    n = realization.depth
    interior = 0
    if deepest:
        interior = 1
        for k in range(n - 1, -1, -1):
            side = L ** (n - k)
            blocks: dict[tuple[int, ...], int] = {}
            for pos in deepest:
                key = tuple(c // side for c in pos)
                blocks[key] = blocks.get(key, 0) + 1
            if max(blocks.values()) == side**d:
                interior = side
            else:
                break
    return CoverageStats(
        covered=tuple(covered),
        lebesgue_proxy=tuple(proxy),
        interior_proxy=interior,
        depth=n,
    )


def dimension_estimate(realization: Realization) -> float | None:
    """Least-squares slope of log retained-address count against level,
    over the upper half of the levels, divided by log L.  Addresses (not
    merged cells) carry the branching growth rate log(Mp)/log L even when
    overlapping maps send different addresses to the same cell.  None when
    the realization is extinct at any used level (reported, not raised)."""
    depth = realization.depth
    if depth < 8:
        raise ValidationError("dimension estimate needs depth >= 8", code="depth")
    start = depth // 2
    counts = realization.retained_counts[start:]
    if any(c == 0 for c in counts):
        return None
    x = np.arange(start, depth + 1, dtype=float)
    y = np.log([float(c) for c in counts])
    slope = np.polyfit(x, y, 1)[0]
    return float(slope / math.log(realization.spec.L))
