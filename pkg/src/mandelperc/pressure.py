"""Finite-level pressure function and spectral typicality certificates.

The pressure at word length n is P_n(q) = (1/n) log sum over words w of
norm(B_w)^q with the entrywise-sum norm.  It is convex in q (log-sum-exp of
linear functions); for coding families it is also nondecreasing because every
product norm is >= 1.  Two limits of interest are estimated from it: the
slope P_n(q)/q at very negative q approaches the log of the minimal norm
growth rate, and the right derivative at 0 approaches the mean (Lyapunov)
growth rate.

Typicality certificates assert two monoid properties checked on explicit
witness products: pinching (a product whose eigenvalue moduli are pairwise
distinct, hence powers have arbitrarily large eccentricity) and twisting (a
second product that moves every invariant subspace of the first off every
complementary invariant subspace, checked by determinants in the eigenbasis).
Together with a strict gap between minimal and mean growth they imply a
proper parameter interval where the random set has positive measure but
empty interior.  Verdicts are "certified", "undetermined", or "inapplicable"
(singular member matrix); a failed search refutes nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

from .bounds import Bracket, fold_words, lsr_bracket, lyapunov_bracket
from .errors import ConsistencyError, ValidationError
from .ifs import CodingFamily, word_product

_CONVEXITY_SLACK = 1e-9


def word_log_norms(family: CodingFamily, n: int, threads: int = 1) -> np.ndarray:
    """log of the entrywise-sum norm for every word of length n, in
    lexicographic word order."""
    if n < 1:
        raise ValidationError(f"word length must be >= 1, got {n}", code="word-length")

    def leaf(acc: list, prod):
        acc.append(math.log(prod.sum()))
        return acc

    chunks = fold_words(family, n, list, leaf, threads=threads)
    out: list[float] = []
    for c in chunks:
        out.extend(c)
    return np.array(out)


def _pressure_from_logs(logs: np.ndarray, q: float, n: int) -> float:
    if q == 0.0:
        return math.log(len(logs)) / n
    scaled = q * logs
    top = scaled.max()
    return float((top + math.log(np.exp(scaled - top).sum())) / n)


def pressure(family: CodingFamily, q: float, n: int, threads: int = 1) -> float:
    """P_n(q) = (1/n) log sum over length-n words of sum_norm(B_w)^q.

    q = 0 is the closed form log(number of digits): the word count.
    Evaluated by log-sum-exp so very negative q cannot underflow.
    """
    if q == 0.0:
        return math.log(family.n_digits)
    return _pressure_from_logs(word_log_norms(family, n, threads=threads), q, n)


def default_q_grid() -> tuple[float, ...]:
    """-40 .. 4 in steps of 0.5, densified near 0."""
    grid = set(np.arange(-40.0, 4.0001, 0.5).tolist())
    grid.update((-0.2, -0.1, -0.05, -0.02, -0.01, 0.01, 0.02, 0.05, 0.1, 0.2))
    return tuple(sorted(grid))


@dataclass(frozen=True)
class PressureCurve:
    """Sampled (q, P_n(q)) pairs; convexity is checked on construction."""

    samples: tuple[tuple[float, float], ...]
    n: int
    norm: str = "entrywise-sum"
    monotone_checked: bool = False

    def __post_init__(self) -> None:
        qs = [q for q, _ in self.samples]
        if any(b <= a for a, b in zip(qs, qs[1:])):
            raise ValidationError("q samples must be strictly increasing", code="grid")
        for (q1, p1), (q2, p2), (q3, p3) in zip(
            self.samples, self.samples[1:], self.samples[2:]
        ):
            chord = p1 + (p3 - p1) * (q2 - q1) / (q3 - q1)
            if p2 > chord + _CONVEXITY_SLACK:
                raise ConsistencyError(
                    f"pressure samples not convex at q = {q2}: "
                    f"{p2} > chord {chord}"
                )
        if self.monotone_checked:
            for (q1, p1), (q2, p2) in zip(self.samples, self.samples[1:]):
                if p2 < p1 - _CONVEXITY_SLACK:
                    raise ConsistencyError(
                        f"pressure samples decrease at q = {q2}"
                    )

    def value_at(self, q: float) -> float:
        for qq, p in self.samples:
            if qq == q:
                return p
        raise ValidationError(f"q = {q} is not a sample point", code="grid")


def pressure_curve(
    family: CodingFamily,
    n: int,
    q_grid: Sequence[float] | None = None,
    threads: int = 1,
) -> PressureCurve:
    """Evaluate the pressure on a grid, reusing one norm enumeration."""
    grid = tuple(sorted(set(default_q_grid() if q_grid is None else q_grid)))
    logs = word_log_norms(family, n, threads=threads)
    samples = tuple((q, _pressure_from_logs(logs, q, n)) for q in grid)
    # norms >= 1 guarantee a nondecreasing curve; only then is it enforced
    monotone = bool(logs.min() >= -1e-12)
    return PressureCurve(samples=samples, n=n, monotone_checked=monotone)


def pressure_asymptote(
    family: CodingFamily, n: int, q_min: float = -40.0, threads: int = 1
) -> float:
    """Slope P_n(q_min)/q_min, an estimate of the minimal-growth log rate.

    At fixed n this approaches log(min over words of norm^(1/n)) as q_min
    goes to -infinity (within log(word count)/(n |q_min|) of it), which in
    turn decreases toward the true minimal growth rate as n grows.  It is an
    upper estimate; compare against the certified lsr bracket from below.
    """
    if q_min > -20:
        raise ValidationError(
            f"asymptote slope needs q_min <= -20, got {q_min}", code="q-min"
        )
    return pressure(family, q_min, n, threads=threads) / q_min


def pressure_right_derivative(
    family: CodingFamily, n: int, h: float = 0.01, threads: int = 1
) -> float:
    """(P_n(h) - P_n(0))/h, an estimate of the mean (Lyapunov) growth rate."""
    if not 0 < h <= 0.1:
        raise ValidationError(f"need 0 < h <= 0.1, got {h}", code="step")
    logs = word_log_norms(family, n, threads=threads)
    return (_pressure_from_logs(logs, h, n) - _pressure_from_logs(logs, 0.0, n)) / h


def int_det(matrix) -> int:
    """Exact determinant of an integer matrix (fraction-free elimination)."""
    a = [[int(x) for x in row] for row in np.asarray(matrix)]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for r in range(k + 1, n):
                if a[r][k] != 0:
                    a[k], a[r] = a[r], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class TypicalityCertificate:
    """Witnesses for pinching/twisting, or the reason none were produced.

    "certified" asserts the monoid has a product with a simple dominant top
    eigenvalue (so powers develop a dominant direction) and a second product
    that moves every invariant subspace of the first off every invariant
    subspace of complementary dimension.  Those two facts imply the negative
    part of the pressure is not affine, hence a proper interesting interval
    whenever the growth rates are strictly ordered.
    """

    verdict: str  # "certified" | "undetermined" | "inapplicable"
    tol: float
    search_len: int
    pinching_word: tuple[int, ...] | None = None
    eigenvalue_moduli: tuple[float, ...] | None = None
    twisting_word: tuple[int, ...] | None = None
    determinants: tuple[float, ...] | None = None
    reason: str = ""

    @property
    def certified(self) -> bool:
        return self.verdict == "certified"


def _words_up_to(n_digits: int, max_len: int) -> Iterator[tuple[int, ...]]:
    for length in range(1, max_len + 1):
        yield from product(range(n_digits), repeat=length)


def _spectral_blocks(a1: np.ndarray, tol: float) -> list[np.ndarray] | None:
    """Real invariant splitting of a1 into minimal spectral blocks, ordered
    by descending eigenvalue modulus: 1-column blocks for real eigenvalues,
    2-column (real, imaginary part) blocks for conjugate pairs.

    Returns None unless all eigenvalues are pairwise distinct as complex
    numbers (a repeated eigenvalue gives a continuum of invariant subspaces,
    which defeats any finite transversality certificate) and the dominant
    eigenvalue is real and simple in modulus (the pinching requirement: the
    top gap makes powers of a1 arbitrarily eccentric).
    """
    eigvals, eigvecs = np.linalg.eig(a1)
    scale = max(1.0, float(np.abs(eigvals).max()))
    n = len(eigvals)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigvals[i] - eigvals[j]) <= tol * scale:
                return None
    blocks: list[tuple[float, np.ndarray]] = []
    used = [False] * n
    for i in range(n):
        if used[i]:
            continue
        lam, vec = eigvals[i], eigvecs[:, i]
        if abs(lam.imag) <= tol * scale:
            basis = np.real(vec).reshape(-1, 1)
        else:
            partner = None
            for j in range(i + 1, n):
                if not used[j] and abs(eigvals[j] - lam.conjugate()) <= 1e-8 * scale:
                    partner = j
                    break
            if partner is None:
                return None
            used[partner] = True
            basis = np.stack([np.real(vec), np.imag(vec)], axis=1)
        used[i] = True
        norms = np.linalg.norm(basis, axis=0)
        if (norms <= tol).any():
            return None
        blocks.append((abs(lam), basis / norms))
    blocks.sort(key=lambda b: -b[0])
    top_mod, top_basis = blocks[0]
    if top_basis.shape[1] != 1:
        return None  # dominant eigenvalue is a complex pair; no top gap
    if top_mod - blocks[1][0] <= tol * scale:
        return None
    return [b for _, b in blocks]


def _twisting_determinants(
    a2: np.ndarray, blocks: Sequence[np.ndarray], tol: float
) -> tuple[float, ...] | None:
    """Transversality determinants of a2 across the invariant-subspace
    lattice of the blocks: for every pair of block-subset spans V, W with
    dim V + dim W = N, the determinant of [a2*basis(V) | basis(W)] after
    column normalization.  None as soon as one falls to tol or below."""
    n = a2.shape[0]
    dims = [b.shape[1] for b in blocks]
    dets: list[float] = []
    subsets = [
        (sum(dims[i] for i in sel), sel)
        for k in range(1, len(blocks) + 1)
        for sel in combinations(range(len(blocks)), k)
    ]
    for dim_v, vsel in subsets:
        if dim_v >= n:
            continue
        moved = a2 @ np.concatenate([blocks[i] for i in vsel], axis=1)
        for dim_w, wsel in subsets:
            if dim_v + dim_w != n:
                continue
            mat = np.concatenate([moved] + [blocks[i] for i in wsel], axis=1)
            norms = np.linalg.norm(mat, axis=0)
            if (norms <= 0).any():
                return None
            det = float(np.linalg.det(mat / norms))
            if abs(det) <= tol:
                return None
            dets.append(det)
    return tuple(dets)


def typicality_check(
    family: CodingFamily, search_len: int = 2, tol: float = 1e-9
) -> TypicalityCertificate:
    """Search products up to search_len for a pinching witness A_1 (simple
    dominant top eigenvalue, all eigenvalues pairwise distinct so its
    invariant-subspace lattice is finite) and a twisting witness A_2 (moves
    every invariant subspace of A_1 off every complementary one).  Requires
    every member matrix invertible; verdicts never refute, only certify or
    abstain."""
    if search_len < 1:
        raise ValidationError("search_len must be >= 1", code="search-len")
    for digit, m in enumerate(family.matrices):
        if int_det(m) == 0:
            return TypicalityCertificate(
                verdict="inapplicable",
                tol=tol,
                search_len=search_len,
                reason=f"matrix for digit {digit} is singular",
            )
    if family.N == 1:
        return TypicalityCertificate(
            verdict="undetermined",
            tol=tol,
            search_len=search_len,
            reason="type space is one-dimensional; eccentricity cannot grow",
        )

    found_pinching = False
    for w1 in _words_up_to(family.n_digits, search_len):
        a1 = word_product(family, w1).astype(np.float64)
        blocks = _spectral_blocks(a1, tol)
        if blocks is None:
            continue
        found_pinching = True
        moduli = tuple(
            float(x) for x in np.sort(np.abs(np.linalg.eigvals(a1)))[::-1]
        )
        for w2 in _words_up_to(family.n_digits, search_len):
            a2 = word_product(family, w2).astype(np.float64)
            dets = _twisting_determinants(a2, blocks, tol)
            if dets is not None:
                return TypicalityCertificate(
                    verdict="certified",
                    tol=tol,
                    search_len=search_len,
                    pinching_word=w1,
                    eigenvalue_moduli=moduli,
                    twisting_word=w2,
                    determinants=dets,
                )
    reason = (
        "pinching witnesses found but no twisting witness up to length "
        f"{search_len}"
        if found_pinching
        else f"no pinching word up to length {search_len}"
    )
    return TypicalityCertificate(
        verdict="undetermined", tol=tol, search_len=search_len, reason=reason
    )


def verify_typicality(family: CodingFamily, cert: TypicalityCertificate) -> bool:
    """Replay a certificate: recompute the spectral blocks and transversality
    determinants from the recorded words and re-check them against the
    recorded tolerance."""
    if cert.verdict != "certified":
        return True  # nothing was claimed
    if cert.pinching_word is None or cert.twisting_word is None:
        return False
    a1 = word_product(family, cert.pinching_word).astype(np.float64)
    blocks = _spectral_blocks(a1, cert.tol)
    if blocks is None:
        return False
    moduli = np.sort(np.abs(np.linalg.eigvals(a1)))
    recorded = np.array(sorted(cert.eigenvalue_moduli or ()))
    if not np.allclose(moduli, recorded, rtol=1e-9, atol=1e-9):
        return False
    a2 = word_product(family, cert.twisting_word).astype(np.float64)
    dets = _twisting_determinants(a2, blocks, cert.tol)
    if dets is None:
        return False
    return np.allclose(
        np.sort(np.abs(dets)), np.sort(np.abs(cert.determinants)), rtol=1e-9, atol=1e-9
    )


@dataclass(frozen=True)
class InterestingInterval:
    """The p-range with positive measure but empty interior, bracketed.

    certified: sub-interval guaranteed by the bracket sides that face it;
    hull: outer envelope; verdict "nonempty certified" iff the certified
    sub-interval is nonempty.
    """

    certified: tuple[float, float]
    hull: tuple[float, float]
    verdict: str  # "nonempty certified" | "empty" | "undetermined"
    lyapunov: Bracket
    lsr: Bracket


def interesting_interval(
    family: CodingFamily, m: int, n: int, threads: int = 1
) -> InterestingInterval:
    """Bracket the interval (exp(-lambda), 1/rho-check).

    Inner (certified) endpoints use the conservative bracket sides
    (exp(-lambda.lo), 1/rho.hi); the hull uses the optimistic sides.
    """
    lam = lyapunov_bracket(family, m, threads=threads)
    rho = lsr_bracket(family, n, threads=threads)
    certified = (math.exp(-lam.lo), 1.0 / rho.hi)
    hull = (math.exp(-lam.hi), 1.0 / rho.lo)
    if certified[0] < certified[1]:
        verdict = "nonempty certified"
    elif hull[0] >= hull[1]:
        verdict = "empty"
    else:
        verdict = "undetermined"
    return InterestingInterval(
        certified=certified, hull=hull, verdict=verdict, lyapunov=lam, lsr=rho
    )
