"""Phase-diagram reports: orchestrate every analysis into one document.

A PhaseReport gathers goodness, the growth-rate bracket (+ Monte-Carlo
cross-check), the lower-spectral-radius bracket, the derived probability
thresholds, interior certificates, typicality, and the interesting-interval
verdict, and classifies a queried retention probability p:

    subcritical                               p <= 1/M (a.s. extinction)
    zero-measure fractal (dim d)              certified below the measure
                                              threshold; d = log(Mp)/log L
    positive-measure empty-interior.certified above the measure threshold and
                                              certifiably below 1/lsr
    positive-measure empty-interior.unresolved p inside bracket uncertainty
    interior-possible                         p above a certified p_hat

Classification uses only certified bracket sides, never Monte-Carlo point
estimates, and degrades to "unresolved" whenever p falls inside a
bracket's uncertainty.  Reports are deterministic: same config and seed,
same bytes (no timestamps).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .bounds import (
    Bracket,
    McEstimate,
    critical_probabilities,
    lsr_bracket,
    lyapunov_bracket,
    lyapunov_mc,
)
from .config import Budgets, RunConfig
from .errors import CertificateError, ConsistencyError, ValidationError
from .ifs import (
    CodingFamily,
    GoodnessCertificate,
    IfsSpec,
    coding_matrices,
    goodness_check,
    validate_ifs,
)
from .interior import (
    ColsumThreshold,
    InteriorCertificate,
    RowDominationWitness,
    VectorFamily,
    colsum_interior_threshold,
    interior_threshold,
    verify_interior,
)
from .pressure import (
    InterestingInterval,
    TypicalityCertificate,
    interesting_interval,
    typicality_check,
    verify_typicality,
)
from .serialize import Document, Section


@dataclass(frozen=True)
class PhaseReport:
    spec: IfsSpec
    family: CodingFamily
    budgets: Budgets
    seed: int
    goodness: GoodnessCertificate
    lyapunov: Bracket
    mc: McEstimate
    lsr: Bracket
    p_extinct: float
    p_lebesgue: Bracket
    p_interior_empty: Bracket
    interesting: InterestingInterval
    typicality: TypicalityCertificate
    colsum: ColsumThreshold
    interior: InteriorCertificate | None
    uset: VectorFamily | None
    p_query: float | None
    classification: str | None
    dimension: float | None

    def __post_init__(self) -> None:
        if self.p_extinct > self.p_lebesgue.hi + 1e-12:
            raise ConsistencyError(
                f"extinction threshold {self.p_extinct} above the measure "
                f"threshold upper bound {self.p_lebesgue.hi}"
            )
        if self.p_lebesgue.hi > 1.0 + 1e-12:
            raise ConsistencyError(
                f"measure threshold bound {self.p_lebesgue.hi} above 1"
            )
        if self.p_hat is not None and self.p_hat < self.p_interior_empty.lo - 1e-12:
            raise ConsistencyError(
                f"interior threshold {self.p_hat} below the certified "
                f"empty-interior bound {self.p_interior_empty.lo}"
            )

    @property
    def p_hat(self) -> float | None:
        candidates = []
        if self.interior is not None:
            candidates.append(self.interior.p_hat)
        if self.colsum.applies:
            candidates.append(self.colsum.threshold)
        return min(candidates) if candidates else None


def classify(
    p: float,
    p_extinct: float,
    p_lebesgue: Bracket,
    p_interior_empty: Bracket,
    p_hat: float | None,
    M: int,
    L: int,
) -> tuple[str, float | None]:
    """Map a probability to its certified phase; boundaries and bracket
    interiors are never claimed."""
    if p <= p_extinct:
        return "subcritical", None
    if p_hat is not None and p > p_hat:
        return "interior-possible", None
    if p < p_lebesgue.lo:
        return (
            "zero-measure fractal",
            math.log(M * p) / math.log(L),
        )
    if p > p_lebesgue.hi and p < p_interior_empty.lo:
        return "positive-measure empty-interior (certified)", None
    return "positive-measure empty-interior (unresolved)", None


def build_report(config: RunConfig, threads: int = 1) -> PhaseReport:
    spec = config.spec
    family = coding_matrices(spec)
    budgets = config.budgets
    goodness = goodness_check(family, budgets.goodness_length)
    m, n = budgets.bracket_length, budgets.lsr_length
    lam = lyapunov_bracket(family, m, threads=threads)
    mc = lyapunov_mc(family, budgets.mc_steps, seed=config.seed)
    rho = lsr_bracket(family, n, threads=threads)
    p_extinct, p_leb, p_int = critical_probabilities(family, m, n, threads=threads)
    interval = interesting_interval(family, m, n, threads=threads)
    typicality = typicality_check(family, search_len=2)
    colsum = colsum_interior_threshold(family, min(n, budgets.interior_length))
    interior_cert = None
    if config.uset is not None:
        interior_cert = interior_threshold(
            family, config.uset, budgets.interior_length
        )
    report_kwargs = dict(
        spec=spec,
        family=family,
        budgets=budgets,
        seed=config.seed,
        goodness=goodness,
        lyapunov=lam,
        mc=mc,
        lsr=rho,
        p_extinct=p_extinct,
        p_lebesgue=p_leb,
        p_interior_empty=p_int,
        interesting=interval,
        typicality=typicality,
        colsum=colsum,
        interior=interior_cert,
        uset=config.uset,
        p_query=config.p,
        classification=None,
        dimension=None,
    )
    if config.p is not None:
        p_hat_candidates = [
            c.p_hat if isinstance(c, InteriorCertificate) else c.threshold
            for c in (interior_cert, colsum)
            if c is not None
            and (isinstance(c, InteriorCertificate) or c.applies)
        ]
        p_hat = min(p_hat_candidates) if p_hat_candidates else None
        label, dim = classify(
            config.p, p_extinct, p_leb, p_int, p_hat, spec.M, spec.L
        )
        report_kwargs["classification"] = label
        report_kwargs["dimension"] = dim
    return PhaseReport(**report_kwargs)


def _bracket_section(doc: Document, name: str, bracket: Bracket) -> Section:
    sec = doc.add_section(name)
    sec.set("lo", bracket.lo)
    sec.set("hi", bracket.hi)
    sec.set("exact", bracket.exact)
    sec.set("lo-witness", bracket.lo_witness)
    sec.set("hi-witness", bracket.hi_witness)
    return sec


def _system_blocks(doc: Document, family: CodingFamily) -> None:
    sec = doc.add_section("system")
    spec = family.spec
    if spec is not None:
        sec.set("name", spec.name)
        sec.set("dimension", spec.d)
        sec.set("base", spec.L)
        flat = tuple(
            t[0] if spec.d == 1 else tuple(t) for t in spec.translations
        )
        if spec.d == 1:
            sec.set("translations", tuple(int(x) for x in flat))
        else:
            for i, t in enumerate(spec.translations):
                sec.set(f"translation-{i}", tuple(int(x) for x in t))
            sec.set("map-count", spec.M)
    else:
        sec.set("name", family.name)
    sec.set("types", family.N)
    sec.set("digits", family.n_digits)
    tab = doc.add_table("matrices", ("digit", "row", "entries"))
    for digit, mat in enumerate(family.matrices):
        arr = np.asarray(mat)
        for i in range(arr.shape[0]):
            tab.add(digit, i, ";".join(str(int(x)) for x in arr[i]))


def _family_from_document(doc: Document) -> CodingFamily:
    sec = doc.section("system")
    tab = doc.table("matrices")
    n_types = int(sec.get("types"))
    n_digits = int(sec.get("digits"))
    mats: list[list[list[int]]] = [
        [[0] * n_types for _ in range(n_types)] for _ in range(n_digits)
    ]
    for digit_s, row_s, entries in tab.rows:
        digit, row = int(digit_s), int(row_s)
        values = [int(x) for x in entries.split(";")]
        if digit >= n_digits or row >= n_types or len(values) != n_types:
            raise CertificateError("matrix table inconsistent with system header")
    # fill after validation pass
    for digit_s, row_s, entries in tab.rows:
        mats[int(digit_s)][int(row_s)] = [int(x) for x in entries.split(";")]
    if sec.get_or("dimension") is not None:
        d = int(sec.get("dimension"))
        base = int(sec.get("base"))
        if d == 1:
            translations = [int(x) for x in sec.get("translations")]
        else:
            translations = []
            count = int(sec.get("map-count"))
            for i in range(count):
                translations.append(tuple(int(x) for x in sec.get(f"translation-{i}")))
        spec = validate_ifs(d, base, translations, name=str(sec.get("name")))
        family = coding_matrices(spec)
        stored = tuple(
            tuple(tuple(row) for row in mat) for mat in mats
        )
        rebuilt = tuple(
            tuple(tuple(int(x) for x in row) for row in np.asarray(m))
            for m in family.matrices
        )
        if stored != rebuilt:
            raise CertificateError(
                "stored matrices disagree with the system's coding matrices"
            )
        return family
    from .ifs import family_from_matrices

    return family_from_matrices(mats, name=str(sec.get("name")))


def interior_certificate_document(
    family: CodingFamily, cert: InteriorCertificate
) -> Document:
    doc = Document()
    head = doc.add_section("certificate")
    head.set("kind", "interior")
    head.set("version", __version__)
    _system_blocks(doc, family)
    sec = doc.add_section("interior")
    sec.set("word-length", cert.S)
    sec.set("gamma", cert.gamma)
    sec.set("p-hat", cert.p_hat)
    sec.set("binding-word", "".join(map(str, cert.binding_word)))
    utab = doc.add_table("test-vectors", ("index", "vector"))
    for i, v in enumerate(cert.uset.vectors):
        utab.add(i, ";".join(map(str, v)))
    if cert.condition1 is not None:
        w = cert.condition1
        c1 = doc.add_section("seeding-witness")
        c1.set("row", w.row)
        c1.set("word", "".join(map(str, w.word)))
        c1.set("vector", ";".join(map(str, w.vector)))
        c1.set("attractor-interior-assumed", w.attractor_interior_assumed)
    wtab = doc.add_table("witness-map", ("word-rank", "choices"))
    for rank, choices in enumerate(cert.witness_map):
        wtab.add(rank, ";".join(map(str, choices)))
    return doc


def _interior_from_document(doc: Document) -> tuple[CodingFamily, InteriorCertificate]:
    family = _family_from_document(doc)
    sec = doc.section("interior")
    vectors = []
    for _, vec_s in doc.table("test-vectors").rows:
        vectors.append(tuple(int(x) for x in vec_s.split(";")))
    uset = VectorFamily(tuple(vectors))
    gamma = sec.get("gamma")
    if isinstance(gamma, int):
        gamma = Fraction(gamma)
    if not isinstance(gamma, Fraction):
        raise CertificateError(f"gamma must be rational, got {gamma!r}")
    condition1 = None
    if doc.has("seeding-witness"):
        c1 = doc.section("seeding-witness")
        condition1 = RowDominationWitness(
            row=int(c1.get("row")),
            word=tuple(int(ch) for ch in str(c1.get("word"))),
            vector=tuple(int(x) for x in str(c1.get("vector")).split(";")),
            attractor_interior_assumed=bool(c1.get("attractor-interior-assumed")),
        )
    witness_map = tuple(
        tuple(int(x) for x in choices.split(";"))
        for _, choices in doc.table("witness-map").rows
    )
    cert = InteriorCertificate(
        uset=uset,
        S=int(sec.get("word-length")),
        gamma=gamma,
        p_hat=float(sec.get("p-hat")),
        binding_word=tuple(int(ch) for ch in str(sec.get("binding-word"))),
        witness_map=witness_map,
        condition1=condition1,
    )
    return family, cert


def typicality_certificate_document(
    family: CodingFamily, cert: TypicalityCertificate
) -> Document:
    doc = Document()
    head = doc.add_section("certificate")
    head.set("kind", "typicality")
    head.set("version", __version__)
    _system_blocks(doc, family)
    sec = doc.add_section("typicality")
    sec.set("verdict", cert.verdict)
    sec.set("tol", cert.tol)
    sec.set("search-length", cert.search_len)
    sec.set(
        "pinching-word",
        None
        if cert.pinching_word is None
        else "".join(map(str, cert.pinching_word)),
    )
    sec.set(
        "eigenvalue-moduli",
        None if cert.eigenvalue_moduli is None else tuple(cert.eigenvalue_moduli),
    )
    sec.set(
        "twisting-word",
        None
        if cert.twisting_word is None
        else "".join(map(str, cert.twisting_word)),
    )
    sec.set(
        "determinants",
        None if cert.determinants is None else tuple(cert.determinants),
    )
    sec.set("reason", cert.reason)
    return doc


def _typicality_from_document(
    doc: Document,
) -> tuple[CodingFamily, TypicalityCertificate]:
    family = _family_from_document(doc)
    sec = doc.section("typicality")

    def opt_word(key: str) -> tuple[int, ...] | None:
        raw = sec.get(key)
        return None if raw is None else tuple(int(ch) for ch in str(raw))

    def opt_floats(key: str) -> tuple[float, ...] | None:
        raw = sec.get(key)
        return None if raw is None else tuple(float(x) for x in raw)

    cert = TypicalityCertificate(
        verdict=str(sec.get("verdict")),
        tol=float(sec.get("tol")),
        search_len=int(sec.get("search-length")),
        pinching_word=opt_word("pinching-word"),
        eigenvalue_moduli=opt_floats("eigenvalue-moduli"),
        twisting_word=opt_word("twisting-word"),
        determinants=opt_floats("determinants"),
        reason=str(sec.get("reason")),
    )
    return family, cert


def bracket_certificate_document(
    family: CodingFamily, kind: str, length: int, bracket: Bracket
) -> Document:
    if kind not in ("lyapunov", "lsr"):
        raise ValidationError(f"unknown bracket kind {kind!r}", code="certificate")
    doc = Document()
    head = doc.add_section("certificate")
    head.set("kind", kind)
    head.set("version", __version__)
    _system_blocks(doc, family)
    sec = _bracket_section(doc, kind, bracket)
    sec.set("word-length", length)
    return doc


def verify_certificate_document(doc: Document) -> str:
    """Replay a serialized certificate; returns its kind on success and
    raises CertificateError when any inequality fails to reproduce."""
    head = doc.section("certificate")
    kind = str(head.get("kind"))
    if kind == "interior":
        family, cert = _interior_from_document(doc)
        if not verify_interior(family, cert):
            raise CertificateError("interior certificate failed replay")
        return kind
    if kind == "typicality":
        family, cert = _typicality_from_document(doc)
        if not verify_typicality(family, cert):
            raise CertificateError("typicality certificate failed replay")
        return kind
    if kind in ("lyapunov", "lsr"):
        family = _family_from_document(doc)
        sec = doc.section(kind)
        length = int(sec.get("word-length"))
        fresh = (
            lyapunov_bracket(family, length)
            if kind == "lyapunov"
            else lsr_bracket(family, length)
        )
        if fresh.lo != sec.get("lo") or fresh.hi != sec.get("hi"):
            raise CertificateError(
                f"{kind} bracket does not reproduce: stored "
                f"[{sec.get('lo')}, {sec.get('hi')}], fresh [{fresh.lo}, {fresh.hi}]"
            )
        if bool(sec.get("exact")) != fresh.exact:
            raise CertificateError(f"{kind} exactness flag does not reproduce")
        return kind
    raise CertificateError(f"unknown certificate kind {kind!r}")


def report_document(report: PhaseReport) -> Document:
    doc = Document()
    head = doc.add_section("report")
    head.set("kind", "phase-report")
    head.set("version", __version__)
    head.set("seed", report.seed)
    _system_blocks(doc, report.family)

    bud = doc.add_section("budgets")
    for key in (
        "bracket_length",
        "lsr_length",
        "pressure_length",
        "goodness_length",
        "interior_length",
        "mc_steps",
        "depth",
        "node_budget",
    ):
        bud.set(key.replace("_", "-"), getattr(report.budgets, key))

    good = doc.add_section("goodness")
    good.set("good", report.goodness.good)
    good.set("allowable", report.goodness.allowable)
    good.set(
        "positive-word",
        None
        if report.goodness.positive_word is None
        else "".join(map(str, report.goodness.positive_word)),
    )
    good.set("search-length", report.goodness.max_length_searched)

    lam = _bracket_section(doc, "lyapunov", report.lyapunov)
    lam.set("word-length", report.budgets.bracket_length)
    mc = doc.add_section("lyapunov-mc")
    mc.set("value", report.mc.value)
    mc.set("std-error", report.mc.std_error)
    mc.set("steps", report.mc.steps)
    mc.set("seed", report.mc.seed)
    mc.set("renorm-interval", report.mc.renorm_interval)
    mc.set("inside-bracket", report.lyapunov.contains(report.mc.value))

    rho = _bracket_section(doc, "lsr", report.lsr)
    rho.set("word-length", report.budgets.lsr_length)

    th = doc.add_section("thresholds")
    th.set("p-extinct", report.p_extinct)
    th.set("p-lebesgue-lo", report.p_lebesgue.lo)
    th.set("p-lebesgue-hi", report.p_lebesgue.hi)
    th.set("p-lebesgue-exact", report.p_lebesgue.exact)
    th.set("p-interior-empty-lo", report.p_interior_empty.lo)
    th.set("p-interior-empty-hi", report.p_interior_empty.hi)
    th.set("p-interior-empty-exact", report.p_interior_empty.exact)
    th.set("p-hat", report.p_hat)

    ii = doc.add_section("interesting-interval")
    ii.set("verdict", report.interesting.verdict)
    ii.set("certified-lo", report.interesting.certified[0])
    ii.set("certified-hi", report.interesting.certified[1])
    ii.set("hull-lo", report.interesting.hull[0])
    ii.set("hull-hi", report.interesting.hull[1])

    for block in typicality_certificate_document(
        report.family, report.typicality
    ).blocks:
        if isinstance(block, Section) and block.name in ("certificate", "system"):
            continue
        if not isinstance(block, Section) and block.name == "matrices":
            continue
        doc.blocks.append(block)

    cs = doc.add_section("colsum-shortcut")
    cs.set("applies", report.colsum.applies)
    cs.set("threshold", report.colsum.threshold)
    cs.set("word-length", report.colsum.length)
    cs.set("min-col-sum", report.colsum.min_col_sum)

    if report.interior is not None:
        for block in interior_certificate_document(
            report.family, report.interior
        ).blocks:
            if isinstance(block, Section) and block.name in ("certificate", "system"):
                continue
            if not isinstance(block, Section) and block.name == "matrices":
                continue
            doc.blocks.append(block)

    cl = doc.add_section("classification")
    cl.set("p", report.p_query)
    cl.set("class", report.classification)
    cl.set("dimension", report.dimension)
    return doc
