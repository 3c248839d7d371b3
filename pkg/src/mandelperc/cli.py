"""Command-line interface.

Subcommands wrap the library one analysis apiece and `report` assembles
them all.  Systems come from `--example NAME` or `--config PATH` (TOML,
schema documented in the config module); flags override the configured
probability, seed, and budgets.  Exit codes: 0 success, 2 validation or
usage error, 3 budget refusal, 4 certificate verification failure, 1 any
other internal inconsistency.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .bounds import (
    critical_probabilities,
    lsr_bracket,
    lyapunov_bracket,
    lyapunov_mc,
)
from .branching import (
    EnvWord,
    dimension_estimate,
    extinction_iterate,
    simulate_tree,
    coverage_stats,
)
from .config import RunConfig, default_budgets, load_config
from .errors import (
    BudgetError,
    CertificateError,
    ConsistencyError,
    MandelpercError,
    ValidationError,
)
from .examples import example_family
from .ifs import CodingFamily, goodness_check
from .interior import (
    VectorFamily,
    colsum_interior_threshold,
    dominance_matrices,
    interior_threshold,
)
from .pressure import (
    pressure_asymptote,
    pressure_curve,
    pressure_right_derivative,
    typicality_check,
)
from .render import render_coverage, render_multiplicity
from .report import (
    bracket_certificate_document,
    build_report,
    interior_certificate_document,
    report_document,
    typicality_certificate_document,
    verify_certificate_document,
)
from .serialize import Document

_WORD_ENUM_CAP = 20_000_000


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--example", metavar="NAME", help="named built-in system")
    source.add_argument("--config", metavar="PATH", help="TOML config file")
    common.add_argument("--threads", type=int, default=1, help="worker threads")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--p", type=float, help="override the retention probability")
    for flag, help_text in (
        ("--bracket-length", "word length for the growth-rate bracket"),
        ("--lsr-length", "word length for the lower-spectral-radius bracket"),
        ("--pressure-length", "word length for pressure sampling"),
        ("--goodness-length", "positivity search depth"),
        ("--interior-length", "max word length for dominance constants"),
        ("--mc-steps", "Monte-Carlo cocycle steps"),
        ("--depth", "tree simulation depth"),
        ("--node-budget", "tree expansion guard"),
    ):
        common.add_argument(flag, type=int, help=help_text)

    parser = argparse.ArgumentParser(
        prog="mandelperc",
        description="Percolation phase diagrams of integer self-similar sets.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("matrices", parents=[common], help="print the coding matrices")
    sub.add_parser(
        "goodness", parents=[common], help="allowability and positivity check"
    )

    lya = sub.add_parser(
        "lyapunov", parents=[common], help="growth-rate bracket and MC estimate"
    )
    lya.add_argument("--mc", action="store_true", help="add a Monte-Carlo estimate")
    lya.add_argument("--certificate", metavar="PATH", help="write a replayable witness")

    lsr = sub.add_parser(
        "lsr", parents=[common], help="lower-spectral-radius bracket"
    )
    lsr.add_argument("--certificate", metavar="PATH", help="write a replayable witness")

    pre = sub.add_parser("pressure", parents=[common], help="pressure curve samples")
    pre.add_argument(
        "--q", type=float, action="append", metavar="Q", help="extra grid point"
    )

    typ = sub.add_parser(
        "typicality", parents=[common], help="pinching and twisting witnesses"
    )
    typ.add_argument(
        "--search-length", type=int, default=2, help="witness word length bound"
    )
    typ.add_argument("--certificate", metavar="PATH", help="write a replayable witness")

    sim = sub.add_parser(
        "simulate", parents=[common], help="sample one percolation tree"
    )
    sim.add_argument(
        "--dimension", action="store_true", help="box-count dimension estimate"
    )

    ext = sub.add_parser(
        "extinction", parents=[common], help="extinction probability by depth"
    )
    ext.add_argument(
        "--env",
        default="sampled",
        help="environment: sampled | fixed:DIGITS | periodic:DIGITS",
    )

    inter = sub.add_parser(
        "interior", parents=[common], help="interior-existence threshold"
    )
    inter.add_argument(
        "--uset", metavar="VECTORS", help="test vectors, e.g. '1,0,1,0;0,1,0,1'"
    )
    inter.add_argument("--certificate", metavar="PATH", help="write a replayable witness")

    rep = sub.add_parser("report", parents=[common], help="full phase report")
    rep.add_argument("--uset", metavar="VECTORS", help="test vectors for the interior module")
    rep.add_argument("--out", metavar="PATH", help="also write the document to a file")

    ver = sub.add_parser("verify-certificate", help="replay a serialized witness")
    ver.add_argument("path", help="certificate document to verify")

    ren = sub.add_parser("render", parents=[common], help="write a PGM/PPM image")
    ren.add_argument("--out", required=True, metavar="PATH", help="output image file")
    ren.add_argument("--level", type=int, required=True, help="approximation level")
    ren.add_argument(
        "--format", choices=("pgm", "ppm"), default="pgm", help="image format"
    )
    ren.add_argument(
        "--multiplicity",
        action="store_true",
        help="deterministic cylinder-multiplicity render instead of a sample",
    )
    return parser


def _load(args: argparse.Namespace) -> tuple[CodingFamily, RunConfig]:
    """Resolve the system and effective run parameters from flags."""
    if args.config:
        config = load_config(args.config)
        family = None
    elif args.example:
        try:
            family = example_family(args.example)
        except KeyError:
            from .examples import FAMILY_NAMES

            raise ValidationError(
                f"unknown example {args.example!r}; known: {FAMILY_NAMES}",
                code="example",
            ) from None
        config = RunConfig(
            spec=family.spec,
            budgets=default_budgets(family.n_digits),
        )
    else:
        raise ValidationError(
            "select a system with --example NAME or --config PATH", code="config"
        )
    if args.seed is not None:
        if args.seed < 0:
            raise ValidationError("seed must be nonnegative", code="config")
        config = replace(config, seed=args.seed)
    if args.p is not None:
        if not 0.0 < args.p <= 1.0:
            raise ValidationError(f"p must be in (0, 1], got {args.p}", code="prob")
        config = replace(config, p=args.p)
    budgets = config.budgets
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
        value = getattr(args, key)
        if value is not None:
            if value < 1:
                raise ValidationError(
                    f"budget {key} must be a positive integer", code="config"
                )
            budgets = replace(budgets, **{key: value})
    config = replace(config, budgets=budgets)
    if family is None:
        from .ifs import coding_matrices

        family = coding_matrices(config.spec)
    _guard_enumerations(family.n_digits, config)
    if getattr(args, "threads", 1) is not None and args.threads < 1:
        raise ValidationError("threads must be >= 1", code="config")
    return family, config


def _guard_enumerations(n_digits: int, config: RunConfig) -> None:
    """Hard guard against word enumerations that cannot finish."""
    b = config.budgets
    for label, length in (
        ("bracket_length", b.bracket_length),
        ("lsr_length", b.lsr_length),
        ("pressure_length", b.pressure_length),
        ("interior_length", b.interior_length),
    ):
        if n_digits**length > _WORD_ENUM_CAP:
            raise BudgetError(
                f"{label} = {length} needs {n_digits}**{length} words",
                required=f"n_digits**length <= {_WORD_ENUM_CAP}",
            )


def _need_spec(family: CodingFamily, what: str) -> None:
    if family.spec is None:
        raise ValidationError(
            f"{what} needs a geometric system, not a bare matrix family",
            code="spec",
        )


def _need_p(config: RunConfig) -> float:
    if config.p is None:
        raise ValidationError(
            "this command needs a probability: set p in the config or pass --p",
            code="prob",
        )
    return config.p


def _parse_uset(text: str) -> VectorFamily:
    try:
        vectors = tuple(
            tuple(int(x) for x in part.split(",")) for part in text.split(";")
        )
    except ValueError:
        raise ValidationError(
            f"cannot parse test vectors from {text!r}; "
            "expected '1,0,1,0;0,1,0,1'",
            code="uset",
        ) from None
    return VectorFamily(vectors)


def _parse_env(text: str, family: CodingFamily, depth: int, seed: int) -> EnvWord:
    if text == "sampled":
        return EnvWord.sampled(family.n_digits, depth, seed)
    for prefix, make in (
        ("fixed:", lambda digits: EnvWord.fixed(digits)),
        ("periodic:", lambda digits: EnvWord.periodic(digits, depth)),
    ):
        if text.startswith(prefix):
            raw = text[len(prefix) :]
            parts = raw.split(",") if "," in raw else list(raw)
            try:
                digits = [int(x) for x in parts if x != ""]
            except ValueError:
                raise ValidationError(
                    f"bad environment digits {raw!r}", code="env-digit"
                ) from None
            if not digits:
                raise ValidationError("environment is empty", code="env-empty")
            return make(digits)
    raise ValidationError(
        f"unknown environment {text!r}; use sampled, fixed:DIGITS, or "
        "periodic:DIGITS",
        code="env",
    )


def _write_document(doc: Document, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(doc.to_text())


def _print_bracket(label: str, bracket) -> None:
    if bracket.exact:
        print(f"{label} = {bracket.lo:.12g} (exact)")
    else:
        print(f"{label} in [{bracket.lo:.12g}, {bracket.hi:.12g}]")
    print(f"  lower witness: {bracket.lo_witness}")
    print(f"  upper witness: {bracket.hi_witness}")


def _cmd_matrices(args) -> int:
    family, _ = _load(args)
    spec = family.spec
    if spec is not None:
        flat = (
            ", ".join(str(t[0]) for t in spec.translations)
            if spec.d == 1
            else ", ".join(str(tuple(t)) for t in spec.translations)
        )
        print(
            f"system {spec.name or '(unnamed)'}: dimension {spec.d}, "
            f"base {spec.L}, maps {spec.M}"
        )
        print(f"translations: {flat}")
        print(f"basic cells: {' '.join(str(b) for b in family.basics.cells)}")
    else:
        print(f"system {family.name or '(unnamed)'}: bare matrix family")
    print(f"types {family.N}, digits {family.n_digits}")
    for digit, mat in enumerate(family.matrices):
        print(f"digit {digit}:")
        for row in np.asarray(mat):
            print("  " + " ".join(str(int(x)) for x in row))
    return 0


def _cmd_goodness(args) -> int:
    family, config = _load(args)
    cert = goodness_check(family, config.budgets.goodness_length)
    print(f"allowable per digit: {' '.join(str(a) for a in cert.allowable)}")
    if cert.positive_word is None:
        print(f"no strictly positive product up to length {cert.max_length_searched}")
    else:
        word = "".join(map(str, cert.positive_word))
        print(f"strictly positive product at word {word or '(empty)'}")
    print(f"good: {cert.good}")
    return 0


def _cmd_lyapunov(args) -> int:
    family, config = _load(args)
    m = config.budgets.bracket_length
    bracket = lyapunov_bracket(family, m, threads=args.threads)
    print(f"word length {m}")
    _print_bracket("lambda", bracket)
    if args.mc:
        est = lyapunov_mc(family, config.budgets.mc_steps, seed=config.seed)
        inside = bracket.contains(est.value)
        print(
            f"mc estimate {est.value:.12g} +- {est.std_error:.3g} "
            f"({est.steps} steps, seed {est.seed}, inside bracket: {inside})"
        )
    if args.certificate:
        doc = bracket_certificate_document(family, "lyapunov", m, bracket)
        _write_document(doc, args.certificate)
        print(f"wrote certificate {args.certificate}")
    return 0


def _cmd_lsr(args) -> int:
    family, config = _load(args)
    n = config.budgets.lsr_length
    bracket = lsr_bracket(family, n, threads=args.threads)
    print(f"word length {n}")
    _print_bracket("rho-check", bracket)
    if args.certificate:
        doc = bracket_certificate_document(family, "lsr", n, bracket)
        _write_document(doc, args.certificate)
        print(f"wrote certificate {args.certificate}")
    return 0


def _cmd_pressure(args) -> int:
    family, config = _load(args)
    n = config.budgets.pressure_length
    curve = pressure_curve(family, n, q_grid=args.q, threads=args.threads)
    print(f"word length {n}, norm {curve.norm}")
    print("q value")
    for q, value in curve.samples:
        print(f"{q:.6g} {value:.12g}")
    print(f"right-derivative estimate: {pressure_right_derivative(family, n):.12g}")
    print(f"asymptote slope estimate: {pressure_asymptote(family, n):.12g}")
    return 0


def _cmd_typicality(args) -> int:
    family, _ = _load(args)
    cert = typicality_check(family, search_len=args.search_length)
    print(f"verdict: {cert.verdict}")
    if cert.pinching_word is not None:
        word = "".join(map(str, cert.pinching_word))
        moduli = ", ".join(f"{x:.6g}" for x in cert.eigenvalue_moduli)
        print(f"pinching word {word or '(empty)'}: eigenvalue moduli {moduli}")
    if cert.twisting_word is not None:
        word = "".join(map(str, cert.twisting_word))
        dets = ", ".join(f"{x:.6g}" for x in cert.determinants)
        print(f"twisting word {word or '(empty)'}: determinants {dets}")
    if cert.reason:
        print(f"reason: {cert.reason}")
    if args.certificate:
        if not cert.certified:
            raise CertificateError("no typicality certificate to write")
        doc = typicality_certificate_document(family, cert)
        _write_document(doc, args.certificate)
        print(f"wrote certificate {args.certificate}")
    return 0


def _cmd_simulate(args) -> int:
    family, config = _load(args)
    _need_spec(family, "simulation")
    p = _need_p(config)
    real = simulate_tree(
        family.spec,
        p,
        config.budgets.depth,
        seed=config.seed,
        node_budget=config.budgets.node_budget,
    )
    print(f"p {p}, depth {real.depth}, seed {config.seed}")
    for level, count in enumerate(real.retained_counts):
        print(f"level {level}: {count}")
    print(f"survived: {real.survived}")
    if real.survived:
        stats = coverage_stats(real, family)
        print(f"covered cells at depth {stats.depth}: {stats.covered[-1]}")
        print(f"lebesgue proxy: {stats.lebesgue_proxy[-1]:.12g}")
        print(f"largest fully covered block side: {stats.interior_proxy}")
    if args.dimension:
        estimate = dimension_estimate(real)
        if estimate is None:
            print("dimension estimate: n/a (died too early)")
        else:
            print(f"dimension estimate: {estimate:.6g}")
    return 0


def _cmd_extinction(args) -> int:
    family, config = _load(args)
    p = _need_p(config)
    depth = args.depth if args.depth is not None else 40
    env = _parse_env(args.env, family, depth, config.seed)
    state = extinction_iterate(family, p, env)
    print(f"p {p}, depth {state.depth}, environment {env.source}")
    for i, value in enumerate(state.s):
        print(f"type {i}: extinction {value:.12g}")
    print(f"max survival probability: {1.0 - min(state.s):.12g}")
    return 0


def _cmd_interior(args) -> int:
    family, config = _load(args)
    uset = config.uset
    if args.uset:
        uset = _parse_uset(args.uset)
    max_s = config.budgets.interior_length
    colsum = colsum_interior_threshold(family, max_s)
    if colsum.applies:
        print(
            f"all-ones shortcut: min column sum {colsum.min_col_sum} at length "
            f"{colsum.length}, threshold {colsum.threshold:.12g}"
        )
    else:
        print("all-ones shortcut: not applicable")
    if uset is None:
        print("no test vectors given (config uset or --uset); stopping here")
        return 0
    cert = interior_threshold(family, uset, max_s, threads=args.threads)
    if cert is None:
        print(f"no dominance certificate up to word length {max_s}")
        if args.certificate:
            raise CertificateError("no interior certificate to write")
        return 0
    print(f"dominance constant c({cert.S}) = {cert.gamma} > 1")
    print(f"interior threshold p-hat = {cert.p_hat:.12g}")
    print(f"binding word: {''.join(map(str, cert.binding_word))}")
    if cert.condition1 is not None:
        w = cert.condition1
        print(
            f"seeding witness: row {w.row} of word "
            f"{''.join(map(str, w.word))} dominates vector {w.vector}"
        )
    if config.p is not None:
        dom = dominance_matrices(family, uset, cert.S, config.p)
        if dom is None:
            print(f"expectation-matrix witnesses at p = {config.p}: none")
        else:
            print(
                f"expectation-matrix witnesses at p = {config.p}: "
                f"{len(dom.matrices)} matrices, gamma' ~ {float(dom.gamma_prime):.12g}"
            )
    if args.certificate:
        doc = interior_certificate_document(family, cert)
        _write_document(doc, args.certificate)
        print(f"wrote certificate {args.certificate}")
    return 0


def _cmd_report(args) -> int:
    family, config = _load(args)
    _need_spec(family, "a phase report")
    if args.uset:
        config = replace(config, uset=_parse_uset(args.uset))
    report = build_report(config, threads=args.threads)
    doc = report_document(report)
    text = doc.to_text()
    sys.stdout.write(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def _cmd_verify_certificate(args) -> int:
    try:
        with open(args.path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise ValidationError(
            f"certificate file not found: {args.path}", code="document"
        ) from None
    doc = Document.parse(text)
    kind = verify_certificate_document(doc)
    print(f"ok: {kind} certificate verified")
    return 0


def _cmd_render(args) -> int:
    family, config = _load(args)
    _need_spec(family, "rendering")
    if args.multiplicity:
        image = render_multiplicity(family, args.level, args.format)
    else:
        p = _need_p(config)
        real = simulate_tree(
            family.spec,
            p,
            args.level,
            seed=config.seed,
            node_budget=config.budgets.node_budget,
        )
        image = render_coverage(real, args.level, args.format)
    with open(args.out, "wb") as fh:
        fh.write(image)
    _, size, _ = image.split(b"\n", 2)
    width, height = size.decode().split()
    print(f"wrote {args.out} ({width}x{height} {args.format})")
    return 0


_COMMANDS = {
    "matrices": _cmd_matrices,
    "goodness": _cmd_goodness,
    "lyapunov": _cmd_lyapunov,
    "lsr": _cmd_lsr,
    "pressure": _cmd_pressure,
    "typicality": _cmd_typicality,
    "simulate": _cmd_simulate,
    "extinction": _cmd_extinction,
    "interior": _cmd_interior,
    "report": _cmd_report,
    "verify-certificate": _cmd_verify_certificate,
    "render": _cmd_render,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetError as exc:
        print(f"budget refused: {exc} (need {exc.required})", file=sys.stderr)
        return 3
    except CertificateError as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        return 4
    except (ConsistencyError, MandelpercError) as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
