"""TOML configuration for systems, budgets, and run parameters.

Schema (all analysis knobs optional):

    name = "gasket"            # label
    dimension = 1              # d
    base = 2                   # L
    translations = [0, 1, 2]   # integers (1-D) or arrays of d integers
    p = 0.7                    # probability to classify in reports
    seed = 2024                # master seed for randomized work
    uset = [[1, 1]]            # test vectors for the interior module

    [budgets]
    bracket_length = 14        # word length for the growth-rate bracket
    lsr_length = 8             # word length for the lower-spectral-radius bracket
    pressure_length = 10       # word length for pressure sampling
    goodness_length = 6        # irreducibility/allowability search depth
    interior_length = 8        # max word length for dominance constants
    mc_steps = 200000          # Monte-Carlo cocycle steps
    depth = 12                 # tree simulation depth
    node_budget = 2000000      # tree expansion guard

Budget defaults shrink automatically for systems with many subdivision
digits so that default runs stay within enumeration limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

from .errors import ValidationError
from .ifs import IfsSpec, validate_ifs
from .interior import VectorFamily

_BUDGET_KEYS = {
    "bracket_length",
    "lsr_length",
    "pressure_length",
    "goodness_length",
    "interior_length",
    "mc_steps",
    "depth",
    "node_budget",
}
_TOP_KEYS = {"name", "dimension", "base", "translations", "p", "seed", "uset", "budgets"}


@dataclass(frozen=True)
class Budgets:
    bracket_length: int
    lsr_length: int
    pressure_length: int
    goodness_length: int = 6
    interior_length: int = 8
    mc_steps: int = 200_000
    depth: int = 12
    node_budget: int = 2_000_000


def _capped_length(n_digits: int, cap: int, node_limit: int) -> int:
    """Largest length <= cap whose word count stays within node_limit."""
    if n_digits <= 1:
        return cap
    return max(1, min(cap, int(math.log(node_limit) / math.log(n_digits))))


def default_budgets(n_digits: int) -> Budgets:
    return Budgets(
        bracket_length=_capped_length(n_digits, 12, 300_000),
        lsr_length=_capped_length(n_digits, 8, 50_000),
        pressure_length=_capped_length(n_digits, 10, 100_000),
        interior_length=_capped_length(n_digits, 8, 20_000),
    )


@dataclass(frozen=True)
class RunConfig:
    spec: IfsSpec
    budgets: Budgets
    p: float | None = None
    seed: int = 2024
    uset: VectorFamily | None = None


def _expect(table: dict, key: str, kinds: tuple[type, ...], where: str):
    if key not in table:
        raise ValidationError(f"{where}: missing required key {key!r}", code="config")
    value = table[key]
    if not isinstance(value, kinds) or isinstance(value, bool):
        raise ValidationError(
            f"{where}: key {key!r} has type {type(value).__name__}", code="config"
        )
    return value


def config_from_table(table: dict, where: str = "config") -> RunConfig:
    unknown = set(table) - _TOP_KEYS
    if unknown:
        raise ValidationError(
            f"{where}: unknown keys {sorted(unknown)}", code="config"
        )
    name = table.get("name", "")
    if not isinstance(name, str):
        raise ValidationError(f"{where}: name must be a string", code="config")
    dimension = _expect(table, "dimension", (int,), where)
    base = _expect(table, "base", (int,), where)
    translations = _expect(table, "translations", (list,), where)
    spec = validate_ifs(dimension, base, translations, name=name)

    budgets = default_budgets(spec.n_digits)
    raw_budgets = table.get("budgets", {})
    if not isinstance(raw_budgets, dict):
        raise ValidationError(f"{where}: budgets must be a table", code="config")
    unknown = set(raw_budgets) - _BUDGET_KEYS
    if unknown:
        raise ValidationError(
            f"{where}: unknown budget keys {sorted(unknown)}", code="config"
        )
    for key, value in raw_budgets.items():
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise ValidationError(
                f"{where}: budget {key!r} must be a positive integer", code="config"
            )
        budgets = replace(budgets, **{key: value})

    p = table.get("p")
    if p is not None:
        if isinstance(p, bool) or not isinstance(p, (int, float)):
            raise ValidationError(f"{where}: p must be a number", code="config")
        p = float(p)
        if not 0 < p <= 1:
            raise ValidationError(f"{where}: p must be in (0, 1]", code="config")

    seed = table.get("seed", 2024)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError(f"{where}: seed must be a nonnegative integer", code="config")

    uset = None
    raw_uset = table.get("uset")
    if raw_uset is not None:
        if not isinstance(raw_uset, list) or not raw_uset:
            raise ValidationError(
                f"{where}: uset must be a nonempty list of integer vectors",
                code="config",
            )
        vectors = []
        for v in raw_uset:
            if not isinstance(v, list) or not all(
                isinstance(x, int) and not isinstance(x, bool) for x in v
            ):
                raise ValidationError(
                    f"{where}: uset entries must be integer lists, got {v!r}",
                    code="config",
                )
            vectors.append(tuple(v))
        uset = VectorFamily(tuple(vectors))

    return RunConfig(spec=spec, budgets=budgets, p=p, seed=seed, uset=uset)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            table = tomllib.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}", code="config")
    except tomllib.TOMLDecodeError as exc:
        raise ValidationError(f"{path}: {exc}", code="config")
    return config_from_table(table, where=path)
