"""Coalition games over bitmask-indexed coalitions.

A coalition of ``n`` agents is encoded as an integer ``1 <= c <= 2**n - 1``
where bit ``i-1`` set means agent ``a_i`` is a member.  This single
convention fixes the variable order of every downstream representation
(BILP columns, QUBO variables, spins, qubits).

All types in this module are immutable after construction and safe to
share across threads.  Instance generation is a pure function of
``(n, spec, seed)``: it uses a single seeded PCG64 stream (numpy's
``default_rng``) and consumes per-coalition draws in coalition-index
order, so games are reproducible across platforms.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InvalidStructureError, ParseError, ResourceLimitError, SchemaError

# Hard ceiling for sampling: 2^20 - 1 coalition values is the largest table
# any bundled solver can consume (the subset DP stops at 20 agents too).
GENERATE_MAX_AGENTS = 20

# Canonical order of the ten benchmark families (also the "all" order in the CLI).
DISTRIBUTION_KINDS = (
    "abu",
    "abn",
    "mu",
    "normal",
    "sva_beta",
    "weibull",
    "rayleigh",
    "wrc",
    "f",
    "laplace",
)

# Default parameterizations.  The family names are standard benchmark
# vocabulary; the exact shapes below are this artifact's documented
# conventions, all overridable through DistributionSpec.params.
# Parameters named *_var are variances (scale = sqrt(var)).
_DEFAULT_PARAMS: dict[str, dict[str, float]] = {
    "abu": {"agent_low": 0.0, "agent_high": 10.0, "coalition_low": 0.0, "coalition_high": 10.0},
    "abn": {"agent_mean": 10.0, "agent_var": 0.01, "coalition_mean": 0.0, "coalition_var": 0.01},
    "mu": {"high_per_agent": 10.0, "spike_prob": 0.2, "spike_high": 50.0},
    "normal": {"mean_per_agent": 10.0, "var": 0.01},
    "sva_beta": {"scale": 10.0, "alpha": 2.0, "beta": 5.0, "valuable_bonus": 9.0},
    "weibull": {"scale": 10.0},
    "rayleigh": {"scale_per_sqrt_size": 10.0},
    "wrc": {"weight_low": 0.0, "weight_high": 1.0, "chi_df": 4.0},
    "f": {"dfnum": 5.0, "dfden": 2.0, "resample_above": 1000.0},
    "laplace": {"loc_per_agent": 10.0, "scale": math.sqrt(0.1)},
}


def n_coalitions(n: int) -> int:
    """Number of nonempty coalitions of n agents."""
    return (1 << n) - 1


def coalition_members(index: int, n: int) -> set[int]:
    """Decode a coalition index into the set of 1-based agent ids.

    Agent ``a_i`` is a member iff bit ``i-1`` of ``index`` is set.
    """
    if not 1 <= index <= n_coalitions(n):
        raise ConfigError(f"coalition index {index} out of range 1..{n_coalitions(n)} for n={n}")
    return {i + 1 for i in range(n) if index >> i & 1}


@dataclass(frozen=True)
class DistributionSpec:
    """A named value distribution plus its (overridable) parameters."""

    kind: str
    params: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        kind = self.kind.lower().replace("-", "_")
        if kind not in DISTRIBUTION_KINDS:
            raise ConfigError(
                f"unknown distribution kind {self.kind!r}; expected one of {', '.join(DISTRIBUTION_KINDS)}"
            )
        object.__setattr__(self, "kind", kind)
        for key, val in self.params.items():
            if key not in _DEFAULT_PARAMS[kind]:
                raise ConfigError(f"unknown parameter {key!r} for distribution {kind!r}")
            if not math.isfinite(float(val)):
                raise ConfigError(f"parameter {key!r} must be finite, got {val!r}")

    def resolved_params(self) -> dict[str, float]:
        return {**_DEFAULT_PARAMS[self.kind], **{k: float(v) for k, v in self.params.items()}}


@dataclass(frozen=True)
class CoalitionGame:
    """A characteristic-function game: n agents and one value per nonempty coalition."""

    n: int
    values: dict[int, float]
    dist_label: str | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.n, int) or self.n < 1:
            raise SchemaError(f"agent count must be an integer >= 1, got {self.n!r}")
        expected = set(range(1, n_coalitions(self.n) + 1))
        keys = set(self.values)
        if keys != expected:
            missing = sorted(expected - keys)[:5]
            extra = sorted(keys - expected)[:5]
            raise SchemaError(
                f"value map must cover coalition indices 1..{n_coalitions(self.n)} exactly"
                f" (missing {missing}, unexpected {extra})"
            )
        clean = {}
        for key in sorted(self.values):
            val = float(self.values[key])
            if not math.isfinite(val):
                raise SchemaError(f"coalition {key} has non-finite value {val!r}")
            clean[key] = val
        object.__setattr__(self, "values", clean)

    @property
    def grand_index(self) -> int:
        return n_coalitions(self.n)


@dataclass(frozen=True)
class CoalitionStructure:
    """A partition of the agent set, stored as an ascending tuple of coalition indices."""

    blocks: tuple[int, ...]

    def __init__(self, blocks) -> None:
        object.__setattr__(self, "blocks", tuple(sorted(int(b) for b in blocks)))

    def validate(self, n: int) -> None:
        full = n_coalitions(n)
        union = 0
        popcount = 0
        for block in self.blocks:
            if not 1 <= block <= full:
                raise InvalidStructureError(f"block {block} is not a coalition index for n={n}")
            union |= block
            popcount += block.bit_count()
        if union != full or popcount != n:
            raise InvalidStructureError(
                f"blocks {list(self.blocks)} do not partition the {n}-agent set"
            )


def cs_value(game: CoalitionGame, cs: CoalitionStructure) -> float:
    """Total value of a coalition structure: the sum of its blocks' values."""
    cs.validate(game.n)
    return sum(game.values[block] for block in cs.blocks)


def _sample_abu(rng, n, sizes, p):
    base = rng.uniform(p["agent_low"], p["agent_high"], size=n)
    values = {}
    for c in range(1, n_coalitions(n) + 1):
        members = [i for i in range(n) if c >> i & 1]
        bonus = rng.uniform(p["coalition_low"], p["coalition_high"], size=len(members))
        values[c] = float(base[members].sum() + bonus.sum())
    return values


def _sample_abn(rng, n, sizes, p):
    base = rng.normal(p["agent_mean"], math.sqrt(p["agent_var"]), size=n)
    values = {}
    for c in range(1, n_coalitions(n) + 1):
        members = [i for i in range(n) if c >> i & 1]
        bonus = rng.normal(p["coalition_mean"], math.sqrt(p["coalition_var"]), size=len(members))
        values[c] = float(base[members].sum() + bonus.sum())
    return values


def _sample_mu(rng, n, sizes, p):
    values = {}
    for c, size in sizes:
        v = rng.uniform(0.0, p["high_per_agent"] * size)
        if rng.uniform() < p["spike_prob"]:
            v += rng.uniform(0.0, p["spike_high"])
        values[c] = float(v)
    return values


def _sample_normal(rng, n, sizes, p):
    sd = math.sqrt(p["var"])
    return {c: float(rng.normal(p["mean_per_agent"] * size, sd)) for c, size in sizes}


def _sample_sva_beta(rng, n, sizes, p):
    values = {}
    for c, size in sizes:
        weight = size + p["valuable_bonus"] * (c & 1)  # agent a1 is the valuable one
        values[c] = float(p["scale"] * rng.beta(p["alpha"], p["beta"]) * weight)
    return values


def _sample_weibull(rng, n, sizes, p):
    return {c: float(p["scale"] * rng.weibull(size)) for c, size in sizes}


def _sample_rayleigh(rng, n, sizes, p):
    return {c: float(rng.rayleigh(p["scale_per_sqrt_size"] * math.sqrt(size))) for c, size in sizes}


def _sample_wrc(rng, n, sizes, p):
    values = {}
    for c, size in sizes:
        w = rng.uniform(p["weight_low"], p["weight_high"])
        values[c] = float(w * size + rng.chisquare(p["chi_df"]))
    return values


def _sample_f(rng, n, sizes, p):
    values = {}
    for c, size in sizes:
        draw = rng.f(p["dfnum"], p["dfden"])
        while draw > p["resample_above"]:
            draw = rng.f(p["dfnum"], p["dfden"])
        values[c] = float(draw * size)
    return values


def _sample_laplace(rng, n, sizes, p):
    return {c: float(rng.laplace(p["loc_per_agent"] * size, p["scale"])) for c, size in sizes}


_SAMPLERS = {
    "abu": _sample_abu,
    "abn": _sample_abn,
    "mu": _sample_mu,
    "normal": _sample_normal,
    "sva_beta": _sample_sva_beta,
    "weibull": _sample_weibull,
    "rayleigh": _sample_rayleigh,
    "wrc": _sample_wrc,
    "f": _sample_f,
    "laplace": _sample_laplace,
}


def generate_game(n: int, spec: DistributionSpec, seed: int) -> CoalitionGame:
    """Sample a benchmark game; deterministic for a fixed (n, spec, seed).

    Draws come from a PCG64 stream seeded with ``seed``.  ABU/ABN first
    draw their per-agent baselines in agent order; every family then
    consumes its per-coalition draws in coalition-index order.
    """
    if not isinstance(n, int) or n < 1:
        raise ConfigError(f"agent count must be an integer >= 1, got {n!r}")
    if n > GENERATE_MAX_AGENTS:
        raise ResourceLimitError(
            f"game generation is limited to {GENERATE_MAX_AGENTS} agents"
            f" ({n_coalitions(GENERATE_MAX_AGENTS)} coalition values), got {n}"
        )
    rng = np.random.default_rng(seed)
    sizes = [(c, c.bit_count()) for c in range(1, n_coalitions(n) + 1)]
    values = _SAMPLERS[spec.kind](rng, n, sizes, spec.resolved_params())
    return CoalitionGame(n=n, values=values, dist_label=spec.kind, seed=seed)


def save_game(game: CoalitionGame, path) -> None:
    """Write a game as JSON (see README for the schema)."""
    doc = {
        "n": game.n,
        "dist": game.dist_label,
        "seed": game.seed,
        "values": {str(c): game.values[c] for c in sorted(game.values)},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_game(path) -> CoalitionGame:
    """Read a game JSON file; the inverse of save_game (values bit-identical)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: top-level value must be an object")
    for key in ("n", "values"):
        if key not in doc:
            raise SchemaError(f"{path}: missing required key {key!r}")
    if not isinstance(doc["n"], int):
        raise SchemaError(f"{path}: 'n' must be an integer")
    if not isinstance(doc["values"], dict):
        raise SchemaError(f"{path}: 'values' must be an object")
    values = {}
    for key, val in doc["values"].items():
        try:
            index = int(key)
        except ValueError:
            raise SchemaError(f"{path}: value key {key!r} is not a coalition index") from None
        if not isinstance(val, (int, float)) or isinstance(val, bool):
            raise SchemaError(f"{path}: value for coalition {key} must be a number")
        values[index] = float(val)
    seed = doc.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise SchemaError(f"{path}: 'seed' must be an integer or null")
    return CoalitionGame(n=doc["n"], values=values, dist_label=doc.get("dist"), seed=seed)
