"""Classical solvers: exact oracles over partitions and QUBO-space search.

Every solver returns a SolveReport.  Reports are deterministic for a
fixed input and seed; wall-clock time lives in a separate ``timing``
block so that serialized reports can be compared byte-for-byte with the
timing stripped.

Tie-breaking is uniform across solvers: among equal-value optima the
structure whose ascending block-index tuple is lexicographically
smallest wins, and in QUBO space a feasible assignment beats an
infeasible one of equal energy.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError
from .game import CoalitionGame, CoalitionStructure, n_coalitions
from .transform import BilpInstance, QuboInstance, build_qubo, decode_solution, qubo_energy

ENUM_MAX_AGENTS = 12
DP_MAX_AGENTS = 20
BRUTE_MAX_VARIABLES = 24
SA_MAX_VARIABLES = 1 << 15


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one solver run.

    ``best_cs`` and ``best_value`` are None when the run ended on an
    infeasible assignment (possible for sampling solvers).  ``metadata``
    holds solver-specific counters and parameters; ``timing`` holds
    wall-clock measurements and nothing else.
    """

    method: str
    best_cs: CoalitionStructure | None
    best_value: float | None
    feasible: bool
    metadata: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_json(self, include_timing: bool = True) -> dict:
        doc = {
            "method": self.method,
            "feasible": self.feasible,
            "best_value": self.best_value,
            "best_blocks": list(self.best_cs.blocks) if self.best_cs is not None else None,
            "metadata": self.metadata,
        }
        if include_timing:
            doc["timing"] = self.timing
        return doc


def partitions(n: int):
    """Yield every partition of n agents as a tuple of coalition masks.

    Agents are placed one at a time into an existing block or a fresh
    one, so blocks appear in order of their lowest member and the whole
    sequence is deterministic.
    """

    def place(agent: int, blocks: list[int]):
        if agent == n:
            yield tuple(blocks)
            return
        bit = 1 << agent
        for k in range(len(blocks)):
            blocks[k] |= bit
            yield from place(agent + 1, blocks)
            blocks[k] ^= bit
        blocks.append(bit)
        yield from place(agent + 1, blocks)
        blocks.pop()

    yield from place(0, [])


def solve_enum(game: CoalitionGame) -> SolveReport:
    """Exact solver by full partition enumeration (Bell-number cost)."""
    if game.n > ENUM_MAX_AGENTS:
        raise ResourceLimitError(
            f"enumeration is limited to {ENUM_MAX_AGENTS} agents, got {game.n}"
        )
    start = time.perf_counter()
    values = game.values
    best_value = -math.inf
    best_blocks: tuple[int, ...] | None = None
    examined = 0
    for blocks in partitions(game.n):
        examined += 1
        value = sum(values[b] for b in blocks)
        key = tuple(sorted(blocks))
        if value > best_value or (value == best_value and key < best_blocks):
            best_value = value
            best_blocks = key
    elapsed = (time.perf_counter() - start) * 1e3
    return SolveReport(
        method="enum",
        best_cs=CoalitionStructure(best_blocks),
        best_value=best_value,
        feasible=True,
        metadata={"n": game.n, "partitions_examined": examined},
        timing={"wall_ms": elapsed},
    )


def solve_dp(game: CoalitionGame) -> SolveReport:
    """Exact solver by dynamic programming over agent subsets.

    For each subset T (ascending mask order) the best partition value is
    f(T) = max(v(T), max over splits f(T1) + f(T \\ T1)) where T1 ranges
    over proper subsets of T containing T's lowest agent.  Alongside f
    the lexicographically smallest optimal block tuple is carried, so
    ties resolve identically to solve_enum.
    """
    if game.n > DP_MAX_AGENTS:
        raise ResourceLimitError(
            f"subset dynamic programming is limited to {DP_MAX_AGENTS} agents, got {game.n}"
        )
    start = time.perf_counter()
    full = n_coalitions(game.n)
    values = game.values
    f = [0.0] * (full + 1)
    opt: list[tuple[int, ...]] = [()] * (full + 1)
    splits = 0
    for t in range(1, full + 1):
        best = values[t]
        best_blocks = (t,)
        low = t & -t
        rest = t ^ low
        sub = rest
        while sub:
            sub = (sub - 1) & rest
            t1 = low | sub
            t2 = t ^ t1
            splits += 1
            cand = f[t1] + f[t2]
            if cand > best:
                best = cand
                best_blocks = tuple(sorted(opt[t1] + opt[t2]))
            elif cand == best:
                blocks = tuple(sorted(opt[t1] + opt[t2]))
                if blocks < best_blocks:
                    best_blocks = blocks
            if sub == 0:
                break
        f[t] = best
        opt[t] = best_blocks
    elapsed = (time.perf_counter() - start) * 1e3
    return SolveReport(
        method="dp",
        best_cs=CoalitionStructure(opt[full]),
        best_value=f[full],
        feasible=True,
        metadata={"n": game.n, "splits": splits, "subsets": full},
        timing={"wall_ms": elapsed},
    )


def _pick_qubo_winner(bilp: BilpInstance, qubo: QuboInstance, candidates: list[str]):
    """Resolve energy ties: feasible first, then smallest block tuple / bitstring."""
    best = None
    for x in candidates:
        decoded = decode_solution(bilp, x)
        rank = (
            0 if decoded.feasible else 1,
            tuple(decoded.cs.blocks) if decoded.feasible else (),
            decoded.x,
        )
        if best is None or rank < best[0]:
            best = (rank, decoded)
    return best[1]


def _report_from_assignment(method, bilp, qubo, decoded, energy, metadata, elapsed):
    if decoded.feasible:
        col_value = {c: v for c, v in zip(bilp.columns, bilp.values)}
        best_value = sum(col_value[b] for b in decoded.cs.blocks)
    else:
        best_value = None
    metadata = dict(metadata)
    metadata.update(
        {
            "m": qubo.m,
            "s": qubo.interaction_count,
            "lambda": qubo.lam,
            "best_x": decoded.x,
            "best_energy": energy,
            "constant": qubo.c,
        }
    )
    return SolveReport(
        method=method,
        best_cs=decoded.cs,
        best_value=best_value,
        feasible=decoded.feasible,
        metadata=metadata,
        timing={"wall_ms": elapsed},
    )


def solve_qubo_exhaustive(bilp: BilpInstance, qubo: QuboInstance | None = None) -> SolveReport:
    """Exact QUBO minimization by scanning all 2^m assignments in chunks."""
    if qubo is None:
        qubo = build_qubo(bilp)
    m = qubo.m
    if m > BRUTE_MAX_VARIABLES:
        raise ResourceLimitError(
            f"exhaustive QUBO scan is limited to {BRUTE_MAX_VARIABLES} variables, got {m}"
        )
    start = time.perf_counter()
    diag = np.asarray(qubo.diag)
    pairs = list(qubo.offdiag.items())
    total = 1 << m
    chunk = min(total, 1 << 16)
    shifts = np.arange(m, dtype=np.int64)
    best_energy = math.inf
    best_indices: list[int] = []
    for base in range(0, total, chunk):
        idx = np.arange(base, min(base + chunk, total), dtype=np.int64)
        bits = (idx[:, None] >> shifts) & 1
        energy = bits.astype(np.float64) @ diag
        for (i, j), val in pairs:
            energy += val * (bits[:, i] * bits[:, j])
        lo = float(energy.min())
        if lo < best_energy:
            best_energy = lo
            best_indices = [int(k) for k in idx[energy == lo]]
        elif lo == best_energy:
            best_indices.extend(int(k) for k in idx[energy == lo])
    candidates = ["".join(str(k >> b & 1) for b in range(m)) for k in best_indices]
    decoded = _pick_qubo_winner(bilp, qubo, candidates)
    energy = qubo_energy(qubo, decoded.x)
    elapsed = (time.perf_counter() - start) * 1e3
    meta = {"n": bilp.n, "assignments_examined": total, "ties": len(candidates)}
    return _report_from_assignment("qubo-brute", bilp, qubo, decoded, energy, meta, elapsed)


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling schedule plus restart/seed bookkeeping."""

    sweeps: int
    temp_hi: float
    temp_lo: float
    restarts: int = 10
    seed: int = 0

    def __post_init__(self) -> None:
        from .errors import ConfigError

        if self.sweeps < 1:
            raise ConfigError(f"sweeps must be >= 1, got {self.sweeps}")
        if self.restarts < 1:
            raise ConfigError(f"restarts must be >= 1, got {self.restarts}")
        if not (0.0 < self.temp_lo <= self.temp_hi):
            raise ConfigError(
                f"need 0 < temp_lo <= temp_hi, got temp_lo={self.temp_lo}, temp_hi={self.temp_hi}"
            )

    def temperature(self, sweep: int) -> float:
        if self.sweeps == 1:
            return self.temp_hi
        ratio = self.temp_lo / self.temp_hi
        return self.temp_hi * ratio ** (sweep / (self.sweeps - 1))


def default_schedule(bilp: BilpInstance, seed: int = 0, restarts: int = 10) -> AnnealSchedule:
    """Schedule scaled to the instance: hot enough to flip any single bit freely.

    temp_hi tracks twice the total absolute value mass (with a floor of
    1.0 so all-zero games still anneal); sweeps grow linearly with the
    variable count.
    """
    span = 2.0 * sum(abs(v) for v in bilp.values)
    return AnnealSchedule(
        sweeps=10 * bilp.num_variables,
        temp_hi=max(1.0, span),
        temp_lo=1e-3,
        restarts=restarts,
        seed=seed,
    )


def solve_qubo_sa(
    bilp: BilpInstance,
    qubo: QuboInstance | None = None,
    schedule: AnnealSchedule | None = None,
) -> SolveReport:
    """Single-flip Metropolis annealing on the QUBO.

    Each restart r runs its own PCG64 stream seeded with seed + r.  The
    local field g[i] (energy change contribution of variable i) is kept
    incrementally, so one sweep costs O(m + accepted-flip degrees).
    Restarts are merged under the module tie-breaking rule and the
    winner's energy is recomputed from scratch before reporting.
    """
    if qubo is None:
        qubo = build_qubo(bilp)
    m = qubo.m
    if m > SA_MAX_VARIABLES:
        raise ResourceLimitError(
            f"annealing is limited to {SA_MAX_VARIABLES} variables, got {m}"
        )
    if schedule is None:
        schedule = default_schedule(bilp)
    start = time.perf_counter()

    diag = np.asarray(qubo.diag)
    neighbor_idx: list[list[int]] = [[] for _ in range(m)]
    neighbor_val: list[list[float]] = [[] for _ in range(m)]
    for (i, j), val in qubo.offdiag.items():
        neighbor_idx[i].append(j)
        neighbor_val[i].append(val)
        neighbor_idx[j].append(i)
        neighbor_val[j].append(val)
    nbr_idx = [np.asarray(ix, dtype=np.int64) for ix in neighbor_idx]
    nbr_val = [np.asarray(vs) for vs in neighbor_val]

    temps = [schedule.temperature(s) for s in range(schedule.sweeps)]
    restart_best: list[tuple[float, str, list[float]]] = []
    for r in range(schedule.restarts):
        rng = np.random.default_rng(schedule.seed + r)
        x = [int(b) for b in rng.integers(0, 2, size=m)]
        g = diag.copy()
        for i in range(m):
            if x[i]:
                g[nbr_idx[i]] += nbr_val[i]
        energy = float(sum(d for d, b in zip(qubo.diag, x) if b))
        for (i, j), val in qubo.offdiag.items():
            if x[i] and x[j]:
                energy += val
        best_energy = energy
        best_x = list(x)
        trace = []
        for temp in temps:
            us = rng.random(m)
            for i in range(m):
                delta = (1.0 - 2.0 * x[i]) * float(g[i])
                if delta <= 0.0 or us[i] < math.exp(-delta / temp):
                    sign = 1.0 if x[i] == 0 else -1.0
                    x[i] ^= 1
                    if len(nbr_idx[i]):
                        g[nbr_idx[i]] += sign * nbr_val[i]
                    energy += delta
                    if energy < best_energy:
                        best_energy = energy
                        best_x = list(x)
            trace.append(best_energy)
        restart_best.append((best_energy, "".join(str(b) for b in best_x), trace))

    lowest = min(e for e, _, _ in restart_best)
    near = [cand for cand in restart_best if cand[0] == lowest]
    decoded = _pick_qubo_winner(bilp, qubo, [x for _, x, _ in near])
    winner_trace = next(t for e, x, t in restart_best if x == decoded.x and e == lowest)
    energy = qubo_energy(qubo, decoded.x)
    elapsed = (time.perf_counter() - start) * 1e3
    meta = {
        "n": bilp.n,
        "sweeps": schedule.sweeps,
        "restarts": schedule.restarts,
        "temp_hi": schedule.temp_hi,
        "temp_lo": schedule.temp_lo,
        "seed": schedule.seed,
        "restart_energies": [e for e, _, _ in restart_best],
        "trace": winner_trace,
    }
    return _report_from_assignment("sa", bilp, qubo, decoded, energy, meta, elapsed)
