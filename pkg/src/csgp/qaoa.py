"""Gate-exact QAOA on the coalition Ising model: circuit build, state-vector
simulation, sampling, and classical angle optimization.

Conventions, fixed once here and relied on by the tests:

* Qubit k carries QUBO variable k; qubit 0 is the least significant bit of
  the basis-state index.
* Basis bit b on a qubit is the spin z = 1 - 2b (so |0> is z = +1), which
  makes the cost layer built from RZ/CNOT gates equal exp(-i*gamma*H_C)
  exactly, with H_C diagonal and H_C|b> = E(z(b))|b>.
* Readout maps spin back to the binary variable through x = (1 + z) / 2,
  so a qubit measured as 1 reports x = 0.  Count keys and best_bitstring
  are these assignment strings (position k = variable k) and feed straight
  into decode_solution.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigError, ResourceLimitError
from .transform import IsingInstance

SIMULATOR_MAX_QUBITS = 20

_H_MATRIX = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) / math.sqrt(2.0)


@dataclass(frozen=True)
class QaoaParams:
    """Angle schedule for p alternating cost/mixer layers."""

    p: int
    betas: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.p < 1:
            raise ConfigError(f"layer count must be >= 1, got {self.p}")
        if len(self.betas) != self.p or len(self.gammas) != self.p:
            raise ConfigError(
                f"angle vectors must have length p={self.p},"
                f" got {len(self.betas)} betas and {len(self.gammas)} gammas"
            )
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))


@dataclass(frozen=True)
class CircuitDescription:
    """An ordered gate list over `qubits` qubits.

    Gate records: ("H", q), ("RX", q, angle), ("RZ", q, angle),
    ("CNOT", control, target).
    """

    qubits: int
    gates: tuple[tuple, ...]

    def counts_by_kind(self) -> dict[str, int]:
        tally: dict[str, int] = {"H": 0, "RX": 0, "RZ": 0, "CNOT": 0}
        for gate in self.gates:
            tally[gate[0]] += 1
        return tally

    def to_text(self) -> str:
        """One line per gate: `H q`, `RX q angle`, `RZ q angle`, `CX c t`."""
        lines = []
        for gate in self.gates:
            if gate[0] == "H":
                lines.append(f"H {gate[1]}")
            elif gate[0] in ("RX", "RZ"):
                lines.append(f"{gate[0]} {gate[1]} {gate[2]:.17g}")
            else:
                lines.append(f"CX {gate[1]} {gate[2]}")
        return "\n".join(lines) + "\n"


def build_circuit(ising: IsingInstance, params: QaoaParams) -> CircuitDescription:
    """Assemble the ansatz: H wall, then p layers of cost phases and mixer.

    Cost layer j applies RZ(2*gamma_j*h_i) on every qubit, then for each
    interaction (i, k) in ascending order a CNOT(i,k) / RZ(k, 2*gamma_j*J_ik)
    / CNOT(i,k) sandwich.  Mixer layer applies RX(2*beta_j) on every qubit.
    """
    m = ising.m
    if m > SIMULATOR_MAX_QUBITS:
        raise ResourceLimitError(
            f"simulator is limited to {SIMULATOR_MAX_QUBITS} qubits, got {m}"
        )
    interactions = sorted(ising.J)
    gates: list[tuple] = [("H", q) for q in range(m)]
    for layer in range(params.p):
        gamma = params.gammas[layer]
        beta = params.betas[layer]
        for i in range(m):
            gates.append(("RZ", i, 2.0 * gamma * ising.h[i]))
        for (i, k) in interactions:
            gates.append(("CNOT", i, k))
            gates.append(("RZ", k, 2.0 * gamma * ising.J[(i, k)]))
            gates.append(("CNOT", i, k))
        for i in range(m):
            gates.append(("RX", i, 2.0 * beta))
    return CircuitDescription(qubits=m, gates=tuple(gates))


def _apply_one_qubit(state: np.ndarray, m: int, q: int, matrix: np.ndarray) -> None:
    psi = state.reshape(1 << (m - q - 1), 2, 1 << q)
    top = psi[:, 0, :].copy()
    bot = psi[:, 1, :]
    psi[:, 0, :] = matrix[0, 0] * top + matrix[0, 1] * bot
    psi[:, 1, :] = matrix[1, 0] * top + matrix[1, 1] * bot


def _apply_rz(state: np.ndarray, m: int, q: int, angle: float) -> None:
    psi = state.reshape(1 << (m - q - 1), 2, 1 << q)
    psi[:, 0, :] *= np.exp(-0.5j * angle)
    psi[:, 1, :] *= np.exp(0.5j * angle)


def _apply_cnot(state: np.ndarray, m: int, control: int, target: int) -> None:
    lo, hi = (control, target) if control < target else (target, control)
    psi = state.reshape(1 << (m - hi - 1), 2, 1 << (hi - lo - 1), 2, 1 << lo)
    if control == hi:
        tmp = psi[:, 1, :, 0, :].copy()
        psi[:, 1, :, 0, :] = psi[:, 1, :, 1, :]
        psi[:, 1, :, 1, :] = tmp
    else:
        tmp = psi[:, 0, :, 1, :].copy()
        psi[:, 0, :, 1, :] = psi[:, 1, :, 1, :]
        psi[:, 1, :, 1, :] = tmp


def simulate(circuit: CircuitDescription) -> np.ndarray:
    """Apply the gate list to |0...0> and return the final amplitude vector."""
    m = circuit.qubits
    state = np.zeros(1 << m, dtype=np.complex128)
    state[0] = 1.0
    for gate in circuit.gates:
        kind = gate[0]
        if kind == "H":
            _apply_one_qubit(state, m, gate[1], _H_MATRIX)
        elif kind == "RZ":
            _apply_rz(state, m, gate[1], gate[2])
        elif kind == "RX":
            half = 0.5 * gate[2]
            matrix = np.array(
                [[math.cos(half), -1j * math.sin(half)], [-1j * math.sin(half), math.cos(half)]],
                dtype=np.complex128,
            )
            _apply_one_qubit(state, m, gate[1], matrix)
        elif kind == "CNOT":
            _apply_cnot(state, m, gate[1], gate[2])
        else:
            raise ConfigError(f"unknown gate kind {kind!r}")
    return state


def energy_table(ising: IsingInstance) -> np.ndarray:
    """Ising energy of every basis state, indexed by basis-state integer."""
    m = ising.m
    idx = np.arange(1 << m, dtype=np.int64)
    z = 1.0 - 2.0 * ((idx[:, None] >> np.arange(m)) & 1)
    table = z @ np.asarray(ising.h)
    for (i, j), val in ising.J.items():
        table += val * z[:, i] * z[:, j]
    return table


def expectation(state: np.ndarray, ising: IsingInstance) -> float:
    """Analytic mean cost energy of the state, sum_b |amp_b|^2 E(z(b))."""
    if state.shape != (1 << ising.m,):
        raise ConfigError(
            f"state has shape {state.shape}, expected ({1 << ising.m},) for m={ising.m}"
        )
    probs = np.abs(state) ** 2
    return float(probs @ energy_table(ising))


def assignment_string(index: int, m: int) -> str:
    """Variable-assignment string for a measured basis state (x = (1+z)/2)."""
    return "".join("0" if index >> k & 1 else "1" for k in range(m))


def assignment_index(x: str) -> int:
    """Basis-state integer whose readout is the assignment string x."""
    index = 0
    for k, ch in enumerate(x):
        if ch == "0":
            index |= 1 << k
        elif ch != "1":
            raise ConfigError(f"assignment strings are binary, got {x!r}")
    return index


def sample(state: np.ndarray, shots: int, seed: int) -> dict[str, int]:
    """Multinomial measurement; keys are assignment strings, values shot counts."""
    if shots < 1:
        raise ConfigError(f"shots must be >= 1, got {shots}")
    m = int(round(math.log2(state.shape[0])))
    probs = np.abs(state) ** 2
    probs = probs / probs.sum()
    draws = np.random.default_rng(seed).multinomial(shots, probs)
    return {
        assignment_string(b, m): int(draws[b]) for b in range(len(draws)) if draws[b] > 0
    }


@dataclass(frozen=True)
class OptimizerConfig:
    """Multi-start simplex search settings."""

    starts: int = 10
    maxiter: int = 500
    xatol: float = 1e-8
    fatol: float = 1e-8

    def __post_init__(self) -> None:
        if self.starts < 1:
            raise ConfigError(f"starts must be >= 1, got {self.starts}")
        if self.maxiter < 1:
            raise ConfigError(f"maxiter must be >= 1, got {self.maxiter}")


@dataclass(frozen=True)
class QaoaResult:
    """Outcome of one optimized run at a fixed layer count."""

    best_params: QaoaParams
    expectation: float
    counts: dict[str, int]
    best_bitstring: str
    optimizer_trace: tuple[tuple[QaoaParams, float], ...]
    metadata: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_json(self, include_timing: bool = True) -> dict:
        doc = {
            "p": self.best_params.p,
            "betas": list(self.best_params.betas),
            "gammas": list(self.best_params.gammas),
            "expectation": self.expectation,
            "counts": self.counts,
            "best_bitstring": self.best_bitstring,
            "optimizer_trace": [
                {"betas": list(prm.betas), "gammas": list(prm.gammas), "expectation": f}
                for prm, f in self.optimizer_trace
            ],
            "metadata": self.metadata,
        }
        if include_timing:
            doc["timing"] = self.timing
        return doc


def _objective(ising: IsingInstance, p: int, table: np.ndarray):
    def f(theta: np.ndarray) -> float:
        params = QaoaParams(p=p, betas=tuple(theta[:p]), gammas=tuple(theta[p:]))
        state = simulate(build_circuit(ising, params))
        probs = np.abs(state) ** 2
        return float(probs @ table)

    return f


def optimize(
    ising: IsingInstance,
    p: int,
    config: OptimizerConfig | None = None,
    seed: int = 0,
    shots: int = 1024,
) -> QaoaResult:
    """Multi-start derivative-free search over the 2p angles.

    The objective is the analytic expectation (no shot noise); the
    1024-shot sample is drawn once, at the best angles found.  Starts are
    drawn uniformly from beta in [0, pi), gamma in [0, 2*pi).  Runs that
    hit the iteration cap are kept and flagged via metadata["converged"].
    """
    if p < 1:
        raise ConfigError(f"layer count must be >= 1, got {p}")
    if config is None:
        config = OptimizerConfig()
    start = time.perf_counter()
    table = energy_table(ising)
    fun = _objective(ising, p, table)

    start_seq, sample_seq = np.random.SeedSequence(seed).spawn(2)
    start_rng = np.random.default_rng(start_seq)
    best = None
    evals_total = 0
    for s in range(config.starts):
        theta0 = np.concatenate(
            [start_rng.uniform(0.0, math.pi, size=p), start_rng.uniform(0.0, 2.0 * math.pi, size=p)]
        )
        trace: list[tuple[QaoaParams, float]] = []
        best_seen = math.inf

        def tracked(theta: np.ndarray) -> float:
            nonlocal best_seen, evals_total
            evals_total += 1
            val = fun(theta)
            if val < best_seen:
                best_seen = val
                trace.append(
                    (QaoaParams(p=p, betas=tuple(theta[:p]), gammas=tuple(theta[p:])), val)
                )
            return val

        res = minimize(
            tracked,
            theta0,
            method="Nelder-Mead",
            options={
                "maxiter": config.maxiter,
                "xatol": config.xatol,
                "fatol": config.fatol,
            },
        )
        if best is None or res.fun < best[0]:
            best = (float(res.fun), res.x.copy(), bool(res.success), tuple(trace), s)

    fbest, theta, converged, trace, start_index = best
    params = QaoaParams(p=p, betas=tuple(theta[:p]), gammas=tuple(theta[p:]))
    state = simulate(build_circuit(ising, params))
    sample_seed = int(sample_seq.generate_state(1)[0])
    counts = sample(state, shots, sample_seed)

    best_bitstring = None
    best_energy = math.inf
    for x in counts:
        e = float(table[assignment_index(x)])
        if e < best_energy or (e == best_energy and x < best_bitstring):
            best_energy = e
            best_bitstring = x
    elapsed = (time.perf_counter() - start) * 1e3
    metadata = {
        "m": ising.m,
        "p": p,
        "shots": shots,
        "seed": seed,
        "starts": config.starts,
        "maxiter": config.maxiter,
        "evals": evals_total,
        "best_start": start_index,
        "converged": converged,
        "offset": ising.offset,
        "best_sampled_energy": best_energy,
        "best_sampled_qubo_energy": best_energy + ising.offset,
    }
    return QaoaResult(
        best_params=params,
        expectation=fbest,
        counts=counts,
        best_bitstring=best_bitstring,
        optimizer_trace=trace,
        metadata=metadata,
        timing={"wall_ms": elapsed},
    )


def scan_layers(
    ising: IsingInstance,
    p_max: int = 12,
    shots: int = 1024,
    seed: int = 0,
    config: OptimizerConfig | None = None,
    target_energy: float | None = None,
) -> tuple[list[QaoaResult], int | None]:
    """Optimize at p = 1..p_max, stopping early once the target is sampled.

    ``target_energy`` is in QUBO units (offset folded in, constant c
    excluded).  Each p gets its own derived seed, so a scan prefix is
    identical to a standalone shorter scan.  Returns all results plus the
    first matching p, or None when no p matched.
    """
    if p_max < 1:
        raise ConfigError(f"p_max must be >= 1, got {p_max}")
    results: list[QaoaResult] = []
    chosen: int | None = None
    for p in range(1, p_max + 1):
        seed_p = int(np.random.SeedSequence([seed, p]).generate_state(1)[0])
        result = optimize(ising, p, config=config, seed=seed_p, shots=shots)
        results.append(result)
        if target_energy is not None:
            sampled = result.metadata["best_sampled_qubo_energy"]
            if math.isclose(sampled, target_energy, rel_tol=1e-9, abs_tol=1e-9):
                chosen = p
                break
    return results, chosen


def gate_count(n: int, p: int, s: int) -> int:
    """Closed-form circuit size: (2^n - 1)(2p + 1) + 3ps.

    One H per qubit, p RX per qubit, p RZ per qubit for the fields, and
    per interaction per layer a CNOT/RZ/CNOT triple.
    """
    if n < 1:
        raise ConfigError(f"agent count must be >= 1, got {n}")
    if p < 1:
        raise ConfigError(f"layer count must be >= 1, got {p}")
    if s < 0:
        raise ConfigError(f"interaction count must be >= 0, got {s}")
    return ((1 << n) - 1) * (2 * p + 1) + 3 * p * s
