import json
import math

import pytest
from hypothesis import given, settings, strategies as st

from csgp import (
    AnnealSchedule,
    CoalitionGame,
    ConfigError,
    DistributionSpec,
    ResourceLimitError,
    build_bilp,
    build_qubo,
    cs_value,
    default_schedule,
    generate_game,
    solve_dp,
    solve_enum,
    solve_qubo_exhaustive,
    solve_qubo_sa,
)
from csgp.solvers import partitions


def _zero_game(n):
    return CoalitionGame(n=n, values={c: 0.0 for c in range(1, (1 << n))})


def test_partition_counts():
    bell = [1, 2, 5, 15, 52, 203]
    for n, count in zip(range(1, 7), bell):
        assert sum(1 for _ in partitions(n)) == count


def test_enum_examples(g2):
    report = solve_enum(g2)
    assert report.best_cs.blocks == (3,)
    assert report.best_value == 4.0
    assert report.metadata["partitions_examined"] == 2
    n4 = generate_game(4, DistributionSpec(kind="abu"), seed=1)
    assert solve_enum(n4).metadata["partitions_examined"] == 15


def test_enum_guard():
    with pytest.raises(ResourceLimitError):
        solve_enum(_zero_game(13))


def test_dp_matches_enum_on_g2(g2):
    assert solve_dp(g2).best_value == solve_enum(g2).best_value == 4.0


def test_dp_prefers_split_when_superadditivity_fails():
    game = CoalitionGame(n=2, values={1: 3.0, 2: 3.0, 3: 4.0})
    report = solve_dp(game)
    assert report.best_cs.blocks == (1, 2)
    assert report.best_value == 6.0


def test_dp_guard():
    with pytest.raises(ResourceLimitError):
        solve_dp(_zero_game(21))


@pytest.mark.parametrize("kind,seed", [("normal", 11), ("mu", 11), ("weibull", 4)])
def test_dp_equals_enum_n6(kind, seed):
    game = generate_game(6, DistributionSpec(kind=kind), seed=seed)
    dp = solve_dp(game)
    enum = solve_enum(game)
    assert math.isclose(dp.best_value, enum.best_value, rel_tol=1e-9)
    assert dp.best_cs.blocks == enum.best_cs.blocks


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_dp_split_counter(n):
    game = _zero_game(n)
    splits = solve_dp(game).metadata["splits"]
    assert splits == (3 ** n + 1) // 2 - 2 ** n
    # brute-force recount: pairs (T, T1) with T1 a proper subset of T
    # containing T's lowest agent
    recount = 0
    for t in range(1, 1 << n):
        low = t & -t
        for t1 in range(1, t):
            if t1 & low and t1 | t == t:
                recount += 1
    assert splits == recount


def test_tie_break_is_lexicographic_on_blocks():
    # additive game: every partition has the same value, so the winner must
    # be the lexicographically smallest block tuple, the all-singletons one
    for n in (2, 3, 4):
        game = CoalitionGame(
            n=n, values={c: float(c.bit_count()) for c in range(1, (1 << n))}
        )
        expected = tuple(1 << i for i in range(n))
        assert solve_enum(game).best_cs.blocks == expected
        assert solve_dp(game).best_cs.blocks == expected
        bilp = build_bilp(game)
        assert solve_qubo_exhaustive(bilp).best_cs.blocks == expected


def test_zero_game_ties_resolve_identically():
    game = _zero_game(4)
    assert solve_enum(game).best_cs.blocks == solve_dp(game).best_cs.blocks == (1, 2, 4, 8)


def test_brute_g2(g2):
    bilp = build_bilp(g2)
    report = solve_qubo_exhaustive(bilp, build_qubo(bilp, lam=10.0))
    assert report.best_cs.blocks == (3,)
    assert report.best_value == 4.0
    assert report.metadata["best_x"] == "001"
    assert report.metadata["best_energy"] == -24.0
    assert report.feasible


def test_brute_guard():
    game = generate_game(5, DistributionSpec(kind="abu"), seed=0)  # m = 31
    bilp = build_bilp(game)
    with pytest.raises(ResourceLimitError):
        solve_qubo_exhaustive(bilp)


@given(
    st.sampled_from(["abu", "normal", "f", "laplace"]),
    st.integers(min_value=0, max_value=20),
)
@settings(max_examples=20)
def test_brute_equals_dp(kind, seed):
    game = generate_game(3, DistributionSpec(kind=kind), seed=seed)
    bilp = build_bilp(game)
    brute = solve_qubo_exhaustive(bilp)
    dp = solve_dp(game)
    assert math.isclose(brute.best_value, dp.best_value, rel_tol=1e-9)
    assert brute.best_cs.blocks == dp.best_cs.blocks


def test_report_value_consistent_with_cs(g2):
    for report in (solve_enum(g2), solve_dp(g2), solve_qubo_exhaustive(build_bilp(g2))):
        assert report.best_value == cs_value(g2, report.best_cs)


def test_schedule_validation():
    with pytest.raises(ConfigError):
        AnnealSchedule(sweeps=0, temp_hi=1.0, temp_lo=0.1)
    with pytest.raises(ConfigError):
        AnnealSchedule(sweeps=10, temp_hi=1.0, temp_lo=2.0)
    with pytest.raises(ConfigError):
        AnnealSchedule(sweeps=10, temp_hi=1.0, temp_lo=0.0)
    with pytest.raises(ConfigError):
        AnnealSchedule(sweeps=10, temp_hi=1.0, temp_lo=0.1, restarts=0)


def test_default_schedule_scales(g2):
    bilp = build_bilp(g2)
    sched = default_schedule(bilp, seed=5)
    assert sched.sweeps == 10 * bilp.num_variables
    assert sched.temp_hi == 2.0 * 7.0
    assert sched.temp_lo == 1e-3
    assert sched.restarts == 10
    assert sched.seed == 5
    # all-zero game still gets a positive starting temperature
    zero_bilp = build_bilp(_zero_game(3))
    assert default_schedule(zero_bilp).temp_hi == 1.0


def test_sa_solves_g2(g2):
    bilp = build_bilp(g2)
    qubo = build_qubo(bilp, lam=10.0)
    sched = AnnealSchedule(sweeps=100, temp_hi=30.0, temp_lo=1e-3, restarts=3, seed=0)
    report = solve_qubo_sa(bilp, qubo, sched)
    assert report.metadata["best_x"] == "001"
    assert report.best_value == 4.0


def test_sa_default_schedule_n5():
    hits = 0
    for seed in range(1, 11):
        game = generate_game(5, DistributionSpec(kind="abu"), seed=seed)
        bilp = build_bilp(game)
        report = solve_qubo_sa(bilp, schedule=default_schedule(bilp, seed=seed))
        if report.feasible and math.isclose(
            report.best_value, solve_dp(game).best_value, rel_tol=1e-9
        ):
            hits += 1
    assert hits >= 9


def test_sa_zero_game_returns_feasible():
    bilp = build_bilp(_zero_game(4))
    report = solve_qubo_sa(bilp)
    assert report.feasible
    assert report.best_value == 0.0


def test_sa_deterministic_and_trace_monotone(g2):
    bilp = build_bilp(g2)
    a = solve_qubo_sa(bilp, schedule=default_schedule(bilp, seed=3))
    b = solve_qubo_sa(bilp, schedule=default_schedule(bilp, seed=3))
    assert json.dumps(a.to_json(include_timing=False)) == json.dumps(
        b.to_json(include_timing=False)
    )
    trace = a.metadata["trace"]
    assert all(later <= earlier for earlier, later in zip(trace, trace[1:]))


def test_sa_guard():
    qubo = build_qubo(build_bilp(_zero_game(2)))
    big = type(qubo)(m=(1 << 15) + 1, diag=(0.0,) * ((1 << 15) + 1), offdiag={}, c=0.0)
    with pytest.raises(ResourceLimitError):
        solve_qubo_sa(build_bilp(_zero_game(2)), big)


def test_report_json_shape(g2):
    doc = solve_enum(g2).to_json()
    assert doc["method"] == "enum"
    assert doc["feasible"] is True
    assert doc["best_blocks"] == [3]
    assert "wall_ms" in doc["timing"]
    trimmed = solve_enum(g2).to_json(include_timing=False)
    assert "timing" not in trimmed
