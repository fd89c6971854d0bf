"""End-to-end command-line behavior, run in process through main(argv).

Covers the happy paths of every subcommand, the file formats they write,
determinism of repeated runs, and the exit-code contract (2 config/parse,
3 resource guard, 4 infeasible).
"""

import json
import math

import pytest

from csgp.analysis import CSV_HEADER
from csgp.cli import main, read_qubo_text
from csgp.errors import ParseError
from csgp.game import load_game
from csgp.solvers import solve_dp
from csgp.transform import build_bilp, build_qubo, qubo_to_ising


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def make_game(tmp_path, capsys, n=3, dist="normal", seed=7):
    path = tmp_path / f"game_{dist}_n{n}_seed{seed}.json"
    code, out, _ = run_cli(
        capsys, "gen", "--agents", str(n), "--dist", dist, "--seed", str(seed),
        "--out", str(path),
    )
    assert code == 0 and out.strip() == str(path)
    return path


def stderr_error(err):
    doc = json.loads(err.strip())
    assert set(doc) == {"error", "kind", "exit"}
    return doc


# ----------------------------------------------------------------------- gen


def test_gen_writes_named_file(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run_cli(capsys, "gen", "--agents", "3", "--dist", "normal", "--seed", "7")
    assert code == 0
    assert out.strip() == "game_normal_n3_seed7.json"
    doc = json.loads((tmp_path / out.strip()).read_text())
    assert doc["n"] == 3 and doc["dist"] == "normal" and doc["seed"] == 7
    assert set(doc["values"]) == {str(c) for c in range(1, 8)}


def test_gen_requires_dist(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, err = run_cli(capsys, "gen", "--agents", "3")
    assert code == 2
    assert stderr_error(err)["kind"] == "ConfigError"


def test_gen_rejects_unknown_dist(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--agents", "3", "--dist", "zeta"])
    assert exc.value.code == 2
    capsys.readouterr()


# --------------------------------------------------------------------- solve


def test_solve_dp_report_matches_library(tmp_path, capsys):
    path = make_game(tmp_path, capsys)
    code, out, _ = run_cli(capsys, "solve", str(path), "--method", "dp")
    assert code == 0
    doc = json.loads(out)
    direct = solve_dp(load_game(path))
    assert doc["method"] == "dp"
    assert doc["feasible"] is True
    assert doc["best_value"] == direct.best_value
    assert doc["best_blocks"] == list(direct.best_cs.blocks)


def test_solve_out_file_equals_stdout(tmp_path, capsys):
    path = make_game(tmp_path, capsys)
    out_path = tmp_path / "report.json"
    code, out, _ = run_cli(
        capsys, "solve", str(path), "--method", "dp", "--out", str(out_path)
    )
    assert code == 0
    assert out_path.read_text() == out


def test_solve_agreement_across_methods(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=3, dist="abu", seed=5)
    _, out_dp, _ = run_cli(capsys, "solve", str(path), "--method", "dp")
    _, out_br, _ = run_cli(capsys, "solve", str(path), "--method", "qubo-brute")
    dp, br = json.loads(out_dp), json.loads(out_br)
    assert br["best_value"] == pytest.approx(dp["best_value"], rel=1e-9)
    assert br["best_blocks"] == dp["best_blocks"]


def test_solve_generates_when_no_file_given(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, out, _ = run_cli(
        capsys, "solve", "--agents", "3", "--dist", "abu", "--seed", "1", "--method", "dp"
    )
    assert code == 0
    assert json.loads(out)["feasible"] is True


def test_solve_sa_is_deterministic(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=3, dist="mu", seed=2)
    argv = ("solve", str(path), "--method", "sa", "--seed", "4", "--sweeps", "200")
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    a, b = json.loads(first), json.loads(second)
    a.pop("timing")
    b.pop("timing")
    assert a == b


def test_solve_lambda_flag_reaches_qubo(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=2, dist="abn", seed=3)
    code, out, _ = run_cli(
        capsys, "solve", str(path), "--method", "qubo-brute", "--lambda", "50"
    )
    assert code == 0
    assert json.loads(out)["metadata"]["lambda"] == 50.0


def test_solve_qaoa_fixed_depth(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=2, dist="normal", seed=0)
    scan_path = tmp_path / "scan.json"
    code, out, _ = run_cli(
        capsys, "solve", str(path), "--method", "qaoa", "--p", "1",
        "--qaoa-out", str(scan_path),
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["method"] == "qaoa"
    assert doc["metadata"]["p"] == 1
    assert doc["metadata"]["p_values"] == [1]
    scan = json.loads(scan_path.read_text())
    assert len(scan["results"]) == 1
    result = scan["results"][0]
    assert sum(result["counts"].values()) == 1024
    assert result["p"] == 1


def test_solve_qaoa_scan_reaches_reference(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=2, dist="normal", seed=0)
    code, out, _ = run_cli(
        capsys, "solve", str(path), "--method", "qaoa", "--p-max", "5"
    )
    assert code == 0
    doc = json.loads(out)
    dp = solve_dp(load_game(path))
    assert doc["feasible"] is True
    assert doc["metadata"]["chosen_p"] is not None
    assert doc["best_value"] == pytest.approx(dp.best_value, rel=1e-9)


def test_solve_qaoa_depth_flags_conflict(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=2, dist="abu", seed=0)
    code, _, err = run_cli(
        capsys, "solve", str(path), "--method", "qaoa", "--p", "1", "--p-max", "3"
    )
    assert code == 2
    assert stderr_error(err)["kind"] == "ConfigError"


# ----------------------------------------------------------------- exit codes


def test_game_file_and_agents_conflict(tmp_path, capsys):
    path = make_game(tmp_path, capsys)
    code, _, err = run_cli(
        capsys, "solve", str(path), "--agents", "3", "--dist", "abu", "--method", "dp"
    )
    assert code == 2
    assert stderr_error(err)["exit"] == 2


def test_exclude_rejected_for_partition_solvers(tmp_path, capsys):
    path = make_game(tmp_path, capsys)
    code, _, err = run_cli(
        capsys, "solve", str(path), "--method", "dp", "--exclude", "1"
    )
    assert code == 2
    assert stderr_error(err)["kind"] == "ConfigError"


def test_exclusion_causing_uncovered_agent_is_infeasible(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=2, dist="abu", seed=0)
    code, _, err = run_cli(
        capsys, "solve", str(path), "--method", "qubo-brute", "--exclude", "1,3"
    )
    assert code == 4
    assert stderr_error(err)["kind"] == "InfeasibleError"


def test_generation_guard_exit_code(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, err = run_cli(
        capsys, "solve", "--agents", "99", "--dist", "normal", "--method", "dp"
    )
    assert code == 3
    assert stderr_error(err)["kind"] == "ResourceLimitError"


def test_malformed_game_file_exit_code(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{ this is not json")
    code, _, err = run_cli(capsys, "solve", str(path), "--method", "dp")
    assert code == 2
    assert stderr_error(err)["kind"] == "ParseError"


def test_argparse_rejects_unknown_method(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--method", "bogus"])
    assert exc.value.code == 2
    capsys.readouterr()


# -------------------------------------------------------------------- export


def test_export_qubo_text_round_trip(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=3, dist="wrc", seed=9)
    out_path = tmp_path / "instance.qubo.txt"
    code, out, _ = run_cli(
        capsys, "export", str(path), "--format", "qubo-text", "--out", str(out_path)
    )
    assert code == 0 and out.strip() == str(out_path)
    want = build_qubo(build_bilp(load_game(path)))
    got = read_qubo_text(out_path)
    assert got.m == want.m
    assert got.diag == want.diag
    assert got.offdiag == want.offdiag
    assert got.c == want.c and got.lam == want.lam


def test_export_default_filename(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    path = make_game(tmp_path, capsys, n=2, dist="abu", seed=0)
    code, out, _ = run_cli(capsys, "export", str(path), "--format", "qubo-text")
    assert code == 0
    assert out.strip() == f"{path.stem}.qubo.txt"
    assert (tmp_path / out.strip()).exists()


def test_export_qubo_json_fields(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=2, dist="mu", seed=1)
    out_path = tmp_path / "q.json"
    run_cli(capsys, "export", str(path), "--format", "qubo-json", "--out", str(out_path))
    doc = json.loads(out_path.read_text())
    want = build_qubo(build_bilp(load_game(path)))
    assert doc["m"] == want.m
    assert doc["diag"] == list(want.diag)
    assert doc["c"] == want.c and doc["lambda"] == want.lam
    assert {(i, j): v for i, j, v in doc["offdiag"]} == want.offdiag
    assert [tuple(entry[:2]) for entry in doc["offdiag"]] == sorted(want.offdiag)


def test_export_ising_json_fields(tmp_path, capsys):
    path = make_game(tmp_path, capsys, n=2, dist="laplace", seed=1)
    out_path = tmp_path / "i.json"
    run_cli(capsys, "export", str(path), "--format", "ising-json", "--out", str(out_path))
    doc = json.loads(out_path.read_text())
    want = qubo_to_ising(build_qubo(build_bilp(load_game(path))))
    assert doc["m"] == want.m
    assert doc["h"] == list(want.h)
    assert doc["offset"] == want.offset
    assert {(i, j): v for i, j, v in doc["J"]} == want.J


def test_read_qubo_text_tolerates_reordering(tmp_path):
    path = tmp_path / "scrambled.qubo.txt"
    path.write_text(
        "# free-form comment\n"
        "n 3\n"
        "2 0 5.0\n"           # reversed pair folds to (0, 2)
        "# c 20\n"
        "1 1 -12\n"
        "\n"
        "0 0 -11\n"
        "2 2 -24\n"
        "1 2 0\n"             # explicit zero is dropped
        "# lambda 10\n"
    )
    qubo = read_qubo_text(path)
    assert qubo.m == 3
    assert qubo.diag == (-11.0, -12.0, -24.0)
    assert qubo.offdiag == {(0, 2): 5.0}
    assert qubo.c == 20.0 and qubo.lam == 10.0


def test_read_qubo_text_rejects_duplicates_and_garbage(tmp_path):
    dup = tmp_path / "dup.qubo.txt"
    dup.write_text("n 2\n0 1 3.0\n1 0 4.0\n")
    with pytest.raises(ParseError):
        read_qubo_text(dup)
    missing = tmp_path / "missing.qubo.txt"
    missing.write_text("0 0 1.0\n")
    with pytest.raises(ParseError):
        read_qubo_text(missing)
    bad = tmp_path / "bad.qubo.txt"
    bad.write_text("n 2\n0 5 1.0\n")
    with pytest.raises(ParseError):
        read_qubo_text(bad)


# ------------------------------------------------------------------- analyze


def test_analyze_stdout_layout(capsys):
    code, out, _ = run_cli(
        capsys, "analyze", "--agents", "2..4", "--p", "1,50", "--s-mode", "min"
    )
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 1 + 3 * 2
    assert all(line.split(",")[2] == "min" for line in lines[1:])


def test_analyze_all_modes_are_mode_major(capsys):
    code, out, _ = run_cli(capsys, "analyze", "--agents", "2..3", "--p", "1")
    assert code == 0
    modes = [line.split(",")[2] for line in out.splitlines()[1:]]
    assert modes == ["min"] * 2 + ["max"] * 2 + ["actual"] * 2


def test_analyze_out_file_matches_stdout(tmp_path, capsys):
    out_path = tmp_path / "table.csv"
    code, _, _ = run_cli(
        capsys, "analyze", "--agents", "2..6", "--p", "1,10", "--out", str(out_path)
    )
    assert code == 0
    code, out, _ = run_cli(capsys, "analyze", "--agents", "2..6", "--p", "1,10")
    assert out_path.read_text() == out


def test_analyze_rejects_out_of_range_agents(capsys):
    code, _, err = run_cli(capsys, "analyze", "--agents", "1..4", "--p", "1")
    assert code == 2
    assert stderr_error(err)["kind"] == "ConfigError"


# --------------------------------------------------------------------- bench


def test_bench_grid_outputs(tmp_path, capsys):
    out_dir = tmp_path / "grid"
    code, out, _ = run_cli(
        capsys, "bench", "--methods", "dp,qubo-brute", "--agents", "2..3",
        "--dists", "abu,mu", "--seeds", "2", "--out", str(out_dir),
    )
    assert code == 0
    assert out.strip() == str(out_dir / "summary.csv")
    cells = sorted(p.name for p in out_dir.glob("*.json"))
    assert len(cells) == 2 * 2 * 2 * 2
    assert "dp_abu_n2_seed0.json" in cells
    lines = (out_dir / "summary.csv").read_text().splitlines()
    assert lines[0] == (
        "method,dist,n,seed,best_value,feasible,reference_value,matches_reference,wall_ms"
    )
    assert len(lines) == 1 + 16
    for line in lines[1:]:
        fields = line.split(",")
        assert fields[5] == "true"
        assert fields[7] == "true"
        assert math.isclose(float(fields[4]), float(fields[6]), rel_tol=1e-9)


def test_bench_rejects_unknown_method(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "bench", "--methods", "magic", "--agents", "2", "--out", str(tmp_path / "x")
    )
    assert code == 2
    assert stderr_error(err)["kind"] == "ConfigError"


def test_bench_rejects_unknown_dist(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "bench", "--methods", "dp", "--agents", "2", "--dists", "cauchy",
        "--out", str(tmp_path / "x"),
    )
    assert code == 2
    assert stderr_error(err)["kind"] == "ConfigError"
