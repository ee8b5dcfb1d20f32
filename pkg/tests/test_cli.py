"""End-to-end tests for the command-line interface."""

import hashlib
import io
import json
import sys

import numpy as np
import pytest

from rankfuse.bench import METRICS_HEADER
from rankfuse.cli import main
from rankfuse.ltesim import (
    default_environment,
    default_expert_sets,
    run_cold_start,
    trace_csv_text,
    two_context_environment,
    two_context_expert_sets,
    write_env_json,
)
from rankfuse.perm import Permutation, cantor_encode


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def rows_of(out):
    lines = out.strip().splitlines()
    return lines[0], [line.split(",") for line in lines[1:]]


def trace_rows_of(out):
    import csv

    records = list(csv.reader(io.StringIO(out)))
    return records[0], records[1:]


@pytest.fixture()
def profile_file(tmp_path):
    path = tmp_path / "prof.txt"
    path.write_text("1,0,2\n2,1,0\n")
    return str(path)


@pytest.fixture()
def targets_file(tmp_path):
    path = tmp_path / "targets.txt"
    path.write_text("2,4,3,0,1\n4,1,2,0,3\n0,2,3,4,1\n")
    return str(path)


# ---------------------------------------------------------------------------
# aggregate


def test_aggregate_dictator_picks_heaviest_voter(capsys, profile_file):
    code, out, _ = run_cli(
        capsys, "aggregate", profile_file, "--algo", "dictator",
        "--weights", "0.2,0.8",
    )
    assert code == 0
    assert out == "2,1,0\n"


def test_aggregate_reads_stdin(capsys, monkeypatch):
    monkeypatch.setattr(sys, "stdin", io.StringIO("0,1,2\n0,1,2\n2,1,0\n"))
    code, out, _ = run_cli(capsys, "aggregate", "--algo", "tournament_greedy")
    assert code == 0
    assert out == "0,1,2\n"


def test_aggregate_unknown_algo_is_a_usage_error(profile_file):
    with pytest.raises(SystemExit) as excinfo:
        main(["aggregate", profile_file, "--algo", "nope"])
    assert excinfo.value.code == 2


def test_aggregate_gamma_requires_tournament_greedy(capsys, profile_file):
    code, _, err = run_cli(
        capsys, "aggregate", profile_file, "--algo", "borda", "--gamma", "0.9,0.9"
    )
    assert code == 2
    assert "gamma" in err


def test_aggregate_unit_gamma_matches_plain_output(capsys, profile_file):
    code, plain, _ = run_cli(
        capsys, "aggregate", profile_file, "--algo", "tournament_greedy"
    )
    assert code == 0
    code, decayed, _ = run_cli(
        capsys, "aggregate", profile_file, "--algo", "tournament_greedy",
        "--gamma", "1.0,1.0",
    )
    assert code == 0
    assert plain == decayed


def test_aggregate_bad_profile_is_a_runtime_error(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("0,1,2\n0,0,2\n")
    code, _, err = run_cli(capsys, "aggregate", str(bad))
    assert code == 1
    assert "error" in err and "line 2" in err


def test_aggregate_missing_file_is_a_runtime_error(capsys, tmp_path):
    code, _, err = run_cli(capsys, "aggregate", str(tmp_path / "nope.txt"))
    assert code == 1


# ---------------------------------------------------------------------------
# bench / weakpo / simplex / dataset


def test_bench_is_deterministic_and_schema_stable(capsys):
    args = ("bench", "--m", 5, "--n", 3, "--trials", 20, "--algos", "borda,dictator")
    code, first, _ = run_cli(capsys, *args)
    assert code == 0
    code, second, _ = run_cli(capsys, *args)
    assert first == second
    header, rows = rows_of(first)
    assert header == METRICS_HEADER
    assert [r[0] for r in rows] == ["borda", "dictator"]
    for r in rows:
        assert 0.0 < float(r[4]) < 1.0  # efficiency_mean
        assert r[6] == r[7] == r[8] == ""  # no pool metrics here


def test_bench_rejects_unknown_aggregator():
    with pytest.raises(SystemExit) as excinfo:
        main(["bench", "--m", "5", "--n", "3", "--algos", "borda,nope"])
    assert excinfo.value.code == 2


def test_bench_threads_do_not_change_the_output(capsys):
    base = ("bench", "--m", 6, "--n", 4, "--trials", 30, "--weights", "random")
    _, one, _ = run_cli(capsys, *base, "--threads", 1)
    _, four, _ = run_cli(capsys, *base, "--threads", 4)
    assert one == four


def test_weakpo_dictator_precision_is_exactly_one(capsys):
    code, out, _ = run_cli(
        capsys, "weakpo", "--m", 4, "--n", 3, "--samples", 40, "--seed", 11
    )
    assert code == 0
    _, rows = rows_of(out)
    by_name = {r[0]: r for r in rows}
    assert by_name["dictator"][7] == "1.000000"
    for r in rows:
        assert 0.0 <= float(r[7]) <= 1.0 and 0.0 <= float(r[8]) <= 1.0


def test_simplex_grid_three_has_ten_rows_with_target_vertices(capsys, targets_file):
    code, out, _ = run_cli(capsys, "simplex", "--targets", targets_file, "--grid", 3)
    assert code == 0
    header, rows = rows_of(out)
    assert header == "x,y,z,code"
    assert len(rows) == 10
    codes = {(r[0], r[1], r[2]): int(r[3]) for r in rows}
    targets = [(2, 4, 3, 0, 1), (4, 1, 2, 0, 3), (0, 2, 3, 4, 1)]
    one, zero = "1.000000", "0.000000"
    assert codes[(one, zero, zero)] == cantor_encode(Permutation(targets[0]))
    assert codes[(zero, one, zero)] == cantor_encode(Permutation(targets[1]))
    assert codes[(zero, zero, one)] == cantor_encode(Permutation(targets[2]))


def test_dataset_runs_on_the_bundled_fixture(capsys):
    code, out, _ = run_cli(
        capsys, "dataset", "--voters", 5, "--trials", 3,
        "--algos", "tournament_greedy,borda",
    )
    assert code == 0
    _, rows = rows_of(out)
    assert [r[0] for r in rows] == ["tournament_greedy", "borda"]
    for r in rows:
        assert 0.0 < float(r[4]) < 1.0
        assert r[1] == "5" and r[9] == "3"


def test_dataset_fixture_keeps_the_efficiency_ordering(capsys):
    code, out, _ = run_cli(
        capsys, "dataset", "--voters", 50, "--trials", 50,
        "--algos", "tournament_greedy,borda",
    )
    assert code == 0
    _, rows = rows_of(out)
    by_name = {r[0]: float(r[4]) for r in rows}
    assert by_name["tournament_greedy"] <= by_name["borda"]


def test_dataset_accepts_a_permutation_list_file(capsys, tmp_path):
    path = tmp_path / "perms.txt"
    rng = np.random.default_rng(0)
    lines = [",".join(map(str, rng.permutation(6))) for _ in range(20)]
    path.write_text("\n".join(lines) + "\n")
    code, out, _ = run_cli(
        capsys, "dataset", "--file", str(path), "--voters", 4, "--trials", 2,
        "--algos", "borda",
    )
    assert code == 0
    _, rows = rows_of(out)
    assert rows[0][2] == "6"


def test_dataset_missing_file_is_a_runtime_error(capsys, tmp_path):
    code, _, err = run_cli(
        capsys, "dataset", "--file", str(tmp_path / "nope.csv"), "--voters", 3
    )
    assert code == 1


# ---------------------------------------------------------------------------
# toy


def test_toy_trace_rows_and_seed_numbering(capsys):
    code, out, _ = run_cli(
        capsys, "toy", "--alpha", 0.0, "--rounds", 2, "--seeds", 2, "--seed", 5
    )
    assert code == 0
    header, rows = rows_of(out)
    assert header == "seed,round,w0,w1,w2,reward"
    assert [(r[0], r[1]) for r in rows] == [
        ("5", "0"), ("5", "1"), ("6", "0"), ("6", "1"),
    ]
    for r in rows:
        w = [float(v) for v in r[2:5]]
        assert sum(w) == pytest.approx(1.0)
        assert 0.0 <= float(r[5]) <= 1.0


# ---------------------------------------------------------------------------
# sim


def test_sim_cold_start_is_a_thin_wrapper(capsys):
    code, out, _ = run_cli(capsys, "sim", "--policy", "ra-re", "--pages", 40,
                           "--seed", 9)
    assert code == 0
    trace = run_cold_start(
        default_environment(), default_expert_sets(), 40, np.random.default_rng(9)
    )
    assert out == trace_csv_text(trace)


def test_sim_ego_requires_a_cold_trace(capsys):
    code, _, err = run_cli(capsys, "sim", "--policy", "ra-ego", "--pages", 10)
    assert code == 2
    assert "--cold" in err


def test_sim_with_an_environment_file(capsys, tmp_path):
    env_path = tmp_path / "env.json"
    write_env_json(
        str(env_path), two_context_environment(), two_context_expert_sets()
    )
    code, out, _ = run_cli(
        capsys, "sim", "--env", str(env_path), "--policy", "ra-be", "--pages", 30
    )
    assert code == 0
    _, rows = trace_rows_of(out)
    assert len(rows) == 30 and all(r[2] == "ra-be" for r in rows)


def test_sim_env_without_experts_is_a_runtime_error(capsys, tmp_path):
    env_path = tmp_path / "env.json"
    write_env_json(str(env_path), two_context_environment())
    code, _, err = run_cli(
        capsys, "sim", "--env", str(env_path), "--policy", "ra-re", "--pages", 5
    )
    assert code == 1
    assert "expert" in err


def test_sim_warm_start_pipeline(capsys, tmp_path):
    cold_path = tmp_path / "cold.csv"
    code, _, _ = run_cli(
        capsys, "sim", "--policy", "ra-re", "--pages", 40, "--seed", 2,
        "--out", str(cold_path),
    )
    assert code == 0
    code, out, _ = run_cli(
        capsys, "sim", "--policy", "ra-ego", "--pages", 30, "--refresh", 15,
        "--cold", str(cold_path), "--seed", 2,
    )
    assert code == 0
    _, rows = trace_rows_of(out)
    assert len(rows) == 30 and all(r[2] == "ra-ego" for r in rows)


# ---------------------------------------------------------------------------
# out files, manifests, report


def test_out_writes_file_and_manifest_quietly(capsys, tmp_path):
    out_path = tmp_path / "bench.csv"
    code, out, _ = run_cli(
        capsys, "bench", "--m", 5, "--n", 3, "--trials", 5, "--out", str(out_path)
    )
    assert code == 0
    assert out == ""  # CSV goes to the file, not stdout
    text = out_path.read_text()
    assert text.startswith(METRICS_HEADER)
    manifest = json.loads((tmp_path / "bench.csv.manifest.json").read_text())
    digest = "sha256:" + hashlib.sha256(text.encode()).hexdigest()
    assert manifest["outputs"] == {"bench.csv": digest}
    assert manifest["schemas"] == {"bench.csv": "metrics/1"}
    assert manifest["command"] == "bench"
    assert manifest["seed"] == 0
    assert manifest["config"]["m"] == 5 and manifest["config"]["trials"] == 5
    assert manifest["version"]


def test_no_manifest_without_out(capsys, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, _, _ = run_cli(capsys, "bench", "--m", 4, "--n", 3, "--trials", 2)
    assert code == 0
    assert list(tmp_path.glob("*.manifest.json")) == []


def test_rerun_digests_match(capsys, tmp_path):
    digests = []
    for name in ("a.csv", "b.csv"):
        out_path = tmp_path / name
        run_cli(
            capsys, "weakpo", "--m", 4, "--n", 3, "--samples", 25,
            "--seed", 7, "--out", str(out_path),
        )
        manifest = json.loads((tmp_path / f"{name}.manifest.json").read_text())
        digests.append(manifest["outputs"][name])
    assert digests[0] == digests[1]


def test_report_compares_traces_and_renders_figures(capsys, tmp_path):
    for policy, name in (("ra-re", "re.csv"), ("ra-be", "be.csv")):
        code, _, _ = run_cli(
            capsys, "sim", "--policy", policy, "--pages", 60, "--seed", 4,
            "--out", str(tmp_path / name),
        )
        assert code == 0
    report_path = tmp_path / "report.csv"
    code, _, _ = run_cli(
        capsys, "report", str(tmp_path / "re.csv"), str(tmp_path / "be.csv"),
        "--baseline", "ra-re", "--out", str(report_path),
    )
    assert code == 0
    header, rows = rows_of(report_path.read_text())
    n = default_environment().n
    assert header == (
        "policy,pages,mean_reward,improvement_pct,ci_low,ci_high,"
        + ",".join(f"ktd_{j}" for j in range(n))
    )
    by_policy = {r[0]: r for r in rows}
    assert by_policy["ra-re"][3] == "0.000000"
    for r in rows:
        assert float(r[4]) <= float(r[2]) <= float(r[5])
    manifest = json.loads((tmp_path / "report.csv.manifest.json").read_text())
    assert set(manifest["figures"]) == {"report_rewards.png", "report_curves.png"}
    for fig in ("report_rewards.png", "report_curves.png"):
        assert (tmp_path / fig).read_bytes()[:4] == b"\x89PNG"


def test_report_unknown_baseline_is_a_runtime_error(capsys, tmp_path):
    trace_path = tmp_path / "re.csv"
    run_cli(
        capsys, "sim", "--policy", "ra-re", "--pages", 20,
        "--out", str(trace_path),
    )
    code, _, err = run_cli(
        capsys, "report", str(trace_path), str(trace_path), "--baseline", "ra-ego"
    )
    assert code == 1
    assert "baseline" in err
