from __future__ import annotations

import json
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from mobiusq.circuits import TransformQuery, build_comparator
from mobiusq.cli import MINFIND_SCHEMA, TRANSFORM_SCHEMA, main
from mobiusq.sim import (
    AllOf,
    Circuit,
    Controlled,
    Hadamard,
    Mode,
    PauliX,
    QubitIs,
    state_from_json_obj,
)
from mobiusq.subset import BitString, SubsetTable, zeta_fast
from mobiusq.verify import run_verify


@pytest.fixture
def uniform3(tmp_path):
    path = tmp_path / "uniform3.json"
    path.write_text(json.dumps({"n": 3, "values": [0.125] * 8}))
    return str(path)


@pytest.fixture
def joint4(tmp_path):
    vals = [v / 136.0 for v in range(1, 17)]
    path = tmp_path / "joint4.json"
    path.write_text(json.dumps({"n": 4, "values": vals}))
    return str(path)


# ---------------------------------------------------------------------------
# transform commands


def test_mobius_single_point(uniform3, capsys):
    assert main(["mobius", "--input", uniform3, "--x", "110"]) == 0
    out = capsys.readouterr().out
    lines = out.strip().splitlines()
    assert lines[0].split() == ["x", "classical", "exact"]
    assert lines[1].split() == ["110", "0.5000000000", "0.5000000000"]


def test_mobius_sweep_writes_schema_valid_json(uniform3, tmp_path, capsys):
    out_path = tmp_path / "result.json"
    assert main(["mobius", "--input", uniform3, "--sweep", "--out", str(out_path)]) == 0
    obj = json.loads(out_path.read_text())
    jsonschema.validate(obj, TRANSFORM_SCHEMA)
    assert obj["command"] == "mobius"
    assert (obj["n"], obj["n0"]) == (3, 3)
    assert obj["shots"] is None and obj["seed"] is None
    truth = zeta_fast(SubsetTable(3, [0.125] * 8)).values
    assert len(obj["rows"]) == 8
    for row in obj["rows"]:
        xv = BitString.from_str(row["x"]).to_int()
        assert abs(row["exact"] - truth[xv]) <= 1e-9
        assert abs(row["classical"] - truth[xv]) <= 1e-12


def test_mobius_accepts_query_json(tmp_path, capsys):
    rng = np.random.default_rng(50)
    amps = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    amps /= np.linalg.norm(amps)
    q = TransformQuery(Mode.MOBIUS, 2, amps, BitString.from_str("11"))
    path = tmp_path / "query.json"
    q.save(path)
    assert main(["mobius", "--input", str(path), "--x", "01"]) == 0
    row = capsys.readouterr().out.strip().splitlines()[1].split()
    want = float(np.abs(amps[0]) ** 2 + np.abs(amps[1]) ** 2)
    assert row[0] == "01"
    assert abs(float(row[2]) - want) <= 1e-9


def test_usage_and_io_failures(uniform3, tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["mobius", "--input", str(bad), "--x", "000"]) == 1
    assert main(["mobius", "--input", str(tmp_path / "missing.json"), "--x", "0"]) == 2
    assert main(["mobius", "--input", uniform3, "--x", "11"]) == 1  # wrong length
    assert main(["mobius", "--input", uniform3, "--x", "110", "--sweep"]) == 1
    assert main(["mobius", "--input", uniform3]) == 1  # neither point nor sweep
    assert main(["mobius", "--input", uniform3, "--x", "1a0"]) == 1
    capsys.readouterr()


def test_mobius_rejects_non_probability_table(tmp_path, capsys):
    path = tmp_path / "t.json"
    path.write_text(json.dumps({"n": 2, "values": [0.5, 0.6, 0.1, 0.1]}))
    assert main(["mobius", "--input", str(path), "--x", "11"]) == 1
    assert "error" in capsys.readouterr().err


def test_marginal_needs_n0_for_table_inputs(joint4, capsys):
    assert main(["marginal", "--input", joint4, "--x", "000"]) == 1
    assert "--n0" in capsys.readouterr().err


def test_marginal_sweep_frozen_values(joint4, tmp_path, capsys):
    out_path = tmp_path / "marg.json"
    rc = main(
        ["marginal", "--input", joint4, "--sweep", "--n0", "3", "--out", str(out_path)]
    )
    assert rc == 0
    obj = json.loads(out_path.read_text())
    jsonschema.validate(obj, TRANSFORM_SCHEMA)
    rows = {r["x"]: r for r in obj["rows"]}
    assert abs(rows["000"]["exact"] - 10.0 / 136.0) <= 1e-9
    assert abs(sum(r["exact"] for r in obj["rows"]) - 1.0) <= 1e-9


def test_marginal_query_input_conflicting_n0(tmp_path, capsys):
    rng = np.random.default_rng(51)
    amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    amps /= np.linalg.norm(amps)
    q = TransformQuery(Mode.MARGINAL, 3, amps, BitString.from_str("10"), n0=2)
    path = tmp_path / "mq.json"
    q.save(path)
    assert main(["marginal", "--input", str(path), "--x", "01"]) == 0
    assert main(["marginal", "--input", str(path), "--x", "01", "--n0", "1"]) == 1
    # query mode must match the command
    assert main(["mobius", "--input", str(path), "--x", "01"]) == 1
    capsys.readouterr()


def test_shots_add_columns_and_are_reproducible(uniform3, capsys):
    argv = ["mobius", "--input", uniform3, "--x", "111", "--shots", "4000", "--seed", "5"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    header = first.strip().splitlines()[0].split()
    assert header == ["x", "classical", "exact", "estimate", "halfwidth"]
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    assert main(["mobius", "--input", uniform3, "--x", "111", "--shots", "4000", "--seed", "6"]) == 0
    assert capsys.readouterr().out != first


def test_transform_check_roundtrip(uniform3, tmp_path, capsys):
    out_path = tmp_path / "run.json"
    assert main(["mobius", "--input", uniform3, "--sweep", "--shots", "500", "--out", str(out_path)]) == 0
    capsys.readouterr()
    assert main(["mobius", "--input", uniform3, "--check", str(out_path)]) == 0
    assert "check: PASS" in capsys.readouterr().out

    obj = json.loads(out_path.read_text())
    obj["rows"][3]["exact"] += 1e-3
    out_path.write_text(json.dumps(obj))
    assert main(["mobius", "--input", uniform3, "--check", str(out_path)]) == 1
    assert "check: FAIL" in capsys.readouterr().out


def test_dump_state_writes_loadable_start_state(uniform3, tmp_path, capsys):
    dump = tmp_path / "state.json"
    assert main(["mobius", "--input", uniform3, "--x", "101", "--dump-state", str(dump)]) == 0
    state = state_from_json_obj(json.loads(dump.read_text()))
    assert state.layout.mode is Mode.MOBIUS
    assert (state.layout.n, state.layout.n0) == (3, 3)
    assert abs(state.norm - 1.0) <= 1e-12
    assert main(["mobius", "--input", uniform3, "--sweep", "--dump-state", str(dump)]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# minfind command


def test_minfind_builtin_objective(capsys):
    assert main(["minfind", "--center", "13", "--n", "5"]) == 0
    out = capsys.readouterr().out
    assert "result: 01101 (dec 13)" in out
    assert out.strip().splitlines()[0].split() == ["x", "value", "bit"]


def test_minfind_table_input(tmp_path, capsys):
    rng = np.random.default_rng(52)
    values = list(rng.random(16) + 0.5)
    path = tmp_path / "obj.json"
    path.write_text(json.dumps({"n": 4, "values": values}))
    assert main(["minfind", "--input", str(path)]) == 0
    out = capsys.readouterr().out
    want = int(np.argmin(values))
    assert f"(dec {want})" in out


def test_minfind_quantum_backend_matches_classical(capsys):
    assert main(["minfind", "--center", "5", "--n", "3"]) == 0
    classical = capsys.readouterr().out.strip().splitlines()[-1]
    assert main(["minfind", "--center", "5", "--n", "3", "--backend", "quantum"]) == 0
    quantum = capsys.readouterr().out.strip().splitlines()[-1]
    assert classical == quantum == "result: 101 (dec 5)"


def test_minfind_check_roundtrip(tmp_path, capsys):
    out_path = tmp_path / "trace.json"
    assert main(["minfind", "--center", "9", "--n", "4", "--out", str(out_path)]) == 0
    obj = json.loads(out_path.read_text())
    jsonschema.validate(obj, MINFIND_SCHEMA)
    assert obj["result"] == "1001"
    capsys.readouterr()

    assert main(["minfind", "--center", "9", "--n", "4", "--check", str(out_path)]) == 0
    assert "check: PASS" in capsys.readouterr().out

    obj["probes"][1]["value"] += 0.5
    out_path.write_text(json.dumps(obj))
    assert main(["minfind", "--center", "9", "--n", "4", "--check", str(out_path)]) == 1
    assert "check: FAIL" in capsys.readouterr().out


def test_minfind_usage_errors(tmp_path, capsys):
    obj = tmp_path / "obj.json"
    obj.write_text(json.dumps({"n": 2, "values": [2.0, 1.0, 3.0, 4.0]}))
    assert main(["minfind"]) == 1
    assert main(["minfind", "--input", str(obj), "--center", "1"]) == 1
    assert main(["minfind", "--center", "1"]) == 1  # missing --n
    assert main(["minfind", "--center", "1", "--n", "2", "--shots", "10"]) == 1
    capsys.readouterr()


# ---------------------------------------------------------------------------
# verify command and fault injection


def test_verify_passes_and_prints_one_line_per_check(capsys):
    assert main(["verify", "--seed", "0"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[-1] == "verify: PASS"
    checks = lines[:-1]
    assert len(checks) == 6
    assert all(line.startswith("PASS  ") for line in checks)


def _corrupted_comparator(query: TransformQuery) -> Circuit:
    """Comparator with the mobius violation predicate inverted."""
    if query.mode is not Mode.MOBIUS:
        return build_comparator(query)
    layout = query.layout
    am, al, be = layout.register("alpha_minus"), layout.register("alpha"), layout.register("beta")
    ops = []
    for j in range(layout.n0):
        ops.append(Hadamard(al[j]))
        pred = AllOf((QubitIs(am[j], 0), QubitIs(al[j], 1)))  # swapped sense
        ops.append(Controlled(pred, (PauliX(be[j]),)))
    return Circuit(layout, tuple(ops))


def test_fault_injection_is_caught_by_the_comparator_check():
    ok, lines = run_verify(seed=0, comparator_builder=_corrupted_comparator)
    assert not ok
    assert lines[0].startswith("FAIL  comparator-coefficients")
    assert "closed form" in lines[0]


def test_verify_cli_reports_failure_exit_code(capsys, monkeypatch):
    import mobiusq.cli as cli_mod

    monkeypatch.setattr(
        cli_mod, "run_verify", lambda seed: (False, ["FAIL  comparator-coefficients: boom"])
    )
    assert main(["verify"]) == 1
    assert "verify: FAIL" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# installed entry point


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "mobiusq.cli", "minfind", "--center", "6", "--n", "3"],
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 0
    assert "result: 110 (dec 6)" in proc.stdout
