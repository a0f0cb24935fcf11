"""Command-line front end: dispatch, exit codes, artifacts, reproducibility."""

import json

import numpy as np
import pytest

from galelab import cli
from galelab.core import load_gambler, gambler_to_json
from galelab.sequences import f_family, prng_source, read_sequence


def run(*argv):
    return cli.main(list(argv))


def read_csv_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


# ---------------------------------------------------------------------------
# gen-seq / simulate round trip
# ---------------------------------------------------------------------------

def test_gen_seq_writes_the_derived_sequence(tmp_path, capsys):
    out = tmp_path / "y.seq"
    assert run("gen-seq", "--variant", "F", "--h", "2", "--seed", "1",
               "--n", "5000", "--out", str(out)) == 0
    echoed = capsys.readouterr().out
    assert echoed.startswith("# config ")
    src = read_sequence(out)
    ref = f_family(2, "F", prng_source(1))
    assert np.array_equal(src.prefix_array(5000), ref.prefix_array(5000))


def test_gen_seq_is_reproducible_byte_for_byte(tmp_path):
    a, b = tmp_path / "a.seq", tmp_path / "b.seq"
    args = ["gen-seq", "--variant", "Fprime", "--h", "2", "--seed", "7",
            "--n", "4096"]
    assert run(*args, "--out", str(a)) == 0
    assert run(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_parity_gambler_full_horizon(tmp_path):
    seq = tmp_path / "y.seq"
    csv_out = tmp_path / "t.csv"
    assert run("gen-seq", "--variant", "F", "--h", "2", "--seed", "1",
               "--n", "100000", "--out", str(seq)) == 0
    assert run("simulate", "--gambler", "parity:h=2", "--seq", str(seq),
               "--out", str(csv_out)) == 0
    header, rows = read_csv_rows(csv_out)
    assert header[:2] == ["n", "log2_capital"]
    assert rows[-1][0] == "100000"
    assert float(rows[-1][1]) == 19999.0


def test_simulate_sgale_columns(tmp_path):
    seq = tmp_path / "y.seq"
    csv_out = tmp_path / "t.csv"
    run("gen-seq", "--variant", "F", "--h", "2", "--seed", "1",
        "--n", "500", "--out", str(seq))
    assert run("simulate", "--gambler", "parity:h=2", "--seq", str(seq),
               "--sgale", "0.8", "--sgale", "0.9",
               "--out", str(csv_out)) == 0
    header, rows = read_csv_rows(csv_out)
    assert header == ["n", "log2_capital", "sgale_0.8", "sgale_0.9"]
    n, log2cap = 500, float(rows[-1][1])
    assert float(rows[-1][2]) == pytest.approx(log2cap - 0.2 * n, abs=1e-6)


def test_simulate_over_length_fails_validation(tmp_path):
    seq = tmp_path / "y.seq"
    run("gen-seq", "--variant", "F", "--h", "2", "--seed", "1",
        "--n", "100", "--out", str(seq))
    assert run("simulate", "--gambler", "parity:h=2", "--seq", str(seq),
               "--n", "5000", "--out", str(tmp_path / "t.csv")) == 1


# ---------------------------------------------------------------------------
# build-gambler / combine / verify
# ---------------------------------------------------------------------------

def test_build_and_verify_round_trip(tmp_path):
    g = tmp_path / "g.json"
    assert run("build-gambler", "--kind", "parity", "--h", "2",
               "--out", str(g)) == 0
    spec = load_gambler(g)
    assert spec.head_count == 3
    assert run("verify", "--check", "martingale", "--gambler", str(g),
               "--depth", "10") == 0
    assert run("verify", "--check", "speeds", "--gambler", str(g),
               "--n-max", "10000") == 0
    assert run("verify", "--check", "spec", "--gambler", str(g)) == 0


def test_verify_rejects_invalid_gambler_file(tmp_path):
    g = tmp_path / "bad.json"
    doc = gambler_to_json(__import__("galelab").build_parity_gambler(1))
    doc["betting_states"][0]["bets"] = ["1/2", "1/4"]
    g.write_text(json.dumps(doc))
    assert run("verify", "--check", "spec", "--gambler", str(g)) == 1


def test_verify_parity_structure_command():
    assert run("verify", "--check", "parity", "--h", "2", "--variant", "F",
               "--seed", "3", "--n", "2000") == 0


def test_combine_head_count(tmp_path):
    a, b, c = (tmp_path / name for name in ("a.json", "b.json", "c.json"))
    run("build-gambler", "--kind", "fprime", "--h", "2", "--out", str(a))
    run("build-gambler", "--kind", "fdoubleprime", "--h", "2", "--out", str(b))
    assert run("combine", "--g1", str(a), "--g2", str(b),
               "--epsilon", "1/10", "--out", str(c)) == 0
    doc = json.loads(c.read_text())
    assert doc["head_count"] == 2 + 2 - 1
    assert doc["config"]["epsilon"] == "1/10"


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def test_sweep_command_and_report(tmp_path, capsys):
    out = tmp_path / "sweep.jsonl"
    assert run("sweep", "--h", "1", "--seq-seed", "1", "--n", "2000",
               "--samples", "5", "--rng-seed", "0",
               "--include", "parity:h=1", "--out", str(out)) == 0
    lines = [json.loads(ln) for ln in out.read_text().splitlines()]
    assert lines[0]["type"] == "config"
    assert lines[-1]["type"] == "summary"
    assert lines[-1]["best_overall_id"] == "parity_h1"
    assert run("report", "--in", str(out)) == 0
    assert "parity_h1" in capsys.readouterr().out


def test_sweep_reports_are_reproducible(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    args = ["sweep", "--h", "1", "--seq-seed", "2", "--n", "1000",
            "--samples", "4", "--rng-seed", "5"]
    assert run(*args, "--out", str(a)) == 0
    assert run(*args, "--out", str(b)) == 0
    assert a.read_bytes() == b.read_bytes()


def test_instability_command(tmp_path):
    out = tmp_path / "inst.jsonl"
    assert run("instability", "--h", "2", "--seed", "1", "--n", "2000",
               "--epsilon", "1/10", "--out", str(out)) == 0
    lines = [json.loads(ln) for ln in out.read_text().splitlines()]
    assert lines[-1]["type"] == "summary"
    assert set(lines[-1]["matrix"]) == {"fprime", "fdoubleprime"}


def test_estimate_dim_command(tmp_path):
    seq = tmp_path / "y.seq"
    out = tmp_path / "dim.jsonl"
    run("gen-seq", "--variant", "F", "--h", "2", "--seed", "1",
        "--n", "20000", "--out", str(seq))
    assert run("estimate-dim", "--seq", str(seq), "--gambler", "parity:h=2",
               "--gambler", "uniform", "--out", str(out)) == 0
    summary = [json.loads(ln) for ln in out.read_text().splitlines()][-1]
    assert abs(summary["aggregate_upper_bound"] - 0.8) <= 0.01


# ---------------------------------------------------------------------------
# configs and exit codes
# ---------------------------------------------------------------------------

def test_config_file_defaults_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"variant": "F", "h": 2, "seed": 1, "n": 100}))
    out1 = tmp_path / "one.seq"
    assert run("gen-seq", "--config", str(cfg), "--out", str(out1)) == 0
    assert read_sequence(out1).length == 100
    out2 = tmp_path / "two.seq"
    assert run("gen-seq", "--config", str(cfg), "--n", "250",
               "--out", str(out2)) == 0
    assert read_sequence(out2).length == 250


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "galelab.cli", "verify", "--check", "parity",
         "--h", "2", "--seed", "1", "--n", "500"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "parity structure verified" in proc.stdout
    usage = subprocess.run([sys.executable, "-m", "galelab.cli"],
                           capture_output=True, text=True)
    assert usage.returncode == 64


def test_unknown_flag_exits_64(capsys):
    assert run("gen-seq", "--no-such-flag") == 64
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_command_exits_64():
    assert run("frobnicate") == 64


def test_missing_required_option_exits_64(tmp_path):
    assert run("gen-seq", "--variant", "F", "--h", "2", "--seed", "1") == 64


def test_missing_file_exits_2(tmp_path):
    assert run("simulate", "--gambler", "parity:h=2",
               "--seq", str(tmp_path / "absent.seq"),
               "--out", str(tmp_path / "t.csv")) == 2


def test_malformed_sequence_file_exits_2(tmp_path):
    bad = tmp_path / "bad.seq"
    bad.write_bytes(b"JUNKJUNKJUNKJUNK")
    assert run("simulate", "--gambler", "parity:h=2", "--seq", str(bad),
               "--out", str(tmp_path / "t.csv")) == 2


def test_bad_rational_exits_64(tmp_path):
    a = tmp_path / "a.json"
    run("build-gambler", "--kind", "fprime", "--h", "2", "--out", str(a))
    assert run("combine", "--g1", str(a), "--g2", str(a),
               "--epsilon", "zebra", "--out", str(tmp_path / "c.json")) == 64


def test_unsupported_h_is_validation_failure(tmp_path):
    assert run("build-gambler", "--kind", "parity", "--h", "99",
               "--out", str(tmp_path / "g.json")) == 1


def test_csv_embeds_config_line(tmp_path):
    seq = tmp_path / "y.seq"
    csv_out = tmp_path / "t.csv"
    run("gen-seq", "--variant", "F", "--h", "2", "--seed", "1",
        "--n", "200", "--out", str(seq))
    run("simulate", "--gambler", "parity:h=2", "--seq", str(seq),
        "--out", str(csv_out))
    first = csv_out.read_text().splitlines()[0]
    assert first.startswith("# ")
    embedded = json.loads(first[2:])
    assert embedded["command"] == "simulate"
    assert embedded["n"] == 200
