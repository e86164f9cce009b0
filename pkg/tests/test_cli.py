import json
import math

import pytest

from qkdlab.cli import main, parse_int_sweep, parse_sweep, UsageError
from qkdlab.codes import ParityCode


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    header = lines[0].split(",")
    return [dict(zip(header, l.split(","))) for l in lines[1:]]


def test_sweep_grammar():
    assert parse_sweep("0.1") == [0.1]
    assert parse_sweep("1,2") == [1.0, 2.0]
    assert parse_sweep("0:1:3") == [0.0, 0.5, 1.0]
    vals = parse_sweep("log:0.01:1:3")
    assert all(abs(a - b) < 1e-15 for a, b in zip(vals, [0.01, 0.1, 1.0]))
    assert parse_int_sweep("2:12:11") == list(range(2, 13))
    with pytest.raises(UsageError):
        parse_sweep("a:b:c")
    with pytest.raises(UsageError):
        parse_int_sweep("0:1:3")


def test_ecc_info_header_and_columns(capsys):
    code, out, err = run(capsys, "ecc-info", "--code", "hamming:3", "--alpha", "0.01")
    assert code == 0 and err == ""
    assert out.startswith("# tool: qkdlab")
    row = table(out)[0]
    assert 60.0 <= float(row["coefficient"]) <= 61.2
    assert row["exponent"] == "4"
    assert float(row["I_total"]) <= float(row["I_sum_exact"])


def test_ecc_info_code_file(tmp_path, capsys):
    path = tmp_path / "c.json"
    ParityCode.from_strings(["11000", "01100"]).dump(path)
    code, out, _ = run(capsys, "ecc-info", "--code", str(path), "--alpha", "0.1,0.2")
    assert code == 0 and len(table(out)) == 2


def test_degrees_flag(capsys):
    _, a, _ = run(capsys, "parity-info", "--n", "3", "--alpha", "10", "--degrees")
    _, b, _ = run(capsys, "parity-info", "--n", "3", "--alpha", repr(math.radians(10)))
    assert table(a) == table(b)


def test_json_format(capsys):
    _, out, _ = run(capsys, "parity-info", "--n", "2:4:3", "--alpha", "0.1", "--format", "json")
    doc = json.loads(out)
    assert doc["meta"]["subcommand"] == "parity-info"
    assert len(doc["rows"]) == 3 and doc["columns"][:3] == ["n", "alpha", "r_mix"]


def test_attack_curve(capsys):
    code, out, _ = run(capsys, "attack-curve", "--scheme", "four-state", "--attack", "weak-swap",
                       "--n", "7", "--pe", "log:1e-5:1e-3:3")
    rows = table(out)
    assert code == 0 and len(rows) == 3
    vals = [float(r["bound"]) for r in rows]
    assert vals == sorted(vals)


def test_protocol_sim_writes_transcripts(tmp_path, capsys):
    code, out, _ = run(capsys, "protocol-sim", "--scheme", "bb84", "--qubits", "4000",
                       "--eve", "intercept:0:1:2", "--out-dir", str(tmp_path))
    rows = table(out)
    assert code == 0 and [r["param"] for r in rows] == ["intercept:0", "intercept:1"]
    assert float(rows[0]["p_e_observed"]) == 0.0
    assert sorted(p.name for p in tmp_path.iterdir()) == [
        "bb84_000.jsonl", "bb84_000.summary.json", "bb84_001.jsonl", "bb84_001.summary.json"]


def test_output_dir_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("QKDLAB_OUTPUT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "parity-info", "--n", "2", "--alpha", "0.1")
    assert code == 0 and out == ""
    assert (tmp_path / "parity-info.csv").read_text().startswith("# tool")


def test_qec_sim_fit_lines(capsys):
    code, out, _ = run(capsys, "qec-sim", "--chi", "0.05,0.1", "--trials", "10000")
    assert code == 0 and "# fit P_exponent=" in out
    _, out, err = run(capsys, "qec-sim", "--chi", "0.1", "--trials", "1000")
    assert "fit" not in out and "fits skipped" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["parity-info", "--n", "3"],
        ["parity-info", "--n", "3", "--alpha", "2.0"],
        ["parity-info", "--n", "3", "--alpha", "0.1", "--mix", "0.01", "--mode", "deterministic"],
        ["ecc-info", "--code", "hamming:1", "--alpha", "0.1"],
        ["ecc-info", "--code", "missing.json", "--alpha", "0.1"],
        ["ecc-info", "--code", "hamming:9", "--alpha", "0.1"],
        ["attack-curve", "--scheme", "four-state", "--attack", "ehpp", "--n", "7", "--pe", "0.01"],
        ["protocol-sim", "--scheme", "bb84", "--eve", "bogus:1"],
        ["qec-sim", "--code", "rur:5", "--chi", "0.1"],
    ],
)
def test_usage_errors_exit_nonzero(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    captured = capsys.readouterr()
    assert captured.out == "" and "error" in captured.err
