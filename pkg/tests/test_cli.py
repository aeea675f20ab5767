import json
import math
import re

import pytest

from cordeco.cli.main import main
from cordeco.cli.config import ConfigError, parse_config, validate
from cordeco.cli.scenarios import EXIT_NON_CP, OUTPUT_DIR_ENV, run_scenario
from cordeco.diagnostics import CODES


def write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def csv_body(path):
    return "\n".join(line for line in path.read_text().splitlines() if not line.startswith("#"))


# --- parse_config -------------------------------------------------------------------

def test_minimal_config_gets_defaults(tmp_path):
    cfg = parse_config(write(tmp_path, "scenario: two-qubit-rates\n"))
    assert cfg.kernel["kind"] == "exponential" and cfg.kernel["a"] == 1.0
    assert cfg.system["n_qubits"] == 2
    assert cfg.run["outputs"] == ["csv", "json"]
    assert cfg.warnings == []
    assert re.fullmatch(r"[0-9a-f]{12}", cfg.digest)


def test_negative_decay_parameter_named(tmp_path):
    with pytest.raises(ConfigError) as info:
        parse_config(write(tmp_path, "scenario: two-qubit-rates\nkernel: {kind: exponential, a: -1}\n"))
    assert any(e.startswith("kernel.a:") for e in info.value.errors)


def test_all_violations_reported():
    raw = {"scenario": "scaling", "kernel": {"kind": "gaussian", "a": 0, "bogus": 1},
           "system": {"n_qubits": 9}, "run": {"regime": "weird"}}
    with pytest.raises(ConfigError) as info:
        validate(raw)
    fields = {e.split(":")[0] for e in info.value.errors}
    assert {"kernel.a", "kernel.bogus", "system.n_qubits", "run.regime"} <= fields


def test_unknown_scenario_and_kind():
    with pytest.raises(ConfigError) as info:
        validate({"scenario": "nope", "kernel": {"kind": "mystery"}})
    assert len(info.value.errors) == 2


def test_non_finite_rejected():
    with pytest.raises(ConfigError, match="finite"):
        validate({"scenario": "two-qubit-rates", "kernel": {"kind": "exponential", "a": math.inf}})


def test_step_propagate_warns(tmp_path):
    cfg = parse_config(write(tmp_path, "scenario: propagate\nkernel: {kind: step}\nsystem: {n_qubits: 3}\n"))
    assert [w.code for w in cfg.warnings] == ["W003"]
    ok = parse_config(write(tmp_path, "scenario: propagate\nkernel: {kind: gaussian, a: 0.5}\nsystem: {n_qubits: 3}\n"))
    assert ok.warnings == []


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_config(tmp_path / "absent.yaml")


def test_tabulated_path_resolved_relative(tmp_path):
    (tmp_path / "k.csv").write_text("omega,dx,c_real,c_imag\n0,0,1,0\n0,1,0.5,0\n")
    cfg = parse_config(write(tmp_path, "scenario: two-qubit-rates\nkernel: {kind: tabulated, path: k.csv}\n"
                                       "run: {simulate: false}\n"))
    assert cfg.kernel["path"] == str(tmp_path / "k.csv")


# --- run_scenario ----------------------------------------------------------------------

def test_two_qubit_rates_report(tmp_path):
    cfg = validate({"scenario": "two-qubit-rates", "kernel": {"kind": "exponential", "a": 1.0}})
    rep = run_scenario(cfg, out_dir=tmp_path)
    data = json.loads((tmp_path / f"two-qubit-rates-{cfg.digest}.json").read_text())
    an = data["results"]["rates"][0]["analytic"]
    assert an["gamma_minus"] == pytest.approx(1 - math.exp(-1), rel=1e-15)
    sim = data["results"]["rates"][0]["simulated"]
    assert sim["gamma_minus"] == pytest.approx(an["gamma_minus"], rel=0.01)
    assert rep.exit_status == 0
    assert sorted(p.rsplit(".", 1)[1] for p in rep.files) == ["csv", "json"]


def test_positivity_audit_step(tmp_path):
    cfg = validate({"scenario": "positivity-audit", "kernel": {"kind": "step"}, "run": {"sizes": [3]}})
    rep = run_scenario(cfg, out_dir=tmp_path)
    assert rep.exit_status == EXIT_NON_CP
    audit = rep.results["audits"][0]
    assert audit["decision"] == "not-mappable"
    assert audit["witness"]["minor"]["det"] == -1.0
    assert {w.code for w in rep.warnings} == {"W003", "W007"}


def test_scaling_table(tmp_path):
    cfg = validate({"scenario": "scaling", "system": {"n_qubits": 4},
                    "kernel": {"kind": "exponential"}, "run": {"a_values": [20.0, 1e-3]}})
    rep = run_scenario(cfg, workers=2, out_dir=tmp_path)
    table = {(r["a"], r["bra"], r["ket"]): r for r in rep.results["scaling"]}
    uncorr = table[(20.0, "0011", "1100")]
    gamma = uncorr["prediction"]["gamma"]
    assert uncorr["simulated_rate"] == pytest.approx(4 * gamma, rel=0.02)
    assert table[(1e-3, "0011", "1100")]["simulated_rate"] <= 0.02 * 4 * gamma
    assert table[(1e-3, "0000", "1111")]["simulated_rate"] == pytest.approx(16 * gamma, rel=0.02)


def test_rates_scenarios_for_lattice_baths(tmp_path):
    ising = validate({"scenario": "ising-rates", "kernel": {"kind": "ising", "beta": 0.5},
                      "run": {"distances": [1, 3], "simulate": False}})
    rep = run_scenario(ising, out_dir=tmp_path)
    for entry in rep.results["rates"]:
        assert entry["spectral_gamma_minus"] == pytest.approx(entry["analytic"]["gamma_minus"], rel=1e-9)
    bos = validate({"scenario": "bosonic-rates", "kernel": {"kind": "bosonic-chain"},
                    "run": {"distances": [2], "simulate": False}})
    rep = run_scenario(bos, out_dir=tmp_path)
    assert rep.results["rates"][0]["correlation_ratio"] == pytest.approx(-1.0, abs=1e-3)


def test_propagate_step_kernel_not_cp(tmp_path):
    cfg = validate({"scenario": "propagate", "kernel": {"kind": "step"}, "system": {"n_qubits": 3},
                    "run": {"times": {"start": 0, "stop": 4, "num": 41}}})
    rep = run_scenario(cfg, out_dir=tmp_path)
    assert rep.results["min_eigenvalue"] < -1e-6
    assert [w.code for w in rep.warnings].count("W003") == 2


def test_rerun_is_byte_identical(tmp_path):
    raw = {"scenario": "propagate", "kernel": {"kind": "gaussian", "a": 0.3},
           "system": {"n_qubits": 2, "splittings": [1.0, 1.5], "couplings": "zx"},
           "run": {"times": {"start": 0, "stop": 3, "num": 31}}}
    cfg = validate(raw)
    a = run_scenario(cfg, out_dir=tmp_path / "a")
    b = run_scenario(validate(raw), out_dir=tmp_path / "b")
    for fa, fb in zip(a.files, b.files):
        with open(fa, "rb") as x, open(fb, "rb") as y:
            assert x.read() == y.read()
    assert csv_body(tmp_path / "a" / f"propagate-{cfg.digest}.csv")


def test_warning_codes_documented(tmp_path):
    configs = [
        {"scenario": "propagate", "kernel": {"kind": "step"}, "system": {"n_qubits": 3}},
        {"scenario": "positivity-audit", "kernel": {"kind": "step"}, "run": {"sizes": [3, 4]}},
        {"scenario": "propagate", "kernel": {"kind": "ising"},
         "system": {"n_qubits": 2, "splittings": 3.0, "couplings": "x"},
         "run": {"times": {"start": 0, "stop": 1, "num": 11}, "generator": "secular"}},
    ]
    seen = set()
    for raw in configs:
        rep = run_scenario(validate(raw), out_dir=tmp_path)
        seen |= {w.code for w in rep.warnings}
    assert seen and seen <= set(CODES)


def test_floats_written_with_17_digits(tmp_path):
    cfg = validate({"scenario": "two-qubit-rates", "kernel": {"kind": "exponential", "a": 0.3},
                    "run": {"simulate": False}})
    rep = run_scenario(cfg, out_dir=tmp_path)
    csv_path = next(p for p in rep.files if p.endswith(".csv"))
    row = csv_body(tmp_path / csv_path.rsplit("/", 1)[1]).splitlines()[1].split(",")
    assert float(row[1]) == 1 - math.exp(-0.3)
    assert row[1] == format(1 - math.exp(-0.3), ".17g")


# --- main() --------------------------------------------------------------------------------

def test_main_run_and_env_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path / "out"))
    path = write(tmp_path, "scenario: two-qubit-rates\nrun: {simulate: false}\n")
    assert main(["run", str(path)]) == 0
    printed = capsys.readouterr().out.split()
    assert len(printed) == 2 and all(p.startswith(str(tmp_path / "out")) for p in printed)


def test_main_positivity_audit_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    path = write(tmp_path, "scenario: positivity-audit\nkernel: {kind: step}\nrun: {sizes: [3]}\n")
    assert main(["run", str(path)]) == 2
    assert "W007" in capsys.readouterr().err


def test_main_errors(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.yaml")]) == 1
    bad = write(tmp_path, "scenario: two-qubit-rates\nkernel: {a: -1}\n")
    assert main(["validate", str(bad)]) == 1
    assert "kernel.a" in capsys.readouterr().err
    broken = write(tmp_path, "scenario: [unclosed\n", "broken.yaml")
    assert main(["validate", str(broken)]) == 1


def test_main_validate_and_list(tmp_path, capsys):
    path = write(tmp_path, "scenario: scaling\nsystem: {n_qubits: 4}\n")
    assert main(["validate", str(path)]) == 0
    assert capsys.readouterr().out.startswith("ok: scaling config ")
    assert main(["list-scenarios"]) == 0
    out = capsys.readouterr().out
    for name in ("two-qubit-rates", "ising-rates", "bosonic-rates", "scaling", "positivity-audit", "propagate"):
        assert name in out


def test_main_rejects_positional_extras():
    with pytest.raises(SystemExit):
        main(["run"])
