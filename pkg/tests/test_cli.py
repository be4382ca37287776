"""End-to-end tests for the command-line front end."""

import json
import math

import numpy as np
import pytest

from potts_infer.cli import build_parser, main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_beta_critical_q3(capsys):
    code, out, _ = run_cli(capsys, "meanfield", "--beta-critical", "--q", "3")
    assert code == 0
    assert out.strip() == "2.772588722239781"


def test_beta_critical_q2(capsys):
    code, out, _ = run_cli(capsys, "meanfield", "--beta-critical", "--q", "2")
    assert code == 0
    assert float(out) == 2.0


def test_meanfield_maximizer_on_line(capsys):
    code, out, _ = run_cli(capsys, "meanfield", "--q", "3", "--beta", "0",
                           "--B", "-0.405465,0.510826")
    assert code == 0
    sol = json.loads(out)
    assert np.allclose(sol["maximizer"], [0.2, 0.5, 0.3], atol=1e-5)
    assert sol["unique"] is True


def test_meanfield_line(capsys):
    code, out, _ = run_cli(capsys, "meanfield", "--line", "--q", "3",
                           "--m", "0.2,0.5,0.3", "--beta", "1.5")
    assert code == 0
    rec = json.loads(out)
    assert rec["beta"] == 1.5
    expect = [math.log(0.2 / 0.3) + 1.5 * (0.3 - 0.2),
              math.log(0.5 / 0.3) + 1.5 * (0.3 - 0.5)]
    assert np.allclose(rec["field"], expect, atol=1e-12)


def test_meanfield_line_missing_m_is_validation_error(capsys):
    code, _, err = run_cli(capsys, "meanfield", "--line", "--q", "3",
                           "--beta", "1.0")
    assert code == 1
    assert "--m" in err


def test_coupling_sample_fit_pipeline(tmp_path, capsys):
    mat = tmp_path / "a.txt"
    cfg = tmp_path / "x.txt"
    code, _, _ = run_cli(capsys, "coupling", "--kind", "erdos-renyi",
                         "--n", "60", "--p", "0.2", "--seed", "3",
                         "--out", str(mat))
    assert code == 0
    assert mat.read_text().startswith("potts-coupling v1")
    code, _, _ = run_cli(capsys, "sample", "--matrix", str(mat), "--q", "3",
                         "--beta", "0.5", "--B", "0.3,-0.2",
                         "--sweeps", "1", "--seed", "7", "--out", str(cfg))
    assert code == 0
    code, out, _ = run_cli(capsys, "fit", "--matrix", str(mat),
                           "--config", str(cfg), "--q", "3")
    assert code == 0
    rec = json.loads(out)
    assert rec["status"] in ("converged", "not_exists")
    assert len(rec["field_hat"]) == 2
    assert set(rec["existence"]) >= {"in_lambda", "in_omega", "joint_exists"}


def test_fit_monochromatic_reports_nonexistence_with_exit_zero(tmp_path, capsys):
    mat = tmp_path / "a.txt"
    cfg = tmp_path / "x.txt"
    run_cli(capsys, "coupling", "--kind", "curie-weiss", "--n", "8",
            "--out", str(mat))
    cfg.write_text(" ".join(["1"] * 8) + "\n")
    code, out, _ = run_cli(capsys, "fit", "--matrix", str(mat),
                           "--config", str(cfg), "--q", "3")
    assert code == 0
    rec = json.loads(out)
    assert rec["existence"]["joint_exists"] is False
    assert rec["status"] == "not_exists"


def test_fit_partial_modes(tmp_path, capsys):
    mat = tmp_path / "a.txt"
    cfg = tmp_path / "x.txt"
    run_cli(capsys, "coupling", "--kind", "erdos-renyi", "--n", "50",
            "--p", "0.3", "--seed", "1", "--out", str(mat))
    run_cli(capsys, "sample", "--matrix", str(mat), "--q", "3",
            "--beta", "0.6", "--sweeps", "1", "--seed", "4",
            "--out", str(cfg))
    code, out, _ = run_cli(capsys, "fit", "--matrix", str(mat),
                           "--config", str(cfg), "--q", "3",
                           "--mode", "beta", "--field-known", "0.0,0.0")
    assert code == 0
    assert "beta_hat" in json.loads(out)
    code, out, _ = run_cli(capsys, "fit", "--matrix", str(mat),
                           "--config", str(cfg), "--q", "3",
                           "--mode", "field", "--beta-known", "0.6")
    assert code == 0
    assert len(json.loads(out)["field_hat"]) == 2


def test_sample_reproducible_bytes(tmp_path, capsys):
    mat = tmp_path / "a.txt"
    run_cli(capsys, "coupling", "--kind", "circulant", "--n", "40",
            "--offsets", "1,2", "--out", str(mat))
    outs = []
    for name in ("s1.txt", "s2.txt"):
        out = tmp_path / name
        code, _, _ = run_cli(capsys, "sample", "--matrix", str(mat),
                             "--q", "3", "--beta", "0.8", "--sweeps", "5",
                             "--seed", "11", "--out", str(out))
        assert code == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_experiment_subcommand(tmp_path, capsys):
    csv_path = tmp_path / "rate.csv"
    cfg = {"kind": "rate", "q": 3, "n_values": [30], "replicates": 2,
           "beta_true": 0.6, "field_true": [0.2, -0.1],
           "family": "circulant4", "seed": 5, "out_path": str(csv_path)}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    code, _, _ = run_cli(capsys, "--threads", "1", "experiment",
                         "--config", str(cfg_path))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("n,") and len(lines) == 3


def test_unknown_flag_exits_one(capsys):
    code, _, err = run_cli(capsys, "meanfield", "--q", "3", "--bogus", "1")
    assert code == 1
    assert "bogus" in err


def test_missing_subcommand_exits_one(capsys):
    code, _, _ = run_cli(capsys)
    assert code == 1


def test_missing_matrix_file_exits_one(tmp_path, capsys):
    code, _, err = run_cli(capsys, "fit", "--matrix", str(tmp_path / "no.txt"),
                           "--config", str(tmp_path / "no2.txt"), "--q", "3")
    assert code == 1
    assert "no.txt" in err


def test_bad_experiment_config_key_exits_one(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"kind": "rate", "bogus_key": 1}))
    code, _, err = run_cli(capsys, "experiment", "--config", str(cfg_path))
    assert code == 1
    assert "bogus_key" in err


def test_unwritable_output_exits_two(tmp_path, capsys):
    cfg = {"kind": "rate", "n_values": [10], "replicates": 1,
           "field_true": [0.1, 0.0], "family": "circulant4",
           "out_path": str(tmp_path)}
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    code, _, err = run_cli(capsys, "experiment", "--config", str(cfg_path))
    assert code == 2
    assert "runtime error" in err


HELP_KEYS = {
    "coupling": ["kind", "n", "p", "seed", "alpha", "p1", "p2", "q-between",
                 "part1", "part2", "offsets", "out"],
    "sample": ["matrix", "q", "beta", "B", "sampler", "sweeps", "burn-in",
               "thin", "scan", "seed", "out"],
    "fit": ["matrix", "config", "index", "q", "mode", "beta-known",
            "field-known"],
    "meanfield": ["q", "beta", "B", "n-starts", "seed", "beta-critical",
                  "line", "m"],
    "experiment": ["kind", "q", "n_values", "p_values", "beta_grid",
                   "m_target", "beta_true", "field_true", "family",
                   "clique_fraction", "replicates", "sampler", "seed",
                   "out_path", "threads"],
}


@pytest.mark.parametrize("sub", sorted(HELP_KEYS))
def test_help_lists_all_schema_keys(sub, capsys):
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args([sub, "--help"])
    out = capsys.readouterr().out
    for key in HELP_KEYS[sub]:
        assert key in out, f"{sub} --help missing {key}"
