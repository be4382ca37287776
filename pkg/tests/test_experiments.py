import csv
import json

import numpy as np
import pytest

from potts_infer.experiments import (
    ConfigError,
    ExperimentConfig,
    SamplerOptions,
    beta_grid_values,
    run,
    splitmix64,
)


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def tiny_figure1(out, seed=5, threads=1, p_values=(0.2, 0.6)):
    return ExperimentConfig(
        kind="figure1", q=3, n_values=(24,), p_values=p_values,
        beta_grid=(0.0, 0.4, 0.2), m_target=(0.2, 0.5, 0.3),
        replicates=2, seed=seed, out_path=str(out), threads=threads,
        sampler=SamplerOptions(burn_in_sweeps=50))


def test_splitmix_is_stable_and_spreads():
    assert splitmix64(1, 2, 3) == splitmix64(1, 2, 3)
    seen = {splitmix64(0, i) for i in range(1000)}
    assert len(seen) == 1000


def test_beta_grid_is_inclusive_of_endpoints():
    grid = beta_grid_values((0.0, 2.0, 0.05))
    assert len(grid) == 41
    assert grid[0] == 0.0 and grid[-1] == pytest.approx(2.0, abs=1e-12)


def test_config_rejects_unknown_keys_and_bad_values(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"kind": "figure1", "bogus": 1}))
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json(bad)
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="nope").validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="rate", replicates=0).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="figure1", p_values=()).validate()
    with pytest.raises(ConfigError):
        ExperimentConfig(kind="figure1", p_values=(0.1,),
                         m_target=(0.5, 0.5)).validate()


def test_config_json_round_trip(tmp_path):
    cfg = ExperimentConfig(kind="rate", q=3, n_values=(50, 100),
                           beta_true=0.8, field_true=(0.4, -0.3),
                           family="circulant4", replicates=3, seed=7,
                           out_path="x.csv")
    path = tmp_path / "cfg.json"
    path.write_text(cfg.to_json())
    back = ExperimentConfig.from_json(path)
    assert back == cfg


def test_figure1_run_is_byte_deterministic(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(tiny_figure1(p1))
    run(tiny_figure1(p2))
    assert p1.read_bytes() == p2.read_bytes()


def test_threaded_run_matches_serial(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(tiny_figure1(p1, threads=1))
    run(tiny_figure1(p2, threads=4))
    assert p1.read_bytes() == p2.read_bytes()


def test_grid_permutation_permutes_rows_not_values(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run(tiny_figure1(p1, p_values=(0.2, 0.6)))
    run(tiny_figure1(p2, p_values=(0.6, 0.2)))
    key = lambda r: (r["p"], r["beta_true"], r["seed"])
    r1 = sorted(read_rows(p1), key=key)
    r2 = sorted(read_rows(p2), key=key)
    assert r1 == r2


def test_figure1_schema_and_field_columns(tmp_path):
    out = tmp_path / "f.csv"
    run(tiny_figure1(out))
    rows = read_rows(out)
    assert list(rows[0]) == ["n", "p", "seed", "beta_true", "B1", "B2",
                             "beta_hat", "B1_hat", "B2_hat", "status",
                             "t_stat", "u_stat", "grad_norm", "joint_exists"]
    # the true field column tracks the target-proportions line
    from potts_infer import inestimability_line
    for r in rows:
        b = inestimability_line(np.array([0.2, 0.5, 0.3]),
                                float(r["beta_true"]))
        assert float(r["B1"]) == pytest.approx(b[0], abs=1e-15)
        assert float(r["B2"]) == pytest.approx(b[1], abs=1e-15)
    # 2 p-values x 3 grid points x 2 replicates
    assert len(rows) == 12


def test_rate_run_reports_errors(tmp_path):
    out = tmp_path / "r.csv"
    cfg = ExperimentConfig(kind="rate", q=3, n_values=(30, 60),
                           beta_true=0.8, field_true=(0.4, -0.3),
                           family="circulant4", replicates=3, seed=3,
                           out_path=str(out),
                           sampler=SamplerOptions(burn_in_sweeps=100))
    run(cfg)
    rows = read_rows(out)
    assert len(rows) == 6
    for r in rows:
        err = np.sqrt((float(r["beta_hat"]) - 0.8) ** 2
                      + (float(r["B1_hat"]) - 0.4) ** 2
                      + (float(r["B2_hat"]) + 0.3) ** 2)
        assert float(r["error_l2"]) == pytest.approx(err, rel=1e-12)


def test_concentration_residuals_match_binomial_scale_at_zero_beta(tmp_path):
    out = tmp_path / "c.csv"
    cfg = ExperimentConfig(kind="concentration", q=2, n_values=(400,),
                           beta_true=0.0, field_true=(0.0,),
                           family="curie_weiss", replicates=60, seed=9,
                           out_path=str(out),
                           sampler=SamplerOptions(kind="gibbs",
                                                  burn_in_sweeps=2))
    run(cfg)
    rows = read_rows(out)
    resid = np.array([float(r["residual"]) for r in rows])
    # residual is |Binomial(n, 1/2) - n/2| * 2 / sqrt(n): mean = sqrt(2/pi)
    q95 = float(np.quantile(resid, 0.95))
    binom_q95 = 1.96  # two-sided normal quantile for the scaled count
    assert binom_q95 / 3 < q95 < binom_q95 * 3


def test_concentration_residual_scale_stable_in_n(tmp_path):
    out = tmp_path / "c2.csv"
    cfg = ExperimentConfig(kind="concentration", q=3, n_values=(100, 400),
                           beta_true=0.5, field_true=(0.0, 0.0),
                           family="curie_weiss", replicates=40, seed=10,
                           out_path=str(out),
                           sampler=SamplerOptions(kind="cw_augmented"))
    run(cfg)
    rows = read_rows(out)
    by_n = {}
    for r in rows:
        by_n.setdefault(int(r["n"]), []).append(float(r["residual"]))
    p95 = {n: np.quantile(v, 0.95) for n, v in by_n.items()}
    assert p95[400] < p95[100] * 2.0


def test_partial_run_schema_and_flags(tmp_path):
    out = tmp_path / "p.csv"
    cfg = ExperimentConfig(kind="partial", q=3, n_values=(50,),
                           beta_true=0.6, field_true=(0.3, -0.2),
                           family="curie_weiss", replicates=5, seed=12,
                           out_path=str(out),
                           sampler=SamplerOptions(kind="cw_augmented"))
    run(cfg)
    rows = read_rows(out)
    assert len(rows) == 5
    for r in rows:
        assert r["beta_status"] in {"converged", "not_exists", "diverged",
                                    "max_iters"}
        assert float(r["u_stat"]) >= 0


def test_seed_partition_invariance_of_rate_medians(tmp_path):
    def medians(seed, out):
        cfg = ExperimentConfig(kind="rate", q=2, n_values=(40,),
                               beta_true=0.6, field_true=(0.3,),
                               family="circulant4", replicates=30, seed=seed,
                               out_path=str(out),
                               sampler=SamplerOptions(burn_in_sweeps=100))
        run(cfg)
        return np.median([float(r["error_l2"]) for r in read_rows(out)])

    m1 = medians(100, tmp_path / "s1.csv")
    m2 = medians(200, tmp_path / "s2.csv")
    assert abs(m1 - m2) < 0.35  # disjoint seed blocks agree to Monte Carlo noise
