"""Monte Carlo experiment harness with seeded, byte-stable CSV output.

Every run is a pure function of its config: per-row seeds are derived
from the master seed and the row's (grid index, replicate index) by a
splitmix64 hash, so rows can be computed in any order (or in parallel)
without changing their contents.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from potts_infer import coupling as cp
from potts_infer.meanfield import inestimability_line
from potts_infer.model import PottsParams, cw_augmented_sample, gibbs_sample
from potts_infer.mple import fit_beta, fit_field, fit_joint
from potts_infer.pseudolik import t_stat, u_stat


class ConfigError(ValueError):
    pass


MASK64 = (1 << 64) - 1


def splitmix64(*words: int) -> int:
    """Hash a tuple of integers into a 64-bit seed (splitmix64 chain)."""
    state = 0x9E3779B97F4A7C15
    for w in words:
        state = (state + (int(w) & MASK64) + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        state = z ^ (z >> 31)
    return state


@dataclass(frozen=True)
class SamplerOptions:
    kind: str = "gibbs"  # gibbs | cw_augmented
    burn_in_sweeps: int | None = None  # default: 10 * N
    scan: str = "systematic"

    def burn_in(self, n: int) -> int:
        return 10 * n if self.burn_in_sweeps is None else self.burn_in_sweeps


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str  # figure1 | rate | concentration | partial
    q: int = 3
    n_values: tuple = (100,)
    p_values: tuple = ()
    beta_grid: tuple = (0.0, 2.0, 0.01)  # (lo, hi, step), inclusive of hi
    m_target: tuple = (0.2, 0.5, 0.3)
    beta_true: float = 0.8
    field_true: tuple = ()
    family: str = "erdos_renyi"  # erdos_renyi | circulant4 | disjoint_cliques | curie_weiss
    clique_fraction: float = 0.7
    replicates: int = 1
    sampler: SamplerOptions = field(default_factory=SamplerOptions)
    seed: int = 0
    out_path: str = "experiment.csv"
    threads: int = 1

    def validate(self) -> None:
        if self.kind not in ("figure1", "rate", "concentration", "partial"):
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not self.n_values:
            raise ConfigError("n_values must be non-empty")
        if self.kind == "figure1":
            if not self.p_values:
                raise ConfigError("figure1 needs p_values")
            lo, hi, step = self.beta_grid
            if step <= 0 or hi < lo:
                raise ConfigError("beta_grid must be (lo, hi, step) with step > 0")
            if len(self.m_target) != self.q:
                raise ConfigError("m_target must have length q")
        else:
            if self.field_true and len(self.field_true) != self.q - 1:
                raise ConfigError("field_true must have length q-1")

    @staticmethod
    def from_json(path) -> "ExperimentConfig":
        with open(path) as f:
            raw = json.load(f)
        known = set(ExperimentConfig.__dataclass_fields__)
        for key in raw:
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
        if "sampler" in raw:
            sk = set(SamplerOptions.__dataclass_fields__)
            for key in raw["sampler"]:
                if key not in sk:
                    raise ConfigError(f"unknown sampler key {key!r}")
            raw["sampler"] = SamplerOptions(**raw["sampler"])
        for tup in ("n_values", "p_values", "m_target", "field_true", "beta_grid"):
            if tup in raw:
                raw[tup] = tuple(raw[tup])
        cfg = ExperimentConfig(**raw)
        cfg.validate()
        return cfg

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps(d, indent=2)


def _float_bits(x: float) -> int:
    """IEEE-754 bit pattern, for hashing grid values rather than positions."""
    return int(np.float64(x).view(np.uint64))


def beta_grid_values(grid: tuple) -> np.ndarray:
    lo, hi, step = grid
    count = int(round((hi - lo) / step)) + 1
    return lo + step * np.arange(count)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return str(x)


def _build_coupling(cfg: ExperimentConfig, n: int, p: float, seed: int):
    if cfg.family == "erdos_renyi":
        return cp.erdos_renyi(n, p, seed)
    if cfg.family == "circulant4":
        return cp.circulant(n, offsets=(1, 2))
    if cfg.family == "disjoint_cliques":
        m = int(round(cfg.clique_fraction * n))
        return cp.disjoint_cliques(m, n - m)
    if cfg.family == "curie_weiss":
        return cp.curie_weiss(n)
    raise ConfigError(f"unknown coupling family {cfg.family!r}")


def _draw_one(cfg: ExperimentConfig, a, params: PottsParams, seed: int):
    burn = cfg.sampler.burn_in(a.n)
    if cfg.sampler.kind == "cw_augmented":
        return cw_augmented_sample(params, a.n, n_iters=1, seed=seed,
                                   burn_in=burn)[0]
    return gibbs_sample(a, params, n_sweeps=1, burn_in=burn, thin=1,
                        seed=seed, scan=cfg.sampler.scan)[0]


def _header(q: int, extra=()) -> list:
    cols = ["n", "p", "seed", "beta_true"]
    cols += [f"B{r}" for r in range(1, q)]
    cols += ["beta_hat"]
    cols += [f"B{r}_hat" for r in range(1, q)]
    cols += ["status", "t_stat", "u_stat", "grad_norm", "joint_exists"]
    cols += list(extra)
    return cols


def _fit_row(cfg, n, p, beta_true, b_true, row_seed, extra=()):
    a = _build_coupling(cfg, n, p, splitmix64(row_seed, 1))
    params = PottsParams(beta=beta_true, field=b_true, q=cfg.q)
    x = _draw_one(cfg, a, params, splitmix64(row_seed, 2))
    fit = fit_joint(a, x, cfg.q)
    rep = fit.existence
    row = [n, p, row_seed, beta_true]
    row += list(b_true)
    row += [fit.beta_hat]
    row += list(fit.field_hat)
    row += [fit.status, rep.t_stat, rep.u_stat, fit.grad_norm,
            rep.joint_exists]
    return row, (a, x, fit)


def _write_csv(path, header, rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _map_rows(tasks, fn, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def run_figure1(cfg: ExperimentConfig) -> str:
    """Fit along the common-maximizer line over a beta grid, per (n, p)."""
    cfg.validate()
    m = np.asarray(cfg.m_target, dtype=float)
    betas = beta_grid_values(cfg.beta_grid)
    tasks = []
    for n in cfg.n_values:
        for p in cfg.p_values:
            for beta in betas:
                for rep in range(cfg.replicates):
                    tasks.append((rep, n, p, float(beta)))

    def work(task):
        rep, n, p, beta = task
        # seeds hash the grid values, so reordering the grid only
        # reorders rows
        row_seed = splitmix64(cfg.seed, n, _float_bits(p),
                              _float_bits(beta), rep)
        b_true = inestimability_line(m, beta)
        row, _ = _fit_row(cfg, n, p, beta, b_true, row_seed)
        return row

    rows = _map_rows(tasks, work, cfg.threads)
    _write_csv(cfg.out_path, _header(cfg.q), rows)
    return cfg.out_path


def run_rate(cfg: ExperimentConfig) -> str:
    """Joint-fit error per replicate across a ladder of system sizes."""
    cfg.validate()
    b_true = np.asarray(cfg.field_true, dtype=float)
    if b_true.size == 0:
        b_true = np.zeros(cfg.q - 1)
    tasks = []
    for n in cfg.n_values:
        for rep in range(cfg.replicates):
            tasks.append((rep, n))

    def work(task):
        rep, n = task
        row_seed = splitmix64(cfg.seed, n, rep)
        row, (a, x, fit) = _fit_row(cfg, n, float("nan"), cfg.beta_true,
                                    b_true, row_seed)
        err = np.sqrt((fit.beta_hat - cfg.beta_true) ** 2
                      + ((fit.field_hat - b_true) ** 2).sum())
        return row + [float(err)]

    rows = _map_rows(tasks, work, cfg.threads)
    _write_csv(cfg.out_path, _header(cfg.q, extra=("error_l2",)), rows)
    return cfg.out_path


def run_concentration(cfg: ExperimentConfig) -> str:
    """Normalized color-count residual max_r |sum_i (1[x_i=r] - theta_ir)| / sqrt(N)."""
    cfg.validate()
    b_true = np.asarray(cfg.field_true, dtype=float)
    if b_true.size == 0:
        b_true = np.zeros(cfg.q - 1)
    tasks = []
    for n in cfg.n_values:
        for rep in range(cfg.replicates):
            tasks.append((rep, n))

    def work(task):
        from potts_infer.model import conditional_probs
        rep, n = task
        row_seed = splitmix64(cfg.seed, n, rep)
        a = _build_coupling(cfg, n, float("nan"), splitmix64(row_seed, 1))
        params = PottsParams(beta=cfg.beta_true, field=b_true, q=cfg.q)
        x = _draw_one(cfg, a, params, splitmix64(row_seed, 2))
        theta = conditional_probs(a, x, params)
        counts = np.bincount(x, minlength=cfg.q)
        resid = np.abs(counts - theta.sum(axis=0)).max() / np.sqrt(n)
        return [n, row_seed, cfg.beta_true, float(resid),
                t_stat(a, x, cfg.q), u_stat(a, x, cfg.q)]

    rows = _map_rows(tasks, work, cfg.threads)
    _write_csv(cfg.out_path,
               ["n", "seed", "beta_true", "residual", "t_stat", "u_stat"],
               rows)
    return cfg.out_path


def run_partial(cfg: ExperimentConfig) -> str:
    """Partial fits: beta with B known and B with beta known, per replicate."""
    cfg.validate()
    b_true = np.asarray(cfg.field_true, dtype=float)
    if b_true.size == 0:
        b_true = np.zeros(cfg.q - 1)
    tasks = []
    for n in cfg.n_values:
        for rep in range(cfg.replicates):
            tasks.append((rep, n))

    def work(task):
        rep, n = task
        row_seed = splitmix64(cfg.seed, n, rep)
        a = _build_coupling(cfg, n, float("nan"), splitmix64(row_seed, 1))
        params = PottsParams(beta=cfg.beta_true, field=b_true, q=cfg.q)
        x = _draw_one(cfg, a, params, splitmix64(row_seed, 2))
        fb = fit_beta(a, x, cfg.q, field_known=b_true)
        ff = fit_field(a, x, cfg.q, beta_known=cfg.beta_true)
        b_err = float(np.sqrt(((ff.field_hat - b_true) ** 2).sum()))
        return [n, row_seed, cfg.beta_true,
                fb.beta_hat, fb.status,
                b_err, ff.status,
                fb.existence.u_stat]

    rows = _map_rows(tasks, work, cfg.threads)
    _write_csv(cfg.out_path,
               ["n", "seed", "beta_true", "beta_hat", "beta_status",
                "field_err_l2", "field_status", "u_stat"],
               rows)
    return cfg.out_path


RUNNERS = {
    "figure1": run_figure1,
    "rate": run_rate,
    "concentration": run_concentration,
    "partial": run_partial,
}


def run(cfg: ExperimentConfig) -> str:
    cfg.validate()
    return RUNNERS[cfg.kind](cfg)
