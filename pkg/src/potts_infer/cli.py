"""Command-line front end.

Subcommands: coupling, sample, fit, meanfield, experiment.
Exit codes: 0 success, 1 validation error, 2 runtime error.
JSON is written with shortest round-trip floats; CSV uses 17
significant digits. Thread count comes from --threads, falling back to
the POTTS_INFER_THREADS environment variable, then to the core count.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

import numpy as np

from potts_infer import coupling as cp
from potts_infer import meanfield as mf
from potts_infer import model as md
from potts_infer import mple
from potts_infer.experiments import ConfigError, ExperimentConfig, run


class ValidationExit(SystemExit):
    pass


class Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        # Treat "-0.4,0.5" style values (negative float lists) as arguments,
        # not as option flags, so "--B -0.4,0.5" parses.
        self._negative_number_matcher = re.compile(r"^-\d[\d.eE+,-]*$")

    def error(self, message):  # argparse default exits 2; we reserve 2 for runtime
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise ValidationExit(1)


def _floats(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split(",")])


def _resolve_threads(value) -> int:
    if value is not None:
        return int(value)
    env = os.environ.get("POTTS_INFER_THREADS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _print_json(obj) -> None:
    print(json.dumps(obj, indent=2))


def build_parser() -> Parser:
    parser = Parser(prog="potts-infer",
                    description="Potts model sampling and pseudo-likelihood inference")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: POTTS_INFER_THREADS or core count)")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    c = sub.add_parser("coupling", help="build a coupling matrix file",
                       description="Build a coupling matrix and write it as "
                       "'potts-coupling v1' text. Keys: kind, n, p, seed, alpha, "
                       "p1, p2, q-between, part1, part2, offsets, out.")
    c.add_argument("--kind", required=True,
                   choices=["curie-weiss", "erdos-renyi", "sbm", "cliques",
                            "bipartite", "circulant"])
    c.add_argument("--n", type=int, required=True, help="number of sites n")
    c.add_argument("--p", type=float, default=0.5, help="edge probability p")
    c.add_argument("--seed", type=int, default=0, help="seed for random builders")
    c.add_argument("--alpha", type=float, default=0.5, help="sbm block fraction alpha")
    c.add_argument("--p1", type=float, default=0.5, help="sbm within-block probability p1")
    c.add_argument("--p2", type=float, default=0.5, help="sbm within-block probability p2")
    c.add_argument("--q-between", type=float, default=0.5,
                   help="sbm between-block probability")
    c.add_argument("--part1", type=int, default=None,
                   help="first part size for cliques/bipartite")
    c.add_argument("--part2", type=int, default=None,
                   help="second part size for cliques/bipartite")
    c.add_argument("--offsets", default="1,2", help="circulant offsets, comma separated")
    c.add_argument("--out", required=True, help="output matrix file path")

    s = sub.add_parser("sample", help="draw configurations",
                       description="Sample configurations by Gibbs dynamics or the "
                       "Curie-Weiss augmentation chain. Keys: matrix, q, beta, B, "
                       "sampler, sweeps, burn-in, thin, scan, seed, out.")
    s.add_argument("--matrix", required=True, help="coupling matrix file")
    s.add_argument("--q", type=int, required=True, help="number of colors q")
    s.add_argument("--beta", type=float, required=True, help="inverse temperature beta")
    s.add_argument("--B", default=None, help="field B_1,..,B_{q-1} (default zeros)")
    s.add_argument("--sampler", choices=["gibbs", "cw-augmented"], default="gibbs")
    s.add_argument("--sweeps", type=int, default=1, help="kept sweeps after burn-in")
    s.add_argument("--burn-in", type=int, default=None,
                   help="burn-in sweeps (default 10*N)")
    s.add_argument("--thin", type=int, default=1, help="keep every thin-th sweep")
    s.add_argument("--scan", choices=["systematic", "random"], default="systematic")
    s.add_argument("--seed", type=int, default=0, help="sampler seed")
    s.add_argument("--out", required=True, help="output configurations file")

    f = sub.add_parser("fit", help="maximum pseudo-likelihood fit",
                       description="Fit (beta, B) jointly or one block partially; "
                       "prints the fit record as JSON. Keys: matrix, config, index, "
                       "q, mode, beta-known, field-known.")
    f.add_argument("--matrix", required=True, help="coupling matrix file")
    f.add_argument("--config", required=True, help="configurations file (1-based colors)")
    f.add_argument("--index", type=int, default=0,
                   help="which configuration line to fit")
    f.add_argument("--q", type=int, required=True, help="number of colors q")
    f.add_argument("--mode", choices=["joint", "beta", "field"], default="joint")
    f.add_argument("--beta-known", type=float, default=None,
                   help="fixed beta for mode=field")
    f.add_argument("--field-known", default=None,
                   help="fixed field B_1,..,B_{q-1} for mode=beta")

    m = sub.add_parser("meanfield", help="mean-field variational analysis",
                       description="Maximize the mean-field functional, print the "
                       "critical temperature, or evaluate the shared-maximizer line. "
                       "Keys: q, beta, B, n-starts, seed, beta-critical, line, m.")
    m.add_argument("--q", type=int, required=True, help="number of colors q")
    m.add_argument("--beta", type=float, default=None, help="inverse temperature beta")
    m.add_argument("--B", default=None, help="field B_1,..,B_{q-1} (default zeros)")
    m.add_argument("--n-starts", type=int, default=20, help="random multistarts")
    m.add_argument("--seed", type=int, default=0, help="multistart seed")
    m.add_argument("--beta-critical", action="store_true",
                   help="print the critical inverse temperature and exit")
    m.add_argument("--line", action="store_true",
                   help="print the field on the shared-maximizer line for --m/--beta")
    m.add_argument("--m", default=None, help="simplex point m_1,..,m_q for --line")

    e = sub.add_parser("experiment", help="run an experiment config",
                       description="Run a Monte Carlo experiment described by a JSON "
                       "config. Keys: kind, q, n_values, p_values, beta_grid, m_target, "
                       "beta_true, field_true, family, clique_fraction, replicates, "
                       "sampler, seed, out_path, threads.")
    e.add_argument("--config", required=True, help="experiment config JSON file")

    return parser


def _cmd_coupling(args) -> None:
    if args.kind == "curie-weiss":
        a = cp.curie_weiss(args.n)
    elif args.kind == "erdos-renyi":
        a = cp.erdos_renyi(args.n, args.p, args.seed)
    elif args.kind == "sbm":
        a = cp.sbm(args.n, args.alpha, args.p1, args.p2, args.q_between, args.seed)
    elif args.kind == "cliques":
        p1 = args.part1 if args.part1 is not None else args.n // 2
        p2 = args.part2 if args.part2 is not None else args.n - p1
        a = cp.disjoint_cliques(p1, p2)
    elif args.kind == "bipartite":
        p1 = args.part1 if args.part1 is not None else args.n // 2
        p2 = args.part2 if args.part2 is not None else args.n - p1
        a = cp.complete_bipartite(p1, p2)
    else:
        offs = tuple(int(t) for t in args.offsets.split(","))
        a = cp.circulant(args.n, offs)
    cp.save_coupling(a, args.out)


def _params(q: int, beta: float, b_text) -> md.PottsParams:
    b = _floats(b_text) if b_text else np.zeros(q - 1)
    return md.PottsParams(beta=beta, field=b, q=q)


def _cmd_sample(args) -> None:
    a = cp.load_coupling(args.matrix)
    params = _params(args.q, args.beta, args.B)
    burn = args.burn_in if args.burn_in is not None else 10 * a.n
    if args.sampler == "cw-augmented":
        samples = md.cw_augmented_sample(params, a.n, n_iters=args.sweeps,
                                         seed=args.seed, burn_in=burn,
                                         thin=args.thin)
    else:
        samples = md.gibbs_sample(a, params, n_sweeps=args.sweeps,
                                  burn_in=burn, thin=args.thin,
                                  seed=args.seed, scan=args.scan)
    md.save_configurations(samples, args.out)


def _cmd_fit(args) -> None:
    a = cp.load_coupling(args.matrix)
    configs = md.load_configurations(args.config)
    if not (0 <= args.index < len(configs)):
        raise ConfigError(f"config index {args.index} out of range")
    x = configs[args.index]
    if args.mode == "joint":
        fit = mple.fit_joint(a, x, args.q)
    elif args.mode == "beta":
        b = _floats(args.field_known) if args.field_known else np.zeros(args.q - 1)
        fit = mple.fit_beta(a, x, args.q, field_known=b)
    else:
        beta = args.beta_known if args.beta_known is not None else 0.0
        fit = mple.fit_field(a, x, args.q, beta_known=beta)
    _print_json(fit.to_dict())


def _cmd_meanfield(args) -> None:
    if args.beta_critical:
        print(repr(mf.beta_critical(args.q)))
        return
    if args.line:
        if args.m is None or args.beta is None:
            raise ConfigError("--line needs both --m and --beta")
        m = _floats(args.m)
        if len(m) != args.q:
            raise ConfigError("--m must have length q")
        b = mf.inestimability_line(m, args.beta)
        _print_json({"beta": args.beta, "field": [float(v) for v in b]})
        return
    if args.beta is None:
        raise ConfigError("meanfield needs --beta (or --beta-critical/--line)")
    b = _floats(args.B) if args.B else np.zeros(args.q - 1)
    if len(b) != args.q - 1:
        raise ConfigError("--B must have length q-1")
    sol = mf.maximize_h(args.beta, b, args.q, n_starts=args.n_starts,
                        seed=args.seed)
    _print_json(sol.to_dict())


def _cmd_experiment(args, threads: int) -> None:
    cfg = ExperimentConfig.from_json(args.config)
    if threads != 1 and cfg.threads == 1:
        cfg = ExperimentConfig(**{**cfg.__dict__, "threads": threads})
    run(cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ValidationExit:
        return 1
    threads = _resolve_threads(args.threads)
    try:
        if args.subcommand == "coupling":
            _cmd_coupling(args)
        elif args.subcommand == "sample":
            _cmd_sample(args)
        elif args.subcommand == "fit":
            _cmd_fit(args)
        elif args.subcommand == "meanfield":
            _cmd_meanfield(args)
        else:
            _cmd_experiment(args, threads)
    except (ConfigError, cp.CouplingError, md.ModelError,
            mf.MeanFieldError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 2
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
