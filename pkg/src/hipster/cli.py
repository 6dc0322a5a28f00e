"""Batch command line front end.

Every subcommand writes CSV/JSON artifacts into the output directory
(``--out``, else ``$HIPSTER_OUTPUT_DIR``, else ``./hipster_out``) together
with ``manifest.json`` recording the config hash, seed, package versions and
a SHA-256 of each artifact. Parameters can come from a JSON file
(``--config``); flags given on the command line override it.

Exit codes: 0 ok, 2 invalid configuration, 3 a requested check failed.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
import time

import numpy as np

from . import __version__, kernels
from .couplings import base_marginals, battery_csv, empirical_coupling_law, exact_battery
from .densities import burgers_profile, pme_profile
from .dist import Pmf
from .entropy import EntropySolution, battery_csv as residual_csv, convergence_table, residual_battery
from .evolution import EvolutionConfig, StepDistribution, dyadic_checkpoints, evolve, ks_trajectory
from .explore import lattice_study, minplus_study
from .rde import CombinationRule, sample_exact_tree, sample_pool
from .schemes import init_scheme, run_manifest, scheme_run, verify_scheme_pmf_identity

EXIT_OK, EXIT_CONFIG, EXIT_CHECK = 0, 2, 3
ENV_OUT = "HIPSTER_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


class Run:
    """Output directory plus the manifest of files written into it."""

    def __init__(self, args):
        self.args = args
        self.out = args.out or os.environ.get(ENV_OUT) or "hipster_out"
        os.makedirs(self.out, exist_ok=True)
        self.files = {}
        self.checks = {}

    def write(self, name: str, text: str):
        path = os.path.join(self.out, name)
        with open(path, "w") as fh:
            fh.write(text)
        self.files[name] = hashlib.sha256(text.encode()).hexdigest()
        return path

    def check(self, name: str, ok: bool, value):
        self.checks[name] = {"passed": bool(ok), "value": value}

    def config(self) -> dict:
        return {k: v for k, v in sorted(vars(self.args).items()) if k not in ("func", "out", "config")}

    def finish(self) -> int:
        cfg = self.config()
        blob = json.dumps(cfg, sort_keys=True, default=str)
        manifest = {
            "command": self.args.command,
            "config": cfg,
            "config_hash": hashlib.sha256(blob.encode()).hexdigest(),
            "seed": getattr(self.args, "seed", None),
            "versions": {"hipster": __version__, "numpy": np.__version__,
                         "python": platform.python_version(), "backend": kernels.BACKEND},
            "files": self.files,
            "checks": self.checks,
            "timestamp": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }
        with open(os.path.join(self.out, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
        failed = [k for k, v in self.checks.items() if not v["passed"]]
        for k, v in self.checks.items():
            print(f"{'PASS' if v['passed'] else 'FAIL'} {k}: {v['value']}")
        return EXIT_CHECK if failed else EXIT_OK


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(repr(float(v)) if isinstance(v, (float, np.floating)) else str(v) for v in r))
    return "\n".join(lines) + "\n"


def _read_pmf(path):
    if path is None:
        return Pmf.delta(0)
    with open(path) as fh:
        text = fh.read()
    return Pmf.from_json(text) if text.lstrip().startswith("{") else Pmf.from_csv(text)


# subcommands --------------------------------------------------------------------------

def cmd_evolve(run: Run):
    a = run.args
    steps = StepDistribution({int(k): v for k, v in json.loads(a.steps).items()}) if a.steps else None
    cfg = EvolutionConfig(a.flavor, a.n, a.q, steps)
    p0 = _read_pmf(a.input)
    if a.flavor in ("tal", "sym") and a.n > 0:
        rows, final = ks_trajectory(p0, cfg, dyadic_checkpoints(a.n, min(16, a.n)))
        run.write("ks.csv", _csv(["n", "ks", "scale"], rows))
    else:
        final = evolve(p0, cfg)
    run.write("pmf.csv", final.to_csv())
    run.write("pmf.json", final.to_json())
    run.check("mass", abs(final.mass + final.truncated_mass - 1.0) <= 1e-9, final.mass + final.truncated_mass)


def cmd_simulate(run: Run):
    a = run.args
    rule = {"tal": lambda: CombinationRule.tal(a.q), "sym": CombinationRule.hipster,
            "fomo": CombinationRule.fomo, "minplus": lambda: CombinationRule.minplus(a.p),
            "series_parallel": lambda: CombinationRule.series_parallel(a.p)}[a.rule]()
    law = _read_pmf(a.input)
    if a.method == "tree":
        s = sample_exact_tree(rule, law, a.n, a.N, a.seed, a.threads)
    else:
        s = sample_pool(rule, law, a.n, a.N, a.seed, a.threads)
    run.write("samples.csv", s.to_csv())
    run.write("samples.json", json.dumps(s.metadata(), indent=2, sort_keys=True))


def cmd_scheme(run: Run):
    a = run.args
    rho = burgers_profile(a.q, a.eps) if a.preset == "burgers" else pme_profile(a.eps)
    start, flux = init_scheme(rho, a.M, a.preset, a.q)
    end = scheme_run(start, flux, a.n)
    man = run_manifest(flux, a.M, start, end)
    run.write("state.csv", end.to_csv())
    run.write("run.json", json.dumps(man, indent=2, sort_keys=True))
    run.check("mass_drift", man["mass_drift"] <= max(a.n, 1) * 1e-14, man["mass_drift"])
    if a.identity_check:
        flavor = "tal" if a.preset == "burgers" else "sym"
        dev = verify_scheme_pmf_identity(flavor, rho, a.M, a.n, a.q, a.stride)
        run.check("scheme_pmf_identity", dev <= a.tol, dev)


def cmd_entropy(run: Run):
    a = run.args
    families = ["burgers", "pme"] if a.family == "both" else [a.family]
    rows, table = [], []
    for fam in families:
        sol = EntropySolution(fam, a.eps, a.T, a.q)
        bat = residual_battery(sol, a.count, a.quad_n, a.seed)
        rows += bat
        worst = min(r["residual"] for r in bat)
        ident = max(abs(r["residual"]) for r in bat if r["kind"] in ("zero", "above"))
        run.check(f"{fam}_residual_min", worst >= -a.tol, worst)
        run.check(f"{fam}_identity_cases", ident <= a.tol, ident)
        lo, hi = sol.support(a.T)
        tw = (0.0, min(a.T, a.t_window))
        conv = convergence_table(sol, a.Ms, (lo - 0.5, hi + 0.5), tw)
        table += [(fam, M, e) for M, e in conv]
        errs = [e for _, e in conv]
        run.check(f"{fam}_l1_decreasing", all(y < x for x, y in zip(errs, errs[1:])), errs)
    run.write("residuals.csv", residual_csv(rows))
    run.write("l1.csv", _csv(["family", "M", "l1_error"], table))


def cmd_couple(run: Run):
    a = run.args
    rows = exact_battery(a.trials, a.seed, a.q)
    run.write("battery.csv", battery_csv(rows))
    run.check("exceed_bound_sym", max(r["p_exceed_sym"] - r["alpha"] for r in rows) <= 1e-12,
              max(r["p_exceed_sym"] - r["alpha"] for r in rows))
    if a.q == 0.5:
        dev = max(abs(r["p_exceed_tal"] - r["alpha"]) for r in rows)
        run.check("exceed_equality_tal", dev <= 1e-12, dev)
    run.check("marginals", max(r["marginal_check"] for r in rows) <= 1e-12, max(r["marginal_check"] for r in rows))
    if a.k > 1 and a.N > 0:
        base = {(0, 0): .25, (0, 1): .25, (1, 0): .25, (1, 1): .25}
        mu, nu = base_marginals(base)
        for fl in ("sym", "tal"):
            rep = empirical_coupling_law(mu, nu, base, fl, a.k, a.N, a.seed, a.q)
            run.write(f"empirical_{fl}.json", rep.to_json())
            ok = rep.bound_holds() if fl == "sym" else (rep.equality_holds() if a.q == 0.5 else True)
            run.check(f"empirical_{fl}_k{a.k}", ok, rep.p_exceed)


def cmd_explore(run: Run):
    a = run.args
    depths = a.depths or ([64, 128, 256] if a.model == "minplus" else [64, 128, 256, 512, 1024])
    study = minplus_study if a.model == "minplus" else lattice_study
    rep = study(a.p, depths, a.pool_size, a.seed)
    run.write(f"{a.model}.json", rep.to_json())
    run.write(f"{a.model}.csv", rep.to_csv())


def _theorem(run: Run, flavor: str):
    a = run.args
    cfg = EvolutionConfig(flavor, a.n, a.q)
    rows, _ = ks_trajectory(Pmf.delta(0), cfg, sorted(set(dyadic_checkpoints(a.n, 16) + [a.pilot])))
    run.write("ks.csv", _csv(["n", "ks", "scale"], rows))
    ks = dict((n, d) for n, d, _ in rows)
    final = ks[a.n]
    run.check("ks_below_threshold", final <= a.threshold, final)
    run.check("ks_below_pilot", final < ks[a.pilot], {"pilot": ks[a.pilot], "final": final})


def cmd_theorem1(run: Run):
    _theorem(run, "tal")


def cmd_theorem2(run: Run):
    _theorem(run, "sym")


# argument parsing ------------------------------------------------------------------------

def _int_list(text):
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of parameters; flags override it")
    common.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./hipster_out)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)

    ap = argparse.ArgumentParser(prog="hipster", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", parents=[common], help="exact law of the root")
    p.add_argument("--flavor", choices=["tal", "sym", "general", "fomo"], default="sym")
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--steps", help='step law as JSON, e.g. \'{"0": 0.5, "2": 0.5}\'')
    p.add_argument("--input", help="input Pmf (JSON or CSV j,weight); default delta at 0")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("simulate", parents=[common], help="sample the tree recursion")
    p.add_argument("--rule", choices=["tal", "sym", "fomo", "minplus", "series_parallel"], default="sym")
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--N", type=int, default=10000, help="samples (tree) or pool size (pool)")
    p.add_argument("--method", choices=["tree", "pool"], default="tree")
    p.add_argument("--input")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("scheme", parents=[common], help="run a preset finite-difference scheme")
    p.add_argument("--preset", choices=["burgers", "pme"], default="burgers")
    p.add_argument("--M", type=int, default=8)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--identity-check", action="store_true")
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=cmd_scheme)

    p = sub.add_parser("entropy", parents=[common], help="entropy residual battery and L1 table")
    p.add_argument("--family", choices=["burgers", "pme", "both"], default="both")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--count", type=int, default=60)
    p.add_argument("--quad-n", type=int, default=512)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--Ms", type=_int_list, default=[16, 32, 64, 128])
    p.add_argument("--t-window", type=float, default=0.25)
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("couple", parents=[common], help="coupling battery")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--N", type=int, default=100000)
    p.set_defaults(func=cmd_couple)

    p = sub.add_parser("explore", parents=[common], help="min-plus / lattice reports")
    p.add_argument("--model", choices=["minplus", "lattice"], default="minplus")
    p.add_argument("--p", type=float, default=0.5)
    p.add_argument("--depths", type=_int_list)
    p.add_argument("--pool-size", type=int, default=1 << 16)
    p.set_defaults(func=cmd_explore)

    for name, n, thr, doc in (("theorem1", 100000, 0.01, "lazy walk vs Beta(2,1)"),
                              ("theorem2", 1000000, 0.02, "symmetric walk vs Beta(2,2)")):
        p = sub.add_parser(name, parents=[common], help=doc)
        p.add_argument("--q", type=float, default=0.5)
        p.add_argument("--n", type=int, default=n)
        p.add_argument("--pilot", type=int, default=10000)
        p.add_argument("--threshold", type=float, default=thr)
        p.set_defaults(func=cmd_theorem1 if name == "theorem1" else cmd_theorem2)
    return ap


def parse(argv=None) -> argparse.Namespace:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        sub = ap._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**cfg)
        args = ap.parse_args(argv)
    return args


def main(argv=None) -> int:
    try:
        args = parse(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:          # argparse usage errors
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        run = Run(args)
        args.func(run)
    except (ValueError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run.finish()


if __name__ == "__main__":
    sys.exit(main())
