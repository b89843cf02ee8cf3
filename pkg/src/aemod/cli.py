"""Command-line front end.

Exit codes: 0 success, 1 usage or config error, 2 infeasible model,
3 solver or verification failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .desim import SimConfig, run, validate_against_formula
from .errors import ConfigError, InfeasibleModel, SimulationError, SolverError, VerificationError
from .io import RunManifest, dumps, load_zone, read_json, split_config, write_atomic
from .lp import build_lp, kkt_verify, solve, theorem2_value
from .model import Policy, ZoneConfig, derive_rates, response_times
from .scenarios import (
    POLICY_KINDS,
    SWEEP_FIELDS,
    compare_policies,
    evaluate,
    make_policy,
    rows_to_csv,
    sweep,
)
from .stability import class_count_bound, lemma2_bound, n_star, n_star_from_bound

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 1, 2, 3
SEED_ENV = "AEMOD_SEED"
COMPARE_FIELDS = ["policy", "max_rt_min", "avg_rt_min", "stable", "gain_max_pct", "gain_avg_pct"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str | None, manifest: RunManifest | None = None):
    if out is None:
        sys.stdout.write(text)
        return
    write_atomic(out, text)
    if manifest is not None:
        manifest.outputs.append(str(out))
        manifest.write_beside(out)


def _lemma2_note(config: ZoneConfig) -> str:
    b = lemma2_bound(config)
    if config.n_classes < n_star(config):
        return f"n_classes={config.n_classes} is below the class-count bound {b:.4f} (need n >= {n_star(config)})"
    return f"class-count bound {b:.4f} satisfied by n_classes={config.n_classes}"


def _read_policy_file(path: str, n: int) -> Policy:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: cannot read policy ({exc})") from exc
    q = doc.get("policy") if isinstance(doc, dict) else doc
    if not isinstance(q, list):
        raise ConfigError(f"{path}: expected a list or an object with a 'policy' list")
    return make_policy("explicit", n, q=q)


def _resolve_policy(args, config: ZoneConfig) -> Policy | None:
    """Policy named on the command line; ``None`` means solve for the optimum."""
    if args.policy_file and args.policy not in (None, "explicit"):
        raise ConfigError("--policy-file only goes with --policy explicit")
    if args.policy == "explicit" or (args.policy is None and args.policy_file):
        if not args.policy_file:
            raise ConfigError("--policy explicit needs --policy-file")
        return _read_policy_file(args.policy_file, config.n_classes)
    if args.policy in (None, "optimal"):
        return None
    return make_policy(args.policy, config.n_classes)


def _solve(config: ZoneConfig):
    try:
        problem = build_lp(config)
    except InfeasibleModel as exc:
        raise InfeasibleModel(f"{exc}; {_lemma2_note(config)}") from exc
    sol = solve(problem)
    if sol.status == "infeasible":
        raise InfeasibleModel(f"no admissible policy: {_lemma2_note(config)}")
    if not sol.optimal:
        raise SolverError(f"LP returned status {sol.status}")
    return sol


def _evaluation_dict(config: ZoneConfig, policy: Policy) -> dict:
    ev = evaluate(config, policy)
    rts = response_times(config, derive_rates(config, policy))
    return {
        "policy": list(policy.q),
        "stable": ev.stable,
        "max_response_time": ev.max_rt,
        "avg_response_time": ev.avg_rt,
        "class_response_times": [float(r) for r in rts],
    }


def cmd_nstar(args) -> int:
    if args.config:
        doc = read_json(args.config)
        zone, _ = split_config(doc, args.config)
        missing = [k for k in ("lambda_v", "mu_c", "c_points") if k not in zone]
        if missing:
            raise ConfigError(f"{args.config}: missing field(s) {missing}")
        lv, mu, cp = zone["lambda_v"], zone["mu_c"], zone["c_points"]
    else:
        if None in (args.lambda_v, args.mu_c, args.c_points):
            raise ConfigError("give a config file or all of --lambda-v, --mu-c, --c-points")
        lv, mu, cp = args.lambda_v, args.mu_c, args.c_points
    if not (lv > 0 and mu > 0 and int(cp) >= 1):
        raise ConfigError("lambda_v and mu_c must be positive and c_points >= 1")
    b = class_count_bound(float(lv), float(mu), int(cp))
    print(f"bound={b:.4f} n*={n_star_from_bound(b)}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    config, _ = load_zone(args.config)
    manifest = RunManifest("optimize", args.config, {"zone": config.to_dict(), "policy": args.policy})
    policy = _resolve_policy(args, config)
    if args.dump_problem:
        write_atomic(args.dump_problem, dumps(build_lp(config, check_admissible=False).to_dict()))
    if policy is not None:
        out = {"mode": "evaluation", **_evaluation_dict(config, policy)}
        _emit(dumps(out), args.out, manifest)
        return EXIT_OK

    sol = _solve(config)
    out = sol.to_dict()
    # report the response time of the emitted policy so a re-ingested solution matches exactly
    ev = evaluate(config, sol.policy)
    out["max_response_time"] = ev.max_rt
    out["avg_response_time"] = ev.avg_rt
    code = EXIT_OK
    if args.verify:
        kkt = kkt_verify(config, sol)
        gap = abs(sol.r_star - sol.dual_objective)
        t2 = theorem2_value(sol)
        scale = max(1.0, abs(sol.r_star))
        out["verification"] = {
            "duality_gap": gap,
            "duality_ok": gap <= 1e-6 * scale,
            "theorem2_value": t2,
            "theorem2_ok": abs(t2 - sol.r_star) <= 1e-6 * scale,
            "kkt_passed": kkt.passed,
            "kkt_degenerate": kkt.degenerate,
            "kkt_ties": kkt.ties,
            "kkt_failures": [f"{c.name}[{c.index}]: {c.detail}" for c in kkt.failures],
        }
        print(kkt.summary(), file=sys.stderr)
        v = out["verification"]
        if not (v["duality_ok"] and (kkt.passed or kkt.degenerate)):
            code = EXIT_SOLVER
    _emit(dumps(out), args.out, manifest)
    return code


def cmd_sweep(args) -> int:
    spec = read_json(args.spec)
    rows = sweep(spec)
    manifest = RunManifest("sweep", args.spec, {"spec": spec})
    _emit(rows_to_csv(rows, SWEEP_FIELDS), args.out, manifest)
    return EXIT_OK


def _seed(args, sim: dict) -> int:
    if args.seed is not None:
        return args.seed
    if "seed" in sim:
        return int(sim["seed"])
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env!r}") from exc
    return 0


def cmd_simulate(args) -> int:
    config, sim = load_zone(args.config)
    policy = _resolve_policy(args, config)
    if policy is None:
        policy = _solve(config).policy
    params = dict(sim)
    for key in ("mode", "horizon", "warmup", "engine"):
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    params["seed"] = _seed(args, sim)
    try:
        cfg = SimConfig(zone=config, policy=policy, **params)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    report = run(cfg)
    out = report.to_dict(include_traces=args.traces)
    out["policy"] = list(policy.q)
    if cfg.mode == "abstract":
        checks = validate_against_formula(report, config, policy, rel_tol=args.rel_tol)
        out["validation"] = [vars(c) for c in checks]
        print(f"{'class':>5} {'empirical':>12} {'formula':>12} {'rel_err':>9}  result", file=sys.stderr)
        for c in checks:
            print(f"{c.cls:>5} {c.empirical:>12.5g} {c.formula:>12.5g} {c.rel_err:>9.4f}  {'pass' if c.ok else 'FAIL'}", file=sys.stderr)
    else:
        grown = sorted(k for k, v in report.growth.items() if v)
        print(f"growth flags: {', '.join(grown) if grown else 'none'}", file=sys.stderr)
    manifest = RunManifest(
        "simulate",
        args.config,
        {"zone": config.to_dict(), "policy": list(policy.q), "mode": cfg.mode, "horizon": cfg.horizon,
         "warmup": cfg.warmup, "engine": cfg.engine, "batches": cfg.batches},
        seeds=[cfg.seed],
    )
    if args.csv:
        write_atomic(args.csv, report.to_csv())
        manifest.outputs.append(str(args.csv))
        if args.out is None:
            manifest.write_beside(args.csv)
    _emit(dumps(out), args.out, manifest)
    return EXIT_OK


def cmd_compare(args) -> int:
    config, _ = load_zone(args.config)
    rows = compare_policies(config)
    text = rows_to_csv(rows, COMPARE_FIELDS)
    manifest = RunManifest("compare", args.config, {"zone": config.to_dict()})
    if args.out:
        _emit(text, args.out, manifest)
    print(f"{'policy':<22} {'max_rt':>10} {'avg_rt':>10} {'gain_max%':>10} {'gain_avg%':>10}")
    for r in rows:
        print(
            f"{r['policy']:<22} {r['max_rt_min']:>10.4g} {r['avg_rt_min']:>10.4g} "
            f"{r['gain_max_pct']:>10.2f} {r['gain_avg_pct']:>10.2f}"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="aemod", description="Dispatch/charging policy optimization and simulation for an AEMoD zone.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("nstar", help="smallest stable class count")
    p.add_argument("config", nargs="?")
    p.add_argument("--lambda-v", type=float)
    p.add_argument("--mu-c", type=float)
    p.add_argument("--c-points", type=int)
    p.set_defaults(func=cmd_nstar)

    def policy_args(sp):
        sp.add_argument("--policy", choices=POLICY_KINDS + ("explicit",))
        sp.add_argument("--policy-file", help="JSON list of q values, or a solution emitted by optimize")

    p = sub.add_parser("optimize", help="solve for the optimal policy, or evaluate a given one")
    p.add_argument("config")
    policy_args(p)
    p.add_argument("--verify", action="store_true", help="add KKT, duality and closed-form checks")
    p.add_argument("--out")
    p.add_argument("--dump-problem", metavar="PATH", help="write the LP matrices as JSON")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("sweep", help="evaluate a parameter grid")
    p.add_argument("spec")
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("simulate", help="discrete-event simulation")
    p.add_argument("config")
    policy_args(p)
    p.add_argument("--mode", choices=("abstract", "physical"))
    p.add_argument("--horizon", type=float)
    p.add_argument("--warmup", type=float)
    p.add_argument("--seed", type=int, help=f"falls back to the config, then ${SEED_ENV}, then 0")
    p.add_argument("--engine", choices=("lindley", "events"))
    p.add_argument("--rel-tol", type=float, default=0.05)
    p.add_argument("--traces", action="store_true", help="include queue-length traces in the JSON")
    p.add_argument("--out", help="JSON report path (stdout if omitted)")
    p.add_argument("--csv", help="per-class CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="optimal policy against the baselines")
    p.add_argument("config")
    p.add_argument("--out", help="CSV path")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleModel as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (SolverError, VerificationError, SimulationError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
