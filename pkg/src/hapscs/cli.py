"""Command-line entry points: campaign runs, the FSD/LSD timing
benchmark, and the estimation-error decision-flip witness search.

Flags override environment variables (HAPSCS_CONFIG, HAPSCS_SEED,
HAPSCS_OUT, HAPSCS_MODE, HAPSCS_ALGORITHMS, HAPSCS_REGIMES), which in
turn override the JSON config file.  The effective configuration is
echoed next to the results so every run is reproducible from it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig, parse_config
from .engine import benchmark_elapsed, dump_benchmark_csv, run_campaign
from .optimize import LoadsView, ViewMode, es_search
from .power import PowerParams

ENV_PREFIX = "HAPSCS_"


def _env(name: str) -> str | None:
    return os.environ.get(ENV_PREFIX + name)


def _load_config(args) -> ExperimentConfig:
    path = args.config or _env("CONFIG")
    cfg = parse_config(path) if path else ExperimentConfig()

    seed = args.seed if args.seed is not None else _env("SEED")
    if seed is not None:
        cfg.seeds = [int(seed)]
    out = args.out or _env("OUT")
    if out:
        cfg.out_dir = out
    mode = getattr(args, "mode", None) or _env("MODE")
    if mode:
        if mode not in ("oracle", "estimated"):
            raise ConfigError("mode", f"expected oracle or estimated, got {mode!r}")
        cfg.mode = mode
        cfg.apply_mode()
    algorithms = getattr(args, "algorithms", None) or _env("ALGORITHMS")
    if algorithms:
        names = [a.strip() for a in algorithms.split(",") if a.strip()]
        for a in names:
            if a not in ("ES", "FSD", "LSD", "A3"):
                raise ConfigError("algorithms", f"unknown algorithm {a!r}")
        cfg.algorithms = names
    regimes = getattr(args, "regimes", None) or _env("REGIMES")
    if regimes:
        names = [r.strip() for r in regimes.split(",") if r.strip()]
        for r in names:
            if r not in ("none", "eps1", "eps2", "eps3", "custom"):
                raise ConfigError("regimes", f"unknown regime {r!r}")
        cfg.regimes = names
        cfg.apply_mode()
    return cfg


def _echo_config(cfg: ExperimentConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "effective_config.json", "w") as fh:
        json.dump(cfg.echo_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_run(args) -> int:
    cfg = _load_config(args)
    out = Path(cfg.out_dir)
    _echo_config(cfg, out)
    result = run_campaign(cfg, out)
    for notice in result.notices:
        print(f"notice: {notice}")
    print(f"wrote {len(result.rows)} aggregate rows to {out / 'results.csv'}")
    if result.violations:
        for v in result.violations[:20]:
            print(f"invariant violation: {v}", file=sys.stderr)
        return 1
    return 0


def cmd_benchmark(args) -> int:
    cfg = _load_config(args)
    out = Path(cfg.out_dir)
    _echo_config(cfg, out)
    rows = benchmark_elapsed(
        cfg,
        algorithms=("FSD", "LSD"),
        slot_counts=[int(s) for s in args.slot_counts.split(",")],
        repeats=args.repeats,
        n=args.n,
        e=args.ues,
        iterations=args.iterations,
        cell_cap=args.cell_cap,
    )
    dump_benchmark_csv(rows, out / "benchmark.csv")
    print(f"{'algorithm':<10}{'slots':>8}{'mean_seconds':>16}")
    for alg, count, secs in rows:
        print(f"{alg:<10}{count:>8}{secs:>16.6f}")
    return 0


def _theorem1_view(cfg: ExperimentConfig, n: int, rng) -> LoadsView:
    caps = np.array([float(cfg.capacity_rb)] * n + [float(int(cfg.capacity_rb * cfg.haps_capacity_share))])
    known = np.empty(n + 1)
    known[:n] = rng.uniform(0.0, 0.9) * caps[:n] * rng.uniform(0.1, 1.0, size=n)
    known[n] = rng.uniform(0.0, 0.4) * caps[n]
    pref = np.array(
        [[n] + [j for j in range(n) if j != k] for k in range(n)], dtype=np.int64
    )
    return LoadsView(
        known_rb=known,
        estimated_rb=known.copy(),
        caps_rb=caps,
        pref=pref,
        sbs_params=tuple([cfg.sbs_power] * n),
        haps_params=cfg.haps_power,
    )


def cmd_theorem1(args) -> int:
    """Hunt for a slot where the error-inflated view flips the search
    decision, then log both policies with both power readings."""
    cfg = _load_config(args)
    out = Path(cfg.out_dir)
    _echo_config(cfg, out)
    n = args.n if args.n is not None else cfg.n_sbs[0]
    regime = cfg.regime_obj(args.regime)
    if regime is None:
        print("theorem1 needs an error regime (eps1/eps2/eps3/custom)", file=sys.stderr)
        return 2
    seed = cfg.seeds[0]

    for instance in range(args.max_instances):
        rng = np.random.default_rng(np.random.SeedSequence((seed, instance)))
        view = _theorem1_view(cfg, n, rng)
        draws = rng.uniform(regime.lower, regime.upper, size=n)
        estimated = view.estimated_rb.copy()
        estimated[:n] = view.known_rb[:n] * (1.0 + draws)
        view = LoadsView(
            known_rb=view.known_rb,
            estimated_rb=estimated,
            caps_rb=view.caps_rb,
            pref=view.pref,
            sbs_params=view.sbs_params,
            haps_params=view.haps_params,
        )
        oracle = es_search(view, ViewMode.ORACLE, cfg.penalty_cost, cfg.enumeration_cap)
        erroneous = es_search(view, ViewMode.ESTIMATED, cfg.penalty_cost, cfg.enumeration_cap)
        if oracle.policy.bits != erroneous.policy.bits:
            witness = {
                "instance": instance,
                "seed": seed,
                "regime": [regime.lower, regime.upper],
                "true_loads_rb": [float(x) for x in view.known_rb],
                "estimated_loads_rb": [float(x) for x in view.estimated_rb],
                "error_draws": [float(x) for x in draws],
                "policy_true_loads": str(oracle.policy),
                "policy_estimated_loads": str(erroneous.policy),
                "power_true_loads_w": oracle.evaluation.power_w,
                "power_estimated_loads_w": erroneous.evaluation.power_w,
            }
            out.mkdir(parents=True, exist_ok=True)
            with open(out / "theorem1_witness.json", "w") as fh:
                json.dump(witness, fh, indent=2)
                fh.write("\n")
            print(
                f"witness at instance {instance}: "
                f"true-loads policy {oracle.policy} "
                f"(power {oracle.evaluation.power_w:.3f} W) vs "
                f"estimated-loads policy {erroneous.policy} "
                f"(power {erroneous.evaluation.power_w:.3f} W); "
                f"error draws {np.array2string(draws, precision=4)}"
            )
            return 0
    print(f"no decision flip in {args.max_instances} instances", file=sys.stderr)
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hapscs",
        description="Cell-switching simulator for a HAPS-assisted network",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int, help="master seed (replaces the config's seed list)")
        p.add_argument("--out", help="output directory")

    p_run = sub.add_parser("run", help="run a simulation campaign")
    common(p_run)
    p_run.add_argument("--mode", choices=["oracle", "estimated"])
    p_run.add_argument("--algorithms", help="comma list of ES,FSD,LSD,A3")
    p_run.add_argument("--regimes", help="comma list of none,eps1,eps2,eps3,custom")
    p_run.set_defaults(func=cmd_run)

    p_bench = sub.add_parser("benchmark", help="FSD vs LSD elapsed-time benchmark")
    common(p_bench)
    p_bench.add_argument("--slot-counts", default="10,25,50")
    p_bench.add_argument("--repeats", type=int, default=10)
    p_bench.add_argument("--iterations", type=int, default=50, help="training episodes per repeat")
    p_bench.add_argument("--n", type=int, help="SBS count (default: config)")
    p_bench.add_argument("--ues", type=int, help="UE count (default: config)")
    p_bench.add_argument("--cell-cap", type=int, help="FSD table cell cap override")
    p_bench.set_defaults(func=cmd_benchmark)

    p_th = sub.add_parser("theorem1", help="find an estimation-error decision flip")
    common(p_th)
    p_th.add_argument("--max-instances", type=int, default=10_000)
    p_th.add_argument("--regime", default="eps3", choices=["eps1", "eps2", "eps3", "custom"])
    p_th.add_argument("--n", type=int, help="SBS count (default: config)")
    p_th.set_defaults(func=cmd_theorem1)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
