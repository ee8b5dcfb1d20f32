"""Command-line interface over the aggregators, benchmarks, and simulator.

Eight subcommands, one delimited output each:

* ``aggregate`` — run one aggregator on a profile of rankings,
* ``bench`` — efficiency/fairness on random profiles,
* ``weakpo`` — precision/recall/diversity against the weak-Pareto pool,
* ``simplex`` — weight-lattice sweep to output codes,
* ``dataset`` — the sampled-voters protocol on a ratings file,
* ``toy`` — the interactive loop on the toy landscape,
* ``sim`` — one serving policy on a simulated environment,
* ``report`` — compare finished simulation traces (and render figures).

Output goes to stdout, or to ``--out`` with a JSON manifest sidecar
(``<out>.manifest.json``) recording the resolved config, seed, code
version, timestamps, and output digests.  Reruns with the same seed and
config produce byte-identical data outputs.  Exit codes: 0 success,
1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from hashlib import sha256
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .baselines import AGGREGATORS
from .bench import (
    format_metrics_csv,
    run_bench,
    run_dataset,
    run_weakpo,
    simplex_sweep,
)
from .benchgen import (
    BenchmarkConfig,
    bundled_ratings,
    gen_profile,
    parse_permutation_lines,
    parse_ratings_csv,
    ratings_to_permutations,
    trial_rng,
)
from .ego import run_toy_loop
from .ltesim import (
    default_environment,
    default_expert_sets,
    read_env_json,
    read_trace_csv,
    report,
    run_bandit,
    run_cold_start,
    run_warm_start,
    samples_from_records,
    trace_csv_text,
)
from .perm import VoterProfile
from .tournament import tournament_greedy_decayed

__all__ = ["build_parser", "main"]


class UsageError(Exception):
    """Bad flag combination caught after argument parsing."""


@dataclass(frozen=True)
class CommandOutput:
    """One command's deliverable: CSV text plus any rendered figures."""

    text: str
    schema: str
    figures: tuple[str, ...] = ()


# ---------------------------------------------------------------------------
# Argument helpers


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _algo_list(text: str) -> list[str]:
    names = [tok.strip() for tok in text.split(",") if tok.strip()]
    if not names:
        raise argparse.ArgumentTypeError("empty aggregator list")
    for name in names:
        if name not in AGGREGATORS:
            raise argparse.ArgumentTypeError(
                f"unknown aggregator {name!r}; known: {', '.join(sorted(AGGREGATORS))}"
            )
    return names


def _read_input(file: str | None) -> tuple[str, str]:
    if file is None or file == "-":
        return sys.stdin.read(), "<stdin>"
    return Path(file).read_text(), file


def _load_env(path: str | None):
    if path is None:
        return default_environment(), default_expert_sets()
    return read_env_json(path)


# ---------------------------------------------------------------------------
# Command handlers


def cmd_aggregate(args: argparse.Namespace) -> CommandOutput:
    text, source = _read_input(args.file)
    perms = parse_permutation_lines(text, source)
    profile = VoterProfile(perms, args.weights)
    if args.gamma is not None:
        if args.algo != "tournament_greedy":
            raise UsageError("--gamma only applies to --algo tournament_greedy")
        out = tournament_greedy_decayed(profile, args.gamma)
    else:
        out = AGGREGATORS[args.algo](profile)
    return CommandOutput(",".join(str(v) for v in out.items) + "\n", "permutation/1")


def cmd_bench(args: argparse.Namespace) -> CommandOutput:
    config = BenchmarkConfig(
        m=args.m,
        n=args.n,
        weight_mode=args.weights,
        trials=args.trials,
        seed=args.seed,
    )
    rows = run_bench(config, args.algos, threads=args.threads)
    return CommandOutput(format_metrics_csv(rows), "metrics/1")


def cmd_weakpo(args: argparse.Namespace) -> CommandOutput:
    config = BenchmarkConfig(m=args.m, n=args.n, seed=args.seed)
    profile = gen_profile(config, trial_rng(args.seed, 2))
    rows = run_weakpo(
        profile, args.samples, args.seed, args.algos, pool_extra=args.pool_extra
    )
    return CommandOutput(format_metrics_csv(rows), "metrics/1")


def cmd_simplex(args: argparse.Namespace) -> CommandOutput:
    targets = parse_permutation_lines(Path(args.targets).read_text(), args.targets)
    rows = simplex_sweep(targets, args.grid, args.algo)
    lines = ["x,y,z,code"]
    lines += [f"{x:.6f},{y:.6f},{z:.6f},{code}" for x, y, z, code in rows]
    return CommandOutput("\n".join(lines) + "\n", "simplex/1")


def cmd_dataset(args: argparse.Namespace) -> CommandOutput:
    if args.file is None:
        perms = [p for _, p in ratings_to_permutations(bundled_ratings())]
    else:
        text = Path(args.file).read_text()
        first = text.splitlines()[0].strip() if text.strip() else ""
        if first == "voter,item,rating":
            table = parse_ratings_csv(args.file)
            perms = [p for _, p in ratings_to_permutations(table)]
        else:
            perms = parse_permutation_lines(text, args.file)
    rows = run_dataset(
        perms, args.voters, args.trials, args.seed, args.algos, threads=args.threads
    )
    return CommandOutput(format_metrics_csv(rows), "metrics/1")


def cmd_toy(args: argparse.Namespace) -> CommandOutput:
    lines = ["seed,round,w0,w1,w2,reward"]
    for s in range(args.seeds):
        seed = args.seed + s
        trace = run_toy_loop(args.alpha, args.rounds, np.random.default_rng(seed))
        for rnd, (w, reward) in enumerate(trace):
            lines.append(f"{seed},{rnd},{w[0]!r},{w[1]!r},{w[2]!r},{reward!r}")
    return CommandOutput("\n".join(lines) + "\n", "toy-trace/1")


def cmd_sim(args: argparse.Namespace) -> CommandOutput:
    env, experts = _load_env(args.env)
    rng = np.random.default_rng(args.seed)
    if args.policy == "ra-ego":
        if args.cold is None:
            raise UsageError("--policy ra-ego needs --cold <trace.csv> to warm-start")
        cold = read_trace_csv(args.cold, env)
        dataset = samples_from_records(cold.records)
        trace = run_warm_start(env, dataset, args.pages, None, rng, args.refresh)
    else:
        if experts is None:
            raise ValueError("environment config carries no expert weight sets")
        runner = run_cold_start if args.policy == "ra-re" else run_bandit
        trace = runner(env, experts, args.pages, rng)
    return CommandOutput(trace_csv_text(trace), "sim-trace/1")


def cmd_report(args: argparse.Namespace) -> CommandOutput:
    env, _ = _load_env(args.env)
    traces = [read_trace_csv(p, env) for p in args.traces]
    rows = report(traces, args.baseline, seed=args.seed, resamples=args.resamples)
    header = "policy,pages,mean_reward,improvement_pct,ci_low,ci_high," + ",".join(
        f"ktd_{j}" for j in range(env.n)
    )
    lines = [header]
    for r in rows:
        cells = [
            r.policy,
            str(r.pages),
            f"{r.mean_reward:.6f}",
            f"{r.improvement_pct:.6f}",
            f"{r.ci_low:.6f}",
            f"{r.ci_high:.6f}",
            *(f"{k:.6f}" for k in r.ktd),
        ]
        lines.append(",".join(cells))
    figures: tuple[str, ...] = ()
    if args.out:
        from .plots import save_report_bars, save_reward_curves

        out = Path(args.out)
        bars = out.with_name(out.stem + "_rewards.png")
        curves = out.with_name(out.stem + "_curves.png")
        save_report_bars(rows, str(bars))
        save_reward_curves(traces, str(curves), window=args.window)
        figures = (str(bars), str(curves))
    return CommandOutput("\n".join(lines) + "\n", "sim-report/1", figures)


# ---------------------------------------------------------------------------
# Parser and entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base RNG seed")
    common.add_argument(
        "--out",
        metavar="PATH",
        help="write the output here (with a .manifest.json sidecar) instead of stdout",
    )
    common.add_argument(
        "--threads", type=int, default=1, help="worker threads for trial loops"
    )

    parser = argparse.ArgumentParser(
        prog="rankfuse",
        description="Rank aggregation, ensemble benchmarks, and serving simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser(
        "aggregate", parents=[common], help="aggregate a profile of rankings"
    )
    p.add_argument("file", nargs="?", help="permutation-list file (default: stdin)")
    p.add_argument("--algo", choices=sorted(AGGREGATORS), default="tournament_greedy")
    p.add_argument(
        "--weights", type=_float_list, metavar="W0,W1,...", help="per-voter weights"
    )
    p.add_argument(
        "--gamma",
        type=_float_list,
        metavar="G0,G1,...",
        help="per-voter position decay (tournament_greedy only)",
    )
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser(
        "bench", parents=[common], help="efficiency/fairness on random profiles"
    )
    p.add_argument("--m", type=int, required=True, help="items per ranking")
    p.add_argument("--n", type=int, required=True, help="voters per profile")
    p.add_argument("--weights", choices=["uniform", "random"], default="uniform")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--algos", type=_algo_list, metavar="A,B,...", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser(
        "weakpo", parents=[common], help="weak-Pareto precision/recall/diversity"
    )
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000, help="random weight draws")
    p.add_argument(
        "--pool-extra",
        type=int,
        default=None,
        help="random permutations added to the candidate pool (default 10x samples)",
    )
    p.add_argument("--algos", type=_algo_list, metavar="A,B,...", default=None)
    p.set_defaults(func=cmd_weakpo)

    p = sub.add_parser(
        "simplex", parents=[common], help="weight-lattice sweep to output codes"
    )
    p.add_argument(
        "--targets", required=True, help="permutation-list file of three rankings"
    )
    p.add_argument("--grid", type=int, default=50, help="lattice steps per edge")
    p.add_argument(
        "--algo", choices=sorted(AGGREGATORS), default="tournament_greedy"
    )
    p.set_defaults(func=cmd_simplex)

    p = sub.add_parser(
        "dataset", parents=[common], help="sampled-voters protocol on a ratings file"
    )
    p.add_argument(
        "--file",
        default=None,
        help="ratings CSV or permutation-list file (default: bundled fixture)",
    )
    p.add_argument("--voters", type=int, required=True, help="voters per trial")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--algos", type=_algo_list, metavar="A,B,...", default=None)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser(
        "toy", parents=[common], help="interactive loop on the toy landscape"
    )
    p.add_argument("--alpha", type=float, default=1.0, help="exploration strength")
    p.add_argument("--rounds", type=int, default=20)
    p.add_argument(
        "--seeds", type=int, default=1, help="loops to run, seeded seed..seed+N-1"
    )
    p.set_defaults(func=cmd_toy)

    p = sub.add_parser(
        "sim", parents=[common], help="one serving policy on a simulated environment"
    )
    p.add_argument(
        "--env", default=None, help="environment JSON (default: built-in environment)"
    )
    p.add_argument("--pages", type=int, default=1000)
    p.add_argument("--policy", required=True, choices=["ra-re", "ra-be", "ra-ego"])
    p.add_argument(
        "--cold", default=None, help="cold trace CSV seeding ra-ego's dataset"
    )
    p.add_argument(
        "--refresh", type=int, default=1000, help="pages between ra-ego refits"
    )
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser(
        "report", parents=[common], help="compare finished simulation traces"
    )
    p.add_argument("traces", nargs="+", help="trace CSV files to compare")
    p.add_argument(
        "--env", default=None, help="environment JSON (default: built-in environment)"
    )
    p.add_argument(
        "--baseline", default=None, help="policy the improvement column is against"
    )
    p.add_argument("--resamples", type=int, default=1000, help="bootstrap resamples")
    p.add_argument("--window", type=int, default=500, help="figure rolling window")
    p.set_defaults(func=cmd_report)

    return parser


def _digest(data: bytes) -> str:
    return "sha256:" + sha256(data).hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write_manifest(
    args: argparse.Namespace, result: CommandOutput, started: str, out: Path
) -> None:
    config = {
        k: v for k, v in vars(args).items() if k not in ("func", "out", "command")
    }
    manifest = {
        "command": args.command,
        "config": config,
        "seed": args.seed,
        "version": __version__,
        "started": started,
        "finished": _now(),
        "outputs": {out.name: _digest(result.text.encode())},
        "schemas": {out.name: result.schema},
    }
    if result.figures:
        manifest["figures"] = {
            Path(f).name: _digest(Path(f).read_bytes()) for f in result.figures
        }
    with open(f"{out}.manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = _now()
    try:
        result = args.func(args)
    except UsageError as exc:
        print(f"{parser.prog} {args.command}: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        out = Path(args.out)
        out.write_text(result.text)
        _write_manifest(args, result, started, out)
    else:
        sys.stdout.write(result.text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
