"""Command-line entry point.

Subcommands: sample, couple, estimate, test, power, tails, check.  All
take --seed (reproducibility), --threads (replica fan-out), and
--output (file for the machine-readable artifact); human-readable
summaries go to stdout.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .dynamics import (
    ChainEnsemble,
    as_generator,
    hamming_trace,
    mixing_schedule,
    random_config,
    sample_states,
)
from .estimation import mple_fit, mple_fit_zero_field
from .gof import power_curve, run_test
from .model import BRUTE_FORCE_CAP, dobrushin_slack, exact_pmf
from .stats import (
    TailBoundQuery,
    bilinear_tail_bound,
    empirical_tail,
    multilinear_tail_bound,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="RNG seed")
    p.add_argument("--threads", type=int, default=1, help="worker threads")
    p.add_argument("--output", type=str, default=None, help="artifact file")


def _steps_for(model, args) -> int:
    if getattr(args, "steps", None) is not None:
        if args.steps < 0:
            raise ValueError(f"step count must be nonnegative, got {args.steps}")
        return args.steps
    return mixing_schedule(model, args.mix_multiplier).t_star


def _cmd_sample(args) -> int:
    model = io.load_graph(args.model)
    steps = _steps_for(model, args)
    start = io.load_observation(args.start, model.n) if args.start else None
    X = sample_states(
        model, args.count, steps, as_generator(args.seed), start=start,
        workers=args.threads,
    )
    print(f"sampled {args.count} configurations of {model.n} spins, {steps} steps each")
    if args.output:
        io.save_configs(X, args.output)
        print(f"wrote {args.output}")
    else:
        for row in X:
            print("".join("+" if s > 0 else "-" for s in row))
    return 0


def _cmd_couple(args) -> int:
    model = io.load_graph(args.model)
    gen = as_generator(args.seed)
    k = args.chains
    if k < 2:
        print("need at least two chains to couple", file=sys.stderr)
        return 2
    if args.steps < 0:
        raise ValueError(f"step count must be nonnegative, got {args.steps}")
    rows: list[tuple[int, str, int]] = []
    if k == 2:
        x0 = random_config(model.n, gen)
        y0 = random_config(model.n, gen)
        trace = hamming_trace(model, x0, y0, args.steps, gen)
        rows = [(t, "0-1", int(d)) for t, d in enumerate(trace, start=1)]
        final = int(trace[-1]) if args.steps else int(np.count_nonzero(x0 != y0))
        print(f"2 coupled chains, {args.steps} steps, final distance {final}")
    else:
        starts = np.stack([random_config(model.n, gen) for _ in range(k)])
        ens = ChainEnsemble(model, starts, gen)
        for t in range(1, args.steps + 1):
            ens.step()
            conf = ens.configs
            for i in range(k):
                for j in range(i + 1, k):
                    rows.append((t, f"{i}-{j}", int(np.count_nonzero(conf[i] != conf[j]))))
        print(f"{k} coupled chains, {args.steps} steps")
    if args.output:
        io.write_csv(args.output, ("step", "pair", "d_H"), rows)
        print(f"wrote {args.output}")
    return 0


def _mple_record(args, fit) -> dict:
    return {
        "command": "estimate",
        "model": args.model,
        "observation": args.observation,
        "zero_field": args.zero_field,
        "h_hat": fit.h_hat,
        "theta_hat": fit.theta_hat,
        "gradient_norm": fit.gradient_norm,
        "converged": fit.converged,
        "degenerate": fit.degenerate,
        "degenerate_reason": fit.degenerate_reason,
    }


def _cmd_estimate(args) -> int:
    model = io.load_graph(args.model)
    x = io.load_observation(args.observation, model.n)
    fit = mple_fit_zero_field(model, x) if args.zero_field else mple_fit(model, x)
    print(f"h_hat={fit.h_hat!r}")
    print(f"theta_hat={fit.theta_hat!r}")
    print(f"converged={'true' if fit.converged else 'false'}")
    print(f"degenerate={'true' if fit.degenerate else 'false'}")
    if args.output:
        io.write_report([_mple_record(args, fit)], args.output)
        print(f"wrote {args.output}")
    return 0


def _parse_threshold(raw: str):
    if raw in ("grid-critical", "dobrushin"):
        return raw
    try:
        return float(raw)
    except ValueError:
        raise ValueError(
            f"threshold must be grid-critical, dobrushin, or a number, got {raw!r}"
        ) from None


def _cmd_test(args) -> int:
    model = io.load_graph(args.model)
    x = io.load_observation(args.observation, model.n)
    if args.statistic in ("zlocal", "zk"):
        statistic = args.statistic
    else:
        statistic = io.load_coefficients(args.statistic, model)
    report = run_test(
        model,
        x,
        statistic=statistic,
        k=args.k,
        alpha=args.alpha,
        threshold=_parse_threshold(args.threshold),
        null_samples=args.null_samples,
        multiplier=args.mix_multiplier,
        zero_field=not args.fit_field,
        rng=as_generator(args.seed),
        workers=args.threads,
    )
    print(f"statistic {report.statistic_name}: observed {report.observed_value!r}")
    print(f"theta_hat={report.mple.theta_hat!r} h_hat={report.mple.h_hat!r}")
    if report.gate_rejected:
        print(f"gate rejected the fitted null (threshold {report.threshold_used!r})")
    else:
        print(f"p_value={report.p_value!r} ({args.null_samples} null samples)")
    print(f"verdict: {report.verdict}")
    if args.output:
        rec = {
            "command": "test",
            "model": args.model,
            "observation": args.observation,
            "statistic": report.statistic_name,
            "alpha": report.alpha,
            "threshold_used": report.threshold_used,
            "h_hat": report.mple.h_hat,
            "theta_hat": report.mple.theta_hat,
            "degenerate": report.mple.degenerate,
            "gate_rejected": report.gate_rejected,
            "observed_value": report.observed_value,
            "null_values": report.null_values,
            "p_value": report.p_value,
            "verdict": report.verdict,
            "seed": args.seed,
        }
        io.write_report([rec], args.output)
        print(f"wrote {args.output}")
    return 0


def _cmd_power(args) -> int:
    taus = [float(t) for t in args.taus.split(",") if t.strip() != ""]
    rows = power_curve(
        args.width,
        args.height,
        taus,
        args.reps,
        rng=as_generator(args.seed),
        alpha=args.alpha,
        threshold=_parse_threshold(args.threshold),
        null_samples=args.null_samples,
        multiplier=args.mix_multiplier,
        workers=args.threads,
    )
    print("tau stat_reject_rate gate_reject_rate reps")
    for r in rows:
        print(f"{r.tau} {r.stat_reject_rate} {r.gate_reject_rate} {r.reps}")
    if args.output:
        io.write_csv(
            args.output,
            ("tau", "stat_reject_rate", "gate_reject_rate", "reps"),
            [(r.tau, r.stat_reject_rate, r.gate_reject_rate, r.reps) for r in rows],
        )
        print(f"wrote {args.output}")
    return 0


def _cmd_tails(args) -> int:
    model = io.load_graph(args.model)
    fn = io.load_coefficients(args.coeffs, model)
    slack = dobrushin_slack(model).slack
    gen = as_generator(args.seed)
    steps = _steps_for(model, args)
    X = sample_states(model, args.replicas, steps, gen, workers=args.threads)
    values = np.atleast_1d(fn.evaluate(X))
    if model.n <= BRUTE_FORCE_CAP:
        center = exact_pmf(model).expectation(fn.evaluate)
    else:
        # an independent batch, so centering noise cannot bias the tail
        X2 = sample_states(model, args.replicas, steps, gen, workers=args.threads)
        center = float(np.mean(np.atleast_1d(fn.evaluate(X2))))
    et = empirical_tail(values, center)
    radii = [float(r) for r in args.radii.split(",") if r.strip() != ""]
    rows = []
    for r in radii:
        q = TailBoundQuery(
            n=model.n, eta=slack, inf_norm=fn.inf_norm, degree=fn.degree, radius=r
        )
        tb = bilinear_tail_bound(q) if fn.degree == 2 else multilinear_tail_bound(q)
        rows.append(
            (r, et.query(r), min(1.0, tb.bound), tb.radius_valid, et.stderr(r))
        )
    print("r empirical bound radius_valid stderr")
    for row in rows:
        print(" ".join(io._format_value(v) for v in row))
    if args.output:
        io.write_csv(
            args.output, ("r", "empirical", "bound", "radius_valid", "stderr"), rows
        )
        print(f"wrote {args.output}")
    return 0


def _cmd_check(args) -> int:
    model = io.load_graph(args.model)
    rep = dobrushin_slack(model)
    print(f"nodes={model.n} edges={model.n_edges}")
    print(f"slack={rep.slack!r}")
    print(f"worst_node={rep.worst_node}")
    print(f"high_temperature={'true' if rep.high_temperature else 'false'}")
    rec = {
        "command": "check",
        "model": args.model,
        "nodes": model.n,
        "edges": model.n_edges,
        "slack": rep.slack,
        "worst_node": rep.worst_node,
        "high_temperature": rep.high_temperature,
    }
    if rep.high_temperature:
        sched = mixing_schedule(model, args.mix_multiplier)
        print(f"t_mix={sched.t_mix} t_star={sched.t_star}")
        rec["t_mix"] = sched.t_mix
        rec["t_star"] = sched.t_star
    if args.output:
        io.write_report([rec], args.output)
        print(f"wrote {args.output}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isinglab",
        description="Glauber-dynamics sampling, coupling diagnostics, tail "
        "estimation, pseudo-likelihood fitting, and goodness-of-fit testing "
        "for high-temperature Ising models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw equilibrated configurations")
    p.add_argument("model", help="model file (edge list or grid)")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--steps", type=int, default=None, help="explicit step count")
    p.add_argument("--mix-multiplier", type=float, default=1.0,
                   help="accuracy exponent when --steps is omitted")
    p.add_argument("--start", type=str, default=None, help="start configuration file")
    _add_common(p)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("couple", help="coupled chains with Hamming traces")
    p.add_argument("model")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--chains", type=int, default=2)
    _add_common(p)
    p.set_defaults(func=_cmd_couple)

    p = sub.add_parser("estimate", help="pseudo-likelihood fit of (h, theta)")
    p.add_argument("model")
    p.add_argument("observation")
    p.add_argument("--zero-field", action="store_true", help="pin h to 0")
    _add_common(p)
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("test", help="goodness-of-fit test of an observation")
    p.add_argument("model")
    p.add_argument("observation")
    p.add_argument("--statistic", type=str, default="zlocal",
                   help="zlocal, zk, or a coefficient file")
    p.add_argument("--k", type=int, default=2, help="distance cutoff for zk")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--null-samples", type=int, default=100)
    p.add_argument("--mix-multiplier", type=float, default=1.0)
    p.add_argument("--threshold", type=str, default="grid-critical",
                   help="grid-critical, dobrushin, or a number")
    p.add_argument("--fit-field", action="store_true",
                   help="fit h too instead of pinning it to 0")
    _add_common(p)
    p.set_defaults(func=_cmd_test)

    p = sub.add_parser("power", help="rejection rates against departure data")
    p.add_argument("--width", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--taus", type=str, required=True, help="comma-separated")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--null-samples", type=int, default=100)
    p.add_argument("--mix-multiplier", type=float, default=1.0)
    p.add_argument("--threshold", type=str, default="grid-critical")
    _add_common(p)
    p.set_defaults(func=_cmd_power)

    p = sub.add_parser("tails", help="empirical tails vs. deviation bounds")
    p.add_argument("model")
    p.add_argument("--coeffs", type=str, required=True, help="coefficient file")
    p.add_argument("--replicas", type=int, default=1000)
    p.add_argument("--radii", type=str, required=True, help="comma-separated")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--mix-multiplier", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=_cmd_tails)

    p = sub.add_parser("check", help="high-temperature diagnostics")
    p.add_argument("model")
    p.add_argument("--mix-multiplier", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=_cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (io.ParseError, ValueError, IndexError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
