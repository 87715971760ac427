"""Command line interface.

Exit codes: 0 on success or a positive verdict, 1 on a negative verdict,
2 on bad input.  CSV output always uses '.' as the decimal separator.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .blackwell_order import Verdict, blackwell_compare
from .config import Config
from .divergence import divergence_eval
from .errors import ExperimentError, NoEtaFound, OracleDisagreement, PreconditionFailed
from .experiment import llr_distribution, power_llr
from .fixtures import example1
from .large_deviations import sample_bound
from .large_sample import PredictDominates, catalyst, dominance_vector, large_sample_verdict, ratio_search
from .majorization import jensen_check, multistate_necessary
from .renyi import DominatesOnGrid, default_grid, renyi_order_check, renyi_values
from .suite import format_table, run_suite

OK, NEGATIVE, BAD_INPUT = 0, 1, 2


def _config(args) -> Config:
    return Config(tol=args.tol, t_max=args.t_max, grid_points=args.grid_points, n_cap=args.n_cap, seed=args.seed)


def _csv(rows, header, out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _emit_csv(rows, header, path, stdout) -> None:
    if path in (None, "-"):
        _csv(rows, header, stdout)
    else:
        with open(path, "w", newline="") as fh:
            _csv(rows, header, fh)


def cmd_validate(args, cfg, out) -> int:
    P = io.load_experiment(args.experiment)
    X0, X1 = llr_distribution(P, 0), llr_distribution(P, 1)
    print(f"ok: {P.size} outcomes, LLR range [{-X0.max:.6g}, {X1.max:.6g}]", file=out)
    return OK


def cmd_compare(args, cfg, out) -> int:
    P, Q = io.load_experiment(args.P), io.load_experiment(args.Q)
    mode = args.mode
    if mode == "blackwell":
        res = blackwell_compare(P, Q, "cross-validate" if args.cross_validate else "perfected")
        print(res.verdict, file=out)
        if res.verdict is Verdict.INCOMPARABLE:
            print(f"witness P>=Q fails at a={res.witness_pq:.9g}; Q>=P fails at a={res.witness_qp:.9g}", file=out)
        return OK if res.verdict.p_weakly_dominates else NEGATIVE
    if mode == "renyi":
        v = renyi_order_check(P, Q, T=cfg.t_max, grid_points=cfg.grid_points)
        print(v, file=out)
        return OK if isinstance(v, DominatesOnGrid) else NEGATIVE
    if mode == "large-sample":
        return _large_sample(P, Q, args.cap or cfg.n_cap, out)
    res = ratio_search(P, Q, args.n_max)
    for n, m in res.pairs:
        print(f"n={n} m={m}", file=out)
    print(f"best m/n={res.best:.6g} grid ratio={res.grid_ratio:.6g}", file=out)
    return OK


def _large_sample(P, Q, cap, out) -> int:
    verdict = large_sample_verdict(P, Q)
    report = dominance_vector(P, Q, cap=cap)
    print(f"verdict: {verdict}", file=out)
    print(report, file=out)
    return OK if isinstance(verdict, PredictDominates) else NEGATIVE


def cmd_large_sample(args, cfg, out) -> int:
    return _large_sample(io.load_experiment(args.P), io.load_experiment(args.Q), args.cap or cfg.n_cap, out)


def cmd_power(args, cfg, out) -> int:
    X = power_llr(io.load_experiment(args.experiment), args.n, args.theta)
    _csv(zip(X.values, X.probs), ["llr", "prob"], out)
    return OK


def cmd_catalyst(args, cfg, out) -> int:
    R = catalyst(io.load_experiment(args.P), io.load_experiment(args.Q), args.n)
    if args.out:
        io.save_experiment(R, args.out)
        print(f"wrote {R.size}-outcome catalyst to {args.out}", file=out)
    else:
        print(json.dumps(io.experiment_to_json(R), indent=2), file=out)
    return OK


def cmd_bound(args, cfg, out) -> int:
    s = sample_bound(io.load_experiment(args.P), io.load_experiment(args.Q))
    print(f"b={s.b:.9g}\neta={s.eta:.9g}\nn0={s.n0}", file=out)
    if args.csv:
        _emit_csv(((int(r[0]), *r[1:]) for r in s.verification_grid), ["theta", "a", "Kstar_P", "Kstar_Q"], args.csv, out)
    return OK


def cmd_divergence(args, cfg, out) -> int:
    spec = io.load_spec(args.spec)
    P = io.load_experiment(args.experiment)
    # experiments are ordered by informativeness through D(P_1, P_0)
    print(repr(divergence_eval(spec, P.p1, P.p0)), file=out)
    return OK


def _is_multistate(path) -> bool:
    data = json.loads(Path(path).read_text())
    return isinstance(data, dict) and isinstance(data.get("probs"), list) and data["probs"] and isinstance(data["probs"][0], list)


def cmd_majorize(args, cfg, out) -> int:
    if _is_multistate(args.mu):
        rep = multistate_necessary(io.load_multistate(args.mu), io.load_multistate(args.nu), np.random.default_rng(cfg.seed))
        print(f"necessary conditions {'hold' if rep.passed else 'fail'} ({rep.checked} points checked)", file=out)
        for w in rep.failures[:5]:
            print(f"  {w.condition} state {w.state} at t={w.t}: P={w.p_value:.6g} Q={w.q_value:.6g}", file=out)
        return OK if rep.passed else NEGATIVE
    rep = jensen_check(io.load_pmf(args.mu), io.load_pmf(args.nu), cap=args.powers)
    print(f"entropy condition: {rep.condition}" + ("" if rep.condition else f" (fails at {rep.failed_at})"), file=out)
    print("majorizes at n=1..{}: {}".format(args.powers, "".join("M" if m else "." for m in rep.majorizes_at)), file=out)
    return OK if rep.condition else NEGATIVE


def cmd_plot_data(args, cfg, out) -> int:
    if args.example1:
        P, Q = example1(args.p, None)
    elif args.P and args.Q:
        P, Q = io.load_experiment(args.P), io.load_experiment(args.Q)
    else:
        raise ExperimentError("plot-data needs --example1 or two experiment files")
    t = default_grid(cfg.t_max, cfg.grid_points)
    cols = [renyi_values(E, th, t) for th in (0, 1) for E in (P, Q)]
    _emit_csv(zip(t, *cols), ["t", "R_P_theta0", "R_Q_theta0", "R_P_theta1", "R_Q_theta1"], args.out, out)
    return OK


def cmd_paper_suite(args, cfg, out) -> int:
    rows = run_suite()
    print(format_table(rows), file=out)
    return OK if all(r.passed for r in rows) else NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9, help="numerical tolerance (default 1e-9)")
    common.add_argument("--t-max", type=float, default=64.0, help="upper end of the Rényi grid (default 64)")
    common.add_argument("--grid-points", type=int, default=512, help="Rényi grid size (default 512)")
    common.add_argument("--n-cap", type=int, default=64, help="largest sample size enumerated (default 64)")
    common.add_argument("--seed", type=int, default=20240601, help="seed for randomized checks")

    p = argparse.ArgumentParser(prog="blackwell", description="Compare binary-state statistical experiments.",
                                epilog="Exit status: 0 success, 1 negative verdict, 2 input error.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check an experiment file")
    s.add_argument("experiment")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("compare", parents=[common], help="compare two experiments")
    s.add_argument("P")
    s.add_argument("Q")
    s.add_argument("--mode", choices=["blackwell", "renyi", "large-sample", "ratio"], default="blackwell")
    s.add_argument("--cross-validate", action="store_true", help="also run the posterior mean-preserving-spread test")
    s.add_argument("--cap", type=int, default=None, help="sample-size cap for --mode large-sample")
    s.add_argument("--n-max", type=int, default=8, help="largest n for --mode ratio")
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("large-sample", parents=[common], help="dominance vector of P^n against Q^n")
    s.add_argument("P")
    s.add_argument("Q")
    s.add_argument("--cap", type=int, default=None)
    s.set_defaults(func=cmd_large_sample)

    s = sub.add_parser("power", parents=[common], help="LLR law of n i.i.d. draws; CSV columns llr,prob")
    s.add_argument("experiment")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--theta", type=int, choices=[0, 1], default=1)
    s.set_defaults(func=cmd_power)

    s = sub.add_parser("catalyst", parents=[common], help="build R with P(x)R dominating Q(x)R")
    s.add_argument("P")
    s.add_argument("Q")
    s.add_argument("-n", type=int, required=True)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_catalyst)

    s = sub.add_parser("bound", parents=[common], help="sample-size bound n0; CSV columns theta,a,Kstar_P,Kstar_Q")
    s.add_argument("P")
    s.add_argument("Q")
    s.add_argument("--csv", default=None, help="write the verification grid here ('-' for stdout)")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("divergence", parents=[common], help="evaluate an additive divergence at (P_1, P_0)")
    s.add_argument("spec")
    s.add_argument("experiment")
    s.set_defaults(func=cmd_divergence)

    s = sub.add_parser("majorize", parents=[common], help="majorization of pmfs or multi-state necessary conditions")
    s.add_argument("mu")
    s.add_argument("nu")
    s.add_argument("--powers", type=int, default=10)
    s.set_defaults(func=cmd_majorize)

    s = sub.add_parser("plot-data", parents=[common],
                       help="Rényi profiles; CSV columns t,R_P_theta0,R_Q_theta0,R_P_theta1,R_Q_theta1")
    s.add_argument("P", nargs="?")
    s.add_argument("Q", nargs="?")
    s.add_argument("--example1", action="store_true", help="use the continuous-signal example against Q(p)")
    s.add_argument("--p", type=float, default=0.63)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_plot_data)

    s = sub.add_parser("paper-suite", parents=[common], help="run the reference fixtures and print a table")
    s.set_defaults(func=cmd_paper_suite)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return BAD_INPUT if exc.code else OK
    try:
        cfg = _config(args)
        return args.func(args, cfg, out)
    except (PreconditionFailed, NoEtaFound) as exc:
        print(f"negative: {exc}", file=out)
        return NEGATIVE
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return BAD_INPUT
    except OracleDisagreement as exc:
        print(f"oracle disagreement: {exc}", file=sys.stderr)
        return NEGATIVE


def run_command(argv) -> tuple[int, str]:
    """Run with captured standard output; returns ``(exit code, text)``."""
    buf = _io.StringIO()
    code = main(argv, buf)
    return code, buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
