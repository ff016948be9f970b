"""Command line front-end.

Subcommands::

    fpme run --config FILE          run a configuration file
    fpme preset exp1|exp2|exp3|exp4 run a paper experiment preset
    fpme weights --s V --h V        print the weight table as CSV
    fpme props [--seed N]           run the randomized structure suite

Exit code 0 on success; nonzero on an aborted rung, a lost ordering, or a
property violation.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from fpme import harness
from fpme.oplib import build_weights


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help="output directory (default: runs/<name>)")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fpme",
        description="monotone scheme for the porous medium equation with nonlocal pressure",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a config file")
    p_run.add_argument("--config", required=True, help="flat key = value config file")
    _add_common_run_flags(p_run)

    p_pre = sub.add_parser("preset", help="run a paper experiment preset")
    p_pre.add_argument("name", choices=["exp1", "exp2", "exp3", "exp4"])
    p_pre.add_argument("--s", type=float, help="fractional order override")
    p_pre.add_argument("--T", type=float, help="horizon override")
    p_pre.add_argument("--ladder", help="comma-separated h values")
    p_pre.add_argument("--h0", type=float, help="reference grid spacing (exp3)")
    p_pre.add_argument("--cfl2", action="store_true",
                       help="force CFL2 (exp2 reproduces the looser published choice; "
                            "requires --lipschitz for Dirac data)")
    p_pre.add_argument("--lipschitz", type=float, help="Lipschitz bound for CFL2")
    p_pre.add_argument("--safety", type=float, help="CFL safety factor")
    _add_common_run_flags(p_pre)

    p_w = sub.add_parser("weights", help="print quadrature weights as CSV")
    p_w.add_argument("--s", type=float, required=True)
    p_w.add_argument("--h", type=float, required=True)
    p_w.add_argument("--eps-tail", type=float, default=1e-8)
    p_w.add_argument("--max-k", type=int, default=1000, help="rows to emit")
    p_w.add_argument("--out", help="write weights.csv and weights.png here instead of stdout")

    p_p = sub.add_parser("props", help="randomized structure suite")
    p_p.add_argument("--seed", type=int, default=0)
    p_p.add_argument("--pairs", type=int, default=200)
    p_p.add_argument("--steps", type=int, default=50)
    p_p.add_argument("--s", type=float, default=0.5)
    p_p.add_argument("--m", type=float, default=2.0)
    return parser


def _finish_run(cfg, out_override, no_figures) -> int:
    if no_figures:
        cfg.figures = False
    out_dir = out_override or cfg.out_dir or f"runs/{cfg.name}"
    cfg.out_dir = out_dir
    if cfg.comparison:
        result = harness.run_comparison(cfg)
        written = harness.write_comparison_outputs(result, out_dir)
        for p in written:
            print(f"wrote {p}")
        if result.crossing:
            c = result.crossing
            print(f"density crossing at t = {c['t']:g}, x = {c['x']:g} "
                  f"(u1 = {c['u1']:.6g} > u2 = {c['u2']:.6g})")
        else:
            print("no density crossing found")
        print(f"integrated variables ordered: {result.v_ordered}")
        return 0 if result.ok else 1
    result = harness.run_ladder(cfg)
    written = harness.write_ladder_outputs(result, out_dir)
    for p in written:
        print(f"wrote {p}")
    print(result.table.to_csv(), end="")
    for h, msg in result.aborted:
        print(f"ABORTED rung h = {h}: {msg}", file=sys.stderr)
    return 0 if result.ok else 1


def _cmd_run(args) -> int:
    cfg = harness.parse_config(Path(args.config).read_text())
    return _finish_run(cfg, args.out, args.no_figures)


def _cmd_preset(args) -> int:
    overrides = {}
    if args.s is not None:
        overrides["s"] = args.s
    if args.T is not None:
        overrides["T"] = args.T
    if args.ladder:
        overrides["ladder"] = tuple(float(tok) for tok in args.ladder.split(","))
    if args.h0 is not None:
        overrides["h_ref"] = args.h0
    if args.cfl2:
        overrides["cfl_mode"] = "CFL2"
    if args.lipschitz is not None:
        overrides["lipschitz"] = args.lipschitz
    if args.safety is not None:
        overrides["safety"] = args.safety
    cfg = harness.preset(args.name, **overrides)
    return _finish_run(cfg, args.out, args.no_figures)


def _cmd_weights(args) -> int:
    table = build_weights(args.s, args.h, eps_tail=args.eps_tail)
    n = min(args.max_k, table.K)
    lines = ["k,w,scaled_cumsum"]
    for k in range(1, n + 1):
        lines.append(f"{k},{float(table.w[k - 1])!r},{float(table.w_cumsum[k - 1])!r}")
    text = "\n".join(lines) + "\n"
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "weights.csv").write_text(text)
        print(f"wrote {out / 'weights.csv'}")
        from fpme import figures

        print(f"wrote {figures.render_weight_figure(table, out)}")
    else:
        sys.stdout.write(text)
    if table.tail_rel > table.eps_tail:
        print(
            f"note: truncation cap reached, achieved relative tail {table.tail_rel:.3e} "
            f"(requested {table.eps_tail:.1e})",
            file=sys.stderr,
        )
    return 0


def _cmd_props(args) -> int:
    report = harness.property_suite(
        seed=args.seed, n_pairs=args.pairs, n_steps=args.steps, s=args.s, m=args.m
    )
    print(report.summary())
    if not report.passed:
        for rep in report.positive:
            if rep.counterexample:
                print("\ncounterexample:\n" + rep.counterexample)
        for rep in report.negative:
            if rep.total == 0:
                print(f"\nnegative control {rep.cfl_mode} found no violation")
    return 0 if report.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "preset": _cmd_preset,
        "weights": _cmd_weights,
        "props": _cmd_props,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    raise SystemExit(main())
