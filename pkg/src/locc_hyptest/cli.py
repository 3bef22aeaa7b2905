"""Command line: sweep, invert, verify and show-povm."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from pathlib import Path

import numpy as np

from .config import (
    PRESETS,
    ConfigError,
    SweepConfig,
    load_config,
    load_preset,
    parse_classes,
    parse_grid,
    parse_list,
    with_overrides,
)
from .core import InstanceError
from .oracles import Status, verify_instance
from .tradeoff import breakpoints, invert, merge_grid, run_tasks, solve_point
from .two_way import DEFAULT_TOL, TriangularAllocation

EXIT_OK = 0
EXIT_DISAGREE = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


def fmt(x: float) -> str:
    """12 significant digits, '.' decimal separator, no negative zero."""
    x = float(x)
    if x == 0:
        return "0"
    return format(x, ".12g")


def _dims(text: str) -> tuple:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--dims expects DA,DB, got {text!r}") from None
    if len(vals) != 2 or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"--dims expects two positive integers, got {text!r}")
    return vals


def _wrap(parser):
    def inner(text):
        try:
            return parser(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return inner


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="INI config file")
    common.add_argument("--preset", choices=PRESETS, help="shipped preset")
    common.add_argument("--alphas", type=_wrap(parse_grid), metavar="A:B:N",
                        help="alpha grid as START:STOP:COUNT or a comma list")
    common.add_argument("--lambda", dest="lambdas", type=_wrap(parse_list), metavar="L1,L2,...",
                        help="Schmidt coefficients, non-increasing, summing to 1")
    common.add_argument("--dims", type=_dims, metavar="DA,DB")
    common.add_argument("--classes", type=_wrap(parse_classes), metavar="LIST",
                        help="comma list of one_way, two_way_tilde, separable, global")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--plot", metavar="PATH", help="SVG plot path (sweep only)")
    common.add_argument("--tol", type=float, default=None,
                        help="solver tolerance; for verify, the oracle comparison tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)

    parser = argparse.ArgumentParser(
        prog="locc-hyptest",
        description="Optimal error trade-offs for testing a bipartite pure state against white noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep", parents=[common], help="trade-off curves to CSV (and SVG)")
    inv = sub.add_parser("invert", parents=[common], help="smallest alpha reaching a target beta")
    inv.add_argument("--beta", type=float, required=True)
    sub.add_parser("verify", parents=[common], help="run the oracle suite, JSON lines out")
    show = sub.add_parser("show-povm", parents=[common], help="print a certificate operator")
    show.add_argument("--alpha", type=float, required=True)
    return parser


def resolve_config(args) -> SweepConfig:
    if args.preset and args.config:
        raise ConfigError("use either --preset or --config, not both")
    if args.preset:
        cfg = load_preset(args.preset)
    elif args.config:
        cfg = load_config(args.config)
    else:
        cfg = SweepConfig(source="<flags>")
    over = dict(lambdas=args.lambdas, dims=args.dims, classes=args.classes)
    if args.alphas is not None:
        if cfg.vary == "lambda":
            if len(args.alphas) != 1:
                raise ConfigError("a lambda sweep takes a single --alphas value")
            over["fixed_alpha"] = args.alphas[0]
        else:
            over["alphas"] = args.alphas
    if args.lambdas is not None:
        over["vary"] = "alpha"
    return with_overrides(cfg, **over)


def _emit(text: str, path) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_sweep(cfg: SweepConfig, out=None, plot=None, jobs: int = 1, tol: float = DEFAULT_TOL) -> str:
    """Run a sweep; returns the CSV text (also written to ``out``)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if cfg.vary == "lambda":
        pairs = cfg.lambda_instances()
        tasks = [(inst, cfg.fixed_alpha, c, tol) for _, inst in pairs for c in cfg.classes]
        points = run_tasks(tasks, jobs)
        writer.writerow(["lambda", "alpha", "class", "beta", "certificate_ref"])
        it = iter(points)
        for lam, _ in pairs:
            for _c in cfg.classes:
                p = next(it)
                writer.writerow([fmt(lam), fmt(p.alpha), p.povm_class.value, fmt(p.beta), p.certificate_ref])
    else:
        if len(cfg.alphas) < 2:
            raise ConfigError(f"{cfg.source}: a sweep needs at least 2 alpha points")
        instance = cfg.instance()
        alphas = cfg.alphas
        if cfg.breakpoints:
            lo, hi = min(alphas), max(alphas)
            alphas = merge_grid(alphas, [b for b in breakpoints(instance) if lo <= b <= hi])
        tasks = [(instance, float(a), c, tol) for a in alphas for c in cfg.classes]
        points = run_tasks(tasks, jobs)
        writer.writerow(["alpha", "class", "beta", "certificate_ref"])
        for p in points:
            writer.writerow([fmt(p.alpha), p.povm_class.value, fmt(p.beta), p.certificate_ref])
    text = buf.getvalue()
    _emit(text, out)
    if plot:
        from .plotting import plot_csv

        if out:
            plot_csv(out, plot, cfg.title)
        else:
            tmp = Path(plot).with_suffix(".csv")
            tmp.write_text(text, encoding="utf-8")
            plot_csv(tmp, plot, cfg.title)
    return text


def cmd_invert(cfg: SweepConfig, beta_target: float, out=None, tol: float = DEFAULT_TOL) -> dict:
    if not (0.0 <= beta_target <= 1.0):
        raise ValueError(f"target beta={beta_target} outside [0, 1]")
    instance = cfg.instance()
    result = {c: invert(instance, c, beta_target, tol) for c in cfg.classes}
    lines = ["class,alpha"] + [f"{c.value},{fmt(a)}" for c, a in result.items()]
    _emit("\n".join(lines) + "\n", out)
    return result


def default_verify_targets() -> list:
    """(instance, alphas) pairs drawn from the shipped presets."""
    targets = []
    for name in PRESETS:
        cfg = load_preset(name)
        if cfg.vary == "lambda":
            for lam, inst in cfg.lambda_instances()[::10]:
                targets.append((inst, [cfg.fixed_alpha]))
            continue
        inst = cfg.instance()
        grid = np.linspace(min(cfg.alphas), max(cfg.alphas), 7)
        targets.append((inst, merge_grid(grid, breakpoints(inst))))
    return targets


def cmd_verify(cfg, tol=None, seed: int = 0, out=None, log=None) -> int:
    log = log or sys.stderr
    if cfg is None:
        targets = default_verify_targets()
    elif cfg.vary == "lambda":
        targets = [(inst, [cfg.fixed_alpha]) for _, inst in cfg.lambda_instances()]
    else:
        targets = [(cfg.instance(), cfg.alphas)]
    reports = []
    for inst, alphas in targets:
        reports.extend(verify_instance(inst, alphas, tol=tol, seed=seed))
    _emit("".join(r.to_json() + "\n" for r in reports), out)
    bad = [r for r in reports if r.status is Status.DISAGREE]
    unsure = [r for r in reports if r.status is Status.INCONCLUSIVE]
    print(f"verify: {len(reports)} reports, {len(bad)} disagree, {len(unsure)} inconclusive", file=log)
    for r in bad + unsure:
        print(f"  {r.status.value}: {r.target} alpha={r.detail.get('alpha')} "
              f"lambda={r.detail.get('lambda')} gap={r.gap:.3e}", file=log)
    if bad:
        return EXIT_DISAGREE
    if unsure:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def _matrix_text(mat: np.ndarray) -> str:
    real = np.max(np.abs(mat.imag), initial=0.0) == 0
    rows = []
    for row in mat:
        if real:
            rows.append(" ".join(fmt(v.real) for v in row))
        else:
            rows.append(" ".join(f"{fmt(v.real)}{'+' if v.imag >= 0 else '-'}{fmt(abs(v.imag))}j" for v in row))
    return "\n".join(rows)


def cmd_show_povm(cfg: SweepConfig, alpha: float, out=None, tol: float = DEFAULT_TOL) -> str:
    instance = cfg.instance()
    blocks = []
    for cls in cfg.classes:
        p = solve_point(instance, alpha, cls, with_certificate=True, tol=tol)
        head = (f"# class={p.povm_class.value} alpha={fmt(alpha)} beta={fmt(p.beta)} "
                f"dims={instance.d_a}x{instance.d_b} {p.certificate_ref}")
        cert = p.certificate
        if isinstance(cert, TriangularAllocation):
            body = "# allocation m[i][k] (row i, column k)\n" + _matrix_text(cert.m.astype(complex))
        else:
            body = "# T in the basis |ab>, a major\n" + _matrix_text(cert.matrix)
        blocks.append(head + "\n" + body)
    text = "\n\n".join(blocks) + "\n"
    _emit(text, out)
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify" and not (args.preset or args.config or args.lambdas):
            cfg = None
        else:
            cfg = resolve_config(args)
        tol = args.tol if args.tol is not None else DEFAULT_TOL
        if args.command == "sweep":
            cmd_sweep(cfg, args.out, args.plot, max(1, args.jobs), tol)
        elif args.command == "invert":
            cmd_invert(cfg, args.beta, args.out, tol)
        elif args.command == "verify":
            return cmd_verify(cfg, args.tol, args.seed, args.out)
        elif args.command == "show-povm":
            cmd_show_povm(cfg, args.alpha, args.out, tol)
    except (ConfigError, InstanceError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
