"""Command-line interface: ``tsspam <command> ...``.

Exit codes: 0 success, 2 input error, 3 solver nonconvergence on a requested
entry, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings
from pathlib import Path


from . import io as tio
from .evaluation import f1_curve
from .exceptions import InputError, SolverError, TsSpamError
from .model import CausalGraph, FitConfig, fit_target
from .penalty import PenaltyKind
from .pista import PistaConfig
from .replicate import ReplicationConfig, default_grid, run_replication
from .synth import GroundTruth, SynthConfig, generate

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NONCONVERGED = 3
EXIT_INVARIANT = 4

logger = logging.getLogger("tsspam")


class InvariantViolation(TsSpamError):
    pass


def _write_rows(path, fieldnames, rows):
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fieldnames, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: tio.format_float(v) if isinstance(v, float) else v for k, v in r.items()})
    if path is None or str(path) == "-":
        sys.stdout.write(buf.getvalue())
    else:
        tio.atomic_write(path, buf.getvalue())


def cmd_simulate(args):
    cfg = SynthConfig(
        p=args.p, n=args.n, n_active=args.active, seed=args.seed,
        noise_half_width=args.noise, contraction=args.contraction,
    )
    X, truth = generate(cfg)
    prefix = Path(args.out_prefix)
    labels = [f"x{j}" for j in range(cfg.p)]
    tio.write_csv(f"{prefix}series.csv", labels, X)
    tio.atomic_write(f"{prefix}truth.json", json.dumps(truth.to_dict(), indent=2) + "\n")
    return EXIT_OK


def _parse_select(text):
    if text.startswith("fixed:"):
        try:
            return "fixed", float(text.split(":", 1)[1])
        except ValueError:
            raise InputError(f"bad --select value {text!r}") from None
    if text in ("f1", "cv", "fixed"):
        return text, None
    raise InputError(f"bad --select value {text!r}; use f1, cv or fixed:<lambda>")


def cmd_fit(args):
    sf = tio.read_csv(args.input)
    select, fixed = _parse_select(args.select)
    truth = None
    if select == "f1":
        if not args.truth:
            raise InputError("--select f1 needs --truth truth.json")
        truth = GroundTruth.from_dict(json.loads(Path(args.truth).read_text()))
    pista = PistaConfig(
        n_lambda=args.n_lambda, decay=args.decay, lambda_min=args.lambda_min,
        epsilon=args.epsilon, eta0="auto" if args.eta0 == "auto" else float(args.eta0),
        max_inner_iters=args.max_iters, sigma=args.sigma,
    )
    config = FitConfig(
        q=args.q, order=args.order, gamma=args.gamma, penalty=PenaltyKind(args.penalty),
        standardize=args.standardize, pista=pista, select=select, fixed_lambda=fixed,
        cv_folds=args.folds,
    )
    targets = range(sf.p) if args.target == "all" else [int(args.target)]
    for i in targets:
        if not 0 <= i < sf.p:
            raise InputError(f"target {i} out of range for p={sf.p}")
    fits = []
    for i in targets:
        active = truth.active_set if truth is not None and i == truth.target else None
        cfg = config if active is not None or select != "f1" else FitConfig(
            **{**config.__dict__, "select": "cv"}
        )
        fits.append(fit_target(sf.data, i, cfg, truth=active))
    tio.save_fits(args.out, fits, sf.labels)
    if any(f.path.descent_violations for f in fits):
        raise InvariantViolation("objective increased on an accepted step")
    if not all(f.path.entry_at(f.selected_lambda).converged for f in fits):
        logger.error("selected path entry hit max_inner_iters")
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_eval(args):
    fits, _ = tio.load_fits(args.fit)
    truth = GroundTruth.from_dict(json.loads(Path(args.truth).read_text()))
    rows = []
    for fit in fits:
        if fit.target != truth.target:
            continue
        for pt in f1_curve(fit.path, truth.active_set):
            rows.append({
                "target": fit.target, "lambda": pt.lam, "precision": pt.precision,
                "recall": pt.recall, "f1": pt.f1, "n_selected": pt.n_selected,
                "empty_estimate": pt.empty_estimate,
            })
    if not rows:
        raise InputError(f"fit file has no entry for target {truth.target}")
    _write_rows(args.out, list(rows[0]), rows)
    return EXIT_OK


def cmd_graph(args):
    fits, labels = tio.load_fits(args.fit)
    p = fits[0].design.p
    graph = CausalGraph.from_fits(fits, p, labels)
    text = tio.export_graph(graph, args.format, top_k=args.top_k)
    if args.out:
        tio.atomic_write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_logreturn(args):
    sf = tio.read_csv(args.input)
    tio.write_csv(args.out, sf.labels, tio.log_return(sf.data))
    return EXIT_OK


def cmd_replicate(args):
    cfg = ReplicationConfig(
        p=args.p, n=args.n, n_active=args.active, q=args.q, gamma=args.gamma,
        standardize=args.standardize, penalties=tuple(args.penalties.split(",")),
        grid=default_grid(args.lambda_max, args.lambda_min, args.decay), epsilon=args.epsilon,
    )
    seeds = range(args.seed_start, args.seed_start + args.seeds)
    rows = run_replication(seeds, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    long_rows = []
    for r in rows:
        for metric in ("precision", "recall", "f1"):
            long_rows.append({
                "seed": r["seed"], "penalty": r["penalty"], "lambda": r["lambda"],
                "metric": metric, "value": float(r[metric]),
            })
    _write_rows(out / "metrics.csv", ["seed", "penalty", "lambda", "metric", "value"], long_rows)
    _write_rows(out / "diagnostics.csv", list(rows[0]), rows)
    if sum(r["descent_violations"] for r in rows):
        raise InvariantViolation("objective increased on an accepted step")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tsspam", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate a ground-truthed synthetic series")
    s.add_argument("--p", type=int, default=300)
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--active", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--noise", type=float, default=0.4, help="noise half-width")
    s.add_argument("--contraction", type=float, default=0.9)
    s.add_argument("--out-prefix", default="")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="fit one or all targets")
    f.add_argument("--input", required=True)
    f.add_argument("--target", default="0", help="0-based column index or 'all'")
    f.add_argument("--q", type=int, default=None, help="coefficients per group (default: rate rule)")
    f.add_argument("--order", type=int, default=3)
    f.add_argument("--gamma", type=float, default=1.0)
    f.add_argument("--penalty", choices=["mcp", "glasso"], default="mcp")
    f.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=False)
    f.add_argument("--n-lambda", type=int, default=100)
    f.add_argument("--lambda-min", type=float, default=None)
    f.add_argument("--decay", type=float, default=0.95)
    f.add_argument("--epsilon", type=float, default=1e-4)
    f.add_argument("--eta0", default="1.0")
    f.add_argument("--max-iters", type=int, default=10000)
    f.add_argument("--sigma", type=float, default=None, help="noise scale for the theoretical lambda floor")
    f.add_argument("--select", default="cv", help="f1 | cv | fixed | fixed:<lambda>")
    f.add_argument("--truth", default=None)
    f.add_argument("--folds", type=int, default=3)
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("eval", help="precision/recall/F1 along the path")
    e.add_argument("--fit", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--out", default="-")
    e.set_defaults(func=cmd_eval)

    g = sub.add_parser("graph", help="export the recovered graph")
    g.add_argument("--fit", required=True)
    g.add_argument("--top-k", type=int, default=None)
    g.add_argument("--format", choices=["dot", "json"], default="dot")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_graph)

    lr = sub.add_parser("logreturn", help="convert prices to log returns")
    lr.add_argument("--input", required=True)
    lr.add_argument("--out", required=True)
    lr.set_defaults(func=cmd_logreturn)

    r = sub.add_parser("replicate-synthetic", help="multi-seed support-recovery experiment")
    r.add_argument("--seeds", type=int, default=100)
    r.add_argument("--seed-start", type=int, default=0)
    r.add_argument("--p", type=int, default=300)
    r.add_argument("--n", type=int, default=500)
    r.add_argument("--active", type=int, default=10)
    r.add_argument("--q", type=int, default=3)
    r.add_argument("--gamma", type=float, default=1.0)
    r.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=True)
    r.add_argument("--penalties", default="mcp,glasso")
    r.add_argument("--lambda-max", type=float, default=1.0)
    r.add_argument("--lambda-min", type=float, default=0.01)
    r.add_argument("--decay", type=float, default=0.95)
    r.add_argument("--epsilon", type=float, default=1e-4)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_replicate)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if not args.verbose:
        warnings.simplefilter("ignore", RuntimeWarning)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        logger.error("%s", exc)
        return EXIT_INVARIANT
    except (InputError, OSError, json.JSONDecodeError, KeyError) as exc:
        logger.error("%s", exc)
        return EXIT_INPUT
    except SolverError as exc:
        logger.error("%s", exc)
        return EXIT_NONCONVERGED
    except TsSpamError as exc:
        logger.error("%s", exc)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
