"""Command line entry point: ``uaroots <subcommand> [options]``.

Exit status is 0 on success, 1 when a bound or statistical check fails and
2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import centrality, flows
from .experiments import (ExperimentConfig, TrialTable, exponent_trend, fit_scaling,
                          run_dist_suite, run_error_curve, run_nx_tail, run_phi_tail,
                          run_weight_tail)
from .growth import grow
from .tree import InvalidTree, PlaneTree

log = logging.getLogger("uaroots")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _ints(s: str) -> list[int]:
    return [int(v) for v in s.split(",") if v.strip()]


def _floats(s: str) -> list[float]:
    return [float(v) for v in s.split(",") if v.strip()]


def _load_config(path: Optional[str]) -> dict:
    if not path:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(str(exc)) from None
    try:
        if path.endswith((".yaml", ".yml")):
            import yaml

            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except Exception as exc:  # yaml and json raise different error types
        raise UsageError(f"cannot parse {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a mapping")
    return data


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--trials", type=int, help="number of Monte Carlo trials")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="table format")
    common.add_argument("--config", help="JSON or YAML file with ExperimentConfig fields")
    common.add_argument("-v", "--verbose", action="store_true")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", choices=("UA", "UA_regular"))
    model.add_argument("-d", type=int, help="children per expansion (UA_regular)")
    model.add_argument("-n", "--n-grid", type=_ints, help="comma-separated sizes")

    p = argparse.ArgumentParser(prog="uaroots", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common, model], help="grow one tree and print it")
    s = sub.add_parser("rank", parents=[common], help="rank the nodes of a serialized tree")
    s.add_argument("tree", help="tree file ('-' for stdin)")
    s.add_argument("-k", type=int, default=10, help="number of candidates")
    s.add_argument("--method", choices=("phi", "max_subtree"), default="phi")

    s = sub.add_parser("error-curve", parents=[common, model], help="P(root not in top K)")
    s.add_argument("-K", "--K-grid", type=_ints)

    s = sub.add_parser("phi-tail", parents=[common, model], help="tail of the competitive ratio")
    s.add_argument("-x", "--x-grid", type=_floats)

    s = sub.add_parser("weight-tail", parents=[common, model], help="deep heavy subtree check")
    s.add_argument("-m", "--m-grid", type=_ints)
    s.add_argument("--eps", type=float)

    s = sub.add_parser("nx-tail", parents=[common, model], help="N_x tail of the random flow")
    s.add_argument("-x", "--x-grid", type=_floats)
    s.add_argument("-y", "--y-grid", type=_floats)
    s.add_argument("--c-hat", type=float, help="override the frozen calibration constant")

    s = sub.add_parser("flow-count", parents=[common], help="exact N_x for a geometric flow")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha", type=float)
    g.add_argument("--dary", type=int, metavar="D", help="use alpha = D**(1/(D-1))")
    s.add_argument("-x", type=float, required=True)
    s.add_argument("--budget", type=int, default=flows.DEFAULT_BUDGET)

    s = sub.add_parser("dist-check", parents=[common], help="distributional test suite")
    s.add_argument("--samples", type=int)

    s = sub.add_parser("fit-scaling", parents=[common], help="fit K(eps) from an error table")
    s.add_argument("table", help="CSV or JSON produced by error-curve")
    return p


def _config(args, experiment: str) -> ExperimentConfig:
    data = _load_config(args.config)
    over = {"experiment": experiment}
    for key in ("seed", "trials", "workers", "out", "format", "model", "d", "n_grid",
                "K_grid", "x_grid", "y_grid", "m_grid", "eps", "c_hat", "samples"):
        val = getattr(args, key, None)
        if val is not None:
            over[key] = val
    try:
        return ExperimentConfig.from_mapping(data, **over)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _emit(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _emit_table(table: TrialTable, cfg: ExperimentConfig) -> int:
    _emit(table.to_csv() if cfg.format == "csv" else table.to_json(), cfg.out)
    return EXIT_OK if table.all_pass else EXIT_FAIL


def _cmd_simulate(args) -> int:
    cfg = _config(args, "simulate")
    t = grow(cfg.model, cfg.n_grid[0], cfg.seed, d=cfg.d)
    _emit(t.dumps(), cfg.out)
    return EXIT_OK


def _cmd_rank(args) -> int:
    if args.k < 1:
        raise UsageError("-k must be >= 1")
    try:
        if args.tree == "-":
            t = PlaneTree.load(sys.stdin)
        else:
            with open(args.tree) as fp:
                t = PlaneTree.load(fp)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except InvalidTree as exc:
        raise UsageError(f"invalid tree: {exc}") from None
    rep = centrality.centrality_report(t)
    top = centrality.select_roots(t, args.k, args.method)
    out = {
        "n": len(t),
        "method": args.method,
        "top": top,
        "words": [list(t.word(i)) for i in top],
        "log_ratio": [float(rep.log_ratio[i]) for i in top],
        "log_Phi": rep.log_Phi,
        "central_path": rep.central_path,
        "root_rank": centrality.root_rank(t, rep.log_ratio),
    }
    _emit(json.dumps(out, indent=1), args.out)
    return EXIT_OK


def _cmd_flow_count(args) -> int:
    if args.x < 1:
        raise UsageError("x must be >= 1")
    alpha = args.alpha if args.alpha is not None else args.dary ** (1.0 / (args.dary - 1))
    if args.dary is not None and args.dary < 2:
        raise UsageError("--dary needs D >= 2")
    try:
        cert = flows.certified_nx_bound(alpha, args.x, args.budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(json.dumps(cert.as_dict(), indent=1), args.out)
    return EXIT_OK if cert.passed else EXIT_FAIL


def _cmd_fit_scaling(args) -> int:
    try:
        text = Path(args.table).read_text()
        table = (TrialTable.from_json(text) if text.lstrip().startswith("[")
                 else TrialTable.from_csv(text))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read table: {exc}") from None
    try:
        fit = fit_scaling(table)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    K, ratio, trend = exponent_trend(table)
    out = {
        "slope": fit.slope, "intercept": fit.intercept, "C_hat": fit.C_hat, "r2": fit.r2,
        "points": [[float(a), float(b)] for a, b in zip(fit.sqrt_log_inv_eps, fit.log_K)],
        "residuals": fit.residuals.tolist(),
        "exponent_ratio": {str(int(k)): float(r) for k, r in zip(K, ratio)},
        "exponent_trend_slope": trend,
    }
    _emit(json.dumps(out, indent=1), args.out)
    return EXIT_OK


_RUNNERS = {
    "error-curve": run_error_curve,
    "phi-tail": run_phi_tail,
    "weight-tail": run_weight_tail,
    "nx-tail": run_nx_tail,
    "dist-check": run_dist_suite,
}


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage problems with status 2
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "rank":
            return _cmd_rank(args)
        if args.command == "flow-count":
            return _cmd_flow_count(args)
        if args.command == "fit-scaling":
            return _cmd_fit_scaling(args)
        cfg = _config(args, args.command)
        return _emit_table(_RUNNERS[args.command](cfg), cfg)
    except UsageError as exc:
        print(f"uaroots: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except flows.BudgetExceeded as exc:
        print(f"uaroots: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
