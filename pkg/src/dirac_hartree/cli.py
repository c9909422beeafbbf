"""Command-line entry point.

Exit codes: 0 success, 1 usage or input error, 2 numerical failure
(non-convergence, rejected parameter tuple, failed verification).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .clifford import DimensionUnsupported, build_clifford, check_relations
from .config import ConfigError, RunConfig
from .fieldio import FieldFormatError, read_field, write_field, write_slice_csv
from .grid import Gaussian, SpectralGrid, edge_ratio, lebesgue_norm, sample, set_workers
from .potentials import ZERO_MODES, HartreeParams, hartree_nonlinearity, zero_mode_difference
from .propagator import PropagatorParams, apply_propagator
from .solver import (
    ContractionFailed,
    EvolutionConfig,
    blowup_monitor,
    charge_drift,
    picard_solve,
    split_step_evolve,
)
from .timefreq import NormSpec, Window, evaluate_norm

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
log = logging.getLogger("dirac_hartree")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")

    def exit(self, status=0, message=None):
        if status:
            raise UsageError(message or f"{self.prog}: error")
        if message:
            sys.stderr.write(message)
        raise SystemExit(0)


def _exp(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity"):
        return math.inf
    if "/" in t:
        a, b = t.split("/")
        return float(a) / float(b)
    return float(t)


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _dump(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True)


# --- clifford --------------------------------------------------------------------


def _entry(z: complex) -> str:
    re, im = round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0
    if im == 0:
        return f"{re:g}"
    if re == 0:
        return {1.0: "i", -1.0: "-i"}.get(im, f"{im:g}i")
    return f"{re:g}{im:+g}i"


def _format_matrix(name: str, m: np.ndarray) -> str:
    cells = [[_entry(z) for z in row] for row in m]
    w = max(len(c) for row in cells for c in row)
    rows = ["  [ " + "  ".join(c.rjust(w) for c in row) + " ]" for row in cells]
    return f"{name} =\n" + "\n".join(rows)


def cmd_clifford(args) -> int:
    rep = build_clifford(args.dim)
    report = check_relations(rep)
    if args.json:
        print(_dump({"representation": rep.to_dict(), "relations": report.to_dict()}))
        return EXIT_OK
    print(f"d = {rep.d}, spinor size n = {rep.n}")
    for j, a in enumerate(rep.alphas, start=1):
        print(_format_matrix(f"alpha_{j}", a))
    print(_format_matrix("beta", rep.beta))
    status = "ok" if report.passes() else "VIOLATED"
    print(f"anticommutation relations: {status} (max violation {report.max_violation:.2e})")
    return EXIT_OK if report.passes() else EXIT_NUMERIC


# --- single-field commands -------------------------------------------------------


def cmd_norm(args) -> int:
    f = read_field(args.input)
    spec = NormSpec(args.space, p=args.p, q=args.q, s=args.s, window=Window(args.window),
                    x_stride=args.x_stride, xi_stride=args.xi_stride)
    value = evaluate_norm(f, spec)
    out = {"norm": spec.label(), "value": value, "spec": spec.to_dict(), "grid": f.grid.to_dict(),
           "edge_ratio": edge_ratio(f) if f.space.value == "physical" else None}
    print(_dump(out) if args.json else f"{spec.label()} = {value:.15g}")
    return EXIT_OK


def cmd_hartree(args) -> int:
    f = read_field(args.input)
    rep = build_clifford(f.grid.d)
    params = HartreeParams(args.gamma, args.lam, rep, args.zero_mode)
    A = hartree_nonlinearity(f, params)
    rho = np.sum(f.data * (f.data @ rep.beta.T).conj(), axis=-1).real
    info = {
        "gamma": args.gamma,
        "lambda": args.lam,
        "zero_mode": args.zero_mode,
        "zero_mode_difference": zero_mode_difference(rho, f.grid, args.gamma),
        "input_edge_ratio": edge_ratio(f),
        "output_l2": lebesgue_norm(A, 2),
    }
    write_field(args.out, A, meta={"command": "hartree", **info})
    print(_dump(info) if args.json else f"wrote {args.out}: ||A(psi)||_2 = {info['output_l2']:.6g}")
    return EXIT_OK


def cmd_propagate(args) -> int:
    f = read_field(args.input)
    rep = build_clifford(f.grid.d)
    g = apply_propagator(f, args.t, PropagatorParams(args.mass, rep, f.grid))
    info = {"t": args.t, "mass": args.mass, "l2_in": lebesgue_norm(f, 2), "l2_out": lebesgue_norm(g, 2)}
    write_field(args.out, g, meta={"command": "propagate", **info})
    print(_dump(info) if args.json else f"wrote {args.out}: ||U(t)psi||_2 = {info['l2_out']:.6g}")
    return EXIT_OK


# --- evolve ----------------------------------------------------------------------


def initial_datum(cfg: RunConfig, grid: SpectralGrid, n: int):
    if cfg["data.input"]:
        f = read_field(cfg["data.input"])
        if f.grid != grid or f.n != n:
            raise ConfigError("data.input does not match the configured grid / spinor size")
        return f
    d = grid.d
    center = cfg["data.center"] or (0.0,) * d
    k = cfg["data.modulation"] or (0.0,) * d
    if len(center) != d or len(k) != d:
        raise ConfigError("data.center and data.modulation need one entry per dimension")
    w = list(cfg["data.weights"])[:n] + [0.0] * max(0, n - len(cfg["data.weights"]))
    f = sample(Gaussian(cfg["data.width"], center, k, tuple(w)), grid, n)
    target = cfg["data.l2"]
    if target > 0:
        f = f * (target / lebesgue_norm(f, 2))
    return f


def evolution_config(cfg: RunConfig) -> EvolutionConfig:
    d, gamma = cfg["dim"], cfg["gamma"]
    grid = SpectralGrid(d, cfg["N"], cfg["L"])
    spec = NormSpec(cfg["norm.kind"], p=cfg["norm.p"], q=cfg.get("norm.q", 2 * d / (d + gamma)),
                    s=cfg["norm.s"], window=Window(cfg["norm.window"]),
                    x_stride=cfg["norm.x_stride"], xi_stride=cfg["norm.xi_stride"])
    return EvolutionConfig(grid, gamma, cfg["lambda"], cfg["mass"], cfg["T"], n_t=cfg["nt"],
                           quadrature=cfg["quad"], picard_tol=cfg["tol"], picard_max=cfg["maxiter"],
                           norm_spec=spec, zero_mode=cfg["zero_mode"], split_substeps=cfg["split.substeps"])


def cmd_evolve(args) -> int:
    cfg = RunConfig.load(args.config, args.set or ())
    if cfg["solver"] not in ("picard", "split", "both"):
        raise ConfigError("solver must be picard, split or both")
    if cfg["precision"] not in ("double", "single"):
        raise ConfigError("precision must be double or single")
    set_workers(cfg.threads)
    conf = evolution_config(cfg)
    psi0 = initial_datum(cfg, conf.grid, conf.rep.n)
    prefix = Path(cfg["out"])
    prefix.parent.mkdir(parents=True, exist_ok=True)
    report = {"config": cfg.resolved(), "config_text": cfg.to_text(), "evolution": conf.to_dict(),
              "version": __version__, "initial_edge_ratio": edge_ratio(psi0)}
    t0 = time.perf_counter()
    status = EXIT_OK
    traj = split = None
    if cfg["solver"] in ("picard", "both"):
        try:
            traj, conv = picard_solve(psi0, conf, init=cfg["init"])
            report["picard"] = conv.to_dict()
        except ContractionFailed as exc:
            report["picard"] = {**exc.report.to_dict(), "error": str(exc)}
            traj, status = exc.trajectory, EXIT_NUMERIC
            print(f"error: {exc}", file=sys.stderr)
    if cfg["solver"] in ("split", "both"):
        split = split_step_evolve(psi0, conf)
        report["split"] = {"charge_drift": charge_drift(split), "substeps": conf.split_substeps}
    main = traj if traj is not None else split
    if traj is not None and split is not None:
        diff = lebesgue_norm(traj.final - split.final, 2) / lebesgue_norm(traj.final, 2)
        report["agreement_l2_relative"] = diff
    specs = [conf.norm_spec, NormSpec("lp", p=2.0)]
    mon = blowup_monitor(main, specs, cfg["monitor.factor"])
    report["monitor"] = mon.to_dict()
    report["charge_drift"] = charge_drift(main)
    report["final_edge_ratio"] = edge_ratio(main.final)
    report["runtime_s"] = time.perf_counter() - t0

    with open(f"{prefix}_norms.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        labels = list(mon.series)
        w.writerow(["t"] + labels)
        for i, t in enumerate(mon.times):
            w.writerow([repr(t)] + [repr(mon.series[k][i]) for k in labels])
    write_field(f"{prefix}_final.bin", main.final, precision=cfg["precision"],
                meta={"command": "evolve", "t": conf.T, "config": cfg.to_text()})
    write_slice_csv(f"{prefix}_final.csv", main.final)
    Path(f"{prefix}_report.json").write_text(_dump(report))
    if args.json:
        print(_dump(report))
    else:
        pic = report.get("picard", {})
        print(f"picard: converged={pic.get('converged')} iterations={pic.get('iterations')} "
              f"residual={pic.get('residual', float('nan')):.3e}" if pic else "picard: skipped")
        if "agreement_l2_relative" in report:
            print(f"picard vs split-step at T: {report['agreement_l2_relative']:.3e} (relative L2)")
        print(f"charge drift {report['charge_drift']:.3e}; blow-up flag: {mon.flagged}")
        print(f"wrote {prefix}_norms.csv, {prefix}_final.bin, {prefix}_report.json")
    return status


# --- verify ----------------------------------------------------------------------


def cmd_verify(args) -> int:
    from .verify.checks import HypothesisViolation
    from .verify.run import run_all, to_csv, to_json

    try:
        summary = run_all(args.seed, args.profile, args.suite, dims=tuple(args.dims), workers=args.threads)
    except HypothesisViolation as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    text = to_json(summary)
    if args.out:
        prefix = Path(args.out)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{prefix}.json").write_text(text + "\n")
        by_suite = {}
        for r in summary["_reports"]:
            by_suite.setdefault(r.params["suite"], []).append(r)
        from .verify.report import reports_to_csv

        for s, rs in by_suite.items():
            Path(f"{prefix}_{s}.csv").write_text(reports_to_csv(rs))
    if args.json:
        print(text)
    else:
        for r in summary["_reports"]:
            print(r.summary_line())
        print(f"{summary['n_checked'] - summary['n_failed']}/{summary['n_checked']} checks passed "
              f"({summary['n_reports'] - summary['n_checked']} probes); consistency evidence, not proofs")
    return EXIT_OK if summary["passed"] else EXIT_NUMERIC


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="dirac-hartree", description="Dirac-Hartree spectral toolkit")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("clifford", help="Dirac matrices and relation check")
    c.add_argument("--dim", type=int, required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_clifford)

    c = sub.add_parser("norm", help="norm of a stored field")
    c.add_argument("--space", choices=NormSpec.KINDS, default="mod")
    c.add_argument("--p", type=_exp, default=2.0)
    c.add_argument("--q", type=_exp, default=2.0)
    c.add_argument("--s", type=float, default=0.0)
    c.add_argument("--window", type=float, default=1.0, help="Gaussian window width")
    c.add_argument("--x-stride", type=int, default=1)
    c.add_argument("--xi-stride", type=int, default=1)
    c.add_argument("--input", required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_norm)

    c = sub.add_parser("hartree", help="apply the Hartree nonlinearity to a stored field")
    c.add_argument("--gamma", type=float, required=True)
    c.add_argument("--lambda", dest="lam", type=float, default=1.0)
    c.add_argument("--zero-mode", choices=ZERO_MODES, default="zeta")
    c.add_argument("--input", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_hartree)

    c = sub.add_parser("propagate", help="apply the free Dirac propagator U(t)")
    c.add_argument("--t", type=float, required=True)
    c.add_argument("--mass", type=float, default=1.0)
    c.add_argument("--input", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_propagate)

    c = sub.add_parser("evolve", help="solve the Cauchy problem from a key=value config")
    c.add_argument("--config", help="flat key=value file")
    c.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (repeatable)")
    c.add_argument("--json", action="store_true")
    c.set_defaults(func=cmd_evolve)

    c = sub.add_parser("verify", help="ensemble consistency checks of the norm inequalities")
    c.add_argument("--suite", choices=("embedding", "product", "hls", "fixedtime", "trilinear", "all"), default="all")
    c.add_argument("--seed", type=int, default=1)
    c.add_argument("--profile", choices=("quick", "full"), default="quick")
    c.add_argument("--dims", type=int, nargs="+", choices=(1, 2), default=[1, 2])
    c.add_argument("--threads", type=int, default=1, help="FFT workers (fixed for byte-stable output)")
    c.add_argument("--out", help="write PREFIX.json and PREFIX_<suite>.csv")
    c.add_argument("--json", action="store_true", help="print the JSON summary")
    c.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc).strip(), file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    if not getattr(args, "command", None):
        parser.print_help(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, FieldFormatError, FileNotFoundError, DimensionUnsupported, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # parameter validation in the numerical modules
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
