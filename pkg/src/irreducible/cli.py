"""Command-line entry point: ``run``, ``scan`` and ``check`` subcommands."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import reducibility as red
from .config import ConfigError, RunConfig
from .coupled import run_scenario
from .fast_layer import FhnParams, ScanConfig, bifurcation_scan
from .plasticity import PlasticityConfig
from .plots import write_panels

log = logging.getLogger("irreducible")

EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _floats(text: str, n: Optional[int] = None) -> List[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise argparse.ArgumentTypeError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _key_value(text: str):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    k, v = text.split("=", 1)
    return k.strip(), v.strip()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irreducible", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate one scenario and write outputs")
    r.add_argument("--config", type=Path, help="flat JSON config file")
    r.add_argument("--scenario", choices=["reducible", "irreducible", "swept"])
    r.add_argument("--horizon", type=float)
    r.add_argument("--dt", type=float)
    r.add_argument("--out", dest="output_dir", help="output directory")
    r.add_argument("--set", dest="overrides", type=_key_value, action="append", default=[],
                   metavar="KEY=VALUE", help="override any config key")
    r.add_argument("--plot", action="store_true", help="also write panel_*.svg")

    s = sub.add_parser("scan", help="bifurcation scan of the fast layer over theta1")
    s.add_argument("--min", dest="lo", type=float, default=-1.5)
    s.add_argument("--max", dest="hi", type=float, default=1.5)
    s.add_argument("--n-points", type=int, default=61)
    s.add_argument("--a", type=float, default=0.7)
    s.add_argument("--b", type=float, default=0.8)
    s.add_argument("--epsilon", type=float, default=0.08)
    s.add_argument("--out", type=Path, default=Path("scan.csv"))

    c = sub.add_parser("check", help="run a reducibility analysis")
    c.add_argument("subject", choices=["oja", "minimax", "descent", "curl"])
    c.add_argument("--c", dest="C", type=lambda t: _floats(t, 4), default=[2.0, 0.0, 0.0, 1.0],
                   help="covariance as c11,c12,c21,c22")
    c.add_argument("--w0", type=lambda t: _floats(t, 2), default=[0.6, 0.8])
    c.add_argument("--x0", type=float, default=1.0)
    c.add_argument("--y0", type=float, default=0.0)
    c.add_argument("--dt", type=float, default=0.01)
    c.add_argument("--steps", type=int, default=3000)
    c.add_argument("--t-end", type=float, default=100.0)
    c.add_argument("--field", default="rotation",
                   choices=["gradient", "rotation", "plasticity", "plasticity-gradient"])
    c.add_argument("--v", dest="candidate", default="quadratic", choices=["quadratic", "potential"])
    c.add_argument("--omega", type=float, default=1.0)
    c.add_argument("--domain", type=lambda t: _floats(t, 4), default=[-2.0, 2.0, -2.0, 2.0])
    c.add_argument("--n", type=int, default=41)
    c.add_argument("--report", type=Path, help="write the report as JSON")
    c.add_argument("--out", type=Path, help="curl grid CSV (curl subject)")
    return p


def cmd_run(args) -> int:
    overrides = {k: v for k, v in args.overrides}
    for key in ("scenario", "horizon", "dt", "output_dir"):
        val = getattr(args, key)
        if val is not None:
            overrides[key] = val
    if args.config is not None:
        cfg = RunConfig.load(args.config, overrides)
    else:
        cfg = RunConfig.from_dict(overrides)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    log.info("running %s for %g time units", cfg.scenario, cfg.horizon)
    result = run_scenario(cfg)
    cfg.dump(out / "effective_config.json")
    result.write_csv(out / "run.csv")
    result.write_events(out / "events.jsonl")
    result.write_summary(out / "summary.json")
    if args.plot:
        write_panels(result.output_rows(), out)
    print(json.dumps(result.summary.to_dict(), indent=2))
    return 0


def cmd_scan(args) -> int:
    if not args.hi > args.lo:
        raise ConfigError("range", f"--max ({args.hi}) must exceed --min ({args.lo})")
    if args.n_points < 2:
        raise ConfigError("n_points", "must be >= 2")
    try:
        p = FhnParams(args.a, args.b, args.epsilon)
    except ValueError as exc:
        raise ConfigError("fhn", str(exc)) from None
    res = bifurcation_scan((args.lo, args.hi), args.n_points, p, ScanConfig())
    res.to_csv(args.out)
    if res.onsets:
        for lo, hi in res.onsets:
            print(f"onset in [{lo:.6g}, {hi:.6g}]")
    else:
        print("no onset in range")
    for lo, hi in res.offsets:
        print(f"offset in [{lo:.6g}, {hi:.6g}]")
    return 0


def _check_oja(args) -> tuple:
    C = np.array(args.C).reshape(2, 2)
    traj = red.oja_simulate(C, args.w0, args.dt, args.steps)
    evals, evecs = np.linalg.eigh(C)
    angle = traj.angle_to(evecs[:, np.argmax(evals)])
    norm_err = abs(float(np.linalg.norm(traj.w[-1])) - 1.0)
    mono = red.descent_along_trajectory(traj.V, tol=1e-10, times=traj.t)
    report = {
        "final_w": traj.w[-1].tolist(),
        "angle_to_principal": angle,
        "norm_error": norm_err,
        "V_max_increase": mono.max_increase,
        "V_first_violation_time": mono.first_violation_time,
    }
    ok = angle < 1e-3 and norm_err < 1e-6 and mono.monotone
    return report, ok


def _check_minimax(args) -> tuple:
    traj = red.minimax_simulate(args.x0, args.y0, args.dt, t_end=args.t_end)
    drift = traj.max_drift
    report = {"t_end": args.t_end, "max_conservation_drift": drift,
              "final": [float(traj.x[-1]), float(traj.y[-1])]}
    return report, drift < 1e-6


def _curl_summary(F, expected, dom, n, args):
    grid = red.planar_curl(F, dom, min(n, 21), 1e-3)
    if args.out is not None:
        grid.to_csv(args.out)
    # linear fields are exact under central differences; curved ones are not
    tol = 1e-8 if F.name in ("rotation", "gradient") else 1e-4
    err = float(np.max(np.abs(grid.curl - expected)))
    return {
        "curl_min": float(grid.curl.min()),
        "curl_max": float(grid.curl.max()),
        "expected_curl": expected,
        "max_curl_error": err,
    }, err < tol


def _check_descent(args) -> tuple:
    pcfg = PlasticityConfig(omega=args.omega)
    F, expected = red.named_field(args.field, args.omega, pcfg)
    if args.candidate == "quadratic":
        V = red.quadratic_potential()
    else:
        from .plasticity import potential_U

        V = red.ScalarField2D(lambda a, b: potential_U((a, b), pcfg.k, pcfg.rho0), "potential")
    dom = red.Rectangle(*args.domain)
    rep = red.descent_check(F, V, dom, args.n)
    curl, curl_ok = _curl_summary(F, expected, dom, args.n, args)
    report = {**json.loads(rep.to_json()), **curl}
    return report, rep.violation_fraction == 0 and curl_ok


def _check_curl(args) -> tuple:
    F, expected = red.named_field(args.field, args.omega, PlasticityConfig(omega=args.omega))
    return _curl_summary(F, expected, red.Rectangle(*args.domain), args.n, args)


CHECKS = {"oja": _check_oja, "minimax": _check_minimax,
          "descent": _check_descent, "curl": _check_curl}


def cmd_check(args) -> int:
    report, ok = CHECKS[args.subject](args)
    report["passed"] = bool(ok)
    text = json.dumps(report, indent=2)
    print(text)
    if args.report is not None:
        args.report.write_text(text + "\n")
    return 0 if ok else EXIT_INVARIANT


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    handler = {"run": cmd_run, "scan": cmd_scan, "check": cmd_check}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
