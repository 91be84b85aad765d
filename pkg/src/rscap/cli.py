"""Command-line front end: ``rscap {solve,capacity,sweep,verify}``.

Exit codes: 0 success (including a certified absence of solutions),
2 domain/config/usage error, 3 violated lemma, 4 numerical resolution error.
Settings resolve as flags, then ``RSCAP_*`` environment variables, then
built-in defaults.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from .errors import ConfigError, DomainError, NumericalResolutionError
from .lemmas import REGISTRY, verify, verify_all
from .solver import SolverConfig, capacity, solve_saddle, sweep

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VIOLATED = 3
EXIT_NUMERICAL = 4

CSV_HEADER = ("alpha", "q", "r", "rs_value", "solved", "residual_q", "residual_r")


def _real(x):
    """JSON-safe real: shortest round-trip float, ``None`` for non-finite."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def dumps(payload) -> str:
    """Canonical JSON text; key order is the insertion order of ``payload``."""
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def solve_payload(sol):
    if sol.solved:
        return {"kappa": _real(sol.kappa), "alpha": _real(sol.alpha), "solved": True,
                "q": _real(sol.q), "r": _real(sol.r), "rs_value": _real(sol.rs_value),
                "residual_q": _real(sol.residual_q), "residual_r": _real(sol.residual_r)}
    return {"kappa": _real(sol.kappa), "alpha": _real(sol.alpha), "solved": False,
            "q": None, "r": None, "rs_value": None, "residual_q": None, "residual_r": None}


def capacity_payload(res):
    return {"kappa": _real(res.kappa), "alpha_c": _real(res.alpha_c),
            "alpha_star": _real(res.alpha_star), "alpha_star_reason": res.alpha_star_reason,
            "bracket_width": _real(res.bracket_width)}


def report_payload(rep):
    d = rep.to_dict()
    d["worst_margin"] = _real(d["worst_margin"])
    d["worst_point"] = [_real(v) for v in d["worst_point"]]
    d["tolerance"] = _real(d["tolerance"])
    return d


def record_payload(rec):
    return {"alpha": _real(rec.alpha), "q": _real(rec.q), "r": _real(rec.r),
            "rs_value": _real(rec.rs_value), "solved": rec.solved,
            "residual_q": _real(rec.residual_q), "residual_r": _real(rec.residual_r)}


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return repr(v)


def sweep_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rec in records:
        row = record_payload(rec)
        w.writerow([_cell(row[k]) for k in CSV_HEADER])
    return buf.getvalue()


def _human(pairs):
    width = max(len(k) for k, _ in pairs)
    return "".join(f"{k:<{width}}  {'-' if v is None else v}\n" for k, v in pairs)


def _nonneg(text):
    v = float(text)
    if not v >= 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite float >= 0, got {text!r}")
    return v


def _positive(text):
    v = float(text)
    if not v > 0 or not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite float > 0, got {text!r}")
    return v


def _int_at_least(lo):
    def parse(text):
        v = int(text)
        if v < lo:
            raise argparse.ArgumentTypeError(f"expected an integer >= {lo}, got {text!r}")
        return v
    return parse


def build_parser():
    p = argparse.ArgumentParser(prog="rscap", description="Replica-symmetric perceptron capacity toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve the saddle point equations at (kappa, alpha)")
    s.add_argument("--kappa", type=_nonneg, required=True)
    s.add_argument("--alpha", type=_positive, required=True)
    s.add_argument("--format", choices=("human", "json"), default="human")
    s.add_argument("--quad-nodes", type=_int_at_least(2), default=None)
    s.add_argument("--rel-tol", type=_positive, default=None)

    c = sub.add_parser("capacity", help="critical capacity alpha_c and the RS zero alpha_star")
    c.add_argument("--kappa", type=_nonneg, required=True)
    c.add_argument("--format", choices=("human", "json"), default="human")

    w = sub.add_parser("sweep", help="solve on an equally spaced alpha grid")
    w.add_argument("--kappa", type=_nonneg, required=True)
    w.add_argument("--alpha-min", type=_positive, required=True)
    w.add_argument("--alpha-max", type=_positive, required=True)
    w.add_argument("--steps", type=_int_at_least(2), required=True)
    w.add_argument("--format", choices=("csv", "json"), default="csv")
    w.add_argument("--out", default=None, help="write to this path instead of stdout")
    w.add_argument("--jobs", type=_int_at_least(1), default=1, help="concurrent workers")

    v = sub.add_parser("verify", help="grid-certify one lemma or all of them")
    v.add_argument("--lemma", required=True, help=f"one of: all, {', '.join(REGISTRY)}")
    v.add_argument("--resolution", type=_int_at_least(100), default=10_000)
    v.add_argument("--format", choices=("human", "json"), default="human")
    return p


def _cmd_solve(args, cfg):
    sol = solve_saddle(args.alpha, args.kappa, cfg)
    if args.format == "json":
        return dumps(solve_payload(sol)) + "\n", EXIT_OK
    if sol.solved:
        pairs = list(solve_payload(sol).items())
    else:
        pairs = [("kappa", sol.kappa), ("alpha", sol.alpha), ("solved", False), ("reason", sol.reason)]
    return _human(pairs), EXIT_OK


def _cmd_capacity(args, cfg):
    res = capacity(args.kappa, cfg)
    if args.format == "json":
        return dumps(capacity_payload(res)) + "\n", EXIT_OK
    return _human(list(capacity_payload(res).items())), EXIT_OK


def _cmd_sweep(args, cfg):
    records = sweep(args.kappa, args.alpha_min, args.alpha_max, args.steps, cfg, workers=args.jobs)
    if args.format == "json":
        text = dumps([record_payload(r) for r in records]) + "\n"
    else:
        text = sweep_csv(records)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        return "", EXIT_OK
    return text, EXIT_OK


def _cmd_verify(args, cfg):
    if args.lemma == "all":
        reports = verify_all(args.resolution, cfg)
    else:
        reports = [verify(args.lemma, args.resolution, cfg)]
    code = EXIT_OK if all(r.passed for r in reports) else EXIT_VIOLATED
    if args.format == "json":
        body = [report_payload(r) for r in reports]
        return dumps(body if args.lemma == "all" else body[0]) + "\n", code
    lines = [f"{'PASS' if r.passed else 'FAIL'}  {r.lemma_id:<24} worst_margin={r.worst_margin!r} "
             f"at {list(r.worst_point)} [{r.condition}]\n" for r in reports]
    lines.append(f"({reports[0].note})\n")
    return "".join(lines), code


COMMANDS = {"solve": _cmd_solve, "capacity": _cmd_capacity, "sweep": _cmd_sweep, "verify": _cmd_verify}


def run(argv=None, environ=None):
    """Parse ``argv`` and execute; returns ``(exit_code, stdout_text, stderr_text)``."""
    parser = build_parser()
    err = io.StringIO()
    try:
        old = sys.stderr
        sys.stderr = err
        try:
            args = parser.parse_args(argv)
        finally:
            sys.stderr = old
    except SystemExit as exc:
        return int(exc.code or 0), "", err.getvalue()
    try:
        cfg = SolverConfig.from_env(environ, quad_nodes=getattr(args, "quad_nodes", None),
                                    rel_tol_r=getattr(args, "rel_tol", None))
        text, code = COMMANDS[args.command](args, cfg)
    except (DomainError, ConfigError) as exc:
        return EXIT_USAGE, "", f"rscap: error: {exc}\n"
    except NumericalResolutionError as exc:
        return EXIT_NUMERICAL, "", f"rscap: numerical resolution error: {exc}\n"
    return code, text, ""


def main(argv=None):
    code, out, err = run(argv)
    if out:
        sys.stdout.write(out)
    if err:
        sys.stderr.write(err)
    return code


if __name__ == "__main__":
    sys.exit(main())
