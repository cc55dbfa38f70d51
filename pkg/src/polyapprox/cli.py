"""Scenario runner: ``polyapprox run | suite | constants``.

A scenario is a JSON document::

    {
      "name": "ball-d3-thm2",
      "operation": "approx-n",
      "seed": 0,
      "body": {"dim": 3, "variant": "ball"},
      "params": {"n": 1000}
    }

``bodies`` (a list) may replace ``body``; the operation then runs once per
body.  Every run yields a report document (JSON) and a flat CSV with the
columns ``quantity,value,lower,upper,pass,stderr,seed``.

Exit codes: 0 when every check passes, 1 when a check fails or an operation
raises, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .approx import ApproxOptions, approximate_eps, approximate_n, approximate_scaled, c1_sweep
from .bodies import Ball, Segment, body_from_dict
from .errors import ParseError, PolyApproxError
from .net import BoundCheck, body_net, boundary_net, verify_cap_bounds, verify_net_cardinality
from .shape import constants, elongation_certificate, g
from .volumes import (
    boundary_area_mc,
    eval_side,
    exact_intrinsic_volumes,
    has_exact_volumes,
    intrinsic_volumes,
    isoperimetric_ratio,
    kubota_estimate,
    side_polynomial,
)

log = logging.getLogger(__name__)

OPERATIONS = ("volumes", "net", "caps", "approx-eps", "approx-n", "approx-scaled", "shape",
              "certificate", "sweep")
CSV_COLUMNS = ("quantity", "value", "lower", "upper", "pass", "stderr", "seed")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


# ----------------------------------------------------------------------------
# Parsing and validation


def _line_of(text, key):
    """1-based line of the first occurrence of ``"key"`` in the raw document."""
    if text is None:
        return None
    pos = text.find(f'"{key}"')
    return text.count("\n", 0, pos) + 1 if pos >= 0 else None


def _require(cond, message, key, text):
    if not cond:
        raise ParseError(message, field=key, line=_line_of(text, key))


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _open_unit(v):
    return _is_real(v) and 0 < v < 1


def _validate_params(op, p, text):
    def need(key, pred, message):
        _require(key in p, f"operation {op!r} needs parameter {key!r}", key, text)
        _require(pred(p[key]), message, key, text)

    def opt(key, pred, message):
        if key in p:
            _require(pred(p[key]), message, key, text)

    opt("samples", lambda v: _is_int(v) and v > 0, "samples must be a positive integer")
    opt("volume_samples", lambda v: _is_int(v) and v > 0,
        "volume_samples must be a positive integer")
    opt("tighten", lambda v: _is_real(v) and v > 0, "tighten must be a positive number")
    if op == "net":
        need("delta", _open_unit, "delta must lie in (0, 1)")
        opt("metric", lambda v: v in ("euclidean", "mixed"), "metric is euclidean or mixed")
        opt("oversample", lambda v: _is_int(v) and v > 0, "oversample must be a positive integer")
    elif op == "caps":
        need("deltas", lambda v: isinstance(v, list) and v and all(_open_unit(x) for x in v),
             "deltas must be a nonempty list of values in (0, 1)")
        opt("trials", lambda v: _is_int(v) and v > 0, "trials must be a positive integer")
    elif op == "approx-eps":
        need("eps", _open_unit, "eps must lie in (0, 1)")
    elif op in ("approx-n", "approx-scaled"):
        need("n", lambda v: _is_int(v) and v > 0, "n must be a positive integer")
        opt("fill_budget", lambda v: isinstance(v, bool), "fill_budget must be a boolean")
    elif op == "sweep":
        need("n_values", lambda v: isinstance(v, list) and v and all(_is_int(x) and x > 0 for x in v),
             "n_values must be a nonempty list of positive integers")
        opt("fill_budget", lambda v: isinstance(v, bool), "fill_budget must be a boolean")
    elif op == "shape":
        need("l_grid", lambda v: isinstance(v, list) and v and all(_is_real(x) and x > 0 for x in v),
             "l_grid must be a nonempty list of positive numbers")
    elif op == "certificate":
        need("i", _is_int, "i must be an integer")
        need("j", _is_int, "j must be an integer")
        _require(("eps" in p) != ("eps_factor" in p),
                 "certificate needs exactly one of eps, eps_factor", "eps", text)
        opt("eps", lambda v: _is_real(v) and v > 0, "eps must be positive")
        opt("eps_factor", lambda v: _is_real(v) and v > 0, "eps_factor must be positive")
    elif op == "volumes":
        opt("expected", lambda v: isinstance(v, list) and all(_is_real(x) for x in v),
            "expected must be a list of numbers")
        opt("rel_tol", lambda v: _is_real(v) and v > 0, "rel_tol must be positive")


def parse_scenario(doc, text=None):
    """Validate a scenario document and build its bodies."""
    _require(isinstance(doc, dict), "scenario must be a JSON object", "name", text)
    _require(isinstance(doc.get("name"), str) and doc["name"], "missing or empty name",
             "name", text)
    _require("seed" in doc, "seed is mandatory", "seed", text)
    _require(_is_int(doc["seed"]) and doc["seed"] >= 0, "seed must be a nonnegative integer",
             "seed", text)
    op = doc.get("operation")
    _require(op in OPERATIONS, f"operation must be one of {', '.join(OPERATIONS)}",
             "operation", text)
    params = doc.get("params", {})
    _require(isinstance(params, dict), "params must be an object", "params", text)
    if "bodies" in doc:
        specs = doc["bodies"]
        _require(isinstance(specs, list) and specs, "bodies must be a nonempty list",
                 "bodies", text)
    else:
        _require("body" in doc, "scenario needs body or bodies", "body", text)
        specs = [doc["body"]]
    bodies = []
    for spec in specs:
        try:
            bodies.append(body_from_dict(spec))
        except ParseError as exc:
            line = exc.line if exc.line is not None else _line_of(text, exc.field or "body")
            raise ParseError(exc.message, field=exc.field, line=line) from None
    _validate_params(op, params, text)
    return {"name": doc["name"], "operation": op, "seed": doc["seed"], "params": params,
            "bodies": bodies, "body_specs": specs}


def load_scenario(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read scenario: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    return parse_scenario(doc, text)


# ----------------------------------------------------------------------------
# Operations.  Each returns ``(results, checks)``.


def _scaled(params, key, default, scale):
    return max(1, int(round(params.get(key, default) * scale)))


def _op_volumes(K, p, seed, scale):
    samples = _scaled(p, "samples", 10**5, scale)
    V = intrinsic_volumes(K, samples, seed)
    res = {"intrinsic_volumes": V.to_dict()}
    checks = []
    d = K.dim
    if p.get("kubota") and has_exact_volumes(K):
        exact = exact_intrinsic_volumes(K)
        tol = p.get("rel_tol", 0.02)
        for k in range(1, d):
            est, err = kubota_estimate(K, k, samples, seed + k)
            res[f"kubota_V{k}"] = {"value": est, "stderr": err, "exact": exact[k]}
            checks.append(BoundCheck(f"kubota_V{k}", est, exact[k] * (1 - tol),
                                     exact[k] * (1 + tol),
                                     exact[k] * (1 - tol) < est < exact[k] * (1 + tol), err))
    if "expected" in p:
        tol = p.get("rel_tol", 0.02)
        for k, want in enumerate(p["expected"]):
            lo, hi = sorted((want * (1 - tol), want * (1 + tol)))
            if want == 0:
                lo, hi = -tol, tol
            checks.append(BoundCheck(f"V{k}", V[k], lo, hi, lo < V[k] < hi, V.stderr[k]))
    if p.get("surface_check"):
        # V_{d-1}(K + B) against half the shell estimate of the area of its boundary
        side = eval_side(side_polynomial(V), 1.0)
        area, err = boundary_area_mc(K, samples=_scaled(p, "area_samples", 10**6, scale),
                                     seed=seed)
        half, half_err = area / 2.0, err / 2.0
        res["side_value"] = side
        res["half_area_mc"] = {"value": half, "stderr": half_err}
        checks.append(BoundCheck("side_value_vs_half_area", side, half - 4 * half_err,
                                 half + 4 * half_err,
                                 abs(side - half) < 4 * half_err, half_err))
    return res, checks


def _op_net(K, p, seed, scale):
    delta = p["delta"]
    if p.get("metric", "euclidean") == "mixed":
        net = body_net(K, delta, p.get("oversample"), seed)
    else:
        net = boundary_net(K, delta, p.get("oversample"), seed)
    res = {"size": len(net), "gamma": net.gamma, "min_pair_distance": net.min_pair_distance,
           "covering_radius": net.covering_radius}
    checks = [
        BoundCheck("packing_min_distance", net.min_pair_distance, delta, None, net.packing_ok),
        BoundCheck("covering_radius", net.covering_radius, None, delta + net.gamma,
                   net.covering_ok),
    ]
    if net.metric_tag == "euclidean":
        samples = _scaled(p, "volume_samples", 10**5, scale)
        checks += verify_net_cardinality(net, K, samples, seed, strict=False).checks
    elif net.cardinality_bound is not None:
        checks.append(BoundCheck("net_cardinality", float(len(net)), None,
                                 net.cardinality_bound, len(net) < net.cardinality_bound))
    return res, checks


def _op_caps(K, p, seed, scale):
    rep = verify_cap_bounds(K, p["deltas"], p.get("trials", 50),
                            _scaled(p, "samples", 10**5, scale), seed, strict=False)
    return {"caps": len(rep.checks)}, rep.checks


def _approx_opts(p, seed, scale):
    return ApproxOptions(seed=seed, fill_budget=p.get("fill_budget", False),
                         volume_samples=_scaled(p, "volume_samples", 10**5, scale),
                         coarse_dirs=_scaled(p, "coarse_dirs", 20000, scale))


def _op_approx_eps(K, p, seed, scale):
    r = approximate_eps(K, p["eps"], _approx_opts(p, seed, scale))
    return r.to_dict(), r.checks


def _op_approx_n(K, p, seed, scale):
    r = approximate_n(K, p["n"], _approx_opts(p, seed, scale))
    return r.to_dict(), r.checks


def _op_approx_scaled(K, p, seed, scale):
    r = approximate_scaled(K, p["n"], _approx_opts(p, seed, scale))
    return r.to_dict(), r.checks


def _op_sweep(K, p, seed, scale):
    rows, results = c1_sweep(K, p["n_values"], _approx_opts(p, seed, scale))
    checks = []
    for row, r in zip(rows, results):
        checks += [replace(c, quantity=f"{c.quantity}[n={row['n']}]") for c in r.checks]
    suffix = [row["c1_suffix_max"] for row in rows]
    checks.append(BoundCheck("suffix_max_nonincreasing",
                             float(max(np.diff(suffix), default=0.0)), None, 1e-12,
                             all(b <= a for a, b in zip(suffix, suffix[1:]))))
    return {"sweep": rows}, checks


def _op_shape(K, p, seed, scale):
    d = K.dim
    V = intrinsic_volumes(K, _scaled(p, "samples", 10**5, scale), seed)
    grid = sorted(p["l_grid"])
    values = [g(V, l) for l in grid]
    res = {"l_grid": grid, "g": values, "intrinsic_volumes": V.to_dict()}
    checks = [BoundCheck(f"g_monotone[l={b}]", gb, None, ga + 1e-9, gb < ga + 1e-9)
              for a, b, ga, gb in zip(grid, grid[1:], values, values[1:])]
    if p.get("sandwich") and d == 3:
        for l, gv in zip(grid, values):
            lo = g(Segment(np.zeros(d), 2.0 * np.eye(d)[0]), l)
            hi = g(Ball(np.zeros(d), 1.0), l)
            checks.append(BoundCheck(f"g_sandwich[l={l}]", gv, lo, hi, lo < gv < hi))
    if p.get("constancy") and d == 2:
        thresh = 2.0 * constants(2).c12bisbis
        for l, gv in zip(grid, values):
            if l >= thresh:
                checks.append(BoundCheck(f"g_constant[l={l}]", gv, 4 * np.pi - 1e-8,
                                         4 * np.pi + 1e-8, abs(gv - 4 * np.pi) < 1e-8))
    return res, checks


def _op_certificate(K, p, seed, scale):
    samples = _scaled(p, "samples", 10**5, scale)
    V = intrinsic_volumes(K, samples, seed)
    i, j = p["i"], p["j"]
    eps = p["eps"] if "eps" in p else p["eps_factor"] * isoperimetric_ratio(V, i, j)
    cert = elongation_certificate(V, eps, i, j)
    res = cert.to_dict()
    checks = []
    if cert.applicable and cert.elongated:
        checks = [
            BoundCheck("g_N", cert.g_value, None, cert.bound, bool(cert.passed)),
            BoundCheck("rho_N", cert.rho_N_normalized, cert.t_eps, None,
                       cert.rho_N_normalized > cert.t_eps),
            BoundCheck("f_t_eps", cert.f_t_eps, None, cert.q_t_eps,
                       cert.f_t_eps <= cert.q_t_eps),
        ]
    return res, checks


DISPATCH = {
    "volumes": _op_volumes,
    "net": _op_net,
    "caps": _op_caps,
    "approx-eps": _op_approx_eps,
    "approx-n": _op_approx_n,
    "approx-scaled": _op_approx_scaled,
    "shape": _op_shape,
    "certificate": _op_certificate,
    "sweep": _op_sweep,
}


# ----------------------------------------------------------------------------
# Reports


def tighten_check(check, factor):
    """Shrink the admissible interval of a check by ``factor`` and re-evaluate it."""
    lo = None if check.lower is None else (check.lower / factor if check.lower > 0
                                           else check.lower * factor)
    hi = None if check.upper is None else (check.upper * factor if check.upper > 0
                                           else check.upper / factor)
    ok = (lo is None or check.value > lo) and (hi is None or check.value < hi)
    return replace(check, lower=lo, upper=hi, passed=bool(check.passed and ok))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def execute(scenario, seed=None, samples_scale=1.0):
    """Run a parsed scenario and return its report document."""
    seed = scenario["seed"] if seed is None else seed
    p = scenario["params"]
    op = scenario["operation"]
    started = time.perf_counter()
    results, rows, error = [], [], None
    try:
        for b, K in enumerate(scenario["bodies"]):
            res, checks = DISPATCH[op](K, p, seed, samples_scale)
            if "tighten" in p:
                checks = [tighten_check(c, p["tighten"]) for c in checks]
            prefix = f"body{b}." if len(scenario["bodies"]) > 1 else ""
            results.append(res)
            for c in checks:
                row = c.to_row()
                row["quantity"] = prefix + row["quantity"]
                row["seed"] = seed
                rows.append(row)
    except PolyApproxError as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
        details = getattr(exc, "details", None) or getattr(exc, "diagnostics", None)
        if details:
            error["details"] = details
    except ValueError as exc:
        error = {"type": "ValueError", "message": str(exc)}
    passed = error is None and all(r["pass"] for r in rows)
    return _jsonable({
        "scenario": {"name": scenario["name"], "operation": op, "seed": seed, "params": p,
                     "bodies": scenario["body_specs"], "samples_scale": samples_scale},
        "results": results,
        "checks": rows,
        "error": error,
        "status": "pass" if passed else ("error" if error else "fail"),
        "timing": {"seconds": time.perf_counter() - started},
        "version": {"polyapprox": __version__, "numpy": np.__version__,
                    "scipy": scipy.__version__},
    })


def write_report(report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = report["scenario"]["name"]
    with open(out / f"{name}.json", "w") as fh:
        json.dump(report, fh, indent=2)
    with open(out / f"{name}.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS, extrasaction="ignore")
        w.writeheader()
        for row in report["checks"]:
            w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in CSV_COLUMNS})
    return out / f"{name}.json"


def run_scenario(path, seed=None, samples_scale=1.0, out_dir=None):
    """Parse, run and (optionally) write one scenario; returns the report."""
    report = execute(load_scenario(path), seed, samples_scale)
    if out_dir is not None:
        write_report(report, out_dir)
    return report


def _suite_item(args):
    path, seed, scale, out_dir = args
    try:
        report = run_scenario(path, seed, scale, out_dir)
        return {"scenario": Path(path).name, "name": report["scenario"]["name"],
                "status": report["status"], "seconds": report["timing"]["seconds"]}
    except ParseError as exc:
        return {"scenario": Path(path).name, "name": None, "status": "parse-error",
                "message": str(exc)}


def run_suite(directory, seed=None, samples_scale=1.0, out_dir=None, jobs=1):
    """Run every ``*.json`` scenario in ``directory``; returns a summary."""
    paths = sorted(Path(directory).glob("*.json"))
    items = [(str(p), seed, samples_scale, out_dir) for p in paths]
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            entries = list(pool.map(_suite_item, items))
    else:
        entries = [_suite_item(it) for it in items]
    counts = {s: sum(e["status"] == s for e in entries)
              for s in ("pass", "fail", "error", "parse-error")}
    summary = {"directory": str(directory), "total": len(entries), **counts,
               "scenarios": entries}
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        with open(Path(out_dir) / "summary.json", "w") as fh:
            json.dump(summary, fh, indent=2)
    return summary


def summary_exit_code(summary):
    if summary["parse-error"]:
        return EXIT_USAGE
    if summary["fail"] or summary["error"]:
        return EXIT_FAIL
    return EXIT_OK


def bundled_scenarios():
    """Directory holding the bundled scenario files."""
    return Path(str(resources.files("polyapprox") / "scenarios"))


# ----------------------------------------------------------------------------
# Command line


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="polyapprox", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    common.add_argument("--samples-scale", type=float, default=1.0,
                        help="multiply every Monte-Carlo sample count")
    common.add_argument("--out", default="polyapprox-reports",
                        help="directory for report JSON and CSV files")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    run = sub.add_parser("run", parents=[common], help="run one scenario file")
    run.add_argument("scenario")
    suite = sub.add_parser("suite", parents=[common], help="run every scenario in a directory")
    suite.add_argument("directory", nargs="?", default=None,
                       help="scenario directory (default: the bundled suite)")
    suite.add_argument("--jobs", type=int, default=1, help="scenarios run in parallel")
    const = sub.add_parser("constants", help="print the constants table for a dimension")
    const.add_argument("--dim", type=int, required=True)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "constants":
        try:
            table = constants(args.dim)
        except ValueError as exc:
            print(f"polyapprox: {exc}", file=sys.stderr)
            return EXIT_USAGE
        print(json.dumps(_jsonable(table.to_dict()), indent=2))
        return EXIT_OK
    if args.samples_scale <= 0:
        print("polyapprox: --samples-scale must be positive", file=sys.stderr)
        return EXIT_USAGE
    if args.command == "run":
        try:
            report = run_scenario(args.scenario, args.seed, args.samples_scale, args.out)
        except ParseError as exc:
            print(f"polyapprox: parse error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        for row in report["checks"]:
            print(f"{'PASS' if row['pass'] else 'FAIL'} {row['quantity']}: {row['value']:.6g} "
                  f"(lower {row['lower']}, upper {row['upper']})")
        if report["error"]:
            print(f"ERROR {report['error']['type']}: {report['error']['message']}")
        print(f"{report['scenario']['name']}: {report['status']}")
        return EXIT_OK if report["status"] == "pass" else EXIT_FAIL
    directory = args.directory or bundled_scenarios()
    if not Path(directory).is_dir():
        print(f"polyapprox: not a directory: {directory}", file=sys.stderr)
        return EXIT_USAGE
    summary = run_suite(directory, args.seed, args.samples_scale, args.out, args.jobs)
    for e in summary["scenarios"]:
        print(f"{e['status']:>11}  {e['scenario']}")
    print(f"{summary['total']} scenarios: {summary['pass']} pass, {summary['fail']} fail, "
          f"{summary['error']} error, {summary['parse-error']} parse error")
    return summary_exit_code(summary)


if __name__ == "__main__":
    sys.exit(main())
