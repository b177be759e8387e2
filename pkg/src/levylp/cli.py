"""Command-line experiment runner.

Every subcommand writes ``summary.json`` and CSV tables into its output directory;
wall-clock data goes to ``metadata.json`` only, so the other files are byte-identical
on reruns.  Exit codes: 0 pass, 2 verification failure, 3 numerical failure, 64 usage.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import AccuracyError, InstabilityError, LevyLpError, ResolutionError, TruncationError
from .grid import GridSpec, SpaceTimeField, load_field, save_array, save_field

EXIT_OK, EXIT_FAIL, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64
NUMERICAL = (ResolutionError, TruncationError, AccuracyError, InstabilityError)
KINDS = ("check-symbol", "kernel", "solve", "estimate", "mc-compare", "verify-cf", "maximal", "hormander")
STOCHASTIC = ("mc-compare", "verify-cf")


class UsageError(Exception):
    pass


# -- value parsing ---------------------------------------------------------------------------

def _list(v, cast=float):
    if v is None:
        return None
    if isinstance(v, str):
        return [cast(x) for x in v.split(",") if x.strip()]
    if isinstance(v, (list, tuple)):
        return [cast(x) for x in v]
    return [cast(v)]


def _grid(v) -> GridSpec:
    if isinstance(v, GridSpec):
        return v
    if isinstance(v, (list, tuple)):
        return GridSpec(int(v[0]), float(v[1]), int(v[2]))
    return GridSpec.parse(v)


def _num(x):
    return int(x) if float(x).is_integer() else float(x)


def _points(spec, d: int) -> np.ndarray:
    """'linspace:a,b,n' (first axis, others 0), a JSON list, or a text file of rows."""
    if isinstance(spec, (list, tuple)):
        return np.asarray(spec, dtype=float).reshape(-1, d)
    if spec.startswith("linspace:"):
        a, b, n = spec.split(":", 1)[1].split(",")
        pts = np.zeros((int(n), d))
        pts[:, 0] = np.linspace(float(a), float(b), int(n))
        return pts
    path = Path(spec)
    text = path.read_text()
    if path.suffix == ".json":
        return np.asarray(json.loads(text), dtype=float).reshape(-1, d)
    rows = [r.replace(",", " ").split() for r in text.splitlines() if r.strip() and not r.startswith("#")]
    return np.asarray(rows, dtype=float).reshape(-1, d)


def _pairs(spec) -> list:
    if spec is None or spec == "default":
        return [(s, s + w) for s in (0.0, 0.5, 0.9, 1.3) for w in (0.05, 0.1, 0.4, 0.8, 1.5)]
    pts = _points(spec, 2)
    return [(float(a), float(b)) for a, b in pts]


# -- output -------------------------------------------------------------------------------

def _jsonable(o):
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {type(o)}")


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path: Path, rows: list) -> None:
    keys = []
    for r in rows:
        for k in r:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([_cell(r.get(k, "")) for k in keys])


def write_outputs(out: Path, summary: dict, tables: dict, meta: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True, default=_jsonable) + "\n")
    for name, rows in tables.items():
        write_csv(out / f"{name}.csv", rows)
    (out / "metadata.json").write_text(json.dumps(meta, indent=2, sort_keys=True, default=_jsonable) + "\n")


# -- handlers ---------------------------------------------------------------------------
# Each handler takes a parameter dict and returns (passed, summary, tables).

def h_check_symbol(p, out):
    from .registry import get_symbol
    from .symbols.audit import verify_bernstein_conditions, verify_symbol_conditions

    sym = get_symbol(p["symbol"], int(p.get("d", 1)))
    rep = verify_symbol_conditions(sym)
    bern = verify_bernstein_conditions(sym.principal.phi)
    summary = {"symbol": rep.summary(), "bernstein": bern.summary(), "pass": rep.passed and bern.passed}
    return summary["pass"], summary, {"symbol_audit": rep.rows}


def h_kernel(p, out):
    from .kernels import compute_kernel, compute_scaled_kernels
    from .registry import get_symbol

    g = _grid(p["grid"])
    sym = get_symbol(p["symbol"], g.d)
    psi = sym.principal.phi
    s, t = float(p["s"]), float(p["t"])
    which = p.get("which", "p")
    if which in ("p", "psidp"):
        snap = compute_kernel(sym, psi, s, t, g, "p" if which == "p" else "psi_delta_p")
    elif which in ("q1", "q3"):
        snap = compute_scaled_kernels(sym, psi, s, t, g)[which]
    elif which == "q2":
        snap = compute_scaled_kernels(sym, psi, s, t, g)["q2"][int(p.get("ell", 0))]
    else:
        raise UsageError(f"which must be one of p, psidp, q1, q2, q3 (got {which!r})")
    out.mkdir(parents=True, exist_ok=True)
    # float64 dump of the real part; the imaginary part is a numerical-error diagnostic
    side = {"grid": g.meta(), "s": s, "t": t, "symbol": p["symbol"], "which": which, "imag_ratio": snap.imag_ratio}
    save_array(out / "kernel.bin", np.ascontiguousarray(snap.values.real, dtype=np.float64), side)
    return True, snap.summary(), {"kernel": list(snap.rows())}


def _source(p, g=None):
    src = p.get("source", "bump")
    if src == "bump" or src.startswith("band:"):
        g = g or _grid(p["grid"])
        T, K = float(p.get("T", 1.0)), int(p.get("steps", 64))
        if src == "bump":
            return SpaceTimeField.from_function(g, T, K, lambda t, x: np.exp(-np.sum(x**2, axis=-1)) * (1 + t))
        from .solver import band_limited_source

        return band_limited_source(g, T, K, int(src.split(":")[1]))
    return load_field(src)


def h_solve(p, out):
    from .registry import get_symbol
    from .solver import lp_norm, solve

    f = _source(p)
    sym = get_symbol(p["symbol"], f.grid.d)
    u = solve(sym, f, p.get("scheme", "etd2"))
    out.mkdir(parents=True, exist_ok=True)
    save_field(out / "solution.bin", u, symbol=p["symbol"])
    summary = {
        "grid": f.grid.meta(),
        "T": f.T,
        "K": f.K,
        "scheme": u.meta["scheme"],
        "max_imag": u.meta["max_imag"],
        "u_norm_2": lp_norm(u, 2),
        "f_norm_2": lp_norm(f, 2),
        "u_final_max": float(np.abs(u.values[-1]).max()),
    }
    rows = [{"k": k, "t": tk, "max_abs_u": float(np.abs(u.values[k]).max())} for k, tk in enumerate(u.times)]
    return True, summary, {"levels": rows}


def h_estimate(p, out):
    from .registry import get_symbol
    from .solver import estimate_ratio_harness

    sym = get_symbol(p["symbol"], int(p.get("d", 1)))
    ps = [_num(x) for x in _list(p.get("p", "2,4"))]
    ladder = _list(p.get("ladder", "64,128,256"), int)
    rows, summ = estimate_ratio_harness(
        sym, sym.principal.phi, ps, int(p.get("sources", 20)), ladder, int(p.get("seed", 0))
    )
    passed = all(v["spread"] < 2 for v in summ.values())
    bound = p.get("bound")
    if bound is not None:
        passed &= all(max(v["max_ratio"].values()) <= float(bound) for v in summ.values())
    summary = {"symbol": p["symbol"], "ladder": ladder, "ratios": {k: {"max_ratio": {str(m): r for m, r in v["max_ratio"].items()}, "spread": v["spread"]} for k, v in summ.items()}, "pass": passed}
    return passed, summary, {"ratios": rows}


def h_mc_compare(p, out):
    from .registry import get_process, get_symbol
    from .solver import solve
    from .stochastic import interpolate_periodic, mc_solution

    g = _grid(p.get("grid", "1,8,256"))
    proc = get_process(p["process"], g.d)
    sym = get_symbol(p.get("symbol", p["process"]), g.d)
    T = float(p.get("T", 1.0))
    f = _source(dict(p, T=T), g)
    u = solve(sym, f)
    pts = _points(p.get("points", "linspace:-2,2,16"), g.d)
    mean, se = mc_solution(proc, f, T, pts, int(p.get("paths", 100_000)), int(p["seed"]), int(p.get("workers", 1)))
    ref = interpolate_periodic(u.values[-1], g, pts)
    tol = 3 * se + 1e-3
    rows = []
    for k in range(len(pts)):
        rows.append(
            {
                **{f"x{j}": pts[k, j] for j in range(g.d)},
                "mc": mean[k],
                "stderr": se[k],
                "solver": ref[k],
                "deviation": abs(mean[k] - ref[k]) / tol[k],
            }
        )
    passed = bool(np.all(np.abs(mean - ref) <= tol))
    summary = {
        "process": p["process"],
        "symbol": p.get("symbol", p["process"]),
        "paths": int(p.get("paths", 100_000)),
        "max_deviation": max(r["deviation"] for r in rows),
        "max_abs_error": float(np.max(np.abs(mean - ref))),
        "pass": passed,
    }
    return passed, summary, {"mc_compare": rows}


def h_verify_cf(p, out):
    from .registry import get_process, get_symbol
    from .stochastic import verify_cf

    d = int(p.get("d", 1))
    proc = get_process(p["process"], d)
    sym = get_symbol(p.get("symbol", p["process"]), d)
    xis = _list(p.get("xi", "0.2,0.511,0.822,1.133,1.444,1.756,2.067,2.378,2.689,3.0"))
    xi = np.zeros((len(xis), d))
    xi[:, 0] = xis
    rep = verify_cf(proc, sym, _pairs(p.get("pairs")), xi, int(p.get("n", 100_000)), int(p["seed"]))
    summary = dict(rep.summary(), process=p["process"], symbol=p.get("symbol", p["process"]))
    return rep.passed, summary, {"deviations": rep.rows}


def h_hormander(p, out):
    from .kernels import hormander_sup
    from .registry import get_symbol

    sym = get_symbol(p["symbol"], int(p.get("d", 1)))
    rep = hormander_sup(
        sym, sym.principal.phi, int(p.get("pairs", 50)), int(p.get("seed", 0)), float(p.get("R", 32.0)), int(p.get("M", 2048))
    )
    return rep.passed, dict(rep.summary(), symbol=p["symbol"]), {"hormander": rep.rows}


def h_maximal(p, out):
    from .maximal import build_filtration, get_scale, parse_fields, verify_fs_hl

    lv = _list(p.get("levels", "-4,8"), int)
    count, seed = parse_fields(p.get("fields", "random:100:0"))
    filt = build_filtration(get_scale(p.get("phi", "r")), lv[0], lv[1], int(p.get("d", 1)), p.get("U", "full"))
    rep = verify_fs_hl(filt, count, seed, [_num(x) for x in _list(p.get("p", "2,4"))])
    return rep.passed, rep.summary(), {"fefferman_stein": rep.rows, "hardy_littlewood": rep.hl_rows}


HANDLERS = {
    "check-symbol": h_check_symbol,
    "kernel": h_kernel,
    "solve": h_solve,
    "estimate": h_estimate,
    "mc-compare": h_mc_compare,
    "verify-cf": h_verify_cf,
    "maximal": h_maximal,
    "hormander": h_hormander,
}


def execute(kind: str, params: dict, out: Path, argv=None) -> int:
    """Run one experiment, write its outputs and return the exit code."""
    t0 = time.time()
    meta = {
        "kind": kind,
        "params": {k: v for k, v in params.items()},
        "version": __version__,
        "numpy": np.__version__,
        "started": datetime.now(timezone.utc).isoformat(),
        "argv": argv,
    }
    try:
        passed, summary, tables = HANDLERS[kind](params, out)
    except NUMERICAL as e:
        diag = {"kind": kind, "error": type(e).__name__, "message": str(e)}
        for attr in ("required_M", "suggested_R"):
            if getattr(e, attr, None) is not None:
                diag[attr] = getattr(e, attr)
        meta["elapsed_s"] = time.time() - t0
        write_outputs(out, {"diagnostic": diag, "pass": False}, {}, meta)
        print(f"numerical failure: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LevyLpError, ValueError, KeyError, FileNotFoundError, UsageError) as e:
        raise UsageError(f"{type(e).__name__}: {e}") from e
    meta["elapsed_s"] = time.time() - t0
    summary = dict(summary, kind=kind)
    write_outputs(out, summary, tables, meta)
    required = bool(params.get("required", True))
    status = "pass" if passed else "FAIL"
    print(f"{kind}: {status} -> {out}")
    return EXIT_OK if passed or not required else EXIT_FAIL


# -- config runner ------------------------------------------------------------------------

_list_or_str = {"anyOf": [{"type": "string"}, {"type": "array", "items": {"type": "number"}}, {"type": "number"}]}
_grid_schema = {
    "anyOf": [
        {"type": "string", "pattern": r"^[123],[0-9.eE+-]+,[0-9]+$"},
        {
            "type": "array",
            "prefixItems": [
                {"enum": [1, 2, 3]},
                {"type": "number", "exclusiveMinimum": 0},
                {"enum": [2**k for k in range(4, 17)]},
            ],
            "items": False,
            "minItems": 3,
        },
    ]
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {
        "kind": {"enum": list(KINDS)},
        "out": {"type": "string"},
        "required": {"type": "boolean"},
        "workers": {"type": "integer", "minimum": 1},
        "sweep": {"type": "object", "additionalProperties": {"type": "array", "minItems": 1}},
        "seed": {"type": "integer", "minimum": 0},
        "symbol": {"type": "string"},
        "process": {"type": "string"},
        "d": {"enum": [1, 2, 3]},
        "s": {"type": "number", "minimum": 0},
        "t": {"type": "number", "minimum": 0},
        "T": {"type": "number", "exclusiveMinimum": 0},
        "grid": _grid_schema,
        "which": {"enum": ["p", "psidp", "q1", "q2", "q3"]},
        "ell": {"type": "integer", "minimum": 0},
        "source": {"type": "string"},
        "steps": {"type": "integer", "minimum": 1},
        "scheme": {"enum": ["etd1", "etd2"]},
        "p": _list_or_str,
        "ladder": _list_or_str,
        "sources": {"type": "integer", "minimum": 1},
        "bound": {"type": "number"},
        "paths": {"type": "integer", "minimum": 1},
        "points": {"anyOf": [{"type": "string"}, {"type": "array"}]},
        "pairs": {"anyOf": [{"type": "string"}, {"type": "array"}, {"type": "integer", "minimum": 1}]},
        "n": {"type": "integer", "minimum": 1},
        "xi": _list_or_str,
        "R": {"type": "number", "exclusiveMinimum": 0},
        "M": {"type": "integer", "minimum": 16},
        "phi": {"type": "string"},
        "levels": _list_or_str,
        "fields": {"type": "string", "pattern": r"^random:[0-9]+:[0-9]+$"},
        "U": {"enum": ["full", "half"]},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"enum": list(STOCHASTIC)}}}, "then": {"required": ["seed", "process"]}},
        {"if": {"properties": {"kind": {"const": "kernel"}}}, "then": {"required": ["symbol", "s", "t", "grid"]}},
        {"if": {"properties": {"kind": {"enum": ["check-symbol", "solve", "estimate", "hormander"]}}}, "then": {"required": ["symbol"]}},
    ],
}


def validate_config(cfg) -> None:
    import jsonschema

    v = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(v.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/".join(str(x) for x in e.absolute_path) or "<root>"
        raise UsageError(f"config invalid at {path}: {e.message}")


def run_config(cfg: dict, argv=None) -> int:
    validate_config(cfg)
    kind = cfg["kind"]
    out = Path(cfg.get("out", f"results/{kind}"))
    base = {k: v for k, v in cfg.items() if k not in ("kind", "out", "sweep", "workers")}
    sweep = cfg.get("sweep")
    if not sweep:
        return execute(kind, base, out, argv)
    keys = sorted(sweep)
    points = [dict(zip(keys, combo)) for combo in itertools.product(*(sweep[k] for k in keys))]
    for pt in points:
        validate_config(dict(cfg, **pt, sweep={}))

    def one(i):
        return execute(kind, dict(base, **points[i]), out / f"point-{i:03d}", argv)

    with ThreadPoolExecutor(int(cfg.get("workers", 1))) as ex:
        codes = list(ex.map(one, range(len(points))))
    index = [dict(points[i], point=i, exit=codes[i]) for i in range(len(points))]
    out.mkdir(parents=True, exist_ok=True)
    (out / "sweep.json").write_text(json.dumps(index, indent=2, sort_keys=True, default=_jsonable) + "\n")
    return max(codes, key=lambda c: {EXIT_OK: 0, EXIT_FAIL: 1, EXIT_NUMERIC: 2}.get(c, 3))


# -- argparse -----------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="levylp", description="Numerical experiments for Levy-type parabolic equations.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="kind", required=True, parser_class=_Parser)

    def common(sp, stochastic=False):
        sp.add_argument("--out", help="output directory (default results/<command>)")
        sp.add_argument("--seed", type=int, required=stochastic, default=None if stochastic else 0)
        sp.add_argument("--not-required", dest="required", action="store_false", help="report failures with exit 0")

    sp = sub.add_parser("check-symbol", help="audit a registered symbol")
    sp.add_argument("--symbol", required=True)
    sp.add_argument("--d", type=int, default=1)
    common(sp)

    sp = sub.add_parser("kernel", help="compute a transition or scaled kernel")
    sp.add_argument("--symbol", required=True)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--grid", required=True, help="d,L,M")
    sp.add_argument("--which", default="p", choices=["p", "psidp", "q1", "q2", "q3"])
    sp.add_argument("--ell", type=int, default=0)
    common(sp)

    sp = sub.add_parser("solve", help="solve u_t = Psi u + f, u(0) = 0")
    sp.add_argument("--symbol", required=True)
    sp.add_argument("--source", default="bump", help="field file, 'bump' or 'band:<seed>'")
    sp.add_argument("--grid", default="1,8,256")
    sp.add_argument("--steps", type=int, default=64)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--scheme", default="etd2", choices=["etd1", "etd2"])
    common(sp)

    sp = sub.add_parser("estimate", help="ratio harness ||phi(Delta) u||_p / ||f||_p")
    sp.add_argument("--symbol", required=True)
    sp.add_argument("--p", default="2,4")
    sp.add_argument("--ladder", default="64,128,256")
    sp.add_argument("--sources", type=int, default=20)
    sp.add_argument("--bound", type=float)
    common(sp)

    sp = sub.add_parser("mc-compare", help="Monte Carlo solution formula against the solver")
    sp.add_argument("--process", required=True)
    sp.add_argument("--symbol")
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--paths", type=int, default=100_000)
    sp.add_argument("--points", default="linspace:-2,2,16")
    sp.add_argument("--grid", default="1,8,256")
    sp.add_argument("--steps", type=int, default=64)
    sp.add_argument("--workers", type=int, default=1)
    common(sp, stochastic=True)

    sp = sub.add_parser("verify-cf", help="empirical against exact characteristic functions")
    sp.add_argument("--process", required=True)
    sp.add_argument("--symbol")
    sp.add_argument("--pairs", default="default", help="file of s,t rows or 'default'")
    sp.add_argument("--n", type=int, default=100_000)
    sp.add_argument("--xi")
    sp.add_argument("--d", type=int, default=1)
    common(sp, stochastic=True)

    sp = sub.add_parser("hormander", help="sup of the Hormander integral under truncation doubling")
    sp.add_argument("--symbol", required=True)
    sp.add_argument("--pairs", type=int, default=50)
    sp.add_argument("--R", type=float, default=32.0)
    sp.add_argument("--M", type=int, default=2048)
    common(sp)

    sp = sub.add_parser("maximal", help="filtration, Fefferman-Stein and Hardy-Littlewood checks")
    sp.add_argument("--phi", default="r")
    sp.add_argument("--levels", default="-4,8")
    sp.add_argument("--p", default="2,4")
    sp.add_argument("--fields", default="random:100:0")
    sp.add_argument("--U", default="full", choices=["full", "half"])
    sp.add_argument("--d", type=int, default=1)
    common(sp)

    sp = sub.add_parser("run", help="run a JSON experiment config")
    sp.add_argument("config")
    return ap


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE
    try:
        if args.kind == "run":
            try:
                cfg = json.loads(Path(args.config).read_text())
            except (OSError, json.JSONDecodeError) as e:
                raise UsageError(f"cannot read config: {e}") from e
            return run_config(cfg, argv)
        params = {k: v for k, v in vars(args).items() if v is not None and k not in ("kind", "out")}
        out = Path(args.out or f"results/{args.kind}")
        return execute(args.kind, params, out, argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
