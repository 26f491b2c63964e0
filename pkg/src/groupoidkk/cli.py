"""Command line front end.

Every verb is a thin adapter: it parses inputs, calls one library routine
and serializes the result.  Reports are deterministic for a fixed input and
seed; floats are written with 17 significant digits.

Exit status: 0 success, 1 domain error, 2 IO or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__, gpd_format
from .convolution import algebra_image, fiber_dimension
from .groupoid import GroupoidError, cyclic_groupoid, orbits, pair_groupoid, space_groupoid, validate
from .hilbert import ModuleError
from .index_lab import GridError, NonEllipticSymbolError, RefinementNeeded, verify_index_theorem
from .index_lab.experiments import (CSV_COLUMNS, ExperimentConfigError, build_symbol,
                                    parse_symbol_shorthand, run_experiment)
from .kasparov import (KasparovError, KasparovModule, kk_to_k0, ladder_module, morita_elements, pairing,
                       product_right, validate_module)
from .wedderburn import DecompositionError, NotAHomomorphismError, decompose, k0

VERBS = ("validate", "orbits", "algebra", "decompose", "k0", "kk", "index", "verify-as")
DEFAULTS = {"seed": 0, "tol": 1e-8, "format": "json", "out": None}
INDEX_DEFAULTS = {"experiment": "annihilator", "L": 8.0, "N": 512, "symbol": "winding:1",
                  "t_samples": [1.0, 0.5, 0.1]}
VERIFY_DEFAULTS = {"symbol": "winding:1", "N": 128}

DOMAIN_ERRORS = (GroupoidError, ModuleError, KasparovError, DecompositionError, NotAHomomorphismError,
                 GridError, NonEllipticSymbolError, RefinementNeeded, ExperimentConfigError)


class InputError(Exception):
    """Unreadable or malformed input; maps to exit status 2."""


# ---------------------------------------------------------------------------
# serialization


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = format(x, ".17g")
    return text if any(c in text for c in ".en") else text + ".0"


def encode(obj) -> str:
    """JSON text with integers as integers and floats at 17 significant digits."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, np.ndarray):
        return encode(obj.tolist())
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv_cell(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return _num(float(v)).strip('"')
    return str(v)


def to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# inputs


def load_groupoid(source: str):
    """A GPD file path or a constructor ``pair:n``, ``cyclic:m``, ``space:n``."""
    kind, sep, arg = source.partition(":")
    builders = {"pair": pair_groupoid, "cyclic": cyclic_groupoid, "space": space_groupoid}
    if sep and kind in builders and not Path(source).exists():
        try:
            n = int(arg)
        except ValueError as exc:
            raise InputError(f"bad constructor argument in {source!r}") from exc
        return builders[kind](n)
    try:
        return gpd_format.load(source)
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc}") from exc
    except gpd_format.GPDFormatError as exc:
        raise InputError(f"{source}: {exc}") from exc


def load_kasparov(source: str) -> KasparovModule:
    """A JSON file, or ``trivial:p,q``, ``morita:n`` (the product of the Morita pair) or
    ``oscillator:L,N`` (the discretized ladder module)."""
    kind, sep, arg = source.partition(":")
    if sep and not Path(source).exists():
        try:
            nums = [float(a) for a in arg.split(",")]
        except ValueError as exc:
            raise InputError(f"bad module argument in {source!r}") from exc
        if kind == "trivial" and len(nums) == 2:
            return KasparovModule.trivial(int(nums[0]), int(nums[1]))
        if kind == "morita" and len(nums) == 1:
            return product_right(*morita_elements(int(nums[0])))
        if kind == "oscillator" and len(nums) == 2:
            from .index_lab import Grid1D
            return ladder_module(Grid1D(nums[0], int(nums[1])))
        raise InputError(f"unknown module constructor {source!r}")
    try:
        return KasparovModule.from_json(Path(source).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {source}: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{source}: malformed module file ({exc})") from exc


def load_config(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError("config file must hold a JSON object")
    return data


def resolve(args, config, defaults):
    """Flags over config over defaults, with the source of every value."""
    values, sources = {}, {}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            values[key], sources[key] = flag, "flag"
        elif key in config:
            values[key], sources[key] = config[key], "config"
        else:
            values[key], sources[key] = default, "default"
    return values, sources


# ---------------------------------------------------------------------------
# verbs


def _decomposition(g, settings):
    return decompose(algebra_image(g), seed=int(settings["seed"]), adjoint_tol=float(settings["tol"]))


def cmd_validate(args, settings):
    g = load_groupoid(args.input)
    found = validate(g)
    return {"violations": [v.as_dict() for v in found], "valid": not found}, None, (1 if found else 0)


def cmd_orbits(args, settings):
    g = load_groupoid(args.input)
    dec = orbits(g)
    return {
        "orbits": [list(o) for o in dec.orbits],
        "isotropy_orders": [dec.isotropy[o[0]].order for o in dec.orbits],
    }, None, 0


def cmd_algebra(args, settings):
    g = load_groupoid(args.input)
    dec = orbits(g)
    return {
        "n_units": g.n_units,
        "n_arrows": g.n_arrows,
        "dimension": g.n_arrows,
        "fiber_dimension": fiber_dimension(g),
        "fiber_sizes": [len(g.source_fiber(x)) for x in range(g.n_units)],
        "orbit_count": len(dec),
    }, None, 0


def cmd_decompose(args, settings):
    dec = _decomposition(load_groupoid(args.input), settings)
    rep = dec.report()
    rep["blocks"] = [[n, m] for n, m in dec.blocks]
    return rep, None, 0


def cmd_k0(args, settings):
    return k0(_decomposition(load_groupoid(args.input), settings)).report(), None, 0


def cmd_kk(args, settings):
    m = load_kasparov(args.input)
    report = {
        "algebra": list(m.algebra.blocks),
        "coefficients": list(m.coefficients.blocks),
        "violations": [v.as_dict() for v in validate_module(m, tol=float(settings["tol"]))],
    }
    if m.algebra.blocks == (1,) and m.coefficients.blocks == (1,):
        report["pairing"] = pairing(m, tol=float(settings["tol"])).as_dict()
    elif m.algebra.blocks == (1,):
        report["k0_class"] = kk_to_k0(m, tol=float(settings["tol"])).as_list()
    return report, None, (1 if report["violations"] else 0)


def cmd_index(args, settings):
    config = {
        "experiment": settings["experiment"],
        "grid": {"L": float(settings["L"]), "N": int(settings["N"])},
        "symbol": parse_symbol_shorthand(settings["symbol"]),
        "t_samples": [float(t) for t in settings["t_samples"]],
        "seed": int(settings["seed"]),
    }
    res = run_experiment(config)
    return {"rows": res.rows, "summary": res.summary}, res.rows, 0


def cmd_verify_as(args, settings):
    symbol = build_symbol(parse_symbol_shorthand(settings["symbol"]), seed=int(settings["seed"]))
    rep = verify_index_theorem(symbol, int(settings["N"]))
    row = {"experiment": "index_theorem", "N": int(settings["N"]), "L": None, "t": 1.0,
           "index": rep.analytical, "gap": rep.gap_ratio, "runtime_ms": None}
    return rep.as_dict(), [row], (0 if rep.equal else 1)


COMMANDS = {"validate": cmd_validate, "orbits": cmd_orbits, "algebra": cmd_algebra,
            "decompose": cmd_decompose, "k0": cmd_k0, "kk": cmd_kk, "index": cmd_index,
            "verify-as": cmd_verify_as}


# ---------------------------------------------------------------------------
# driver


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default 0)")
    common.add_argument("--tol", type=float, default=None, help="numerical tolerance (default 1e-8)")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default=None, help="report format")
    common.add_argument("--config", default=None, help="JSON file with default settings")

    p = argparse.ArgumentParser(prog="groupoidkk", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"groupoidkk {__version__}")
    sub = p.add_subparsers(dest="verb", required=True, metavar="verb")
    for verb in ("validate", "orbits", "algebra", "decompose", "k0"):
        s = sub.add_parser(verb, parents=[common], help=f"{verb} a groupoid")
        s.add_argument("input", help="GPD file or constructor pair:n, cyclic:m, space:n")
    s = sub.add_parser("kk", parents=[common], help="validate and pair a Kasparov module")
    s.add_argument("input", help="module JSON file or trivial:p,q, morita:n, oscillator:L,N")
    s = sub.add_parser("index", parents=[common], help="run a numerical index experiment")
    s.add_argument("--experiment", default=None)
    s.add_argument("--L", type=float, default=None)
    s.add_argument("--N", type=int, default=None)
    s.add_argument("--symbol", default=None, help="winding:k, random:k or affine:c")
    s.add_argument("--t-samples", dest="t_samples", type=float, nargs="+", default=None)
    s = sub.add_parser("verify-as", parents=[common], help="compare analytical and topological index")
    s.add_argument("--symbol", default=None, help="winding:k, random:k or affine:c")
    s.add_argument("--N", type=int, default=None, help="Fourier cutoff")
    return p


def _witness(exc):
    for attr in ("witness", "max_defect", "line"):
        if getattr(exc, attr, None) is not None:
            w = getattr(exc, attr)
            return w if isinstance(w, (int, float, str, list, dict)) else repr(w)
    return None


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    defaults = dict(DEFAULTS)
    if args.verb == "index":
        defaults.update(INDEX_DEFAULTS)
    elif args.verb == "verify-as":
        defaults.update(VERIFY_DEFAULTS)
    header = {"tool": "groupoidkk", "version": __version__, "verb": args.verb,
              "input": getattr(args, "input", None)}
    try:
        settings, sources = resolve(args, load_config(args.config), defaults)
        header["settings"] = settings
        header["sources"] = sources
        header["precedence"] = "flag > config > default"
        body, rows, status = COMMANDS[args.verb](args, settings)
        report = {"header": header, "result": body}
    except InputError as exc:
        print(f"groupoidkk: {exc}", file=sys.stderr)
        return 2
    except DOMAIN_ERRORS as exc:
        header.setdefault("settings", {})
        report = {"header": header,
                  "error": {"type": type(exc).__name__, "message": str(exc), "witness": _witness(exc)}}
        rows, status = None, 1
        settings = header["settings"] or DEFAULTS
    fmt = settings.get("format", "json")
    if fmt == "csv":
        if rows is None:
            rows = [{"key": k, "value": encode(v)} for k, v in report.get("result", report).items()]
            text = to_csv(rows, ("key", "value"))
        else:
            text = to_csv(rows, CSV_COLUMNS)
    else:
        text = encode(report) + "\n"
    out = settings.get("out")
    if out:
        try:
            Path(out).write_text(text)
        except OSError as exc:
            print(f"groupoidkk: cannot write {out}: {exc}", file=sys.stderr)
            return 2
    else:
        stdout.write(text)
    return status


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
