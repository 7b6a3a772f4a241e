"""Command-line front door: ``moyalkit {wigner,star,evolve,verify}``.

Exit codes: 0 ok, 1 verification failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import jsonschema

from . import __version__
from . import io as mio
from . import symcalc as sc
from .dynamics import (EvolutionConfig, HamiltonianSpec, classical_liouville_evolve, moyal_evolve,
                       relative_l2, schrodinger_evolve)
from .phasespace import GridSpec, marginals, negativity, wigner
from .states import DescriptorError, state_factory

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
ENGINES = ("moyal", "schrodinger", "classical")


class UsageError(Exception):
    """Bad flags, config or input; maps to exit code 2."""


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------

_COEFF = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"}]}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["state", "hamiltonian", "grid", "evolution", "output"],
    "properties": {
        "state": {"type": "string", "minLength": 1},
        "engine": {"enum": list(ENGINES) + ["all"]},
        "grid": {
            "type": "object", "additionalProperties": False, "required": ["n", "L"],
            "properties": {"n": {"type": "integer", "minimum": 16},
                           "L": {"type": "number", "exclusiveMinimum": 0},
                           "hbar": {"type": "number", "exclusiveMinimum": 0}},
        },
        "hamiltonian": {
            "type": "object", "additionalProperties": False,
            "properties": {"mass": {"type": "number", "exclusiveMinimum": 0},
                           "potential": {"type": "array", "items": _COEFF, "maxItems": 9},
                           "potential_table": {"type": "string"}},
            "oneOf": [{"required": ["potential"]}, {"required": ["potential_table"]}],
        },
        "evolution": {
            "type": "object", "additionalProperties": False, "required": ["dt"],
            "properties": {"dt": {"type": "number", "exclusiveMinimum": 0},
                           "steps": {"type": "integer", "minimum": 1},
                           "t_final": {"type": "number", "exclusiveMinimum": 0},
                           "scheme": {"enum": ["split-step", "rk4-series"]},
                           "record_every": {"type": "integer", "minimum": 0}},
            "oneOf": [{"required": ["steps"]}, {"required": ["t_final"]}],
        },
        "output": {"type": "string", "minLength": 1},
    },
}


def load_config(path):
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config is not valid JSON: {exc}") from None
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"config invalid at {where}: {exc.message}") from None
    return cfg, path.parent


def build_run(cfg, base: Path):
    g = cfg["grid"]
    grid = GridSpec(g["n"], float(g["L"]), float(g.get("hbar", 1.0)))
    h = cfg["hamiltonian"]
    mass = float(h.get("mass", 1.0))
    if "potential" in h:
        H = HamiltonianSpec.polynomial([Fraction(str(c).replace(" ", "")) for c in h["potential"]], mass)
    else:
        table = (base / h["potential_table"])
        if not table.exists():
            raise UsageError(f"potential table not found: {table}")
        H = HamiltonianSpec(mass, mio.read_table(table))
        if H.potential.shape != (grid.n,):
            raise UsageError(f"potential table has {H.potential.shape[0]} rows, grid has n={grid.n}")
    e = cfg["evolution"]
    kw = {"scheme": e.get("scheme", "split-step"), "record_every": e.get("record_every", 0)}
    if "steps" in e:
        evo = EvolutionConfig(float(e["dt"]), e["steps"], **kw)
    else:
        evo = EvolutionConfig.for_time(float(e["t_final"]), float(e["dt"]), **kw)
    psi = state_factory(cfg["state"], grid)
    return grid, H, evo, psi


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def parse_grid(text: str, hbar: float) -> GridSpec:
    vals = {}
    for part in text.split(","):
        key, sep, val = part.partition("=")
        if not sep or key.strip() not in ("n", "L"):
            raise UsageError(f"--grid expects n=<int>,L=<float>, got {text!r}")
        vals[key.strip()] = val.strip()
    try:
        n = int(vals.get("n", 256))
        length = float(vals.get("L", 20.0))
    except ValueError:
        raise UsageError(f"--grid expects n=<int>,L=<float>, got {text!r}") from None
    return GridSpec(n, length, hbar)


def cmd_wigner(args) -> int:
    grid = parse_grid(args.grid, args.hbar)
    psi = state_factory(args.state, grid)
    F = wigner(psi)
    out = Path(args.out)
    summary = {"mass": F.mass().real}
    if args.negativity:
        vmin, at, neg_mass = negativity(F)
        summary["negativity"] = {"min": vmin, "at": list(at), "negative_mass": neg_mass}
    meta = mio.sidecar(grid, state=args.state, extra={"kind": "wigner", "summary": summary})
    mio.write_with_sidecar(out, mio.field_csv(F), meta)
    if args.marginals:
        mx, mp = marginals(F)
        mpath = out.with_name(out.stem + "_marginals.csv")
        mio.write_with_sidecar(mpath, mio.columns_csv(["x", "position_density", "p", "momentum_density"],
                                                      [grid.x, mx, grid.p, mp]),
                               mio.sidecar(grid, state=args.state, extra={"kind": "marginals"}))
    print(mio.to_json(summary), end="")
    return EXIT_OK


def _fix_hbar(a: sc.PolySymbol, hbar: Fraction) -> sc.PolySymbol:
    out = sc.PolySymbol()
    for (kx, kp, kh), c in a:
        out = out + sc.PolySymbol({(kx, kp, 0): c}) * sc.PolySymbol.const(hbar ** kh)
    return out


def cmd_star(args) -> int:
    value = sc.evaluate(args.expr)
    if args.truncate is not None:
        value = sc.truncate_order(value, args.truncate)
    if args.hbar is not None:
        value = _fix_hbar(value, Fraction(repr(args.hbar)))
    print(sc.format_symbol(value))
    return EXIT_OK


def _run_engine(name, psi, F0, H, evo):
    if name == "schrodinger":
        tr = schrodinger_evolve(psi, H, evo)
        return tr, [wigner(w) for w in tr.frames]
    if name == "moyal":
        tr = moyal_evolve(F0, H, evo)
    else:
        tr = classical_liouville_evolve(F0, H, evo)
    return tr, tr.frames


def cmd_evolve(args) -> int:
    cfg, base = load_config(args.config)
    engine = args.engine or cfg.get("engine", "moyal")
    grid, H, evo, psi = build_run(cfg, base)
    out = Path(args.out or (base / cfg["output"]))
    F0 = wigner(psi)
    names = ENGINES if engine == "all" else (engine,)
    fields, files = {}, []
    for name in names:
        tr, frames = _run_engine(name, psi, F0, H, evo)
        fields[name] = frames
        for k, F in enumerate(frames):
            meta = mio.sidecar(grid, state=cfg["state"], time=F.time, config=cfg,
                               extra={"engine": name, "frame": k, "hamiltonian": H.describe()})
            path = out / name / f"frame_{k:04d}.csv"
            mio.write_with_sidecar(path, mio.field_csv(F), meta)
            files.append(str(path.relative_to(out)))
        cols = [k for k in sorted(tr.log) if len(tr.log[k]) == len(tr.times)]
        mio.atomic_write_text(out / name / "log.csv",
                              mio.columns_csv(["time"] + cols, [tr.times] + [tr.log[c] for c in cols]))
    summary = {"engine": engine, "frames": len(next(iter(fields.values()))),
               "t_final": evo.total_time}
    if len(names) > 1:
        pairs = [("moyal", "schrodinger"), ("moyal", "classical")]
        times = [F.time for F in fields["moyal"]]
        cols = {f"{a}_vs_{b}": [relative_l2(x, y) for x, y in zip(fields[a], fields[b])] for a, b in pairs}
        mio.atomic_write_text(out / "divergence.csv",
                              mio.columns_csv(["time"] + list(cols), [times] + list(cols.values())))
        summary["divergence_max"] = {k: max(v) for k, v in cols.items()}
        summary["divergence_final"] = {k: v[-1] for k, v in cols.items()}
        files.append("divergence.csv")
    manifest = mio.sidecar(grid, state=cfg["state"], config=cfg,
                           extra={"kind": "evolve", "files": files, "summary": summary,
                                  "hamiltonian": H.describe()})
    mio.atomic_write_text(out / "manifest.json", mio.to_json(manifest))
    print(mio.to_json(summary), end="")
    return EXIT_OK


def cmd_verify(args) -> int:
    from . import verify

    def progress(r):
        mark = "PASS" if r.ok else "FAIL"
        tag = f"[{r.criterion}] " if r.criterion else ""
        print(f"{mark} {r.suite}/{r.name} {tag}value={r.value} tol={r.tolerance} ({r.seconds:.1f}s)",
              file=sys.stderr, flush=True)

    try:
        report = verify.run(args.suite, args.only, progress=progress, jobs=args.jobs)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if report["count"] == 0:
        raise UsageError(f"no checks match --only {args.only!r}")
    text = mio.to_json(report)
    if args.report:
        mio.atomic_write_text(args.report, text)
    else:
        print(text, end="")
    print(f"{'PASSED' if report['passed'] else 'FAILED'}: {report['count'] - len(report['failures'])}"
          f"/{report['count']} checks in {report['seconds']:.1f}s", file=sys.stderr)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="moyalkit", description="Phase-space quantum mechanics toolkit.")
    ap.add_argument("--version", action="version", version=f"moyalkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    w = sub.add_parser("wigner", help="Wigner field of a state, as CSV")
    w.add_argument("--state", required=True, help='descriptor, e.g. "ho(n=1)"')
    w.add_argument("--grid", default="n=256,L=20", help="n=<int>,L=<float>")
    w.add_argument("--hbar", type=float, default=1.0)
    w.add_argument("--out", required=True, help="CSV path; a .json sidecar is written alongside")
    w.add_argument("--marginals", action="store_true", help="also write <out>_marginals.csv")
    w.add_argument("--negativity", action="store_true", help="report the minimum and negative mass")
    w.set_defaults(func=cmd_wigner)

    s = sub.add_parser("star", help="evaluate a symbol expression exactly")
    s.add_argument("--expr", required=True)
    hb = s.add_mutually_exclusive_group()
    hb.add_argument("--hbar-symbolic", action="store_true", help="keep hbar as a symbol (default)")
    hb.add_argument("--hbar", type=float, help="substitute a numeric hbar (exact rational of its repr)")
    s.add_argument("--truncate", type=int, help="drop terms above this power of hbar")
    s.set_defaults(func=cmd_star)

    e = sub.add_parser("evolve", help="run an evolution from a JSON config")
    e.add_argument("--config", required=True)
    e.add_argument("--engine", choices=list(ENGINES) + ["all"])
    e.add_argument("--out", help="output directory (overrides the config)")
    e.set_defaults(func=cmd_evolve)

    v = sub.add_parser("verify", help="run the invariant suites")
    v.add_argument("--suite", default="all", choices=["algebra", "transform", "dynamics", "all"])
    v.add_argument("--only", help="run checks whose name contains this substring")
    v.add_argument("--report", help="write the JSON report here instead of stdout")
    v.add_argument("--jobs", type=int, default=1, help="run suites in this many processes")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DescriptorError, sc.ParseError, ValueError, ArithmeticError, OSError) as exc:
        print(f"moyalkit {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
