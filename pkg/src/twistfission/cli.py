"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .analysis import analyze
from .assembly import SurfaceData, SurfaceError, assemble
from .diagram import diagram_data, diagram_svg
from .exponents import ExponentError
from .fusion import FusionError
from .presets import PresetError, load_preset, load_preset_data, preset_names
from .stokes import ClassError, IrregularClass
from .verify import sweep

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _read_json(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _load_class(args) -> tuple[IrregularClass, str, dict]:
    """The class named by --preset or read from --input, with a label and descriptor."""
    if bool(args.preset) == bool(args.input):
        raise InputError("give exactly one of --preset or --input")
    if args.preset:
        data = load_preset_data(args.preset)
        return load_preset(args.preset), data["label"], {"preset": args.preset}
    data = _read_json(args.input)
    try:
        Q = IrregularClass.from_json(data)
    except ClassError as exc:
        raise InputError(f"{args.input}: {exc}") from exc
    return Q, Path(args.input).stem, {"class": data}


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def cmd_analyze(args) -> int:
    Q, label, _ = _load_class(args)
    _emit(json.dumps(analyze(Q, label), indent=2), args.out)
    return EXIT_OK


def cmd_diagram(args) -> int:
    Q, _, _ = _load_class(args)
    if args.format == "svg":
        _emit(diagram_svg(Q), args.out)
    else:
        _emit(json.dumps(diagram_data(Q)), args.out)
    return EXIT_OK


def _finish_sweep(desc: dict, args, extra: dict | None = None) -> int:
    report = sweep(desc, seeds=args.seeds, tol=args.tol, workers=args.workers).to_json()
    if extra:
        report.update(extra)
    if args.tol is not None:
        print(f"note: qh1/qh2 tolerance overridden to {args.tol:g}", file=sys.stderr)
    if report["negative_control"]:
        report["note"] = "negative control: one two-form term has its sign flipped, failure is expected"
    _emit(json.dumps(report, indent=2), args.out)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def cmd_verify(args) -> int:
    if args.input and not args.preset:
        data = _read_json(args.input)
        if "boundary" in data:
            SurfaceData.from_json(data)  # validate before sweeping
            return _finish_sweep({"surface": data}, args)
    _, _, desc = _load_class(args)
    if args.corrupt_sign:
        desc["corrupt"] = True
    return _finish_sweep(desc, args)


def cmd_fuse(args) -> int:
    items = [("preset", p) for p in args.preset or []] + [("input", p) for p in args.input or []]
    if not items:
        raise InputError("fuse needs at least one --preset or --input")
    boundary = []
    for kind, value in items:
        if kind == "preset":
            boundary.append(load_preset(value).to_json())
        else:
            boundary.append(IrregularClass.from_json(_read_json(value)).to_json())
    surface = {"genus": args.genus, "boundary": boundary, "twists": [args.twist] * (2 * args.genus)}
    S = SurfaceData.from_json(surface)
    expected = S.total_twist()
    twist_ok = assemble(S).moment_twist().same_as(expected)
    code = _finish_sweep({"surface": surface}, args, {"moment_twist_composed": twist_ok})
    return code if twist_ok else EXIT_FAIL


def cmd_preset(args) -> int:
    if not args.preset:
        _emit(json.dumps({"presets": preset_names()}, indent=2), args.out)
        return EXIT_OK
    data = load_preset_data(args.preset)
    _emit(json.dumps({k: data[k] for k in ("label", "description", "params", "class")}, indent=2), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistfission",
                                     description="Stokes data and twisted quasi-Hamiltonian fission spaces")
    sub = parser.add_subparsers(dest="command", required=True)

    def source(p, multiple=False):
        action = "append" if multiple else "store"
        p.add_argument("--input", action=action, help="irregular class JSON file")
        p.add_argument("--preset", action=action, help="preset name, e.g. 'airy' or 'p1h n=2 k=3'")
        p.add_argument("--out", help="write output here instead of stdout")

    def sweep_flags(p):
        p.add_argument("--seeds", type=int, default=100)
        p.add_argument("--tol", type=float, default=None, help="override the qh1/qh2 threshold (echoed)")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("analyze", help="combinatorial report for a class")
    source(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("diagram", help="Stokes diagram as SVG or JSON polylines")
    source(p)
    p.add_argument("--format", choices=("svg", "json"), default="svg")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("verify", help="axiom sweep on the fission space of a class or a surface")
    source(p)
    sweep_flags(p)
    p.add_argument("--corrupt-sign", action="store_true",
                   help="debug: flip one two-form term (negative control, must fail)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fuse", help="assemble and verify A(Q_1) * ... * A(Q_m) * handles")
    source(p, multiple=True)
    sweep_flags(p)
    p.add_argument("--genus", type=int, default=0)
    p.add_argument("--twist", choices=("id", "outer"), default="id", help="twist of every handle generator")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("preset", help="list presets or print one")
    p.add_argument("--preset")
    p.add_argument("--out")
    p.set_defaults(func=cmd_preset)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seeds", 1) < 1 or getattr(args, "workers", 1) < 1:
        print("error: --seeds and --workers must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, PresetError, ClassError, ExponentError, SurfaceError, FusionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
