"""``o2sim`` command-line front end.

Exit codes: 0 success, 2 usage, 3 constants config, 4 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .angular_momentum import make_grid
from .dynamics import ADIABATIC, MODES, angular_distribution, centrifuge_packet, evolve, project_image
from .molecule import ConfigError, load_constants, manifold_spectrum
from .recipes import FIGURES, reproduce
from .scan import (
    SCAN_COLUMNS,
    ScanError,
    ScanSpec,
    format_csv,
    format_value,
    parse_values,
    run_scan,
    to_picoseconds,
)

EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_IO = 4


class UsageError(Exception):
    pass


def _grid(text: str) -> tuple[int, int]:
    try:
        r, c = text.lower().split("x")
        grid = (int(r), int(c))
        make_grid(*grid)
        return grid
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 256x512, got {text!r}") from None


def _image_arg(text: str) -> tuple[str, str]:
    axis, sep, path = text.partition(":")
    if not sep or axis not in ("x", "y", "z") or not path:
        raise argparse.ArgumentTypeError(f"--image expects AXIS:PATH with AXIS in x,y,z, got {text!r}")
    return axis, path


def _single(text: str, kind: str = "float") -> float:
    values = parse_values(text, kind)
    if len(values) != 1:
        raise ScanError(f"expected a single value, got {text!r}")
    return float(values[0])


def _ints(text: str) -> list[int]:
    values = parse_values(text)
    if any(v != v.to_integral_value() for v in values):
        raise ScanError(f"expected integers, got {text!r}")
    return [int(v) for v in values]


def write_pgm(path: str | Path, image: np.ndarray) -> None:
    """8-bit binary PGM, gray level linear from 0 to the image maximum."""
    image = np.asarray(image, dtype=float)
    top = image.max()
    scaled = np.zeros(image.shape) if top <= 0 else image / top
    data = np.round(np.clip(scaled, 0.0, 1.0) * 255).astype(np.uint8)
    h, w = data.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(data.tobytes())


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def cmd_levels(args) -> None:
    constants = load_constants(args.constants)
    n = int(_single(args.n))
    if n < 1:
        raise UsageError("--n must be >= 1")
    spectrum = manifold_spectrum(n, _single(args.b_field), constants)
    lines = ["n,J_label,m_j,energy_ghz"]
    lines += [f"{n},{j},{m},{format_value(e)}" for j, m, e in spectrum.levels()]
    _emit("\n".join(lines) + "\n", args.out)


def cmd_distribution(args) -> None:
    constants = load_constants(args.constants)
    n = int(_single(args.n))
    if n < 1:
        raise UsageError("--n must be >= 1")
    t_ps = to_picoseconds([parse_values(args.time)[0]])[0]
    grid = make_grid(*args.grid)
    spectrum = manifold_spectrum(n, _single(args.b_field), constants)
    packet = evolve(centrifuge_packet(n), t_ps / 1000.0, spectrum, args.mode)
    try:
        field = angular_distribution(packet, grid)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    theta = grid.theta_nodes
    phi = grid.phi_nodes
    lines = ["theta,phi,rho"]
    for i, th in enumerate(theta):
        ths = format_value(float(th))
        lines += [f"{ths},{format_value(float(ph))},{format_value(float(v))}"
                  for ph, v in zip(phi, field.values[i])]
    _emit("\n".join(lines) + "\n", args.out)
    for axis, path in args.image or ():
        write_pgm(path, project_image(field, axis))


def _scan_spec(args, b_text: str, theta_text: str) -> ScanSpec:
    return ScanSpec(
        n_list=tuple(_ints(args.n)),
        b_list=tuple(float(v) for v in parse_values(b_text)),
        t_ps_list=tuple(to_picoseconds(parse_values(args.time))),
        theta_p_list=tuple(float(v) for v in parse_values(theta_text, "angle")),
        pressure=_single(args.pressure),
        mode=args.mode,
        grid=args.grid,
        outputs=tuple(args.columns.split(",")) if args.columns else SCAN_COLUMNS,
        constants=load_constants(args.constants),
    )


def cmd_scan(args) -> None:
    spec = _scan_spec(args, args.b_field, args.theta_p)
    rows = run_scan(spec, args.workers)
    _emit(format_csv(rows, spec.columns), args.out)


def cmd_raman(args) -> None:
    spec = _scan_spec(args, args.b_field, "0")
    rows = run_scan(spec, args.workers)
    _emit(format_csv(rows, ("n", "b_tesla", "t_ns", "w_plus", "w_minus")), args.out)


def cmd_reproduce(args) -> None:
    if args.figure not in FIGURES:
        raise UsageError(f"unknown figure {args.figure!r}; valid ids: {', '.join(FIGURES)}")
    constants = load_constants(args.constants)
    rep = reproduce(args.figure, constants, args.mode, args.workers)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    for name, text in rep.tables.items():
        (out / name).write_text(text)
    for name, image in rep.images.items():
        write_pgm(out / name, image)
    summary = rep.summary()
    (out / f"{rep.figure}_summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    for check in rep.checks:
        print(f"[{'PASS' if check.passed else 'FAIL'}] {rep.figure}: {check.name} ({check.detail})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="o2sim", description="Paramagnetic superrotor simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workers=False):
        p.add_argument("--constants", metavar="PATH", help="constants JSON (default: bundled O2 values)")
        p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        p.add_argument("--mode", choices=MODES, default=ADIABATIC)
        if workers:
            p.add_argument("--workers", type=int, default=1, metavar="K")

    p = sub.add_parser("levels", help="Zeeman sublevel energies of one N manifold")
    p.add_argument("--n", required=True)
    p.add_argument("--b-field", default="0", help="tesla")
    common(p)
    p.set_defaults(func=cmd_levels)

    p = sub.add_parser("distribution", help="rho(theta, phi) on the quadrature grid, optional PGM views")
    p.add_argument("--n", required=True)
    p.add_argument("--b-field", default="0", help="tesla")
    p.add_argument("--time", default="0", help="ns")
    p.add_argument("--grid", type=_grid, default=(256, 512), metavar="RxC")
    p.add_argument("--image", type=_image_arg, action="append", metavar="AXIS:PATH")
    common(p)
    p.set_defaults(func=cmd_distribution)

    for name, helptext in (("scan", "Cartesian sweep, one CSV row per tuple"),
                           ("raman", "Raman directionality weights over a field sweep")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--n", required=True, help="list a,b,c or range start:stop:step")
        p.add_argument("--b-field", default="0", help="tesla; list or range")
        p.add_argument("--time", default="0", help="ns; list or range")
        if name == "scan":
            p.add_argument("--theta-p", default="0", help="radians, or with a deg suffix; list or range")
            p.add_argument("--columns", help="comma-separated subset of the row columns")
        p.add_argument("--pressure", default="0", help="atm")
        p.add_argument("--grid", type=_grid, default=(256, 512), metavar="RxC")
        common(p, workers=True)
        p.set_defaults(func=cmd_scan if name == "scan" else cmd_raman, columns=None)

    p = sub.add_parser("reproduce", help="run a figure recipe: " + ", ".join(FIGURES))
    p.add_argument("figure")
    common(p, workers=True)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"o2sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UsageError, ScanError) as exc:
        print(f"o2sim: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"o2sim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
