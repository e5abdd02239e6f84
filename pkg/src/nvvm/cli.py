"""Command-line interface.

Subcommands: invert, eig, rabi, ellipse, figure, sweep. Boundary units
are MHz / mT / degrees / us; see README for examples. Exit codes: 0 on
success, 2 on validation errors (bad arguments, malformed configs,
inconsistent inputs), 1 on unexpected runtime errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .figures import FIGURE_IDS, build_figure
from .nvmodel import (
    InconsistentTransitionsError,
    UndefinedAngleError,
    eigensystem,
    invert_transitions,
    ramsey_shift,
)
from .output import UNITS_NOTE, sha256_file, write_csv, write_manifest
from .rabi import (
    AxialFieldError,
    ellipse_params,
    ellipse_trace,
    rabi_exact,
    rabi_perturbative,
    rabi_qubit,
)
from .sweep import run_sweep

TAU = 2.0 * np.pi

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2

_VALIDATION_ERRORS = (
    ConfigError,
    InconsistentTransitionsError,
    UndefinedAngleError,
    AxialFieldError,
    ValueError,
)


def _add_field_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--b", type=float, default=8.0, help="target field (mT)")
    p.add_argument("--theta", type=float, default=40.0, help="polar angle (deg)")
    p.add_argument("--phi-s", type=float, default=0.0, help="azimuth (deg)")


def _add_drive_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--b-mw", type=float, default=1.0, help="drive amplitude (mT)")
    p.add_argument("--theta-mw", type=float, default=20.0, help="drive polar angle (deg)")
    p.add_argument("--phi-mw", type=float, default=0.0, help="drive azimuth (deg)")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        b_mt=args.b,
        theta_deg=args.theta,
        phi_s_deg=args.phi_s,
    )


def cmd_invert(args: argparse.Namespace) -> int:
    config = RunConfig()
    params = config.nv_params()
    x0, b, theta = invert_transitions(
        TAU * args.omega_plus, TAU * args.omega_minus, params
    )
    result = {
        "x0_mhz": x0 / TAU,
        "b_mt": b,
        "theta_deg": float(np.rad2deg(theta)),
    }
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        print(f"x0 = {result['x0_mhz']!r} MHz")
        print(f"B = {result['b_mt']!r} mT")
        print(f"theta = {result['theta_deg']!r} deg")
    return EXIT_OK


def cmd_eig(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    es = eigensystem(config.static_field(), config.nv_params())
    result = {
        "energies_mhz": [e / TAU for e in es.energies.tolist()],
        "omega_minus_mhz": es.omega_minus / TAU,
        "omega_plus_mhz": es.omega_plus / TAU,
        "delta_mhz": es.delta / TAU,
    }
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        print("energies (MHz):", " ".join(repr(e) for e in result["energies_mhz"]))
        print(f"omega_minus = {result['omega_minus_mhz']!r} MHz")
        print(f"omega_plus = {result['omega_plus_mhz']!r} MHz")
        print(f"delta = {result['delta_mhz']!r} MHz")
    return EXIT_OK


def cmd_rabi(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    params = config.nv_params()
    fld = config.static_field()
    drv = config.drive(
        b_mw_mt=args.b_mw, theta_mw_deg=args.theta_mw, phi_mw_deg=args.phi_mw
    )
    methods = (
        ("exact", rabi_exact),
        ("qubit", rabi_qubit),
        ("perturbative", rabi_perturbative),
    )
    wanted = [m for m, _ in methods] if args.method == "all" else [args.method]
    result = {}
    for name, fn in methods:
        if name not in wanted:
            continue
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                r = fn(fld, drv, params)
            result[name] = {
                "lambda_mhz": r.frequency / TAU,
                "matrix_element_mhz": [
                    r.matrix_element.real / TAU,
                    r.matrix_element.imag / TAU,
                ],
            }
        except AxialFieldError as exc:
            result[name] = {"error": str(exc)}
    if args.json:
        print(json.dumps(result, indent=2, sort_keys=True))
    else:
        for name, detail in result.items():
            if "error" in detail:
                print(f"{name}: unavailable ({detail['error']})")
            else:
                print(f"{name}: lambda = {detail['lambda_mhz']!r} MHz")
    return EXIT_OK


def cmd_ellipse(args: argparse.Namespace) -> int:
    config = _config_from_args(args)
    params = config.nv_params()
    fld = config.static_field()
    drv = config.drive(
        b_mw_mt=args.b_mw, theta_mw_deg=args.theta_mw, phi_mw_deg=args.phi_mw
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        if args.method in ("qubit", "perturbative"):
            par = ellipse_params(args.method, fld, drv, params)
            print(f"center = {par.center.real / TAU!r} MHz")
            print(f"half_width = {par.half_width / TAU!r} MHz")
            print(f"half_height = {par.half_height / TAU!r} MHz")
        if args.out is not None:
            phi_deg = np.linspace(0.0, 360.0, args.points)
            trace = ellipse_trace(
                args.method, fld, drv, np.deg2rad(phi_deg), params
            ) / TAU
            rows = [
                [p, t.real, t.imag] for p, t in zip(phi_deg, trace)
            ]
            write_csv(Path(args.out), ["phi_deg", "re_mhz", "im_mhz"], rows)
            print(f"trace written to {args.out}")
    return EXIT_OK


def _write_figure(figure_id: str, config: RunConfig, out_dir: Path) -> list[Path]:
    data = build_figure(figure_id, config)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    files = []
    for name in sorted(data.tables):
        header, rows = data.tables[name]
        path = out_dir / f"{name}.csv"
        write_csv(path, header, rows)
        written.append(path)
        files.append(
            {"name": path.name, "sha256": sha256_file(path), "rows": len(rows)}
        )
    manifest = {
        "figure": figure_id,
        "generator": f"nvvm {__version__}",
        "config": config.to_dict(),
        "config_sha256": config.content_hash(),
        "units": UNITS_NOTE,
        "solver": {"method": "lindblad-generator eigendecomposition", "dt_us": config.dt_us},
        "figure_params": data.manifest,
        "files": files,
    }
    manifest_path = out_dir / f"{figure_id}_manifest.json"
    write_manifest(manifest_path, manifest)
    written.append(manifest_path)
    return written


def cmd_figure(args: argparse.Namespace) -> int:
    overrides = {}
    for key in ("b_mt", "theta_mw_deg", "b_mw_mt", "b_r_mt", "gamma_per_us",
                "total_time_us", "n_max", "workers"):
        flag = getattr(args, key, None)
        if flag is not None:
            overrides[key] = flag
    config = RunConfig().patched(**overrides)
    out_dir = Path(args.out_dir)
    written = _write_figure(args.figure_id, config, out_dir)
    for path in written:
        print(path)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    text = Path(args.config).read_text()
    config = RunConfig.from_json(text)
    header, rows = run_sweep(config)
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "sweep.csv"
    write_csv(csv_path, header, rows)
    manifest = {
        "kind": "sweep",
        "generator": f"nvvm {__version__}",
        "config": config.to_dict(),
        "config_sha256": config.content_hash(),
        "units": UNITS_NOTE,
        "files": [
            {
                "name": csv_path.name,
                "sha256": sha256_file(csv_path),
                "rows": len(rows),
            }
        ],
        "failed_cells": sum(1 for r in rows if r[-1] != ""),
    }
    manifest_path = out_dir / "sweep_manifest.json"
    write_manifest(manifest_path, manifest)
    print(csv_path)
    print(manifest_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvvm",
        description=(
            "Vector DC magnetometry simulations for NV-center spins: "
            "transition inversion, Rabi-frequency reference curves, "
            "uncertainty optimization, and figure-data regeneration."
        ),
    )
    parser.add_argument("--version", action="version", version=f"nvvm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invert", help="recover (x0, B, theta) from transition frequencies")
    p.add_argument("--omega-plus", type=float, required=True, help="upper transition (MHz)")
    p.add_argument("--omega-minus", type=float, required=True, help="lower transition (MHz)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_invert)

    p = sub.add_parser("eig", help="labeled eigensystem of the static Hamiltonian")
    _add_field_args(p)
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_eig)

    p = sub.add_parser("rabi", help="Rabi frequency by one or all methods")
    _add_field_args(p)
    _add_drive_args(p)
    p.add_argument(
        "--method",
        choices=("all", "exact", "qubit", "perturbative"),
        default="all",
    )
    p.add_argument("--json", action="store_true")
    p.set_defaults(fn=cmd_rabi)

    p = sub.add_parser("ellipse", help="complex-plane trace and ellipse parameters")
    _add_field_args(p)
    _add_drive_args(p)
    p.add_argument("--method", choices=("exact", "qubit", "perturbative"), required=True)
    p.add_argument("--points", type=int, default=361)
    p.add_argument("--out", type=str, default=None, help="CSV path for the trace")
    p.set_defaults(fn=cmd_ellipse)

    p = sub.add_parser("figure", help="regenerate one figure's CSV data")
    p.add_argument("figure_id", choices=FIGURE_IDS)
    p.add_argument("--out-dir", type=str, default="out")
    p.add_argument("--b-mt", type=float, default=None, dest="b_mt")
    p.add_argument("--b-mw", type=float, default=None, dest="b_mw_mt")
    p.add_argument("--b-r", type=float, default=None, dest="b_r_mt")
    p.add_argument("--theta-mw", type=float, default=None, dest="theta_mw_deg")
    p.add_argument("--gamma", type=float, default=None, dest="gamma_per_us")
    p.add_argument("--t-total", type=float, default=None, dest="total_time_us")
    p.add_argument("--n-max", type=int, default=None, dest="n_max")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_figure)

    p = sub.add_parser("sweep", help="run a cross-product sweep from a JSON config")
    p.add_argument("--config", type=str, required=True)
    p.set_defaults(fn=cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage, 0 on --help/--version
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - last-resort runtime diagnostics
        print(f"runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
