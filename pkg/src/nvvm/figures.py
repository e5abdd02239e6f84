"""Figure-data builders: each returns CSV tables plus a manifest.

Every builder is a pure, deterministic function of a RunConfig; the CLI
writes the tables with round-trip-safe formatting, so two runs with the
same config produce byte-identical files. Default parameter values follow
the headline simulation set (8 mT target field, 1 mT drive and reference,
20 deg drive polar angle, 1.0/us dephasing).

Sweep cells execute concurrently up to a worker cap (NVVM_WORKERS or the
config value); results are merged in deterministic cell order and written
by a single writer.
"""

from __future__ import annotations

import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .estimation import optimize_interrogation
from .nvmodel import ReferenceDcField, StaticField
from .rabi import MicrowaveDrive, ellipse_trace

TAU = 2.0 * np.pi

FIGURE_IDS = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8")

#: Panel polar angles (deg) for the Rabi-method comparison figures.
PANEL_THETAS = (10.0, 40.0, 70.0, 85.0, 87.0, 89.0)

#: Polar angles (deg) for the sensitivity and uncertainty figures.
MAP_THETAS = (10.0, 40.0, 80.0)


@dataclass
class FigureData:
    """One figure's CSV tables (name -> (header, rows)) and manifest."""

    figure: str
    tables: dict[str, tuple[list[str], list[list]]]
    manifest: dict = field(default_factory=dict)


def _workers(config: RunConfig) -> int:
    env = os.environ.get("NVVM_WORKERS")
    if env is not None:
        return max(1, int(env))
    if config.workers is not None:
        return max(1, config.workers)
    return min(4, os.cpu_count() or 1)


def _parallel_map(fn, cells, config: RunConfig) -> list:
    """Map fn over cells, worker-capped, results in deterministic order.

    Exceptions are captured per cell and returned in place of results so a
    sweep survives partial failure.
    """

    def guarded(cell):
        try:
            return fn(cell)
        except Exception as exc:  # noqa: BLE001 - cell errors become data
            return exc

    n = _workers(config)
    if n == 1 or len(cells) <= 1:
        return [guarded(c) for c in cells]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(guarded, cells))


def _lambda_curves(
    config: RunConfig, theta_deg: float, phi_deg: np.ndarray
) -> dict[str, np.ndarray]:
    """|matrix element| in MHz for the three methods over a phi grid."""
    params = config.nv_params()
    fld = config.static_field(theta_deg=theta_deg)
    drv = config.drive()
    phi = np.deg2rad(phi_deg)
    out = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for method in ("exact", "qubit", "perturbative"):
            out[method] = np.abs(ellipse_trace(method, fld, drv, phi, params)) / TAU
    return out


def build_fig2(config: RunConfig) -> FigureData:
    """Rabi frequency vs drive-azimuth mismatch, six polar-angle panels."""
    phi_deg = np.arange(0.0, 361.0, 1.0)
    tables = {}
    for theta in PANEL_THETAS:
        curves = _lambda_curves(config, theta, phi_deg)
        rows = [
            [p, curves["exact"][i], curves["qubit"][i], curves["perturbative"][i]]
            for i, p in enumerate(phi_deg)
        ]
        name = f"fig2_theta{int(theta)}"
        tables[name] = (
            ["phi_deg", "lambda_exact", "lambda_qubit", "lambda_pert"],
            rows,
        )
    return FigureData("fig2", tables, {"theta_deg_panels": list(PANEL_THETAS)})


def build_fig3(config: RunConfig) -> FigureData:
    """Complex-plane traces of the drive matrix element, per method."""
    params = config.nv_params()
    drv = config.drive()
    phi_deg = np.arange(0.0, 361.0, 1.0)
    phi = np.deg2rad(phi_deg)
    tables = {}
    for method in ("exact", "qubit", "perturbative"):
        header = ["phi_deg"]
        cols = [phi_deg]
        for theta in PANEL_THETAS:
            fld = config.static_field(theta_deg=theta)
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                trace = ellipse_trace(method, fld, drv, phi, params) / TAU
            header += [f"re_theta{int(theta)}", f"im_theta{int(theta)}"]
            cols += [np.real(trace), np.imag(trace)]
        rows = [list(col[i] for col in cols) for i in range(len(phi_deg))]
        tables[f"fig3_{method}"] = (header, rows)
    return FigureData("fig3", tables, {"theta_deg_panels": list(PANEL_THETAS)})


def _dlambda_dphi_grid(
    params, fld: StaticField, drv: MicrowaveDrive, phi: np.ndarray, step: float = 1e-4
) -> np.ndarray:
    """|d lambda / d phi| on a phi grid (rad/us per rad), vectorized."""
    hi = np.abs(ellipse_trace("exact", fld, drv, phi + step, params))
    lo = np.abs(ellipse_trace("exact", fld, drv, phi - step, params))
    return np.abs(hi - lo) / (2.0 * step)


def build_fig4(config: RunConfig) -> FigureData:
    """Sensitivity maps vs reference amplitude and azimuth mismatch.

    Panels a-c: |d lambda/d phi| over (B_mw, phi); panels d-f:
    |d domega/d phi| over (B_r, phi); one polar angle per panel.
    """
    params = config.nv_params()
    amps = np.round(np.arange(0.1, 2.01, 0.05), 10)
    phi_deg = np.arange(0.0, 361.0, 5.0)
    phi = np.deg2rad(phi_deg)
    tables = {}
    for theta in MAP_THETAS:
        fld = config.static_field(theta_deg=theta)
        rows_mw = []
        for b_mw in amps:
            drv = config.drive(b_mw_mt=float(b_mw))
            deriv = _dlambda_dphi_grid(params, fld, drv, phi) / TAU
            rows_mw.extend(
                [float(b_mw), p, d] for p, d in zip(phi_deg, deriv)
            )
        tables[f"fig4_dlambda_theta{int(theta)}"] = (
            ["b_mw_mt", "phi_deg", "d_lambda_d_phi_mhz"],
            rows_mw,
        )
        rows_dc = []
        for b_r in amps:
            # closed form: |d domega/d phi| = 3 g^2 B_perp B_r |sin phi| / D
            mag = (
                3.0
                * params.gamma_e**2
                * fld.b_perp
                * float(b_r)
                * np.abs(np.sin(phi))
                / params.d
            ) / TAU
            rows_dc.extend([float(b_r), p, d] for p, d in zip(phi_deg, mag))
        tables[f"fig4_domega_theta{int(theta)}"] = (
            ["b_r_mt", "phi_deg", "d_domega_d_phi_mhz"],
            rows_dc,
        )
    return FigureData(
        "fig4",
        tables,
        {"theta_deg_panels": list(MAP_THETAS), "amplitude_grid_mt": amps.tolist()},
    )


def build_fig5(config: RunConfig) -> FigureData:
    """Sensitivity maps vs target-field amplitude and polar angle.

    The azimuth is chosen per cell to maximize the derivative; for the
    Ramsey scheme that maximum is at phi = 90 deg in closed form.
    """
    params = config.nv_params()
    b_grid = np.round(np.linspace(0.5, 10.0, 20), 10)
    theta_grid = np.round(np.linspace(5.0, 85.0, 17), 10)
    phi_search = np.deg2rad(np.arange(2.5, 360.0, 5.0))
    tables = {}
    for b_mw in (0.5, 1.0, 2.0):
        drv = config.drive(b_mw_mt=b_mw)
        rows = []
        for b in b_grid:
            for theta in theta_grid:
                fld = config.static_field(b_mt=float(b), theta_deg=float(theta))
                deriv = _dlambda_dphi_grid(params, fld, drv, phi_search)
                rows.append([float(b), float(theta), float(deriv.max()) / TAU])
        key = f"fig5_dlambda_bmw{str(b_mw).replace('.', 'p')}"
        tables[key] = (["b_mt", "theta_deg", "d_lambda_d_phi_mhz"], rows)
    for b_r in (0.5, 1.0, 2.0):
        rows = []
        for b in b_grid:
            for theta in theta_grid:
                fld = config.static_field(b_mt=float(b), theta_deg=float(theta))
                mag = (
                    3.0 * params.gamma_e**2 * fld.b_perp * b_r / params.d
                ) / TAU
                rows.append([float(b), float(theta), float(mag)])
        key = f"fig5_domega_br{str(b_r).replace('.', 'p')}"
        tables[key] = (["b_mt", "theta_deg", "d_domega_d_phi_mhz"], rows)
    return FigureData(
        "fig5",
        tables,
        {
            "b_grid_mt": b_grid.tolist(),
            "theta_grid_deg": theta_grid.tolist(),
            "drive_amplitudes_mt": [0.5, 1.0, 2.0],
            "reference_amplitudes_mt": [0.5, 1.0, 2.0],
        },
    )


def _uncertainty_pair(
    config: RunConfig, theta_deg: float, phi_deg: float, theta_mw_deg: float
) -> tuple[float, float]:
    """(delta_phi conventional, delta_phi microwave) at one azimuth."""
    params = config.nv_params()
    fld = config.static_field(theta_deg=theta_deg)
    phi = np.deg2rad(phi_deg)
    drv = config.drive(theta_mw_deg=theta_mw_deg, phi_mw_deg=0.0)
    drv = MicrowaveDrive(drv.b_mw, drv.theta_mw, phi_mw=fld.phi_s - phi)
    ref = ReferenceDcField(config.b_r_mt, phi_r=fld.phi_s - phi)
    conv = optimize_interrogation(
        "ramsey_dc", fld, ref, params, config.gamma_per_us,
        config.total_time_us, n_max=config.n_max,
    )
    mw = optimize_interrogation(
        "rabi_mw", fld, drv, params, config.gamma_per_us,
        config.total_time_us, n_max=config.n_max,
    )
    return conv.delta, mw.delta


def build_fig6(
    config: RunConfig, phi_step_deg: float = 2.0
) -> FigureData:
    """Uncertainty of both schemes vs azimuth mismatch, three polar angles."""
    phi_deg = np.arange(0.0, 360.0 + phi_step_deg / 2, phi_step_deg)
    cells = [(th, p) for th in MAP_THETAS for p in phi_deg]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        results = _parallel_map(
            lambda cell: _uncertainty_pair(config, cell[0], cell[1], config.theta_mw_deg),
            cells,
            config,
        )
    by_key = {}
    for (th, p), res in zip(cells, results):
        if isinstance(res, Exception):
            by_key[(th, p)] = (float("nan"), float("nan"))
        else:
            by_key[(th, p)] = res
    header = ["phi_deg"]
    header += [f"conv_theta{int(t)}" for t in MAP_THETAS]
    header += [f"mw_theta{int(t)}" for t in MAP_THETAS]
    rows = []
    for p in phi_deg:
        row = [float(p)]
        row += [by_key[(t, p)][0] for t in MAP_THETAS]
        row += [by_key[(t, p)][1] for t in MAP_THETAS]
        rows.append(row)
    return FigureData(
        "fig6",
        {"fig6": (header, rows)},
        {"theta_deg_curves": list(MAP_THETAS), "theta_mw_deg": config.theta_mw_deg},
    )


#: Per-curve drive polar angles for the amplitude scan, one per target
#: polar angle.
FIG7_THETA_MW = (10.0, 20.0, 20.0)

#: Azimuths searched when minimizing the uncertainty per amplitude point.
FIG7_PHI_SEARCH = (30.0, 55.0, 80.0, 105.0, 130.0, 155.0)


def build_fig7(
    config: RunConfig,
    b_grid: np.ndarray | None = None,
    phi_search: tuple[float, ...] = FIG7_PHI_SEARCH,
) -> FigureData:
    """Uncertainty of both schemes vs target amplitude, azimuth optimized."""
    if b_grid is None:
        b_grid = np.round(np.linspace(0.5, 10.0, 16), 10)

    def best_pair(cell):
        b, theta, theta_mw = cell
        sub = config.patched(b_mt=float(b))
        pairs = [
            _uncertainty_pair(sub, theta, p, theta_mw) for p in phi_search
        ]
        return (
            min(c for c, _ in pairs),
            min(m for _, m in pairs),
        )

    cells = [
        (b, th, tmw)
        for th, tmw in zip(MAP_THETAS, FIG7_THETA_MW)
        for b in b_grid
    ]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        results = _parallel_map(best_pair, cells, config)
    by_key = {}
    for (b, th, _), res in zip(cells, results):
        by_key[(th, b)] = (
            (float("nan"), float("nan")) if isinstance(res, Exception) else res
        )
    header = ["b_mt"]
    header += [f"conv_theta{int(t)}" for t in MAP_THETAS]
    header += [f"mw_theta{int(t)}" for t in MAP_THETAS]
    rows = []
    for b in b_grid:
        row = [float(b)]
        row += [by_key[(t, b)][0] for t in MAP_THETAS]
        row += [by_key[(t, b)][1] for t in MAP_THETAS]
        rows.append(row)
    return FigureData(
        "fig7",
        {"fig7": (header, rows)},
        {
            "theta_deg_curves": list(MAP_THETAS),
            "theta_mw_deg_curves": list(FIG7_THETA_MW),
            "phi_search_deg": list(phi_search),
        },
    )


def build_fig8(
    config: RunConfig,
    l_max: int = 6,
    l_max_axial: int = 10,
    phi_deg: float = 90.0,
) -> FigureData:
    """Separable-to-entangled uncertainty ratio vs register size."""
    from .estimation import entangled_advantage_ratio

    params = config.nv_params()

    def one(cell):
        theta, L = cell
        fld = config.static_field(theta_deg=theta)
        drv = config.drive(phi_mw_deg=np.rad2deg(fld.phi_s) - phi_deg)
        return entangled_advantage_ratio(
            L, fld, drv, params, config.gamma_per_us, config.total_time_us,
            n_max=config.n_max,
        )

    cells = [(0.0, L) for L in range(1, l_max_axial + 1)]
    cells += [(th, L) for th in MAP_THETAS for L in range(1, l_max + 1)]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        results = _parallel_map(one, cells, config)
    rows = []
    for (theta, L), res in zip(cells, results):
        value = float("nan") if isinstance(res, Exception) else res
        rows.append([float(theta), int(L), value])
    return FigureData(
        "fig8",
        {"fig8": (["theta_deg", "L", "ratio"], rows)},
        {
            "phi_deg": phi_deg,
            "l_max": l_max,
            "l_max_axial": l_max_axial,
            "axial_quantity": "delta_lambda",
        },
    )


_BUILDERS = {
    "fig2": build_fig2,
    "fig3": build_fig3,
    "fig4": build_fig4,
    "fig5": build_fig5,
    "fig6": build_fig6,
    "fig7": build_fig7,
    "fig8": build_fig8,
}


def build_figure(figure_id: str, config: RunConfig) -> FigureData:
    if figure_id not in _BUILDERS:
        raise ValueError(f"unknown figure id {figure_id!r}; know {FIGURE_IDS}")
    return _BUILDERS[figure_id](config)
