"""Cross-product parameter sweeps driven by a RunConfig.

Each cell is an independent computation; failures are recorded as an
error string in the row and the sweep continues. Results are merged in
deterministic cell order regardless of worker count.
"""

from __future__ import annotations

import warnings
from itertools import product

import numpy as np

from .config import RunConfig, SWEEP_AXES
from .estimation import optimize_interrogation, sensitivity_derivative
from .figures import _parallel_map
from .nvmodel import ReferenceDcField, eigensystem, ramsey_shift
from .rabi import MicrowaveDrive, rabi_exact, rabi_perturbative, rabi_qubit

TAU = 2.0 * np.pi

#: Quantities a sweep can compute per cell.
KNOWN_QUANTITIES = (
    "lambda_mhz",
    "lambda_qubit_mhz",
    "lambda_pert_mhz",
    "domega_mhz",
    "omega_minus_mhz",
    "omega_plus_mhz",
    "d_lambda_d_phi_mhz",
    "d_domega_d_phi_mhz",
    "delta_phi",
)


def _cell_values(config: RunConfig, cell: dict) -> list[float]:
    params = config.nv_params()
    fld = config.static_field(**cell)
    phi_deg = cell.get("phi_deg", config.phi_s_deg - config.phi_mw_deg)
    phi = np.deg2rad(phi_deg)
    drv = config.drive(**cell)
    drv = MicrowaveDrive(drv.b_mw, drv.theta_mw, phi_mw=fld.phi_s - phi)
    ref = config.reference(**cell)
    ref = ReferenceDcField(ref.b_r, phi_r=fld.phi_s - phi)
    L = int(cell.get("L", 1))

    out = []
    for q in config.quantities:
        if q == "lambda_mhz":
            out.append(rabi_exact(fld, drv, params).frequency / TAU)
        elif q == "lambda_qubit_mhz":
            out.append(rabi_qubit(fld, drv, params).frequency / TAU)
        elif q == "lambda_pert_mhz":
            out.append(rabi_perturbative(fld, drv, params).frequency / TAU)
        elif q == "domega_mhz":
            out.append(ramsey_shift(fld, ref, params) / TAU)
        elif q == "omega_minus_mhz":
            out.append(eigensystem(fld, params).omega_minus / TAU)
        elif q == "omega_plus_mhz":
            out.append(eigensystem(fld, params).omega_plus / TAU)
        elif q == "d_lambda_d_phi_mhz":
            out.append(
                sensitivity_derivative("d_lambda_d_phi", fld, drv, params) / TAU
            )
        elif q == "d_domega_d_phi_mhz":
            out.append(
                sensitivity_derivative("d_domega_d_phi", fld, ref, params) / TAU
            )
        elif q == "delta_phi":
            target = drv if config.scheme in ("rabi_mw", "ghz_rabi") else ref
            result = optimize_interrogation(
                config.scheme,
                fld,
                target,
                params,
                config.gamma_per_us,
                config.total_time_us,
                n_max=config.n_max,
                L=L,
            )
            out.append(result.delta)
        else:
            raise ValueError(f"unknown quantity {q!r}")
    return out


def run_sweep(config: RunConfig) -> tuple[list[str], list[list]]:
    """Execute the configured sweep; returns (header, rows).

    Rows carry the swept axis values, then one column per quantity, then
    an 'error' column (empty on success; failed cells keep nan values and
    the error message).
    """
    for q in config.quantities:
        if q not in KNOWN_QUANTITIES:
            raise ValueError(f"unknown quantity {q!r}; know {KNOWN_QUANTITIES}")
    axes = [a for a in SWEEP_AXES if a in config.sweep]
    if not axes:
        raise ValueError("sweep config declares no axes")
    grids = [config.sweep[a] for a in axes]
    cells = [dict(zip(axes, combo)) for combo in product(*grids)]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        results = _parallel_map(lambda c: _cell_values(config, c), cells, config)

    header = axes + list(config.quantities) + ["error"]
    rows = []
    for cell, res in zip(cells, results):
        prefix = [cell[a] for a in axes]
        if isinstance(res, Exception):
            rows.append(
                prefix
                + [float("nan")] * len(config.quantities)
                + [f"{type(res).__name__}: {res}"]
            )
        else:
            rows.append(prefix + res + [""])
    return header, rows
