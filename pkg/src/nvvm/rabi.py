"""Rabi frequency of the driven NV spin versus drive azimuth.

The Rabi frequency is the magnitude of the drive matrix element between
the ground and first-excited eigenstates, computed three ways:

- exact: numerically, from the full spin-1 eigenvectors;
- qubit: closed form in the two-level (|m_s=0>, |m_s=-1>) approximation;
- perturbative: closed form in the near-transverse regime built on the
  bright/dark basis of |m_s=+-1>.

Swept over the azimuth mismatch phi = phi_s - phi_mw, the complex matrix
element traces a closed curve in the complex plane; for the two
approximate methods that curve is an exact ellipse whose parameters are
also available in closed form. All sweeps hold the static field fixed and
rotate the drive azimuth, so the eigenbasis (and with it the phase
convention of the exact trace) never changes along a sweep.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .nvmodel import EigenSystem, NvParameters, StaticField, eigensystem
from .spinalg import spin1_operators

#: |c_db| above which the near-transverse expansion is unreliable.
PERTURBATIVE_CDB_WARN = 0.5


class AxialFieldError(ValueError):
    """Closed-form Rabi expressions are singular for a purely axial field."""


@dataclass(frozen=True)
class MicrowaveDrive:
    """Linearly polarized drive in NV-frame spherical components.

    b_mw: amplitude (mT); theta_mw: polar angle (rad) in [0, pi/2];
    phi_mw: azimuth (rad), normalized into [0, 2*pi); carrier: angular
    frequency (rad/us) or None to mean "resonant with the g->e transition".
    """

    b_mw: float
    theta_mw: float
    phi_mw: float = 0.0
    carrier: float | None = None

    def __post_init__(self) -> None:
        if self.b_mw < 0:
            raise ValueError("drive amplitude must be nonnegative")
        if not 0.0 <= self.theta_mw <= np.pi / 2:
            raise ValueError("theta_mw must lie in [0, pi/2]")
        object.__setattr__(self, "phi_mw", float(np.mod(self.phi_mw, 2.0 * np.pi)))

    @property
    def b_mw_z(self) -> float:
        return self.b_mw * np.cos(self.theta_mw)

    @property
    def b_mw_perp(self) -> float:
        return self.b_mw * np.sin(self.theta_mw)

    def with_azimuth(self, phi_mw: float) -> "MicrowaveDrive":
        return MicrowaveDrive(self.b_mw, self.theta_mw, phi_mw, self.carrier)


@dataclass(frozen=True)
class RabiResult:
    """Rabi angular frequency (rad/us), the complex matrix element behind
    it, and which method produced it."""

    frequency: float
    matrix_element: complex
    method: str


@dataclass(frozen=True)
class EllipseParams:
    """Axis-aligned ellipse traced by the complex matrix element.

    center is on the real axis by construction; half_width is the real
    semi-axis, half_height the imaginary one, both in rad/us.
    """

    center: complex
    half_width: float
    half_height: float


def drive_operator(drive: MicrowaveDrive, params: NvParameters = NvParameters()) -> np.ndarray:
    """gamma_e * (B_mw^z S_z + B_mw_perp (cos(phi_mw) S_x + sin(phi_mw) S_y))."""
    sx, sy, sz = spin1_operators()
    return params.gamma_e * (
        drive.b_mw_z * sz
        + drive.b_mw_perp * (np.cos(drive.phi_mw) * sx + np.sin(drive.phi_mw) * sy)
    )


def _exact_element_parts(
    es: EigenSystem, params: NvParameters, transition: str
) -> tuple[complex, complex, complex]:
    """Per-operator matrix elements (z, x, y) between <g| and the target state.

    The drive element at any azimuth is then
    gamma_e * (B_mw^z * m_z + B_mw_perp * (cos(phi_mw) * m_x + sin(phi_mw) * m_y)),
    which makes azimuth sweeps cheap: one eigensystem, three numbers.
    """
    sx, sy, sz = spin1_operators()
    bra = es.ground.conj()
    ket = es.excited if transition == "ge" else es.upper
    return (
        complex(bra @ (sz @ ket)),
        complex(bra @ (sx @ ket)),
        complex(bra @ (sy @ ket)),
    )


def rabi_exact(
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters = NvParameters(),
    transition: str = "ge",
) -> RabiResult:
    """Rabi frequency |<g| drive |e>| from the numerically exact eigenstates.

    transition selects the target state: "ge" (default, resonant carrier
    omega_minus) or "gb" (the upper transition at omega_plus).
    """
    if transition not in ("ge", "gb"):
        raise ValueError(f"unknown transition {transition!r}")
    es = eigensystem(field, params)
    m_z, m_x, m_y = _exact_element_parts(es, params, transition)
    element = params.gamma_e * (
        drive.b_mw_z * m_z
        + drive.b_mw_perp * (np.cos(drive.phi_mw) * m_x + np.sin(drive.phi_mw) * m_y)
    )
    return RabiResult(float(abs(element)), complex(element), "exact")


def _qubit_constants(
    field: StaticField, params: NvParameters
) -> tuple[float, float, float, float]:
    """(delta, omega_half, c_g, c_e) for the two-level approximation."""
    if field.b_perp == 0.0:
        raise AxialFieldError(
            "two-level formula is singular for a field along the NV axis; "
            "use rabi_exact"
        )
    delta = params.d - params.gamma_e * field.b_z
    k = params.gamma_e * field.b_perp
    omega_half = float(np.sqrt(delta**2 + 2.0 * k**2))
    alpha_g = (delta + omega_half) / (np.sqrt(2.0) * k)
    alpha_e = (delta - omega_half) / (np.sqrt(2.0) * k)
    c_g = 1.0 / np.sqrt(1.0 + alpha_g**2)
    c_e = 1.0 / np.sqrt(1.0 + alpha_e**2)
    return delta, omega_half, float(c_g), float(c_e)


def _qubit_element(
    field: StaticField, drive: MicrowaveDrive, params: NvParameters, phi: float
) -> complex:
    # The longitudinal term enters with the same sign as the transverse one:
    # the exact eigenvectors (and a lab-frame time-domain check) put the
    # Rabi maximum at phi = 0, and the ellipse center at positive real
    # values. Flipping this sign shifts the whole curve by 180 degrees.
    delta, _, c_g, c_e = _qubit_constants(field, params)
    stretch = np.sqrt(1.0 + 2.0 * (params.gamma_e * field.b_perp / delta) ** 2)
    return c_g * c_e * (
        params.gamma_e * drive.b_mw_z
        + (delta / field.b_perp)
        * drive.b_mw_perp
        * (np.cos(phi) + 1j * stretch * np.sin(phi))
    )


def rabi_qubit(
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters = NvParameters(),
) -> RabiResult:
    """Rabi frequency in the (|m_s=0>, |m_s=-1>) two-level approximation.

    Raises AxialFieldError at B_perp = 0 where the closed form is 0/0.
    """
    phi = field.phi_s - drive.phi_mw
    element = _qubit_element(field, drive, params, phi)
    return RabiResult(float(abs(element)), complex(element), "qubit")


def _perturbative_constants(
    field: StaticField, params: NvParameters
) -> tuple[float, float, float, float, float]:
    """(epsilon, c_gd, c_db, c_gp, c_dp) for the near-transverse expansion.

    epsilon = gamma_e*B_perp/D measures the ground/bright mixing; c_gd and
    c_db are the first-order amplitudes of the dark-state corrections; c_gp
    and c_dp normalize the corrected dark-like and ground-like states.
    """
    if field.b_perp == 0.0:
        raise AxialFieldError(
            "near-transverse expansion is singular at B_perp = 0; use rabi_exact"
        )
    eps = params.gamma_e * field.b_perp / params.d
    c_gd = -eps * params.gamma_e * field.b_z / (params.d + eps * params.gamma_e * field.b_perp)
    c_db = -field.b_z / (eps * field.b_perp)
    if abs(c_db) > PERTURBATIVE_CDB_WARN:
        warnings.warn(
            f"|c_db| = {abs(c_db):.3f} > {PERTURBATIVE_CDB_WARN}; "
            "near-transverse expansion unreliable this far from theta = 90 deg",
            stacklevel=3,
        )
    c_gp = 1.0 / np.sqrt(1.0 + c_gd**2 + c_db**2)
    c_dp = 1.0 / np.sqrt(1.0 + c_gd**2)
    return float(eps), float(c_gd), float(c_db), float(c_gp), float(c_dp)


def _perturbative_element(
    field: StaticField, drive: MicrowaveDrive, params: NvParameters, phi: float
) -> complex:
    eps, _, c_db, c_gp, c_dp = _perturbative_constants(field, params)
    return c_gp * c_dp * (
        -eps * params.gamma_e * drive.b_mw_z
        + params.gamma_e * drive.b_mw_perp * (c_db * np.cos(phi) + 1j * np.sin(phi))
    )


def rabi_perturbative(
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters = NvParameters(),
) -> RabiResult:
    """Rabi frequency from first-order perturbation theory near theta = 90 deg.

    Valid when D and B_perp both dominate B_z; emits a warning once |c_db|
    exceeds PERTURBATIVE_CDB_WARN. Raises AxialFieldError at B_perp = 0.
    """
    phi = field.phi_s - drive.phi_mw
    element = _perturbative_element(field, drive, params, phi)
    return RabiResult(float(abs(element)), complex(element), "perturbative")


_METHODS = {
    "exact": None,  # handled separately; needs the eigensystem
    "qubit": _qubit_element,
    "perturbative": _perturbative_element,
}


def rabi_by_method(
    method: str,
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters = NvParameters(),
) -> RabiResult:
    if method == "exact":
        return rabi_exact(field, drive, params)
    if method == "qubit":
        return rabi_qubit(field, drive, params)
    if method == "perturbative":
        return rabi_perturbative(field, drive, params)
    raise ValueError(f"unknown method {method!r}")


def ellipse_trace(
    method: str,
    field: StaticField,
    drive: MicrowaveDrive,
    phi_grid: np.ndarray,
    params: NvParameters = NvParameters(),
) -> np.ndarray:
    """Complex matrix element at each phi = phi_s - phi_mw in phi_grid.

    The sweep rotates the drive azimuth (phi_mw = phi_s - phi) while the
    static field, and hence the eigenbasis and its phase convention, stays
    fixed. Returns one complex value per grid point.
    """
    phi_grid = np.asarray(phi_grid, dtype=float)
    if phi_grid.size == 0:
        raise ValueError("phi grid must be nonempty")
    if method == "exact":
        es = eigensystem(field, params)
        m_z, m_x, m_y = _exact_element_parts(es, params, "ge")
        phi_mw = field.phi_s - phi_grid
        return params.gamma_e * (
            drive.b_mw_z * m_z
            + drive.b_mw_perp * (np.cos(phi_mw) * m_x + np.sin(phi_mw) * m_y)
        )
    if method in ("qubit", "perturbative"):
        fn = _METHODS[method]
        return np.array([fn(field, drive, params, phi) for phi in phi_grid])
    raise ValueError(f"unknown method {method!r}")


def ellipse_params(
    method: str,
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters = NvParameters(),
) -> EllipseParams:
    """Closed-form ellipse parameters for the qubit or perturbative trace.

    The trace satisfies ((Re - c_x)/w)^2 + (Im/h)^2 = 1 exactly. The qubit
    center sits at positive real values for positive longitudinal drive;
    the perturbative trace keeps its own sign convention (mirrored real
    axis), which leaves all distances from the origin unchanged.
    """
    if method == "qubit":
        delta, _, c_g, c_e = _qubit_constants(field, params)
        stretch = np.sqrt(1.0 + 2.0 * (params.gamma_e * field.b_perp / delta) ** 2)
        width = c_g * c_e * delta * drive.b_mw_perp / field.b_perp
        return EllipseParams(
            center=complex(c_g * c_e * params.gamma_e * drive.b_mw_z),
            half_width=float(width),
            half_height=float(width * stretch),
        )
    if method == "perturbative":
        eps, _, c_db, c_gp, c_dp = _perturbative_constants(field, params)
        return EllipseParams(
            center=complex(-c_gp * c_dp * eps * params.gamma_e * drive.b_mw_z),
            half_width=float(c_gp * c_dp * abs(c_db) * params.gamma_e * drive.b_mw_perp),
            half_height=float(c_gp * c_dp * params.gamma_e * drive.b_mw_perp),
        )
    raise ValueError(f"no closed-form ellipse for method {method!r}")
