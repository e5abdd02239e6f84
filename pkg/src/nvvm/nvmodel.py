"""Static NV-center physics.

Field geometry, the ground-state spin-1 Hamiltonian, the labeled
eigensystem, inversion of the two measurable transition frequencies back
to (B, theta), and the second-order frequency shift used by the
reference-DC-field Ramsey protocol.

Unit conventions (package-wide): angular frequency in rad/us, magnetic
field in mT, time in us, angles in rad. With these units the zero-field
splitting is 2*pi*2870 rad/us and the electron gyromagnetic ratio is
2*pi*28 rad/(us*mT), so all quantities of interest sit in comfortable
floating-point ranges.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field as dc_field

import numpy as np

from .spinalg import hermitian_eigensystem, spin1_operators

TAU = 2.0 * np.pi

#: Ratio gamma_e * B_total / D above which the second-order shift formula
#: starts to degrade; ramsey_shift warns past this point.
PERTURBATIVE_RATIO_WARN = 0.1

#: Energy degeneracy window, as a fraction of D, for eigenstate label
#: tie-breaking.
DEGENERACY_RTOL = 1e-9


class InconsistentTransitionsError(ValueError):
    """The transition pair is incompatible with the spin-1 level structure."""


class UndefinedAngleError(ValueError):
    """The polar angle is not defined (zero field magnitude)."""


@dataclass(frozen=True)
class NvParameters:
    """Zero-field splitting and gyromagnetic ratio, in angular units.

    d: rad/us (default 2*pi*2870, i.e. 2.87 GHz)
    gamma_e: rad/(us*mT) (default 2*pi*28, i.e. 28 GHz/T)
    """

    d: float = TAU * 2870.0
    gamma_e: float = TAU * 28.0

    def __post_init__(self) -> None:
        if self.d <= 0 or self.gamma_e <= 0:
            raise ValueError("d and gamma_e must be positive")


@dataclass(frozen=True)
class StaticField:
    """Target DC field in NV-frame spherical components.

    b: magnitude (mT), b >= 0
    theta: polar angle from the NV axis (rad), in [0, pi/2]
    phi_s: azimuth around the NV axis (rad), normalized into [0, 2*pi)
    """

    b: float
    theta: float
    phi_s: float = 0.0

    def __post_init__(self) -> None:
        if self.b < 0:
            raise ValueError("field magnitude must be nonnegative")
        if not 0.0 <= self.theta <= np.pi / 2:
            raise ValueError("theta must lie in [0, pi/2]")
        object.__setattr__(self, "phi_s", float(np.mod(self.phi_s, TAU)))

    @property
    def b_z(self) -> float:
        return self.b * np.cos(self.theta)

    @property
    def b_perp(self) -> float:
        return self.b * np.sin(self.theta)


@dataclass(frozen=True)
class ReferenceDcField:
    """Reference DC field, constrained transverse to the NV axis.

    b_r: amplitude (mT); phi_r: azimuth (rad), normalized into [0, 2*pi).
    """

    b_r: float
    phi_r: float = 0.0

    def __post_init__(self) -> None:
        if self.b_r < 0:
            raise ValueError("reference amplitude must be nonnegative")
        object.__setattr__(self, "phi_r", float(np.mod(self.phi_r, TAU)))


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Labeled eigensystem of the static Hamiltonian.

    energies: three ascending angular frequencies (rad/us)
    states: orthonormal eigenvector columns, ordered (g, e, b)
    delta: D - gamma_e * B_z (rad/us)
    omega_minus / omega_plus: g->e and g->b transition frequencies
    """

    energies: np.ndarray
    states: np.ndarray
    delta: float
    omega_minus: float = dc_field(init=False)
    omega_plus: float = dc_field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega_minus", float(self.energies[1] - self.energies[0]))
        object.__setattr__(self, "omega_plus", float(self.energies[2] - self.energies[0]))

    @property
    def ground(self) -> np.ndarray:
        return self.states[:, 0]

    @property
    def excited(self) -> np.ndarray:
        return self.states[:, 1]

    @property
    def upper(self) -> np.ndarray:
        return self.states[:, 2]


def build_static_hamiltonian(
    field: StaticField, params: NvParameters = NvParameters()
) -> np.ndarray:
    """D*S_z^2 + gamma_e*B_z*S_z + gamma_e*B_perp*(cos(phi_s)S_x + sin(phi_s)S_y)."""
    sx, sy, sz = spin1_operators()
    h = params.d * (sz @ sz) + params.gamma_e * field.b_z * sz
    h = h + params.gamma_e * field.b_perp * (
        np.cos(field.phi_s) * sx + np.sin(field.phi_s) * sy
    )
    return h


def eigensystem(
    field: StaticField, params: NvParameters = NvParameters()
) -> EigenSystem:
    """Diagonalize the static Hamiltonian and label states by energy.

    Labels are assigned strictly by ascending energy. If two energies
    coincide within DEGENERACY_RTOL * D, the tie is broken by descending
    overlap with |m_s=0> and a warning is emitted, so labeling stays
    deterministic across level crossings.
    """
    h = build_static_hamiltonian(field, params)
    energies, vectors = hermitian_eigensystem(h)
    order = list(range(3))
    tol = DEGENERACY_RTOL * params.d
    ms0_weight = np.abs(vectors[1, :]) ** 2
    for i in (0, 1):
        if abs(energies[order[i + 1]] - energies[order[i]]) < tol:
            warnings.warn(
                "near-degenerate eigenvalues; labeling by |m_s=0> overlap",
                stacklevel=2,
            )
            if ms0_weight[order[i + 1]] > ms0_weight[order[i]]:
                order[i], order[i + 1] = order[i + 1], order[i]
    energies = energies[order]
    vectors = vectors[:, order]
    delta = params.d - params.gamma_e * field.b_z
    return EigenSystem(energies=energies, states=vectors, delta=float(delta))


def characteristic_residual(
    x: float, field: StaticField, params: NvParameters = NvParameters()
) -> float:
    """Evaluate (D-x)^2*x + (1/2)*gamma_e^2*B^2*(D*(1-cos(2*theta)) - 2*x).

    Vanishes at each eigenvalue of the static Hamiltonian; the residual is
    in (rad/us)^3 and should be compared against D^3.
    """
    d = params.d
    gb2 = (params.gamma_e * field.b) ** 2
    return float(
        (d - x) ** 2 * x + 0.5 * gb2 * (d * (1.0 - np.cos(2.0 * field.theta)) - 2.0 * x)
    )


def invert_transitions(
    omega_plus: float,
    omega_minus: float,
    params: NvParameters = NvParameters(),
) -> tuple[float, float, float]:
    """Recover (x0, B, theta) from the two measured transition frequencies.

    x0 = (2D - w+ - w-) / 3
    B  = sqrt((w+^2 + w-^2 - w+*w- - D^2) / (3*gamma_e^2))
    sin(theta) = sqrt((-x0^3 + 2D*x0^2 + (gamma_e^2 B^2 - D^2)*x0) / (D*gamma_e^2*B^2))

    Radicands slightly below zero (within 1e-9 of the natural scale) are
    clamped to zero; inversion of nearly axial fields is numerically
    fragile exactly at theta -> 0. Larger violations raise
    InconsistentTransitionsError. A transition pair implying B = 0 raises
    UndefinedAngleError since theta is meaningless there.
    """
    if omega_minus <= 0 or omega_plus < omega_minus:
        raise InconsistentTransitionsError(
            f"need omega_plus >= omega_minus > 0, got ({omega_plus}, {omega_minus})"
        )
    d = params.d
    ge2 = params.gamma_e**2
    x0 = (2.0 * d - omega_plus - omega_minus) / 3.0

    rad_b = (omega_plus**2 + omega_minus**2 - omega_plus * omega_minus - d**2) / (3.0 * ge2)
    scale_b = d**2 / (3.0 * ge2)
    if rad_b < -1e-9 * scale_b:
        raise InconsistentTransitionsError(
            "inconsistent transition pair: negative field-magnitude radicand"
        )
    b = float(np.sqrt(max(rad_b, 0.0)))

    if b < 1e-12 * d / params.gamma_e:
        raise UndefinedAngleError(
            "transition pair implies zero field magnitude; polar angle undefined"
        )

    rad_sin = (-(x0**3) + 2.0 * d * x0**2 + (ge2 * b**2 - d**2) * x0) / (d * ge2 * b**2)
    if rad_sin < -1e-9 or rad_sin > 1.0 + 1e-9:
        raise InconsistentTransitionsError(
            f"inconsistent transition pair: sin^2(theta) = {rad_sin:.6g} outside [0, 1]"
        )
    rad_sin = min(max(rad_sin, 0.0), 1.0)
    theta = float(np.arcsin(np.sqrt(rad_sin)))
    return float(x0), b, theta


def transverse_field_sum(
    field: StaticField, reference: ReferenceDcField
) -> float:
    """|B_perp + B_r| as vectors in the transverse plane (mT)."""
    return float(
        np.sqrt(
            field.b_perp**2
            + reference.b_r**2
            + 2.0 * field.b_perp * reference.b_r * np.cos(field.phi_s - reference.phi_r)
        )
    )


def combined_static_field(
    field: StaticField, reference: ReferenceDcField
) -> StaticField:
    """Static field with the transverse reference added vectorially."""
    bx = field.b_perp * np.cos(field.phi_s) + reference.b_r * np.cos(reference.phi_r)
    by = field.b_perp * np.sin(field.phi_s) + reference.b_r * np.sin(reference.phi_r)
    b_perp = float(np.hypot(bx, by))
    b_z = field.b_z
    b = float(np.hypot(b_z, b_perp))
    theta = float(np.arctan2(b_perp, b_z))
    phi = float(np.arctan2(by, bx)) if b_perp > 0 else 0.0
    return StaticField(b=b, theta=theta, phi_s=phi)


def ramsey_shift(
    field: StaticField,
    reference: ReferenceDcField,
    params: NvParameters = NvParameters(),
) -> float:
    """Second-order transition shift 3*(gamma_e*B'_perp)^2 / (2D) in rad/us.

    B'_perp is the vector sum of the target transverse component and the
    reference field. The result is nonnegative, 2*pi-periodic and even in
    (phi_s - phi_r). Warns when gamma_e*B_total/D exceeds
    PERTURBATIVE_RATIO_WARN, where the second-order formula degrades.
    """
    b_perp_eff = transverse_field_sum(field, reference)
    b_total = float(np.hypot(field.b_z, b_perp_eff))
    ratio = params.gamma_e * b_total / params.d
    if ratio > PERTURBATIVE_RATIO_WARN:
        warnings.warn(
            f"gamma_e*B_total/D = {ratio:.3f} exceeds {PERTURBATIVE_RATIO_WARN}; "
            "second-order shift formula is degrading",
            stacklevel=2,
        )
    return float(1.5 * (params.gamma_e * b_perp_eff) ** 2 / params.d)


def ramsey_shift_derivative(
    field: StaticField,
    reference: ReferenceDcField,
    params: NvParameters = NvParameters(),
) -> float:
    """Closed-form d(shift)/d(phi) at phi = phi_s - phi_r, in rad/us per rad."""
    phi = field.phi_s - reference.phi_r
    return float(
        -3.0 * params.gamma_e**2 * field.b_perp * reference.b_r * np.sin(phi) / params.d
    )
