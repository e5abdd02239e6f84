"""Open-system time evolution for the three sensing schemes.

The master equation throughout is

    drho/dt = -i [H_eff, rho] - gamma * sum_j [A_j, [A_j, rho]]

with one Hermitian S_z-type noise operator A_j per site. Single-spin
schemes are integrated in the full 3-dimensional spin-1 space: H_eff is
embedded in the (g, e) block of the static eigenbasis and the noise
operator is the full S_z expressed in that eigenbasis, so leakage through
the third level is kept. Multi-spin registers keep the full 3 levels per
site as well; since H_eff and the noise are sums of single-site terms,
the many-body channel factorizes exactly into one 9x9 single-site
channel per site, which is what ghz_parity_expectation evaluates. The
direct tensor-space integrator (ghz_parity_direct) cross-checks that
factorization at small L.

Two propagation routes exist on purpose:

- propagate_lindblad: fixed-step classical RK4 on the density matrix,
  the reproducible reference integrator;
- LindbladChannel: eigendecomposition of the vectorized generator, exact
  up to roundoff and cheap to evaluate at many times (used by sweeps).

They are cross-validated against each other and against unitary
propagation at gamma = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg

from .nvmodel import (
    NvParameters,
    ReferenceDcField,
    StaticField,
    combined_static_field,
    eigensystem,
    ramsey_shift,
)
from .rabi import MicrowaveDrive, drive_operator, rabi_exact
from .spinalg import (
    hermitian_eigensystem,
    single_site_operator,
    spin1_operators,
)

#: Fixed-step bound: (||H|| + gamma * sum ||A||^2) * dt must not exceed this.
STEP_BUDGET = 0.05

#: Carrier resolution bound for the lab-frame drive integrator.
CARRIER_STEP_BUDGET = 0.2


class StepSizeError(ValueError):
    """Requested step size violates the integrator accuracy budget."""

    def __init__(self, message: str, suggested_dt: float):
        super().__init__(message)
        self.suggested_dt = suggested_dt


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive operator on the simulation space.

    space_tag is one of "spin1", "qubit_subspace", or "multispin(L)".
    """

    matrix: np.ndarray
    space_tag: str = "spin1"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def validate(
        self,
        hermit_tol: float = 1e-10,
        trace_tol: float = 1e-10,
        positivity_floor: float = -1e-8,
    ) -> None:
        m = self.matrix
        defect = float(np.max(np.abs(m - m.conj().T)))
        if defect > hermit_tol:
            raise ValueError(f"density matrix not Hermitian: defect {defect:.3e}")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density matrix trace {tr} deviates from 1")
        eigs = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if float(eigs.min()) < positivity_floor:
            raise ValueError(f"density matrix negative eigenvalue {eigs.min():.3e}")


@dataclass(frozen=True)
class NoiseModel:
    """Dephasing rate (1/us) and one Hermitian collapse operator per site."""

    gamma: float
    collapse_ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError("dephasing rate must be nonnegative")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled solution: times (us), states, and named observable series."""

    times: np.ndarray
    states: tuple[DensityMatrix, ...]
    observables: dict[str, np.ndarray] = dc_field(default_factory=dict)

    def to_csv(self, path) -> None:
        """Write time_us plus one column per observable, in insertion order."""
        names = list(self.observables)
        with open(path, "w", newline="") as fh:
            fh.write(",".join(["time_us"] + names) + "\n")
            for i, t in enumerate(self.times):
                row = [repr(float(t))] + [
                    repr(float(self.observables[n][i])) for n in names
                ]
                fh.write(",".join(row) + "\n")


def lindblad_rhs(
    h: np.ndarray, ops: tuple[np.ndarray, ...], gamma: float, rho: np.ndarray
) -> np.ndarray:
    """-i[H, rho] - gamma * sum_j [A_j, [A_j, rho]]."""
    out = -1j * (h @ rho - rho @ h)
    for a in ops:
        inner = a @ rho - rho @ a
        out -= gamma * (a @ inner - inner @ a)
    return out


def _spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def required_dt(h: np.ndarray, noise: NoiseModel) -> float:
    """Largest dt honoring the fixed-step accuracy budget."""
    scale = _spectral_norm(h) + noise.gamma * sum(
        _spectral_norm(a) ** 2 for a in noise.collapse_ops
    )
    return STEP_BUDGET / scale if scale > 0 else np.inf


def propagate_lindblad(
    h_eff: np.ndarray,
    noise: NoiseModel,
    rho0: np.ndarray | DensityMatrix,
    t_final: float,
    dt: float,
    observables: dict[str, np.ndarray] | None = None,
    sample_every: int | None = None,
    space_tag: str = "spin1",
) -> Trajectory:
    """Fixed-step RK4 integration of the dephasing master equation.

    The right-hand side is exactly trace-free and Hermiticity-preserving,
    so no renormalization is applied; trace drift stays at roundoff and is
    asserted by the test suite rather than hidden. Raises StepSizeError
    (with a suggested dt) when dt violates the accuracy budget.
    """
    rho = np.array(
        rho0.matrix if isinstance(rho0, DensityMatrix) else rho0, dtype=complex
    )
    h = np.asarray(h_eff, dtype=complex)
    ops = tuple(np.asarray(a, dtype=complex) for a in noise.collapse_ops)
    dt_max = required_dt(h, noise)
    if dt > dt_max:
        raise StepSizeError(
            f"dt = {dt:.3e} us exceeds the accuracy budget; use dt <= {dt_max:.3e}",
            suggested_dt=dt_max,
        )
    n_steps = max(1, int(np.ceil(t_final / dt)))
    if sample_every is None:
        sample_every = max(1, n_steps // 2000)
    observables = observables or {}

    times = [0.0]
    states = [rho.copy()]
    series: dict[str, list[float]] = {name: [] for name in observables}

    def record(r: np.ndarray) -> None:
        for name, op in observables.items():
            series[name].append(float(np.real(np.trace(op @ r))))

    record(rho)
    t = 0.0
    for step in range(n_steps):
        h_step = min(dt, t_final - t)
        k1 = lindblad_rhs(h, ops, noise.gamma, rho)
        k2 = lindblad_rhs(h, ops, noise.gamma, rho + 0.5 * h_step * k1)
        k3 = lindblad_rhs(h, ops, noise.gamma, rho + 0.5 * h_step * k2)
        k4 = lindblad_rhs(h, ops, noise.gamma, rho + h_step * k3)
        rho = rho + (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h_step
        if (step + 1) % sample_every == 0 or step == n_steps - 1:
            times.append(t)
            states.append(rho.copy())
            record(rho)

    return Trajectory(
        times=np.array(times),
        states=tuple(DensityMatrix(s, space_tag) for s in states),
        observables={k: np.array(v) for k, v in series.items()},
    )


def lindblad_generator(
    h: np.ndarray,
    ops: tuple[np.ndarray, ...],
    gamma: float,
    adjoint: bool = False,
) -> np.ndarray:
    """Vectorized generator on row-stacked matrices (C order).

    adjoint=False gives the Schroedinger-picture generator (acts on rho);
    adjoint=True gives the Heisenberg-picture generator (acts on
    observables); they differ only in the sign of the Hamiltonian term.
    """
    n = h.shape[0]
    eye = np.eye(n)
    sign = 1.0 if adjoint else -1.0
    gen = sign * 1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for a in ops:
        a2 = a @ a
        gen -= gamma * (
            np.kron(a2, eye) + np.kron(eye, a2.T) - 2.0 * np.kron(a, a.T)
        )
    return gen


class LindbladChannel:
    """Eigendecomposed dephasing channel for fast evaluation at many times.

    gamma = 0 is propagated unitarily through the Hermitian
    eigendecomposition of H (the generic generator eigenbasis is badly
    conditioned at the degenerate unitary point). For gamma > 0 the
    vectorized generator is diagonalized, with a reconstruction check and
    an expm fallback for near-defective cases; every route is exact to
    solver tolerance.
    """

    def __init__(
        self,
        h: np.ndarray,
        ops: tuple[np.ndarray, ...],
        gamma: float,
        adjoint: bool = False,
    ):
        h = np.asarray(h, dtype=complex)
        self.dim = h.shape[0]
        self._adjoint = adjoint
        self._unitary = gamma == 0.0 or not ops
        if self._unitary:
            self._energies, self._basis = hermitian_eigensystem(h)
            self.generator = None
            return
        self.generator = lindblad_generator(
            h,
            tuple(np.asarray(a, dtype=complex) for a in ops),
            gamma,
            adjoint,
        )
        w, v = np.linalg.eig(self.generator)
        try:
            vinv = np.linalg.inv(v)
            scale = max(float(np.linalg.norm(self.generator)), 1.0)
            residual = (
                float(np.linalg.norm((v * w) @ vinv - self.generator)) / scale
            )
        except np.linalg.LinAlgError:
            residual = np.inf
        self._use_eig = residual < 1e-12
        if self._use_eig:
            self._w = w
            self._v = v
            self._vinv = vinv

    def propagate(self, m0: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Return M(t) for each t; shape (len(times), dim, dim)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        m0 = np.asarray(m0, dtype=complex)
        if self._unitary:
            # Schroedinger: rho(t) = U rho0 U+; Heisenberg: O(t) = U+ O U.
            sign = 1.0 if self._adjoint else -1.0
            mt = self._basis.conj().T @ m0 @ self._basis
            phase = np.exp(
                sign * 1j * np.subtract.outer(self._energies, self._energies)
                * times[:, None, None]
            )
            out = np.einsum(
                "ij,kjl,ml->kim", self._basis, phase * mt, self._basis.conj()
            )
            return out
        vec0 = m0.reshape(-1)
        if self._use_eig:
            coeffs = self._vinv @ vec0
            # out[k] = V @ (exp(w t_k) * coeffs)
            out = np.einsum(
                "ij,kj->ki", self._v, np.exp(np.outer(times, self._w)) * coeffs
            )
        else:
            out = np.array(
                [scipy.linalg.expm(self.generator * t) @ vec0 for t in times]
            )
        return out.reshape(len(times), self.dim, self.dim)

    def expectation(
        self, rho0: np.ndarray, obs: np.ndarray, times: np.ndarray
    ) -> np.ndarray:
        """Tr[obs rho(t)] for each t (Schroedinger-mode channels)."""
        rhos = self.propagate(rho0, times)
        return np.real(np.einsum("ij,kji->k", np.asarray(obs, dtype=complex), rhos))


# ---------------------------------------------------------------------------
# Scheme assembly: eigenbasis embeddings of the effective Hamiltonians and
# the S_z noise operator.
# ---------------------------------------------------------------------------

def noise_operator_eigenbasis(states: np.ndarray) -> np.ndarray:
    """Full spin-1 S_z expressed in the eigenbasis with columns `states`."""
    _, _, sz = spin1_operators()
    return states.conj().T @ sz @ states


def heff_ramsey(domega: float, dim: int = 3) -> np.ndarray:
    """(domega/2) (|e><e| - |g><g|), embedded in the (g, e) block."""
    h = np.zeros((dim, dim), dtype=complex)
    h[0, 0] = -0.5 * domega
    h[1, 1] = 0.5 * domega
    return h


def heff_rabi(rabi_frequency: float, dim: int = 3) -> np.ndarray:
    """(lambda/2) (|g><e| + |e><g|), embedded in the (g, e) block."""
    h = np.zeros((dim, dim), dtype=complex)
    h[0, 1] = 0.5 * rabi_frequency
    h[1, 0] = 0.5 * rabi_frequency
    return h


@dataclass(frozen=True, eq=False)
class SchemeSetup:
    """Simulation-basis ingredients for one single-spin scheme.

    h_of(x) builds the effective Hamiltonian at working-point value x
    (the frequency shift for the Ramsey scheme, the Rabi frequency for the
    microwave scheme); rho0 and observable are fixed 3x3 matrices in the
    eigenbasis coordinates.
    """

    noise_op: np.ndarray
    rho0: np.ndarray
    observable: np.ndarray
    kind: str

    def h_of(self, x: float) -> np.ndarray:
        return heff_ramsey(x) if self.kind == "ramsey" else heff_rabi(x)


def ramsey_setup(
    field: StaticField,
    reference: ReferenceDcField,
    params: NvParameters = NvParameters(),
) -> SchemeSetup:
    """Ramsey interrogation: |+> prepared, |+_y> projected.

    The eigenbasis (and with it the noise operator) is that of the total
    static field including the transverse reference, which is present
    during the interrogation.
    """
    total = combined_static_field(field, reference)
    es = eigensystem(total, params)
    a = noise_operator_eigenbasis(es.states)
    plus = np.array([1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)
    plus_y = np.array([1j, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)
    return SchemeSetup(
        noise_op=a,
        rho0=np.outer(plus, plus.conj()),
        observable=np.outer(plus_y, plus_y.conj()),
        kind="ramsey",
    )


def rabi_setup(
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters = NvParameters(),
) -> SchemeSetup:
    """Resonant Rabi interrogation: |g> prepared, |g> population read out."""
    es = eigensystem(field, params)
    a = noise_operator_eigenbasis(es.states)
    g = np.zeros((3, 3), dtype=complex)
    g[0, 0] = 1.0
    return SchemeSetup(noise_op=a, rho0=g.copy(), observable=g, kind="rabi")


def ramsey_probability(
    field: StaticField,
    reference: ReferenceDcField,
    params: NvParameters,
    noise: NoiseModel | float,
    tau: float,
    domega: float | None = None,
) -> float:
    """P = Tr[|+_y><+_y| rho(tau)]; equals (1 + sin(domega*tau))/2 at gamma=0.

    domega overrides the working-point shift (used to probe the linear
    response); by default it is the second-order shift of the total field.
    """
    if tau <= 0:
        raise ValueError("interrogation time must be positive")
    gamma = noise.gamma if isinstance(noise, NoiseModel) else float(noise)
    if domega is None:
        domega = ramsey_shift(field, reference, params)
    setup = ramsey_setup(field, reference, params)
    ch = LindbladChannel(setup.h_of(domega), (setup.noise_op,), gamma)
    return float(ch.expectation(setup.rho0, setup.observable, np.array([tau]))[0])


def rabi_probability(
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters,
    noise: NoiseModel | float,
    tau: float,
    rabi_frequency: float | None = None,
) -> float:
    """P = Tr[|g><g| rho(tau)]; equals (1 + cos(lambda*tau))/2 at gamma=0."""
    if tau <= 0:
        raise ValueError("interrogation time must be positive")
    gamma = noise.gamma if isinstance(noise, NoiseModel) else float(noise)
    if rabi_frequency is None:
        rabi_frequency = rabi_exact(field, drive, params).frequency
    setup = rabi_setup(field, drive, params)
    ch = LindbladChannel(setup.h_of(rabi_frequency), (setup.noise_op,), gamma)
    return float(ch.expectation(setup.rho0, setup.observable, np.array([tau]))[0])


# ---------------------------------------------------------------------------
# Entangled register: GHZ state and parity readout.
# ---------------------------------------------------------------------------

#: Spec'd register bound; the factorized channel is exact at any L, the
#: bound just keeps the public contract finite.
MAX_GHZ_SITES = 10

_PARITY_FACTOR = np.diag([1.0, -1.0, 0.0]).astype(complex)
_PLUS = np.array([1.0, 1.0, 0.0], dtype=complex) / np.sqrt(2.0)
_MINUS = np.array([1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)


def _site_ingredients(
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters,
    rabi_frequency: float | None,
) -> tuple[np.ndarray, np.ndarray]:
    lam = (
        rabi_exact(field, drive, params).frequency
        if rabi_frequency is None
        else rabi_frequency
    )
    es = eigensystem(field, params)
    return heff_rabi(lam), noise_operator_eigenbasis(es.states)


def ghz_parity_from_site_channel(
    L: int, h_site: np.ndarray, noise_op: np.ndarray, gamma: float, times: np.ndarray
) -> np.ndarray:
    """Parity of the L-site GHZ state from the exact single-site channel.

    The effective Hamiltonian and the noise are sums of single-site terms,
    so the Heisenberg map factorizes: each parity factor evolves under the
    9x9 adjoint channel, and the GHZ expectation reduces to

        P(t) = (K++^L + K--^L + K+-^L + K-+^L) / 2

    with K the evolved single-site factor in the (|+>, |->) basis.
    """
    ch = LindbladChannel(h_site, (noise_op,), gamma, adjoint=True)
    ks = ch.propagate(_PARITY_FACTOR, np.atleast_1d(times))
    kpp = np.einsum("i,kij,j->k", _PLUS.conj(), ks, _PLUS)
    kmm = np.einsum("i,kij,j->k", _MINUS.conj(), ks, _MINUS)
    kpm = np.einsum("i,kij,j->k", _PLUS.conj(), ks, _MINUS)
    kmp = np.einsum("i,kij,j->k", _MINUS.conj(), ks, _PLUS)
    parity = 0.5 * (kpp**L + kmm**L + kpm**L + kmp**L)
    return np.real(parity)


def ghz_parity_expectation(
    L: int,
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters,
    noise: NoiseModel | float,
    t: float | np.ndarray,
    rabi_frequency: float | None = None,
) -> float | np.ndarray:
    """Parity expectation of the L-spin GHZ register at time t.

    Equals cos(L*lambda*t) at gamma = 0. Evaluated through the exact
    factorized single-site channel; ghz_parity_direct cross-checks the
    same master equation by direct tensor-space integration.
    """
    if not 1 <= L <= MAX_GHZ_SITES:
        raise ValueError(f"L must lie in [1, {MAX_GHZ_SITES}]")
    gamma = noise.gamma if isinstance(noise, NoiseModel) else float(noise)
    h_site, a_site = _site_ingredients(field, drive, params, rabi_frequency)
    out = ghz_parity_from_site_channel(L, h_site, a_site, gamma, np.atleast_1d(t))
    return float(out[0]) if np.isscalar(t) else out


def ghz_parity_direct(
    L: int,
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters,
    noise: NoiseModel | float,
    t_final: float,
    dt: float,
    rabi_frequency: float | None = None,
) -> Trajectory:
    """Direct tensor-space master-equation integration of the GHZ register.

    Builds the 3^L-dimensional operators explicitly and runs the RK4
    integrator; intended for small L cross-checks against the factorized
    channel (dim grows as 9^L in memory for the density matrix).
    """
    if not 1 <= L <= 4:
        raise ValueError("direct integration supported for L in [1, 4]")
    gamma = noise.gamma if isinstance(noise, NoiseModel) else float(noise)
    h_site, a_site = _site_ingredients(field, drive, params, rabi_frequency)
    h_total = sum(single_site_operator(h_site, j, L) for j in range(L))
    ops = tuple(single_site_operator(a_site, j, L) for j in range(L))

    plus_l = _PLUS.copy()
    minus_l = _MINUS.copy()
    for _ in range(L - 1):
        plus_l = np.kron(plus_l, _PLUS)
        minus_l = np.kron(minus_l, _MINUS)
    ghz = (plus_l + minus_l) / np.sqrt(2.0)
    rho0 = np.outer(ghz, ghz.conj())
    parity = single_site_operator(_PARITY_FACTOR, 0, 1)
    for j in range(1, L):
        parity = np.kron(parity, _PARITY_FACTOR)

    return propagate_lindblad(
        h_total,
        NoiseModel(gamma, ops),
        rho0,
        t_final,
        dt,
        observables={"parity": parity},
        space_tag=f"multispin({L})",
    )


# ---------------------------------------------------------------------------
# Lab-frame reference propagation (no rotating-wave approximation).
# ---------------------------------------------------------------------------

def full_drive_propagation(
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters = NvParameters(),
    t_final: float | None = None,
    dt: float | None = None,
    sample_every: int = 1,
) -> Trajectory:
    """Unitary lab-frame propagation under H0 + V cos(omega_- t).

    Starts in |g> and records eigenstate populations; the oscillation
    frequency of pop_g validates the rotating-wave Rabi frequency. dt must
    resolve the carrier (omega_- * dt <= 0.2); default is 0.1 / omega_-.
    """
    es = eigensystem(field, params)
    carrier = drive.carrier if drive.carrier is not None else es.omega_minus
    if dt is None:
        dt = 0.1 / carrier
    if carrier * dt > CARRIER_STEP_BUDGET:
        raise StepSizeError(
            f"dt = {dt:.3e} does not resolve the carrier; need dt <= "
            f"{CARRIER_STEP_BUDGET / carrier:.3e}",
            suggested_dt=CARRIER_STEP_BUDGET / carrier,
        )
    if t_final is None:
        lam = rabi_exact(field, drive, params).frequency
        t_final = 1.5 * 2.0 * np.pi / lam

    from .nvmodel import build_static_hamiltonian

    f0 = -1j * build_static_hamiltonian(field, params)
    fv = -1j * drive_operator(drive, params)
    psi = es.ground.astype(complex)
    projections = es.states.conj().T

    n_steps = int(np.ceil(t_final / dt))
    times = [0.0]
    pops = [np.abs(projections @ psi) ** 2]
    states = [np.outer(psi, psi.conj())]
    t = 0.0
    state_stride = max(1, n_steps // 256)
    dot = np.dot
    cos = np.cos
    for step in range(n_steps):
        h_step = min(dt, t_final - t)
        # one fused matrix per RK4 stage keeps the 3x3 matvec count low
        m1 = f0 + cos(carrier * t) * fv
        m_mid = f0 + cos(carrier * (t + 0.5 * h_step)) * fv
        m4 = f0 + cos(carrier * (t + h_step)) * fv
        k1 = dot(m1, psi)
        k2 = dot(m_mid, psi + 0.5 * h_step * k1)
        k3 = dot(m_mid, psi + 0.5 * h_step * k2)
        k4 = dot(m4, psi + h_step * k3)
        psi = psi + (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h_step
        if (step + 1) % sample_every == 0 or step == n_steps - 1:
            times.append(t)
            pops.append(np.abs(projections @ psi) ** 2)
            if (step + 1) % state_stride == 0 or step == n_steps - 1:
                states.append(np.outer(psi, psi.conj()))

    pops_arr = np.array(pops)
    return Trajectory(
        times=np.array(times),
        states=tuple(DensityMatrix(s, "spin1") for s in states),
        observables={
            "pop_g": pops_arr[:, 0],
            "pop_e": pops_arr[:, 1],
            "pop_b": pops_arr[:, 2],
        },
    )


def extract_oscillation_frequency(
    times: np.ndarray, values: np.ndarray, freq_guess: float | None = None
) -> float:
    """Angular frequency of a + b*cos(w t) data, robust to small ripple.

    Least-squares in (a, b_c, b_s) at fixed w, scanned over a bracket
    around the initial guess (first-minimum estimate if none given), then
    parabolically refined. Deterministic, no stochastic fitting.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if freq_guess is None:
        i_min = int(np.argmin(values))
        if i_min == 0:
            raise ValueError("cannot bracket an oscillation minimum")
        freq_guess = np.pi / times[i_min]

    def residual(w: float) -> float:
        basis = np.column_stack(
            [np.ones_like(times), np.cos(w * times), np.sin(w * times)]
        )
        coef, res, _, _ = np.linalg.lstsq(basis, values, rcond=None)
        fit = basis @ coef
        return float(np.sum((values - fit) ** 2))

    ws = freq_guess * np.linspace(0.9, 1.1, 241)
    res = np.array([residual(w) for w in ws])
    k = int(np.argmin(res))
    if 0 < k < len(ws) - 1:
        # parabolic refinement through the three bracketing residuals
        w0, w1, w2 = ws[k - 1], ws[k], ws[k + 1]
        r0, r1, r2 = res[k - 1], res[k], res[k + 1]
        denom = (r0 - 2.0 * r1 + r2)
        if denom > 0:
            return float(w1 + 0.5 * (r0 - r2) / denom * (w1 - w0))
    return float(ws[k])


# ---------------------------------------------------------------------------
# Short-time decay analysis of the GHZ parity.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShortTimeFit:
    """Polynomial decay coefficients of the parity over a short window.

    quadratic: coefficient q in 1 - P_unitary ~ q t^2 (always fitted).
    cubic: gamma-induced t^3 gain for near-axial fields, else None.
    linear: gamma-induced t decay rate for near-transverse fields, else None.
    residual: max absolute fit deviation over the window.
    window: (t_min, t_max) of the fit.
    """

    quadratic: float
    cubic: float | None
    linear: float | None
    residual: float
    window: tuple[float, float]


def short_time_fit(
    L: int,
    field: StaticField,
    drive: MicrowaveDrive,
    params: NvParameters,
    gamma: float,
    rabi_frequency: float | None = None,
) -> ShortTimeFit:
    """Fit the short-time parity decay of the L-spin GHZ register.

    The unitary part is removed by subtracting the gamma = 0 parity, so
    the fitted difference isolates the noise-induced decay. For fields
    near the NV axis the difference opens cubically; near the transverse
    plane it opens linearly. The window satisfies both gamma*t << 1 and
    L*lambda*t <= 0.3 so the polynomial model is valid.
    """
    h_site, a_site = _site_ingredients(field, drive, params, rabi_frequency)
    lam = 2.0 * abs(h_site[0, 1])
    t_max = 0.3 / (L * lam)
    if gamma > 0:
        t_max = min(t_max, 0.05 / gamma)
    if not np.isfinite(t_max) or t_max <= 0:
        raise ValueError("ill-conditioned fit window")
    ts = np.linspace(0.0, t_max, 41)[1:]

    p_gamma = ghz_parity_from_site_channel(L, h_site, a_site, gamma, ts)
    p_unit = ghz_parity_from_site_channel(L, h_site, a_site, 0.0, ts)
    diff = p_gamma - p_unit

    # scaled time keeps the Vandermonde-style bases well conditioned
    s = ts / t_max

    basis_q = np.column_stack([s**2, s**4])
    coef_q, *_ = np.linalg.lstsq(basis_q, 1.0 - p_unit, rcond=None)
    quadratic = float(coef_q[0] / t_max**2)
    resid = float(np.max(np.abs(basis_q @ coef_q - (1.0 - p_unit))))

    cubic = linear = None
    if field.theta < np.pi / 4:
        basis = np.column_stack([s**3, s**4, s**5])
        coef, *_ = np.linalg.lstsq(basis, diff, rcond=None)
        cubic = float(coef[0] / t_max**3)
    else:
        basis = np.column_stack([s, s**2, s**3])
        coef, *_ = np.linalg.lstsq(basis, diff, rcond=None)
        linear = float(-coef[0] / t_max)
    resid = max(resid, float(np.max(np.abs(basis @ coef - diff))))
    return ShortTimeFit(
        quadratic=quadratic,
        cubic=cubic,
        linear=linear,
        residual=resid,
        window=(float(ts[0]), float(ts[-1])),
    )
