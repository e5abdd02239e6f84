"""Run configuration: one JSON document describing a simulation run.

Boundary units are experiment-friendly: frequencies in MHz (ordinary,
not angular), fields in mT, angles in degrees, times in us. Conversion to
the internal angular-frequency/radian system happens exactly once, in the
to_* accessors. Configs round-trip losslessly through JSON (floats are
serialized with shortest round-trip repr).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .nvmodel import NvParameters, ReferenceDcField, StaticField
from .rabi import MicrowaveDrive

TAU = 2.0 * np.pi

#: Axes a sweep may iterate over, with their config keys.
SWEEP_AXES = ("phi_deg", "theta_deg", "b_mt", "b_mw_mt", "b_r_mt", "L", "n")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    # NV parameters
    d_mhz: float = 2870.0
    gamma_e_mhz_per_mt: float = 28.0
    # target static field
    b_mt: float = 8.0
    theta_deg: float = 40.0
    phi_s_deg: float = 0.0
    # microwave drive
    b_mw_mt: float = 1.0
    theta_mw_deg: float = 20.0
    phi_mw_deg: float = 0.0
    # reference DC field
    b_r_mt: float = 1.0
    phi_r_deg: float = 0.0
    # noise and budget
    gamma_per_us: float = 1.0
    total_time_us: float = 1000.0
    n_max: int = 256
    # scheme and sweep
    scheme: str = "rabi_mw"
    sweep: dict[str, list] = field(default_factory=dict)
    quantities: tuple[str, ...] = ("lambda_mhz", "d_lambda_d_phi_mhz")
    # output and engine
    output_dir: str = "out"
    dt_us: float | None = None
    workers: int | None = None
    deterministic: bool = True

    def __post_init__(self) -> None:
        if self.scheme not in ("ramsey_dc", "rabi_mw", "ghz_rabi"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        if self.gamma_per_us < 0:
            raise ConfigError("gamma must be nonnegative")
        if self.total_time_us <= 0 or self.n_max < 1:
            raise ConfigError("sensing budget must be positive")
        for key, grid in self.sweep.items():
            if key not in SWEEP_AXES:
                raise ConfigError(f"unknown sweep axis {key!r}")
            if not isinstance(grid, (list, tuple)) or len(grid) == 0:
                raise ConfigError(f"sweep axis {key!r} must be a nonempty list")
        if not self.deterministic:
            raise ConfigError("only deterministic runs are supported")

    # -- unit conversion -----------------------------------------------------
    def nv_params(self) -> NvParameters:
        return NvParameters(d=TAU * self.d_mhz, gamma_e=TAU * self.gamma_e_mhz_per_mt)

    def static_field(self, **overrides) -> StaticField:
        b = overrides.get("b_mt", self.b_mt)
        theta = overrides.get("theta_deg", self.theta_deg)
        phi_s = overrides.get("phi_s_deg", self.phi_s_deg)
        return StaticField(b=b, theta=np.deg2rad(theta), phi_s=np.deg2rad(phi_s))

    def drive(self, **overrides) -> MicrowaveDrive:
        b = overrides.get("b_mw_mt", self.b_mw_mt)
        theta = overrides.get("theta_mw_deg", self.theta_mw_deg)
        phi = overrides.get("phi_mw_deg", self.phi_mw_deg)
        return MicrowaveDrive(
            b_mw=b, theta_mw=np.deg2rad(theta), phi_mw=np.deg2rad(phi)
        )

    def reference(self, **overrides) -> ReferenceDcField:
        b = overrides.get("b_r_mt", self.b_r_mt)
        phi = overrides.get("phi_r_deg", self.phi_r_deg)
        return ReferenceDcField(b_r=b, phi_r=np.deg2rad(phi))

    # -- serialization -------------------------------------------------------
    def to_dict(self) -> dict:
        out = asdict(self)
        out["quantities"] = list(self.quantities)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "quantities" in data:
            data["quantities"] = tuple(data["quantities"])
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config parse error at line {exc.lineno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(data)

    def patched(self, **overrides) -> "RunConfig":
        return replace(self, **overrides)

    def content_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()
