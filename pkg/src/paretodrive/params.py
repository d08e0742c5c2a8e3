"""Vehicle and battery parameters, plus the key=value config file format."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import FormatError

KMH = 1.0 / 3.6  # km/h -> m/s


@dataclass(frozen=True)
class ModelParams:
    """Surrogate EV longitudinal + 2-RC Thevenin battery parameters (SI units).

    Defaults are plausible compact-EV magnitudes; every value can be
    overridden through a config file (see `load_params`).
    """

    m: float = 1200.0        # vehicle mass, kg
    r: float = 0.3           # wheel radius, m
    c0: float = 150.0        # rolling resistance, N (applied only for v > 0)
    c1: float = 1.5          # linear resistance, N s/m
    c2: float = 0.4          # aerodynamic resistance, N s^2/m^2
    Q: float = 60.0          # battery capacity, Ah
    U_oc0: float = 320.0     # open-circuit voltage at S = 0, V
    U_oc1: float = 40.0      # open-circuit voltage slope in S, V
    R0: float = 0.1          # ohmic resistance, Ohm
    R_L: float = 0.05        # long-term RC resistance, Ohm
    tau_L: float = 60.0      # long-term RC time constant, s
    R_S: float = 0.02        # short-term RC resistance, Ohm
    tau_S: float = 5.0       # short-term RC time constant, s
    eta_drive: float = 0.9   # drivetrain efficiency, traction
    eta_regen: float = 0.85  # drivetrain efficiency, regeneration
    u_min: float = -400.0    # torque lower bound, N m
    u_max: float = 400.0     # torque upper bound, N m
    I_min: float = -150.0    # battery current lower bound (charging), A
    I_max: float = 200.0     # battery current upper bound (discharging), A

    def __post_init__(self):
        if min(self.m, self.r, self.Q, self.tau_L, self.tau_S) <= 0:
            raise ValueError("masses, radii, capacities and time constants must be positive")
        if not (0 < self.eta_drive <= 1 and 0 < self.eta_regen <= 1):
            raise ValueError("efficiencies must lie in (0, 1]")
        if not self.I_min < 0 < self.I_max:
            raise ValueError("current bounds must straddle zero")
        if not self.u_min < 0 < self.u_max:
            raise ValueError("torque bounds must straddle zero")

    def as_array(self) -> np.ndarray:
        """Pack parameters into the flat float array the jitted kernels use."""
        return np.array(
            [self.m, self.r, self.c0, self.c1, self.c2, self.Q,
             self.U_oc0, self.U_oc1, self.R0, self.R_L, self.tau_L,
             self.R_S, self.tau_S, self.eta_drive, self.eta_regen,
             self.I_min, self.I_max],
            dtype=np.float64,
        )


def parse_params(text: str) -> ModelParams:
    """Parse a `name = number` per line config, '#' starts a comment."""
    known = {f.name for f in fields(ModelParams)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"expected 'name = number', got {raw!r}", line=lineno)
        name, _, rhs = line.partition("=")
        name = name.strip()
        if name not in known:
            raise FormatError(f"unknown parameter {name!r}", line=lineno)
        try:
            values[name] = float(rhs.strip())
        except ValueError:
            raise FormatError(f"bad number {rhs.strip()!r}", line=lineno) from None
    return ModelParams(**values)


def load_params(path: str | Path) -> ModelParams:
    return parse_params(Path(path).read_text(encoding="utf-8"))
