"""Scenario configuration: text-file parsing, validation, initial conditions.

A scenario file is plain ``key = value`` text (``#`` starts a comment).  The
initial condition is one of three families: a global Gaussian equilibrium
with optional split translational/internal temperatures, a smooth periodic
density perturbation carrying a local equilibrium, or two-state data
smoothed over a few cells (raw jumps behind a flag).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .diagnostics import StabilityEnvelope
from .errors import InvalidConfig, OutOfRange, ParseError, ValidationError
from .grid import GridConfig, PhaseGrid, build_grid
from .params import SchemeParams, normalizer_discrete

IC_KINDS = ("maxwellian", "smooth", "riemann")


@dataclass
class Scenario:
    # discretization
    n_x: int
    n_v: int
    n_i: int
    dt: float
    t_final: float
    v_max: float | None = None   # default: 8*sqrt(T_ref)
    i_max: float | None = None   # default: (32*T_ref)^(delta/2)
    # model parameters
    nu: float = 0.0
    theta: float = 1.0
    delta: float = 2.0
    kappa: float = 1.0
    q: float | None = None       # default: 6 + delta
    # initial condition
    ic: str = "maxwellian"
    rho0: float = 1.0
    u0: tuple[float, float, float] = (0.0, 0.0, 0.0)
    temperature: float = 1.0
    t_tr: float | None = None    # split translational temperature
    t_int: float | None = None   # split internal temperature
    alpha: float = 0.2           # smooth-profile amplitude
    rho_left: float = 1.0
    u_left: float = 0.0
    t_left: float = 1.0
    rho_right: float = 0.125
    u_right: float = 0.0
    t_right: float = 0.8
    smooth_cells: float = 2.0
    raw_jump: bool = False
    # stability envelope ("auto", "off", or explicit constants)
    envelope: str = "off"
    c01: float | None = None
    c02: float | None = None
    a_exp: float = 2.0
    b_exp: float = 2.0
    # run options
    transport_only: bool = False
    snapshot_times: tuple[float, ...] = ()
    out_dir: str | None = None

    # ---- derived quantities ----

    def reference_temperature(self) -> float:
        if self.ic == "riemann":
            return max(self.t_left, self.t_right)
        return max(self.t_tr or self.temperature, self.t_int or self.temperature)

    def resolved_v_max(self) -> float:
        # 8 thermal standard deviations keep the truncated tail below 1e-12
        return self.v_max if self.v_max is not None else 8.0 * math.sqrt(self.reference_temperature())

    def resolved_i_max(self) -> float:
        if self.i_max is not None:
            return self.i_max
        return (32.0 * self.reference_temperature()) ** (self.delta / 2.0)

    def resolved_q(self) -> float:
        return self.q if self.q is not None else 6.0 + self.delta

    def n_steps(self) -> int:
        if self.t_final == 0.0:
            return 0
        n = self.t_final / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
            raise ValidationError("dt", f"t_final/dt = {n!r} is not an integer step count")
        return int(round(n))

    def validate(self) -> tuple[PhaseGrid, SchemeParams]:
        if self.ic not in IC_KINDS:
            raise ValidationError("ic", f"unknown initial condition {self.ic!r}")
        if self.dt <= 0:
            raise ValidationError("dt", "time step must be > 0")
        if self.t_final < 0:
            raise ValidationError("t_final", "final time must be >= 0")
        self.n_steps()
        try:
            params = SchemeParams(
                nu=self.nu, theta=self.theta, delta=self.delta,
                kappa=self.kappa, q=self.resolved_q(),
            )
        except OutOfRange as exc:
            raise ValidationError("params", str(exc)) from exc
        try:
            grid = build_grid(GridConfig(
                n_x=self.n_x, n_v=self.n_v, v_max=self.resolved_v_max(),
                n_i=self.n_i, i_max=self.resolved_i_max(),
            ))
        except InvalidConfig as exc:
            raise ValidationError("grid", str(exc)) from exc
        if self.ic == "smooth" and not 0 <= self.alpha < 1:
            raise ValidationError("alpha", "smooth amplitude must lie in [0, 1)")
        for name in ("rho0", "rho_left", "rho_right"):
            if getattr(self, name) <= 0:
                raise ValidationError(name, "densities must be positive")
        for name in ("temperature", "t_left", "t_right"):
            if getattr(self, name) <= 0:
                raise ValidationError(name, "temperatures must be positive")
        for name in ("t_tr", "t_int"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValidationError(name, "temperatures must be positive")
        return grid, params


def _gaussian_shape(v1, v2, v3, i_nodes, u, t_tr, t_int, delta, lam_delta):
    du1 = v1 - u[0]
    du2 = v2 - u[1]
    du3 = v3 - u[2]
    vel = np.exp(-(du1 * du1 + du2 * du2 + du3 * du3) / (2.0 * t_tr))
    vel /= (2.0 * math.pi * t_tr) ** 1.5
    eng = lam_delta * np.exp(-(i_nodes ** (2.0 / delta)) / t_int) / t_int ** (delta / 2.0)
    return vel * eng


def make_initial(scn: Scenario, grid: PhaseGrid):
    """Bind the scenario's initial condition to a grid as a broadcastable callable."""
    lam_delta = normalizer_discrete(scn.delta, grid)
    delta = scn.delta

    if scn.ic in ("maxwellian", "smooth"):
        t_tr = scn.t_tr if scn.t_tr is not None else scn.temperature
        t_int = scn.t_int if scn.t_int is not None else scn.temperature
        u = np.asarray(scn.u0, dtype=float)
        rho0, alpha = scn.rho0, scn.alpha
        uniform = scn.ic == "maxwellian"

        def ic(x, v1, v2, v3, i_nodes):
            rho = rho0 if uniform else rho0 * (1.0 + alpha * np.sin(2.0 * math.pi * x))
            return rho * _gaussian_shape(v1, v2, v3, i_nodes, u, t_tr, t_int, delta, lam_delta)

        return ic

    # two-state data: the "left" state fills the middle half of the periodic
    # interval, smoothed across smooth_cells cells unless raw jumps are asked for
    width = scn.smooth_cells * grid.dx

    def blend(x):
        if scn.raw_jump:
            return ((x >= 0.25) & (x < 0.75)).astype(float)
        return 0.5 * (np.tanh((x - 0.25) / width) - np.tanh((x - 0.75) / width))

    def ic(x, v1, v2, v3, i_nodes):
        chi = blend(x)
        rho = scn.rho_right + (scn.rho_left - scn.rho_right) * chi
        ux = scn.u_right + (scn.u_left - scn.u_right) * chi
        tt = scn.t_right + (scn.t_left - scn.t_right) * chi
        du1 = v1 - ux
        vel = np.exp(-(du1 * du1 + v2 * v2 + v3 * v3) / (2.0 * tt))
        vel /= (2.0 * math.pi * tt) ** 1.5
        eng = lam_delta * np.exp(-(i_nodes ** (2.0 / delta)) / tt) / tt ** (delta / 2.0)
        return rho * vel * eng

    return ic


def certified_envelope(scn: Scenario, grid: PhaseGrid) -> StabilityEnvelope | None:
    """Envelope constants certifying the initial data from below, or None.

    With explicit constants they are taken as given.  Auto mode sets the
    decay constant from the coldest temperature and the amplitude from the
    exact minimum over (velocity, energy) nodes of initial data over envelope
    shape, evaluated at the spatial minimum of the density profile; for the
    maxwellian and smooth families that infimum over all of x is attained in
    closed form, so the bound holds at arbitrary shifted positions, not just
    at spatial nodes.  Two-state data has no closed-form infimum, so it
    requires explicit constants.
    """
    if scn.envelope == "off":
        return None
    if scn.envelope not in ("auto", "explicit"):
        raise ValidationError("envelope", f"unknown envelope mode {scn.envelope!r}")
    if scn.envelope == "explicit":
        if scn.c01 is None or scn.c02 is None:
            raise ValidationError("envelope", "explicit envelope needs c01 and c02")
        return StabilityEnvelope(c01=scn.c01, c02=scn.c02, a_exp=scn.a_exp, b_exp=scn.b_exp)

    if scn.ic == "riemann":
        raise ValidationError(
            "envelope",
            "auto certification needs a maxwellian or smooth initial condition; "
            "supply explicit c01/c02 for two-state data",
        )

    a, b = scn.a_exp, scn.b_exp
    t_cold = min(scn.t_tr or scn.temperature, scn.t_int or scn.temperature)
    c02 = scn.c02 if scn.c02 is not None else 1.0 / (2.0 * t_cold)

    # density minimum over the continuum of x: rho0 for the uniform family,
    # rho0*(1 - alpha) at the trough of the sinusoid
    x_min = np.array(0.0 if scn.ic == "maxwellian" else 0.75)
    ic = make_initial(scn, grid)
    v = grid.v_axis
    profile_min = ic(
        x_min,
        v[:, None, None, None],
        v[None, :, None, None],
        v[None, None, :, None],
        grid.i_nodes[None, None, None, :],
    )

    _, _, _, vsq = grid.velocity_tables()
    shape = np.exp(-c02 * ((vsq ** (a / 2.0))[:, None] + (grid.i_nodes**b)[None, :]))
    ratio = profile_min.reshape(grid.n_v**3, grid.n_i) / shape
    c01 = float(ratio.min()) * (1.0 - 1e-9)  # headroom over the monitors' 1e-12 slack
    if c01 <= 0:
        raise ValidationError("envelope", "initial data does not admit a positive envelope")
    return StabilityEnvelope(c01=c01, c02=c02, a_exp=a, b_exp=b)


# ---- scenario file parsing ----

_INT_KEYS = {"n_x", "n_v", "n_i"}
_FLOAT_KEYS = {
    "dt", "t_final", "v_max", "i_max", "nu", "theta", "delta", "kappa", "q",
    "rho0", "temperature", "t_tr", "t_int", "alpha",
    "rho_left", "u_left", "t_left", "rho_right", "u_right", "t_right",
    "smooth_cells", "c01", "c02", "a_exp", "b_exp",
    "u0x", "u0y", "u0z",
}
_BOOL_KEYS = {"raw_jump", "transport_only"}
_STR_KEYS = {"ic", "envelope", "out_dir"}
_LIST_KEYS = {"snapshot_times"}


def parse_scenario(path) -> Scenario:
    """Parse and validate a key-value scenario file.

    Raises ParseError with the offending line number on malformed input and
    ValidationError with the field name on inadmissible values.
    """
    values: dict = {}
    u0 = [0.0, 0.0, 0.0]
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError(str(path), line_no, f"expected 'key = value', got {raw.strip()!r}")
            key, _, val = line.partition("=")
            key = key.strip().lower()
            val = val.strip()
            try:
                if key in _INT_KEYS:
                    values[key] = int(val)
                elif key in _FLOAT_KEYS:
                    if key in ("u0x", "u0y", "u0z"):
                        u0["xyz".index(key[-1])] = float(val)
                    else:
                        values[key] = float(val)
                elif key in _BOOL_KEYS:
                    values[key] = val.lower() in ("1", "true", "yes", "on")
                elif key in _STR_KEYS:
                    values[key] = val
                elif key in _LIST_KEYS:
                    values[key] = tuple(float(t) for t in val.split(",") if t.strip())
                else:
                    raise ParseError(str(path), line_no, f"unknown key {key!r}")
            except ParseError:
                raise
            except ValueError as exc:
                raise ParseError(str(path), line_no, f"bad value for {key!r}: {exc}") from exc

    for required in ("n_x", "n_v", "n_i", "dt", "t_final"):
        if required not in values:
            raise ValidationError(required, "missing required key")
    scn = Scenario(u0=tuple(u0), **values)
    scn.validate()
    return scn
