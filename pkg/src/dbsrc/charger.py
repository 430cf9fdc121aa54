"""Quasi-steady-state battery-charger scenario.

Closed loop around the converter: a coulomb-counting battery model with
an Ah-to-voltage map sets the gain G; an outer CC/CV stage produces the
current reference (constant current until the pack reaches the CV
setpoint, then voltage regulation); the converter controller (parallel
compensation for sigma/delta, series compensation for W) turns it into
PWM parameters; the plant side evaluates the steady-state model with
injected uncertainties (beta offset, scaled tank inductance) and
first-order sensor lags close the loop.

The plant is algebraic; only the battery charge, the sensor filters and
the PI integrators carry state, so a fixed explicit step is exact enough
and the whole run is deterministic for a given config and seed.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels as k
from .control import ControllerIo, PiController, parallel_step
from .errors import (BelowResonanceError, DbsrcError,
                     DegenerateTankCurrentError)
from .inversion import ControlReferences
from .model import OperatingPoint, SwitchingParams, TankConfig


def default_tank() -> TankConfig:
    """Tank of the study case: C = 47 nF, L = 80 uH (resonance near
    82 kHz), 165 kHz frequency ceiling, turns ratio chosen so G = 1 is
    crossed mid-charge (n = 600 V / 320 V)."""
    return TankConfig(inductance=80e-6, capacitance=47e-9,
                      turns_ratio=600.0 / 320.0,
                      omega_max=2 * math.pi * 165e3)


@dataclass
class BatteryState:
    """Coulomb-counting pack model with a linear Ah-to-voltage map."""
    capacity_ah: float = 30.0
    charge_ah: float = 0.0
    v_empty: float = 240.0
    v_full: float = 400.0

    @property
    def voltage(self) -> float:
        frac = min(max(self.charge_ah / self.capacity_ah, 0.0), 1.0)
        return self.v_empty + (self.v_full - self.v_empty) * frac


def battery_step(b: BatteryState, i_out: float, dt: float,
                 time_scale: float = 1.0) -> BatteryState:
    """Integrate the output current into the pack charge.

    time_scale compresses physical charging time into scenario time
    (one scenario second integrates time_scale physical seconds); the
    charge is clamped at capacity.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    charge = b.charge_ah + i_out * dt * time_scale / 3600.0
    charge = min(max(charge, 0.0), b.capacity_ah)
    return replace(b, charge_ah=charge)


@dataclass(frozen=True)
class Uncertainties:
    """Plant-side model errors, invisible to the controller: a constant
    offset on the applied beta and a scale on the tank inductance."""
    beta_offset: float = -0.1
    l_scale: float = 1.05


def plant_step(p: SwitchingParams, u: Uncertainties, op: OperatingPoint,
               tank: TankConfig) -> tuple[float, float, float]:
    """True converter outputs (W, sigma, delta) before sensor lag.

    Evaluates the steady-state model with beta replaced by
    beta + beta_offset and L by L * l_scale.
    """
    if p.omega is None:
        raise ValueError("SwitchingParams.omega must be set")
    ind = tank.inductance * u.l_scale
    z = k.tank_impedance(p.omega, ind, tank.capacitance)
    if z <= 0:
        raise BelowResonanceError(
            f"plant sees Z({p.omega}) <= 0 with scaled inductance")
    beta = p.beta + u.beta_offset
    amp, sigma, delta, degenerate = k.forward_point(p.d, p.s, beta, op.gain)
    if degenerate:
        raise DegenerateTankCurrentError("plant tank current collapsed")
    w = tank.turns_ratio / (2.0 * math.pi ** 2) * amp / z \
        * (math.cos(p.s + delta) + math.cos(delta))
    return w, sigma, delta


class SensorLag:
    """Discrete first-order measurement filter with unit DC gain."""

    def __init__(self, tau: float, dt: float, initial: float = 0.0):
        if tau < 0 or dt <= 0:
            raise ValueError("need tau >= 0 and dt > 0")
        self.alpha = 1.0 if tau == 0 else 1.0 - math.exp(-dt / tau)
        self.state = initial

    def step(self, value: float) -> float:
        self.state += self.alpha * (value - self.state)
        return self.state


@dataclass(frozen=True)
class ControllerGains:
    """Loop gains; defaults settle the study-case scenario well inside
    its duration.  Angle corrections saturate at +-0.5 rad to keep the
    inversion inputs inside the reference domain."""
    sigma_kp: float = 0.5
    sigma_ki: float = 200.0
    delta_kp: float = 0.5
    delta_ki: float = 200.0
    w_kp: float = 6.0
    w_ki: float = 5000.0
    volt_kp: float = 25.0
    volt_ki: float = 40.0
    angle_corr_limit: float = 0.5
    # near G = cos(sigma*) the beta-offset uncertainty roughly halves the
    # plant amplitude, so the W correction needs headroom of order W* itself
    w_corr_limit: float = 0.25


@dataclass(frozen=True)
class ScenarioConfig:
    """Charger scenario parameters; the defaults reproduce the study
    case (600 V input, CC 25 A then CV 400 V, 30 Ah pack from 240 V to
    400 V, 100 us control step, charge compressed by time_scale)."""
    tank: TankConfig = field(default_factory=default_tank)
    v_in: float = 600.0
    i_cc: float = 25.0
    v_cv: float = 400.0
    dt: float = 1e-4
    duration: float = 50.0
    time_scale: float = 100.0
    sigma_ref: float = 0.1
    delta_ref: float = 0.0
    capacity_ah: float = 30.0
    v_empty: float = 240.0
    v_full: float = 400.0
    initial_charge_ah: float = 0.0
    sensor_tau: float = 5e-4
    i_ref_slew: float = 18.0   # A/s soft-start ramp of the current setpoint
    noise_std_angle: float = 0.0
    noise_std_w: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.v_in <= 0 or self.i_cc <= 0 or self.v_cv <= 0:
            raise ValueError("v_in, i_cc, v_cv must be positive")
        if self.dt <= 0 or self.duration <= 0 or self.time_scale <= 0:
            raise ValueError("dt, duration, time_scale must be positive")
        if self.capacity_ah <= 0:
            raise ValueError("capacity must be positive")
        if self.v_full < self.v_empty:
            raise ValueError("v_full must be >= v_empty")
        if self.i_ref_slew <= 0:
            raise ValueError("i_ref_slew must be positive")
        if self.sensor_tau < 0:
            raise ValueError("sensor_tau must be non-negative")


TRACE_COLUMNS = ("t", "G", "I_ref", "I_out", "V_bat", "d", "s", "beta",
                 "omega", "sigma", "delta", "sigma_ref", "delta_ref",
                 "s_add", "W")


@dataclass
class Trace:
    """Recorded scenario signals, one entry per control step."""
    data: dict[str, np.ndarray]
    steps: int

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[name][: self.steps]

    def column_stack(self) -> np.ndarray:
        return np.column_stack([self[c] for c in TRACE_COLUMNS])


class ScenarioAbort(DbsrcError):
    """Mid-run controller or plant failure; carries the partial trace."""

    def __init__(self, message: str, trace: Trace, step: int):
        super().__init__(message)
        self.trace = trace
        self.step = step


def run_scenario(cfg: ScenarioConfig,
                 gains: ControllerGains | None = None,
                 uncertainties: Uncertainties | None = None) -> Trace:
    """Run the CC/CV charge and record the closed-loop trace.

    The scenario traverses low-power buck (during the current ramp),
    regular buck, boost past G = 1 and finally low-power boost as the CV
    stage tapers the current.

    Raises:
        ScenarioAbort: when the controller signals unreachable power or
            the plant model degenerates; the partial trace is attached.
    """
    if gains is None:
        gains = ControllerGains()
    if uncertainties is None:
        uncertainties = Uncertainties()

    dt = cfg.dt
    n_steps = int(round(cfg.duration / dt))
    refs = ControlReferences(sigma_ref=cfg.sigma_ref,
                             delta_ref=cfg.delta_ref, s_add=0.0)

    lim = gains.angle_corr_limit
    pi_sigma = PiController(gains.sigma_kp, gains.sigma_ki, dt, -lim, lim)
    pi_delta = PiController(gains.delta_kp, gains.delta_ki, dt, -lim, lim)
    pi_w = PiController(gains.w_kp, gains.w_ki, dt,
                        -gains.w_corr_limit, gains.w_corr_limit)
    pi_volt = PiController(gains.volt_kp, gains.volt_ki, dt, 0.0, cfg.i_cc)

    battery = BatteryState(capacity_ah=cfg.capacity_ah,
                           charge_ah=cfg.initial_charge_ah,
                           v_empty=cfg.v_empty, v_full=cfg.v_full)
    lag_w = SensorLag(cfg.sensor_tau, dt)
    lag_sigma = SensorLag(cfg.sensor_tau, dt)
    lag_delta = SensorLag(cfg.sensor_tau, dt)

    noisy = cfg.noise_std_angle > 0 or cfg.noise_std_w > 0
    rng = np.random.default_rng(cfg.seed) if noisy else None

    data = {c: np.empty(n_steps) for c in TRACE_COLUMNS}
    trace = Trace(data=data, steps=0)

    i_ref = 0.0
    slew = cfg.i_ref_slew * dt
    for step in range(n_steps):
        v_bat = battery.voltage
        gain = cfg.tank.turns_ratio * v_bat / cfg.v_in

        # outer CC/CV stage: voltage PI saturated at the CC setpoint,
        # slew-limited on the way up (soft start)
        i_cmd = pi_volt.step(cfg.v_cv - v_bat)
        i_ref += min(max(i_cmd - i_ref, -slew), slew)
        w_ref = i_ref / cfg.v_in

        io = ControllerIo(refs=refs, w_ref=w_ref,
                          sigma_meas=lag_sigma.state,
                          delta_meas=lag_delta.state,
                          w_meas=lag_w.state)
        try:
            solution = parallel_step(io, pi_sigma, pi_delta, gain,
                                     cfg.tank, pi_w=pi_w)
            w_true, sigma_true, delta_true = plant_step(
                solution.params, uncertainties,
                OperatingPoint(gain=gain, v_in=cfg.v_in), cfg.tank)
        except DbsrcError as exc:
            raise ScenarioAbort(
                f"scenario aborted at step {step} (t={step * dt:.6f} s): "
                f"{exc}", trace, step) from exc

        i_out = w_true * cfg.v_in

        w_m, sigma_m, delta_m = w_true, sigma_true, delta_true
        if rng is not None:
            sigma_m += cfg.noise_std_angle * rng.standard_normal()
            delta_m += cfg.noise_std_angle * rng.standard_normal()
            w_m += cfg.noise_std_w * rng.standard_normal()
        lag_w.step(w_m)
        lag_sigma.step(sigma_m)
        lag_delta.step(delta_m)

        battery = battery_step(battery, i_out, dt, cfg.time_scale)

        p = solution.params
        row = (step * dt, gain, i_ref, i_out, v_bat, p.d, p.s, p.beta,
               p.omega, sigma_true, delta_true, refs.sigma_ref,
               refs.delta_ref, solution.s_add, w_true)
        for name, value in zip(TRACE_COLUMNS, row):
            data[name][step] = value
        trace.steps = step + 1

    return trace
