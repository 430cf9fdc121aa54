"""Command-line front end.

Subcommands emit CSV: feedforward contour grids over the reference
angles (map), open-loop reference-tracking sweeps (trajectory),
fixed-frequency dimming curves (lowpower) and the closed-loop battery
charge scenario (charge).

Configuration is a flat key = value text file (# comments allowed);
--set key=value overrides file values.  Exit codes: 0 success, 2 config
error, 3 runtime abort (partial trace still written).
"""

import argparse
import math
import sys
from typing import Callable, Dict, List, Sequence

from . import _kernels as k
from .charger import (ControllerGains, ScenarioAbort, ScenarioConfig, Trace,
                      TRACE_COLUMNS, run_scenario, Uncertainties)
from .inversion import ControlReferences
from .model import TankConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORT = 3


class ConfigError(Exception):
    pass


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path: str | None, header: Sequence[str],
              rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def parse_config_file(path: str) -> Dict[str, str]:
    values: Dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, _, value = line.partition("=")
                values[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return values


def _collect(args) -> Dict[str, str]:
    values: Dict[str, str] = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        values[key.strip()] = value.strip()
    return values


class Schema:
    """Typed view over the flat key/value config of one command."""

    def __init__(self, values: Dict[str, str], defaults: Dict[str, object]):
        unknown = set(values) - set(defaults)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        self.values = values
        self.defaults = defaults

    def get(self, key: str):
        if key not in self.values:
            return self.defaults[key]
        raw = self.values[key]
        kind = type(self.defaults[key])
        try:
            if kind is int:
                return int(raw)
            if kind is float:
                return float(raw)
        except ValueError as exc:
            raise ConfigError(f"{key}: cannot parse {raw!r}") from exc
        return raw

    def floats(self, key: str) -> List[float]:
        raw = self.values.get(key, self.defaults[key])
        if isinstance(raw, str):
            try:
                return [float(x) for x in raw.split(",") if x.strip()]
            except ValueError as exc:
                raise ConfigError(f"{key}: cannot parse {raw!r}") from exc
        return list(raw)


def _linspace(start: float, stop: float, steps: int) -> List[float]:
    if steps < 1:
        raise ConfigError("grid steps must be >= 1")
    if steps == 1:
        return [start]
    h = (stop - start) / (steps - 1)
    return [start + i * h for i in range(steps)]


MAP_DEFAULTS: Dict[str, object] = {
    "gain": 0.5, "s_add": 0.0,
    "sigma_start": -0.6, "sigma_stop": 0.6, "sigma_steps": 25,
    "delta_start": -0.6, "delta_stop": 0.6, "delta_steps": 25,
}


def cmd_map(values: Dict[str, str], out: str | None) -> int:
    cfg = Schema(values, MAP_DEFAULTS)
    gain = cfg.get("gain")
    s_add = cfg.get("s_add")
    if gain < 0:
        raise ConfigError("gain must be non-negative")
    if not 0.0 <= s_add <= math.pi:
        raise ConfigError("s_add must be in [0, pi]")
    sigmas = _linspace(cfg.get("sigma_start"), cfg.get("sigma_stop"),
                       cfg.get("sigma_steps"))
    deltas = _linspace(cfg.get("delta_start"), cfg.get("delta_stop"),
                       cfg.get("delta_steps"))
    half_pi = math.pi / 2
    for grid, name in ((sigmas, "sigma"), (deltas, "delta")):
        if any(not -half_pi <= x <= half_pi for x in grid):
            raise ConfigError(f"{name} grid leaves [-pi/2, pi/2]")

    rows = []
    for sigma_ref in sigmas:
        for delta_ref in deltas:
            d, s, beta, _smin, _boost, ok = k.invert_exact(
                sigma_ref, delta_ref, s_add, gain)
            if not ok:
                d = s = beta = math.nan
            rows.append((sigma_ref, delta_ref, d, s,
                         sigma_ref + delta_ref if math.isnan(beta) else beta,
                         int(ok)))
    write_csv(out, ("sigma_ref", "delta_ref", "d", "s", "beta", "feasible"),
              rows)
    return EXIT_OK


TRAJECTORY_DEFAULTS: Dict[str, object] = {
    "duration": 2.0, "dt": 1e-3,
    "gain_start": 0.0, "gain_stop": 2.0,
    "sigma_offset": 0.0, "sigma_amp": 0.3, "sigma_freq": 1.5,
    "delta_offset": 0.0, "delta_amp": 0.2, "delta_freq": 2.5,
    "s_add_offset": 0.0, "s_add_amp": 0.5, "s_add_freq": 1.0,
}


def cmd_trajectory(values: Dict[str, str], out: str | None) -> int:
    cfg = Schema(values, TRAJECTORY_DEFAULTS)
    duration = cfg.get("duration")
    dt = cfg.get("dt")
    if duration <= 0 or dt <= 0:
        raise ConfigError("duration and dt must be positive")
    g0, g1 = cfg.get("gain_start"), cfg.get("gain_stop")
    if g0 < 0 or g1 < 0:
        raise ConfigError("gains must be non-negative")
    off_s, amp_s, f_s = (cfg.get("sigma_offset"), cfg.get("sigma_amp"),
                         cfg.get("sigma_freq"))
    off_d, amp_d, f_d = (cfg.get("delta_offset"), cfg.get("delta_amp"),
                         cfg.get("delta_freq"))
    off_a, amp_a, f_a = (cfg.get("s_add_offset"), cfg.get("s_add_amp"),
                         cfg.get("s_add_freq"))
    half_pi = math.pi / 2
    if abs(off_s) + amp_s > half_pi or abs(off_d) + amp_d > half_pi:
        raise ConfigError("angle references leave [-pi/2, pi/2]")
    if amp_s < 0 or amp_d < 0 or amp_a < 0:
        raise ConfigError("amplitudes must be non-negative")
    if off_a < 0 or off_a + amp_a > math.pi:
        raise ConfigError("s_add references leave [0, pi]")

    n = int(round(duration / dt)) + 1
    rows = []
    for i in range(n):
        t = i * dt
        gain = g0 + (g1 - g0) * t / duration
        sigma_ref = off_s + amp_s * math.sin(2 * math.pi * f_s * t)
        delta_ref = off_d + amp_d * math.sin(2 * math.pi * f_d * t)
        s_add = off_a + amp_a * 0.5 * (1.0 - math.cos(2 * math.pi * f_a * t))
        d, s, beta, _smin, _boost, ok = k.invert_exact(
            sigma_ref, delta_ref, s_add, gain)
        if ok:
            _amp, sigma, delta, degen = k.forward_point(d, s, beta, gain)
            if degen:
                ok = False
        if not ok:
            sigma = delta = math.nan
        rows.append((t, gain, sigma_ref, delta_ref, s_add, sigma, delta,
                     d if ok else math.nan, s if ok else math.nan,
                     beta if ok else math.nan, int(ok)))
    write_csv(out, ("t", "G", "sigma_ref", "delta_ref", "s_add", "sigma",
                    "delta", "d", "s", "beta", "feasible"), rows)
    return EXIT_OK


LOWPOWER_DEFAULTS: Dict[str, object] = {
    "gains": "0.7,1.0,1.3",
    "sigma_ref": 0.1, "delta_ref": 0.0,
    "s_add_step": math.pi / 256,
}


def cmd_lowpower(values: Dict[str, str], out: str | None) -> int:
    cfg = Schema(values, LOWPOWER_DEFAULTS)
    gains = cfg.floats("gains")
    if not gains or any(g <= 0 for g in gains):
        raise ConfigError("gains must be a non-empty list of positive values")
    sigma_ref = cfg.get("sigma_ref")
    delta_ref = cfg.get("delta_ref")
    step = cfg.get("s_add_step")
    if step <= 0:
        raise ConfigError("s_add_step must be positive")
    try:
        ControlReferences(sigma_ref=sigma_ref, delta_ref=delta_ref)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if abs(math.cos(sigma_ref)) <= 1e-9:
        raise ConfigError("cos(sigma_ref) too small")

    n = int(math.ceil(math.pi / step))
    rows = []
    for gain in gains:
        h0, ok0 = k.h_exact(sigma_ref, delta_ref, 0.0, gain)
        if not ok0 or h0 <= 0:
            raise ConfigError(f"references infeasible at G={gain}")
        s_add0 = k.s_add_zero_scan(sigma_ref, delta_ref, gain, 0.0, 0.0,
                                   math.pi / 512, 1e-9, True)
        for i in range(n + 1):
            s_add = min(i * step, math.pi)
            h, ok = k.h_exact(sigma_ref, delta_ref, s_add, gain)
            rows.append((gain, s_add, h / h0 if ok else math.nan, s_add0))
    write_csv(out, ("G", "s_add", "W_over_W0", "s_add_0"), rows)
    return EXIT_OK


CHARGE_DEFAULTS: Dict[str, object] = {
    "L": 80e-6, "C": 47e-9, "n": 600.0 / 320.0, "f_max": 165e3,
    "v_in": 600.0, "i_cc": 25.0, "v_cv": 400.0,
    "dt": 1e-4, "duration": 50.0, "time_scale": 100.0,
    "sigma_ref": 0.1, "delta_ref": 0.0,
    "capacity_ah": 30.0, "v_empty": 240.0, "v_full": 400.0,
    "initial_charge_ah": 0.0,
    "sensor_tau": 5e-4, "i_ref_slew": 18.0,
    "noise_std_angle": 0.0, "noise_std_w": 0.0, "seed": 0,
    "beta_offset": -0.1, "l_scale": 1.05,
    "sigma_kp": 0.5, "sigma_ki": 200.0,
    "delta_kp": 0.5, "delta_ki": 200.0,
    "w_kp": 6.0, "w_ki": 5000.0,
    "volt_kp": 25.0, "volt_ki": 40.0,
    "decimate": 1,
}


def _trace_rows(trace: Trace, decimate: int):
    matrix = trace.column_stack()
    return [tuple(matrix[i]) for i in range(0, matrix.shape[0], decimate)]


def cmd_charge(values: Dict[str, str], out: str | None) -> int:
    cfg = Schema(values, CHARGE_DEFAULTS)
    decimate = cfg.get("decimate")
    if decimate < 1:
        raise ConfigError("decimate must be >= 1")
    try:
        tank = TankConfig(inductance=cfg.get("L"), capacitance=cfg.get("C"),
                          turns_ratio=cfg.get("n"),
                          omega_max=2 * math.pi * cfg.get("f_max"))
        scenario = ScenarioConfig(
            tank=tank, v_in=cfg.get("v_in"), i_cc=cfg.get("i_cc"),
            v_cv=cfg.get("v_cv"), dt=cfg.get("dt"),
            duration=cfg.get("duration"), time_scale=cfg.get("time_scale"),
            sigma_ref=cfg.get("sigma_ref"), delta_ref=cfg.get("delta_ref"),
            capacity_ah=cfg.get("capacity_ah"), v_empty=cfg.get("v_empty"),
            v_full=cfg.get("v_full"),
            initial_charge_ah=cfg.get("initial_charge_ah"),
            sensor_tau=cfg.get("sensor_tau"),
            i_ref_slew=cfg.get("i_ref_slew"),
            noise_std_angle=cfg.get("noise_std_angle"),
            noise_std_w=cfg.get("noise_std_w"), seed=cfg.get("seed"))
        gains = ControllerGains(
            sigma_kp=cfg.get("sigma_kp"), sigma_ki=cfg.get("sigma_ki"),
            delta_kp=cfg.get("delta_kp"), delta_ki=cfg.get("delta_ki"),
            w_kp=cfg.get("w_kp"), w_ki=cfg.get("w_ki"),
            volt_kp=cfg.get("volt_kp"), volt_ki=cfg.get("volt_ki"))
        uncertainties = Uncertainties(beta_offset=cfg.get("beta_offset"),
                                      l_scale=cfg.get("l_scale"))
        ControlReferences(sigma_ref=scenario.sigma_ref,
                          delta_ref=scenario.delta_ref)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        trace = run_scenario(scenario, gains, uncertainties)
    except ScenarioAbort as exc:
        write_csv(out, TRACE_COLUMNS, _trace_rows(exc.trace, decimate))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ABORT
    write_csv(out, TRACE_COLUMNS, _trace_rows(trace, decimate))
    return EXIT_OK


COMMANDS: Dict[str, Callable[[Dict[str, str], str | None], int]] = {
    "map": cmd_map,
    "trajectory": cmd_trajectory,
    "lowpower": cmd_lowpower,
    "charge": cmd_charge,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dbsrc",
        description="Dual-bridge series resonant converter tool: "
                    "feedforward maps, trajectory sweeps, dimming curves "
                    "and the charger scenario, as CSV.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("map", "feedforward (d, s) grid over reference angles"),
            ("trajectory", "open-loop reference sweep"),
            ("lowpower", "fixed-frequency dimming curves W/W0(s_add)"),
            ("charge", "closed-loop CC/CV charger scenario")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key = value config file")
        p.add_argument("--out", help="output CSV path (default stdout)")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config value")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        values = _collect(args)
        return COMMANDS[args.command](values, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
