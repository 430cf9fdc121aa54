#!/usr/bin/env python3
"""Benchmark the hot kernels with and without numba.

Run directly to time the current mode (numba unless DBSRC_DISABLE_JIT=1
is set), or with --compare to run both modes in subprocesses and print
the speedup.  JIT compilation happens in the warmup, outside the timed
sections.
"""

import argparse
import math
import os
import subprocess
import sys
import time

import dbsrc
from dbsrc import ControlReferences, ScenarioConfig, TankConfig
from dbsrc import _kernels as k
from dbsrc.power import solve_controls

TANK = TankConfig(inductance=80e-6, capacitance=47e-9, turns_ratio=1.875,
                  omega_max=2 * math.pi * 165e3)
REFS = ControlReferences(sigma_ref=0.1, delta_ref=0.0)


def bench_forward(n=200_000):
    acc = 0.0
    start = time.perf_counter()
    for i in range(n):
        d = 1.0 + 2.0 * (i % 97) / 97.0
        amp, sigma, delta, _deg = k.forward_point(d, 0.3, 0.15, 0.9)
        acc += amp + sigma + delta
    return time.perf_counter() - start, acc


def bench_lowpower_solve(n=2_000):
    h0 = dbsrc.gain_term_h(REFS, 0.7)
    z_max = dbsrc.tank_impedance(TANK.omega_max, TANK)
    w0 = TANK.turns_ratio * h0 / (2 * math.pi ** 2 * z_max)
    acc = 0.0
    start = time.perf_counter()
    for i in range(n):
        frac = 0.1 + 0.8 * (i % 53) / 53.0
        sol = solve_controls(REFS, 0.7, frac * w0, TANK)
        acc += sol.s_add
    return time.perf_counter() - start, acc


def bench_scenario():
    cfg = ScenarioConfig(duration=2.0, initial_charge_ah=3.0)
    start = time.perf_counter()
    trace = dbsrc.run_scenario(cfg)
    return time.perf_counter() - start, float(trace["I_out"][-1])


BENCHES = {
    "forward_model_200k": bench_forward,
    "lowpower_solve_2k": bench_lowpower_solve,
    "charger_2s": bench_scenario,
}


def run_current_mode():
    mode = "numba" if dbsrc.NUMBA_ENABLED else "pure-python"
    # warmup triggers JIT compilation
    k.forward_point(1.0, 0.3, 0.15, 0.9)
    solve_controls(REFS, 0.7, 1e-3, TANK)
    results = {}
    for name, fn in BENCHES.items():
        elapsed, _checksum = fn()
        results[name] = elapsed
        print(f"{mode:12s} {name:22s} {elapsed:8.3f} s")
    return results


def run_compare():
    env_jit = dict(os.environ, DBSRC_DISABLE_JIT="0")
    env_py = dict(os.environ, DBSRC_DISABLE_JIT="1")
    lines = {}
    for label, env in (("numba", env_jit), ("pure-python", env_py)):
        proc = subprocess.run([sys.executable, os.path.abspath(__file__)],
                              env=env, capture_output=True, text=True)
        sys.stdout.write(proc.stdout)
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            return proc.returncode
        for line in proc.stdout.strip().splitlines():
            parts = line.split()
            lines.setdefault(parts[1], {})[label] = float(parts[2])
    print()
    for name, timing in lines.items():
        ratio = timing["pure-python"] / timing["numba"]
        print(f"speedup {name:22s} {ratio:6.1f}x")
    return 0


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--compare", action="store_true",
                        help="run both modes in subprocesses")
    args = parser.parse_args()
    if args.compare:
        sys.exit(run_compare())
    run_current_mode()
