"""Output power (transconductance) control.

The transconductance splits into an angle-dependent factor H and the
frequency-dependent tank reactance: W = n/(2 pi^2) * H / Z(omega), with
H = A(sigma*, delta*, s_add, G) * (cos(s + delta*) + cos delta*)
/ cos sigma*.  Regular operation solves Z = n H / (2 pi^2 W*) for the
above-resonance frequency.  When that frequency would exceed omega_max,
a low-power mode pins omega = omega_max and dims the output by raising
the additive short-time s_add instead; because W does not decrease
monotonically in s_add from zero, the controller first jumps to the
boundary value s_add0 past which the dimming is monotone.
"""

import math
from dataclasses import dataclass
from typing import Tuple

from . import _kernels as k
from .errors import (InfeasibleReferenceError, UnreachablePowerError,
                     ZeroPowerReferenceError)
from .inversion import ControlReferences, invert_alignment
from .model import SwitchingParams, TankConfig

SCAN_STEP = math.pi / 512
S_ADD0_TOL = 1e-9
W_REL_TOL = 0.01
@dataclass(frozen=True)
class PowerReference:
    """Desired transconductance W* = I_out* / V_in (ampere/volt)."""
    w_ref: float

    def __post_init__(self):
        if self.w_ref < 0:
            raise ValueError("W* must be non-negative")


@dataclass(frozen=True)
class PowerSolution:
    """Commutation parameters chosen by the power controller.

    low_power is set when omega was pinned at omega_max and the output
    was dimmed via s_add; achieved_w then carries the scan result,
    otherwise it equals the request exactly.
    """
    params: SwitchingParams
    s_add: float
    achieved_w: float
    low_power: bool


def gain_term_h(refs: ControlReferences, gain: float) -> float:
    """Angle-dependent transconductance factor H.

    H = A * (cos(s + delta*) + cos delta*) / cos sigma* with the
    factor-4 in-phase coefficient A evaluated at the exact inverse-map
    point for the references.

    Raises:
        InfeasibleReferenceError: propagated from the inverse map.
    """
    if abs(math.cos(refs.sigma_ref)) <= 1e-9:
        raise ValueError("cos(sigma*) too small for the H split")
    invert_alignment(refs, gain)  # surface infeasibility as an error
    h, _ok = k.h_exact(refs.sigma_ref, refs.delta_ref, refs.s_add, gain)
    return h


def required_impedance(h: float, w_ref: float, turns_ratio: float) -> float:
    """Tank reactance needed for the requested transconductance:
    Z = n H / (2 pi^2 W*).

    Raises:
        ZeroPowerReferenceError: for W* = 0 (infinite impedance; the
            caller must take the low-power/shutdown path).
    """
    if w_ref == 0:
        raise ZeroPowerReferenceError(
            "W* = 0 needs infinite impedance; use the low-power path")
    return turns_ratio * h / (2.0 * math.pi ** 2 * w_ref)


def frequency_from_impedance(z: float, tank: TankConfig) -> float:
    """Above-resonance frequency with tank reactance z:
    omega = (sqrt(C^2 Z^2 + 4 L C) + C Z) / (2 L C).

    Z = 0 gives the resonant frequency 1/sqrt(LC).
    """
    if z < 0:
        raise ValueError("Z must be non-negative (above-resonance operation)")
    return k.omega_from_impedance(z, tank.inductance, tank.capacitance)


def fully_driven_frequency(gain: float, g_star: float, w_ref: float,
                           tank: TankConfig) -> Tuple[float, float, float]:
    """Combined fully-driven feedforward law (d = pi throughout).

    (beta, s) from the stitched maps beta = acos(min(G, G*)),
    s = acos(2 G*/max(G, G*) - 1); then
    Z = 4 n (cos s + 1) / (pi^2 W*) * sqrt(1 - G cos(beta + s)) and the
    above-resonance frequency for that Z.  For G <= G* this reduces to
    W = 8 n / pi^2 * sqrt(1 - G^2) / Z.

    Returns (beta, s, omega).
    """
    if w_ref <= 0:
        raise ZeroPowerReferenceError("W* must be positive")
    if not 0.0 < g_star <= 1.0:
        raise ValueError("G* must be in (0, 1]")
    beta = math.acos(min(gain, g_star))
    s = math.acos(2.0 * g_star / max(gain, g_star) - 1.0)
    arg = max(1.0 - gain * math.cos(beta + s), 0.0)
    z = 4.0 * tank.turns_ratio * (math.cos(s) + 1.0) \
        / (math.pi ** 2 * w_ref) * math.sqrt(arg)
    return beta, s, frequency_from_impedance(z, tank)


def s_add_zero_boundary(refs: ControlReferences, gain: float) -> float:
    """Short-time boundary s_add0 with H(s_add0) = H(0).

    Found by a pi/512 bracketing scan plus bisection to 1e-9.  Past
    s_add0 the factor H (hence W at fixed frequency) is non-increasing
    up to pi.  Returns 0.0 when H never rises above H(0), i.e. the
    dimming is already monotone from the start.
    """
    invert_alignment(ControlReferences(refs.sigma_ref, refs.delta_ref, 0.0,
                                       refs.sigma_min), gain)
    return k.s_add_zero_scan(refs.sigma_ref, refs.delta_ref, gain,
                             0.0, 0.0, SCAN_STEP, S_ADD0_TOL, True)


def solve_controls(refs: ControlReferences, gain: float, w_ref: float,
                   tank: TankConfig,
                   corrections: Tuple[float, float] = (0.0, 0.0)
                   ) -> PowerSolution:
    """Full control solve: references plus power request to
    (d, s, beta, omega, s_add).

    Walks the combined inversion with the regulator corrections applied
    to q and beta, computes H, the required impedance and frequency; if
    the frequency exceeds omega_max, enters low-power mode: pins
    omega = omega_max and finds the short-time on the monotone branch of
    the dimming curve (past s_add0, skipping the non-monotonic region in
    one discontinuous step) that bisects H to the fixed-frequency
    target.  W* = 0 maps to a fully shorted secondary (s = pi) rather
    than an error.

    Raises:
        InfeasibleReferenceError: references not invertible at this gain.
        UnreachablePowerError: no s_add in [0, pi] meets the request at
            omega <= omega_max (e.g. collapsed tank current).
    """
    if w_ref < 0:
        raise ValueError("W* must be non-negative")
    sigma_reg, delta_reg = corrections
    d, s, beta, omega, s_used, h, w_got, status = k.solve_controls_scan(
        refs.sigma_ref, refs.delta_ref, refs.s_add, gain, w_ref,
        sigma_reg, delta_reg, tank.inductance, tank.capacitance,
        tank.turns_ratio, tank.omega_max, SCAN_STEP, W_REL_TOL)
    if status == k.INFEASIBLE:
        raise InfeasibleReferenceError(
            f"corrected references not invertible at G={gain}")
    if status == k.UNREACHABLE:
        raise UnreachablePowerError(
            f"W*={w_ref} unreachable at omega_max with references "
            f"(sigma*={refs.sigma_ref}, delta*={refs.delta_ref})")
    return PowerSolution(
        params=SwitchingParams(d=d, s=s, beta=beta, omega=omega),
        s_add=s_used,
        achieved_w=w_got,
        low_power=(status == k.OK_LOWPOWER),
    )
