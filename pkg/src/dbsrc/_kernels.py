"""Scalar hot kernels for the converter model and its inverse maps.

Everything here is plain float math so that numba can compile it in
nopython mode.  The closed-loop charger simulation calls these functions
hundreds of thousands of times (once or more per control step, plus the
short-time scans), which is where essentially all runtime goes.

Set ``DBSRC_DISABLE_JIT=1`` to skip numba and run the same functions as
pure Python/numpy scalar code (slower; useful for debugging and for the
benchmark baseline).
"""

import math
import os

DEGENERATE_AMP_SQ = 1e-24   # A^2 + B^2 below this means tank-current collapse
ACOS_CLAMP_TOL = 1e-9       # tolerated overshoot of |acos argument| past 1.0
RANGE_TOL = 1e-9            # tolerated overshoot of d, s past [0, pi]

# solver status codes
OK_ANALYTIC = 0
OK_LOWPOWER = 1
INFEASIBLE = 2
UNREACHABLE = 3


def _jit_disabled() -> bool:
    return os.environ.get("DBSRC_DISABLE_JIT", "").strip().lower() in (
        "1", "true", "yes", "on")


NUMBA_ENABLED = not _jit_disabled()
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a hard dependency
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        """Identity decorator: keeps the pure-Python fallback path."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func
        return wrap


@njit(cache=True)
def clamped_acos(x):
    """acos with a small tolerance band around [-1, 1].

    Returns (value, ok).  Arguments within ACOS_CLAMP_TOL of the domain
    are clamped (boundary operating points are legitimate); anything
    further out is reported as infeasible.
    """
    if x > 1.0:
        if x > 1.0 + ACOS_CLAMP_TOL:
            return 0.0, False
        x = 1.0
    elif x < -1.0:
        if x < -1.0 - ACOS_CLAMP_TOL:
            return 0.0, False
        x = -1.0
    return math.acos(x), True


@njit(cache=True)
def harmonic_ab(d, s, beta, gain):
    """First-harmonic coefficients of the bridge voltage difference.

    A = 4 sin d + 4 G sin(beta+s) + 4 G sin beta
    B = 4 - 4 G cos(beta+s) - 4 G cos beta - 4 cos d
    """
    a = 4.0 * math.sin(d) + 4.0 * gain * math.sin(beta + s) \
        + 4.0 * gain * math.sin(beta)
    b = 4.0 - 4.0 * gain * math.cos(beta + s) - 4.0 * gain * math.cos(beta) \
        - 4.0 * math.cos(d)
    return a, b


@njit(cache=True)
def tank_impedance(omega, ind, cap):
    """Series LC reactance Z = omega*L - 1/(omega*C)."""
    return omega * ind - 1.0 / (omega * cap)


@njit(cache=True)
def omega_from_impedance(z, ind, cap):
    """Above-resonance root of Z(omega) = z.

    omega = (sqrt(C^2 Z^2 + 4 L C) + C Z) / (2 L C); z = 0 gives the
    resonant frequency 1/sqrt(LC).
    """
    return (math.sqrt(cap * cap * z * z + 4.0 * ind * cap) + cap * z) \
        / (2.0 * ind * cap)


@njit(cache=True)
def forward_point(d, s, beta, gain):
    """Alignment angles and harmonic amplitude at one switching point.

    Returns (amp, sigma, delta, degenerate) with amp = sqrt(A^2+B^2).
    When the coefficients collapse (amp^2 < DEGENERATE_AMP_SQ) the
    angles are undefined; degenerate is set and zeros are returned.
    """
    a, b = harmonic_ab(d, s, beta, gain)
    amp_sq = a * a + b * b
    if amp_sq < DEGENERATE_AMP_SQ:
        return 0.0, 0.0, 0.0, True
    sigma = math.atan2(b, a)
    return math.sqrt(amp_sq), sigma, beta - sigma, False


@njit(cache=True)
def transconductance_point(d, s, beta, omega, gain, ind, cap, ratio):
    """W = n/(2 pi^2) * sqrt(A^2+B^2)/Z * (cos(s+delta) + cos delta).

    Returns (w, ok); ok is False below resonance (Z <= 0).  The
    collapsed point returns w = 0 exactly.
    """
    z = tank_impedance(omega, ind, cap)
    if z <= 0.0:
        return 0.0, False
    amp, _sigma, delta, degenerate = forward_point(d, s, beta, gain)
    if degenerate:
        return 0.0, True
    w = ratio / (2.0 * math.pi ** 2) * amp / z \
        * (math.cos(s + delta) + math.cos(delta))
    return w, True


@njit(cache=True)
def invert_exact(sigma_ref, delta_ref, s_add, gain):
    """Closed-form inverse map: references -> commutation parameters.

    Four steps: generalized buck test
    2 cos(sigma*) >= G cos(delta* + s_add) + G cos(delta*); buck keeps
    s = s_add, boost adds s_min = acos(2 cos(sigma*)/G - cos(delta*)) -
    delta*; then d = acos(cos(sigma*) - G cos(delta*+s) - G cos(delta*))
    + sigma* and the in-phase coefficient must come out non-negative.

    Returns (d, s, beta, s_min, is_boost, feasible).
    """
    beta = sigma_ref + delta_ref
    cs = math.cos(sigma_ref)
    cd = math.cos(delta_ref)

    is_boost = 2.0 * cs < gain * (math.cos(delta_ref + s_add) + cd)
    if is_boost:
        val, ok = clamped_acos(2.0 * cs / gain - cd)
        if not ok:
            return 0.0, 0.0, beta, 0.0, True, False
        s_min = val - delta_ref
        s = s_min + s_add
    else:
        s_min = 0.0
        s = s_add

    if is_boost and s_add == 0.0:
        # at s = s_min the acos argument is -cos(sigma*) analytically;
        # evaluating it numerically loses ~sqrt(eps) near the acos
        # endpoint, so take the exact root directly
        d = math.pi + sigma_ref - abs(sigma_ref)
        ok = True
    else:
        val, ok = clamped_acos(cs - gain * math.cos(delta_ref + s) - gain * cd)
        d = val + sigma_ref
    if not ok:
        return 0.0, s, beta, s_min, is_boost, False

    feasible = True
    if d < -RANGE_TOL or d > math.pi + RANGE_TOL:
        feasible = False
    if s < -RANGE_TOL or s > math.pi + RANGE_TOL:
        feasible = False
    d = min(max(d, 0.0), math.pi)
    s = min(max(s, 0.0), math.pi)

    # post-hoc check: A = sin d + G sin(beta+s) + G sin beta >= 0
    a1 = math.sin(d) + gain * math.sin(beta + s) + gain * math.sin(beta)
    if a1 < -1e-12:
        feasible = False
    return d, s, beta, s_min, is_boost, feasible


@njit(cache=True)
def q_reference(sigma_ref, delta_ref, s_add, gain):
    """Combined duty variable q for the references.

    Buck: q = acos(cos(sigma*) - G cos(delta*) - G cos(delta*+s_add))
    + sigma*; boost: q = 2 pi - acos(cos(delta*) - (2/G) cos(sigma*))
    - delta* + s_add.  Branch selected by the generalized buck test.

    Returns (q, is_boost, feasible).
    """
    cs = math.cos(sigma_ref)
    cd = math.cos(delta_ref)
    is_boost = 2.0 * cs < gain * (math.cos(delta_ref + s_add) + cd)
    if is_boost:
        val, ok = clamped_acos(cd - 2.0 * cs / gain)
        if not ok:
            return 0.0, True, False
        q = 2.0 * math.pi - val - delta_ref + s_add
    else:
        val, ok = clamped_acos(cs - gain * cd - gain * math.cos(delta_ref + s_add))
        if not ok:
            return 0.0, False, False
        q = val + sigma_ref
    return q, is_boost, False if q < -RANGE_TOL or q > 2.0 * math.pi + RANGE_TOL else True


@njit(cache=True)
def regulated_point(sigma_ref, delta_ref, s_add, gain, sigma_reg, delta_reg):
    """One pass of the combined inversion with regulator corrections.

    q and beta come from the reference maps; the external controller
    actions are then added (q += sigma_reg, beta += delta_reg) and q is
    split into (d, s): d = q, s = s_add while q <= pi, else d = pi,
    s = q - pi.  Returns (d, s, beta, h, feasible) where h is the
    angle-dependent transconductance factor
    A * (cos(s + delta*) + cos(delta*)) / cos(sigma*) with the factor-4
    in-phase coefficient A.
    """
    q, _is_boost, feasible = q_reference(sigma_ref, delta_ref, s_add, gain)
    beta = sigma_ref + delta_ref + delta_reg
    q = q + sigma_reg
    if q < 0.0:
        q = 0.0
    elif q > 2.0 * math.pi:
        q = 2.0 * math.pi
    if beta < -math.pi:
        beta = -math.pi
    elif beta > math.pi:
        beta = math.pi
    if q <= math.pi:
        d = q
        s = s_add
    else:
        d = math.pi
        s = q - math.pi
    if s > math.pi:
        s = math.pi
    a4 = 4.0 * math.sin(d) + 4.0 * gain * math.sin(beta + s) \
        + 4.0 * gain * math.sin(beta)
    h = a4 * (math.cos(s + delta_ref) + math.cos(delta_ref)) \
        / math.cos(sigma_ref)
    return d, s, beta, h, feasible


@njit(cache=True)
def h_exact(sigma_ref, delta_ref, s_add, gain):
    """Angle factor H along the exact inverse map.

    Returns (h, feasible).
    """
    d, s, beta, _s_min, _is_boost, feasible = invert_exact(
        sigma_ref, delta_ref, s_add, gain)
    if not feasible:
        return 0.0, False
    a4 = 4.0 * math.sin(d) + 4.0 * gain * math.sin(beta + s) \
        + 4.0 * gain * math.sin(beta)
    h = a4 * (math.cos(s + delta_ref) + math.cos(delta_ref)) \
        / math.cos(sigma_ref)
    return h, True


@njit(cache=True)
def _h_for_scan(sigma_ref, delta_ref, s_add, gain, sigma_reg, delta_reg,
                use_exact):
    if use_exact:
        h, ok = h_exact(sigma_ref, delta_ref, s_add, gain)
    else:
        _d, _s, _b, h, ok = regulated_point(
            sigma_ref, delta_ref, s_add, gain, sigma_reg, delta_reg)
    if not ok:
        return 0.0
    return h


@njit(cache=True)
def s_add_zero_scan(sigma_ref, delta_ref, gain, sigma_reg, delta_reg,
                    step, tol, use_exact):
    """Boundary short-time s_add0 past which H decreases monotonically.

    Solves H(s_add0) = H(0) by locating the last grid cell where H still
    exceeds H(0), then bisecting the down-crossing.  Returns 0.0 when H
    never rises above H(0) (already monotone from the start).
    """
    h0 = _h_for_scan(sigma_ref, delta_ref, 0.0, gain, sigma_reg, delta_reg,
                     use_exact)
    if h0 <= 0.0:
        return 0.0
    eps = 1e-12 * (1.0 + abs(h0))
    n = int(math.ceil(math.pi / step))
    last_above = -1
    for k in range(1, n + 1):
        x = min(k * step, math.pi)
        h = _h_for_scan(sigma_ref, delta_ref, x, gain, sigma_reg, delta_reg,
                        use_exact)
        if h > h0 + eps:
            last_above = k
    if last_above < 0:
        return 0.0
    lo = min(last_above * step, math.pi)
    hi = min((last_above + 1) * step, math.pi)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        h = _h_for_scan(sigma_ref, delta_ref, mid, gain, sigma_reg, delta_reg,
                        use_exact)
        if h > h0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def solve_controls_scan(sigma_ref, delta_ref, s_add_req, gain, w_ref,
                        sigma_reg, delta_reg, ind, cap, ratio, omega_max,
                        scan_step, w_rel_tol):
    """Outer power-control loop: pick (d, s, beta, omega, s_add).

    Analytic branch: at the requested s_add compute the angle factor H,
    the required impedance Z = n H / (2 pi^2 W*) and the above-resonance
    frequency; if it fits under omega_max, done.  Otherwise pin
    omega = omega_max and dim via the short-time: H(s_add) is
    non-monotone from 0 but ends at 0 at pi, so locate the rightmost
    crossing of the target H* = 2 pi^2 Z_max W* / n by scanning down
    from pi (this lands on the final monotone branch, past the
    discontinuous jump from the s_add = 0 operating point) and refine
    by bisection.

    Returns (d, s, beta, omega, s_add_used, h, w_achieved, status).
    """
    if w_ref <= 0.0:
        # zero power: fully shorted secondary
        d, s, beta, h, ok = regulated_point(
            sigma_ref, delta_ref, math.pi, gain, sigma_reg, delta_reg)
        return d, s, beta, omega_max, math.pi, h, 0.0, OK_LOWPOWER

    d, s, beta, h, ok = regulated_point(
        sigma_ref, delta_ref, s_add_req, gain, sigma_reg, delta_reg)
    if not ok:
        return d, s, beta, 0.0, s_add_req, h, 0.0, INFEASIBLE
    if h <= 1e-9:
        # collapsed tank current (H is rounding noise): no frequency
        # reaches any positive power
        return d, s, beta, 0.0, s_add_req, h, 0.0, UNREACHABLE

    z = ratio * h / (2.0 * math.pi ** 2 * w_ref)
    omega = omega_from_impedance(z, ind, cap)
    if omega <= omega_max * (1.0 + 1e-12):
        return d, s, beta, omega, s_add_req, h, w_ref, OK_ANALYTIC

    # low-power branch at fixed omega_max
    z_max = tank_impedance(omega_max, ind, cap)
    h_target = 2.0 * math.pi ** 2 * z_max * w_ref / ratio

    hi = math.pi            # h(pi) = 0 <= h_target
    lo = -1.0
    x = math.pi - scan_step
    while x > s_add_req:
        _d, _s, _b, hx, okx = regulated_point(
            sigma_ref, delta_ref, x, gain, sigma_reg, delta_reg)
        if not okx:
            hx = 0.0
        if hx > h_target:
            lo = x
            break
        hi = x
        x -= scan_step
    if lo < 0.0:
        lo = s_add_req      # h(s_add_req) > h_target, established above

    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        _d, _s, _b, hm, okm = regulated_point(
            sigma_ref, delta_ref, mid, gain, sigma_reg, delta_reg)
        if not okm:
            hm = 0.0
        if hm > h_target:
            lo = mid
        else:
            hi = mid
    s_used = 0.5 * (lo + hi)
    d, s, beta, h, ok = regulated_point(
        sigma_ref, delta_ref, s_used, gain, sigma_reg, delta_reg)
    w_achieved = ratio * h / (2.0 * math.pi ** 2 * z_max)
    status = OK_LOWPOWER
    if abs(w_achieved - w_ref) > w_rel_tol * w_ref:
        status = UNREACHABLE
    return d, s, beta, omega_max, s_used, h, w_achieved, status
