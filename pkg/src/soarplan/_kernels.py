"""JIT-compiled numeric kernels shared by the public API and the planner hot loop.

Everything in here operates on flat float64 arrays so numba can compile it.
The public modules (`dynamics`, `wind`, `energy`) wrap these kernels in
typed dataclasses; the planner calls them directly, so both code paths run
the exact same floating-point operations.

Thermal fields are passed as an (K, 6) array with columns
(center_north, center_east, radius, core_updraft, base_height, top_height),
ambient wind as a (3,) array (north, east, down).

Status codes returned by the propagation/cost kernels:
    0  ok
    1  height dropped below the configured floor
    2  state left the world bounds
    3  non-finite state encountered
    4  ground speed fell below the degeneracy threshold
    5  height outside the density model's validity range
"""

import math

import numpy as np
from numba import njit

TWO_PI = 2.0 * math.pi

STATUS_OK = 0
STATUS_FLOOR = 1
STATUS_BOUNDS = 2
STATUS_NONFINITE = 3
STATUS_DEGENERATE = 4
STATUS_DENSITY = 5

RHO_SEA_LEVEL = 1.225
DENSITY_LAPSE = 2.2558e-5
DENSITY_EXPONENT = 4.2559


@njit(cache=True, inline="always")
def wrap_angle(x):
    # maps to [-pi, pi); identical formula is used by the pure-python wrapper
    return (x + math.pi) % TWO_PI - math.pi


@njit(cache=True, inline="always")
def wind_at_point(ambient, thermals, north, east, height):
    wn = ambient[0]
    we = ambient[1]
    wd = ambient[2]
    for i in range(thermals.shape[0]):
        if thermals[i, 4] <= height <= thermals[i, 5]:
            dn = north - thermals[i, 0]
            de = east - thermals[i, 1]
            radius = thermals[i, 2]
            wd -= thermals[i, 3] * math.exp(-(dn * dn + de * de) / (radius * radius))
    return wn, we, wd


@njit(cache=True, inline="always")
def state_rate(chi, u1, u2, u3, wn, we, wd):
    cos_gamma = math.cos(u3)
    dn = u1 * math.cos(chi) * cos_gamma + wn
    de = u1 * math.sin(chi) * cos_gamma + we
    dh = u1 * math.sin(u3) - wd
    return dn, de, u2, dh


@njit(cache=True)
def rk4_propagate(state0, controls, step_dt, substeps, ambient, thermals, h_floor, bounds):
    """Integrate the point-mass model through the wind field.

    state0   : (4,) [north, east, course, height], course already wrapped
    controls : (N, 3) [airspeed, turn_rate, flight_path_angle] per step
    bounds   : (3, 2) [min, max] for north/east/height; +-inf disables
    h_floor  : reject when height drops below; -inf disables

    Returns (knots, status) where knots is (N+1, 4). On a nonzero status the
    trailing knots are unspecified and the segment must be discarded.
    """
    n_steps = controls.shape[0]
    knots = np.empty((n_steps + 1, 4))
    n = state0[0]
    e = state0[1]
    chi = state0[2]
    h = state0[3]
    knots[0, 0] = n
    knots[0, 1] = e
    knots[0, 2] = chi
    knots[0, 3] = h
    dt = step_dt / substeps
    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(n_steps):
        u1 = controls[k, 0]
        u2 = controls[k, 1]
        u3 = controls[k, 2]
        for _ in range(substeps):
            wn, we, wd = wind_at_point(ambient, thermals, n, e, h)
            k1n, k1e, k1c, k1h = state_rate(chi, u1, u2, u3, wn, we, wd)
            wn, we, wd = wind_at_point(ambient, thermals, n + half * k1n, e + half * k1e, h + half * k1h)
            k2n, k2e, k2c, k2h = state_rate(chi + half * k1c, u1, u2, u3, wn, we, wd)
            wn, we, wd = wind_at_point(ambient, thermals, n + half * k2n, e + half * k2e, h + half * k2h)
            k3n, k3e, k3c, k3h = state_rate(chi + half * k2c, u1, u2, u3, wn, we, wd)
            wn, we, wd = wind_at_point(ambient, thermals, n + dt * k3n, e + dt * k3e, h + dt * k3h)
            k4n, k4e, k4c, k4h = state_rate(chi + dt * k3c, u1, u2, u3, wn, we, wd)
            n += sixth * (k1n + 2.0 * (k2n + k3n) + k4n)
            e += sixth * (k1e + 2.0 * (k2e + k3e) + k4e)
            chi = wrap_angle(chi + sixth * (k1c + 2.0 * (k2c + k3c) + k4c))
            h += sixth * (k1h + 2.0 * (k2h + k3h) + k4h)
            if h < h_floor:
                return knots, STATUS_FLOOR
            if not (bounds[0, 0] <= n <= bounds[0, 1]
                    and bounds[1, 0] <= e <= bounds[1, 1]
                    and bounds[2, 0] <= h <= bounds[2, 1]):
                return knots, STATUS_BOUNDS
        if not (math.isfinite(n) and math.isfinite(e) and math.isfinite(chi) and math.isfinite(h)):
            return knots, STATUS_NONFINITE
        knots[k + 1, 0] = n
        knots[k + 1, 1] = e
        knots[k + 1, 2] = chi
        knots[k + 1, 3] = h
    return knots, STATUS_OK


@njit(cache=True, inline="always")
def _step_cost_terms(north, east, chi, h, u1, u2, u3, h_next, step_dt,
                     ambient, thermals, mass, wing_area, cl0, cd0, induced,
                     oswald, eta_ec, eta_p, gravity, bank_limit):
    """Per-step energy terms evaluated at the step's start state.

    Returns (status, edot, fuel, height_rate, ground_speed).
    """
    wn, we, wd = wind_at_point(ambient, thermals, north, east, h)
    dn, de, _, dh = state_rate(chi, u1, u2, u3, wn, we, wd)
    speed = math.sqrt(dn * dn + de * de + dh * dh)
    base = 1.0 - DENSITY_LAPSE * h
    if base <= 0.0:
        return STATUS_DENSITY, 0.0, 0.0, 0.0, speed
    rho = RHO_SEA_LEVEL * base ** DENSITY_EXPONENT
    q = 0.5 * u1 * u1 * rho
    lift = q * wing_area * cl0
    drag = q * wing_area * (cd0 + induced)
    phi = math.atan(u1 * u2 / gravity)
    if phi > bank_limit:
        phi = bank_limit
    elif phi < -bank_limit:
        phi = -bank_limit
    tx = drag + mass * gravity * math.sin(u3)
    if tx < 0.0:
        tx = 0.0
    tz = lift - mass * gravity * math.cos(u3) / math.cos(phi)
    thrust = math.sqrt(tx * tx + tz * tz)
    e_fuel = -thrust * u1 / (mass * gravity * eta_ec * eta_p)
    hdot = (h_next - h) / step_dt
    hr = gravity * hdot
    return STATUS_OK, hr + e_fuel, e_fuel, hr, speed


@njit(cache=True)
def segment_cost(knots, controls, step_dt, ambient, thermals,
                 mass, wing_area, cl0, cd0, aspect_ratio, oswald,
                 eta_ec, eta_p, gravity, v_g_min, bank_limit):
    """Specific-energy bookkeeping along one propagated segment.

    Per step: height rate from the realized knot-to-knot height change,
    fuel rate from the thrust closure at the step's start knot, ground
    speed from the kinematic rates at that knot. The traversal cost is
    accumulated per ground distance, (-edot / v_g) * (v_g * dt).

    Returns (status, raw_cost, ground_distance, edot, fuel, height_rate, vg)
    where the last four are per-step arrays.
    """
    n_steps = controls.shape[0]
    edot = np.zeros(n_steps)
    fuel = np.zeros(n_steps)
    height_rate = np.zeros(n_steps)
    vg = np.zeros(n_steps)
    raw = 0.0
    dist = 0.0
    induced = cl0 * cl0 / (math.pi * aspect_ratio * oswald)
    for k in range(n_steps):
        status, ed, e_fuel, hr, speed = _step_cost_terms(
            knots[k, 0], knots[k, 1], knots[k, 2], knots[k, 3],
            controls[k, 0], controls[k, 1], controls[k, 2], knots[k + 1, 3],
            step_dt, ambient, thermals, mass, wing_area, cl0, cd0, induced,
            oswald, eta_ec, eta_p, gravity, bank_limit,
        )
        if speed < v_g_min:
            return STATUS_DEGENERATE, 0.0, 0.0, edot, fuel, height_rate, vg
        if status != STATUS_OK:
            return status, 0.0, 0.0, edot, fuel, height_rate, vg
        dd = speed * step_dt
        raw += (-ed / speed) * dd
        dist += dd
        edot[k] = ed
        fuel[k] = e_fuel
        height_rate[k] = hr
        vg[k] = speed
    return STATUS_OK, raw, dist, edot, fuel, height_rate, vg


@njit(cache=True)
def propagate_and_cost(state0, controls, step_dt, substeps, ambient, thermals,
                       h_floor, bounds, mass, wing_area, cl0, cd0, aspect_ratio,
                       oswald, eta_ec, eta_p, gravity, v_g_min, bank_limit):
    """Fused planner fast path: one pass, no knot array.

    Floating-point behavior is identical to `rk4_propagate` followed by
    `segment_cost` (same helpers, same accumulation order). Returns
    (status, end_north, end_east, end_course, end_height, raw_cost, distance).
    """
    n_steps = controls.shape[0]
    n = state0[0]
    e = state0[1]
    chi = state0[2]
    h = state0[3]
    dt = step_dt / substeps
    half = 0.5 * dt
    sixth = dt / 6.0
    raw = 0.0
    dist = 0.0
    induced = cl0 * cl0 / (math.pi * aspect_ratio * oswald)
    for k in range(n_steps):
        u1 = controls[k, 0]
        u2 = controls[k, 1]
        u3 = controls[k, 2]
        n0 = n
        e0 = e
        chi0 = chi
        h0 = h
        for _ in range(substeps):
            wn, we, wd = wind_at_point(ambient, thermals, n, e, h)
            k1n, k1e, k1c, k1h = state_rate(chi, u1, u2, u3, wn, we, wd)
            wn, we, wd = wind_at_point(ambient, thermals, n + half * k1n, e + half * k1e, h + half * k1h)
            k2n, k2e, k2c, k2h = state_rate(chi + half * k1c, u1, u2, u3, wn, we, wd)
            wn, we, wd = wind_at_point(ambient, thermals, n + half * k2n, e + half * k2e, h + half * k2h)
            k3n, k3e, k3c, k3h = state_rate(chi + half * k2c, u1, u2, u3, wn, we, wd)
            wn, we, wd = wind_at_point(ambient, thermals, n + dt * k3n, e + dt * k3e, h + dt * k3h)
            k4n, k4e, k4c, k4h = state_rate(chi + dt * k3c, u1, u2, u3, wn, we, wd)
            n += sixth * (k1n + 2.0 * (k2n + k3n) + k4n)
            e += sixth * (k1e + 2.0 * (k2e + k3e) + k4e)
            chi = wrap_angle(chi + sixth * (k1c + 2.0 * (k2c + k3c) + k4c))
            h += sixth * (k1h + 2.0 * (k2h + k3h) + k4h)
            if h < h_floor:
                return STATUS_FLOOR, n, e, chi, h, 0.0, 0.0
            if not (bounds[0, 0] <= n <= bounds[0, 1]
                    and bounds[1, 0] <= e <= bounds[1, 1]
                    and bounds[2, 0] <= h <= bounds[2, 1]):
                return STATUS_BOUNDS, n, e, chi, h, 0.0, 0.0
        if not (math.isfinite(n) and math.isfinite(e) and math.isfinite(chi) and math.isfinite(h)):
            return STATUS_NONFINITE, n, e, chi, h, 0.0, 0.0
        status, ed, _, _, speed = _step_cost_terms(
            n0, e0, chi0, h0, u1, u2, u3, h, step_dt,
            ambient, thermals, mass, wing_area, cl0, cd0, induced,
            oswald, eta_ec, eta_p, gravity, bank_limit,
        )
        if speed < v_g_min:
            return STATUS_DEGENERATE, n, e, chi, h, 0.0, 0.0
        if status != STATUS_OK:
            return status, n, e, chi, h, 0.0, 0.0
        dd = speed * step_dt
        raw += (-ed / speed) * dd
        dist += dd
    return STATUS_OK, n, e, chi, h, raw, dist
