"""Compiled event loop.

Geometry arrives packed as in ``geometry._pack``: ``kinds[k]`` is 0 for a
straight side and 1 for a full circle; straight sides always come first.
"""

import math

import numpy as np
from numba import njit

# trajectory status codes
RUNNING = -1
TIME_BUDGET = 0
ESCAPED = 1
VERTEX = 2
EVENT_CAP = 3
NO_HIT = 4

POLICY_TERMINATE = 0
POLICY_BISECTOR = 1

TWO_PI = 2.0 * math.pi


@njit(cache=True, nogil=True)
def _line_time(packed, k, x, y, dx, dy):
    nx = packed[k, 4]
    ny = packed[k, 5]
    dn = dx * nx + dy * ny
    if dn >= 0.0:
        return np.inf
    dist = (x - packed[k, 0]) * nx + (y - packed[k, 1]) * ny
    if dist < 0.0:
        dist = 0.0
    return dist / -dn


@njit(cache=True, nogil=True)
def _arc_time(packed, k, x, y, dx, dy, floor):
    cx = packed[k, 0]
    cy = packed[k, 1]
    rad = packed[k, 2]
    px = x - cx
    py = y - cy
    b = px * dx + py * dy
    c = px * px + py * py - rad * rad
    disc = b * b - c
    if packed[k, 3] > 0.0:
        # concave wall, particle inside: far root
        if disc < 0.0:
            disc = 0.0
        t = -b + math.sqrt(disc)
    else:
        # convex scatterer, particle outside: near root, only when approaching
        if b >= 0.0 or disc <= 0.0:
            return np.inf
        t = -b - math.sqrt(disc)
    if t <= floor:
        return np.inf
    return t


@njit(cache=True, nogil=True)
def next_hit(kinds, packed, m_poly, x, y, dx, dy, floor):
    """Earliest boundary hit along the ray; returns (time, segment) or (inf, -1)."""
    best_t = np.inf
    best_k = -1
    if m_poly > 0:
        # regular polygon: the side is the one whose circumcircle arc the ray
        # crosses on the way out; check neighbours against rounding
        r = packed[0, 0]
        b = x * dx + y * dy
        c = x * x + y * y - r * r
        disc = b * b - c
        if disc < 0.0:
            disc = 0.0
        tc = -b + math.sqrt(disc)
        ang = math.atan2(y + tc * dy, x + tc * dx)
        if ang < 0.0:
            ang += TWO_PI
        k0 = int(ang / (TWO_PI / m_poly))
        for j in range(-1, 2):
            k = (k0 + j) % m_poly
            t = _line_time(packed, k, x, y, dx, dy)
            if t < best_t:
                best_t = t
                best_k = k
        return best_t, best_k
    for k in range(kinds.shape[0]):
        if kinds[k] == 0:
            t = _line_time(packed, k, x, y, dx, dy)
        else:
            t = _arc_time(packed, k, x, y, dx, dy, floor)
        if t < best_t:
            best_t = t
            best_k = k
    return best_t, best_k


@njit(cache=True, nogil=True)
def hit_normal(kinds, packed, k, hx, hy):
    if kinds[k] == 0:
        return packed[k, 4], packed[k, 5]
    nx = (hx - packed[k, 0]) / packed[k, 2]
    ny = (hy - packed[k, 1]) / packed[k, 2]
    inv = 1.0 / math.sqrt(nx * nx + ny * ny)
    if packed[k, 3] > 0.0:
        return -nx * inv, -ny * inv
    return nx * inv, ny * inv


@njit(cache=True, nogil=True)
def vertex_neighbour(kinds, packed, n_lines, k, hx, hy, eps_v):
    """Index of the side sharing the vertex near the hit, or -1."""
    if kinds[k] != 0:
        return -1
    d0 = math.hypot(hx - packed[k, 0], hy - packed[k, 1])
    if d0 <= eps_v:
        return (k - 1) % n_lines
    d1 = math.hypot(hx - packed[k, 2], hy - packed[k, 3])
    if d1 <= eps_v:
        return (k + 1) % n_lines
    return -1


@njit(cache=True, nogil=True)
def arclength(kinds, packed, k, hx, hy):
    length = packed[k, 6]
    if kinds[k] == 0:
        tx = (packed[k, 2] - packed[k, 0]) / length
        ty = (packed[k, 3] - packed[k, 1]) / length
        u = (hx - packed[k, 0]) * tx + (hy - packed[k, 1]) * ty
        if u < 0.0:
            u = 0.0
        elif u > length:
            u = length
        return packed[k, 7] + u
    ang = math.atan2(hy - packed[k, 1], hx - packed[k, 0])
    if ang < 0.0:
        ang += TWO_PI
    u = ang * packed[k, 2]
    if u >= length:
        u -= length
    return packed[k, 7] + u


@njit(cache=True, nogil=True)
def reflect(dx, dy, nx, ny):
    dn = dx * nx + dy * ny
    rx = dx - 2.0 * dn * nx
    ry = dy - 2.0 * dn * ny
    inv = 1.0 / math.sqrt(rx * rx + ry * ry)
    return rx * inv, ry * inv


@njit(cache=True, nogil=True)
def _bisector_bounce(packed, k, j, dx, dy, n_lines):
    # reflect across the vertex bisector, then unfold off either adjacent side
    # until the direction points into the table
    bx = packed[k, 4] + packed[j, 4]
    by = packed[k, 5] + packed[j, 5]
    inv = 1.0 / math.sqrt(bx * bx + by * by)
    dx, dy = reflect(dx, dy, bx * inv, by * inv)
    for _ in range(2 * n_lines + 2):
        done = True
        for w in (k, j):
            if dx * packed[w, 4] + dy * packed[w, 5] < 0.0:
                dx, dy = reflect(dx, dy, packed[w, 4], packed[w, 5])
                done = False
        if done:
            break
    return dx, dy


@njit(cache=True, nogil=True)
def advance_one(
    kinds, packed, m_poly, n_lines, perim,
    x, y, dx, dy, t, n,
    t_max, samples, counts,
    has_open, open_lo, open_w,
    cap, eps_v, policy, floor,
):
    """Run one trajectory; fills ``counts`` (collisions with time <= sample).

    Returns (status, time, collisions, x, y, dx, dy, last_segment).
    """
    n_samples = samples.shape[0]
    j = 0
    while j < n_samples and samples[j] < t:
        counts[j] = n
        j += 1
    status = RUNNING
    last = -1
    while status == RUNNING:
        dt, k = next_hit(kinds, packed, m_poly, x, y, dx, dy, floor)
        if k < 0:
            status = NO_HIT
            break
        tc = t + dt
        while j < n_samples and samples[j] < tc:
            counts[j] = n
            j += 1
        if tc > t_max:
            # free flight to the end of the budget
            rem = t_max - t
            x += rem * dx
            y += rem * dy
            t = t_max
            status = TIME_BUDGET
            break
        x += dt * dx
        y += dt * dy
        t = tc
        last = k
        if has_open:
            s = arclength(kinds, packed, k, x, y)
            d = s - open_lo
            d = d - perim * math.floor(d / perim)
            if d > 0.0 and d < open_w:
                status = ESCAPED
                break
        nb = vertex_neighbour(kinds, packed, n_lines, k, x, y, eps_v)
        if nb >= 0:
            if policy == POLICY_TERMINATE:
                status = VERTEX
                break
            dx, dy = _bisector_bounce(packed, k, nb, dx, dy, n_lines)
        else:
            nx, ny = hit_normal(kinds, packed, k, x, y)
            dx, dy = reflect(dx, dy, nx, ny)
        n += 1
        if n >= cap:
            status = EVENT_CAP
            break
    while j < n_samples:
        counts[j] = n
        j += 1
    return status, t, n, x, y, dx, dy, last


@njit(cache=True, nogil=True)
def advance_batch(
    kinds, packed, m_poly, n_lines, perim,
    x0, y0, dx0, dy0, lo, hi,
    t_max, samples, counts,
    has_open, open_lo, open_w,
    cap, eps_v, policy, floor,
    status_out, time_out, n_out,
):
    for i in range(lo, hi):
        st, t, n, _, _, _, _, _ = advance_one(
            kinds, packed, m_poly, n_lines, perim,
            x0[i], y0[i], dx0[i], dy0[i], 0.0, 0,
            t_max, samples, counts[i],
            has_open, open_lo, open_w,
            cap, eps_v, policy, floor,
        )
        status_out[i] = st
        time_out[i] = t
        n_out[i] = n
