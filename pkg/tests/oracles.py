"""Independent reference implementations used only by the tests.

Each oracle is written from the written rule, with plain loops and no
calls into the package internals it is checking.
"""
from __future__ import annotations

import math
from collections import deque

import numpy as np


# -- grid geometry ----------------------------------------------------------
def spfa_path_len(occ: np.ndarray, cs: float, a: tuple[int, int], b: tuple[int, int]) -> float:
    """Label-correcting shortest path over the 8-connected free-cell graph.

    Cells are (col, row). Diagonal moves need both orthogonal cells free.
    """
    rows, cols = occ.shape

    def free(c, r):
        return 0 <= c < cols and 0 <= r < rows and not occ[r, c]

    dist = {a: 0.0}
    queue = deque([a])
    queued = {a}
    while queue:
        c, r = queue.popleft()
        queued.discard((c, r))
        for dc in (-1, 0, 1):
            for dr in (-1, 0, 1):
                if dc == dr == 0 or not free(c + dc, r + dr):
                    continue
                if dc and dr and not (free(c + dc, r) and free(c, r + dr)):
                    continue
                nd = dist[(c, r)] + cs * (math.sqrt(2.0) if dc and dr else 1.0)
                key = (c + dc, r + dr)
                if nd < dist.get(key, math.inf) - 1e-12:
                    dist[key] = nd
                    if key not in queued:
                        queue.append(key)
                        queued.add(key)
    return dist.get(b, math.inf)


def brute_neighborhood(occ: np.ndarray, cs: float, center: tuple[int, int], radius: float):
    rows, cols = occ.shape
    cx, cy = (center[0] + 0.5) * cs, (center[1] + 0.5) * cs
    out = set()
    for r in range(rows):
        for c in range(cols):
            if occ[r, c]:
                continue
            x, y = (c + 0.5) * cs, (r + 0.5) * cs
            if math.hypot(x - cx, y - cy) <= radius + 1e-9:
                out.add((c, r))
    return out


# -- belief update rules ----------------------------------------------------
def _angle_between(ux, uy, vx, vy) -> float:
    return abs(math.remainder(math.atan2(uy, ux) - math.atan2(vy, vx), 2 * math.pi))


def scalar_weights(occ, cs, pos, detected, wind, last_hit, w_hit, w_miss, half_angle_deg, r_u):
    """Weight per free cell, as a dict {(col, row): w}, by direct angle comparison."""
    rows, cols = occ.shape
    ac, ar = int(pos[0] // cs), int(pos[1] // cs)
    ax, ay = (ac + 0.5) * cs, (ar + 0.5) * cs
    alpha = math.radians(half_angle_deg)
    out = {}
    for r in range(rows):
        for c in range(cols):
            if occ[r, c]:
                continue
            x, y = (c + 0.5) * cs, (r + 0.5) * cs
            d = math.hypot(x - ax, y - ay)
            if d > r_u + 1e-9:
                out[(c, r)] = 1.0
                continue
            w = 1.0
            if detected:
                if math.hypot(*wind) == 0:
                    w = w_hit
                elif d > 0:
                    ang = _angle_between(x - ax, y - ay, -wind[0], -wind[1])
                    if ang <= alpha + 1e-12:
                        w = w_hit
                    elif ang >= math.pi - alpha - 1e-12:
                        w = w_miss
            elif last_hit is not None and (int(last_hit[0] // cs), int(last_hit[1] // cs)) != (ac, ar):
                if d > 0:
                    ang = _angle_between(x - ax, y - ay, last_hit[0] - ax, last_hit[1] - ay)
                    if ang <= alpha + 1e-12:
                        w = w_hit
                    elif ang >= math.pi - alpha - 1e-12:
                        w = w_miss
            else:
                w = w_miss
            out[(c, r)] = w
    return out


def apply_scalar(p: np.ndarray, weights: dict) -> np.ndarray:
    q = p.copy()
    for (c, r), w in weights.items():
        q[r, c] *= w
    return q / q.sum()


def entropy_loop(p: np.ndarray) -> float:
    h = 0.0
    for v in p.ravel():
        if v > 0:
            h -= v * math.log(v)
    return h


def infotaxis_oracle(occ, cs, p, pos, step, wind, last_hit, est, kernel_len):
    """Expected posterior entropy for stay + 8 compass moves; returns {k: E[H]}."""
    rows, cols = occ.shape
    dirs = [(0, 0), (1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
    out = {}
    for k, (dx, dy) in enumerate(dirs):
        n = math.hypot(dx, dy)
        c = (pos[0] + dx / n * step, pos[1] + dy / n * step) if n else pos
        if not (0 <= c[0] < cols * cs and 0 <= c[1] < rows * cs):
            continue
        if occ[int(c[1] // cs), int(c[0] // cs)]:
            continue
        cc, cr = int(c[0] // cs), int(c[1] // cs)
        pdet = 0.0
        for r in range(rows):
            for col in range(cols):
                d = math.hypot((col - cc) * cs, (r - cr) * cs)
                pdet += p[r, col] * math.exp(-d / kernel_len)
        pdet = min(1.0, pdet)
        hh = entropy_loop(apply_scalar(p, scalar_weights(
            occ, cs, c, True, wind, last_hit, est.w_hit, est.w_miss, est.cone_half_angle_deg, est.r_u)))
        hm = entropy_loop(apply_scalar(p, scalar_weights(
            occ, cs, c, False, wind, last_hit, est.w_hit, est.w_miss, est.cone_half_angle_deg, est.r_u)))
        out[k] = pdet * hh + (1 - pdet) * hm
    return out


# -- team -------------------------------------------------------------------
def swap_rate_oracle(ti, tj, pi, pj, a=1.0) -> float:
    """Case analysis form: the exponent is non-negative exactly when the
    colder robot sits at the higher potential."""
    d_inv = 1.0 / ti - 1.0 / tj
    d_phi = pi - pj
    if d_inv == 0 or d_phi == 0 or (d_inv > 0) == (d_phi > 0):
        s = a
    else:
        s = a * math.exp(d_inv * d_phi)
    return max(0.0, min(1.0, s))


def polyline(points) -> float:
    return sum(math.dist(p, q) for p, q in zip(points, points[1:]))
