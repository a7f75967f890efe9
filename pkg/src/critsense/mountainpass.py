"""Discretized minimax path search between two peaks on a convex domain.

Between two probe-verified local maxima, the pass value is the largest
achievable minimum of f along a connecting path. Piecewise-linear paths
are improved by projected gradient ascent on their minimal knots; the
final pass point is certified either as an interior critical point or as
a boundary point where the level set runs tangent to the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detect import refine_newton
from .domains import Ball, Box, Domain, Interval
from .errors import (ConvexityError, NoConvergenceError, NoSeparationError,
                     PreconditionError, UsageError)
from .fields import ScalarField

_SMOOTH = 0.3
_BOW_FACTORS = (-0.6, 0.0, 0.6)


@dataclass
class PassResult:
    p3: np.ndarray
    c: float
    kind: str  # "InteriorCritical" or "BoundaryTangency"
    path: np.ndarray
    certificate: dict
    f_p1: float
    f_p2: float

    def as_record(self) -> dict:
        return {
            "p3": self.p3.tolist(),
            "c": self.c,
            "kind": self.kind,
            "path": self.path.tolist(),
            "certificate": dict(self.certificate),
            "f_p1": self.f_p1,
            "f_p2": self.f_p2,
        }


def _perp_direction(delta: np.ndarray) -> np.ndarray | None:
    d = len(delta)
    if d < 2:
        return None
    n = np.linalg.norm(delta)
    if n == 0:
        return None
    u = delta / n
    if d == 2:
        return np.array([-u[1], u[0]])
    basis = np.eye(d)
    cand = basis[int(np.argmin(np.abs(u)))]
    v = cand - np.dot(cand, u) * u
    return v / np.linalg.norm(v)


def _initial_path(p1, p2, n_knots: int, bow: float) -> np.ndarray:
    t = np.linspace(0.0, 1.0, n_knots + 2)
    base = p1[None, :] + t[:, None] * (p2 - p1)[None, :]
    if bow != 0.0:
        perp = _perp_direction(p2 - p1)
        if perp is not None:
            amp = bow * 0.5 * float(np.linalg.norm(p2 - p1))
            base = base + (amp * np.sin(np.pi * t))[:, None] * perp[None, :]
    return base


def _resample_path(knots: np.ndarray) -> np.ndarray:
    """Redistribute knots to equal arc length along the polyline.

    Without this, ascent tears the path apart: knots drift up both
    peaks, the spanning segment skips the valley, and the knot minimum
    stops measuring the path minimum."""
    seg = np.linalg.norm(np.diff(knots, axis=0), axis=1)
    total = float(np.sum(seg))
    if total == 0.0:
        return knots.copy()
    s = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, total, len(knots))
    out = np.empty_like(knots)
    for j in range(knots.shape[1]):
        out[:, j] = np.interp(targets, s, knots[:, j])
    out[0] = knots[0]
    out[-1] = knots[-1]
    return out


def _ascend_path(field: ScalarField, domain: Domain, knots: np.ndarray,
                 iters: int, step: float):
    """Projected gradient ascent on the minimal knots with neighbor
    smoothing and arc-length resampling; the path minimum never
    decreases across accepted iterations."""
    knots = knots.copy()
    for i in range(len(knots)):
        knots[i] = domain.project(knots[i])
    vals = np.asarray(field.value(knots), dtype=float)
    if len(knots) > 2:
        cur_min = float(np.min(vals[1:-1]))
    else:
        cur_min = float(np.min(vals))
    h = step
    for _ in range(iters):
        if np.ptp(vals) == 0.0:
            break  # constant along the path, nothing to improve
        inner = knots[1:-1]
        if len(inner) == 0:
            break
        ivals = vals[1:-1]
        tie_tol = 1e-12 * max(1.0, abs(cur_min))
        tied = ivals <= cur_min + tie_tol
        grads = field.grad(inner[tied])
        cand = knots.copy()
        cand[1:-1][tied] += h * grads
        # tangential-only smoothing: isotropic smoothing cuts corners,
        # dragging outward-bowed paths off the boundary they must hug
        mid = 0.5 * (cand[:-2] + cand[2:])
        disp = _SMOOTH * (mid - cand[1:-1])
        tang = cand[2:] - cand[:-2]
        tnorm = np.linalg.norm(tang, axis=1, keepdims=True)
        tang = np.divide(tang, tnorm, out=np.zeros_like(tang),
                         where=tnorm > 0)
        cand[1:-1] += np.sum(disp * tang, axis=1, keepdims=True) * tang
        cand = _resample_path(cand)
        for i in range(1, len(cand) - 1):
            cand[i] = domain.project(cand[i])
        cvals = np.asarray(field.value(cand), dtype=float)
        new_min = float(np.min(cvals[1:-1]))
        if new_min >= cur_min:
            knots, vals, cur_min = cand, cvals, new_min
            h = min(h * 1.2, step * 10.0)
        else:
            h *= 0.5
            if h < 1e-15 * max(1.0, step):
                break
    return knots, cur_min


def minimax_over_paths(field: ScalarField, domain: Domain, p1, p2,
                       n_knots: int = 16, iters: int = 400,
                       step: float | None = None):
    """Optimize a single straight-initialized path; returns (path, value)
    with value = min of f over the movable knots.

    A constant field terminates immediately with the constant as value.
    """
    if not domain.convex:
        raise ConvexityError("path projection needs a convex domain")
    if n_knots < 1:
        raise UsageError("n_knots must be >= 1")
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if step is None:
        step = 0.02 * domain.diameter
    knots = _initial_path(p1, p2, n_knots, 0.0)
    return _ascend_path(field, domain, knots, iters, step)


def _probe_local_max(field: ScalarField, domain: Domain, p: np.ndarray,
                     radius: float, n_probe: int = 48) -> bool:
    fp = float(field.value(p))
    r = radius
    for _ in range(5):
        if field.dim == 1:
            ring = p[None, :] + np.array([[r], [-r]])
        elif field.dim == 2:
            t = 2.0 * np.pi * (np.arange(n_probe) + 0.5) / n_probe
            ring = p[None, :] + r * np.stack([np.cos(t), np.sin(t)], axis=-1)
        else:
            rng = np.random.default_rng(7)
            raw = rng.standard_normal((n_probe, field.dim))
            raw /= np.linalg.norm(raw, axis=1, keepdims=True)
            ring = p[None, :] + r * raw
        ok = np.asarray(domain.contains(ring))
        if np.sum(ok) >= max(2, n_probe // 4):
            return bool(np.all(np.asarray(field.value(ring[ok])) < fp))
        r *= 0.5
    return False


def _ball_tangency(field: ScalarField, domain: Ball, p_raw: np.ndarray):
    rel = p_raw - domain.center
    theta0 = float(np.arctan2(rel[1], rel[0]))

    def h(theta: float) -> float:
        pt = domain.angle_point(theta)
        t = np.array([-np.sin(theta), np.cos(theta)])
        return float(np.dot(field.grad(pt), t))

    span = 0.6
    n_scan = 96
    thetas = theta0 + np.linspace(-span, span, n_scan)
    hs = np.array([h(t) for t in thetas])
    best = None
    for i in range(n_scan - 1):
        if hs[i] == 0.0:
            best = (thetas[i], thetas[i])
            break
        if hs[i] * hs[i + 1] < 0:
            mid = 0.5 * (thetas[i] + thetas[i + 1])
            if best is None or abs(mid - theta0) < abs(
                    0.5 * (best[0] + best[1]) - theta0):
                best = (thetas[i], thetas[i + 1])
    if best is None:
        return None
    a, b = best
    fa = h(a)
    for _ in range(90):
        m = 0.5 * (a + b)
        fm = h(m)
        if fm == 0.0:
            a = b = m
            break
        if fa * fm < 0:
            b = m
        else:
            a, fa = m, fm
    theta = 0.5 * (a + b)
    return domain.angle_point(theta), abs(h(theta))


def _box_tangency(field: ScalarField, domain: Box, p_raw: np.ndarray):
    best = None
    for start, tangent, _normal in domain.edges():
        length = float(np.abs(domain.hi - domain.lo) @ np.abs(tangent))
        u0 = float(np.dot(p_raw - start, tangent))
        if u0 < -0.05 * length or u0 > 1.05 * length:
            continue

        def h(u: float) -> float:
            return float(np.dot(field.grad(start + u * tangent), tangent))

        lo = max(0.02 * length, u0 - 0.3 * length)
        hi = min(0.98 * length, u0 + 0.3 * length)
        us = np.linspace(lo, hi, 64)
        hs = np.array([h(u) for u in us])
        for i in range(len(us) - 1):
            if hs[i] * hs[i + 1] <= 0:
                a, b, fa = us[i], us[i + 1], hs[i]
                for _ in range(90):
                    m = 0.5 * (a + b)
                    fm = h(m)
                    if fa * fm <= 0:
                        b = m
                    else:
                        a, fa = m, fm
                u = 0.5 * (a + b)
                cand = (start + u * tangent, abs(h(u)))
                if best is None or cand[1] < best[1]:
                    best = cand
                break
    return best


def mountain_pass_point(field: ScalarField, domain: Domain, p1, p2,
                        n_knots: int = 16, iters: int = 400,
                        step: float | None = None, pass_tol: float = 1e-6,
                        path_tol: float = 1e-9,
                        probe_radius: float | None = None) -> PassResult:
    """Best pass point between the peaks ``p1`` and ``p2``.

    Three initial paths (straight plus two perpendicular bows) are
    optimized independently; the highest pass value wins, ties broken by
    lexicographically smaller pass point. The winning minimum is then
    certified: interior Newton refinement when it lands inside, else a
    tangency root-find on the boundary.
    """
    if not domain.convex:
        raise ConvexityError("theorem requires a convex domain")
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if probe_radius is None:
        probe_radius = 0.02 * domain.diameter
    for name, p in (("p1", p1), ("p2", p2)):
        if not _probe_local_max(field, domain, p, probe_radius):
            raise PreconditionError(f"{name} is not a probe-verified "
                                    "local maximum", point=p.tolist())
    f1, f2 = float(field.value(p1)), float(field.value(p2))
    if f1 > f2:
        p1, p2, f1, f2 = p2, p1, f2, f1
    if step is None:
        step = 0.02 * domain.diameter

    candidates = []
    for bow in _BOW_FACTORS:
        knots = _initial_path(p1, p2, n_knots, bow)
        path, value = _ascend_path(field, domain, knots, iters, step)
        inner = path[1:-1]
        vals = np.asarray(field.value(inner), dtype=float)
        argmin = inner[int(np.argmin(vals))]
        candidates.append((value, tuple(argmin), path))
    candidates.sort(key=lambda c: (-c[0], c[1]))
    best_value, _, best_path = candidates[0]
    inner = best_path[1:-1]
    vals = np.asarray(field.value(inner), dtype=float)
    p3_raw = inner[int(np.argmin(vals))].copy()

    if best_value >= f1 - path_tol:
        raise NoSeparationError(
            "no path dips below the lower peak",
            best_value=best_value, f_p1=f1)

    spacing = float(np.max(np.linalg.norm(np.diff(best_path, axis=0),
                                          axis=1)))
    # interior branch
    interior = None
    try:
        q = refine_newton(field, p3_raw, tol=min(pass_tol, 1e-9) * 1e-3,
                          max_iter=200)
        if (domain.boundary_distance(q) > 1e-9
                and np.linalg.norm(q - p3_raw) <= 3.0 * spacing
                and float(field.value(q)) < f1 - path_tol):
            interior = q
    except NoConvergenceError:
        interior = None
    if interior is not None:
        c = float(field.value(interior))
        gn = float(np.linalg.norm(field.grad(interior)))
        if gn <= pass_tol:
            return PassResult(interior, c, "InteriorCritical", best_path,
                              {"grad_norm": gn}, f1, f2)

    # boundary branch: only when the optimized path actually pressed
    # against the boundary at its minimum
    near = domain.boundary_distance(p3_raw) <= max(2.0 * spacing,
                                                   1e-3 * domain.diameter)
    if not near:
        raise NoConvergenceError(
            "pass point failed both certificates",
            p3_raw=p3_raw.tolist(), best_value=best_value)
    p_b = domain.project(p3_raw)
    if isinstance(domain, Ball) and domain.dim == 2:
        hit = _ball_tangency(field, domain, p_b)
    elif isinstance(domain, Box) and domain.dim == 2:
        hit = _box_tangency(field, domain, p_b)
    elif isinstance(domain, Interval):
        hit = None
    else:
        hit = None
    if hit is not None:
        p3, align = hit
        c = float(field.value(p3))
        if align <= pass_tol and c < f1 - path_tol:
            return PassResult(np.asarray(p3), c, "BoundaryTangency",
                              best_path, {"boundary_alignment": align},
                              f1, f2)
    raise NoConvergenceError(
        "pass point failed both certificates",
        p3_raw=p3_raw.tolist(), best_value=best_value)
