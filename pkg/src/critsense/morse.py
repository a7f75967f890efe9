"""Morse classification and explicit Morse-neighborhood construction.

Around a nondegenerate critical point the field equals its Hessian
quadratic form after a change of coordinates. This module computes a
certified radius for that neighborhood from spectral norms, then builds
the coordinate change by integrating a homotopy flow, so the defining
identity f(Gamma(x)) = f(p) + (x-p)'H(x-p)/2 can be checked numerically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import Domain, _fibonacci_sphere
from .errors import (CoverageError, FlowSingularError, NotMorseError,
                     UsageError)
from .fields import ScalarField, spectral_norms


def morse_classify(field: ScalarField, z,
                   degeneracy_tol: float = 1e-8) -> int | None:
    """Number of negative Hessian eigenvalues, or None when the smallest
    |eigenvalue| sits below the degeneracy tolerance."""
    H = field.hess(np.asarray(z, dtype=float))
    eigs = np.linalg.eigvalsh(0.5 * (H + H.T))
    hnorm = float(np.max(np.abs(eigs)))
    if float(np.min(np.abs(eigs))) <= degeneracy_tol * max(1.0, hnorm):
        return None
    return int(np.sum(eigs < 0))


def morse_statistic(field: ScalarField, domain: Domain,
                    grid_res: int = 64) -> float:
    """Grid infimum of max(|grad f|, smallest singular value of H_f).

    Positive certifies Morseness numerically: wherever the gradient
    vanishes the Hessian is invertible. The Hessian enters through its
    smallest singular value; the operator norm would miss directionally
    degenerate Hessians (rank-deficient but nonzero) and certify
    non-Morse fields.
    """
    lat = domain.lattice(grid_res)
    inside = np.asarray(domain.contains(lat))
    g = np.linalg.norm(field.grad(lat), axis=-1)
    H = np.asarray(field.hess(lat))
    eigs = np.linalg.eigvalsh(0.5 * (H + np.swapaxes(H, -1, -2)))
    h_min = np.min(np.abs(eigs), axis=-1)
    stat = np.maximum(g, h_min)
    return float(np.min(stat[inside]))


# ---------------------------------------------------------------- #
# radius constants
# ---------------------------------------------------------------- #

def corollary_constants(H: np.ndarray, m: float = 0.5) -> dict:
    """Hessian-variation bound K1 and radius cap K2 from the spectral
    norms of H and its inverse."""
    if not 0.0 < m < 1.0:
        raise UsageError("m must lie in (0, 1)")
    H = np.asarray(H, dtype=float)
    eigs = np.linalg.eigvalsh(0.5 * (H + H.T))
    lo = float(np.min(np.abs(eigs)))
    if lo == 0.0:
        raise NotMorseError("Hessian is singular")
    h = float(np.max(np.abs(eigs)))
    hi = 1.0 / lo
    k1 = (1.0 / hi) * min(1.0 - m, m * m * np.log(2.0) / (6.0 * h * hi))
    k2 = m / (4.0 * h * hi)
    return {"K1": k1, "K2": k2, "H_norm": h, "H_inv_norm": hi}


def _directions(d: int) -> np.ndarray:
    if d == 1:
        return np.array([[1.0], [-1.0]])
    if d == 2:
        t = 2.0 * np.pi * (np.arange(64) + 0.5) / 64
        return np.stack([np.cos(t), np.sin(t)], axis=-1)
    if d == 3:
        return _fibonacci_sphere(128)
    rng = np.random.default_rng(11)
    raw = rng.standard_normal((64 * d, d))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


@dataclass
class FlowChart:
    """Certified Morse neighborhood: center, Hessian, radius, and the
    constants backing the bi-Lipschitz bounds."""

    center: np.ndarray
    H: np.ndarray
    radius: float
    K1: float
    K2: float
    L: float
    c: float
    C: float
    a1: float
    m: float = 0.5
    ode_step: float = 1e-3
    residual_sup: float | None = None

    @property
    def bilip_hi_bound(self) -> float:
        return float(np.exp(self.a1))

    @property
    def bilip_lo_bound(self) -> float:
        return 2.0 - float(np.exp(self.a1))

    def conditions_hold(self) -> bool:
        return self.L < self.K1 and self.radius < self.K2

    def as_record(self) -> dict:
        return {
            "center": self.center.tolist(),
            "hessian": self.H.tolist(),
            "radius": self.radius,
            "constants": {"K1": self.K1, "K2": self.K2, "L": self.L,
                          "c": self.c, "C": self.C, "a1": self.a1},
            "m": self.m,
            "ode_step": self.ode_step,
            "residual_sup": self.residual_sup,
            "bilip_hi_bound": self.bilip_hi_bound,
            "bilip_lo_bound": self.bilip_lo_bound,
        }


def morse_radius(H: np.ndarray, hess_at, p, m: float = 0.5,
                 search_cap: float = 1.0, shells: int = 16,
                 ode_step: float = 1e-3) -> FlowChart:
    """Largest radius (up to ``search_cap``) on which the sampled Hessian
    variation stays under the admissible bound.

    ``hess_at`` maps batched points to Hessians. The variation sup is
    sampled on radial shells times a fixed direction set, and the radius
    found by bisection. A constant Hessian gives the radius cap itself.
    """
    p = np.asarray(p, dtype=float)
    H = np.asarray(H, dtype=float)
    d = len(p)
    consts = corollary_constants(H, m)
    k1, k2 = consts["K1"], consts["K2"]
    hi = consts["H_inv_norm"]
    cap = min(search_cap, k2 * (1.0 - 1e-12))
    dirs = _directions(d)

    def variation(r: float) -> float:
        radii = r * (np.arange(1, shells + 1) / shells)
        pts = p + radii[:, None, None] * dirs[None, :, :]
        Hs = np.asarray(hess_at(pts.reshape(-1, d)))
        diff = Hs - H
        return float(np.max(spectral_norms(diff)))

    v_cap = variation(cap)
    if v_cap < k1:
        r = cap
        L = v_cap
    else:
        lo_r, hi_r = 0.0, cap
        for _ in range(60):
            mid = 0.5 * (lo_r + hi_r)
            if variation(mid) < k1:
                lo_r = mid
            else:
                hi_r = mid
        r = lo_r
        L = variation(r) if r > 0 else 0.0
    c = 1.0 / hi - L
    C = consts["H_norm"] + L
    a1 = (L / c) * (2.0 + 3.0 * C / c) if L > 0 else 0.0
    return FlowChart(p, H, r, k1, k2, L, c, C, a1, m=m, ode_step=ode_step)


def make_chart(field: ScalarField, p, m: float = 0.5,
               search_cap: float = 1.0, shells: int = 16,
               ode_step: float = 1e-3) -> FlowChart:
    p = np.asarray(p, dtype=float)
    H = field.hess(p)
    return morse_radius(H, field.hess, p, m=m, search_cap=search_cap,
                        shells=shells, ode_step=ode_step)


# ---------------------------------------------------------------- #
# the flow
# ---------------------------------------------------------------- #

def _flow_integrate(field: ScalarField, chart: FlowChart, x,
                    ode_step: float | None, record: bool):
    step = float(ode_step if ode_step is not None else chart.ode_step)
    if not 0.0 < step <= 0.5:
        raise UsageError("ode_step must lie in (0, 0.5]")
    p, H, r = chart.center, chart.H, chart.radius
    xi = np.asarray(x, dtype=float) - p
    if np.any(np.linalg.norm(xi, axis=-1) > r * (1.0 + 1e-9)):
        raise UsageError("point outside the chart radius",)
    f_p = float(field.value(p))
    hnorm = float(np.max(np.abs(np.linalg.eigvalsh(H))))
    ratio_floor = (1e-14 * max(1.0, hnorm)) ** 2

    def vel(t: float, y: np.ndarray) -> np.ndarray:
        fy = np.asarray(field.value(p + y), dtype=float)
        quad = 0.5 * np.einsum("...i,ij,...j->...", y, H, y)
        phi = fy - f_p - quad
        gphi = field.grad(p + y) - y @ H
        yt = y @ H + t * gphi
        n2 = np.sum(yt * yt, axis=-1)
        y2 = np.sum(y * y, axis=-1)
        bad = (y2 > 0) & (n2 < ratio_floor * y2)
        if np.any(bad):
            raise FlowSingularError(
                "flow denominator vanished away from the center",
                t=t, worst=float(np.min(n2[bad] / y2[bad])))
        safe = np.where(n2 > 0, n2, 1.0)
        return np.where(n2[..., None] > 0,
                        -(phi / safe)[..., None] * yt, 0.0)

    n_steps = int(np.ceil(1.0 / step))
    dt = 1.0 / n_steps
    state = xi.copy()
    states = [state.copy()] if record else None
    t = 0.0
    for _ in range(n_steps):
        k1 = vel(t, state)
        k2 = vel(t + 0.5 * dt, state + 0.5 * dt * k1)
        k3 = vel(t + 0.5 * dt, state + 0.5 * dt * k2)
        k4 = vel(t + dt, state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
        if record:
            states.append(state.copy())
    return p, n_steps, state, states


def morse_flow_map(field: ScalarField, chart: FlowChart, x,
                   ode_step: float | None = None) -> np.ndarray:
    """Integrate the homotopy flow from t=0 to 1, carrying ``x`` to the
    point where the field takes its exact quadratic value.

    Accepts batched points. Fixed-step classical RK4; the velocity is
    -phi(y) y_t(y) / |y_t(y)|^2 with y_t = H y + t grad(phi) and phi the
    non-quadratic remainder, which vanishes at the center.
    """
    p, _, state, _ = _flow_integrate(field, chart, x, ode_step, False)
    return p + state


def morse_flow_trajectory(field: ScalarField, chart: FlowChart, x,
                          ode_step: float | None = None):
    """Like :func:`morse_flow_map` but returns the whole integration
    path: (t grid, points), with points[k] the state at t_k."""
    p, n_steps, _, states = _flow_integrate(field, chart, x, ode_step, True)
    ts = np.linspace(0.0, 1.0, n_steps + 1)
    return ts, p + np.asarray(states)


def _ball_samples(d: int, r: float, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, d))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    radii = r * rng.uniform(0.0, 1.0, size=n) ** (1.0 / d)
    return raw * radii[:, None]


def verify_morse_chart(field: ScalarField, chart: FlowChart,
                       n_samples: int = 100, seed: int = 0,
                       ode_step: float | None = None) -> dict:
    """Sample the chart ball, measure the defining residual and empirical
    Lipschitz ratios of the flow map, and record them on the chart."""
    p, H, r = chart.center, chart.H, chart.radius
    d = len(p)
    xi = _ball_samples(d, r, n_samples, seed)
    pts = p + xi
    out = morse_flow_map(field, chart, pts, ode_step)
    quad = 0.5 * np.einsum("...i,ij,...j->...", xi, H, xi)
    resid = np.abs(np.asarray(field.value(out)) - float(field.value(p)) - quad)
    residual_sup = float(np.max(resid))

    ratios = []
    for i in range(len(pts) - 1):
        dx = float(np.linalg.norm(pts[i] - pts[i + 1]))
        if dx < 1e-12 * max(1.0, r):
            continue
        dg = float(np.linalg.norm(out[i] - out[i + 1]))
        ratios.append(dg / dx)
    chart.residual_sup = residual_sup
    return {
        "residual_sup": residual_sup,
        "bilip_lo": float(np.min(ratios)) if ratios else 1.0,
        "bilip_hi": float(np.max(ratios)) if ratios else 1.0,
        "bilip_lo_bound": chart.bilip_lo_bound,
        "bilip_hi_bound": chart.bilip_hi_bound,
    }


def flow_pair_distance(field_n: ScalarField, field: ScalarField,
                       p_n, p, r_shared: float, n_samples: int = 64,
                       m: float = 0.5, ode_step: float = 1e-3) -> float:
    """Sup over sampled offsets of the distance between the two flow maps,
    both recentered at their own critical points."""
    p = np.asarray(p, dtype=float)
    p_n = np.asarray(p_n, dtype=float)
    chart = make_chart(field, p, m=m, search_cap=r_shared, ode_step=ode_step)
    chart_n = make_chart(field_n, p_n, m=m, search_cap=r_shared,
                         ode_step=ode_step)
    slack = 1.0 - 1e-9
    if chart.radius < r_shared * slack or chart_n.radius < r_shared * slack:
        raise CoverageError("charts do not cover the shared ball",
                            r_shared=r_shared, r=chart.radius,
                            r_n=chart_n.radius)
    d = len(p)
    dirs = _directions(d)
    r_use = min(chart.radius, chart_n.radius)
    radii = r_use * (np.arange(1, 9) / 8.0)
    xi = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, d)
    if n_samples < len(xi):
        stride = max(1, len(xi) // n_samples)
        xi = xi[::stride]
    g_lim = morse_flow_map(field, chart, p + xi, ode_step) - p
    g_n = morse_flow_map(field_n, chart_n, p_n + xi, ode_step) - p_n
    return float(np.max(np.linalg.norm(g_n - g_lim, axis=-1)))
