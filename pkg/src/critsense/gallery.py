"""Catalogue of scalar fields used throughout the toolkit.

Static entries are classical surfaces (bowl, saddle, monkey saddle, Peano
surface, ...). Family entries take a sharpness parameter ``n >= 1`` and come
with the field they converge to, so the sequence experiments can measure
convergence against a known limit. Every entry carries analytic gradients;
Hessians are analytic where cheap and differentiated gradients otherwise.

Entries tagged ``origin="classical"`` follow published closed forms;
``origin="reconstructed"`` entries are minimal families built here to
realize a documented limit behavior (plateaus, merging maxima, oscillation).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domains import Ball, Box, Domain, Interval
from .errors import CatalogueError, UsageError
from .fields import (ScalarField, bump1_vgh, bump_vgh, transition_vgh)


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    dim: int
    family: bool
    make: Callable[[int], ScalarField]
    domain: Domain
    origin: str  # "classical" or "reconstructed"
    note: str
    limit: Callable[[], ScalarField] | None = None
    smoothness: str = "C2"


def _wrap(name, dim, fn, grad, hess=None, smooth="C2", **meta) -> ScalarField:
    f = ScalarField(fn, dim, grad_fn=grad, hess_fn=hess,
                    smoothness=smooth, name=name)
    f.meta.update(meta)
    return f


# ---------------------------------------------------------------- #
# static surfaces
# ---------------------------------------------------------------- #

def _quadratic(name, dim, diag):
    """f = sum d_i x_i^2 with analytic derivatives."""
    d = np.asarray(diag, dtype=float)
    H = np.diag(2.0 * d)

    def fn(s):
        return np.sum(d * s * s, axis=-1)

    def grad(s):
        return 2.0 * d * s

    def hess(s):
        s = np.asarray(s, dtype=float)
        return np.broadcast_to(H, s.shape[:-1] + (dim, dim)).copy()

    return _wrap(name, dim, fn, grad, hess)


def _bowl(n):
    return _quadratic("bowl", 2, [1.0, 1.0])


def _bowl3(n):
    return _quadratic("bowl3", 3, [1.0, 1.0, 1.0])


def _dome(n):
    return _quadratic("dome", 2, [-1.0, -1.0])


def _saddle(n):
    return _quadratic("saddle", 2, [1.0, -1.0])


def _monkey(n):
    # x^3 - 3 x y^2: three-valley saddle
    def fn(s):
        x, y = s[..., 0], s[..., 1]
        return x**3 - 3.0 * x * y * y

    def grad(s):
        x, y = s[..., 0], s[..., 1]
        return np.stack([3.0 * x * x - 3.0 * y * y, -6.0 * x * y], axis=-1)

    def hess(s):
        x, y = s[..., 0], s[..., 1]
        out = np.empty(s.shape[:-1] + (2, 2))
        out[..., 0, 0] = 6.0 * x
        out[..., 0, 1] = out[..., 1, 0] = -6.0 * y
        out[..., 1, 1] = -6.0 * x
        return out

    return _wrap("monkey", 2, fn, grad, hess)


def _undulation(n):
    # x^3 + y^2: degenerate along x, still isolated at the origin
    def fn(s):
        x, y = s[..., 0], s[..., 1]
        return x**3 + y * y

    def grad(s):
        x, y = s[..., 0], s[..., 1]
        return np.stack([3.0 * x * x, 2.0 * y], axis=-1)

    def hess(s):
        x = s[..., 0]
        out = np.zeros(s.shape[:-1] + (2, 2))
        out[..., 0, 0] = 6.0 * x
        out[..., 1, 1] = 2.0
        return out

    return _wrap("undulation", 2, fn, grad, hess)


def _tilt(n):
    # no critical points at all
    def fn(s):
        return s[..., 0].copy()

    def grad(s):
        g = np.zeros_like(np.asarray(s, dtype=float))
        g[..., 0] = 1.0
        return g

    def hess(s):
        return np.zeros(np.asarray(s).shape[:-1] + (2, 2))

    return _wrap("tilt", 2, fn, grad, hess)


def _peano(n):
    # (2x^2 - y)(y - x^2): origin is a min along every line through it
    # yet not a local min; homological index 0
    def fn(s):
        x, y = s[..., 0], s[..., 1]
        return (2.0 * x * x - y) * (y - x * x)

    def grad(s):
        x, y = s[..., 0], s[..., 1]
        gx = 6.0 * x * y - 8.0 * x**3
        gy = 3.0 * x * x - 2.0 * y
        return np.stack([gx, gy], axis=-1)

    def hess(s):
        x, y = s[..., 0], s[..., 1]
        out = np.empty(s.shape[:-1] + (2, 2))
        out[..., 0, 0] = 6.0 * y - 24.0 * x * x
        out[..., 0, 1] = out[..., 1, 0] = 6.0 * x
        out[..., 1, 1] = -2.0
        return out

    return _wrap("peano", 2, fn, grad, hess)


def _two_gauss_terms(centers, weights, inv_var):
    """Sum of isotropic Gaussians with analytic derivatives."""
    centers = [np.asarray(c, dtype=float) for c in centers]

    def fn(s):
        s = np.asarray(s, dtype=float)
        total = np.zeros(s.shape[:-1])
        for c, w, iv in zip(centers, weights, inv_var):
            off = s - c
            total = total + w * np.exp(-iv * np.sum(off * off, axis=-1))
        return total

    def grad(s):
        s = np.asarray(s, dtype=float)
        total = np.zeros_like(s)
        for c, w, iv in zip(centers, weights, inv_var):
            off = s - c
            e = w * np.exp(-iv * np.sum(off * off, axis=-1))
            total = total - 2.0 * iv * e[..., None] * off
        return total

    def hess(s):
        s = np.asarray(s, dtype=float)
        d = s.shape[-1]
        eye = np.eye(d)
        total = np.zeros(s.shape[:-1] + (d, d))
        for c, w, iv in zip(centers, weights, inv_var):
            off = s - c
            e = w * np.exp(-iv * np.sum(off * off, axis=-1))
            outer = off[..., :, None] * off[..., None, :]
            total = total + e[..., None, None] * (
                4.0 * iv * iv * outer - 2.0 * iv * eye)
        return total

    return fn, grad, hess


def _twogauss(n):
    fn, grad, hess = _two_gauss_terms(
        [(0.4, 0.0), (-0.4, 0.0)], [1.0, 1.0], [20.0, 20.0])
    return _wrap("twogauss", 2, fn, grad, hess)


def _twogauss_pit(n):
    # a central pit deep enough that the saddle between the peaks drops
    # below the boundary values along the y axis
    fn, grad, hess = _two_gauss_terms(
        [(0.45, 0.0), (-0.45, 0.0), (0.0, 0.0)],
        [1.0, 1.0, -2.0], [20.0, 20.0, 12.5])
    return _wrap("twogauss_pit", 2, fn, grad, hess)


# ---------------------------------------------------------------- #
# families
# ---------------------------------------------------------------- #

def _singlemax(n):
    """g(x, n y)/n with the five-branch g; a single interior maximum,
    converging uniformly to the critical-point-free f(x, y) = y.

    The seam at y = 0 is C1 only; branch interiors are smooth.
    """
    def pieces(x, y):
        b, bd1, _ = bump1_vgh(y)
        bm, bmd1, _ = bump1_vgh(y - 1.0)
        S, Sd1, _ = transition_vgh(x)
        E = np.exp(-x * x)
        Ex = -2.0 * x * E
        conds = [y <= -1.0, y <= 0.0, y <= 1.0, y <= 2.0]
        val = np.select(conds, [
            y,
            (1.0 - b) * y + b * E,
            (1.0 - b) * S + b * E,
            bm * S + (1.0 - bm) * (y - 1.0),
        ], default=y - 1.0)
        gx = np.select(conds, [
            np.zeros_like(x),
            b * Ex,
            (1.0 - b) * Sd1 + b * Ex,
            bm * Sd1,
        ], default=np.zeros_like(x))
        gy = np.select(conds, [
            np.ones_like(x),
            (1.0 - b) + bd1 * (E - y),
            bd1 * (E - S),
            bmd1 * (S - (y - 1.0)) + (1.0 - bm),
        ], default=np.ones_like(x))
        return val, gx, gy

    def fn(s):
        x, y = s[..., 0], n * s[..., 1]
        val, _, _ = pieces(x, y)
        return val / n

    def grad(s):
        x, y = s[..., 0], n * s[..., 1]
        _, gx, gy = pieces(x, y)
        return np.stack([gx / n, gy], axis=-1)

    return _wrap("singlemax", 2, fn, grad, smooth="C1", n=n)


def _singlemax_limit():
    def fn(s):
        return s[..., 1].copy()

    def grad(s):
        g = np.zeros_like(np.asarray(s, dtype=float))
        g[..., 1] = 1.0
        return g

    def hess(s):
        return np.zeros(np.asarray(s).shape[:-1] + (2, 2))

    return _wrap("singlemax_limit", 2, fn, grad, hess)


def _fig13a(n):
    """x^2 plus a one-sided bump: f_n(x) = x^2 + b(nx+1)/sqrt(n) - 5/n."""
    rn = np.sqrt(float(n))

    def fn(s):
        x = s[..., 0]
        b, _, _ = bump1_vgh(n * x + 1.0)
        return x * x + b / rn - 5.0 / n

    def grad(s):
        x = s[..., 0]
        _, bd1, _ = bump1_vgh(n * x + 1.0)
        return (2.0 * x + rn * bd1)[..., None]

    def hess(s):
        x = s[..., 0]
        _, _, bd2 = bump1_vgh(n * x + 1.0)
        return (2.0 + n * rn * bd2)[..., None, None]

    return _wrap("fig13a", 1, fn, grad, hess, n=n)


def _parabola_limit(name, sign):
    def fn(s):
        x = s[..., 0]
        return sign * x * x + (1.0 if sign < 0 else 0.0)

    def grad(s):
        return 2.0 * sign * s[..., 0][..., None]

    def hess(s):
        return np.full(np.asarray(s).shape[:-1] + (1, 1), 2.0 * sign)

    return _wrap(name, 1, fn, grad, hess)


def _fig13b(n):
    """Saddle plus a shrinking bump: x^2 - y^2 + 20 b(nx+1, ny+1)/n^2."""
    def fn(s):
        u = n * s + 1.0
        b, _, _ = bump_vgh(u)
        x, y = s[..., 0], s[..., 1]
        return x * x - y * y + 20.0 * b / (n * n)

    def grad(s):
        u = n * s + 1.0
        _, bg, _ = bump_vgh(u)
        x, y = s[..., 0], s[..., 1]
        base = np.stack([2.0 * x, -2.0 * y], axis=-1)
        return base + (20.0 / n) * bg

    def hess(s):
        u = n * s + 1.0
        *_, bh = bump_vgh(u)
        out = np.zeros(s.shape[:-1] + (2, 2))
        out[..., 0, 0] = 2.0
        out[..., 1, 1] = -2.0
        return out + 20.0 * bh

    return _wrap("fig13b", 2, fn, grad, hess, n=n)


def _fig10(n):
    """Maxima merging: 1 - x^2 + (4/n^2) b(nx - 2); two maxima at every n."""
    def fn(s):
        x = s[..., 0]
        b, _, _ = bump1_vgh(n * x - 2.0)
        return 1.0 - x * x + 4.0 * b / (n * n)

    def grad(s):
        x = s[..., 0]
        _, bd1, _ = bump1_vgh(n * x - 2.0)
        return (-2.0 * x + 4.0 * bd1 / n)[..., None]

    def hess(s):
        x = s[..., 0]
        _, _, bd2 = bump1_vgh(n * x - 2.0)
        return (-2.0 + 4.0 * bd2)[..., None, None]

    return _wrap("fig10", 1, fn, grad, hess, n=n)


def _fig4a(n):
    """Plateau approximants of f(x) = x: constant on [-1/n, 1/n], C2 glue.

    Outside the plateau the ramp is t^3/(t^2 + 1/n^2) with t the distance
    past the plateau edge, which meets the flat part with two vanishing
    derivatives and tracks t to within 1/(2n).
    """
    a = 1.0 / (n * n)
    w = 1.0 / n

    def parts(x):
        t = np.maximum(np.abs(x) - w, 0.0)
        den = t * t + a
        val = np.sign(x) * t**3 / den
        d1 = (t**4 + 3.0 * a * t * t) / den**2
        d2 = np.sign(x) * 2.0 * a * t * (3.0 * a - t * t) / den**3
        return val, d1, d2

    def fn(s):
        return parts(s[..., 0])[0]

    def grad(s):
        return parts(s[..., 0])[1][..., None]

    def hess(s):
        return parts(s[..., 0])[2][..., None, None]

    return _wrap("fig4a", 1, fn, grad, hess, n=n)


def _fig4b(n):
    """x + sin(n^2 x)/n: oscillating approximants with ~n^2 critical points."""
    k = float(n * n)

    def fn(s):
        x = s[..., 0]
        return x + np.sin(k * x) / n

    def grad(s):
        x = s[..., 0]
        return (1.0 + n * np.cos(k * x))[..., None]

    def hess(s):
        x = s[..., 0]
        return (-n**3 * np.sin(k * x))[..., None, None]

    return _wrap("fig4b", 1, fn, grad, hess, n=n)


def _line_limit():
    def fn(s):
        return s[..., 0].copy()

    def grad(s):
        return np.ones(np.asarray(s).shape[:-1] + (1,))

    def hess(s):
        return np.zeros(np.asarray(s).shape[:-1] + (1, 1))

    return _wrap("line", 1, fn, grad, hess)


def _fig4c(n):
    """x^3 - x/n^2: two nondegenerate critical points collapsing onto one."""
    c = 1.0 / (n * n)

    def fn(s):
        x = s[..., 0]
        return x**3 - c * x

    def grad(s):
        x = s[..., 0]
        return (3.0 * x * x - c)[..., None]

    def hess(s):
        return (6.0 * s[..., 0])[..., None, None]

    return _wrap("fig4c", 1, fn, grad, hess, n=n)


def _cubic_limit():
    def fn(s):
        return s[..., 0] ** 3

    def grad(s):
        return (3.0 * s[..., 0] ** 2)[..., None]

    def hess(s):
        return (6.0 * s[..., 0])[..., None, None]

    return _wrap("cubic", 1, fn, grad, hess)


def _twist(n):
    """Saddle seen through a radius-dependent rotation.

    Inside r <= 1/n the field is exactly x^2 - y^2; outside, coordinates
    rotate by R_n(r) = pi exp(-1/(n r - 1)), approaching a half turn. The
    family converges C1 (not C2) to the plain saddle.
    """
    def theta_parts(r):
        active = n * r > 1.0
        denom = np.where(active, n * r - 1.0, 1.0)
        th = np.where(active, np.pi * np.exp(-1.0 / denom), 0.0)
        # th underflows to 0 well before denom**2 can; gate on it
        safe2 = np.where(th > 0.0, denom * denom, 1.0)
        dth = np.where(th > 0.0, th * n / safe2, 0.0)
        return th, dth

    def fn(s):
        x, y = s[..., 0], s[..., 1]
        r = np.sqrt(x * x + y * y)
        th, _ = theta_parts(r)
        c2, s2 = np.cos(2.0 * th), np.sin(2.0 * th)
        return c2 * (x * x - y * y) - s2 * 2.0 * x * y

    def grad(s):
        x, y = s[..., 0], s[..., 1]
        r = np.sqrt(x * x + y * y)
        th, dth = theta_parts(r)
        c2, s2 = np.cos(2.0 * th), np.sin(2.0 * th)
        A = x * x - y * y
        B = 2.0 * x * y
        df_dth = -2.0 * s2 * A - 2.0 * c2 * B
        rsafe = np.where(r > 0, r, 1.0)
        gx = 2.0 * (c2 * x - s2 * y) + df_dth * dth * x / rsafe
        gy = -2.0 * (c2 * y + s2 * x) + df_dth * dth * y / rsafe
        return np.stack([gx, gy], axis=-1)

    return _wrap("twist", 2, fn, grad, n=n)


def _fig8a(n):
    """-exp(-1/(x^2 + 1/n)): a single maximum flattening onto the limit's
    infinitely flat one at the origin."""
    c = 1.0 / n

    def parts(x):
        w = x * x + c
        e = np.exp(-1.0 / w)
        d1 = -e * 2.0 * x / w**2
        d2 = -e * (4.0 * x * x / w**4 - 8.0 * x * x / w**3 + 2.0 / w**2)
        return -e, d1, d2

    def fn(s):
        return parts(s[..., 0])[0]

    def grad(s):
        return parts(s[..., 0])[1][..., None]

    def hess(s):
        return parts(s[..., 0])[2][..., None, None]

    return _wrap("fig8a", 1, fn, grad, hess, n=n)


def _fig8a_limit():
    def parts(x):
        x2 = x * x
        nz = x2 > 0.0
        safe = np.where(nz, x2, 1.0)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            e = np.where(nz, np.exp(-1.0 / safe), 0.0)
            d1 = np.where(nz, -e * 2.0 * x / safe**2, 0.0)
            d2 = np.where(nz, -e * (4.0 / safe**3 - 6.0 / safe**2), 0.0)
        return -e, d1, d2

    def fn(s):
        return parts(s[..., 0])[0]

    def grad(s):
        return parts(s[..., 0])[1][..., None]

    def hess(s):
        return parts(s[..., 0])[2][..., None, None]

    return _wrap("fig8a_limit", 1, fn, grad, hess)


_TRIO_W = (1.3, 0.7, 0.5)


def _trio_base(shift_scale):
    wx, wy, w0 = _TRIO_W

    def fn(s):
        x, y = s[..., 0], s[..., 1]
        base = 0.25 * x**4 - 0.5 * x * x + y * y
        if shift_scale == 0.0:
            return base
        return base + shift_scale * np.sin(wx * x + wy * y + w0)

    def grad(s):
        x, y = s[..., 0], s[..., 1]
        gx = x**3 - x
        gy = 2.0 * y
        if shift_scale != 0.0:
            c = shift_scale * np.cos(wx * x + wy * y + w0)
            gx = gx + wx * c
            gy = gy + wy * c
        return np.stack([gx, gy], axis=-1)

    def hess(s):
        x, y = s[..., 0], s[..., 1]
        out = np.zeros(s.shape[:-1] + (2, 2))
        out[..., 0, 0] = 3.0 * x * x - 1.0
        out[..., 1, 1] = 2.0
        if shift_scale != 0.0:
            sn = shift_scale * np.sin(wx * x + wy * y + w0)
            out[..., 0, 0] -= wx * wx * sn
            out[..., 0, 1] = out[..., 1, 0] = -wx * wy * sn
            out[..., 1, 1] -= wy * wy * sn
        return out

    return fn, grad, hess


def _trio(n):
    """Double well plus a tiny skew ripple; three critical points at any n,
    converging C2 to the clean double well."""
    fn, grad, hess = _trio_base(1.0 / (n * n))
    return _wrap("trio", 2, fn, grad, hess, n=n)


def _trio_limit():
    fn, grad, hess = _trio_base(0.0)
    return _wrap("trio_limit", 2, fn, grad, hess)


# ---------------------------------------------------------------- #
# registry
# ---------------------------------------------------------------- #

_B2 = Ball((0.0, 0.0), 1.0)
_I2 = Interval(-2.0, 2.0)

_ENTRIES = [
    GalleryEntry("bowl", 2, False, _bowl, _B2, "classical",
                 "x^2 + y^2; one minimum, radial boundary field"),
    GalleryEntry("bowl3", 3, False, _bowl3, Ball((0.0, 0.0, 0.0), 1.0),
                 "classical", "x^2 + y^2 + z^2 in three dimensions"),
    GalleryEntry("dome", 2, False, _dome, _B2, "classical",
                 "-(x^2 + y^2); one maximum"),
    GalleryEntry("saddle", 2, False, _saddle, _B2, "classical",
                 "x^2 - y^2; hyperbolic saddle, index -1"),
    GalleryEntry("monkey", 2, False, _monkey, _B2, "classical",
                 "x^3 - 3 x y^2; three-pronged saddle, index -2"),
    GalleryEntry("undulation", 2, False, _undulation, _B2, "classical",
                 "x^3 + y^2; degenerate isolated zero, index 0"),
    GalleryEntry("tilt", 2, False, _tilt, _B2, "classical",
                 "f = x; no critical points"),
    GalleryEntry("peano", 2, False, _peano, _B2, "classical",
                 "(2x^2 - y)(y - x^2); min along every line, not a min"),
    GalleryEntry("twogauss", 2, False, _twogauss, _B2, "reconstructed",
                 "two Gaussian peaks; saddle between them at the origin"),
    GalleryEntry("twogauss_pit", 2, False, _twogauss_pit, _B2,
                 "reconstructed",
                 "two peaks plus a central pit; lowest connecting path "
                 "leaves the interior"),
    GalleryEntry("singlemax", 2, True, _singlemax, Box((-1.0, -1.0), (1.0, 1.0)),
                 "classical",
                 "one interior maximum at every n; limit f = y has none",
                 _singlemax_limit, "C1"),
    GalleryEntry("fig13a", 1, True, _fig13a, _I2, "classical",
                 "parabola plus one-sided bump scaled by 1/sqrt(n); extra "
                 "max/min pair at every n, C0 limit x^2",
                 lambda: _parabola_limit("parabola", 1.0)),
    GalleryEntry("fig13b", 2, True, _fig13b, Box((-2.0, -2.0), (2.0, 2.0)),
                 "classical",
                 "saddle plus shrinking bump; bump max and companion saddle "
                 "persist at every n, C1 limit x^2 - y^2",
                 lambda: _saddle(1)),
    GalleryEntry("fig10", 1, True, _fig10, _I2, "reconstructed",
                 "1 - x^2 with a side bump; two maxima at every n merging "
                 "onto the limit's one",
                 lambda: _parabola_limit("cap", -1.0)),
    GalleryEntry("fig4a", 1, True, _fig4a, _I2, "reconstructed",
                 "plateau on [-1/n, 1/n] glued C2 into ramps; limit f = x",
                 _line_limit),
    GalleryEntry("fig4b", 1, True, _fig4b, _I2, "reconstructed",
                 "x + sin(n^2 x)/n; critical-point count diverges, "
                 "C0 limit f = x",
                 _line_limit),
    GalleryEntry("fig4c", 1, True, _fig4c, _I2, "reconstructed",
                 "x^3 - x/n^2; two nondegenerate points collapsing onto "
                 "the limit's one degenerate point",
                 _cubic_limit),
    GalleryEntry("twist", 2, True, _twist, _B2, "classical",
                 "saddle through a radius-dependent rotation; C1 limit is "
                 "the plain saddle, second derivatives do not converge",
                 lambda: _saddle(1)),
    GalleryEntry("fig8a", 1, True, _fig8a, Interval(-1.0, 1.0), "classical",
                 "-exp(-1/(x^2 + 1/n)); maximum flattening onto the "
                 "infinitely flat limit -exp(-1/x^2)",
                 _fig8a_limit),
    GalleryEntry("trio", 2, True, _trio, Box((-1.6, -1.0), (1.6, 1.0)),
                 "reconstructed",
                 "double well with a 1/n^2 skew ripple; two minima and a "
                 "saddle at every n, C2 limit",
                 _trio_limit),
]

GALLERY: dict[str, GalleryEntry] = {e.name: e for e in _ENTRIES}


def entry(name: str) -> GalleryEntry:
    try:
        return GALLERY[name]
    except KeyError:
        known = ", ".join(sorted(GALLERY))
        raise CatalogueError(f"no gallery entry {name!r}; known: {known}") from None


def gallery(name: str, n: int = 1) -> ScalarField:
    """Return the named field; ``n`` selects the family member and is
    ignored by static entries."""
    if n < 1 or int(n) != n:
        raise UsageError(f"family index must be a positive integer, got {n}")
    e = entry(name)
    f = e.make(int(n))
    f.meta.setdefault("gallery", e.name)
    f.meta.setdefault("origin", e.origin)
    f.meta["domain"] = e.domain
    return f


def limit_field(name: str) -> ScalarField:
    e = entry(name)
    if e.limit is None:
        raise CatalogueError(f"gallery entry {name!r} is not a family")
    f = e.limit()
    f.meta["domain"] = e.domain
    return f


def names() -> list[str]:
    return [e.name for e in _ENTRIES]


def catalogue() -> list[dict]:
    """Listing rows for the CLI."""
    rows = []
    for e in _ENTRIES:
        rows.append({
            "name": e.name,
            "dim": e.dim,
            "family": e.family,
            "origin": e.origin,
            "domain": e.domain.descriptor(),
            "note": e.note,
        })
    return rows
