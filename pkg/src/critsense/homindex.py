"""Topological-degree classification of gradient zeros.

The index of an isolated zero is the degree of the normalized gradient on a
small sphere around it: +1 for extrema in the plane, -(j-1) for a j-pronged
saddle, 0 for undulation points. Boundary zeros of the tangential component
carry half-integer weights; interior plus boundary sums are held in exact
rational arithmetic so the audit identity can be checked without tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field as _dcfield
from fractions import Fraction

import numpy as np

from .domains import Ball, Box, Domain, Interval
from .errors import (DegenerateError, NonGenericBoundaryError,
                     NonIsolatedZeroError, PreconditionError,
                     UnderSampledError, UnsupportedError, UsageError)
from .fields import ScalarField

_MIN_CIRCLE_GRAD = 1e-6
_EPS_HALVINGS = 6


# ---------------------------------------------------------------- #
# winding machinery
# ---------------------------------------------------------------- #

def _wrap_angle(d: float) -> float:
    """Wrap to (-pi, pi]."""
    return float((d + np.pi) % (2.0 * np.pi) - np.pi)


def _winding_total(thetas, angles, vec_at, noise_floor, max_depth=48):
    """Signed angle accumulated over consecutive parameter samples.

    ``vec_at(theta)`` supplies the 2-vector between samples when a step
    of pi/2 or more forces subdivision. Returns the total in radians.
    """
    total = 0.0
    m = len(thetas)
    for i in range(m):
        a_t, b_t = thetas[i], thetas[(i + 1) % m]
        if i + 1 == m:
            b_t = thetas[0] + 2.0 * np.pi
        stack = [(a_t, b_t, angles[i], angles[(i + 1) % m], 0)]
        while stack:
            ta, tb, aa, ab, depth = stack.pop()
            d = _wrap_angle(ab - aa)
            if abs(d) < 0.5 * np.pi:
                total += d
                continue
            if depth >= max_depth:
                raise UnderSampledError(
                    "angle step failed to settle under subdivision",
                    theta=ta, step=d)
            tm = 0.5 * (ta + tb)
            v = vec_at(tm)
            nv = float(np.hypot(v[0], v[1]))
            if nv < noise_floor:
                raise NonIsolatedZeroError(
                    "gradient vanishes on the sampling circle", theta=tm,
                    norm=nv)
            am = float(np.arctan2(v[1], v[0]))
            stack.append((ta, tm, aa, am, depth + 1))
            stack.append((tm, tb, am, ab, depth + 1))
    return total


def winding_index_2d(field: ScalarField, z, eps: float,
                     n_samples: int = 256) -> int:
    """Degree of the normalized gradient on the circle of radius ``eps``.

    Signed angle increments are accumulated sample to sample with adaptive
    subdivision whenever a step reaches pi/2, then divided by 2 pi. The
    rounding residual must stay under 0.1.
    """
    if field.dim != 2:
        raise UsageError("winding_index_2d needs a 2-d field")
    if eps <= 0 or n_samples < 8:
        raise UsageError("need eps > 0 and n_samples >= 8")
    z = np.asarray(z, dtype=float)
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    ring = z + eps * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    g = field.grad(ring)
    norms = np.linalg.norm(g, axis=-1)
    gmax = float(np.max(norms))
    floor = 1e-12 * (1.0 + gmax)
    if float(np.min(norms)) < 10.0 * floor:
        raise NonIsolatedZeroError(
            "gradient vanishes on the sampling circle",
            center=z.tolist(), eps=eps, min_norm=float(np.min(norms)))

    def vec_at(t):
        return field.grad(z + eps * np.array([np.cos(t), np.sin(t)]))

    angles = np.arctan2(g[:, 1], g[:, 0])
    total = _winding_total(theta, angles, vec_at, 10.0 * floor)
    w = total / (2.0 * np.pi)
    k = int(np.round(w))
    residual = abs(w - k)
    if residual >= 0.1:
        raise UnderSampledError(
            "winding residual too large", residual=residual,
            suggested_n_samples=2 * n_samples)
    return k


def sign_index_nondegenerate(field: ScalarField, z,
                             degeneracy_tol: float = 1e-8) -> int:
    """(-1)^(number of negative Hessian eigenvalues); needs |det H| away
    from zero."""
    z = np.asarray(z, dtype=float)
    H = field.hess(z)
    eigs = np.linalg.eigvalsh(0.5 * (H + H.T))
    hnorm = float(np.max(np.abs(eigs)))
    if float(np.min(np.abs(eigs))) <= degeneracy_tol * max(1.0, hnorm):
        raise DegenerateError("Hessian is numerically singular",
                              point=z.tolist(), eigenvalues=eigs.tolist())
    return int((-1) ** int(np.sum(eigs < 0)))


def _index_1d(field: ScalarField, z, eps: float) -> int:
    z = np.asarray(z, dtype=float)
    e = np.array([eps])
    for _ in range(_EPS_HALVINGS + 1):
        right = float(field.grad(z + e)[0])
        left = float(field.grad(z - e)[0])
        if min(abs(right), abs(left)) >= 1e-14 * (1.0 + abs(right) + abs(left)):
            return (int(np.sign(right)) - int(np.sign(left))) // 2
        e = e / 2.0
    raise NonIsolatedZeroError("derivative vanishes on both probe sides",
                               point=z.tolist(), eps=eps)


def homological_index(field: ScalarField, z, domain: Domain | None = None,
                      eps: float | None = None, n_samples: int = 256,
                      others=None) -> int:
    """Index of the isolated interior zero at ``z``.

    Dimension dispatch: sign comparison in 1-d, winding number in 2-d,
    Hessian sign for nondegenerate zeros in higher dimension. ``eps``
    defaults to a quarter of the distance to the nearest other known zero
    or to the boundary, halved up to 6 times if the circle check fails.
    """
    z = np.asarray(z, dtype=float)
    if eps is None:
        cands = [0.25]
        if domain is not None:
            cands.append(0.25 * float(domain.boundary_distance(z)))
        if others is not None:
            for o in others:
                d = float(np.linalg.norm(np.asarray(o, dtype=float) - z))
                if d > 0:
                    cands.append(0.25 * d)
        eps = max(min(cands), 1e-12)
    if field.dim == 1:
        return _index_1d(field, z, eps)
    if field.dim == 2:
        last: Exception | None = None
        for k in range(_EPS_HALVINGS + 1):
            e = eps / 2.0**k
            try:
                return winding_index_2d(field, z, e, n_samples)
            except (NonIsolatedZeroError, UnderSampledError) as exc:
                last = exc
        raise last
    return sign_index_nondegenerate(field, z)


# ---------------------------------------------------------------- #
# classification
# ---------------------------------------------------------------- #

def classify_by_index(field: ScalarField, z, probe_radius: float,
                      index: int | None = None, n_probe: int = 64) -> str:
    """Classification string from the index plus a probe ring.

    Strictly lower values all around give Max, strictly higher Min; index 0
    gives Undulation; negative 2-d index gives Saddle with 1 - index prongs.
    The leftover case (mixed probe at index +1) is Unclassified.
    """
    z = np.asarray(z, dtype=float)
    d = field.dim
    if d == 1:
        offs = np.array([[-probe_radius], [probe_radius]])
    elif d == 2:
        t = 2.0 * np.pi * (np.arange(n_probe) + 0.5) / n_probe
        offs = probe_radius * np.stack([np.cos(t), np.sin(t)], axis=-1)
    else:
        rng = np.random.default_rng(7)
        raw = rng.standard_normal((n_probe, d))
        offs = probe_radius * raw / np.linalg.norm(raw, axis=1, keepdims=True)
    fz = float(field.value(z))
    vals = np.asarray(field.value(z + offs), dtype=float) - fz
    tau = 1e-12 * max(1.0, abs(fz), float(np.max(np.abs(vals))))
    if np.all(vals < -tau):
        return "Max"
    if np.all(vals > tau):
        return "Min"
    if index is None:
        try:
            index = homological_index(field, z, eps=probe_radius)
        except (DegenerateError, UnsupportedError):
            return "Unclassified"
    if index == 0:
        return "Undulation"
    if index < 0 and d == 2:
        return f"Saddle({1 - index})"
    if index < 0:
        return "Saddle"
    return "Unclassified"


# ---------------------------------------------------------------- #
# boundary index
# ---------------------------------------------------------------- #

HALF = Fraction(1, 2)


@dataclass
class BoundaryZero:
    location: np.ndarray
    index: int
    weight: Fraction

    @property
    def contribution(self) -> Fraction:
        return self.weight * self.index


@dataclass
class BoundaryIndexResult:
    total: Fraction
    zeros: list
    perturbed: bool = False
    delta: float | None = None

    def as_record(self) -> dict:
        return {
            "total": str(self.total),
            "perturbed": self.perturbed,
            "delta": self.delta,
            "zeros": [{
                "location": z.location.tolist(),
                "index": z.index,
                "weight": str(z.weight),
                "contribution": str(z.contribution),
            } for z in self.zeros],
        }


def _perturbed(field: ScalarField, delta: float, direction: np.ndarray) -> ScalarField:
    u = np.asarray(direction, dtype=float)

    def fn(s, f=field.fn):
        return np.asarray(f(s)) + delta * np.sum(u * s, axis=-1)

    def grad(s):
        return field.grad(s) + delta * u

    # linear terms leave the Hessian untouched
    return ScalarField(fn, field.dim, grad_fn=grad,
                       hess_fn=lambda s: field.hess(s),
                       smoothness=field.smoothness,
                       name=f"{field.name}+linear")


def _has_zero_run(flags: np.ndarray, run: int = 3, cyclic: bool = True) -> bool:
    if not np.any(flags):
        return False
    if np.all(flags):
        return True
    f = np.concatenate([flags, flags[:run]]) if cyclic else flags
    count = 0
    for v in f:
        count = count + 1 if v else 0
        if count >= run:
            return True
    return False


def _bisect_scalar(fn, a: float, b: float, fa: float, iters: int = 80) -> float:
    """Root of a scalar function by bisection; fa = fn(a) supplied."""
    for _ in range(iters):
        m = 0.5 * (a + b)
        fm = fn(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def _scalar_boundary_zeros(param, vpar, point_of, vpar_at, zero_tol,
                           cyclic: bool):
    """Sign-change zeros of a sampled scalar tangential component.

    ``param`` strictly increasing samples; near-zero samples are skipped so
    touch zeros (no sign change) contribute nothing, as their 1-d index is 0.
    """
    keep = np.abs(vpar) > zero_tol
    idx = np.flatnonzero(keep)
    zeros = []
    if len(idx) < 2:
        return zeros
    pairs = list(zip(idx[:-1], idx[1:]))
    if cyclic:
        pairs.append((idx[-1], idx[0]))
    period = param[-1] - param[0] + (param[1] - param[0]) if len(param) > 1 else 0.0
    for i, j in pairs:
        si, sj = np.sign(vpar[i]), np.sign(vpar[j])
        if si == sj:
            continue
        a, b = param[i], param[j]
        if b <= a:
            b = b + period
        t = _bisect_scalar(vpar_at, a, b, vpar[i])
        loc = point_of(t)
        ind = int(sj - si) // 2
        zeros.append((loc, ind, t))
    return zeros


def boundary_index(field: ScalarField, domain: Domain,
                   n_samples: int = 512, seed: int = 20411,
                   _retry: int = 0) -> BoundaryIndexResult:
    """Half-weighted index sum of the tangential gradient zeros on the
    domain boundary.

    Each sign-change zero contributes its 1-d crossing index times +1/2
    when the full gradient points into the domain there, -1/2 when it
    points out. Tangential components that vanish along whole sample runs
    (radial fields) get a seeded linear perturbation and one retry at ten
    times the strength before NonGenericBoundary is raised.
    """
    d = field.dim
    pts, normals = domain.boundary_frames(n_samples)
    g = field.grad(pts)
    gmax = float(np.max(np.linalg.norm(g, axis=-1)))
    scale = max(gmax, 1e-12)
    zero_tol = 1e-9 * max(1.0, scale)

    if d == 1:
        zeros = []
        total = Fraction(0)
        for p, nrm in zip(pts, normals):
            radial = float(field.grad(p)[0] * nrm[0])
            if abs(radial) <= zero_tol:
                return _boundary_retry(field, domain, n_samples, seed, _retry,
                                       scale)
            w = HALF if radial < 0 else -HALF
            zeros.append(BoundaryZero(np.asarray(p, dtype=float), 1, w))
            total += w
        return BoundaryIndexResult(total, zeros)

    if isinstance(domain, Ball) and d == 2:
        theta = 2.0 * np.pi * (np.arange(n_samples) + 0.5) / n_samples
        tang = np.stack([-np.sin(theta), np.cos(theta)], axis=-1)
        vpar = np.sum(g * tang, axis=-1)
        if _has_zero_run(np.abs(vpar) <= zero_tol, cyclic=True):
            return _boundary_retry(field, domain, n_samples, seed, _retry,
                                   scale)

        def vpar_at(t):
            p = domain.angle_point(t)
            gr = field.grad(p)
            return float(-gr[0] * np.sin(t) + gr[1] * np.cos(t))

        found = _scalar_boundary_zeros(
            theta, vpar, domain.angle_point, vpar_at, zero_tol, True)
        zeros = []
        total = Fraction(0)
        for loc, ind, t in found:
            nrm = np.array([np.cos(t), np.sin(t)])
            radial = float(np.dot(field.grad(loc), nrm))
            if abs(radial) <= zero_tol:
                raise NonGenericBoundaryError(
                    "full gradient vanishes on the boundary",
                    location=np.asarray(loc).tolist())
            w = HALF if radial < 0 else -HALF
            zeros.append(BoundaryZero(np.asarray(loc, dtype=float), ind, w))
            total += w * ind
        return BoundaryIndexResult(total, zeros)

    if isinstance(domain, Box) and d == 2:
        return _box_boundary_index(field, domain, n_samples, seed, _retry,
                                   zero_tol, scale)

    if isinstance(domain, Ball) and d == 3:
        return _sphere_boundary_index(field, domain, n_samples, seed, _retry,
                                      zero_tol, scale)

    raise UnsupportedError(
        f"boundary index not implemented for dim {d} on {type(domain).__name__}")


def _boundary_retry(field, domain, n_samples, seed, retry, scale):
    if retry >= 2:
        raise NonGenericBoundaryError(
            "tangential component still degenerate after perturbation",
            retries=retry)
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(field.dim)
    u /= np.linalg.norm(u)
    delta = 1e-6 * max(scale, 1e-6) * 10.0**retry
    pert = _perturbed(field, delta, u)
    res = boundary_index(pert, domain, n_samples, seed, _retry=retry + 1)
    return BoundaryIndexResult(res.total, res.zeros, True, delta)


def _box_boundary_index(field, domain, n_samples, seed, retry, zero_tol,
                        scale):
    # corner neighborhoods are excluded; the box audit is approximate
    per = max(16, n_samples // 4)
    margin = 2
    zeros = []
    total = Fraction(0)
    for start, tanv, nrm in domain.edges():
        length = float(np.abs(domain.hi - domain.lo) @ np.abs(tanv))
        t = np.linspace(0.0, length, per + 1)[margin:-margin or None]
        pts = start[None, :] + t[:, None] * tanv[None, :]
        g = field.grad(pts)
        vpar = g @ tanv
        if _has_zero_run(np.abs(vpar) <= zero_tol, cyclic=False):
            return _boundary_retry(field, domain, n_samples, seed, retry,
                                   scale)

        def vpar_at(u, s=start, tv=tanv):
            return float(field.grad(s + u * tv) @ tv)

        def point_of(u, s=start, tv=tanv):
            return s + u * tv

        found = _scalar_boundary_zeros(t, vpar, point_of, vpar_at,
                                       zero_tol, False)
        for loc, ind, _ in found:
            radial = float(field.grad(loc) @ nrm)
            if abs(radial) <= zero_tol:
                raise NonGenericBoundaryError(
                    "full gradient vanishes on the boundary",
                    location=np.asarray(loc).tolist())
            w = HALF if radial < 0 else -HALF
            zeros.append(BoundaryZero(np.asarray(loc, dtype=float), ind, w))
            total += w * ind
    return BoundaryIndexResult(total, zeros)


def _tangent_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    a = np.array([1.0, 0.0, 0.0])
    if abs(n[0]) > 0.9:
        a = np.array([0.0, 1.0, 0.0])
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


def _sphere_boundary_index(field, domain, n_samples, seed, retry, zero_tol,
                           scale):
    """Tangential zeros on a 2-sphere boundary, located by multi-start
    refinement from the lowest-|v_par| samples and indexed by a chart
    winding number. Heuristic coverage; audited fields keep their zeros
    well separated."""
    m = max(n_samples, 256)
    pts, normals = domain.boundary_frames(m)
    g = field.grad(pts)
    vpar = g - np.sum(g * normals, axis=-1, keepdims=True) * normals
    tv = np.linalg.norm(vpar, axis=-1)
    if _has_zero_run(tv <= zero_tol, cyclic=False) or np.all(tv <= zero_tol):
        return _boundary_retry(field, domain, m, seed, retry, scale)

    def vpar_of(nrm):
        p = domain.center + domain.radius * nrm
        gr = field.grad(p)
        return gr - np.dot(gr, nrm) * nrm

    order = np.argsort(tv)
    R = domain.radius
    found_dirs: list[np.ndarray] = []
    for i in order[:16]:
        n0 = normals[i].copy()
        e1, e2 = _tangent_basis(n0)
        w = np.zeros(2)
        ok = False
        for _ in range(60):
            nn = n0 + w[0] * e1 + w[1] * e2
            nn /= np.linalg.norm(nn)
            vp = vpar_of(nn)
            F = np.array([np.dot(vp, e1), np.dot(vp, e2)])
            if np.linalg.norm(F) <= zero_tol:
                n0 = nn
                ok = True
                break
            h = 1e-6
            J = np.empty((2, 2))
            for k, ek in enumerate((e1, e2)):
                npp = n0 + (w + h * np.eye(2)[k])[0] * e1 \
                    + (w + h * np.eye(2)[k])[1] * e2
                npp /= np.linalg.norm(npp)
                vh = vpar_of(npp)
                J[:, k] = (np.array([np.dot(vh, e1), np.dot(vh, e2)]) - F) / h
            try:
                step = np.linalg.solve(J, -F)
            except np.linalg.LinAlgError:
                break
            if np.linalg.norm(step) > 0.5:
                step *= 0.5 / np.linalg.norm(step)
            w = w + step
        if not ok:
            continue
        if any(np.linalg.norm(n0 - fd) < 0.05 for fd in found_dirs):
            continue
        found_dirs.append(n0)

    zeros = []
    total = Fraction(0)
    for nrm in found_dirs:
        e1, e2 = _tangent_basis(nrm)
        loc = domain.center + R * nrm

        def vec_at(t, n0=nrm, a=e1, b=e2):
            rho = 1e-3
            nn = n0 + rho * (np.cos(t) * a + np.sin(t) * b)
            nn /= np.linalg.norm(nn)
            vp = vpar_of(nn)
            return np.array([np.dot(vp, a), np.dot(vp, b)])

        theta = 2.0 * np.pi * np.arange(64) / 64
        vecs = np.array([vec_at(t) for t in theta])
        norms = np.linalg.norm(vecs, axis=-1)
        floor = 1e-12 * (1.0 + float(np.max(norms)))
        angles = np.arctan2(vecs[:, 1], vecs[:, 0])
        tot = _winding_total(theta, angles, vec_at, floor)
        ind = int(np.round(tot / (2.0 * np.pi)))
        radial = float(np.dot(field.grad(loc), nrm))
        if abs(radial) <= zero_tol:
            raise NonGenericBoundaryError(
                "full gradient vanishes on the boundary",
                location=loc.tolist())
        wgt = HALF if radial < 0 else -HALF
        zeros.append(BoundaryZero(loc, ind, wgt))
        total += wgt * ind
    return BoundaryIndexResult(total, zeros)


# ---------------------------------------------------------------- #
# the audit
# ---------------------------------------------------------------- #

@dataclass
class IndexResult:
    interior_index: int
    boundary_index: Fraction
    total: Fraction
    euler_target: Fraction
    per_point: list = _dcfield(default_factory=list)
    passed: bool = False
    boundary: BoundaryIndexResult | None = None

    def as_record(self) -> dict:
        return {
            "interior": self.interior_index,
            "boundary": str(self.boundary_index),
            "total": str(self.total),
            "target": str(self.euler_target),
            "pass": self.passed,
            "per_point": [{
                "location": np.asarray(loc).tolist(),
                "index": int(ind),
                "weight": str(w),
            } for loc, ind, w in self.per_point],
        }


def poincare_hopf_audit(field: ScalarField, domain: Domain,
                        grid_res: int = 48, newton_tol: float = 1e-9,
                        n_boundary: int = 512) -> IndexResult:
    """Interior index sum plus boundary index against the Euler target:
    1 for these contractible domains in even dimension, 0 in odd."""
    from .detect import find_critical_points

    pts = find_critical_points(field, domain, grid_res=grid_res,
                               newton_tol=newton_tol)
    if pts.unresolved:
        raise PreconditionError(
            "unresolved critical cells block the audit",
            cells=[u["cell_center"] for u in pts.unresolved])
    per_point = []
    interior = 0
    for p in pts:
        if p.near_boundary:
            continue
        if p.hom_index is None:
            raise PreconditionError(
                "interior zero with unavailable index",
                location=p.location.tolist())
        interior += p.hom_index
        per_point.append((p.location, p.hom_index, Fraction(1)))
    bres = boundary_index(field, domain, n_samples=n_boundary)
    for z in bres.zeros:
        per_point.append((z.location, z.index, z.weight))
    total = interior + bres.total
    target = Fraction(domain.euler_char) if field.dim % 2 == 0 else Fraction(0)
    return IndexResult(interior, bres.total, total, target, per_point,
                       passed=(total == target), boundary=bres)


# ---------------------------------------------------------------- #
# tangency
# ---------------------------------------------------------------- #

@dataclass
class TangencyResult:
    transversal: bool
    n_intersections: int
    min_angle: float
    vacuous: bool = False

    def __bool__(self) -> bool:
        return self.transversal


def tangency_check(field: ScalarField, p, c: float, delta: float,
                   n_samples: int = 256,
                   angle_tol: float = 1e-3) -> TangencyResult:
    """Transversality of the level set f = c against the circle of radius
    ``delta`` around ``p``: at every intersection the gradient must make an
    angle above ``angle_tol`` with the radius. No intersections at all is
    vacuously transversal and flagged."""
    if field.dim != 2:
        raise UnsupportedError("tangency_check is 2-d only")
    if delta <= 0:
        raise UsageError("delta must be positive")
    p = np.asarray(p, dtype=float)
    theta = 2.0 * np.pi * (np.arange(n_samples) + 0.5) / n_samples
    ring = p + delta * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    h = np.asarray(field.value(ring), dtype=float) - c
    tau = 1e-12 * max(1.0, float(np.max(np.abs(h))), abs(c))
    near = np.abs(h) <= tau
    if np.count_nonzero(near) > n_samples // 2:
        # the circle lies inside the level set: collinear everywhere
        return TangencyResult(False, int(np.count_nonzero(near)), 0.0)

    def h_at(t):
        return float(field.value(p + delta * np.array([np.cos(t), np.sin(t)]))) - c

    crossings = []
    keep = np.flatnonzero(~near)
    for a, b in zip(keep, np.roll(keep, -1)):
        sa, sb = np.sign(h[a]), np.sign(h[b])
        if sa == sb:
            continue
        ta, tb = theta[a], theta[b]
        if tb <= ta:
            tb += 2.0 * np.pi
        crossings.append(_bisect_scalar(h_at, ta, tb, h[a]))
    crossings.extend(theta[near].tolist())
    if not crossings:
        return TangencyResult(True, 0, float("nan"), vacuous=True)
    min_angle = np.inf
    for t in crossings:
        s = p + delta * np.array([np.cos(t), np.sin(t)])
        g = field.grad(s)
        r = s - p
        gn, rn = np.linalg.norm(g), np.linalg.norm(r)
        if gn * rn == 0:
            min_angle = 0.0
            break
        cosang = abs(float(np.dot(g, r)) / (gn * rn))
        ang = float(np.arccos(np.clip(cosang, 0.0, 1.0)))
        min_angle = min(min_angle, ang)
    return TangencyResult(min_angle > angle_tol, len(crossings),
                          float(min_angle))
