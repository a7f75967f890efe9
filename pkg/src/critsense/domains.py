"""Compact convex domains: intervals, boxes, and balls.

All three are contractible (Euler characteristic 1), which is what the
index audits target. Points are always length-``dim`` vectors, including
the one-dimensional case.
"""

from __future__ import annotations

import numpy as np

from .errors import UsageError


def _fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic quasi-uniform sample of the unit 2-sphere."""
    i = np.arange(n, dtype=float) + 0.5
    phi = np.arccos(1.0 - 2.0 * i / n)
    theta = np.pi * (1.0 + 5.0**0.5) * i
    return np.column_stack(
        [np.sin(phi) * np.cos(theta), np.sin(phi) * np.sin(theta), np.cos(phi)]
    )


class Domain:
    """Base class; concrete domains implement the geometric queries."""

    dim: int
    euler_char: int = 1
    convex: bool = True

    def contains(self, s, tol: float = 1e-12):
        raise NotImplementedError

    def boundary_distance(self, s):
        """Distance to the boundary, positive inside, negative outside."""
        raise NotImplementedError

    def project(self, s):
        """Euclidean projection onto the (convex) domain."""
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def boundary_points(self, n: int) -> np.ndarray:
        """``(m, dim)`` sample of the boundary, exact to machine precision."""
        raise NotImplementedError

    def boundary_frames(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Boundary samples with outward unit normals, ``(m, dim)`` each."""
        raise NotImplementedError

    @property
    def diameter(self) -> float:
        lo, hi = self.bounding_box()
        return float(np.linalg.norm(hi - lo))

    def axes(self, res: int) -> list[np.ndarray]:
        """Per-axis lattice nodes (``res + 1`` each) spanning the bounding box."""
        lo, hi = self.bounding_box()
        return [np.linspace(lo[i], hi[i], res + 1) for i in range(self.dim)]

    def lattice(self, res: int) -> np.ndarray:
        """Full lattice over the bounding box, shape ``(res+1,)*dim + (dim,)``."""
        axes = self.axes(res)
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack(grids, axis=-1)

    def interior_grid(self, res: int, margin: float = 0.0) -> np.ndarray:
        """Lattice nodes strictly inside the domain with the given margin,
        flattened to ``(m, dim)``."""
        pts = self.lattice(res).reshape(-1, self.dim)
        keep = self.boundary_distance(pts) > margin
        return pts[keep]


class Interval(Domain):
    """``[a, b]`` on the line."""

    dim = 1

    def __init__(self, a: float, b: float):
        if not b > a:
            raise UsageError(f"empty interval [{a}, {b}]")
        self.a = float(a)
        self.b = float(b)

    def __repr__(self):
        return f"Interval({self.a}, {self.b})"

    def descriptor(self) -> str:
        return f"interval:{self.a:g},{self.b:g}"

    def contains(self, s, tol: float = 1e-12):
        x = np.asarray(s, dtype=float)[..., 0]
        return (x >= self.a - tol) & (x <= self.b + tol)

    def boundary_distance(self, s):
        x = np.asarray(s, dtype=float)[..., 0]
        return np.minimum(x - self.a, self.b - x)

    def project(self, s):
        x = np.asarray(s, dtype=float)
        return np.clip(x, self.a, self.b)

    def bounding_box(self):
        return np.array([self.a]), np.array([self.b])

    def boundary_points(self, n: int) -> np.ndarray:
        return np.array([[self.a], [self.b]])

    def boundary_frames(self, n: int):
        pts = self.boundary_points(n)
        normals = np.array([[-1.0], [1.0]])
        return pts, normals


class Box(Domain):
    """Axis-aligned product of intervals."""

    def __init__(self, lo, hi):
        self.lo = np.atleast_1d(np.asarray(lo, dtype=float))
        self.hi = np.atleast_1d(np.asarray(hi, dtype=float))
        if self.lo.shape != self.hi.shape or self.lo.ndim != 1:
            raise UsageError("box corners must be 1-d and congruent")
        if not np.all(self.hi > self.lo):
            raise UsageError("box has empty extent on some axis")
        self.dim = len(self.lo)

    def __repr__(self):
        return f"Box({self.lo.tolist()}, {self.hi.tolist()})"

    def descriptor(self) -> str:
        lo = ",".join(f"{v:g}" for v in self.lo)
        hi = ",".join(f"{v:g}" for v in self.hi)
        return f"box:{lo}:{hi}"

    def contains(self, s, tol: float = 1e-12):
        p = np.asarray(s, dtype=float)
        return np.all((p >= self.lo - tol) & (p <= self.hi + tol), axis=-1)

    def boundary_distance(self, s):
        p = np.asarray(s, dtype=float)
        return np.min(np.minimum(p - self.lo, self.hi - p), axis=-1)

    def project(self, s):
        return np.clip(np.asarray(s, dtype=float), self.lo, self.hi)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def edges(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """2-d only: per-edge (start, tangent, outward normal) with unit frames."""
        if self.dim != 2:
            raise UsageError("edges() is for 2-d boxes")
        (x0, y0), (x1, y1) = self.lo, self.hi
        return [
            (np.array([x0, y0]), np.array([1.0, 0.0]), np.array([0.0, -1.0])),
            (np.array([x1, y0]), np.array([0.0, 1.0]), np.array([1.0, 0.0])),
            (np.array([x1, y1]), np.array([-1.0, 0.0]), np.array([0.0, 1.0])),
            (np.array([x0, y1]), np.array([0.0, -1.0]), np.array([-1.0, 0.0])),
        ]

    def boundary_points(self, n: int) -> np.ndarray:
        if self.dim == 1:
            return np.array([[self.lo[0]], [self.hi[0]]])
        if self.dim == 2:
            per = max(2, n // 4)
            pts = []
            for start, tang, _ in self.edges():
                length = np.abs(self.hi - self.lo) @ np.abs(tang)
                t = np.linspace(0.0, length, per, endpoint=False)
                pts.append(start[None, :] + t[:, None] * tang[None, :])
            return np.concatenate(pts, axis=0)
        # faces sampled on a coarse lattice for dim >= 3
        per_axis = max(2, int(round(n ** (1.0 / (self.dim - 1)))))
        pts = []
        for ax in range(self.dim):
            others = [np.linspace(self.lo[i], self.hi[i], per_axis)
                      for i in range(self.dim) if i != ax]
            mesh = np.meshgrid(*others, indexing="ij")
            flat = np.stack([m.ravel() for m in mesh], axis=-1)
            for val in (self.lo[ax], self.hi[ax]):
                face = np.insert(flat, ax, val, axis=1)
                pts.append(face)
        return np.concatenate(pts, axis=0)

    def boundary_frames(self, n: int):
        if self.dim == 1:
            return np.array([[self.lo[0]], [self.hi[0]]]), np.array([[-1.0], [1.0]])
        if self.dim != 2:
            raise UsageError("boundary_frames supports dim <= 2 boxes")
        per = max(2, n // 4)
        pts, normals = [], []
        for start, tang, nrm in self.edges():
            length = np.abs(self.hi - self.lo) @ np.abs(tang)
            t = np.linspace(0.0, length, per, endpoint=False)
            pts.append(start[None, :] + t[:, None] * tang[None, :])
            normals.append(np.repeat(nrm[None, :], per, axis=0))
        return np.concatenate(pts, axis=0), np.concatenate(normals, axis=0)


class Ball(Domain):
    """Closed Euclidean ball. ``dim`` is taken from the center vector."""

    def __init__(self, center, radius: float):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.radius = float(radius)
        if self.radius <= 0:
            raise UsageError("ball radius must be positive")
        self.dim = len(self.center)

    def __repr__(self):
        return f"Ball({self.center.tolist()}, {self.radius})"

    def descriptor(self) -> str:
        c = ",".join(f"{v:g}" for v in self.center)
        return f"ball:{c}:{self.radius:g}"

    def contains(self, s, tol: float = 1e-12):
        p = np.asarray(s, dtype=float)
        return np.linalg.norm(p - self.center, axis=-1) <= self.radius + tol

    def boundary_distance(self, s):
        p = np.asarray(s, dtype=float)
        return self.radius - np.linalg.norm(p - self.center, axis=-1)

    def project(self, s):
        p = np.asarray(s, dtype=float)
        off = p - self.center
        r = np.linalg.norm(off, axis=-1, keepdims=True)
        scale = np.where(r > self.radius, self.radius / np.maximum(r, 1e-300), 1.0)
        return self.center + off * scale

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def boundary_points(self, n: int) -> np.ndarray:
        pts, _ = self.boundary_frames(n)
        return pts

    def boundary_frames(self, n: int):
        if self.dim == 1:
            pts = np.array([[self.center[0] - self.radius],
                            [self.center[0] + self.radius]])
            return pts, np.array([[-1.0], [1.0]])
        if self.dim == 2:
            # half-step offset keeps symmetric fields off exact sample zeros
            theta = 2.0 * np.pi * (np.arange(n) + 0.5) / n
            normals = np.column_stack([np.cos(theta), np.sin(theta)])
        elif self.dim == 3:
            normals = _fibonacci_sphere(n)
        else:
            raise UsageError("ball boundaries sampled for dim <= 3 only")
        return self.center + self.radius * normals, normals

    def angle_point(self, theta: float) -> np.ndarray:
        """2-d only: boundary point at polar angle ``theta``."""
        return self.center + self.radius * np.array([np.cos(theta), np.sin(theta)])


def parse_domain(text: str) -> Domain:
    """Parse the CLI mini-grammar.

    ``interval:a,b`` | ``box:lo1,lo2:hi1,hi2`` | ``ball:c1,c2:r``
    """
    try:
        kind, _, rest = text.partition(":")
        if kind == "interval":
            a, b = (float(v) for v in rest.split(","))
            return Interval(a, b)
        if kind == "box":
            lo_s, hi_s = rest.split(":")
            lo = [float(v) for v in lo_s.split(",")]
            hi = [float(v) for v in hi_s.split(",")]
            return Box(lo, hi)
        if kind == "ball":
            c_s, r_s = rest.split(":")
            center = [float(v) for v in c_s.split(",")]
            return Ball(center, float(r_s))
    except UsageError:
        raise
    except Exception as exc:
        raise UsageError(f"bad domain spec {text!r}: {exc}") from None
    raise UsageError(f"unknown domain kind {kind!r} (interval|box|ball)")
