"""Scalar fields with analytic or finite-difference derivatives.

A :class:`ScalarField` bundles an evaluation callable with optional analytic
gradient/Hessian callables and falls back to central differences otherwise.
All callables are vectorized over leading axes: points have shape
``(..., dim)``, values ``(...,)``, gradients ``(..., dim)`` and Hessians
``(..., dim, dim)``. Evaluation is pure, so repeated calls at the same point
are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field as _field
from typing import Callable

import numpy as np

from .errors import MarginError, UsageError

DEFAULT_FD_STEP = 1e-5


# ---------------------------------------------------------------- #
# reference bump and transition functions
# ---------------------------------------------------------------- #

def _bump_r2(r2: np.ndarray) -> np.ndarray:
    """exp(1 - 1/(1-r2)) on r2 < 1, else 0; r2 is |s|^2."""
    r2 = np.asarray(r2, dtype=float)
    inside = r2 < 1.0
    safe = np.where(inside, 1.0 - r2, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)


def bump(s) -> float | np.ndarray:
    """Reference bump ``exp(1 - 1/(1 - |s|^2))`` for ``|s| < 1``, else 0.

    ``s`` is a single point: a scalar or a coordinate vector. Peak value 1
    at the origin; identically zero outside the open unit ball, with all
    derivatives vanishing on the rim.
    """
    s = np.asarray(s, dtype=float)
    return float(_bump_r2(np.sum(s * s)))


def bump_vgh(s: np.ndarray):
    """Value, gradient, Hessian of the bump at points ``(..., d)``.

    Closed form: with u = 1/(1-r^2), grad log b = -2 u^2 s and
    H = b (g g' - 2 u^2 I - 8 u^3 s s').
    """
    s = np.asarray(s, dtype=float)
    d = s.shape[-1]
    r2 = np.sum(s * s, axis=-1)
    inside = r2 < 1.0
    safe = np.where(inside, 1.0 - r2, 1.0)
    u = 1.0 / safe
    b = _bump_r2(r2)
    g_log = -2.0 * u[..., None] ** 2 * s
    grad = b[..., None] * g_log
    eye = np.eye(d)
    outer_g = g_log[..., :, None] * g_log[..., None, :]
    outer_s = s[..., :, None] * s[..., None, :]
    hess = b[..., None, None] * (
        outer_g
        - 2.0 * u[..., None, None] ** 2 * eye
        - 8.0 * u[..., None, None] ** 3 * outer_s
    )
    grad = np.where(inside[..., None], grad, 0.0)
    hess = np.where(inside[..., None, None], hess, 0.0)
    return b, grad, hess


def bump1_vgh(x: np.ndarray):
    """Elementwise 1-d bump value and first/second derivatives."""
    x = np.asarray(x, dtype=float)
    b, g, h = bump_vgh(x[..., None])
    return b, g[..., 0], h[..., 0, 0]


def transition(x) -> float | np.ndarray:
    """Monotone transition ``-e^x / (e^x + e^(1-x))``, elementwise.

    Runs from 0 at ``-inf`` to -1 at ``+inf`` through -1/2 at ``x = 1/2``.
    Evaluated in the overflow-safe form ``-1/(1 + e^(1-2x))``.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(over="ignore"):
        # exp overflow saturates to -1/inf = -0.0, the correct tail
        out = -1.0 / (1.0 + np.exp(1.0 - 2.0 * x))
    return float(out) if out.ndim == 0 else out


def transition_vgh(x: np.ndarray):
    """Transition value with first and second derivatives, elementwise."""
    x = np.asarray(x, dtype=float)
    # s' = -2e/(e^x+e^{1-x})^2, s'' = 4e(e^x-e^{1-x})/(e^x+e^{1-x})^3;
    # branch on sign so the exponential never overflows (q <= 1 always)
    t = 1.0 - 2.0 * x
    q = np.exp(-np.abs(t))
    pos = t > 0  # x < 1/2
    one_q = 1.0 + q
    v = np.where(pos, -q / one_q, -1.0 / one_q)
    d1 = -2.0 * q / one_q ** 2
    d2 = np.where(pos, -4.0 * q * (1.0 - q), 4.0 * q * (1.0 - q)) / one_q ** 3
    return v, d1, d2


# ---------------------------------------------------------------- #
# the field type
# ---------------------------------------------------------------- #

@dataclass
class ScalarField:
    """A scalar field with derivative access.

    Parameters
    ----------
    fn : callable
        Maps ``(..., dim)`` arrays to ``(...,)`` values.
    dim : int
        Ambient dimension.
    grad_fn, hess_fn : callable, optional
        Analytic derivatives with the same batching convention. Missing
        ones fall back to central differences with step
        ``h = 1e-5 * (1 + |s|)``; the Hessian differentiates the gradient,
        so an analytic gradient sharpens it too.
    smoothness : str
        One of ``C0``, ``C1``, ``C2`` (differentiability class the
        derivatives can be trusted to).
    name : str
        Label echoed into reports.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    grad_fn: Callable[[np.ndarray], np.ndarray] | None = None
    hess_fn: Callable[[np.ndarray], np.ndarray] | None = None
    smoothness: str = "C2"
    name: str = ""
    fd_step: float = DEFAULT_FD_STEP
    meta: dict = _field(default_factory=dict)

    def value(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        self._check_shape(s)
        return np.asarray(self.fn(s), dtype=float)

    def grad(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        self._check_shape(s)
        if self.grad_fn is not None:
            return np.asarray(self.grad_fn(s), dtype=float)
        return fd_gradient(self.fn, s, self.fd_step)

    def hess(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        self._check_shape(s)
        if self.hess_fn is not None:
            return np.asarray(self.hess_fn(s), dtype=float)
        if self.grad_fn is not None:
            return fd_jacobian_sym(self.grad_fn, s, self.fd_step)
        return fd_hessian(self.fn, s, self.fd_step)

    def _check_shape(self, s: np.ndarray):
        if s.ndim == 0 or s.shape[-1] != self.dim:
            raise UsageError(
                f"point shape {s.shape} does not end in dim={self.dim}")

    def __neg__(self) -> "ScalarField":
        g = None if self.grad_fn is None else (lambda s, f=self.grad_fn: -f(s))
        h = None if self.hess_fn is None else (lambda s, f=self.hess_fn: -f(s))
        return ScalarField(lambda s, f=self.fn: -np.asarray(f(s)), self.dim,
                           g, h, self.smoothness, f"-({self.name})", self.fd_step)


def _steps(s: np.ndarray, h: float) -> np.ndarray:
    return h * (1.0 + np.linalg.norm(s, axis=-1))


def fd_gradient(fn, s: np.ndarray, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    d = s.shape[-1]
    hh = _steps(s, h)
    out = np.empty(s.shape, dtype=float)
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        step = hh[..., None] * e
        out[..., i] = (np.asarray(fn(s + step)) - np.asarray(fn(s - step))) / (2.0 * hh)
    return out


def fd_jacobian_sym(grad_fn, s: np.ndarray, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Central difference of a gradient, symmetrized."""
    s = np.asarray(s, dtype=float)
    d = s.shape[-1]
    hh = _steps(s, h)
    cols = []
    for j in range(d):
        e = np.zeros(d)
        e[j] = 1.0
        step = hh[..., None] * e
        cols.append((np.asarray(grad_fn(s + step)) - np.asarray(grad_fn(s - step)))
                    / (2.0 * hh[..., None]))
    jac = np.stack(cols, axis=-1)
    return 0.5 * (jac + np.swapaxes(jac, -1, -2))


def fd_hessian(fn, s: np.ndarray, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Second differences of values; used only when no gradient exists."""
    s = np.asarray(s, dtype=float)
    d = s.shape[-1]
    hh = _steps(s, h) * 10.0  # wider stencil: second differences lose precision
    f0 = np.asarray(fn(s), dtype=float)
    out = np.empty(s.shape[:-1] + (d, d), dtype=float)
    eyes = np.eye(d)
    for i in range(d):
        ei = eyes[i]
        step_i = hh[..., None] * ei
        out[..., i, i] = (np.asarray(fn(s + step_i)) - 2.0 * f0
                          + np.asarray(fn(s - step_i))) / hh**2
        for j in range(i + 1, d):
            ej = eyes[j]
            step_j = hh[..., None] * ej
            mixed = (np.asarray(fn(s + step_i + step_j))
                     - np.asarray(fn(s + step_i - step_j))
                     - np.asarray(fn(s - step_i + step_j))
                     + np.asarray(fn(s - step_i - step_j))) / (4.0 * hh**2)
            out[..., i, j] = mixed
            out[..., j, i] = mixed
    return out


def finite_diff(field: ScalarField, s, h: float | None = None,
                order: str = "grad", domain=None) -> np.ndarray:
    """Central-difference derivative of ``field`` at ``s``.

    ``order`` is ``"grad"`` or ``"hess"``. When a ``domain`` is supplied the
    point must sit at least ``2h``-scaled stencil widths inside it, else
    :class:`MarginError` is raised.
    """
    s = np.asarray(s, dtype=float)
    step = h if h is not None else field.fd_step
    if order not in ("grad", "hess"):
        raise UsageError(f"order must be 'grad' or 'hess', got {order!r}")
    if domain is not None:
        width = 2.0 * step * (1.0 + float(np.linalg.norm(s)))
        if order == "hess":
            width *= 10.0
        if np.any(np.asarray(domain.boundary_distance(s)) < width):
            raise MarginError("stencil would cross the domain boundary",
                              point=s.tolist(), width=width)
    if order == "grad":
        return fd_gradient(field.fn, s, step)
    if field.grad_fn is not None:
        return fd_jacobian_sym(field.grad_fn, s, step)
    return fd_hessian(field.fn, s, step)


def spectral_norm(H: np.ndarray) -> float:
    """Largest |eigenvalue| of a symmetric matrix."""
    H = np.asarray(H, dtype=float)
    return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (H + H.T)))))


def spectral_norms(H: np.ndarray) -> np.ndarray:
    """Batched largest |eigenvalue| for symmetric matrices ``(..., d, d)``."""
    H = np.asarray(H, dtype=float)
    Hs = 0.5 * (H + np.swapaxes(H, -1, -2))
    return np.max(np.abs(np.linalg.eigvalsh(Hs)), axis=-1)
