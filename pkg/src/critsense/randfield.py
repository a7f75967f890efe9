"""Random trigonometric fields and Monte Carlo count-agreement rates.

The model: a limit field G with i.i.d. normal coefficients on a tensor
trigonometric basis over [0, 2pi]^D, and empirical means
Ghat_n = G + (1/n) * sum_i E_i with i.i.d. basis noise fields E_i.
Coefficient decay makes every draw smooth; the finite basis makes
Ghat_n -> G uniform with all derivatives, so the counting theorems'
hypotheses are checkable per trial.

Randomness is counter-based (Philox keyed by seed, trial, stream), so
trials are reproducible under any parallel schedule.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import detect
from .domains import Box, Domain, Interval
from .errors import NoConvergenceError, UsageError
from .fields import ScalarField
from .morse import morse_statistic

HYPOTHESIS_L_TOL = 1e-4
HYPOTHESIS_R_TOL = 1e-3
HYPOTHESIS_M_TOL = 1e-6

_EINSUM_AXES = "ijklmn"


@dataclass(frozen=True)
class BasisSpec:
    """Law of one random basis field: dimension, per-axis degree, and
    the coefficient scale amplitude * prod_a (1 + j_a)^(-decay)."""

    dim: int
    degree: int
    amplitude: float = 1.0
    decay: float = 2.0

    def __post_init__(self):
        if self.dim < 1 or self.dim > len(_EINSUM_AXES):
            raise UsageError("dim must be between 1 and 6", dim=self.dim)
        if self.degree < 1:
            raise UsageError("degree must be >= 1", degree=self.degree)

    def as_record(self) -> dict:
        return {"dim": self.dim, "degree": self.degree,
                "amplitude": self.amplitude, "decay": self.decay}


def _harmonics(degree: int) -> np.ndarray:
    k = np.arange(2 * degree + 1)
    return (k + 1) // 2


def _scale_tensor(spec: BasisSpec) -> np.ndarray:
    per_axis = (1.0 + _harmonics(spec.degree)) ** (-spec.decay)
    scale = per_axis
    for _ in range(spec.dim - 1):
        scale = np.multiply.outer(scale, per_axis)
    return spec.amplitude * scale


def _axis_tables(x: np.ndarray, degree: int):
    shape = x.shape + (2 * degree + 1,)
    b = np.empty(shape)
    db = np.empty(shape)
    d2b = np.empty(shape)
    b[..., 0] = 1.0
    db[..., 0] = 0.0
    d2b[..., 0] = 0.0
    for j in range(1, degree + 1):
        c = np.cos(j * x)
        s = np.sin(j * x)
        b[..., 2 * j - 1] = c
        db[..., 2 * j - 1] = -j * s
        d2b[..., 2 * j - 1] = -j * j * c
        b[..., 2 * j] = s
        db[..., 2 * j] = j * c
        d2b[..., 2 * j] = -j * j * s
    return b, db, d2b


class BasisField(ScalarField):
    """Finite trigonometric sum with closed-form derivatives.

    The coefficient tensor has shape (2*degree+1,)**dim with per-axis
    index order (1, cos x, sin x, cos 2x, sin 2x, ...).
    """

    def __init__(self, coeffs: np.ndarray, dim: int, seed=None,
                 name: str = "basis"):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.ndim != dim or len(set(coeffs.shape)) != 1:
            raise UsageError("coefficient tensor must be (m,)**dim",
                             shape=coeffs.shape)
        if coeffs.shape[0] % 2 != 1:
            raise UsageError("axis length must be odd (1 + 2*degree)")
        super().__init__(self._value_at, dim, grad_fn=self._grad_at,
                         hess_fn=self._hess_at, smoothness="C2", name=name)
        self.coeffs = coeffs
        self.degree = (coeffs.shape[0] - 1) // 2
        self.seed = seed

    def _tables(self, s: np.ndarray):
        return [_axis_tables(s[..., a], self.degree) for a in range(self.dim)]

    def _sum(self, tables, which) -> np.ndarray:
        axes = _EINSUM_AXES[:self.dim]
        sub = ",".join("..." + a for a in axes) + "," + axes + "->..."
        ops = [tables[a][which[a]] for a in range(self.dim)]
        return np.einsum(sub, *ops, self.coeffs)

    def _value_at(self, s: np.ndarray) -> np.ndarray:
        return self._sum(self._tables(s), (0,) * self.dim)

    def _grad_at(self, s: np.ndarray) -> np.ndarray:
        t = self._tables(s)
        out = np.empty(s.shape)
        for a in range(self.dim):
            which = tuple(1 if b == a else 0 for b in range(self.dim))
            out[..., a] = self._sum(t, which)
        return out

    def _hess_at(self, s: np.ndarray) -> np.ndarray:
        t = self._tables(s)
        out = np.empty(s.shape + (self.dim,))
        for a in range(self.dim):
            for b in range(a, self.dim):
                which = tuple((2 if a == b else 1) if c in (a, b) else 0
                              for c in range(self.dim))
                v = self._sum(t, which)
                out[..., a, b] = v
                out[..., b, a] = v
        return out


def standard_domain(dim: int) -> Domain:
    if dim == 1:
        return Interval(0.0, 2.0 * np.pi)
    return Box([0.0] * dim, [2.0 * np.pi] * dim)


def _stream_rng(seed: int, trial: int, stream: int) -> np.random.Generator:
    if trial < 0 or stream < 0 or stream >= (1 << 20):
        raise UsageError("trial must be >= 0 and stream in [0, 2**20)")
    key = np.array([np.uint64(seed), np.uint64((trial << 20) | stream)],
                   dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _draw_coeffs(spec: BasisSpec, seed: int, trial: int,
                 stream: int) -> np.ndarray:
    rng = _stream_rng(seed, trial, stream)
    z = rng.standard_normal(size=(2 * spec.degree + 1,) * spec.dim)
    return z * _scale_tensor(spec)


def sample_limit_field(spec: BasisSpec, seed: int, trial: int = 0
                       ) -> BasisField:
    """One draw of the limit field G (stream 0 of the trial)."""
    return BasisField(_draw_coeffs(spec, seed, trial, 0), spec.dim,
                      seed=seed, name=f"G[seed={seed},trial={trial}]")


def _embed(coeffs: np.ndarray, m: int) -> np.ndarray:
    if coeffs.shape[0] == m:
        return coeffs
    out = np.zeros((m,) * coeffs.ndim)
    out[tuple(slice(0, coeffs.shape[0]) for _ in range(coeffs.ndim))] = coeffs
    return out


def empirical_mean_field(G: BasisField, noise_spec: BasisSpec, n: int,
                         seed: int, trial: int = 0) -> BasisField:
    """Ghat_n = G + (1/n) * sum_{i=1..n} E_i, exact in coefficient space.

    Noise stream i draws E_i, so Ghat_10 and Ghat_100 from the same seed
    share their first ten noise fields.
    """
    if n < 1:
        raise UsageError("n must be >= 1", n=n)
    if noise_spec.dim != G.dim:
        raise UsageError("noise dimension must match G",
                         noise_dim=noise_spec.dim, field_dim=G.dim)
    m = 2 * max(G.degree, noise_spec.degree) + 1
    acc = np.zeros((m,) * G.dim)
    for i in range(1, n + 1):
        acc += _embed(_draw_coeffs(noise_spec, seed, trial, i), m)
    coeffs = _embed(G.coeffs, m) + acc / n
    return BasisField(coeffs, G.dim, seed=seed,
                      name=f"Ghat[n={n},seed={seed},trial={trial}]")


# ---------------------------------------------------------------- #
# Monte Carlo
# ---------------------------------------------------------------- #

def worker_count(threads: int | None = None) -> int:
    if threads is not None:
        return max(1, int(threads))
    env = os.environ.get("CRITSENSE_THREADS", "")
    if env.strip():
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError("CRITSENSE_THREADS must be an integer",
                             value=env)
    return min(8, os.cpu_count() or 1)


def _triple(points) -> tuple:
    c = {"Max": 0, "Min": 0, "Saddle": 0}
    for p in points:
        cls = p.classification
        if cls in ("Max", "Min"):
            c[cls] += 1
        elif cls.startswith("Saddle"):
            c["Saddle"] += 1
    return (c["Max"], c["Min"], c["Saddle"])


def _run_trial(spec: BasisSpec, noise_spec: BasisSpec, n_list, seed: int,
               trial: int, grid_res: int, newton_tol: float) -> dict:
    dom = standard_domain(spec.dim)
    G = sample_limit_field(spec, seed, trial)
    rec = {"trial": trial, "failed": False}
    try:
        pts_G = detect.find_critical_points(G, dom, grid_res=grid_res,
                                            newton_tol=newton_tol)
        stat_l = detect.boundary_min_gradient(G, dom)
        stat_r = detect.resolution(pts_G)
        stat_m = morse_statistic(G, dom, grid_res=grid_res)
    except NoConvergenceError as err:
        rec["failed"] = True
        rec["error"] = {"type": type(err).__name__, "context": err.context}
        return rec
    triple_G = _triple(pts_G)
    rec.update({
        "L": stat_l, "R": stat_r, "M": stat_m,
        "counts_G": {"N_M": triple_G[0], "N_m": triple_G[1],
                     "N_S": triple_G[2], "N_C": len(pts_G)},
        "hypothesis_ok": bool(stat_l > HYPOTHESIS_L_TOL
                              and stat_r > HYPOTHESIS_R_TOL
                              and stat_m > HYPOTHESIS_M_TOL),
        "per_n": [],
    })
    for n in n_list:
        row = {"n": int(n)}
        try:
            Ghat = empirical_mean_field(G, noise_spec, n, seed, trial)
            pts_n = detect.find_critical_points(Ghat, dom, grid_res=grid_res,
                                                newton_tol=newton_tol)
        except NoConvergenceError as err:
            row["failed"] = True
            row["error"] = {"type": type(err).__name__,
                            "context": err.context}
            rec["per_n"].append(row)
            continue
        triple_n = _triple(pts_n)
        row.update({
            "failed": False,
            "counts": {"N_M": triple_n[0], "N_m": triple_n[1],
                       "N_S": triple_n[2], "N_C": len(pts_n)},
            "R_hat": detect.resolution(pts_n),
            "match": bool(triple_n == triple_G),
        })
        rec["per_n"].append(row)
    return rec


def monte_carlo_convergence(spec: BasisSpec, noise_spec: BasisSpec, n_list,
                            trials: int, seed: int,
                            threads: int | None = None,
                            grid_res: int | None = None,
                            newton_tol: float = 1e-9) -> dict:
    """Per-n frequency of exact (N_M, N_m, N_S) agreement between
    Ghat_n and G over hypothesis-passing trials.

    Trials run as independent tasks; the reduction walks records in
    trial order, so the table is bit-identical for any worker count.
    """
    if trials < 1:
        raise UsageError("trials must be >= 1", trials=trials)
    n_list = [int(n) for n in n_list]
    res = grid_res if grid_res is not None else (
        512 if spec.dim == 1 else 64)

    def task(t):
        return _run_trial(spec, noise_spec, n_list, seed, t, res, newton_tol)

    workers = worker_count(threads)
    if workers == 1:
        records = [task(t) for t in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(task, range(trials)))

    per_n = []
    for idx, n in enumerate(n_list):
        matches = denom = excluded = failed = 0
        r_hats = []
        r_gaps = []
        dist_n = {}
        dist_g = {}
        for rec in records:
            if rec["failed"]:
                failed += 1
                continue
            row = rec["per_n"][idx]
            if row["failed"]:
                failed += 1
                continue
            if not rec["hypothesis_ok"]:
                excluded += 1
                continue
            denom += 1
            matches += int(row["match"])
            r_hats.append(row["R_hat"])
            if np.isfinite(row["R_hat"]) and np.isfinite(rec["R"]):
                r_gaps.append(abs(row["R_hat"] - rec["R"]))
            k_n = row["counts"]["N_M"]
            k_g = rec["counts_G"]["N_M"]
            dist_n[k_n] = dist_n.get(k_n, 0) + 1
            dist_g[k_g] = dist_g.get(k_g, 0) + 1
        tv = None
        if denom:
            keys = set(dist_n) | set(dist_g)
            tv = 0.5 * sum(abs(dist_n.get(k, 0) - dist_g.get(k, 0))
                           for k in keys) / denom
        per_n.append({
            "n": n,
            "matches": matches,
            "denominator": denom,
            "frequency": (matches / denom) if denom else None,
            "excluded_hypothesis": excluded,
            "failed": failed,
            "min_R_hat": min(r_hats) if r_hats else None,
            "median_R_gap": float(np.median(r_gaps)) if r_gaps else None,
            "tv_distance_N_M": tv,
        })

    ok = [r for r in records if not r["failed"]]

    def stratum_rate(mask_fn):
        sel = [r for r in ok if mask_fn(r["M"])]
        hits = total = 0
        for r in sel:
            row = r["per_n"][-1]
            if row["failed"]:
                continue
            total += 1
            hits += int(row["match"])
        return {"trials": total,
                "frequency": (hits / total) if total else None}

    report = {
        "spec": spec.as_record(),
        "noise": noise_spec.as_record(),
        "n_list": n_list,
        "trials": trials,
        "seed": int(seed),
        "grid_res": res,
        "per_n": per_n,
        "strata_last_n": {
            "M_below_1e-4": stratum_rate(lambda m: m < 1e-4),
            "M_above_1e-2": stratum_rate(lambda m: m > 1e-2),
        },
        "hypothesis_tols": {"L": HYPOTHESIS_L_TOL, "R": HYPOTHESIS_R_TOL,
                            "M": HYPOTHESIS_M_TOL},
        "records": records,
    }
    return report
