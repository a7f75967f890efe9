"""C^k distances, critical point matching, and convergence experiments.

Measures how a gallery family approaches its limit: sup-norm distances
of values and derivatives, per-member critical point counts, pairwise
matching against the limit's points, and a verdict on whether the
counting theorems' hypotheses and conclusions hold at the tested n.
"""

from __future__ import annotations

from dataclasses import dataclass, field as _dcfield

import numpy as np

from . import detect
from .domains import Domain
from .errors import NoConvergenceError, UsageError
from .fields import ScalarField, spectral_norms
from .gallery import GalleryEntry, entry as gallery_entry, gallery, limit_field

HYPOTHESIS_BOUNDARY_TOL = 1e-4
HYPOTHESIS_RESOLUTION_TOL = 1e-3


def ck_distance(f: ScalarField, g: ScalarField, domain: Domain, k: int = 2,
                grid_res: int = 128) -> tuple:
    """Grid sup distances (d0, ..., dk): values, Euclidean gradient gap,
    spectral Hessian gap."""
    if k not in (0, 1, 2):
        raise UsageError("k must be 0, 1, or 2")
    lat = domain.lattice(grid_res)
    inside = np.asarray(domain.contains(lat))
    out = []
    d0 = np.abs(np.asarray(f.value(lat)) - np.asarray(g.value(lat)))
    out.append(float(np.max(d0[inside])))
    if k >= 1:
        d1 = np.linalg.norm(f.grad(lat) - g.grad(lat), axis=-1)
        out.append(float(np.max(d1[inside])))
    if k >= 2:
        d2 = spectral_norms(f.hess(lat) - g.hess(lat))
        out.append(float(np.max(d2[inside])))
    return tuple(out)


# ---------------------------------------------------------------- #
# matching
# ---------------------------------------------------------------- #

@dataclass
class Matching:
    pairs: list            # (i_n, i_limit, distance)
    unmatched_n: list      # indices into pts_n
    unmatched_limit: list  # indices into pts_limit
    multi_match: bool
    radius: float
    index_agreement: list  # per pair: {"hom": bool|None, "morse": bool|None}

    @property
    def bijective(self) -> bool:
        return not self.unmatched_n and not self.unmatched_limit

    def as_record(self) -> dict:
        return {
            "pairs": [(int(i), int(j), float(d)) for i, j, d in self.pairs],
            "unmatched_n": [int(i) for i in self.unmatched_n],
            "unmatched_limit": [int(i) for i in self.unmatched_limit],
            "multi_match": self.multi_match,
            "radius": self.radius,
            "bijective": self.bijective,
            "index_agreement": self.index_agreement,
        }


def _locations(pts) -> np.ndarray:
    locs = []
    for p in pts:
        locs.append(np.asarray(p.location if hasattr(p, "location") else p,
                               dtype=float))
    return np.asarray(locs) if locs else np.zeros((0, 1))


def match_critical_points(pts_n, pts_limit, radius: float | None = None,
                          domain: Domain | None = None) -> Matching:
    """Greedy nearest-pair matching under a radius cap.

    Candidate pairs are ordered by distance with a lexicographic tie
    break on the sorted location pair, so match(A, B) and match(B, A)
    agree. MultiMatch flags a limit point with two or more family points
    inside its radius: a resolution-assumption violation witness.
    """
    locs_n = _locations(pts_n)
    locs_l = _locations(pts_limit)
    if radius is None:
        r_res = detect.resolution(pts_limit) / 2.0
        cands = [r_res]
        if domain is not None:
            cands.append(domain.diameter / 10.0)
        radius = min(c for c in cands if np.isfinite(c)) if any(
            np.isfinite(c) for c in cands) else np.inf
    if not radius > 0:
        raise UsageError("matching radius must be positive")
    pairs_all = []
    for i in range(len(locs_n)):
        for j in range(len(locs_l)):
            d = float(np.linalg.norm(locs_n[i] - locs_l[j]))
            if d <= radius:
                a, b = sorted([tuple(locs_n[i]), tuple(locs_l[j])])
                pairs_all.append((d, a, b, i, j))
    pairs_all.sort()
    used_n, used_l, pairs = set(), set(), []
    per_limit = {}
    for d, _, _, i, j in pairs_all:
        per_limit.setdefault(j, set()).add(i)
        if i in used_n or j in used_l:
            continue
        used_n.add(i)
        used_l.add(j)
        pairs.append((i, j, d))
    multi = any(len(v) >= 2 for v in per_limit.values())
    agree = []
    for i, j, _ in pairs:
        pn, pl = pts_n[i], pts_limit[j]
        row = {"hom": None, "morse": None}
        if hasattr(pn, "hom_index") and hasattr(pl, "hom_index"):
            if pn.hom_index is not None and pl.hom_index is not None:
                row["hom"] = bool(pn.hom_index == pl.hom_index)
            if pn.morse_index is not None and pl.morse_index is not None:
                row["morse"] = bool(pn.morse_index == pl.morse_index)
        agree.append(row)
    return Matching(
        pairs=pairs,
        unmatched_n=sorted(set(range(len(locs_n))) - used_n),
        unmatched_limit=sorted(set(range(len(locs_l))) - used_l),
        multi_match=multi,
        radius=float(radius),
        index_agreement=agree,
    )


# ---------------------------------------------------------------- #
# counting
# ---------------------------------------------------------------- #

def counts_from_points(points) -> dict:
    n_max = n_min = n_sad = n_und = n_unc = 0
    hom = {}
    morse = {}
    for p in points:
        cls = p.classification
        if cls == "Max":
            n_max += 1
        elif cls == "Min":
            n_min += 1
        elif cls.startswith("Saddle"):
            n_sad += 1
        elif cls == "Undulation":
            n_und += 1
        else:
            n_unc += 1
        hk = "unavailable" if p.hom_index is None else str(int(p.hom_index))
        hom[hk] = hom.get(hk, 0) + 1
        mk = "degenerate" if p.morse_index is None else str(int(p.morse_index))
        morse[mk] = morse.get(mk, 0) + 1
    return {
        "N_C": len(points),
        "N_M": n_max,
        "N_m": n_min,
        "N_S": n_sad,
        "N_und": n_und,
        "N_unclassified": n_unc,
        "hom": dict(sorted(hom.items())),
        "morse": dict(sorted(morse.items())),
    }


def count_report(field: ScalarField, domain: Domain, grid_res: int = 64,
                 newton_tol: float = 1e-9,
                 improper_grid_res: int = 256) -> dict:
    """Full critical point counts plus improper extrema for one field."""
    pts = detect.find_critical_points(field, domain, grid_res=grid_res,
                                      newton_tol=newton_tol)
    rec = counts_from_points(pts)
    rec["unresolved"] = len(pts.unresolved)
    imp = detect.improper_extrema(field, domain, grid_res=improper_grid_res)
    rec["N_IM"] = imp["n_improper_max"]
    rec["N_Im"] = imp["n_improper_min"]
    return rec


def _default_grid(dim: int, n: int) -> int:
    if dim == 1:
        return max(1024, 32 * n)
    return max(64, 16 * n)


@dataclass
class SequenceReport:
    family: str
    n_list: list
    rows: list = _dcfield(default_factory=list)
    limit_counts: dict = _dcfield(default_factory=dict)
    limit_resolution: float = float("inf")
    hypothesis: dict = _dcfield(default_factory=dict)
    conclusion: dict = _dcfield(default_factory=dict)
    verdict: str = ""

    def as_record(self) -> dict:
        return {
            "family": self.family,
            "n_list": list(self.n_list),
            "rows": list(self.rows),
            "limit_counts": dict(self.limit_counts),
            "limit_resolution": self.limit_resolution,
            "hypothesis": dict(self.hypothesis),
            "conclusion": dict(self.conclusion),
            "verdict": self.verdict,
        }


def _resolve_entry(family) -> GalleryEntry:
    if isinstance(family, GalleryEntry):
        return family
    return gallery_entry(str(family))


def convergence_experiment(family, n_list, domain: Domain | None = None,
                           grid_res: int | None = None,
                           newton_tol: float = 1e-9,
                           ck_grid_res: int = 256,
                           matching_radius: float | None = None,
                           improper_grid_res: int | None = None
                           ) -> SequenceReport:
    """Per-n counts, distances, and matchings against the family limit,
    with a consistency verdict.

    The verdict is "inconsistent" only when the counting theorems'
    hypotheses hold numerically (boundary gradient and resolution above
    the documented thresholds) yet the count conclusions fail at the
    largest n; every other combination is "consistent".
    """
    ent = _resolve_entry(family)
    if ent.limit is None:
        raise UsageError("family has no documented limit",
                         family=ent.name)
    dom = domain if domain is not None else ent.domain
    f_limit = limit_field(ent.name)
    lim_res = grid_res if grid_res is not None else _default_grid(ent.dim, 16)
    imp_res = improper_grid_res if improper_grid_res is not None else (
        4096 if ent.dim == 1 else 256)
    pts_limit = detect.find_critical_points(
        f_limit, dom, grid_res=lim_res, newton_tol=newton_tol)
    limit_counts = counts_from_points(pts_limit)
    imp = detect.improper_extrema(f_limit, dom, grid_res=imp_res)
    limit_counts["N_IM"] = imp["n_improper_max"]
    limit_counts["N_Im"] = imp["n_improper_min"]
    limit_resolution = detect.resolution(pts_limit)

    rows = []
    for n in n_list:
        f_n = gallery(ent.name, n)
        res = grid_res if grid_res is not None else _default_grid(ent.dim, n)
        row = {"n": int(n)}
        try:
            pts = detect.find_critical_points(f_n, dom, grid_res=res,
                                              newton_tol=newton_tol)
        except NoConvergenceError as err:
            row["error"] = {"type": type(err).__name__,
                            "context": err.context}
            rows.append(row)
            continue
        counts = counts_from_points(pts)
        imp = detect.improper_extrema(f_n, dom, grid_res=imp_res)
        counts["N_IM"] = imp["n_improper_max"]
        counts["N_Im"] = imp["n_improper_min"]
        d = ck_distance(f_n, f_limit, dom, k=2, grid_res=ck_grid_res)
        m = match_critical_points(pts, pts_limit, radius=matching_radius,
                                  domain=dom)
        row.update({
            "counts": counts,
            "d0": d[0], "d1": d[1], "d2": d[2],
            "resolution": detect.resolution(pts),
            "boundary_min_gradient": detect.boundary_min_gradient(f_n, dom),
            "matched": len(m.pairs),
            "unmatched_n": len(m.unmatched_n),
            "unmatched_limit": len(m.unmatched_limit),
            "multi_match": m.multi_match,
            "matching": m.as_record(),
            "unresolved": len(pts.unresolved),
        })
        rows.append(row)

    good = [r for r in rows if "counts" in r]
    hyp_boundary = bool(good) and all(
        r["boundary_min_gradient"] > HYPOTHESIS_BOUNDARY_TOL for r in good)
    res_seq = [r["resolution"] for r in good]
    above_floor = bool(res_seq) and all(
        r >= HYPOTHESIS_RESOLUTION_TOL for r in res_seq)
    # A resolution that halves across the tested range is treated as a
    # decreasing-to-zero trend even while still above the floor.
    shrinking = len(res_seq) >= 2 and np.isfinite(res_seq[0]) and \
        res_seq[-1] <= 0.5 * res_seq[0]
    hyp_resolution = above_floor and not shrinking
    hypothesis = {
        "boundary_gradient_holds": hyp_boundary,
        "resolution_holds": hyp_resolution,
        "resolution_above_floor": above_floor,
        "resolution_shrinking": bool(shrinking),
        "boundary_tol": HYPOTHESIS_BOUNDARY_TOL,
        "resolution_tol": HYPOTHESIS_RESOLUTION_TOL,
    }
    conclusion = {}
    if good:
        last = good[-1]["counts"]
        conclusion = {
            "counts_equal": all(
                last[k] == limit_counts[k]
                for k in ("N_C", "N_M", "N_m", "N_S")),
            "hom_counts_equal": last["hom"] == limit_counts["hom"],
        }
    holds = bool(conclusion) and conclusion["counts_equal"] and \
        conclusion["hom_counts_equal"]
    if hyp_boundary and hyp_resolution and not holds:
        verdict = "inconsistent"
    else:
        verdict = "consistent"
    return SequenceReport(
        family=ent.name, n_list=[int(n) for n in n_list], rows=rows,
        limit_counts=limit_counts, limit_resolution=limit_resolution,
        hypothesis=hypothesis, conclusion=conclusion, verdict=verdict)


def resolution_sequence(family, n_list, domain: Domain | None = None,
                        grid_res: int | None = None,
                        newton_tol: float = 1e-9) -> list:
    """Per-n resolution estimates [(n, R)]."""
    ent = _resolve_entry(family)
    dom = domain if domain is not None else ent.domain
    out = []
    for n in n_list:
        f_n = gallery(ent.name, n)
        res = grid_res if grid_res is not None else _default_grid(ent.dim, n)
        pts = detect.find_critical_points(f_n, dom, grid_res=res,
                                          newton_tol=newton_tol)
        out.append((int(n), detect.resolution(pts)))
    return out
