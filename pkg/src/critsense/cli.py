"""Command line frontend.

Subcommands: classify, audit, flow, mountain, sequence, montecarlo,
gallery. Artifacts are JSON (default) or CSV, carry the effective config
and toolkit version, print every float with 17 significant digits, and
are byte-identical across runs with the same config.

Exit codes: 0 success, 1 numeric failure (structured error JSON on
stderr; a failed index audit also exits 1), 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import json.encoder
import sys
from fractions import Fraction

import numpy as np

from . import __version__, detect
from .domains import Ball, Box, Domain, Interval
from .errors import CritsenseError, PreconditionError, UsageError
from .gallery import catalogue, entry as gallery_entry, gallery
from .homindex import classify_by_index, homological_index, \
    poincare_hopf_audit
from .morse import make_chart, morse_flow_trajectory, verify_morse_chart
from .mountainpass import mountain_pass_point
from .randfield import BasisSpec, monte_carlo_convergence, worker_count
from .sequence import convergence_experiment, counts_from_points

_FLOAT_FMT = ".17g"


class PrecisionEncoder(json.JSONEncoder):
    """JSON encoder printing floats with 17 significant digits.

    Reimplements iterencode around the pure-Python serializer because
    the C fast path hardwires repr() for floats.
    """

    def default(self, o):
        if isinstance(o, Fraction):
            return f"{o.numerator}/{o.denominator}"
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super().default(o)

    def iterencode(self, o, _one_shot=False):
        markers = {} if self.check_circular else None

        def floatstr(x, allow_nan=self.allow_nan):
            if x != x:
                text = "NaN"
            elif x == float("inf"):
                text = "Infinity"
            elif x == float("-inf"):
                text = "-Infinity"
            else:
                return format(x, _FLOAT_FMT)
            if not allow_nan:
                raise ValueError("out of range float: " + repr(x))
            return text

        walk = json.encoder._make_iterencode(
            markers, self.default, json.encoder.encode_basestring_ascii,
            self.indent, floatstr, self.key_separator, self.item_separator,
            self.sort_keys, self.skipkeys, _one_shot)
        return walk(o, 0)


def dumps(obj) -> str:
    return json.dumps(obj, cls=PrecisionEncoder, indent=2, sort_keys=True)


def _cell(v) -> str:
    if isinstance(v, bool) or isinstance(v, np.bool_):
        return "true" if v else "false"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, (float, np.floating)):
        return format(float(v), _FLOAT_FMT)
    if v is None:
        return ""
    return str(v)


def _csv_text(header, rows, preamble) -> str:
    buf = io.StringIO()
    for k, v in preamble:
        buf.write(f"# {k}: {v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def parse_domain(text: str) -> Domain:
    """`interval:a,b` | `box:lo1,lo2:hi1,hi2` | `ball:cx,cy:r`."""
    kind, _, rest = text.partition(":")
    try:
        if kind == "interval":
            a, b = (float(t) for t in rest.split(","))
            return Interval(a, b)
        if kind == "box":
            lo_s, hi_s = rest.split(":")
            lo = [float(t) for t in lo_s.split(",")]
            hi = [float(t) for t in hi_s.split(",")]
            return Box(lo, hi)
        if kind == "ball":
            c_s, r_s = rest.split(":")
            center = [float(t) for t in c_s.split(",")]
            return Ball(center, float(r_s))
    except (ValueError, CritsenseError) as err:
        raise UsageError(f"bad domain spec {text!r}: {err}") from None
    raise UsageError(f"unknown domain kind {kind!r} "
                     "(expected interval, box, or ball)")


def _floats(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"expected comma-separated reals, got {text!r}")


def _resolve(args):
    ent = gallery_entry(args.gallery)
    field = gallery(args.gallery, getattr(args, "n", 1) or 1)
    dom = parse_domain(args.domain) if args.domain else ent.domain
    return ent, field, dom


def _config(args, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items()
           if k not in ("func", "out") and v is not None}
    cfg.update(extra)
    return cfg


def _artifact(command: str, args, result, **extra) -> dict:
    return {"command": command, "version": __version__,
            "config": _config(args, **extra), "result": result}


def _preamble(artifact) -> list:
    return [("command", artifact["command"]),
            ("version", artifact["version"]),
            ("config", json.dumps(artifact["config"], sort_keys=True,
                                  cls=PrecisionEncoder))]


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- #
# subcommands
# ---------------------------------------------------------------- #

def _cmd_classify(args) -> int:
    ent, field, dom = _resolve(args)
    grid = args.grid or (1024 if ent.dim == 1 else 64)
    tol = args.tol or 1e-9
    if args.point:
        z = _floats(args.point)
        idx = homological_index(field, z, domain=dom, eps=args.eps)
        probe = args.eps or 0.25 * min(1.0, float(dom.boundary_distance(z)))
        cls = classify_by_index(field, z, probe, index=idx)
        result = {"point": {"location": z.tolist(), "hom_index": idx,
                            "classification": cls}}
        rows = [(z.tolist(), None, None, idx, cls, False)]
    else:
        pts = detect.find_critical_points(field, dom, grid_res=grid,
                                          newton_tol=tol)
        result = {"points": [p.as_record() for p in pts],
                  "counts": counts_from_points(pts),
                  "unresolved": pts.unresolved}
        rows = [(p.location.tolist(), p.value, p.morse_index, p.hom_index,
                 p.classification, p.near_boundary) for p in pts]
    art = _artifact("classify", args, result, grid=grid, tol=tol)
    if args.format == "csv":
        flat = [tuple(loc) + (val, mi, hi, cls, nb)
                for loc, val, mi, hi, cls, nb in rows]
        dim = len(rows[0][0]) if rows else ent.dim
        header = [f"x{i + 1}" for i in range(dim)] + \
            ["value", "morse_index", "hom_index", "classification",
             "near_boundary"]
        _emit(_csv_text(header, flat, _preamble(art)), args.out)
    else:
        _emit(dumps(art) + "\n", args.out)
    return 0


def _cmd_audit(args) -> int:
    ent, field, dom = _resolve(args)
    grid = args.grid or (1024 if ent.dim == 1 else 48)
    tol = args.tol or 1e-9
    res = poincare_hopf_audit(field, dom, grid_res=grid, newton_tol=tol)
    art = _artifact("audit", args, res.as_record(), grid=grid, tol=tol)
    if args.format == "csv":
        rows = [tuple(p["location"]) + (p["index"], p["weight"])
                for p in res.as_record()["per_point"]]
        dim = ent.dim
        header = [f"x{i + 1}" for i in range(dim)] + ["index", "weight"]
        pre = _preamble(art) + [("total", str(res.total)),
                                ("target", str(res.euler_target)),
                                ("pass", "true" if res.passed else "false")]
        _emit(_csv_text(header, rows, pre), args.out)
    else:
        _emit(dumps(art) + "\n", args.out)
    return 0 if res.passed else 1


def _cmd_flow(args) -> int:
    ent, field, dom = _resolve(args)
    tol = args.tol or 1e-9
    ode_step = args.ode_step or 1e-3
    lo, hi = dom.bounding_box()
    seed_pt = _floats(args.point) if args.point else 0.5 * (lo + hi)
    center = detect.refine_newton(field, seed_pt, tol=tol)
    cap = max(float(dom.boundary_distance(center)), 1e-6)
    chart = make_chart(field, center, search_cap=cap, ode_step=ode_step)
    ver = verify_morse_chart(field, chart, n_samples=100, seed=args.seed,
                             ode_step=ode_step)
    result = {"chart": chart.as_record(), "verification": ver}
    art = _artifact("flow", args, result, tol=tol, ode_step=ode_step)
    if args.format == "csv":
        offset = _floats(args.sample) if args.sample else \
            0.5 * chart.radius * np.eye(ent.dim)[0]
        ts, path = morse_flow_trajectory(field, chart, center + offset,
                                         ode_step=ode_step)
        rows = [(t,) + tuple(p) for t, p in zip(ts, path)]
        header = ["t"] + [f"x{i + 1}" for i in range(ent.dim)]
        _emit(_csv_text(header, rows, _preamble(art)), args.out)
    else:
        _emit(dumps(art) + "\n", args.out)
    return 0


def _two_peaks(field, dom, grid, tol):
    pts = detect.find_critical_points(field, dom, grid_res=grid,
                                      newton_tol=tol)
    maxima = sorted((p for p in pts if p.classification == "Max"),
                    key=lambda p: -p.value)
    if len(maxima) < 2:
        raise PreconditionError("need two local maxima for a pass search",
                                found=len(maxima))
    return maxima[0].location, maxima[1].location


def _cmd_mountain(args) -> int:
    ent, field, dom = _resolve(args)
    grid = args.grid or 64
    tol = args.tol or 1e-6
    if args.p1 and args.p2:
        p1, p2 = _floats(args.p1), _floats(args.p2)
    elif args.p1 or args.p2:
        raise UsageError("give both --p1 and --p2, or neither")
    else:
        p1, p2 = _two_peaks(field, dom, grid, min(tol, 1e-9))
    res = mountain_pass_point(field, dom, p1, p2, n_knots=args.knots,
                              pass_tol=tol)
    art = _artifact("mountain", args, res.as_record(), grid=grid, tol=tol,
                    p1=np.asarray(p1).tolist(), p2=np.asarray(p2).tolist())
    if args.format == "csv":
        vals = field.value(res.path)
        rows = [(i,) + tuple(k) + (v,)
                for i, (k, v) in enumerate(zip(res.path, vals))]
        header = ["knot"] + [f"x{i + 1}" for i in range(ent.dim)] + ["f"]
        _emit(_csv_text(header, rows, _preamble(art)), args.out)
    else:
        _emit(dumps(art) + "\n", args.out)
    return 0


def _cmd_sequence(args) -> int:
    n_list = [int(t) for t in args.n.split(",")]
    dom = parse_domain(args.domain) if args.domain else None
    rep = convergence_experiment(args.gallery, n_list, domain=dom,
                                 grid_res=args.grid,
                                 newton_tol=args.tol or 1e-9)
    art = _artifact("sequence", args, rep.as_record())
    if args.format == "csv":
        header = ["n", "N_C", "N_M", "N_m", "N_S", "N_und", "N_unclassified",
                  "N_IM", "N_Im", "d0", "d1", "d2", "resolution",
                  "boundary_min_gradient", "matched", "unmatched_n",
                  "unmatched_limit", "multi_match", "unresolved"]
        rows = []
        for r in rep.rows:
            if "counts" not in r:
                continue
            c = r["counts"]
            rows.append((r["n"], c["N_C"], c["N_M"], c["N_m"], c["N_S"],
                         c["N_und"], c["N_unclassified"], c["N_IM"],
                         c["N_Im"], r["d0"], r["d1"], r["d2"],
                         r["resolution"], r["boundary_min_gradient"],
                         r["matched"], r["unmatched_n"],
                         r["unmatched_limit"], r["multi_match"],
                         r["unresolved"]))
        pre = _preamble(art) + [("verdict", rep.verdict)]
        _emit(_csv_text(header, rows, pre), args.out)
    else:
        _emit(dumps(art) + "\n", args.out)
    return 0


def _load_mc_config(path: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except OSError as err:
        raise UsageError(f"cannot read config file: {err}")
    except json.JSONDecodeError as err:
        raise UsageError(f"config file is not valid JSON: {err}")
    for key in ("D", "degree", "noise", "n_list", "trials", "seed"):
        if key not in cfg:
            raise UsageError(f"config missing required key {key!r}")
    noise = cfg["noise"]
    if not isinstance(noise, dict) or "amplitude" not in noise:
        raise UsageError("config key 'noise' must be an object with "
                         "at least 'amplitude'")
    return cfg


def _cmd_montecarlo(args) -> int:
    cfg = _load_mc_config(args.config)
    spec = BasisSpec(dim=int(cfg["D"]), degree=int(cfg["degree"]),
                     amplitude=float(cfg.get("amplitude", 1.0)),
                     decay=float(cfg.get("decay", 2.0)))
    noise_cfg = cfg["noise"]
    noise = BasisSpec(dim=int(cfg["D"]),
                      degree=int(noise_cfg.get("degree", cfg["degree"])),
                      amplitude=float(noise_cfg["amplitude"]),
                      decay=float(noise_cfg.get("decay", 2.0)))
    seed = args.seed if args.seed is not None else int(cfg["seed"])
    rep = monte_carlo_convergence(spec, noise, cfg["n_list"],
                                  trials=int(cfg["trials"]), seed=seed,
                                  threads=args.threads,
                                  grid_res=args.grid)
    art = _artifact("montecarlo", args, rep,
                    threads=worker_count(args.threads), seed=seed)
    if args.format == "csv":
        header = ["n", "frequency", "matches", "denominator",
                  "excluded_hypothesis", "failed", "min_R_hat",
                  "median_R_gap", "tv_distance_N_M"]
        rows = [(r["n"], r["frequency"], r["matches"], r["denominator"],
                 r["excluded_hypothesis"], r["failed"], r["min_R_hat"],
                 r["median_R_gap"], r["tv_distance_N_M"])
                for r in rep["per_n"]]
        _emit(_csv_text(header, rows, _preamble(art)), args.out)
    else:
        _emit(dumps(art) + "\n", args.out)
    return 0


def _cmd_gallery(args) -> int:
    rows = catalogue()
    art = _artifact("gallery", args, rows)
    if args.format == "csv":
        header = ["name", "dim", "family", "origin", "domain", "note"]
        flat = [tuple(r[k] for k in header) for r in rows]
        _emit(_csv_text(header, flat, _preamble(art)), args.out)
    else:
        _emit(dumps(art) + "\n", args.out)
    return 0


# ---------------------------------------------------------------- #
# parser
# ---------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="critsense",
        description="Critical point detection, index audits, Morse "
                    "charts, mountain passes, and convergence labs.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, domain=True):
        sp.add_argument("--gallery", required=True,
                        help="gallery field name (see the gallery command)")
        if domain:
            sp.add_argument("--domain", help="interval:a,b | "
                            "box:lo1,lo2:hi1,hi2 | ball:cx,cy:r")
        sp.add_argument("--grid", type=int, help="detection grid resolution")
        sp.add_argument("--tol", type=float, help="refinement tolerance")
        sp.add_argument("--out", help="write the artifact to this path")
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("classify", help="detect and classify critical "
                        "points, or classify one --point")
    common(sp)
    sp.add_argument("--n", type=int, default=1, help="family member index")
    sp.add_argument("--point", help="classify this point only (x,y)")
    sp.add_argument("--eps", type=float, help="probe radius for --point")
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("audit", help="Poincare-Hopf index audit")
    common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.set_defaults(func=_cmd_audit)

    sp = sub.add_parser("flow", help="Morse chart at a critical point, "
                        "with optional trajectory CSV")
    common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--point", help="Newton seed (defaults to the domain "
                    "center)")
    sp.add_argument("--ode-step", type=float, help="RK4 step in t")
    sp.add_argument("--sample", help="offset from the center for the "
                    "trajectory (csv format)")
    sp.add_argument("--seed", type=int, default=0,
                    help="verification sample seed")
    sp.set_defaults(func=_cmd_flow)

    sp = sub.add_parser("mountain", help="mountain pass between two maxima")
    common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--p1", help="first peak (x,y); auto-detected if "
                    "omitted")
    sp.add_argument("--p2", help="second peak (x,y)")
    sp.add_argument("--knots", type=int, default=16)
    sp.set_defaults(func=_cmd_mountain)

    sp = sub.add_parser("sequence", help="family-vs-limit convergence "
                        "report")
    common(sp)
    sp.add_argument("--n", default="4,16,64",
                    help="comma-separated member indices")
    sp.set_defaults(func=_cmd_sequence)

    sp = sub.add_parser("montecarlo", help="random-field count agreement "
                        "frequencies")
    sp.add_argument("--config", required=True,
                    help="JSON file: D, degree, decay, amplitude, noise "
                    "{amplitude, degree, decay}, n_list, trials, seed")
    sp.add_argument("--threads", type=int,
                    help="worker cap (default: CRITSENSE_THREADS or 8)")
    sp.add_argument("--grid", type=int)
    sp.add_argument("--seed", type=int, help="override the config seed")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=_cmd_montecarlo)

    sp = sub.add_parser("gallery", help="list the field catalogue")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=_cmd_gallery)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as err:
        sys.stderr.write(dumps({"error": {
            "type": type(err).__name__, "message": str(err),
            "context": err.context}}) + "\n")
        return 2
    except CritsenseError as err:
        sys.stderr.write(dumps({"error": {
            "type": type(err).__name__, "message": str(err),
            "context": err.context}}) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
