"""Command line front end.

Subcommands: ``forward``, ``convergence``, ``farfield``, ``dtn-check``,
``invert`` and the debugging dump ``specfun-table``. Runs read an INI file
(see ``anisoscat.config``) and write their artifacts into the output
directory; ``ANISOSCAT_OUT`` overrides the default directory when ``--out``
is not given.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import config as cf
from . import dtncheck, farfield, fem
from . import inverse as inv
from .dtn2d import DtnConsistencyError
from .estimators import ObstacleReconstructor
from .mesh import GeometryError
from .special import DomainError, HankelOverflowError, hankel_ratio
from .validation import convergence_study

REPORT_SCHEMA = 1
NUMERICAL_ERRORS = (fem.AssemblyError, fem.NyquistError, fem.SolverError, GeometryError, DtnConsistencyError, DomainError, HankelOverflowError)


class StageError(RuntimeError):
    pass


def _fmt(x):
    return f"{x:.12g}"


def _write(out: Path, name: str, text: str):
    path = out / name
    path.write_text(text, encoding="utf-8")
    print(path)
    return path


def _load(args) -> cf.ExperimentConfig:
    if args.config is None:
        return cf.ExperimentConfig({})
    cfg = cf.load_config(args.config)
    if args.nt is not None:
        cfg = cfg.with_values(dtn__n_modes=args.nt)
    return cfg


def _n_modes(args, cfg):
    return args.nt if args.nt is not None else cfg.get("dtn.n_modes")


def _refined(mesh, levels):
    for _ in range(levels):
        mesh = mesh.refine()
    return mesh


# ---------------------------------------------------------------- subcommands


def run_forward(args, cfg, out: Path):
    level = args.mesh_level or 0
    if cfg.kind in cf.VALIDATION_KINDS:
        for k, omega in enumerate(cf.frequencies(cfg)):
            pb = cf.validation_problem(cfg, omega)
            mesh = _refined(pb.mesh(cfg.get("mesh.h")), level)
            _, sol = pb.solve(mesh, _n_modes(args, cfg))
            _write(out, f"field_w{k}.csv", sol.to_csv())
        return 0
    sc = cf.scenario(cfg)
    truth = inv.ShapeParams.from_curves(cf.obstacle_curves(cfg), max(c.order for c in cf.obstacle_curves(cfg)))
    mesh = _refined(inv.build_mesh(truth, sc), level)
    for k, omega in enumerate(sc.frequencies):
        st = inv.forward_state(truth, sc, omega, mesh=mesh)
        for j in range(len(sc.directions)):
            _write(out, f"field_w{k}_d{j}.csv", st.solutions[j].to_csv())
    return 0


def convergence_csv(cfg, levels, n_modes=None) -> str:
    rows = ["omega,level,h,n_nodes,e0,order_e0,e1,order_e1"]
    for omega in cf.frequencies(cfg):
        pb = cf.validation_problem(cfg, omega)
        for r in convergence_study(pb, levels, n_modes, cfg.get("mesh.h")):
            o0 = "" if r.level == 0 else f"{r.order0:.4f}"
            o1 = "" if r.level == 0 else f"{r.order1:.4f}"
            rows.append(f"{_fmt(omega)},{r.level},{_fmt(r.h)},{r.n_nodes},{r.e0:.6e},{o0},{r.e1:.6e},{o1}")
    return "\n".join(rows) + "\n"


def run_convergence(args, cfg, out: Path):
    if cfg.kind not in cf.VALIDATION_KINDS:
        raise cf.ConfigError("problem.kind", "convergence needs a validation problem with a known solution")
    levels = args.mesh_level if args.mesh_level else cfg.get("mesh.levels", 3)
    _write(out, "convergence.csv", convergence_csv(cfg, levels, _n_modes(args, cfg)))
    return 0


def run_farfield(args, cfg, out: Path):
    level = args.mesh_level or 0
    angles = farfield.uniform_angles(cfg.get("output.far_angles", 360))
    if cfg.kind in cf.VALIDATION_KINDS:
        for k, omega in enumerate(cf.frequencies(cfg)):
            pb = cf.validation_problem(cfg, omega)
            mesh = _refined(pb.mesh(cfg.get("mesh.h")), level)
            sys_, sol = pb.solve(mesh, _n_modes(args, cfg))
            ff = farfield.farfield_from_trace(sys_.dtn, sol.boundary_trace(sys_.dtn.modes), angles)
            _write(out, f"farfield_w{k}.csv", ff.to_csv())
        return 0
    sc = cf.scenario(cfg)
    curves = cf.obstacle_curves(cfg)
    truth = inv.ShapeParams.from_curves(curves, max(c.order for c in curves))
    mesh = _refined(inv.build_mesh(truth, sc), level)
    for k, omega in enumerate(sc.frequencies):
        st = inv.forward_state(truth, sc, omega, mesh=mesh)
        for j, sol in st.solutions.items():
            inc = sc.incidence(omega, j).value(mesh.nodes[mesh.ring])
            tr = sol.boundary_trace(st.system.dtn.modes, subtract=inc)
            _write(out, f"farfield_w{k}_d{j}.csv", farfield.farfield_from_trace(st.system.dtn, tr, angles).to_csv())
    return 0


def run_dtn_check(args, cfg, out: Path):
    draws = cfg.get("dtn.draws", 10)
    seed = args.seed
    if args.dim == 2:
        rows, m_emp, bad = dtncheck.check_2d(draws, cfg.get("dtn.n_max", 200), seed)
    else:
        rows, m_emp, bad = dtncheck.check_3d(draws, cfg.get("dtn.n_max", 100), seed)
    _write(out, f"dtn_check_{args.dim}d.csv", dtncheck.rows_to_csv(rows))
    summary = {"dim": args.dim, "draws": draws, "seed": seed, "violations": bad, "m_emp": {f"{d}/{c}": m for (d, c), m in sorted(m_emp.items())}}
    _write(out, f"dtn_check_{args.dim}d.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(f"violations: {bad}")
    return 0 if bad == 0 else 1


def summarize_report(report: dict) -> dict:
    """Statistics recomputed from the stored report fields alone."""
    rerr = report["rerror"]
    shapes = inv.ShapeParams(tuple(np.array(v) for v in report["params"]), report["order"])
    summary = {
        "initial_rerror": rerr[0],
        "final_rerror": rerr[-1],
        "monotone": all(b < a for a, b in zip(rerr, rerr[1:])),
        "areas": [round(c.area(), 10) for c in shapes.curves()],
    }
    if report.get("truth") is not None:
        truth = inv.ShapeParams(tuple(np.array(v) for v in report["truth"]["params"]), report["truth"]["order"])
        summary["symmetric_difference_fraction"] = [
            round(inv.symmetric_difference_area(c, t) / t.area(), 10) for c, t in zip(shapes.curves(), truth.curves())
        ]
    return summary


def run_invert(args, cfg, out: Path):
    sc = cf.scenario(cfg)
    truth_curves = cf.obstacle_curves(cfg)
    data = inv.synthetic_data(
        truth_curves,
        sc,
        refine_factor=cfg.get("inversion.refine_factor", 2.0),
        extra_modes=cfg.get("inversion.extra_modes", 8),
        noise=cfg.get("inversion.noise", 0.0),
        seed=args.seed,
    )
    centers = cfg.get("inversion.initial_centers")
    if centers is None:
        if cfg.kind != "desk":
            raise cf.ConfigError("inversion.initial_centers", "required for custom inversions")
        centers = inv.DESK_INITIAL_CENTERS
    est = ObstacleReconstructor(
        sc,
        initial_centers=[tuple(c) for c in centers],
        initial_radius=cfg.get("inversion.initial_radius", 0.5),
        order=cfg.get("inversion.order", 10),
        iterations=cfg.get("inversion.iterations", 10),
        step_factor=cfg.get("inversion.step_factor", 0.005),
        method=cfg.get("inversion.method", "transmission"),
        backtrack=cfg.get("inversion.backtrack", False),
    )
    with open(out / "log.jsonl", "w", encoding="utf-8") as fh:
        try:
            est.fit(data, log=inv.jsonl_writer(fh))
        except NUMERICAL_ERRORS as exc:
            raise StageError(f"invert: descent failed: {exc}") from exc
    print(out / "log.jsonl")
    order = max(c.order for c in truth_curves)
    th = np.linspace(0, 2 * np.pi, 129)[:-1]
    report = {
        "schema": REPORT_SCHEMA,
        "order": est.order,
        "frequencies": list(sc.frequencies),
        "directions": list(sc.directions),
        "rerror": [float(r) for r in est.rerror_],
        "aborted_stages": list(est.aborted_stages_),
        "params": est.shape_.to_json(),
        "curves": [{"theta": th.tolist(), "points": c.point(th).tolist()} for c in est.curves_],
        "truth": {"order": order, "params": inv.ShapeParams.from_curves(truth_curves, order).to_json()},
    }
    report["summary"] = summarize_report(report)
    _write(out, "report.json", json.dumps(report, indent=1, sort_keys=True) + "\n")
    return 0


def specfun_csv(n_max, args_t) -> str:
    rows = ["n,t,re_h,im_h,re_dh,im_dh,log_abs_h,re_gamma,im_gamma"]
    for t in args_t:
        for n in range(n_max + 1):
            r = hankel_ratio(n, t)
            h = "," * 3 if r.h is None else f"{_fmt(r.h.real)},{_fmt(r.h.imag)},{_fmt(r.dh.real)},{_fmt(r.dh.imag)}"
            rows.append(f"{n},{_fmt(t)},{h},{_fmt(r.log_abs_h)},{_fmt(r.gamma.real)},{_fmt(r.gamma.imag)}")
    return "\n".join(rows) + "\n"


def run_specfun_table(args, cfg, out: Path):
    _write(out, "specfun_table.csv", specfun_csv(args.n_max, args.t))
    return 0


COMMANDS = {
    "forward": run_forward,
    "convergence": run_convergence,
    "farfield": run_farfield,
    "dtn-check": run_dtn_check,
    "invert": run_invert,
    "specfun-table": run_specfun_table,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="anisoscat", description="Elastic scattering with an exact DtN boundary and shape inversion.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI experiment file")
    common.add_argument("--out", help="output directory (default $ANISOSCAT_OUT or ./out)")
    common.add_argument("--threads", type=int, help="BLAS thread limit")
    common.add_argument("--seed", type=int, default=0, help="seed for noise and random parameter draws")
    common.add_argument("--mesh-level", type=int, help="uniform refinements (convergence: number of levels)")
    common.add_argument("--nt", type=int, help="DtN truncation N_t")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "dtn-check":
            p.add_argument("--dim", type=int, choices=(2, 3), default=2)
        if name == "specfun-table":
            p.add_argument("--n-max", type=int, default=50)
            p.add_argument("--t", type=float, nargs="+", default=[1.0])
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = Path(args.out or os.environ.get("ANISOSCAT_OUT", "out"))
    try:
        cfg = _load(args)
    except (cf.ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out.mkdir(parents=True, exist_ok=True)
    limit = threadpool_limits(args.threads) if args.threads else contextlib.nullcontext()
    try:
        with limit:
            return COMMANDS[args.command](args, cfg, out)
    except cf.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NUMERICAL_ERRORS as exc:
        print(f"error: {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
