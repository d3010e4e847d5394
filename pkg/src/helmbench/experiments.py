"""Named experiments. Each writes CSV tables through a :class:`Recorder`.

CSV schemas (one header row, floats written with ``repr``):

* ``fem_convergence.csv``: k, p, h, h_obstacle, n_dofs, rel_error_H1k, rel_error_L2
* ``pml_accuracy.csv``: role, k, p, theta, width, n_dofs, rel_error_L2, rel_error_H1k
* ``fem_pollution.csv``: k, p, rule, hk, n_dofs, rel_error_H1k, rel_best_H1k
* ``schwarz_summary.csv``: k, kind, shape, n_dofs, n_cross, max_iters, ratio_at_cross
* ``schwarz_<kind>_<shape>_k<k>.csv``: n, abs_error_H1k, rel_error, wallclock_ms
* ``bem_pollution.csv``: kind, k, p, M, ppw, C_qo, rel_error, rho_hat
* ``plan.csv``: rule, k, p, c, region, h, hk, dofs (the full plans go to ``plan.json``)

Errors are relative to the Mie series over ``|x| < R_scat`` (triangle
centroids) and use the same mesh for the numerator and the denominator.
"""

from __future__ import annotations

import csv
import gc
import json
import math
import os
from dataclasses import dataclass

import numpy as np

from . import planner
from .bem_circle import BoundaryGrid, solve_bie_and_metrics
from .config import ExperimentConfig
from .fem import WeightedNorm, best_approximation, build_space, error_norm, scattering_system, solve_fem
from .geometry import build_disk_annulus_mesh
from .medium import PmlRadialSpec, RadialPmlMedium
from .reference import MieSolution
from .schwarz import build_decomposition, build_problem, gaussian_source, run_schwarz


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


class Recorder:
    """Accumulates rows per table and rewrites the CSV after every row, so a
    crash mid-experiment leaves every completed row on disk."""

    def __init__(self, out_dir):
        self.out_dir = os.fspath(out_dir)
        os.makedirs(self.out_dir, exist_ok=True)
        self.tables: dict[str, tuple[list, list]] = {}

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def add(self, table: str, row: dict) -> None:
        cols, rows = self.tables.setdefault(table, (list(row), []))
        if list(row) != cols:
            raise ValueError(f"row keys {list(row)} do not match the {table} schema {cols}")
        rows.append(row)
        self._flush(table)

    def write_table(self, table: str, columns: list, rows: list) -> None:
        self.tables[table] = (list(columns), [dict(zip(columns, r)) for r in rows])
        self._flush(table)

    def write_json(self, name: str, obj) -> None:
        with open(self.path(name), "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
        self.tables.setdefault(name, ([], []))

    def _flush(self, table: str) -> None:
        cols, rows = self.tables[table]
        with open(self.path(table), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for r in rows:
                w.writerow([_fmt(r[c]) for c in cols])

    @property
    def files(self) -> list:
        return sorted(self.tables)

    def n_rows(self) -> int:
        return sum(len(rows) for _, rows in self.tables.values())


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


# ---------------------------------------------------------------- PML FEM runs


@dataclass
class ScatteringRun:
    k: float
    p: int
    h: float
    h_obstacle: float
    n_dofs: int
    rel_h1k: float
    rel_l2: float
    rel_best_h1k: float | None = None


def graded_obstacle_size(h: float, h0: float, p: int) -> float:
    """Obstacle mesh size ``h0 (h/h0)^((p+1)/2)`` so the polygonal boundary error
    shrinks like ``h^(p+1)`` along an h-sweep starting at ``h0``."""
    return h0 * (h / h0) ** ((p + 1) / 2.0)


def scattering_run(
    k: float,
    p: int,
    spec: PmlRadialSpec,
    h: float,
    h_obstacle: float | None = None,
    R_obs: float = 1.0,
    direction: float = 0.0,
    growth: float = 1.25,
    best: bool = False,
) -> ScatteringRun:
    """Sound-soft disk scattering with a radial layer; errors against Mie over ``|x| < R_scat``."""
    mesh = build_disk_annulus_mesh(R_obs, spec.R_tr, h, rings=(spec.R_scat, spec.R_PML), h_obstacle=h_obstacle, growth=growth)
    space = build_space(mesh, p)
    u = solve_fem(scattering_system(space, RadialPmlMedium(spec), k, direction))
    mie = MieSolution(k, direction=direction, radius=R_obs)
    mask = np.hypot(*mesh.centroids().T) < spec.R_scat
    q = 2 * p + 2
    out = {}
    for m in (0, 1):
        norm = WeightedNorm(m, k)
        ref = error_norm(space, 0, mie.scattered, norm, mask, q)
        out[m] = (error_norm(space, u, mie.scattered, norm, mask, q), ref)
    rel_best = None
    if best:
        rel_best = best_approximation(space, mie.scattered, WeightedNorm(1, k), mask, q) / out[1][1]
    return ScatteringRun(
        float(k), int(p), float(h), float(h_obstacle if h_obstacle is not None else h), space.n_dofs,
        out[1][0] / out[1][1], out[0][0] / out[0][1], rel_best,
    )


def _pml_spec(cfg: ExperimentConfig, **over) -> PmlRadialSpec:
    d = cfg.pml.model_dump()
    d.update(over)
    return PmlRadialSpec(d["R_scat"], d["R_PML"], d["R_tr"], d["theta"], d["variant"], d["exponent"])


def loglog_slope(h, err) -> float:
    """Least-squares slope of ``log err`` against ``log h``."""
    return float(np.polyfit(np.log(h), np.log(err), 1)[0])


def fem_convergence(cfg: ExperimentConfig, rec: Recorder) -> dict:
    spec = _pml_spec(cfg)
    hs = cfg.mesh.h
    summary = {}
    for k in cfg.k:
        for p in cfg.p:
            errs = []
            for h in hs:
                if cfg.mesh.h_obstacle is not None:
                    hob = cfg.mesh.h_obstacle
                elif cfg.mesh.grade_obstacle:
                    hob = graded_obstacle_size(h, hs[0], p)
                else:
                    hob = None
                run = scattering_run(k, p, spec, h, hob, cfg.mesh.obstacle_radius, cfg.direction, cfg.mesh.growth)
                rec.add("fem_convergence.csv", {
                    "k": k, "p": p, "h": h, "h_obstacle": run.h_obstacle, "n_dofs": run.n_dofs,
                    "rel_error_H1k": run.rel_h1k, "rel_error_L2": run.rel_l2,
                })
                errs.append((run.rel_h1k, run.rel_l2))
                gc.collect()
            if len(hs) > 1:
                e1, e0 = zip(*errs)
                summary[f"k={k:g},p={p}"] = {"order_H1k": loglog_slope(hs, e1), "order_L2": loglog_slope(hs, e0)}
    return summary


def pml_accuracy(cfg: ExperimentConfig, rec: Recorder) -> dict:
    h = cfg.mesh.h[0]
    grid = {}
    cases = [("sweep", th, w) for th in cfg.sweep.thetas for w in cfg.sweep.widths]
    if cfg.sweep.floor_width is not None:
        cases.append(("floor", cfg.pml.theta, cfg.sweep.floor_width))
    for k in cfg.k:
        for p in cfg.p:
            for role, th, w in cases:
                spec = _pml_spec(cfg, theta=th, R_tr=cfg.pml.R_PML + w)
                run = scattering_run(k, p, spec, h, cfg.mesh.h_obstacle, cfg.mesh.obstacle_radius, cfg.direction, cfg.mesh.growth)
                rec.add("pml_accuracy.csv", {
                    "role": role, "k": k, "p": p, "theta": th, "width": w, "n_dofs": run.n_dofs,
                    "rel_error_L2": run.rel_l2, "rel_error_H1k": run.rel_h1k,
                })
                grid[(k, p, role, th, w)] = run.rel_l2
                gc.collect()
    summary = {}
    for k in cfg.k:
        for p in cfg.p:
            E = np.array([[grid[(k, p, "sweep", th, w)] for w in cfg.sweep.widths] for th in cfg.sweep.thetas])
            entry = {
                "monotone_in_width": bool(np.all(np.diff(E, axis=1) < 0)),
                "monotone_in_theta": bool(np.all(np.diff(E, axis=0) < 0)),
                "final_error": float(E[-1, -1]) if E.size else None,
            }
            if cfg.sweep.floor_width is not None:
                entry["discretization_floor"] = grid[(k, p, "floor", cfg.pml.theta, cfg.sweep.floor_width)]
            summary[f"k={k:g},p={p}"] = entry
    return summary


def fem_pollution(cfg: ExperimentConfig, rec: Recorder) -> dict:
    spec = _pml_spec(cfg)
    rho = _rho(cfg)
    summary = {}
    for p in cfg.p:
        rules = {"fixed-hk": [], "CRE": []}
        for k in cfg.k:
            plan = planner.uniform_fem_plan(k, p, rho, cfg.pollution.c, variant=planner.CRE)
            done = {}
            for rule, hk in (("fixed-hk", cfg.pollution.hk), ("CRE", plan.h_uniform * k)):
                key = round(hk, 12)
                if key not in done:
                    done[key] = scattering_run(k, p, spec, hk / k, None, cfg.mesh.obstacle_radius, cfg.direction,
                                               best=cfg.pollution.best_approximation)
                run = done[key]
                rec.add("fem_pollution.csv", {
                    "k": k, "p": p, "rule": rule, "hk": hk, "n_dofs": run.n_dofs,
                    "rel_error_H1k": run.rel_h1k, "rel_best_H1k": run.rel_best_h1k,
                })
                rules[rule].append(run.rel_h1k)
                gc.collect()
        summary[f"p={p}"] = {
            "fixed_hk_growth": rules["fixed-hk"][-1] / rules["fixed-hk"][0],
            "CRE_spread": max(rules["CRE"]) / min(rules["CRE"]),
        }
    return summary


def schwarz_geometry(d, shape):
    """Domain sized so every cell has width ``W = 2 delta + 2 kappa0 + padding``.

    Strips use the configured height; checkerboards use ``W`` per cell in y.
    """
    kappa0 = d.kappa0 if d.kappa0 is not None else d.kappa
    W = 2 * d.delta + 2 * kappa0 + d.cell_padding
    L = (shape[0] * W, d.height if shape[1] == 1 else shape[1] * W)
    return L, kappa0


def schwarz_iterations(cfg: ExperimentConfig, rec: Recorder) -> dict:
    d = cfg.decomposition
    rng = np.random.default_rng(cfg.seed)
    if d.kind == "Strip":
        if len(d.n) != 1:
            raise ValueError("Strip takes a single subdomain count")
        shape, n_arg = (d.n[0], 1), d.n[0]
    else:
        if len(d.n) != 2:
            raise ValueError("Checkerboard takes two subdomain counts")
        shape, n_arg = tuple(d.n), tuple(d.n)
    shape_tag = "x".join(map(str, shape))
    summary = {}
    for k in cfg.k:
        L, kappa0 = schwarz_geometry(d, shape)
        dec = build_decomposition(L, d.kind, n_arg, d.delta, d.kappa, kappa0, sigma=d.sigma)
        src = gaussian_source((0.3 * L[0], 0.5 * L[1]), 1.5 / k)
        problem = build_problem(dec, k, d.hk / k, src, p=cfg.p[0])
        u0 = None
        if d.initial == "random":
            n = problem.n_dofs
            u0 = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            u0[problem.space.dirichlet] = 0.0
        hist = run_schwarz(problem, d.max_iters, u0)
        rows = [
            [i, a, r, (t if d.record_wallclock else None)]
            for i, (a, r, t) in enumerate(zip(hist.abs_error, hist.rel_error, hist.wallclock_ms))
        ]
        rec.write_table(f"schwarz_{d.kind}_{shape_tag}_k{k:g}.csv", ["n", "abs_error_H1k", "rel_error", "wallclock_ms"], rows)
        ratio = hist.contraction_at_cross
        rec.add("schwarz_summary.csv", {
            "k": k, "kind": d.kind, "shape": shape_tag, "n_dofs": problem.n_dofs,
            "n_cross": hist.n_cross, "max_iters": d.max_iters, "ratio_at_cross": ratio,
        })
        summary[f"k={k:g}"] = {"n_cross": hist.n_cross, "ratio_at_cross": ratio}
        del problem
        gc.collect()
    return summary


def bem_pollution(cfg: ExperimentConfig, rec: Recorder) -> dict:
    summary = {}
    for case in cfg.bem.cases:
        cq = []
        for k in case.k:
            M = int(math.ceil(case.ppw * k - 1e-9))
            res = solve_bie_and_metrics(case.kind, k, BoundaryGrid(M, case.p), cfg.bem.direction)
            rec.add("bem_pollution.csv", {
                "kind": case.kind, "k": k, "p": case.p, "M": M, "ppw": res.grid.ppw(k),
                "C_qo": res.C_qo, "rel_error": res.rel_error, "rho_hat": res.rho_hat,
            })
            cq.append(res.C_qo)
        summary[f"{case.kind},p={case.p},ppw={case.ppw:g}"] = {
            "C_qo": cq,
            "growth": cq[-1] / cq[0],
            "strictly_increasing": bool(np.all(np.diff(cq) > 0)),
        }
    return summary


def _rho(cfg: ExperimentConfig) -> planner.RhoModel:
    r = cfg.rho
    return planner.RhoModel(r.kind, r.C, r.alpha, tuple(tuple(t) for t in r.table))


def make_plans(cfg: ExperimentConfig) -> list:
    rho, pc = _rho(cfg), cfg.plan
    plans = []
    for k in cfg.k:
        if pc.rule == "hp":
            plans.append(planner.hp_plan(k, pc.eps, pc.c))
            continue
        for p in cfg.p:
            if pc.rule == "regime":
                plans.extend(planner.regime_plan(row, k, p, rho, pc.c, pc.areas) for row in pc.rows)
            elif pc.rule == "bem":
                plans.append(planner.bem_plan(k, p, rho, pc.c))
            else:
                variant = planner.CRE if pc.rule == "uniform-CRE" else planner.KQO
                plans.append(planner.uniform_fem_plan(k, p, rho, pc.c, variant=variant))
    return plans


def plan(cfg: ExperimentConfig, rec: Recorder) -> dict:
    plans = make_plans(cfg)
    for pl in plans:
        for region, h in pl.h.items():
            rec.add("plan.csv", {
                "rule": pl.rule, "k": pl.k, "p": pl.p, "c": pl.c, "region": region,
                "h": h, "hk": h * pl.k, "dofs": pl.dofs,
            })
    rec.write_json("plan.json", [pl.to_json() for pl in plans])
    return {"n_plans": len(plans), "max_term_deviation": max((pl.check() for pl in plans), default=0.0)}


REGISTRY = {
    "fem-convergence": fem_convergence,
    "fem-pollution": fem_pollution,
    "pml-accuracy": pml_accuracy,
    "schwarz-iterations": schwarz_iterations,
    "bem-pollution": bem_pollution,
    "plan": plan,
}
