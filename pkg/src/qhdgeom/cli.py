"""Command line front end: ``qhd <command> --scenario <file> ...``.

Commands
--------
validate  oracle and invariant checks at the scenario points
metric    associated metric, fundamental tensor and determinant identity
geodesic  one trajectory (``--flavor kropina|riemann|newton``) as CSV
compare   time-reparametrised deviation between two flavors
zermelo   navigation data, wind and Zermelo residuals

Each run writes its outputs and a ``manifest.json`` into ``--out``; the exit
code is 0 iff every check passed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ScenarioConfig, parse_scenario
from .connection import beta_quantities, christoffel, kropina_spray, riemann_spray
from .dynamics import (
    integrate_finsler_geodesic,
    integrate_newton,
    integrate_riemann_geodesic,
    reparametrize_by_time,
    trajectory_deviation,
)
from .errors import InvalidInitial, QHDError, SchemaError
from .geometry import (
    KropinaGeometry,
    TangentSample,
    check_positive_definite,
    det_identity_terms,
    fundamental_tensor_at,
    inverse_metric,
    kropina_F_at,
    metric_and_derivatives,
)
from .oracle import OracleReport, euler_lagrange_residual, fd_hessian_F2, fd_spray, relative_gap
from .output import dump_json, write_trajectory
from .zermelo import (
    inverse_navigation,
    killing_check,
    navigation_data,
    quantum_wind,
    zermelo_diagnostics,
)

log = logging.getLogger("qhdgeom")

FLAVORS = ("kropina", "riemann", "newton")
LAMBDAS = (0.5, 2.0, 7.0)

TOL = {
    "hessian": 1e-6,
    "euler_identity": 1e-10,
    "homogeneity": 1e-10,
    "det_identity": 1e-8,
    "spray_oracle": 1e-6,
    "spray_homogeneity": 1e-10,
    "s_quantities": 1e-10,
    "metric_compatibility": 1e-7,
    "wind_unit": 1e-10,
    "zermelo": 1e-9,
    "round_trip": 1e-10,
    "wind_formula": 1e-10,
    "drift": 1e-8,
    "compare": 1e-4,
}


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: int
    outputs: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    error: str | None = None
    version: str = __version__

    @property
    def passed(self) -> bool:
        return self.error is None and all(self.checks.values())


class CheckLog:
    """Collects oracle reports; a named check passes only if all its entries pass."""

    def __init__(self):
        self.reports: list[OracleReport] = []
        self.status: dict[str, bool] = {}

    def add(self, report: OracleReport):
        self.reports.append(report)
        if report.passed is not None:
            self.status[report.quantity] = self.status.get(report.quantity, True) and report.passed

    def flag(self, name, ok: bool, value=None, tolerance=None, point=None):
        rep = OracleReport(quantity=name, analytic=value, oracle=None,
                           gap=float(value) if value is not None else 0.0,
                           passed=bool(ok), tolerance=tolerance,
                           point=None if point is None else [float(v) for v in point])
        self.add(rep)

    def scalar(self, name, value, tolerance, point=None):
        self.flag(name, value < tolerance, value, tolerance, point)


# --------------------------------------------------------------------------
# sample selection


def _points(cfg: ScenarioConfig, rng, n_default: int = 8) -> np.ndarray:
    if len(cfg.points):
        return cfg.points
    dom = cfg.scenario.domain
    lo = np.where(np.isfinite(dom.lo), dom.lo, -1.0)
    hi = np.where(np.isfinite(dom.hi), dom.hi, 1.0)
    # stay clear of the boundary so derivative stencils fit
    pad = 0.05 * (hi - lo)
    return rng.uniform(lo + pad, hi - pad, size=(n_default, 4))


def _tangents(cfg: ScenarioConfig, rng, n_default: int = 4) -> np.ndarray:
    if len(cfg.tangents):
        return cfg.tangents
    y = rng.normal(size=(n_default, 4))
    y[:, 0] = 0.1 + rng.uniform(0.0, 1.0, size=n_default)
    return y


def _load_points_file(path: Path, cfg: ScenarioConfig):
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        if isinstance(doc, list):
            doc = {"points": doc}
        if "points" in doc:
            cfg.points = np.array(doc["points"], dtype=float).reshape(-1, 4)
        if "tangents" in doc:
            cfg.tangents = np.array(doc["tangents"], dtype=float).reshape(-1, 4)
    else:
        rows = [ln for ln in path.read_text().splitlines() if ln.strip() and not ln.startswith("#")]
        data = []
        for ln in rows:
            try:
                data.append([float(v) for v in ln.split(",")])
            except ValueError:
                continue  # header line
        cfg.points = np.array(data, dtype=float).reshape(-1, 4)


# --------------------------------------------------------------------------
# commands


def cmd_validate(cfg: ScenarioConfig, args, rng, out: Path, man: RunManifest):
    sc = cfg.scenario
    geom = KropinaGeometry(sc)
    checks = CheckLog()
    points = _points(cfg, rng)
    tangents = _tangents(cfg, rng)
    for x in points:
        try:
            a, d = metric_and_derivatives(sc, x)
            check_positive_definite(a, x)
        except QHDError as exc:
            checks.flag("metric_positive", False, point=x)
            log.error("%s: %s", type(exc).__name__, exc)
            continue
        checks.flag("metric_positive", True, point=x)
        gamma = christoffel(sc, x)
        checks.flag("christoffel_symmetry", bool(np.array_equal(gamma, gamma.transpose(0, 2, 1))), point=x)
        # a_IJ|K = d_K a_IJ - Gamma^L_KI a_LJ - Gamma^L_KJ a_IL
        cov = d - np.einsum("lki,lj->kij", gamma, a) - np.einsum("lkj,il->kij", gamma, a)
        checks.scalar("metric_compatibility", float(np.max(np.abs(cov))), TOL["metric_compatibility"], x)
        _, s = beta_quantities(sc, x, gamma)
        checks.scalar("s_quantities", float(np.max(np.abs(s))), TOL["s_quantities"], x)

        nav = navigation_data(sc, x)
        checks.scalar("wind_unit", abs(nav.wind_norm - 1.0), TOL["wind_unit"], x)
        a_back, b_back, _ = inverse_navigation(nav.h, nav.W)
        rt = max(float(np.max(np.abs(a_back - a))), float(np.max(np.abs(b_back - np.eye(4)[0]))))
        checks.scalar("navigation_round_trip", rt, TOL["round_trip"], x)
        checks.add(OracleReport.compare("wind_formula", nav.W, quantum_wind(sc, x),
                                        tolerance=TOL["wind_formula"], point=x))

        for y in tangents:
            sample = TangentSample(x, y)
            g = fundamental_tensor_at(a, y)
            F = kropina_F_at(a, y)
            checks.add(OracleReport.compare("hessian", g, fd_hessian_F2(geom, sample),
                                            tolerance=TOL["hessian"], point=x))
            checks.scalar("euler_identity", abs(y @ g @ y - F**2) / F**2, TOL["euler_identity"], x)
            hom = max(max(abs(kropina_F_at(a, lam * y) - lam * F) / (lam * F),
                          relative_gap(g, fundamental_tensor_at(a, lam * y))) for lam in LAMBDAS)
            checks.scalar("homogeneity", hom, TOL["homogeneity"], x)
            terms = det_identity_terms(a, y)
            checks.scalar("det_identity", abs(terms["det_g"] - terms["corrected"]) / abs(terms["det_g"]),
                          TOL["det_identity"], x)
            checks.add(OracleReport(quantity="det_identity_published", analytic=terms["published"],
                                    oracle=terms["det_g"],
                                    gap=abs(terms["det_g"] - terms["published"]) / abs(terms["det_g"]),
                                    point=[float(v) for v in x]))
            G = kropina_spray(sc, x, y)
            checks.add(OracleReport.compare("spray_oracle", G, fd_spray(sc, x, y),
                                            tolerance=TOL["spray_oracle"], point=x))
            Gbar = riemann_spray(gamma, y)
            sh = 0.0
            for lam in LAMBDAS:
                scale = max(np.max(np.abs(lam**2 * G)), np.max(np.abs(lam**2 * Gbar)), 1e-300)
                sh = max(sh,
                         np.max(np.abs(kropina_spray(sc, x, lam * y) - lam**2 * G)) / scale,
                         np.max(np.abs(riemann_spray(gamma, lam * y) - lam**2 * Gbar)) / scale)
            checks.scalar("spray_homogeneity", float(sh), TOL["spray_homogeneity"], x)
            z = zermelo_diagnostics(a, nav, y)
            checks.scalar("zermelo", max(z["indicatrix_residual"], z["solved_form_gap"]), TOL["zermelo"], x)

    gauge = sc.check_gauge(points)
    checks.add(OracleReport(quantity="gauge_divergence", analytic=gauge, oracle=0.0, gap=gauge))
    if sc.is_neutral:
        k = killing_check(sc, points)
        checks.add(OracleReport(quantity="killing", analytic=k.to_dict(), oracle=None, gap=0.0))

    path = out / "validate.jsonl"
    path.write_text("".join(r.to_json() + "\n" for r in checks.reports))
    man.outputs.append(path.name)
    man.checks.update(checks.status)
    width = max(len(k) for k in checks.status) if checks.status else 0
    for name, ok in checks.status.items():
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}")


def cmd_metric(cfg: ScenarioConfig, args, rng, out: Path, man: RunManifest):
    sc = cfg.scenario
    points = _points(cfg, rng)
    tangents = _tangents(cfg, rng)
    entries = []
    ok = True
    for x in points:
        entry = {"x": x}
        try:
            a = check_positive_definite(sc.metric(x), x)
        except QHDError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
            ok = False
            entries.append(entry)
            continue
        inv, b2 = inverse_metric(a, x)
        entry.update(a=a, a_inv=inv, b2=b2, det_a=float(np.linalg.det(a)), samples=[])
        for y in tangents:
            terms = det_identity_terms(a, y)
            entry["samples"].append({
                "y": y,
                "F": kropina_F_at(a, y),
                "g": fundamental_tensor_at(a, y),
                "det_g": terms["det_g"],
                "det_identity_published": terms["published"],
                "det_identity_corrected": terms["corrected"],
                "gap_published": abs(terms["det_g"] - terms["published"]) / abs(terms["det_g"]),
                "gap_corrected": abs(terms["det_g"] - terms["corrected"]) / abs(terms["det_g"]),
            })
        entries.append(entry)
    path = out / "metric.json"
    dump_json({"scenario": sc.name, "points": entries}, path)
    man.outputs.append(path.name)
    man.checks["metric_positive"] = ok


def _initial(cfg: ScenarioConfig):
    if cfg.initial is None:
        raise SchemaError("this command needs an initial condition", "initial")
    return cfg.initial["x"], cfg.initial["y"]


def _integrate(cfg: ScenarioConfig, flavor: str):
    x0, y0 = _initial(cfg)
    num = cfg.numerics
    h, n, t_end = float(num["step"]), int(num["n_steps"]), num["t_end"]
    if flavor == "kropina":
        return integrate_finsler_geodesic(cfg.scenario, x0, y0, h, n, normalize=num["normalize"], stop_time=t_end)
    if flavor == "riemann":
        return integrate_riemann_geodesic(cfg.scenario, x0, y0, h, n, normalize=num["normalize"], stop_time=t_end)
    if flavor == "newton":
        if not y0[0] > 0:
            raise InvalidInitial("Newton start needs y^0 > 0 to define v = y^i / y^0", x0)
        return integrate_newton(cfg.scenario, x0[0], x0[1:], y0[1:] / y0[0], h, n, stop_time=t_end)
    raise ValueError(f"unknown flavor {flavor!r}")


def cmd_geodesic(cfg: ScenarioConfig, args, rng, out: Path, man: RunManifest):
    traj = _integrate(cfg, args.flavor)
    files = write_trajectory(traj, out / f"trajectory_{args.flavor}.csv")
    man.outputs += [f.name for f in files]
    man.checks["completed"] = traj.status == "completed"
    if "drift" in traj.info:
        steps = max(traj.info["n_steps"], 1)
        man.checks["conservation"] = traj.info["drift"] < TOL["drift"] * max(1.0, steps / 1e4)
    print(f"{args.flavor}: {len(traj)} samples, status {traj.status}")


def cmd_compare(cfg: ScenarioConfig, args, rng, out: Path, man: RunManifest):
    trajs = {k: _integrate(cfg, k) for k in dict.fromkeys([args.a, args.b])}
    for k, tr in trajs.items():
        man.outputs += [f.name for f in write_trajectory(tr, out / f"trajectory_{k}.csv")]
    paths = {k: reparametrize_by_time(tr) for k, tr in trajs.items()}
    dev = trajectory_deviation(paths[args.a], paths[args.b])
    report = {
        "a": args.a,
        "b": args.b,
        "max_deviation": dev,
        "tolerance": TOL["compare"],
        "window": [max(p.t[0] for p in paths.values()), min(p.t[-1] for p in paths.values())],
        "status": {k: tr.status for k, tr in trajs.items()},
        "euler_lagrange_max": {k: float(np.max(np.abs(euler_lagrange_residual(cfg.scenario, p))))
                               for k, p in paths.items()},
    }
    dump_json(report, out / "compare.json")
    man.outputs.append("compare.json")
    man.checks["deviation"] = dev < TOL["compare"]
    man.checks["completed"] = all(tr.status == "completed" for tr in trajs.values())
    print(f"max deviation {args.a} vs {args.b}: {dev:.3e}")


def cmd_zermelo(cfg: ScenarioConfig, args, rng, out: Path, man: RunManifest):
    sc = cfg.scenario
    checks = CheckLog()
    points = _points(cfg, rng)
    tangents = _tangents(cfg, rng)
    entries = []
    for x in points:
        nav = navigation_data(sc, x)
        a = sc.metric(x)
        W = quantum_wind(sc, x)
        a_back, b_back, _ = inverse_navigation(nav.h, nav.W)
        rt = max(float(np.max(np.abs(a_back - a))), float(np.max(np.abs(b_back - np.eye(4)[0]))))
        diag = [dict(y=y, **zermelo_diagnostics(a, nav, y)) for y in tangents]
        worst = max((max(d["indicatrix_residual"], d["solved_form_gap"]) for d in diag), default=0.0)
        checks.scalar("wind_unit", abs(nav.wind_norm - 1.0), TOL["wind_unit"], x)
        checks.scalar("round_trip", rt, TOL["round_trip"], x)
        checks.add(OracleReport.compare("wind_formula", nav.W, W, tolerance=TOL["wind_formula"], point=x))
        checks.scalar("zermelo", worst, TOL["zermelo"], x)
        entries.append(dict(nav.to_dict(), wind_formula=W, wind_norm=nav.wind_norm,
                            round_trip_error=rt, residuals=diag))
    doc = {"scenario": sc.name, "points": entries}
    if sc.is_neutral:
        doc["killing"] = killing_check(sc, points).to_dict()
    dump_json(doc, out / "zermelo.json")
    man.outputs.append("zermelo.json")
    man.checks.update(checks.status)


COMMANDS = {
    "validate": cmd_validate,
    "metric": cmd_metric,
    "geodesic": cmd_geodesic,
    "compare": cmd_compare,
    "zermelo": cmd_zermelo,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qhd", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--scenario", required=True, type=Path, help="scenario JSON file")
    p.add_argument("--points", type=Path, help="points (JSON list or CSV with t,x,y,z columns)")
    p.add_argument("--flavor", choices=FLAVORS, default="kropina", help="trajectory flavor for geodesic")
    p.add_argument("--a", choices=FLAVORS, default="kropina", help="first flavor for compare")
    p.add_argument("--b", choices=FLAVORS, default="newton", help="second flavor for compare")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--seed", type=int, help="random seed for sampled points (overrides the scenario)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    man = RunManifest(command=args.command, config_hash="", seed=0)
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        cfg = parse_scenario(args.scenario)
        man.config_hash = cfg.config_hash
        if args.points is not None:
            _load_points_file(args.points, cfg)
        man.seed = int(args.seed if args.seed is not None else cfg.numerics["seed"])
        rng = np.random.default_rng(man.seed)
        COMMANDS[args.command](cfg, args, rng, args.out, man)
    except QHDError as exc:
        man.error = f"{type(exc).__name__}: {exc}"
        print(f"error: {man.error}", file=sys.stderr)
    except OSError as exc:
        man.error = f"{type(exc).__name__}: {exc}"
        print(f"error: {man.error}", file=sys.stderr)
    if args.out.is_dir():
        dump_json(asdict(man), args.out / "manifest.json")
    return 0 if man.passed else (2 if man.error else 1)


if __name__ == "__main__":
    sys.exit(main())
