"""Command-line front end: ``partial-es {simulate,verify,check,sweep}``.

Runs are described by an INI file.  The ``[run]`` section names the
scenario and controller; ``[stability]``, ``[check]`` and ``[sweep]`` hold
the extra grids for the matching subcommands.  A ``[gain]`` section with
sympy expressions in ``z`` (keys ``g``, ``g_pair``, ``gamma`` and optional
``domain_lo``) replaces the built-in gain pair.

Exit codes: 0 success, 1 failed check or verdict, 2 configuration error,
3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .averaging import averaged_equivalence_residual, es_averaged_field, es_lie_bracket_system
from .controller import (GAIN_KINDS, EsControllerParams, GainDomainError, GainPair, gain_pair,
                         wronskian_residual)
from .dither import quadrature_dither
from .simulator import (SimulationBlowUp, domain_exit, integrate_batch,
                        integrate_closed_loop, integrate_closed_loop_batch)
from .scenarios import SCENARIOS, domain_box, domain_grid, get_scenario
from .stability import (f_matrix_min_singular, recheck_report, reduced_input_fields,
                        verify_practical_partial_stability)
from .trajio import plot_trajectory, write_csv
from .volterra import DomainExitError, defect_slope, one_period_defect

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_BLOWUP = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: str
    cost: str
    gain_kind: str
    epsilon: float
    gammas: tuple
    x0: tuple
    T: float
    substeps: int = 64
    seed: int = 0
    output_dir: str = "out"
    dither: str = "uniform"
    frequencies: Optional[tuple] = None
    inertia: Optional[tuple] = None
    custom_gain: Optional[dict] = None
    stability: dict = field(default_factory=dict)
    check: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)


# -- config parsing -----------------------------------------------------------

def _line_of(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for k, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", s)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", s):
            return k
    return None


class _Reader:
    def __init__(self, parser: configparser.ConfigParser, text: str, source: str):
        self.parser, self.text, self.source = parser, text, source

    def fail(self, section: str, key: str, msg: str):
        line = _line_of(self.text, section, key)
        where = f"{self.source}:{line}" if line else self.source
        raise ConfigError(f"{where}: [{section}] {key}: {msg}")

    def raw(self, section, key, default=None, required=False):
        if self.parser.has_option(section, key):
            return self.parser.get(section, key).strip()
        if required:
            line = f"{self.source}"
            raise ConfigError(f"{line}: [{section}] missing required key {key!r}")
        return default

    def number(self, section, key, default=None, required=False, positive=False, integer=False):
        raw = self.raw(section, key, None, required)
        if raw is None:
            return default
        try:
            v = int(raw) if integer else float(raw)
        except ValueError:
            self.fail(section, key, f"expected {'an integer' if integer else 'a number'}, got {raw!r}")
        if not math.isfinite(v):
            self.fail(section, key, f"value must be finite, got {raw!r}")
        if positive and v <= 0:
            self.fail(section, key, f"must be positive, got {raw!r}")
        return v

    def vector(self, section, key, default=None, required=False):
        raw = self.raw(section, key, None, required)
        if raw is None:
            return default
        try:
            vals = tuple(float(p) for p in re.split(r"[,\s]+", raw) if p)
        except ValueError:
            self.fail(section, key, f"expected comma-separated numbers, got {raw!r}")
        if not vals:
            self.fail(section, key, "empty list")
        return vals

    def vectors(self, section, key, default=None, required=False):
        raw = self.raw(section, key, None, required)
        if raw is None:
            return default
        out = []
        for chunk in raw.split(";"):
            if chunk.strip():
                try:
                    out.append(tuple(float(p) for p in re.split(r"[,\s]+", chunk.strip()) if p))
                except ValueError:
                    self.fail(section, key, f"expected ';'-separated vectors, got {raw!r}")
        if not out:
            self.fail(section, key, "empty list")
        return out


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    return parse_config(text, str(path))


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(str(exc).replace("\n", " ")) from None
    if not parser.has_section("run"):
        raise ConfigError(f"{source}: missing [run] section")
    r = _Reader(parser, text, source)

    name = r.raw("run", "scenario", required=True)
    if name not in SCENARIOS:
        r.fail("run", "scenario", f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}")
    inertia = r.vector("run", "inertia") if name == "rigid_body" else None
    if inertia is not None and (len(inertia) != 3 or min(inertia) <= 0):
        r.fail("run", "inertia", "need three positive moments of inertia")
    scen = get_scenario(name, **({} if inertia is None else dict(zip(("A1", "A2", "A3"), inertia))))

    base = {}
    fig = r.raw("run", "figure")
    if fig is not None:
        if fig not in scen.figure_params:
            r.fail("run", "figure", f"unknown figure {fig!r}; choose from {sorted(scen.figure_params)}")
        fp = scen.figure_params[fig]
        base = dict(cost=fp.cost, gain_kind=fp.gain_kind, epsilon=fp.epsilon, gammas=fp.gammas,
                    x0=fp.x0, T=fp.T)

    cost = r.raw("run", "cost", base.get("cost"), required="cost" not in base)
    if cost not in scen.costs:
        r.fail("run", "cost", f"unknown cost {cost!r}; choose from {sorted(scen.costs)}")
    kind = r.raw("run", "gain_kind", base.get("gain_kind", "contA"))
    custom = None
    if parser.has_section("gain"):
        custom = {k: r.raw("gain", k) for k in ("g", "g_pair", "gamma", "domain_lo") if r.raw("gain", k)}
        for k in ("g", "g_pair", "gamma"):
            if k not in custom:
                raise ConfigError(f"{source}: [gain] missing required key {k!r}")
        kind = "custom"
    if kind not in GAIN_KINDS or (kind == "custom" and custom is None):
        r.fail("run", "gain_kind", f"expected contA or contB, got {kind!r}")

    m = scen.system.m
    n = scen.system.n
    eps = r.number("run", "epsilon", base.get("epsilon"), required="epsilon" not in base, positive=True)
    gammas = r.vector("run", "gammas", base.get("gammas", (2.0,) * m))
    if len(gammas) != m:
        r.fail("run", "gammas", f"need {m} values, got {len(gammas)}")
    x0 = r.vector("run", "x0", base.get("x0"), required="x0" not in base)
    if len(x0) != n:
        r.fail("run", "x0", f"need {n} values, got {len(x0)}")
    T = r.number("run", "T", base.get("T"), required="T" not in base)
    if T < 0:
        r.fail("run", "T", f"must be non-negative, got {T}")
    substeps = r.number("run", "substeps", 64, integer=True)
    if substeps < 32:
        r.fail("run", "substeps", f"must be >= 32, got {substeps}")
    seed = r.number("run", "seed", 0, integer=True)
    dither = r.raw("run", "dither", None)
    if dither is not None and dither not in ("uniform", "multifrequency"):
        r.fail("run", "dither", f"expected 'uniform' or 'multifrequency', got {dither!r}")
    freqs = r.vector("run", "frequencies")
    if freqs is not None:
        if len(freqs) != m or any(f < 1 or f != int(f) for f in freqs):
            r.fail("run", "frequencies", f"need {m} positive integers")
        freqs = tuple(int(f) for f in freqs)

    stab = {}
    if parser.has_section("stability"):
        s = "stability"
        stab = {
            "delta": r.number(s, "delta", required=True, positive=True),
            "rho": r.vector(s, "rho", required=True),
            "epsilons": r.vector(s, "epsilons", (eps,)),
            "z0": r.vectors(s, "z0", [tuple(np.asarray(x0)[list(scen.system_for(cost).z_idx)])]),
            "t0": r.vector(s, "t0", (0.0,)),
            "T": r.number(s, "T", T, positive=True),
            "system": r.raw(s, "system", "closed_loop"),
            "min_dwell": r.number(s, "min_dwell", 0.5),
            "n_ball": r.number(s, "n_ball", 16, integer=True),
            "step": r.number(s, "step", 0.01, positive=True),
        }
        if any(v <= 0 for v in stab["rho"]):
            r.fail(s, "rho", "radii must be positive")
        if any(v <= 0 for v in stab["epsilons"]):
            r.fail(s, "epsilons", "values must be positive")
        if stab["system"] not in ("closed_loop", "averaged", "closed_form"):
            r.fail(s, "system", f"expected closed_loop, averaged or closed_form, got {stab['system']!r}")
        if not 0.0 <= stab["min_dwell"] < 1.0:
            r.fail(s, "min_dwell", "must lie in [0, 1)")

    chk = {}
    if parser.has_section("check"):
        s = "check"
        chk = {
            "grid_points": r.number(s, "grid_points", 50, integer=True, positive=True),
            "defect_epsilons": r.vector(s, "defect_epsilons", None),
            "f_lo": r.vector(s, "f_lo", None),
            "f_hi": r.vector(s, "f_hi", None),
            "f_per_axis": r.number(s, "f_per_axis", 7, integer=True, positive=True),
            "z_range": r.vector(s, "z_range", None),
        }
        for k in ("f_lo", "f_hi"):
            if chk[k] is not None and len(chk[k]) != n:
                r.fail(s, k, f"need {n} values")

    swp = {}
    if parser.has_section("sweep"):
        s = "sweep"
        swp = {
            "epsilons": r.vector(s, "epsilons", (eps,)),
            "x0": r.vectors(s, "x0", [x0]),
            "tail": r.number(s, "tail", 0.2),
        }
        if any(len(v) != n for v in swp["x0"]):
            r.fail(s, "x0", f"every initial state needs {n} values")
        if any(v <= 0 for v in swp["epsilons"]):
            r.fail(s, "epsilons", "values must be positive")

    return RunConfig(name, cost, kind, eps, tuple(gammas), tuple(x0), T, substeps, seed,
                     r.raw("run", "output_dir", "out"), dither, freqs, inertia, custom, stab, chk, swp)


# -- building blocks from a config ---------------------------------------------

def _scenario(cfg: RunConfig):
    kw = {} if cfg.inertia is None else dict(zip(("A1", "A2", "A3"), cfg.inertia))
    return get_scenario(cfg.scenario, **kw)


def custom_gain_pair(spec: dict) -> GainPair:
    import sympy

    z = sympy.Symbol("z", real=True)
    try:
        g = sympy.sympify(spec["g"], locals={"z": z})
        gp = sympy.sympify(spec["g_pair"], locals={"z": z})
        gamma = float(sympy.sympify(spec["gamma"]))
        lo = float(sympy.sympify(spec.get("domain_lo", "-oo")))
    except (sympy.SympifyError, TypeError, ValueError) as exc:
        raise ConfigError(f"[gain]: cannot parse expression ({exc})") from None
    if (g.free_symbols | gp.free_symbols) - {z}:
        raise ConfigError("[gain]: expressions may only use the variable z")
    fn = [sympy.lambdify(z, e, "numpy") for e in (g, gp, sympy.diff(g, z), sympy.diff(gp, z))]
    vec = [lambda v, f=f: np.broadcast_to(np.asarray(f(v), dtype=float), np.shape(v)).copy() for f in fn]
    return GainPair(vec[0], vec[1], gamma, lo, vec[2], vec[3], kind="custom")


def build_params(cfg: RunConfig, dither: Optional[str] = None) -> EsControllerParams:
    m = len(cfg.gammas)
    mode = dither or cfg.dither or "uniform"
    freqs = cfg.frequencies
    if freqs is None and mode == "multifrequency":
        freqs = tuple(range(1, m + 1))
    pair = custom_gain_pair(cfg.custom_gain) if cfg.custom_gain else gain_pair(cfg.gain_kind)
    return EsControllerParams(cfg.epsilon, (pair,) * m, quadrature_dither(m, freqs), cfg.gammas)


def _setup(cfg: RunConfig, dither: Optional[str] = None):
    scen = _scenario(cfg)
    return scen, scen.system_for(cfg.cost), scen.cost(cfg.cost), build_params(cfg, dither)


def _y_dist(states, cost) -> np.ndarray:
    return np.linalg.norm(np.asarray(states)[..., list(cost.y_indices)] - cost.y_star, axis=-1)


def _workers(arg: Optional[int]) -> int:
    if arg is not None:
        return max(1, arg)
    env = os.environ.get("PES_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"PES_WORKERS must be an integer, got {env!r}") from None
    return 1


def _out_dir(cfg: RunConfig, arg: Optional[str]) -> Path:
    out = Path(arg or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- simulate -------------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    scen, sys_, cost, params = _setup(cfg)
    traj = integrate_closed_loop(sys_, params, cost.field, cfg.x0, cfg.T, cfg.substeps)
    stem = f"{cfg.scenario}_{cfg.cost}_{params.gains[0].kind}"
    csv_path = write_csv(traj, out / f"{stem}.csv")
    svg_path = plot_trajectory(traj, out / f"{stem}.svg", cost.y_indices, cost.y_star,
                               title=f"{cfg.scenario} / {cfg.cost} / {params.gains[0].kind}, eps={cfg.epsilon:g}")
    dist = _y_dist(traj.states, cost)
    print(f"wrote {csv_path} and {svg_path}")
    print(f"final |y - y*| = {dist[-1]:.6g}")
    hit = domain_exit(traj, scen.domains[cfg.cost])
    if hit is not None:
        print(f"warning: left the default domain at t = {hit.time:.6g} ({hit.part}-coordinate x{hit.coordinate + 1})")
    return EXIT_OK


# -- verify ---------------------------------------------------------------------

@dataclass(frozen=True)
class VerifySimulator:
    """Picklable ``simulate`` callable for the stability verifier."""

    cfg: RunConfig

    def __call__(self, x0s, eps, t0, horizon):
        cfg = replace(self.cfg, epsilon=float(eps))
        scen, sys_, cost, params = _setup(cfg)
        mode = cfg.stability.get("system", "closed_loop")
        if mode == "closed_loop":
            return integrate_closed_loop_batch(sys_, params, cost.field, x0s, t0 + horizon,
                                               cfg.substeps, t0=t0)
        if mode == "averaged":
            fbar = es_lie_bracket_system(sys_, cost.field, params)
        else:
            fbar = es_averaged_field(sys_, cost.field, params.effective_gains)
        return integrate_batch(fbar.rhs, x0s, t0, t0 + horizon, cfg.stability.get("step", 0.01))


def run_verify(cfg: RunConfig, workers: int = 1):
    st = cfg.stability
    if not st:
        raise ConfigError("verify needs a [stability] section")
    cost = _scenario(cfg).cost(cfg.cost)
    sim = VerifySimulator(cfg)
    kwargs = dict(y_indices=cost.y_indices, n_ball=st["n_ball"], min_dwell=st["min_dwell"], seed=cfg.seed)
    args = (sim, cost.y_star, st["delta"], st["rho"], sorted(st["epsilons"], reverse=True),
            st["z0"], st["t0"], st["T"])
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            return verify_practical_partial_stability(*args, map_fn=pool.map, **kwargs)
    return verify_practical_partial_stability(*args, **kwargs)


def cmd_verify(cfg: RunConfig, out: Path, workers: int) -> int:
    report = run_verify(cfg, workers)
    path = out / "stability_report.json"
    payload = report.to_dict()
    payload["rechecked"] = recheck_report(report)
    path.write_text(json.dumps(payload, indent=1, default=_json_default))
    print(f"verdict: {report.verdict}")
    for c in report.certificates:
        eb = "none" if c.epsilon_bar is None else f"{c.epsilon_bar:g}"
        t1 = "none" if c.t1 is None else f"{c.t1:.4g}"
        print(f"  rho={c.rho:g}: eps_bar={eb} t1={t1} stability radius={c.stability_delta:.4g}")
    print(f"wrote {path}")
    return EXIT_FAIL if report.verdict == "failed" else EXIT_OK


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


# -- check ----------------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""


def nu_pattern_residual(params: EsControllerParams) -> float:
    """Worst deviation of the effective ``nu`` from ``gamma_outer_i^2 / 4`` on pairs and zero elsewhere."""
    m = params.m
    worst = 0.0
    for i, j, v in params.nu.strict_upper():
        want = params.gamma_outer[i] ** 2 / 4.0 if (i < m and j == i + m) else 0.0
        worst = max(worst, abs(v - want))
    return worst


def run_checks(cfg: RunConfig) -> list:
    ck = cfg.check
    scen, sys_, cost, params = _setup(cfg, cfg.dither or "multifrequency")
    results = []

    pair = params.gains[0]
    zr = ck.get("z_range") or ((1e-3, 20.0) if pair.domain_lo >= 0 else (-10.0, 10.0))
    zs = np.linspace(max(zr[0], pair.domain_lo + 1e-3), zr[1], 100)
    wr = max(abs(wronskian_residual(pair, z)) for z in zs)
    results.append(CheckResult("wronskian", wr, 1e-5, wr <= 1e-5, f"{pair.kind}, gamma={pair.gamma:g}"))

    nr = nu_pattern_residual(params)
    results.append(CheckResult("nu_pattern", nr, 1e-8, nr <= 1e-8, f"dither={params.dither.label}"))

    lo, hi = domain_box(scen, cfg.cost)
    grid = domain_grid(scen, cfg.cost, ck.get("grid_points", 50), cfg.seed)
    er = averaged_equivalence_residual(sys_, params, cost.field, grid)
    results.append(CheckResult("averaged_equivalence", er, 1e-5, er <= 1e-5))

    flo = np.array(ck.get("f_lo") or lo)
    fhi = np.array(ck.get("f_hi") or hi)
    k = ck.get("f_per_axis", 7)
    axes = [np.linspace(a, b, k) for a, b in zip(flo, fhi)]
    fgrid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(flo))
    sv, at = f_matrix_min_singular(reduced_input_fields(sys_), fgrid)
    results.append(CheckResult("f_matrix", sv, 1e-9, sv > 1e-9,
                               f"min at x = ({', '.join(f'{v:.3g}' for v in at)})"))

    run_params = build_params(cfg)
    eps_list = ck.get("defect_epsilons") or (0.4, 0.2, 0.1, 0.05)
    defects = []
    for eps in eps_list:
        try:
            d = one_period_defect(sys_, run_params, cost.field, cfg.x0, epsilon=eps,
                                  domain=scen.domains[cfg.cost])
        except DomainExitError as exc:
            results.append(CheckResult(f"defect(eps={eps:g})", float("nan"), float("nan"), False, str(exc)))
            continue
        defects.append(d.defect)
        results.append(CheckResult(f"defect(eps={eps:g})", d.defect, d.bound, d.defect <= d.bound))
    if len(defects) == len(eps_list) >= 2 and min(defects) > 0:
        slope = defect_slope(eps_list, defects)
        print(f"info: log-log slope of defect vs eps = {slope:.3f}")
    return results


def cmd_check(cfg: RunConfig, out: Path) -> int:
    results = run_checks(cfg)
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'value':>12}  {'threshold':>12}  result"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {r.value:>12.4g}  {r.threshold:>12.4g}  "
                     f"{'PASS' if r.passed else 'FAIL'}{'  ' + r.detail if r.detail else ''}")
    table = "\n".join(lines)
    print(table)
    (out / "checks.txt").write_text(table + "\n")
    (out / "checks.json").write_text(json.dumps([asdict(r) for r in results], indent=1, default=_json_default))
    failed = [r.name for r in results if not r.passed]
    if failed:
        print("failed: " + ", ".join(failed))
        return EXIT_FAIL
    return EXIT_OK


# -- sweep ----------------------------------------------------------------------

def sweep_task(cfg: RunConfig, eps: float, x0: tuple) -> dict:
    cfg = replace(cfg, epsilon=float(eps))
    _, sys_, cost, params = _setup(cfg)
    row = {"epsilon": float(eps), "x0": list(x0)}
    try:
        traj = integrate_closed_loop(sys_, params, cost.field, x0, cfg.T, cfg.substeps)
    except (SimulationBlowUp, GainDomainError) as exc:
        row.update(final_dist=float("nan"), tail_sup=float("nan"), status=f"blow-up: {exc}")
        return row
    dist = _y_dist(traj.states, cost)
    tail = traj.times >= traj.times[-1] - cfg.sweep.get("tail", 0.2) * (traj.times[-1] - traj.times[0])
    row.update(final_dist=float(dist[-1]), tail_sup=float(dist[tail].max()), status="ok")
    return row


def cmd_sweep(cfg: RunConfig, out: Path, workers: int) -> int:
    sw = cfg.sweep or {"epsilons": (cfg.epsilon,), "x0": [cfg.x0], "tail": 0.2}
    cfg = replace(cfg, sweep=sw)
    tasks = [(e, tuple(x)) for e in sw["epsilons"] for x in sw["x0"]]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(sweep_task, [cfg] * len(tasks), *zip(*tasks)))
    else:
        rows = [sweep_task(cfg, e, x) for e, x in tasks]
    lines = ["epsilon,x0,final_dist,tail_sup,status"]
    for r in rows:
        x0 = " ".join(format(v, ".17g") for v in r["x0"])
        lines.append(f"{r['epsilon']:.17g},{x0},{r['final_dist']:.17g},{r['tail_sup']:.17g},{r['status']}")
        print(f"eps={r['epsilon']:<8g} x0=({x0})  final={r['final_dist']:.4g}  tail sup={r['tail_sup']:.4g}  {r['status']}")
    path = out / "sweep.csv"
    path.write_text("\n".join(lines) + "\n")
    print(f"wrote {path}")
    return EXIT_BLOWUP if any(r["status"] != "ok" for r in rows) else EXIT_OK


# -- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partial-es", description="Extremum seeking with partial stability checks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("simulate", "integrate the closed loop and write CSV + SVG"),
                        ("verify", "empirical practical partial stability verdict"),
                        ("check", "analytic identities and remainder bounds"),
                        ("sweep", "grid of epsilons and initial states")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="INI run configuration")
        sp.add_argument("--out", help="output directory (default: output_dir from the config)")
        sp.add_argument("--workers", type=int, help="worker processes (fallback: PES_WORKERS)")
        sp.add_argument("--substeps", type=int, help="RK4 steps per dither period (>= 32)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.substeps is not None:
            if args.substeps < 32:
                raise ConfigError(f"--substeps must be >= 32, got {args.substeps}")
            cfg = replace(cfg, substeps=args.substeps)
        workers = _workers(args.workers)
        out = _out_dir(cfg, args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "verify":
            return cmd_verify(cfg, out, workers)
        if args.command == "check":
            return cmd_check(cfg, out)
        return cmd_sweep(cfg, out, workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationBlowUp, GainDomainError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_BLOWUP


if __name__ == "__main__":
    sys.exit(main())
