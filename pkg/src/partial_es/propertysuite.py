"""Cross-module properties and the acceptance criteria, runnable as one suite.

``run_all(seed, scale)`` evaluates every property, collects failures
without aborting, and returns a :class:`Summary` that prints as a table and
serializes to JSON.  The ``criterion_*`` functions are the acceptance gate;
``tests/test_acceptance.py`` calls them one by one.

    python -m partial_es.propertysuite --scale quick --seed 0
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .averaging import averaged_equivalence_residual, es_averaged_field, es_lie_bracket_system
from .controller import gain_pair, make_params, wronskian_residual
from .dither import DitherSignal, compute_nu, pattern_residual
from .scenarios import brockett_scenario, domain_grid, rigid_body_scenario
from .simulator import Trajectory, integrate, integrate_batch, integrate_closed_loop
from .stability import (convergence_time, f_matrix_min_singular, recheck_report,
                        reduced_input_fields, verify_practical_partial_stability)
from .vectorfield import VectorField, lie_bracket, linear_field
from .volterra import defect_slope, one_period_defect, sigma_of

DEFECT_EPSILONS = (0.4, 0.2, 0.1, 0.05)


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str

    def __post_init__(self):
        self.passed = bool(self.passed)

    def line(self) -> str:
        return f"criterion {self.number:>2} [{'PASS' if self.passed else 'FAIL'}] {self.title}: {self.detail}"


# -- acceptance criteria ---------------------------------------------------------

def criterion_1(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = {}
    for kind, lo, hi in (("contA", -10.0, 10.0), ("contB", 1e-2, 20.0)):
        pair = gain_pair(kind)
        worst[kind] = max(abs(wronskian_residual(pair, z)) for z in rng.uniform(lo, hi, 100))
    ok = all(v <= 1e-5 for v in worst.values())
    return CriterionResult(1, "gain-pair Wronskian", ok,
                           ", ".join(f"{k} max residual {v:.2e}" for k, v in worst.items()) + " (tol 1e-5)")


def criterion_2(seed: int = 0) -> CriterionResult:
    a = 2.0 * np.sqrt(np.pi)
    c = DitherSignal(lambda th: a * np.cos(2 * np.pi * th), a, "cos")
    s = DitherSignal(lambda th: a * np.sin(2 * np.pi * th), a, "sin")
    nu_pair = compute_nu(c, s)
    params = make_params("contA", 0.1, (2.0, 2.0), frequencies=(1, 2))
    resid = pattern_residual(params.nu, 1.0)
    ok = abs(nu_pair - 1.0) <= 1e-8 and resid <= 1e-8
    return CriterionResult(2, "dither coefficients", ok,
                           f"nu(cos, sin) at amplitude 2 sqrt(pi) = {nu_pair:.12f}; "
                           f"two-channel pattern residual {resid:.2e} (tol 1e-8)")


def criterion_3(seed: int = 0) -> CriterionResult:
    worst, parts = 0.0, []
    for scen, cost in ((brockett_scenario(), "J1"), (rigid_body_scenario(), "J")):
        sys_ = scen.system_for(cost)
        grid = domain_grid(scen, cost, 50, seed)
        for kind in ("contA", "contB"):
            params = make_params(kind, 0.1, (2.0, 2.0), frequencies=(1, 2))
            r = averaged_equivalence_residual(sys_, params, scen.cost(cost).field, grid)
            worst = max(worst, r)
            parts.append(f"{scen.name}/{kind} {r:.1e}")
    return CriterionResult(3, "bracket sum equals gradient form", worst <= 1e-5,
                           "; ".join(parts) + " (tol 1e-5)")


def criterion_4(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    scen = rigid_body_scenario(1.0, 2.0, 3.0)
    X = rng.normal(scale=3.0, size=(100, 3))
    generic = es_averaged_field(scen.system_for("J"), scen.cost("J").field, (1.0, 1.0)).field(X)
    closed = scen.averaged_closed_form((1.0, 1.0)).eval(X)
    field_gap = float(np.max(np.abs(generic - closed)))
    V = scen.reference_V["energy"]
    vdot = np.sum(V.gradient(X) * closed, axis=-1)
    vdot_gap = float(np.max(np.abs(vdot + 4.0 * (X[:, 0] ** 2 + 2.0 * X[:, 1] ** 2))))
    ok = field_gap <= 1e-10 and vdot_gap <= 1e-8
    return CriterionResult(4, "rigid-body averaged field", ok,
                           f"field gap {field_gap:.1e} (tol 1e-10), V-dot gap {vdot_gap:.1e} (tol 1e-8)")


def defect_study(epsilons=DEFECT_EPSILONS) -> list:
    """``(figure, defects, bounds, slope)`` for every figure configuration of both scenarios."""
    rows = []
    for scen in (brockett_scenario(), rigid_body_scenario()):
        for name, fp in scen.figure_params.items():
            sys_ = scen.system_for(fp.cost)
            cost = scen.cost(fp.cost).field
            res = [one_period_defect(sys_, make_params(fp.gain_kind, e, fp.gammas), cost, fp.x0)
                   for e in epsilons]
            d = [r.defect for r in res]
            rows.append((name, d, [r.bound for r in res], defect_slope(epsilons, d)))
    return rows


def criterion_5(seed: int = 0) -> CriterionResult:
    rows = defect_study()
    bound_ok = all(all(d <= b for d, b in zip(ds, bs)) for _, ds, bs, _ in rows)
    slope_ok = all(s >= 1.4 for *_, s in rows)
    worst = max(max(d / b for d, b in zip(ds, bs)) for _, ds, bs, _ in rows)
    slopes = ", ".join(f"{n} {s:.2f}" for n, _, _, s in rows)
    return CriterionResult(5, "one-period remainder", bound_ok and slope_ok,
                           f"max defect/bound {worst:.1e} (need <= 1); slopes {slopes} (need >= 1.4)")


def _figure_run(scen, name):
    fp = scen.figure_params[name]
    sys_ = scen.system_for(fp.cost)
    cost = scen.cost(fp.cost)
    traj = integrate_closed_loop(sys_, make_params(fp.gain_kind, fp.epsilon, fp.gammas), cost.field,
                                 fp.x0, fp.T)
    return fp, cost, traj


def _tail_sup(traj: Trajectory, cost, fraction: float = 0.2) -> float:
    t = traj.times
    tail = t >= t[-1] - fraction * (t[-1] - t[0])
    d = np.linalg.norm(traj.states[tail][:, list(cost.y_indices)] - cost.y_star, axis=-1)
    return float(d.max())


def criterion_6(seed: int = 0) -> CriterionResult:
    scen = brockett_scenario()
    _, cost, traj_a = _figure_run(scen, "fig1a")
    _, _, traj_b = _figure_run(scen, "fig1b")
    a, b = _tail_sup(traj_a, cost), _tail_sup(traj_b, cost)
    return CriterionResult(6, "Brockett figure reproduction", a <= 0.6 and b <= 0.2,
                           f"tail sup contA {a:.4f} (tol 0.6), contB {b:.4f} (tol 0.2)")


def criterion_7(seed: int = 0) -> CriterionResult:
    scen = rigid_body_scenario(1.0, 2.0, 3.0)
    ok, parts = True, []
    for name, rho in (("fig2a", 0.4), ("fig2b", 0.4), ("fig2c", 0.5)):
        fp, cost, traj = _figure_run(scen, name)
        tau = convergence_time(traj, cost.y_star, rho, cost.y_indices)
        x3 = float(np.max(np.abs(traj.states[:, 2])))
        cap = 2.0 * float(np.linalg.norm(fp.x0))
        ok &= tau is not None and x3 <= cap
        parts.append(f"{name} settles in {rho}-ball at t={'never' if tau is None else f'{tau:.2f}'}, "
                     f"max|x3| {x3:.2f} (cap {cap:.2f})")
    return CriterionResult(7, "rigid-body figure reproduction", ok, "; ".join(parts))


def averaging_gaps(epsilons=(0.8, 0.4, 0.2, 0.1), horizon: float = 10.0, kind: str = "contA") -> list:
    scen = brockett_scenario()
    sys_ = scen.system_for("J1")
    cost = scen.cost("J1").field
    x0 = scen.figure_params["fig1a"].x0
    gaps = []
    for eps in epsilons:
        params = make_params(kind, eps, (2.0, 2.0))
        traj = integrate_closed_loop(sys_, params, cost, x0, horizon)
        fbar = es_lie_bracket_system(sys_, cost, params)
        avg = integrate(fbar.rhs, x0, 0.0, horizon, traj.step)
        gaps.append(float(np.max(np.linalg.norm(traj.states - avg.states, axis=-1))))
    return gaps


def criterion_8(seed: int = 0) -> CriterionResult:
    gaps = averaging_gaps()
    ok = all(b <= a for a, b in zip(gaps, gaps[1:]))
    return CriterionResult(8, "averaging convergence", ok,
                           "sup gap over eps 0.8, 0.4, 0.2, 0.1: " + ", ".join(f"{g:.3f}" for g in gaps))


def _autonomous_simulator(field: VectorField, step: float = 0.01):
    def simulate(x0s, eps, t0, horizon):
        return integrate_batch(lambda t, x: field.eval(x), x0s, t0, t0 + horizon, step)
    return simulate


def rigid_body_report(seed: int = 0, t0_grid=(0.0, 0.25)):
    scen = rigid_body_scenario(1.0, 2.0, 3.0)
    sim = _autonomous_simulator(scen.averaged_closed_form((1.0, 1.0)))
    return verify_practical_partial_stability(sim, [0.0, 0.0], 1.0, [0.5, 0.2], [0.25, 0.1],
                                              [[-1.0], [0.0], [1.0]], list(t0_grid), 20.0, seed=seed)


def unstable_report(seed: int = 0):
    sim = _autonomous_simulator(linear_field([[1.0]]))
    return verify_practical_partial_stability(sim, [0.0], 0.5, [0.2], [0.25, 0.1], [()], [0.0], 10.0,
                                              seed=seed)


def criterion_9(seed: int = 0) -> CriterionResult:
    good, bad = rigid_body_report(seed), unstable_report(seed)
    rechecked = recheck_report(good) and recheck_report(bad)
    ok = good.verdict == "stable" and bad.verdict == "failed" and rechecked
    return CriterionResult(9, "stability verifier soundness", ok,
                           f"rigid-body averaged verdict {good.verdict} (t1 {good.t1:.2f}), "
                           f"y' = y verdict {bad.verdict}, reports recheck {rechecked}")


def criterion_10(seed: int = 0) -> CriterionResult:
    scen = brockett_scenario()
    fields = reduced_input_fields(scen.system_for("J2"))

    def lattice(x1):
        g = np.meshgrid(x1, np.linspace(-3, 3, 7), np.linspace(-3, 3, 5), indexing="ij")
        return np.stack(g, axis=-1).reshape(-1, 3)

    inside, _ = f_matrix_min_singular(fields, lattice(np.linspace(0.2, 6.0, 12)))
    with_zero, at = f_matrix_min_singular(fields, lattice(np.linspace(0.0, 6.0, 13)))
    ok = inside > 0 and with_zero <= 1e-12
    return CriterionResult(10, "input-direction nonsingularity", ok,
                           f"min singular value {inside:.3f} on x1 in [0.2, 6]; "
                           f"{with_zero:.1e} at x1 = {at[0]:g}")


ACCEPTANCE: dict = {k: globals()[f"criterion_{k}"] for k in range(1, 11)}
QUICK_CRITERIA = (1, 2, 3, 4, 6, 7, 9, 10)


# -- module invariants -------------------------------------------------------------

def prop_bracket_antisymmetry(seed: int) -> str:
    rng = np.random.default_rng(seed)
    f, g = linear_field(rng.normal(size=(3, 3))), linear_field(rng.normal(size=(3, 3)))
    X = rng.normal(size=(20, 3))
    gap = float(np.max(np.abs(lie_bracket(f, g, X) + lie_bracket(g, f, X))))
    assert gap <= 1e-12, f"[f,g] + [g,f] = {gap:.2e}"
    return f"max |[f,g] + [g,f]| = {gap:.1e}"


def prop_rk4_order(seed: int) -> str:
    steps = (0.1, 0.05, 0.025)
    errs = [abs(integrate(lambda t, x: -x, [1.0], 0.0, 10.0, h).final[0] - np.exp(-10.0)) for h in steps]
    slope = float(np.polyfit(np.log(steps), np.log(errs), 1)[0])
    assert abs(slope - 4.0) <= 0.2, f"slope {slope:.3f}"
    return f"global error slope {slope:.3f}"


def prop_sigma_monotone(seed: int) -> str:
    rng = np.random.default_rng(seed)
    M2, M3, W = rng.uniform(0, 5, 3)
    eps = np.sort(rng.uniform(1e-3, 1.0, 20))
    s = [sigma_of(M2, M3, W, 2, e) for e in eps]
    assert all(a <= b for a, b in zip(s, s[1:])), "sigma decreased"
    return "sigma non-decreasing on 20 sorted eps"


def prop_defect_bound(seed: int) -> str:
    scen = brockett_scenario()
    fp = scen.figure_params["fig1a"]
    r = one_period_defect(scen.system_for("J1"), make_params("contA", 0.1, fp.gammas),
                          scen.cost("J1").field, fp.x0)
    assert r.defect <= r.bound, f"defect {r.defect:.3g} > bound {r.bound:.3g}"
    return f"defect {r.defect:.3g} <= bound {r.bound:.3g}"


def prop_brockett_stability(seed: int) -> str:
    scen = brockett_scenario()
    sys_ = scen.system_for("J1")
    cost = scen.cost("J1")

    def simulate(x0s, eps, t0, horizon):
        from .simulator import integrate_closed_loop_batch
        return integrate_closed_loop_batch(sys_, make_params("contA", eps, (2.0, 2.0)), cost.field,
                                           x0s, t0 + horizon, t0=t0)

    rep = verify_practical_partial_stability(simulate, cost.y_star, 3.5, [0.6], [0.75, 0.4, 0.2, 0.1],
                                             [[0.0], [2.0], [5.0]], [0.0], 60.0, seed=seed)
    assert rep.verdict == "stable", f"verdict {rep.verdict}"
    assert rep.epsilon_bar is not None and 0.1 <= rep.epsilon_bar <= 0.75
    return f"verdict stable, eps_bar {rep.epsilon_bar:g}"


QUICK_PROPERTIES = {
    "bracket antisymmetry": prop_bracket_antisymmetry,
    "RK4 order": prop_rk4_order,
    "sigma monotone in eps": prop_sigma_monotone,
    "defect within bound": prop_defect_bound,
}
FULL_PROPERTIES = {**QUICK_PROPERTIES, "Brockett stability verdict": prop_brockett_stability}


# -- runner ------------------------------------------------------------------------------

@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str
    seconds: float


@dataclass
class Summary:
    seed: int
    scale: str
    results: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def outcomes(self) -> list:
        """Everything except timings; identical across runs with the same seed."""
        return [(r.name, r.passed, r.detail) for r in self.results]

    def table(self) -> str:
        width = max(len(r.name) for r in self.results)
        rows = [f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL'}  {r.seconds:6.1f}s  {r.detail}"
                for r in self.results]
        n_fail = sum(not r.passed for r in self.results)
        rows.append(f"{len(self.results) - n_fail} passed, {n_fail} failed (seed {self.seed}, {self.scale})")
        return "\n".join(rows)

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "scale": self.scale, "passed": self.passed,
                           "results": [asdict(r) for r in self.results]}, indent=1)


def _run_one(name: str, fn: Callable, seed: int) -> PropertyResult:
    start = time.perf_counter()
    try:
        out = fn(seed)
        if isinstance(out, CriterionResult):
            passed, detail = out.passed, out.detail
        else:
            passed, detail = True, str(out)
    except AssertionError as exc:
        passed, detail = False, f"{exc} (seed {seed})"
    except Exception as exc:  # collected, never aborting the suite
        passed = False
        detail = f"{type(exc).__name__}: {exc} (seed {seed}) " + traceback.format_exc(limit=1).strip().splitlines()[-1]
    return PropertyResult(name, passed, detail, time.perf_counter() - start)


def run_all(seed: int = 0, scale: str = "quick") -> Summary:
    if scale not in ("quick", "full"):
        raise ValueError(f"scale must be 'quick' or 'full', got {scale!r}")
    props = QUICK_PROPERTIES if scale == "quick" else FULL_PROPERTIES
    criteria = QUICK_CRITERIA if scale == "quick" else tuple(ACCEPTANCE)
    summary = Summary(seed, scale)
    for name, fn in props.items():
        summary.results.append(_run_one(name, fn, seed))
    for k in criteria:
        summary.results.append(_run_one(f"criterion {k}", ACCEPTANCE[k], seed))
    return summary


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="python -m partial_es.propertysuite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", choices=("quick", "full"), default="quick")
    p.add_argument("--json", help="also write the summary as JSON to this path")
    args = p.parse_args(argv)
    summary = run_all(args.seed, args.scale)
    print(summary.table())
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(summary.to_json())
    return 0 if summary.passed else 1


if __name__ == "__main__":
    sys.exit(main())
