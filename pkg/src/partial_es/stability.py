"""Empirical checks of practical partial stability and of Lyapunov conditions.

Nothing here is a proof.  The verifier runs finite-horizon simulations from
sampled initial conditions and stores enough per-run data that every claim
in a :class:`StabilityReport` can be re-derived with :func:`recheck_report`.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import isotonic_regression
from scipy.stats import qmc

from .simulator import SimulationBlowUp, Trajectory
from .vectorfield import ScalarField, VectorField, eval_field

Simulate = Callable[[np.ndarray, float, float, float], list]

VERDICTS = ("stable", "attractive_only", "failed")


# -- convergence time -------------------------------------------------------

def y_distance(states, y_star, y_indices=None) -> np.ndarray:
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    cols = list(y_indices) if y_indices is not None else list(range(len(y_star)))
    return np.linalg.norm(np.asarray(states)[..., cols] - y_star, axis=-1)


def _settle_index(dist: np.ndarray, rho: float) -> Optional[int]:
    bad = np.flatnonzero(dist > rho)
    if bad.size == 0:
        return 0
    if bad[-1] + 1 >= len(dist):
        return None
    return int(bad[-1] + 1)


def convergence_time(traj: Trajectory, y_star, rho: float, y_indices=None) -> Optional[float]:
    """First sample time after which ``|y - y*| <= rho`` holds for the rest of the record."""
    k = _settle_index(y_distance(traj.states, y_star, y_indices), rho)
    return None if k is None else float(traj.times[k])


# -- practical stability verifier ---------------------------------------------------

@dataclass
class RunRecord:
    x0: list
    epsilon: float
    t0: float
    y0_dist: float
    sup_dev: float               # sup over [t0, T] of |y - y*|
    settle_time: Optional[float]  # relative to t0, for this certificate's rho
    sup_dev_after_t1: float
    converged: bool


@dataclass
class RhoCertificate:
    rho: float
    epsilon_bar: Optional[float]
    t1: Optional[float]
    stability_delta: float
    runs: list = field(default_factory=list)

    @property
    def attractive(self) -> bool:
        return self.epsilon_bar is not None

    @property
    def stable(self) -> bool:
        return self.attractive and self.stability_delta > 0


@dataclass
class StabilityReport:
    delta: float
    horizon: float
    min_dwell: float
    certificates: list
    verdict: str

    @property
    def rho(self) -> float:
        return min(c.rho for c in self.certificates)

    def _smallest(self) -> RhoCertificate:
        return min(self.certificates, key=lambda c: c.rho)

    @property
    def epsilon_bar(self) -> Optional[float]:
        return self._smallest().epsilon_bar

    @property
    def t1(self) -> Optional[float]:
        return self._smallest().t1

    @property
    def runs(self) -> list:
        return self._smallest().runs

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rho"] = self.rho
        return d


def ball_samples(y_star, delta: float, n_samples: int = 16, inner_radii: Sequence[float] = (),
                 seed: int = 0) -> np.ndarray:
    """Center and axis points at ``delta`` and at each inner radius, padded with Halton interior points.

    At least ``n_samples`` points are returned.
    """
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    d = len(y_star)
    pts = [y_star.copy()]
    for r in (delta, *inner_radii):
        for k in range(d):
            for s in (1.0, -1.0):
                e = np.zeros(d)
                e[k] = s * r
                pts.append(y_star + e)
    if len(pts) < n_samples:
        sampler = qmc.Halton(d=d, scramble=True, seed=seed)
        while len(pts) < n_samples:
            u = 2.0 * sampler.random(1)[0] - 1.0
            if np.linalg.norm(u) <= 1.0:
                pts.append(y_star + delta * u)
    return np.array(pts)


def _simulate_safely(simulate: Simulate, x0s: np.ndarray, eps: float, t0: float, horizon: float):
    try:
        return simulate(x0s, eps, t0, horizon)
    except SimulationBlowUp:
        out = []
        for x0 in x0s:
            try:
                out.extend(simulate(x0[None, :], eps, t0, horizon))
            except SimulationBlowUp:
                out.append(None)
        return out


def _settle_times(runs_raw, rho) -> list:
    out = []
    for stub, times, dist in runs_raw:
        k = None if dist is None else _settle_index(dist, rho)
        out.append(None if k is None else float(times[k] - stub["t0"]))
    return out


def _decide(records, rho) -> tuple:
    """``(eps_bar, stability_radius)`` from per-run convergence flags and deviations.

    Attractivity must hold at every tested ``eps`` up to ``eps_bar``; among
    those the largest ``eps_bar`` that also admits a positive stability
    radius wins, since one threshold has to serve both properties.
    """
    eps_values = sorted({r.epsilon for r in records})
    attractive = None
    for eps in eps_values:
        if not all(r.converged for r in records if r.epsilon == eps):
            break
        attractive = eps
    if attractive is None:
        return None, 0.0
    for cand in sorted((e for e in eps_values if e <= attractive), reverse=True):
        radius = _stability_radius(records, rho, cand)
        if radius > 0:
            return cand, radius
    return attractive, 0.0


def _certify(rho, runs_raw, horizon, min_dwell) -> RhoCertificate:
    """Build the certificate for one rho from raw ``(record_stub, times, dist)`` tuples."""
    limit = (1.0 - min_dwell) * horizon
    records = [RunRecord(stub["x0"], stub["epsilon"], stub["t0"], stub["y0_dist"], stub["sup_dev"],
                         s, float("inf"), s is not None and s <= limit)
               for (stub, _, _), s in zip(runs_raw, _settle_times(runs_raw, rho))]
    eps_bar, delta_rho = _decide(records, rho)
    t1 = None
    if eps_bar is not None:
        t1 = max(r.settle_time for r in records if r.epsilon <= eps_bar)
    for rec, (stub, times, dist) in zip(records, runs_raw):
        if dist is not None:
            tail = dist[times >= stub["t0"] + (t1 if t1 is not None else horizon) - 1e-12]
            rec.sup_dev_after_t1 = float(tail.max()) if tail.size else float("inf")
    return RhoCertificate(rho, eps_bar, t1, delta_rho, records)


def _stability_radius(records, rho, eps_bar) -> float:
    if eps_bar is None:
        return 0.0
    pool = sorted((r for r in records if r.epsilon <= eps_bar), key=lambda r: r.y0_dist)
    radius = 0.0
    for k, r in enumerate(pool):
        if r.sup_dev > rho:
            break
        if r.y0_dist > 0 and (k + 1 == len(pool) or pool[k + 1].y0_dist > r.y0_dist):
            radius = r.y0_dist
    return radius


def _verdict(certs) -> str:
    if all(c.stable for c in certs):
        return "stable"
    if all(c.attractive for c in certs):
        return "attractive_only"
    return "failed"


def verify_practical_partial_stability(simulate: Simulate, y_star, delta: float,
                                       rho_list: Sequence[float], eps_list: Sequence[float],
                                       z0_grid: Sequence, t0_grid: Sequence[float], T: float,
                                       y_indices=None, n_ball: int = 16, min_dwell: float = 0.5,
                                       seed: int = 0, map_fn: Callable = map) -> StabilityReport:
    """Finite-horizon check of practical uniform partial asymptotic stability.

    ``simulate(x0s, eps, t0, horizon)`` returns one trajectory per row of
    ``x0s`` on ``[t0, t0 + horizon]``.  A run counts as converged for a
    given ``rho`` when it settles into the ``rho``-ball no later than
    ``(1 - min_dwell) * horizon`` after its start.  Simulations fan out one
    task per ``(eps, t0)`` pair through ``map_fn``; pass an executor's
    ``map`` (with a picklable ``simulate``) to run them in parallel.
    """
    if not rho_list:
        raise ValueError("rho_list is empty")
    if not eps_list or not t0_grid or not z0_grid:
        raise ValueError("eps_list, z0_grid and t0_grid must be non-empty")
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    n1 = len(y_star)
    y_idx = list(y_indices) if y_indices is not None else list(range(n1))
    z_rows = [np.atleast_1d(np.asarray(z, dtype=float)) for z in z0_grid]
    n = n1 + len(z_rows[0])
    z_idx = [i for i in range(n) if i not in y_idx]
    # probes close to y* so that small stability radii can be certified
    inner = sorted({min(delta, rho) * 0.5**k for rho in rho_list for k in range(1, 5)}, reverse=True)
    ys = ball_samples(y_star, delta, n_ball, inner, seed=seed)

    x0s = []
    for y in ys:
        for z in z_rows:
            x = np.zeros(n)
            x[y_idx] = y
            x[z_idx] = z
            x0s.append(x)
    x0s = np.array(x0s)

    tasks = [(float(eps), float(t0)) for eps in eps_list for t0 in t0_grid]
    results = map_fn(partial(_simulate_safely, simulate, x0s, horizon=T),
                     [e for e, _ in tasks], [t for _, t in tasks])
    runs_raw = []
    for (eps, t0), trajs in zip(tasks, results):
        for x0, tr in zip(x0s, trajs):
            y0d = float(np.linalg.norm(x0[y_idx] - y_star))
            stub = {"x0": x0.tolist(), "epsilon": float(eps), "t0": float(t0), "y0_dist": y0d}
            if tr is None:
                stub["sup_dev"] = float("inf")
                runs_raw.append((stub, None, None))
                continue
            dist = y_distance(tr.states, y_star, y_idx)
            stub["sup_dev"] = float(dist.max())
            runs_raw.append((stub, tr.times, dist))

    certs = [_certify(float(rho), runs_raw, T, min_dwell) for rho in rho_list]
    return StabilityReport(float(delta), float(T), min_dwell, certs, _verdict(certs))


def recheck_report(report: StabilityReport) -> bool:
    """Re-derive every certificate claim and the verdict from the stored runs."""
    limit = (1.0 - report.min_dwell) * report.horizon
    for c in report.certificates:
        if any(r.converged != (r.settle_time is not None and r.settle_time <= limit) for r in c.runs):
            return False
        if _decide(c.runs, c.rho) != (c.epsilon_bar, c.stability_delta):
            return False
        if c.epsilon_bar is None:
            continue
        used = [r for r in c.runs if r.epsilon <= c.epsilon_bar]
        if c.t1 != max(r.settle_time for r in used):
            return False
        if any(r.sup_dev_after_t1 > c.rho for r in used):
            return False
        if c.stability_delta > 0 and any(r.sup_dev > c.rho for r in used
                                         if r.y0_dist <= c.stability_delta):
            return False
    return report.verdict == _verdict(report.certificates)


# -- class-K envelopes and Lyapunov conditions -------------------------------

def isotonic_fit(values: Sequence[float], weights: Optional[Sequence[float]] = None) -> np.ndarray:
    """Least-squares non-decreasing fit (pool-adjacent-violators)."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return v.copy()
    return np.asarray(isotonic_regression(v, weights=weights, increasing=True).x, dtype=float)


@dataclass(frozen=True)
class ClassKEnvelope:
    knots_r: tuple
    knots_value: tuple
    monotone: bool

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        kr = np.asarray(self.knots_r)
        kv = np.asarray(self.knots_value)
        slope = (kv[-1] - kv[-2]) / (kr[-1] - kr[-2])
        inside = np.interp(r, kr, kv)
        return np.where(r > kr[-1], kv[-1] + slope * (r - kr[-1]), inside)

    @property
    def valid(self) -> bool:
        v = np.asarray(self.knots_value)
        return self.knots_value[0] == 0.0 and bool(np.all(np.diff(v) > 0)) and self.monotone


def _strict_increase(vals: np.ndarray, up: bool) -> np.ndarray:
    K = len(vals)
    k = np.arange(K)
    if up:
        return vals * (1.0 + 1e-6 * (k + 1) / K) + 1e-12 * (k + 1)
    return vals * (1.0 - 1e-6 * (K - k) / K)


def lower_envelope(edges, shell_min) -> ClassKEnvelope:
    """Increasing ``alpha`` with ``alpha(r) <= shell_min[k]`` on shell ``[edges[k], edges[k+1])``."""
    m = np.asarray(shell_min, dtype=float)
    suffix = np.minimum.accumulate(m[::-1])[::-1]
    c = np.minimum(isotonic_fit(m), suffix)
    ok = bool(np.all(c > 0))
    c = _strict_increase(np.maximum(c, 0.0), up=False)
    return ClassKEnvelope(tuple([0.0] + list(edges[1:])), tuple([0.0] + list(c)),
                          monotone=ok and bool(np.all(np.diff(c) > 0)))


def upper_envelope(edges, shell_max, first_slope_bound: float) -> ClassKEnvelope:
    """Increasing ``alpha`` with ``alpha(r) >= shell_max[k]`` on each shell, linear on the first.

    Shell ``k >= 1`` is covered by a knot at its lower edge carrying the
    running maximum; the first shell is covered by the line of slope
    ``first_slope_bound`` through the origin.
    """
    edges = np.asarray(edges, dtype=float)
    a = np.maximum(isotonic_fit(shell_max), np.maximum.accumulate(np.asarray(shell_max, dtype=float)))
    K = len(a)
    line = first_slope_bound * edges[1]
    vals = [max(line, a[1]) if K > 1 else line, *a[2:]]
    vals.append(vals[-1])  # closing knot at the outer edge
    vals = _strict_increase(np.maximum.accumulate(np.asarray(vals)), up=True)
    knots = [0.0, *edges[1:K + 1]]
    return ClassKEnvelope(tuple(knots), tuple([0.0, *vals]), monotone=bool(np.all(np.isfinite(vals))))


@dataclass
class LyapunovReport:
    sandwich: bool
    decrease: bool
    alpha1: ClassKEnvelope
    alpha2: ClassKEnvelope
    alpha3: ClassKEnvelope
    shell_edges: tuple
    shell_min_V: tuple
    shell_max_V: tuple
    shell_max_LV: tuple
    variant: str
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.sandwich and self.decrease


def _shell_ids(r: np.ndarray, edges: np.ndarray) -> np.ndarray:
    ids = np.searchsorted(edges, r, side="right") - 1
    ids[(r >= edges[-1]) | (r < edges[0])] = -1
    return ids


def lyapunov_conditions(V: ScalarField, f_bar, y_star, sample_states, shells: Sequence[float],
                        y_indices=None, variant: str = "partial", x_star=None,
                        tol: float = 1e-9) -> LyapunovReport:
    """Sandwich and decrease conditions via shell statistics and monotone envelopes.

    ``shells`` are the radii ``0 = s_0 < s_1 < ... < s_K``.  With
    ``variant="full_state"`` the upper bound of ``V`` is taken over shells of
    ``|x - x*|`` instead of ``|y - y*|``.
    """
    if variant not in ("partial", "full_state"):
        raise ValueError(f"unknown variant {variant!r}")
    edges = np.asarray(shells, dtype=float)
    if edges[0] != 0.0:
        edges = np.concatenate(([0.0], edges))
    if len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValueError("shell radii must be increasing")
    X = np.atleast_2d(np.asarray(sample_states, dtype=float))
    y_star = np.atleast_1d(np.asarray(y_star, dtype=float))
    cols = list(y_indices) if y_indices is not None else list(range(len(y_star)))
    field_ = f_bar.field if hasattr(f_bar, "field") else f_bar

    vals = np.asarray(V(X), dtype=float)
    LV = np.sum(V.gradient(X) * eval_field(field_, X), axis=-1)
    ry = y_distance(X, y_star, cols)
    if variant == "full_state":
        xs = np.zeros(X.shape[1]) if x_star is None else np.asarray(x_star, dtype=float)
        if x_star is None:
            xs[cols] = y_star
        rup = np.linalg.norm(X - xs, axis=-1)
    else:
        rup = ry

    ids_y = _shell_ids(ry, edges)
    ids_up = _shell_ids(rup, edges)
    K = len(edges) - 1
    for k in range(K):
        if not np.any(ids_y == k) or not np.any(ids_up == k):
            raise ValueError(f"shell [{edges[k]:g}, {edges[k + 1]:g}) has no samples")

    notes = []
    positive = ry > 0
    shell_min = np.array([vals[(ids_y == k) & positive].min() if np.any((ids_y == k) & positive)
                          else np.inf for k in range(K)])
    shell_max = np.array([vals[ids_up == k].max() for k in range(K)])
    shell_lv = np.array([LV[(ids_y == k) & positive].max() if np.any((ids_y == k) & positive)
                         else -np.inf for k in range(K)])

    first = (ids_up == 0) & (rup > 0)
    slope0 = float(np.max(vals[first] / rup[first])) if np.any(first) else 0.0

    # alpha(0) = 0 forces V and L V to vanish (resp. be <= 0) on the target set
    proj = X.copy()
    if variant == "full_state":
        proj[:] = xs
    else:
        proj[:, cols] = y_star
    V_on_target = float(np.max(np.abs(V(proj))))
    LV_on_target = float(np.max(np.sum(V.gradient(proj) * eval_field(field_, proj), axis=-1)))
    scale = max(1.0, float(np.max(np.abs(vals))))

    alpha1 = lower_envelope(edges, shell_min)
    alpha2 = upper_envelope(edges, shell_max, slope0)
    alpha3 = lower_envelope(edges, -shell_lv)

    lower_ok = bool(np.all(shell_min > 0)) and alpha1.valid
    upper_ok = V_on_target <= tol * scale and alpha2.valid
    if not lower_ok:
        notes.append("V is not positive on every shell away from the target set")
    if not upper_ok:
        notes.append(f"V does not vanish on the target set (max |V| = {V_on_target:.3g}); "
                     "no class-K upper bound exists")
    decrease_ok = bool(np.all(shell_lv < 0)) and LV_on_target <= tol * scale and alpha3.valid
    if not decrease_ok:
        notes.append("L_f V is not negative on every shell")
    return LyapunovReport(lower_ok and upper_ok, decrease_ok, alpha1, alpha2, alpha3,
                          tuple(edges), tuple(shell_min), tuple(shell_max), tuple(shell_lv),
                          variant, notes)


# -- F-matrix nonsingularity --------------------------------------------------

def jacobi_singular_values(A, tol: float = 1e-15, max_sweeps: int = 60) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi rotations, in descending order."""
    U = np.array(A, dtype=float, copy=True)
    n = U.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = U[:, p] @ U[:, p]
                beta = U[:, q] @ U[:, q]
                gamma = U[:, p] @ U[:, q]
                if abs(gamma) <= tol * np.sqrt(alpha) * np.sqrt(beta) or gamma == 0.0:
                    continue
                rotated = True
                zeta = (beta - alpha) / 2.0 / gamma if abs(beta - alpha) < 1e300 * abs(gamma) else np.inf
                if zeta == 0:
                    t = 1.0
                elif abs(zeta) > 1e150:
                    t = 0.5 / zeta  # the rotation angle is negligible
                else:
                    t = np.sign(zeta) / (abs(zeta) + np.hypot(1.0, zeta))
                c = 1.0 / np.hypot(1.0, t)
                s = c * t
                up = U[:, p].copy()
                U[:, p] = c * up - s * U[:, q]
                U[:, q] = s * up + c * U[:, q]
        if not rotated:
            break
    return np.sort(np.linalg.norm(U, axis=0))[::-1]


def f_matrix(tilde_fields: Sequence[VectorField], x) -> np.ndarray:
    """``F[j, i]`` is the ``j``-th component of the ``i``-th reduced field at ``x``."""
    return np.stack([eval_field(f, x) for f in tilde_fields], axis=-1)


def f_matrix_min_singular(tilde_fields: Sequence[VectorField], grid):
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise ValueError("grid is empty")
    best, arg = np.inf, None
    for x in grid:
        sv = jacobi_singular_values(f_matrix(tilde_fields, x))[-1]
        if sv < best:
            best, arg = float(sv), x.copy()
    return best, arg


def reduced_input_fields(system) -> list:
    """The ``y``-components of each input field, as fields into R^{n1}."""
    cols = list(system.y_idx)
    return [VectorField(f.dim_in, len(cols), lambda x, f=f: eval_field(f, x)[..., cols],
                        name=f"{f.name}|y") for f in system.inputs]
