"""Brute-force difference-quotient machinery.

Everything here estimates limits of second-order quotients by direct function
evaluation: a geometric step schedule, a shrinking search ball around the
probed direction, batched grid (or seeded random) sampling per level, a
deterministic pattern-search polish, and a three-level extrapolation of the
per-level minima.  These estimates are the ground truth the closed forms are
validated against; they never share formulas with the catalog.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import GridSchedule
from .errors import (
    BasePointInfeasible,
    CriticalConePreconditionFailed,
    NegativeInfinityDetected,
)
from .extreal import NEG_GUARD, PLUS_INF, ExtReal

RANDOM_BALL_SAMPLES = 2000
GRID_DIM_LIMIT = 4
Z_GRID_HALF_WIDTH = 10.0
Z_GRID_CAP = 100_000


@dataclass
class SampledFunction:
    """A deterministic extended-real-valued evaluator on R^dim.

    batch_evaluator, when given, maps an (N, dim) array to N floats with +inf
    marking points outside the domain.  restore_feasible, when given, maps a
    point to a nearby domain point and lets the searches steer along active
    constraint surfaces; it provides zeroth-order domain information only.
    """

    evaluator: Callable[[np.ndarray], ExtReal | float]
    dim: int
    description: str = ""
    batch_evaluator: Callable[[np.ndarray], np.ndarray] | None = None
    restore_feasible: Callable[[np.ndarray], np.ndarray] | None = None

    def value(self, x) -> ExtReal:
        out = self.evaluator(np.asarray(x, dtype=float))
        out = out if isinstance(out, ExtReal) else ExtReal(float(out))
        if out.is_finite and out.value < NEG_GUARD:
            raise NegativeInfinityDetected(self.description or "sampled function")
        return out

    def eval_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.batch_evaluator is not None:
            vals = np.asarray(self.batch_evaluator(X), dtype=float)
        else:
            vals = np.array([self.value(row).as_float() for row in X])
        finite = vals[np.isfinite(vals)]
        if finite.size and float(finite.min()) < NEG_GUARD:
            raise NegativeInfinityDetected(self.description or "sampled function")
        return vals


@dataclass
class EpiReport:
    """Convergence record for one probed direction."""

    direction: np.ndarray
    formula_value: ExtReal
    oracle_value: ExtReal
    achieving_sequence: list = field(default_factory=list)
    converged: bool = False
    gap: float = math.inf


# -- elementary quotients -----------------------------------------------------


def delta2_quotient(f: SampledFunction, x, v, t: float, w) -> ExtReal:
    """Second-order difference quotient at step t along w for the pairing v."""
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    f0 = f.value(x)
    if not f0.is_finite:
        raise BasePointInfeasible("f(x) must be finite")
    fx = f.value(x + t * w)
    if not fx.is_finite:
        return PLUS_INF
    return ExtReal((fx.value - f0.value - t * float(v @ w)) / (0.5 * t * t))


# -- per-level search ---------------------------------------------------------


def _ball_offsets(dim: int, radius: float, sched: GridSchedule, rng) -> np.ndarray:
    if radius <= 0:
        return np.zeros((1, dim))
    if dim <= GRID_DIM_LIMIT:
        axis = np.linspace(-radius, radius, sched.samples_per_axis)
        mesh = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        mesh = mesh[np.linalg.norm(mesh, axis=1) <= radius * (1 + 1e-12)]
    else:
        raw = rng.standard_normal((RANDOM_BALL_SAMPLES, dim))
        raw /= np.maximum(np.linalg.norm(raw, axis=1, keepdims=True), 1e-300)
        radii = radius * rng.random(RANDOM_BALL_SAMPLES) ** (1.0 / dim)
        mesh = raw * radii[:, None]
    return np.vstack([np.zeros((1, dim)), mesh])


def _ball_clip(p: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    off = p - center
    nrm = float(np.linalg.norm(off))
    if nrm <= radius or radius <= 0:
        return p
    return center + off * (radius / nrm)


def _pattern_refine(q, start, f_start, center, radius, extra_dirs=(), max_evals=700):
    """Deterministic cyclic direction search inside the ball.

    q maps a point to (value, point-actually-evaluated); the second slot lets
    a feasibility-restoring q move the candidate before evaluation.
    """
    dim = center.shape[0]
    dirs = [np.eye(dim)[i] for i in range(dim)]
    for d in extra_dirs:
        nrm = float(np.linalg.norm(d))
        if nrm > 1e-12:
            dirs.append(np.asarray(d, dtype=float) / nrm)
    best_p, best_f = start, f_start
    evals = 0
    for _ in range(8):
        round_start = best_f
        improved = False
        for dvec in dirs:
            step = radius / 2.0
            while step > radius * 1e-9 and evals < max_evals:
                moved = False
                for sgn in (1.0, -1.0):
                    cand = _ball_clip(best_p + sgn * step * dvec, center, radius)
                    val, pt = q(cand)
                    evals += 1
                    if val < best_f - 1e-15 * (1.0 + abs(best_f)):
                        best_p, best_f = pt, val
                        moved = True
                        improved = True
                        break
                if not moved:
                    step *= 0.5
            if evals >= max_evals:
                break
        stale = round_start - best_f <= 1e-10 * (1.0 + abs(round_start))
        if not improved or stale or evals >= max_evals:
            break
    return best_f, best_p


def _level_minimum(f: SampledFunction, base_point, t, lin_coeff, lin_shift, center, radius, sched, rng):
    """Minimize the quotient (f(base + t*p) - shift - t*<lin,p>) / (t^2/2) over
    the ball around center.  Returns (min value possibly inf, argmin point)."""
    half_t2 = 0.5 * t * t
    offsets = _ball_offsets(center.shape[0], radius, sched, rng)
    cands = center[None, :] + offsets
    vals = f.eval_batch(base_point[None, :] + t * cands)
    quot = (vals - lin_shift - t * (cands @ lin_coeff)) / half_t2
    finite_mask = np.isfinite(quot)

    restore_budget = [150]

    def q(p):
        fx = f.value(base_point + t * p)
        if fx.is_finite:
            return (fx.value - lin_shift - t * float(lin_coeff @ p)) / half_t2, p
        if f.restore_feasible is None or restore_budget[0] <= 0:
            return math.inf, p
        # rescue an infeasible probe by pulling it back onto the domain
        restore_budget[0] -= 1
        restored = np.asarray(f.restore_feasible(base_point + t * p), dtype=float)
        cand = _ball_clip((restored - base_point) / t, center, radius)
        fx = f.value(base_point + t * cand)
        if not fx.is_finite:
            return math.inf, p
        return (fx.value - lin_shift - t * float(lin_coeff @ cand)) / half_t2, cand

    if not finite_mask.any():
        if f.restore_feasible is None:
            return math.inf, center
        val0, p0 = q(center)
        if not math.isfinite(val0):
            return math.inf, center
        start, f_start = p0, val0
    else:
        idx = int(np.argmin(np.where(finite_mask, quot, math.inf)))
        start, f_start = cands[idx], float(quot[idx])
    extra = [lin_coeff] if float(np.linalg.norm(lin_coeff)) > 0 else []
    return _pattern_refine(q, start, f_start, center, radius, extra_dirs=extra)


# -- stabilized limits ----------------------------------------------------------


def _lagrange_at_zero(ts, ms) -> float:
    total = 0.0
    for i, (ti, mi) in enumerate(zip(ts, ms)):
        prod = mi
        for j, tj in enumerate(ts):
            if j != i:
                prod *= (0.0 - tj) / (ti - tj)
        total += prod
    return total


def _stabilize(levels, sched: GridSchedule) -> ExtReal:
    """Fold per-level minima into one estimate.

    The minimum of the three finest levels is the raw liminf proxy; a
    level-sequence extrapolation removes the O(radius) search-ball bias when
    the levels are consistent.  Divergence (quotients growing like 1/t) is
    reported as PlusInf.
    """
    tail = levels[-3:]
    finite = [(t, m) for t, m, _ in tail if math.isfinite(m)]
    if not finite:
        return PLUS_INF
    raw = min(m for _, m in finite)
    t_finest = levels[-1][0]
    if raw > 10.0 / t_finest:
        return PLUS_INF
    ms = [m for _, m, _ in tail]
    if all(math.isfinite(m) for m in ms):
        if ms[2] > 100.0 and ms[0] > 0 and ms[2] >= 1.8 * ms[1] >= 1.8 * 1.8 * ms[0]:
            return PLUS_INF
        ts = [t for t, _, _ in tail]
        guess = _lagrange_at_zero(ts, ms)
        spread = max(ms) - min(ms)
        if abs(guess - raw) <= 2.0 * spread + 1e-12 * (1.0 + abs(raw)):
            return ExtReal(guess)
    return ExtReal(raw)


# -- the oracle operations -------------------------------------------------------


def _second_order_levels(f, x, v, w, sched):
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    f0 = f.value(x)
    if not f0.is_finite:
        raise BasePointInfeasible("f(x) must be finite")
    rng = np.random.default_rng(sched.seed)
    records = []
    for t in sched.t_levels():
        m, p = _level_minimum(f, x, t, v, f0.value, w, sched.radius(t), sched, rng)
        records.append((t, m, p))
    return records


def estimate_second_subderivative(f: SampledFunction, x, v, w, sched: GridSchedule | None = None) -> ExtReal:
    sched = sched or GridSchedule()
    return _stabilize(_second_order_levels(f, x, v, w, sched), sched)


def estimate_parabolic_subderivative(
    f: SampledFunction,
    x,
    w,
    dfw: float,
    z,
    sched: GridSchedule | None = None,
    polish: bool = True,
) -> ExtReal:
    """min over t and z' near z of the parabolic quotient along x + t w + t^2 z'/2.

    polish=False skips the per-level pattern search; coarse but much cheaper,
    used when many trial z's only need to be ranked."""
    sched = sched or GridSchedule()
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    f0 = f.value(x)
    if not f0.is_finite:
        raise BasePointInfeasible("f(x) must be finite")
    rng = np.random.default_rng(sched.seed)
    records = []
    for t in sched.t_levels():
        half_t2 = 0.5 * t * t

        def q(zp):
            fx = f.value(x + t * w + half_t2 * zp)
            if not fx.is_finite:
                return math.inf, zp
            return (fx.value - f0.value - t * dfw) / half_t2, zp

        radius = sched.radius(t)
        offsets = _ball_offsets(z.shape[0], radius, sched, rng)
        cands = z[None, :] + offsets
        vals = f.eval_batch(x[None, :] + t * w[None, :] + half_t2 * cands)
        quot = (vals - f0.value - t * dfw) / half_t2
        finite_mask = np.isfinite(quot)
        if not finite_mask.any():
            if f.restore_feasible is not None:
                restored = np.asarray(f.restore_feasible(x + t * w + half_t2 * z), dtype=float)
                z0 = _ball_clip((restored - x - t * w) / half_t2, z, radius)
                m0, _ = q(z0)
                if math.isfinite(m0):
                    if polish:
                        m, p = _pattern_refine(q, z0, m0, z, radius)
                    else:
                        m, p = m0, z0
                    records.append((t, m, p))
                    continue
            records.append((t, math.inf, z))
            continue
        idx = int(np.argmin(np.where(finite_mask, quot, math.inf)))
        if polish:
            m, p = _pattern_refine(q, cands[idx], float(quot[idx]), z, radius)
        else:
            m, p = float(quot[idx]), cands[idx]
        records.append((t, m, p))
    return _stabilize(records, sched)


def estimate_subderivative(f: SampledFunction, x, w, sched: GridSchedule | None = None) -> ExtReal:
    """First-order quotient limit along a fixed direction, with a ball-search
    fallback when the fixed ray leaves the domain, extrapolated across the
    three finest levels."""
    sched = sched or GridSchedule()
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    f0 = f.value(x)
    if not f0.is_finite:
        raise BasePointInfeasible("f(x) must be finite")
    rng = np.random.default_rng(sched.seed)
    fixed = []
    for t in sched.t_levels():
        fx = f.value(x + t * w)
        fixed.append((t, (fx.value - f0.value) / t if fx.is_finite else math.inf))
    tail = [(t, m) for t, m in fixed[-3:] if math.isfinite(m)]
    if len(tail) < 3:
        searched = []
        for t in sched.t_levels():
            radius = sched.radius(t)
            offsets = _ball_offsets(w.shape[0], radius, sched, rng)
            cands = w[None, :] + offsets
            vals = f.eval_batch(x[None, :] + t * cands)
            quot = (vals - f0.value) / t
            finite_mask = np.isfinite(quot)
            searched.append(
                (t, float(np.min(quot[finite_mask])) if finite_mask.any() else math.inf)
            )
        tail = [(t, m) for t, m in searched[-3:] if math.isfinite(m)]
        if not tail:
            return PLUS_INF
    ts, ms = [t for t, _ in tail], [m for _, m in tail]
    if len(tail) == 3:
        guess = _lagrange_at_zero(ts, ms)
        spread = max(ms) - min(ms)
        if abs(guess - min(ms)) <= 4.0 * spread + 1e-12 * (1.0 + abs(min(ms))):
            return ExtReal(guess)
    return ExtReal(min(ms))


def check_twice_epi_diff(
    f: SampledFunction,
    x,
    v,
    dirs,
    sched: GridSchedule | None = None,
    formula: Callable[[np.ndarray], ExtReal] | None = None,
) -> list[EpiReport]:
    """Per direction, search for a recovery sequence achieving the limit value.

    formula, when given, supplies the closed-form value the sequence must
    attain; otherwise the oracle's own stabilized estimate is used and
    convergence just means the fine levels agree with each other.
    """
    sched = sched or GridSchedule()
    reports = []
    for w in dirs:
        w = np.asarray(w, dtype=float)
        levels = _second_order_levels(f, x, v, w, sched)
        oracle_value = _stabilize(levels, sched)
        formula_value = formula(w) if formula is not None else oracle_value
        tol = 0.05
        if formula_value.is_finite:
            tol = max(0.05, 0.05 * abs(formula_value.value))
        tail = [m for _, m, _ in levels[-3:] if math.isfinite(m)]
        if formula_value.is_plus_inf:
            converged = oracle_value.is_plus_inf
            gap = 0.0 if converged else math.inf
        elif not tail:
            converged = False
            gap = math.inf
        else:
            best = min(tail)
            candidates = [best]
            if oracle_value.is_finite:
                candidates.append(oracle_value.value)
            gap = min(abs(c - formula_value.value) for c in candidates)
            converged = gap <= tol
        reports.append(
            EpiReport(
                direction=w,
                formula_value=formula_value,
                oracle_value=oracle_value,
                achieving_sequence=[(t, p, m) for t, m, p in levels],
                converged=converged,
                gap=gap,
            )
        )
    return reports


def _z_grid(dim: int, sched: GridSchedule, rng) -> np.ndarray:
    spa = sched.samples_per_axis
    if spa ** dim <= Z_GRID_CAP:
        axis = np.linspace(-Z_GRID_HALF_WIDTH, Z_GRID_HALF_WIDTH, spa)
        return np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
    return rng.uniform(-Z_GRID_HALF_WIDTH, Z_GRID_HALF_WIDTH, size=(10_000, dim))


def check_parabolic_regularity(
    f: SampledFunction, x, v, w, sched: GridSchedule | None = None, lhs: ExtReal | None = None
) -> tuple[bool, ExtReal, ExtReal]:
    """Compare the second subderivative estimate against the parabolic dual
    value min_z {parabolic(w | z) - <z, v>} over a coarse z-grid with local
    refinement; agreement certifies parabolic regularity along w.

    A precomputed second-subderivative estimate may be passed as lhs to avoid
    repeating the level scan."""
    sched = sched or GridSchedule()
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    dfw_est = estimate_subderivative(f, x, w, sched)
    if dfw_est.is_plus_inf or abs(dfw_est.value - float(v @ w)) > 1e-6:
        raise CriticalConePreconditionFailed(
            "direction fails the numeric critical-cone test"
        )
    dfw = float(v @ w)
    if lhs is None:
        lhs = estimate_second_subderivative(f, x, v, w, sched)

    cheap = GridSchedule(
        t0=sched.t0 * sched.ratio ** max(0, sched.steps - 4),
        ratio=sched.ratio,
        steps=4,
        radius_coeff=sched.radius_coeff,
        samples_per_axis=min(sched.samples_per_axis, 7),
        radius_exponent=sched.radius_exponent,
        seed=sched.seed,
    )

    def score(z):
        val = estimate_parabolic_subderivative(f, x, w, dfw, z, cheap, polish=False)
        return val.as_float() - float(z @ v)

    rng = np.random.default_rng(sched.seed)
    grid = _z_grid(w.shape[0], sched, rng)
    scores = np.array([score(z) for z in grid])
    finite_mask = np.isfinite(scores)
    if not finite_mask.any():
        rhs = PLUS_INF
    else:
        idx = int(np.argmin(np.where(finite_mask, scores, math.inf)))
        z_best, s_best = grid[idx], float(scores[idx])

        def q(z):
            return score(z), z

        _, z_best = _pattern_refine(
            q, z_best, s_best, z_best, Z_GRID_HALF_WIDTH / 2, max_evals=1500
        )
        final = estimate_parabolic_subderivative(f, x, w, dfw, z_best, sched)
        rhs = final - float(z_best @ v) if final.is_finite else PLUS_INF
    if lhs.is_plus_inf or rhs.is_plus_inf:
        holds = lhs.is_plus_inf and rhs.is_plus_inf
    else:
        holds = abs(lhs.value - rhs.value) <= max(0.05, 0.05 * abs(lhs.value))
    return holds, lhs, rhs


def proximal_modulus_scan(
    f: SampledFunction, x, v, radius: float = 0.5, n_samples: int = 200, seed: int = 5
) -> float:
    """Empirical proximal modulus: the smallest r >= 0 with
    f(x') >= f(x) + <v, x' - x> - r/2 |x' - x|^2 over sampled x'."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    f0 = f.value(x)
    if not f0.is_finite:
        raise BasePointInfeasible("f(x) must be finite")
    rng = np.random.default_rng(seed)
    r_hat = 0.0
    for _ in range(n_samples):
        step = rng.standard_normal(x.shape[0])
        step *= rng.random() * radius / max(np.linalg.norm(step), 1e-300)
        fx = f.value(x + step)
        if not fx.is_finite:
            continue
        gap = f0.value + float(v @ step) - fx.value
        nrm2 = float(step @ step)
        if nrm2 > 1e-16:
            r_hat = max(r_hat, 2.0 * gap / nrm2)
    return max(0.0, r_hat)
