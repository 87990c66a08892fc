"""The composite calculus: multiplier sets, constraint-qualification checks,
chain rules for first- and second-order objects, and the primal/dual pair
whose common value is the second subderivative of g(F(.)).

The dual side maximizes <y, d2F(w,w)> + d2g(F(x), y)(dF(x) w) over the
multiplier set truncated to the tau-ball box; the primal side minimizes the
parabolic chain value minus <z, v>.  For polyhedral data both sides reduce to
exact LPs; spectral instances fall back to numeric grids and are flagged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CompositeProblem, GridSchedule, jacobian, poly_eval, poly_eval_batch, second_form
from .errors import (
    BasePointInfeasible,
    CriticalConePreconditionFailed,
    EmptyMultiplierSet,
    EmptyPolyhedron,
    UnsupportedSpectralMultiplicity,
    UnsupportedTag,
)
from .extreal import PLUS_INF, ExtReal
from .numkit import (
    PolyCone,
    Polyhedron,
    box,
    cone_generators,
    intersect,
    lp_max,
    min_norm_point,
    operator_norm,
    smat,
    svec,
    tangent_cone,
    vertices,
)
from .numkit.polyhedra import is_empty
from .oracle import SampledFunction, _pattern_refine, estimate_parabolic_subderivative
from .outer import (
    NegSemidefIndicator,
    OuterFunction,
    PlqFunction,
    PointRep,
    PolyhedralConeRepr,
    PolyhedralIndicator,
    PolyhedronRep,
    PredicateConeRepr,
    SmoothQuadratic,
    SpectralRep,
    second_order_tangent_cone,
)

AFFINE_TOL = 1e-8


@dataclass
class MultiplierSet:
    """Lagrange multipliers {y : adj(dF(x)) y = v, y in subdiff g(F(x))},
    truncated to the tau-ball box before vertex enumeration."""

    multipliers: list = field(default_factory=list)
    polyhedron: Polyhedron | None = None
    tau: float = 0.0
    truncated: bool = False
    tau_enlargements: int = 0

    @property
    def is_empty(self) -> bool:
        return not self.multipliers

    def first(self) -> np.ndarray:
        if self.is_empty:
            raise EmptyMultiplierSet("no Lagrange multipliers")
        return self.multipliers[0]


@dataclass
class MSCQResult:
    holds_evidence: bool
    kappa_hat: float
    worst_point: np.ndarray | None
    samples: int
    ratios_by_radius: list = field(default_factory=list)


@dataclass
class LipschitzInfo:
    ell: float


@dataclass
class DualityInfo:
    primal_value: ExtReal
    dual_value: ExtReal
    argmax_y: np.ndarray | None
    tau: float
    gap: float
    primal_exact: bool = True
    mscq_provenance: str = "user-asserted"


# -- basic data ------------------------------------------------------------------


def lipschitz_constant(g: OuterFunction, z) -> LipschitzInfo:
    return LipschitzInfo(ell=float(g.lipschitz_bound(np.asarray(z, dtype=float))))


def tau_bound(prob: CompositeProblem, x, v, kappa: float, ell: float) -> float:
    """kappa * ell * |dF(x)| + kappa * |v| + ell, operator norm via sym_eig."""
    if kappa < 0 or ell < 0:
        raise ValueError("kappa and ell must be nonnegative")
    J = jacobian(prob.F, np.asarray(x, dtype=float))
    return kappa * ell * operator_norm(J) + kappa * float(np.linalg.norm(v)) + ell


def multipliers(
    prob: CompositeProblem, x, v, kappa: float = 1.0, ell: float | None = None
) -> MultiplierSet:
    """The multiplier set, materialized as tau-box-truncated vertices for
    polyhedral subdifferentials and as the unique candidate for spectral or
    singleton subdifferentials."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    z = poly_eval(prob.F, x)
    if not prob.g.value(z).is_finite:
        raise BasePointInfeasible("F(x) lies outside dom g")
    J = jacobian(prob.F, x)
    if ell is None:
        ell = prob.g.lipschitz_bound(z)
    tau = tau_bound(prob, x, v, kappa, ell)
    rep = prob.g.subdifferential(z)

    def _affine_ok(y) -> bool:
        return float(np.linalg.norm(J.T @ y - v)) <= AFFINE_TOL * (1.0 + np.linalg.norm(v))

    if isinstance(rep, PolyhedronRep):
        core = intersect(
            rep.polyhedron, Polyhedron.make(prob.m, E=J.T, d=v)
        )
        tau_eff, enlargements = max(tau, 1e-6), 0
        verts: list[np.ndarray] = []
        for _ in range(6):
            try:
                verts = vertices(intersect(core, box(prob.m, tau_eff)))
            except EmptyPolyhedron:
                verts = []
            if verts:
                break
            if is_empty(core):
                return MultiplierSet([], None, tau, True, 0)
            tau_eff *= 2.0
            enlargements += 1
        verts = [y for y in verts if _affine_ok(y) and rep.contains(y, 1e-7)]
        return MultiplierSet(
            verts,
            intersect(core, box(prob.m, tau_eff)),
            tau,
            truncated=True,
            tau_enlargements=enlargements,
        )

    if isinstance(rep, PointRep):
        y0 = rep.point
        return MultiplierSet([y0] if _affine_ok(y0) else [], None, tau, False, 0)

    if isinstance(rep, SpectralRep):
        unique = rep.unique_element()
        if unique is not None:
            return MultiplierSet([unique] if _affine_ok(unique) else [], None, tau, False, 0)
        # clustered spectrum: only an injective adjoint pins y
        JT = J.T
        s = np.linalg.svd(JT, compute_uv=False)
        rank = int(np.sum(s > 1e-9 * max(1.0, s[0] if s.size else 1.0)))
        if rank < prob.m:
            raise UnsupportedSpectralMultiplicity(
                "clustered leading eigenvalue with a non-unique multiplier candidate"
            )
        y, *_ = np.linalg.lstsq(JT, v, rcond=None)
        ok = _affine_ok(y) and rep.contains(y, 1e-7)
        return MultiplierSet([y] if ok else [], None, tau, False, 0)

    raise UnsupportedTag(f"unknown subdifferential representation {type(rep).__name__}")


# -- constraint qualifications ------------------------------------------------------


def _restore_feasible_point(prob: CompositeProblem, x0: np.ndarray, max_iter: int = 60):
    """Gauss-Newton restoration of F(x) into dom g; returns a feasible point
    close to x0, or None if the iteration stalls infeasibly."""
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        u = poly_eval(prob.F, x)
        p = np.asarray(prob.g.domain_project(u), dtype=float)
        r = u - p
        if float(np.linalg.norm(r)) <= 1e-12 * (1.0 + float(np.linalg.norm(u))):
            return x
        J = jacobian(prob.F, x)
        JJt = J @ J.T
        try:
            lam = np.linalg.solve(JJt, p - u)
        except np.linalg.LinAlgError:
            lam = np.linalg.lstsq(JJt, p - u, rcond=None)[0]
        step = J.T @ lam
        if float(np.linalg.norm(step)) < 1e-15 or not np.all(np.isfinite(step)):
            break
        x = x + step
    u = poly_eval(prob.F, x)
    if prob.g.domain_distance(u) <= 1e-9 * (1.0 + float(np.linalg.norm(u))):
        return x
    return None


def check_mscq(
    prob: CompositeProblem, x, n_samples: int = 240, radius: float = 0.25, seed: int = 0
) -> MSCQResult:
    """Empirical metric-subregularity modulus: the ratio of the distance to the
    feasible set over the image distance to dom g, scanned over shrinking
    sample balls.  A growth trend across the refinements is failure evidence."""
    x = np.asarray(x, dtype=float)
    if not prob.check_feasible(x):
        raise BasePointInfeasible("F(x) lies outside dom g")
    rng = np.random.default_rng(seed)
    per_level = max(1, n_samples // 3)
    kappa_hat, worst, total = 0.0, None, 0
    observations: list[tuple[float, float]] = []
    for rad in (radius, radius / 2.0, radius / 4.0):
        for _ in range(per_level):
            step = rng.standard_normal(prob.n)
            step *= rad * rng.random() / max(float(np.linalg.norm(step)), 1e-300)
            xp = x + step
            total += 1
            dist_g = prob.g.domain_distance(poly_eval(prob.F, xp))
            if dist_g <= 1e-12:
                continue
            restored = _restore_feasible_point(prob, xp)
            dist_f = math.inf if restored is None else float(np.linalg.norm(restored - xp))
            ratio = dist_f / dist_g
            observations.append((float(np.linalg.norm(step)), ratio))
            if ratio > kappa_hat:
                kappa_hat, worst = ratio, xp
    # bucket by distance to the base point: a modulus that keeps growing on
    # inner shells is divergence evidence (the ratio must stay bounded near x)
    shell_max = []
    for k in range(5):
        hi, lo = radius * 0.5 ** k, radius * 0.5 ** (k + 1)
        vals = [r for d, r in observations if lo < d <= hi]
        shell_max.append(max(vals) if vals else None)
    trend = [m for m in shell_max if m is not None]
    growing = any(not math.isfinite(m) for m in trend) or (
        len(trend) >= 3 and all(trend[i + 1] >= 1.4 * trend[i] for i in range(len(trend) - 1))
    )
    return MSCQResult(
        holds_evidence=not growing,
        kappa_hat=kappa_hat,
        worst_point=worst,
        samples=total,
        ratios_by_radius=[m if m is not None else 0.0 for m in shell_max],
    )


def _domain_normal_cone_rows(g: OuterFunction, z: np.ndarray):
    """H-representation rows (G, E) of the normal cone to dom g at z, for the
    polyhedral catalog tags."""
    if isinstance(g, PolyhedralIndicator):
        T = tangent_cone(g.C, z, 1e-9)
        rays, lines = cone_generators(T)
        return rays, lines
    if isinstance(g, PlqFunction):
        rows_r, rows_l = [], []
        for i in g._active(z):
            T = tangent_cone(g.pieces[i].domain, z, 1e-9)
            t_rays, t_lines = cone_generators(T)
            rows_r.extend(t_rays)
            rows_l.extend(t_lines)
        return rows_r, rows_l
    raise UnsupportedTag(type(g).__name__)


def check_basic_cq(prob: CompositeProblem, x) -> bool:
    """Whether N_dom g(F(x)) meets ker adj(dF(x)) only at the origin."""
    x = np.asarray(x, dtype=float)
    z = poly_eval(prob.F, x)
    if not prob.g.value(z).is_finite:
        raise BasePointInfeasible("F(x) lies outside dom g")
    g = prob.g
    J = jacobian(prob.F, x)
    if isinstance(g, (SmoothQuadratic,)) or (
        hasattr(g, "tag") and g.tag in ("max_eig", "sum_top_eig", "alpha_eig")
    ):
        return True  # full domain, normal cone is {0}
    if isinstance(g, (PolyhedralIndicator, PlqFunction)):
        t_rays, t_lines = _domain_normal_cone_rows(g, z)
        ncone = PolyCone.make_cone(
            prob.m,
            np.vstack(t_rays) if t_rays else None,
            np.vstack(t_lines) if t_lines else None,
        )
        probe = PolyCone.make_cone(
            prob.m, ncone.G if ncone.n_ineq else None, np.vstack([ncone.E, J.T])
        )
        rays, lines = cone_generators(probe)
        return not rays and not lines
    if isinstance(g, NegSemidefIndicator):
        A = smat(z) if np.asarray(z).ndim == 1 else z
        E0 = g._zero_cluster_basis(A)
        k = E0.shape[1]
        if k == 0:
            return True
        if k == 1:
            gen = svec(np.outer(E0[:, 0], E0[:, 0]))
            return float(np.linalg.norm(J.T @ gen)) > 1e-8
        if k == 2:
            return not _psd_slice_meets_kernel(J, E0)
        raise UnsupportedSpectralMultiplicity("normal cone cluster of dimension > 2")
    raise UnsupportedTag(type(g).__name__)


def _psd_slice_meets_kernel(J: np.ndarray, E0: np.ndarray) -> bool:
    """Whether some nonzero Theta >= 0 on a 2-dimensional cluster satisfies
    adj(J) svec(E0 Theta E0^T) = 0; deterministic grid plus refinement over the
    trace-one slice."""

    def defect(params):
        phi, c = params
        u = np.array([math.cos(phi), math.sin(phi)])
        theta = c * np.outer(u, u) + (1.0 - c) * (np.eye(2) - np.outer(u, u))
        V = E0 @ theta @ E0.T
        return float(np.linalg.norm(J.T @ svec(V)))

    best, best_p = math.inf, None
    for phi in np.linspace(0.0, math.pi, 60):
        for c in np.linspace(0.5, 1.0, 20):
            d = defect((phi, c))
            if d < best:
                best, best_p = d, (phi, c)
    # local refinement
    step = 0.05
    p = list(best_p)
    for _ in range(60):
        improved = False
        for i in range(2):
            for sgn in (1.0, -1.0):
                q = list(p)
                q[i] += sgn * step
                q[1] = min(max(q[1], 0.5), 1.0)
                d = defect(q)
                if d < best - 1e-15:
                    best, p = d, q
                    improved = True
        if not improved:
            step *= 0.5
            if step < 1e-9:
                break
    return best <= 1e-8


# -- chain rules ----------------------------------------------------------------------


def subderivative_chain(prob: CompositeProblem, x, w) -> ExtReal:
    """d g(F(x)) at dF(x) w."""
    x = np.asarray(x, dtype=float)
    z = poly_eval(prob.F, x)
    if not prob.g.value(z).is_finite:
        raise BasePointInfeasible("F(x) lies outside dom g")
    return prob.g.subderivative(z, jacobian(prob.F, x) @ np.asarray(w, dtype=float))


def critical_cone(prob: CompositeProblem, x, v, multys: MultiplierSet | None = None):
    """Pullback of the outer critical cone under dF(x); the outer cone is the
    same for every multiplier, so the first stored one is used."""
    x = np.asarray(x, dtype=float)
    if multys is None:
        multys = multipliers(prob, x, v)
    if multys.is_empty:
        raise EmptyMultiplierSet("v is not a subgradient of g(F(.)) at x")
    z = poly_eval(prob.F, x)
    J = jacobian(prob.F, x)
    outer_cone = prob.g.critical_cone(z, multys.first())
    if isinstance(outer_cone, PolyhedralConeRepr):
        K = outer_cone.cone
        return PolyhedralConeRepr(
            PolyCone.make_cone(
                prob.n,
                K.G @ J if K.n_ineq else None,
                K.E @ J if K.n_eq else None,
            ),
            description="pullback of the outer critical cone",
        )
    return PredicateConeRepr(
        lambda w: outer_cone.contains(J @ np.asarray(w, dtype=float)),
        description="pullback membership of the outer critical cone",
    )


def parabolic_chain(prob: CompositeProblem, x, w, z) -> ExtReal:
    """d2 g(F(x)) (dF(x) w | dF(x) z + d2F(x)(w, w))."""
    x = np.asarray(x, dtype=float)
    w = np.asarray(w, dtype=float)
    z = np.asarray(z, dtype=float)
    zbar = poly_eval(prob.F, x)
    J = jacobian(prob.F, x)
    inner = J @ z + second_form(prob.F, x, w)
    return prob.g.parabolic_subderivative(zbar, J @ w, inner)


# -- the dual side -----------------------------------------------------------------------


def _dual_over_finite(g, zbar, u, H, ys):
    best_val, best_y = None, None
    for y in ys:
        term = g.second_subderivative(zbar, y, u)
        if term.is_plus_inf:
            return PLUS_INF, None
        val = float(np.asarray(y) @ H) + term.value
        if best_val is None or val > best_val + 1e-12:
            best_val, best_y = val, y
    return ExtReal(best_val), best_y


def _dual_polyhedral(g, zbar, u, H, multys: MultiplierSet):
    """Exact dual over a polyhedral multiplier set.

    Indicators contribute a zero second-order term on critical data, so one LP
    suffices.  PLQ pieces contribute piecewise-constant terms on affine slices
    of the multiplier polyhedron: one LP per admissible piece, ties broken by
    piece index then lexicographic argmax."""
    P = multys.polyhedron
    if isinstance(g, PolyhedralIndicator):
        val, arg = lp_max(H, P)
        return ExtReal(val), arg
    assert isinstance(g, PlqFunction)
    best = None
    utol = AFFINE_TOL * (1.0 + float(np.linalg.norm(u)))
    for i in g._admissible(zbar, u):
        piece = g.pieces[i]
        grad = piece.grad(zbar)
        # admissibility of piece i for multiplier y: <y - grad_i, u> = 0
        slice_poly = intersect(
            P,
            Polyhedron.make(P.dim, E=u.reshape(1, -1), d=np.array([float(grad @ u)])),
        )
        try:
            val, arg = lp_max(H, slice_poly)
        except EmptyPolyhedron:
            continue
        total = val + float(u @ piece.A @ u)
        if best is None or total > best[0] + utol:
            best = (total, arg)
    if best is None:
        return PLUS_INF, None
    return ExtReal(best[0]), best[1]


def _ball_adjust_argmax(g, zbar, u, H, multys, dual_val, argmax):
    """The dual maximum is attained inside the Euclidean tau-ball; if the
    lexicographic LP vertex lies outside, swap in the minimum-norm point of the
    optimal face (same value)."""
    if argmax is None or multys.polyhedron is None:
        return argmax
    if float(np.linalg.norm(argmax)) <= multys.tau + 1e-8:
        return argmax
    face = intersect(
        multys.polyhedron,
        Polyhedron.make(multys.polyhedron.dim, E=H.reshape(1, -1), d=np.array([float(H @ argmax)])),
    )
    near = min_norm_point(face)
    if near is not None and float(np.linalg.norm(near)) <= multys.tau + 1e-8:
        return near
    return argmax


def chain_dual_value(
    prob: CompositeProblem, x, v, w, multys: MultiplierSet
) -> tuple[ExtReal, np.ndarray | None]:
    """The dual-side maximum alone: max over the multiplier set of
    <y, d2F(x)(w,w)> + d2g(F(x), y)(dF(x) w), PlusInf off the critical cone."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if multys.is_empty:
        raise EmptyMultiplierSet("v is not a subgradient of g(F(.)) at x")
    cone = critical_cone(prob, x, v, multys)
    if not cone.contains(w):
        return PLUS_INF, None
    zbar = poly_eval(prob.F, x)
    J = jacobian(prob.F, x)
    u = J @ w
    H = second_form(prob.F, x, w)
    if multys.polyhedron is not None and isinstance(prob.g, (PolyhedralIndicator, PlqFunction)):
        dual_val, argmax = _dual_polyhedral(prob.g, zbar, u, H, multys)
        argmax = _ball_adjust_argmax(prob.g, zbar, u, H, multys, dual_val, argmax)
    else:
        dual_val, argmax = _dual_over_finite(prob.g, zbar, u, H, multys.multipliers)
    return dual_val, argmax


def second_subderivative_chain(
    prob: CompositeProblem,
    x,
    v,
    w,
    kappa: float = 1.0,
    ell: float | None = None,
    sched: GridSchedule | None = None,
    multys: MultiplierSet | None = None,
    mscq_provenance: str = "user-asserted",
) -> DualityInfo:
    """The second subderivative of g(F(.)) at x for v along w, as the maximum
    over multipliers, together with the primal minimization value."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if multys is None:
        multys = multipliers(prob, x, v, kappa=kappa, ell=ell)
    if multys.is_empty:
        raise EmptyMultiplierSet("v is not a subgradient of g(F(.)) at x")
    if not critical_cone(prob, x, v, multys).contains(w):
        return DualityInfo(PLUS_INF, PLUS_INF, None, multys.tau, 0.0, True, mscq_provenance)
    dual_val, argmax = chain_dual_value(prob, x, v, w, multys)
    primal_val, primal_exact = _primal_value(prob, x, v, w, sched, cone_checked=True)
    if primal_val.is_finite and dual_val.is_finite:
        gap = abs(primal_val.value - dual_val.value)
    elif primal_val.is_plus_inf and dual_val.is_plus_inf:
        gap = 0.0
    else:
        gap = math.inf
    return DualityInfo(
        primal_val, dual_val, argmax, multys.tau, gap, primal_exact, mscq_provenance
    )


# -- the primal side ------------------------------------------------------------------------


def _lp_min_adaptive(c: np.ndarray, P: Polyhedron, start_width: float):
    """min <c, z> over P via the vertex LP, growing the bounding box until the
    value stabilizes; raises EmptyPolyhedron if P is infeasible."""
    width = start_width
    prev = None
    for _ in range(4):
        val, arg = lp_max(-c, intersect(P, box(P.dim, width)))
        val = -val
        if prev is not None and abs(val - prev[0]) <= 1e-9 * (1.0 + abs(val)):
            return val, arg
        prev = (val, arg)
        width *= 4.0
    return prev


def _primal_value(
    prob: CompositeProblem,
    x,
    v,
    w,
    sched: GridSchedule | None,
    cone_checked: bool = False,
) -> tuple[ExtReal, bool]:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    zbar = poly_eval(prob.F, x)
    J = jacobian(prob.F, x)
    u = J @ w
    H = second_form(prob.F, x, w)
    g = prob.g
    width0 = 16.0 * (1.0 + float(np.linalg.norm(H)) + float(np.linalg.norm(v)))

    if isinstance(g, PolyhedralIndicator):
        T2 = second_order_tangent_cone(g.C, zbar, u)
        rows_G = T2.G @ J if T2.n_ineq else None
        rows_E = T2.E @ J if T2.n_eq else None
        P = Polyhedron.make(
            prob.n,
            rows_G,
            -(T2.G @ H) if T2.n_ineq else None,
            rows_E,
            -(T2.E @ H) if T2.n_eq else None,
        )
        try:
            val, _ = _lp_min_adaptive(-v, P, width0)
        except EmptyPolyhedron:
            return PLUS_INF, True
        return ExtReal(val), True

    if isinstance(g, PlqFunction):
        best = None
        for i in g._admissible(zbar, u):
            piece = g.pieces[i]
            grad = piece.grad(zbar)
            T2 = second_order_tangent_cone(piece.domain, zbar, u)
            P = Polyhedron.make(
                prob.n,
                T2.G @ J if T2.n_ineq else None,
                -(T2.G @ H) if T2.n_ineq else None,
                T2.E @ J if T2.n_eq else None,
                -(T2.E @ H) if T2.n_eq else None,
            )
            c = -v + J.T @ grad
            const = float(u @ piece.A @ u) + float(grad @ H)
            try:
                val, _ = _lp_min_adaptive(c, P, width0)
            except EmptyPolyhedron:
                continue
            total = val + const
            if best is None or total < best:
                best = total
        return (ExtReal(best), True) if best is not None else (PLUS_INF, True)

    if isinstance(g, SmoothQuadratic):
        grad = g.grad(zbar)
        resid = float(np.linalg.norm(J.T @ grad - v))
        if resid > AFFINE_TOL * (1.0 + float(np.linalg.norm(v))):
            raise CriticalConePreconditionFailed(
                "smooth outer gradient does not match the pairing vector"
            )
        return ExtReal(float(u @ g.hess(zbar) @ u) + float(grad @ H)), True

    # spectral tags: numeric z-grid with refinement (flagged)
    sched = sched or GridSchedule()
    f = SampledFunction(
        evaluator=lambda p: g.value(p),
        dim=g.ambient_dim,
        description="outer evaluator",
        batch_evaluator=g.value_batch,
    )
    dgw = g.subderivative(zbar, u)
    if not dgw.is_finite:
        return PLUS_INF, False
    cheap = GridSchedule(
        t0=sched.t0 * sched.ratio ** max(0, sched.steps - 4),
        ratio=sched.ratio,
        steps=4,
        radius_coeff=sched.radius_coeff,
        samples_per_axis=min(sched.samples_per_axis, 7),
        radius_exponent=sched.radius_exponent,
        seed=sched.seed,
    )

    def score(zv, schedule, polish):
        inner = J @ zv + H
        val = estimate_parabolic_subderivative(f, zbar, u, dgw.value, inner, schedule, polish=polish)
        return val.as_float() - float(zv @ v)

    rng = np.random.default_rng(sched.seed)
    spa = min(sched.samples_per_axis, 7)
    if spa ** prob.n <= 100_000:
        axis = np.linspace(-10.0, 10.0, spa)
        grid = np.stack(np.meshgrid(*([axis] * prob.n), indexing="ij"), axis=-1).reshape(-1, prob.n)
    else:
        grid = rng.uniform(-10.0, 10.0, size=(2000, prob.n))
    scores = np.array([score(zv, cheap, False) for zv in grid])
    finite = np.isfinite(scores)
    if not finite.any():
        return PLUS_INF, False
    idx = int(np.argmin(np.where(finite, scores, math.inf)))
    z_best, s_best = grid[idx], float(scores[idx])

    def q(zv):
        return score(zv, cheap, False), zv

    _, z_best = _pattern_refine(q, z_best, s_best, z_best, 5.0, max_evals=800)
    return ExtReal(score(z_best, sched, True)), False


def primal_value(
    prob: CompositeProblem, x, v, w, sched: GridSchedule | None = None
) -> ExtReal:
    """min over z of parabolic_chain(x, w, z) - <z, v>; an exact LP for
    polyhedral outer structure, a refined grid otherwise."""
    cone = critical_cone(prob, x, v)
    if not cone.contains(np.asarray(w, dtype=float)):
        raise CriticalConePreconditionFailed("w is outside the critical cone")
    val, _ = _primal_value(prob, x, v, w, sched, cone_checked=True)
    return val


# -- sampled assembly --------------------------------------------------------------------------


def sampled_objective(prob: CompositeProblem, include_phi: bool = False) -> SampledFunction:
    """g(F(.)) (optionally plus phi) as an oracle-ready sampled function with a
    batched evaluator and a Gauss-Newton feasibility restorer."""

    def ev(xp: np.ndarray) -> ExtReal:
        val = prob.g.value(poly_eval(prob.F, xp))
        if include_phi and val.is_finite:
            val = val + float(poly_eval(prob.phi, xp)[0])
        return val

    def ev_batch(X: np.ndarray) -> np.ndarray:
        vals = prob.g.value_batch(poly_eval_batch(prob.F, X))
        if include_phi:
            vals = vals + poly_eval_batch(prob.phi, X)[:, 0]
        return vals

    def restore(xp: np.ndarray):
        out = _restore_feasible_point(prob, np.asarray(xp, dtype=float), max_iter=20)
        return xp if out is None else out

    name = "phi + g(F(.))" if include_phi else "g(F(.))"
    return SampledFunction(
        evaluator=ev,
        dim=prob.n,
        description=name,
        batch_evaluator=ev_batch,
        restore_feasible=restore,
    )
