"""Indicator members of the catalog: polyhedral sets and the negative
semidefinite cone."""

from __future__ import annotations

import numpy as np

from ..errors import PointNotInDomain, SubderivativeNotFinite, TangentPreconditionFailed
from ..extreal import PLUS_INF, ExtReal
from ..numkit import (
    PolyCone,
    Polyhedron,
    cone_generators,
    project,
    smat,
    smat_batch,
    svec,
    svec_dim,
    sym_eig,
    tangent_cone,
)
from ..numkit.polyhedra import _row_scales, residuals
from .base import OuterFunction
from .reprs import PolyhedralConeRepr, PolyhedronRep, PredicateConeRepr, SpectralRep

# Indicator feasibility must be decided much tighter than geometric activity:
# a boundary fuzz of size eps shifts second-order quotients by ~eps / t^2.
INDICATOR_FEAS_TOL = 1e-11
ACT_TOL = 1e-9


def second_order_tangent_cone(C: Polyhedron, z, w, act_tol: float = ACT_TOL) -> PolyCone:
    """H-representation of the second-order tangent set to a polyhedron.

    Active rows with G_i w = 0 constrain u by G_i u <= 0; active rows with
    strict first-order descent G_i w < 0 leave u free; equality rows carry over.
    """
    z = np.asarray(z, dtype=float)
    w = np.asarray(w, dtype=float)
    T = tangent_cone(C, z, act_tol)
    if residuals(T, w) > act_tol * (1.0 + float(np.linalg.norm(w))):
        raise TangentPreconditionFailed("direction is not tangent to the domain")
    rows = []
    if T.n_ineq:
        scales = _row_scales(T.G)
        lin = (T.G @ w) / scales
        wtol = act_tol * (1.0 + float(np.linalg.norm(w)))
        for i in range(T.n_ineq):
            if abs(lin[i]) <= wtol:
                rows.append(T.G[i])
    return PolyCone.make_cone(C.dim, np.vstack(rows) if rows else None, C.E)


def normal_cone_rep(C: Polyhedron, z, act_tol: float = ACT_TOL) -> PolyhedronRep:
    """Normal cone to a polyhedron at z with both H- and V-representations.

    The polar of the tangent cone: its generators are recovered by one ray
    enumeration, and its H-representation is cut out by the tangent generators.
    """
    T = tangent_cone(C, z, act_tol)
    t_rays, t_lines = cone_generators(T)
    G = np.vstack(t_rays) if t_rays else None
    E = np.vstack(t_lines) if t_lines else None
    hrep = PolyCone.make_cone(C.dim, G, E)
    n_rays, n_lines = cone_generators(hrep)
    return PolyhedronRep(
        polyhedron=hrep,
        points=[np.zeros(C.dim)],
        rays=n_rays,
        lines=n_lines,
    )


class PolyhedralIndicator(OuterFunction):
    """Indicator of a polyhedron in H-representation."""

    tag = "ind_polyhedron"

    def __init__(self, C: Polyhedron):
        self.C = C
        self.ambient_dim = C.dim
        self._axis_bounds = self._detect_axis_bounds(C)

    @staticmethod
    def _detect_axis_bounds(C: Polyhedron):
        """Componentwise (lo, hi) bounds when every constraint row touches a
        single coordinate; projection is then a clip instead of a face search."""
        lo = np.full(C.dim, -np.inf)
        hi = np.full(C.dim, np.inf)
        for rows, rhs, is_eq in ((C.G, C.h, False), (C.E, C.d, True)):
            for row, b in zip(rows, rhs):
                nz = np.nonzero(row)[0]
                if nz.size != 1:
                    return None
                j, coef = int(nz[0]), row[nz[0]]
                bound = b / coef
                if is_eq:
                    lo[j] = max(lo[j], bound)
                    hi[j] = min(hi[j], bound)
                elif coef > 0:
                    hi[j] = min(hi[j], bound)
                else:
                    lo[j] = max(lo[j], bound)
        if np.any(lo > hi):
            return None
        return lo, hi

    def value(self, z) -> ExtReal:
        z = self._require_dim(z)
        tol = INDICATOR_FEAS_TOL * (1.0 + float(np.linalg.norm(z)))
        return ExtReal(0.0) if residuals(self.C, z) <= tol else PLUS_INF

    def value_batch(self, Z: np.ndarray) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        tol = INDICATOR_FEAS_TOL * (1.0 + np.linalg.norm(Z, axis=1))
        worst = np.zeros(Z.shape[0])
        if self.C.n_ineq:
            scale = _row_scales(self.C.G)
            worst = np.maximum(worst, np.max((Z @ self.C.G.T - self.C.h) / scale, axis=1))
        if self.C.n_eq:
            scale = _row_scales(self.C.E)
            worst = np.maximum(worst, np.max(np.abs(Z @ self.C.E.T - self.C.d) / scale, axis=1))
        return np.where(worst <= tol, 0.0, np.inf)

    def subdifferential(self, z):
        self._require_in_domain_geom(z)
        return normal_cone_rep(self.C, z)

    def subderivative(self, z, w) -> ExtReal:
        self._require_in_domain_geom(z)
        T = tangent_cone(self.C, np.asarray(z, dtype=float), ACT_TOL)
        w = np.asarray(w, dtype=float)
        inside = residuals(T, w) <= ACT_TOL * (1.0 + float(np.linalg.norm(w)))
        return ExtReal(0.0) if inside else PLUS_INF

    def second_subderivative(self, z, y, u) -> ExtReal:
        self._require_subgradient(z, y)
        return ExtReal(0.0) if self.critical_cone(z, y).contains(u) else PLUS_INF

    def parabolic_subderivative(self, z, w, u, schedule=None) -> ExtReal:
        if not self.subderivative(z, w).is_finite:
            raise SubderivativeNotFinite("parabolic subderivative needs d g(z)(w) finite")
        return ExtReal(0.0) if self.second_order_tangent_contains(z, w, u) else PLUS_INF

    def second_order_tangent_contains(self, z, w, u, schedule=None) -> bool:
        cone = second_order_tangent_cone(self.C, z, w)
        u = np.asarray(u, dtype=float)
        return residuals(cone, u) <= ACT_TOL * (1.0 + float(np.linalg.norm(u)))

    def critical_cone(self, z, y):
        """Tangent cone intersected with the hyperplane y-perp (active-set form)."""
        self._require_subgradient(z, y)
        y = np.asarray(y, dtype=float)
        T = tangent_cone(self.C, np.asarray(z, dtype=float), ACT_TOL)
        E = np.vstack([T.E, y.reshape(1, -1)]) if np.linalg.norm(y) > 0 else T.E
        return PolyhedralConeRepr(
            PolyCone.make_cone(self.ambient_dim, T.G if T.n_ineq else None, E),
            description="tangent cone cut by the multiplier hyperplane",
        )

    def lipschitz_bound(self, z) -> float:
        return 0.0

    def domain_distance(self, z) -> float:
        p = self.domain_project(z)
        return float(np.linalg.norm(np.asarray(z, dtype=float) - p))

    def domain_project(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self._axis_bounds is not None:
            lo, hi = self._axis_bounds
            return np.clip(z, lo, hi)
        p = project(self.C, z)
        if p is None:
            raise ValueError("empty indicator domain")
        return p

    def _require_in_domain_geom(self, z):
        z = np.asarray(z, dtype=float)
        if residuals(self.C, z) > ACT_TOL * (1.0 + float(np.linalg.norm(z))):
            raise PointNotInDomain("point outside the indicator domain")


def nonpositive_orthant(dim: int) -> PolyhedralIndicator:
    return PolyhedralIndicator(Polyhedron.make(dim, G=np.eye(dim), h=np.zeros(dim)))


def zero_set(dim: int) -> PolyhedralIndicator:
    return PolyhedralIndicator(Polyhedron.make(dim, E=np.eye(dim), d=np.zeros(dim)))


class NegSemidefIndicator(OuterFunction):
    """Indicator of the negative semidefinite cone on vectorized S^n."""

    tag = "ind_negsemidef"
    parabolic_closed_form = False

    def __init__(self, n: int):
        self.n = int(n)
        self.ambient_dim = svec_dim(self.n)

    # -- helpers ----------------------------------------------------------------

    def _to_mat(self, z) -> np.ndarray:
        z = self._require_dim(z)
        return smat(z) if z.ndim == 1 else 0.5 * (z + z.T)

    def _zero_cluster_basis(self, A: np.ndarray) -> np.ndarray:
        """Orthonormal basis of the near-zero top eigenvalue cluster (empty if
        the matrix is negative definite at the clustering tolerance)."""
        lams, Q = sym_eig(A)
        gap = 1e-8 * (1.0 + float(np.linalg.norm(A)))
        idx = [j for j, l in enumerate(lams) if abs(l) <= gap]
        return Q[:, idx] if idx else np.zeros((self.n, 0))

    # -- catalog operations -------------------------------------------------------

    def value(self, z) -> ExtReal:
        A = self._to_mat(z)
        lam_max = float(np.linalg.eigvalsh(A)[-1])
        tol = INDICATOR_FEAS_TOL * (1.0 + float(np.linalg.norm(A)))
        return ExtReal(0.0) if lam_max <= tol else PLUS_INF

    def value_batch(self, Z: np.ndarray) -> np.ndarray:
        mats = smat_batch(np.atleast_2d(np.asarray(Z, dtype=float)))
        lam_max = np.linalg.eigvalsh(mats)[:, -1]
        tol = INDICATOR_FEAS_TOL * (1.0 + np.linalg.norm(mats, axis=(1, 2)))
        return np.where(lam_max <= tol, 0.0, np.inf)

    def subdifferential(self, z):
        self._require_in_domain(z)
        A = self._to_mat(z)
        return SpectralRep(self.n, np.zeros((self.n, self.n)), self._zero_cluster_basis(A), None)

    def subderivative(self, z, w) -> ExtReal:
        self._require_in_domain(z)
        A, W = self._to_mat(z), self._to_mat(w)
        E0 = self._zero_cluster_basis(A)
        if E0.shape[1] == 0:
            return ExtReal(0.0)
        comp = E0.T @ W @ E0
        lams, _ = sym_eig(0.5 * (comp + comp.T))
        tol = 1e-9 * (1.0 + float(np.linalg.norm(W)))
        return ExtReal(0.0) if lams[0] <= tol else PLUS_INF

    def second_subderivative(self, z, y, u) -> ExtReal:
        """-2 <V, W pinv(A) W> on the critical cone, +inf elsewhere; the
        pseudoinverse is formed in the eigenbasis with the zero cluster
        annihilated."""
        self._require_subgradient(z, y)
        A, V, W = self._to_mat(z), self._to_mat(y), self._to_mat(u)
        if not self.critical_cone(z, y).contains(svec(W)):
            return PLUS_INF
        lams, Q = sym_eig(A)
        gap = 1e-8 * (1.0 + float(np.linalg.norm(A)))
        inv = np.array([0.0 if abs(l) <= gap else 1.0 / l for l in lams])
        Adag = Q @ np.diag(inv) @ Q.T
        return ExtReal(-2.0 * float(np.tensordot(V, W @ Adag @ W)))

    def parabolic_subderivative(self, z, w, u, schedule=None) -> ExtReal:
        if not self.subderivative(z, w).is_finite:
            raise SubderivativeNotFinite("parabolic subderivative needs d g(z)(w) finite")
        ok = self.second_order_tangent_contains(z, w, u, schedule)
        return ExtReal(0.0) if ok else PLUS_INF

    def second_order_tangent_contains(self, z, w, u, schedule=None) -> bool:
        """Numeric membership (flagged): the parabolic arc's distance to the
        cone must vanish faster than t^2.  Membership holds when the scaled
        violation at the finest steps is negligible or clearly decaying."""
        from ..core import GridSchedule

        sched = schedule or GridSchedule()
        A, W, U = self._to_mat(z), self._to_mat(w), self._to_mat(u)
        scale = 1.0 + float(np.linalg.norm(U))
        ratios = []
        for t in sched.t_levels():
            M = A + t * W + 0.5 * t * t * U
            lams, _ = sym_eig(M)
            dist = float(np.linalg.norm(np.maximum(lams, 0.0)))
            ratios.append(dist / (0.5 * t * t))
        tail = ratios[-3:]
        return tail[-1] <= 1e-2 * scale or tail[-1] <= 0.3 * max(tail[0], 1e-300)

    def critical_cone(self, z, y):
        self._require_subgradient(z, y)
        V = self._to_mat(y)

        def pred(w):
            W = self._to_mat(w)
            if not self.subderivative(z, svec(W)).is_finite:
                return False
            pairing = float(np.tensordot(V, W))
            return abs(pairing) <= 1e-8 * (1.0 + np.linalg.norm(V) * np.linalg.norm(W))

        return PredicateConeRepr(pred, description="tangent directions orthogonal to the multiplier")

    def project_critical(self, z, y, w, iters: int = 25) -> np.ndarray:
        """Alternating projection of a direction onto the critical cone at
        (z, y): kill the multiplier pairing, then clip the compression on the
        zero-eigenvalue cluster."""
        A, V, W = self._to_mat(z), self._to_mat(y), self._to_mat(w)
        E0 = self._zero_cluster_basis(A)
        vnorm2 = float(np.tensordot(V, V))
        for _ in range(iters):
            if vnorm2 > 1e-300:
                W = W - V * (float(np.tensordot(V, W)) / vnorm2)
            if E0.shape[1]:
                comp = E0.T @ W @ E0
                lams, Q = sym_eig(0.5 * (comp + comp.T))
                pos = Q @ np.diag(np.maximum(lams, 0.0)) @ Q.T
                W = W - E0 @ pos @ E0.T
        return svec(W)

    def lipschitz_bound(self, z) -> float:
        return 0.0

    def domain_distance(self, z) -> float:
        A = self._to_mat(z)
        lams, _ = sym_eig(A)
        return float(np.linalg.norm(np.maximum(lams, 0.0)))

    def domain_project(self, z) -> np.ndarray:
        A = self._to_mat(z)
        lams, Q = sym_eig(A)
        return svec(Q @ np.diag(np.minimum(lams, 0.0)) @ Q.T)
