"""Convex piecewise linear-quadratic members of the catalog.

A piece is a polyhedron C_i carrying the quadratic 0.5 <A_i x, x> + <a_i, x>
+ alpha_i.  All second-order objects reduce to active-set algebra over the
pieces; the admissible piece is never unique, so a deterministic piece-index
tie-break fixes which equivalent representation is reported.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import PointNotInDomain, SubderivativeNotFinite, ValidationError
from ..extreal import PLUS_INF, ExtReal, ext_min
from ..numkit import PolyCone, Polyhedron, cone_generators, project, tangent_cone, vrep_to_hrep
from ..numkit.polyhedra import _row_scales, residuals
from .base import OuterFunction
from .indicators import ACT_TOL, INDICATOR_FEAS_TOL as VALUE_TOL, second_order_tangent_cone
from .reprs import PolyhedralConeRepr, PolyhedronRep


@dataclass(frozen=True)
class PlqPiece:
    domain: Polyhedron
    A: np.ndarray
    a: np.ndarray
    alpha: float

    def value(self, z: np.ndarray) -> float:
        return 0.5 * float(z @ self.A @ z) + float(self.a @ z) + self.alpha

    def grad(self, z: np.ndarray) -> np.ndarray:
        return self.A @ z + self.a


class PlqFunction(OuterFunction):
    tag = "plq"

    def __init__(self, pieces):
        if not pieces:
            raise ValidationError("a PLQ function needs at least one piece")
        dim = pieces[0].domain.dim
        for p in pieces:
            if p.domain.dim != dim or p.A.shape != (dim, dim) or p.a.shape != (dim,):
                raise ValidationError("PLQ piece data with inconsistent dimensions")
            if np.max(np.abs(p.A - p.A.T), initial=0.0) > 1e-9 * (1.0 + np.abs(p.A).max(initial=0.0)):
                raise ValidationError("PLQ piece matrix must be symmetric")
        self.pieces: list[PlqPiece] = list(pieces)
        self.ambient_dim = dim

    # -- piece bookkeeping --------------------------------------------------------

    def _active(self, z: np.ndarray) -> list[int]:
        tol = ACT_TOL * (1.0 + float(np.linalg.norm(z)))
        return [i for i, p in enumerate(self.pieces) if residuals(p.domain, z) <= tol]

    def _admissible(self, z: np.ndarray, w: np.ndarray) -> list[int]:
        """Active pieces whose tangent cone at z contains w."""
        wtol = ACT_TOL * (1.0 + float(np.linalg.norm(w)))
        out = []
        for i in self._active(z):
            T = tangent_cone(self.pieces[i].domain, z, ACT_TOL)
            if residuals(T, w) <= wtol:
                out.append(i)
        return out

    # -- catalog operations ----------------------------------------------------------

    def value(self, z) -> ExtReal:
        z = self._require_dim(z)
        # the value tolerance is much tighter than the activity tolerance:
        # extrapolating a piece by eps shifts second-order quotients by eps/t^2
        tol = VALUE_TOL * (1.0 + float(np.linalg.norm(z)))
        vals = [p.value(z) for p in self.pieces if residuals(p.domain, z) <= tol]
        if not vals:
            return PLUS_INF
        # pieces agree on overlaps; min is the deterministic reporting rule
        return ExtReal(min(vals))

    def value_batch(self, Z: np.ndarray) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        out = np.full(Z.shape[0], np.inf)
        tol = VALUE_TOL * (1.0 + np.linalg.norm(Z, axis=1))
        for p in self.pieces:
            worst = np.zeros(Z.shape[0])
            if p.domain.n_ineq:
                scale = _row_scales(p.domain.G)
                worst = np.maximum(worst, np.max((Z @ p.domain.G.T - p.domain.h) / scale, axis=1))
            if p.domain.n_eq:
                scale = _row_scales(p.domain.E)
                worst = np.maximum(
                    worst, np.max(np.abs(Z @ p.domain.E.T - p.domain.d) / scale, axis=1)
                )
            mask = worst <= tol
            if mask.any():
                vals = 0.5 * np.einsum("ni,ij,nj->n", Z, p.A, Z) + Z @ p.a + p.alpha
                out[mask] = np.minimum(out[mask], vals[mask])
        return out

    def subdifferential(self, z):
        """conv of the active gradients plus the normal cone to the domain.

        The domain's normal cone is the intersection of the active pieces'
        normal cones, assembled in H-representation from each piece's tangent
        generators, then converted back to generators for the hull step."""
        z = np.asarray(z, dtype=float)
        active = self._active(z)
        if not active:
            raise PointNotInDomain("point outside dom g")
        points = [self.pieces[i].grad(z) for i in active]
        rows_G, rows_E = [], []
        for i in active:
            T = tangent_cone(self.pieces[i].domain, z, ACT_TOL)
            t_rays, t_lines = cone_generators(T)
            rows_G.extend(t_rays)
            rows_E.extend(t_lines)
        ncone = PolyCone.make_cone(
            self.ambient_dim,
            np.vstack(rows_G) if rows_G else None,
            np.vstack(rows_E) if rows_E else None,
        )
        n_rays, n_lines = cone_generators(ncone)
        hrep = vrep_to_hrep(points, n_rays, n_lines, dim=self.ambient_dim)
        return PolyhedronRep(polyhedron=hrep, points=points, rays=n_rays, lines=n_lines)

    def subderivative(self, z, w) -> ExtReal:
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        if not self._active(z):
            raise PointNotInDomain("point outside dom g")
        idx = self._admissible(z, w)
        if not idx:
            return PLUS_INF
        return ExtReal(min(float(self.pieces[i].grad(z) @ w) for i in idx))

    def second_subderivative(self, z, y, u) -> ExtReal:
        """<A_i u, u> over a piece whose tangent cone contains u with the
        residual multiplier y - grad_i(z) orthogonal to u; +inf otherwise."""
        self._require_subgradient(z, y)
        z = np.asarray(z, dtype=float)
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)
        utol = 1e-8 * (1.0 + float(np.linalg.norm(u)))
        for i in self._admissible(z, u):
            piece = self.pieces[i]
            resid = y - piece.grad(z)
            if abs(float(resid @ u)) <= utol * (1.0 + float(np.linalg.norm(resid))):
                return ExtReal(float(u @ piece.A @ u))
        return PLUS_INF

    def parabolic_subderivative(self, z, w, u, schedule=None) -> ExtReal:
        """Active-piece expansion <A_i w, w> + <grad_i(z), u> minimized over the
        pieces whose polyhedron admits the parabolic arc."""
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        u = np.asarray(u, dtype=float)
        if not self.subderivative(z, w).is_finite:
            raise SubderivativeNotFinite("parabolic subderivative needs d g(z)(w) finite")
        utol = ACT_TOL * (1.0 + float(np.linalg.norm(u)))
        vals = []
        for i in self._admissible(z, w):
            piece = self.pieces[i]
            cone = second_order_tangent_cone(piece.domain, z, w)
            if residuals(cone, u) <= utol:
                vals.append(ExtReal(float(w @ piece.A @ w) + float(piece.grad(z) @ u)))
        return ext_min(vals) if vals else PLUS_INF

    def second_order_tangent_contains(self, z, w, u, schedule=None) -> bool:
        z = np.asarray(z, dtype=float)
        w = np.asarray(w, dtype=float)
        u = np.asarray(u, dtype=float)
        utol = ACT_TOL * (1.0 + float(np.linalg.norm(u)))
        for i in self._admissible(z, w):
            cone = second_order_tangent_cone(self.pieces[i].domain, z, w)
            if residuals(cone, u) <= utol:
                return True
        return False

    def critical_cone(self, z, y):
        """Polar of the shifted subdifferential: w is critical iff
        <v - y, w> <= 0 for every generator v of the subdifferential."""
        self._require_subgradient(z, y)
        y = np.asarray(y, dtype=float)
        rep = self.subdifferential(z)
        rows_G = [np.asarray(p, dtype=float) - y for p in rep.points]
        rows_G += [np.asarray(r, dtype=float) for r in rep.rays]
        rows_E = [np.asarray(l, dtype=float) for l in rep.lines]
        G = [g for g in rows_G if np.linalg.norm(g) > 1e-12]
        return PolyhedralConeRepr(
            PolyCone.make_cone(
                self.ambient_dim,
                np.vstack(G) if G else None,
                np.vstack(rows_E) if rows_E else None,
            ),
            description="directions where the subderivative matches the multiplier pairing",
        )

    def lipschitz_bound(self, z) -> float:
        z = np.asarray(z, dtype=float)
        best = 0.0
        for p in self.pieces:
            spec = float(np.linalg.norm(p.A, 2)) if p.A.size else 0.0
            best = max(best, float(np.linalg.norm(p.grad(z))) + spec)
        return best

    def domain_distance(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return min(
            float(np.linalg.norm(z - q))
            for q in (project(p.domain, z) for p in self.pieces)
            if q is not None
        )

    def domain_project(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        best, best_d = None, np.inf
        for p in self.pieces:
            q = project(p.domain, z)
            if q is not None and float(np.linalg.norm(z - q)) < best_d:
                best, best_d = q, float(np.linalg.norm(z - q))
        if best is None:
            raise PointNotInDomain("PLQ domain is empty")
        return best

    def spot_check_agreement(self, n_samples: int = 200, seed: int = 7, tol: float = 1e-9) -> bool:
        """Sample pairwise piece intersections and confirm the values agree."""
        rng = np.random.default_rng(seed)
        for i in range(len(self.pieces)):
            for j in range(i + 1, len(self.pieces)):
                both = Polyhedron.make(
                    self.ambient_dim,
                    np.vstack([self.pieces[i].domain.G, self.pieces[j].domain.G]),
                    np.concatenate([self.pieces[i].domain.h, self.pieces[j].domain.h]),
                    np.vstack([self.pieces[i].domain.E, self.pieces[j].domain.E]),
                    np.concatenate([self.pieces[i].domain.d, self.pieces[j].domain.d]),
                )
                for _ in range(n_samples):
                    cand = rng.normal(size=self.ambient_dim)
                    q = project(both, cand)
                    if q is None:
                        break
                    vi, vj = self.pieces[i].value(q), self.pieces[j].value(q)
                    if abs(vi - vj) > tol * (1.0 + abs(vi)):
                        return False
        return True


def absolute_value() -> PlqFunction:
    """|.| on the line as a two-piece PLQ function."""
    left = PlqPiece(
        Polyhedron.make(1, G=[[1.0]], h=[0.0]), np.zeros((1, 1)), np.array([-1.0]), 0.0
    )
    right = PlqPiece(
        Polyhedron.make(1, G=[[-1.0]], h=[0.0]), np.zeros((1, 1)), np.array([1.0]), 0.0
    )
    return PlqFunction([left, right])
