"""Polyhedra in H-representation with the exact desk-scale machinery the
variational calculus needs: tangent cones, vertex and extreme-ray enumeration,
polar conversions between H- and V-representations, Euclidean projections by
face enumeration, and a deterministic vertex-enumeration LP.

Everything here trades asymptotic speed for determinism and exactness at
dimensions <= 8: enumeration over constraint subsets replaces iterative
solvers, so ties break identically on every run.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from ..errors import (
    DimensionMismatch,
    DimensionTooLarge,
    EmptyPolyhedron,
    PointNotInSet,
    Unbounded,
)

MAX_DIM = 8
DEDUP_TOL = 1e-9
FEAS_TOL = 1e-9
ACT_TOL = 1e-9
RANK_TOL = 1e-9


def _as_rows(M, dim: int) -> np.ndarray:
    if M is None:
        return np.zeros((0, dim))
    M = np.array(M, dtype=float)  # copy: rows are frozen after construction
    if M.size == 0:
        return np.zeros((0, dim))
    M = np.atleast_2d(M)
    if M.shape[1] != dim:
        raise DimensionMismatch(f"constraint rows must have {dim} columns")
    return M


def _as_vec(v, rows: int) -> np.ndarray:
    if v is None:
        return np.zeros(rows)
    v = np.atleast_1d(np.array(v, dtype=float))
    if v.shape != (rows,):
        raise DimensionMismatch("right-hand side length mismatch")
    return v


@dataclass(frozen=True)
class Polyhedron:
    """The set {x : G x <= h, E x = d} in R^dim."""

    dim: int
    G: np.ndarray
    h: np.ndarray
    E: np.ndarray
    d: np.ndarray

    @staticmethod
    def make(dim: int, G=None, h=None, E=None, d=None) -> "Polyhedron":
        G = _as_rows(G, dim)
        E = _as_rows(E, dim)
        h = _as_vec(h, G.shape[0])
        d = _as_vec(d, E.shape[0])
        for arr in (G, h, E, d):
            arr.flags.writeable = False
        return Polyhedron(dim, G, h, E, d)

    @property
    def g_scales(self) -> np.ndarray:
        cached = getattr(self, "_g_scales", None)
        if cached is None:
            cached = _row_scales(self.G)
            object.__setattr__(self, "_g_scales", cached)
        return cached

    @property
    def e_scales(self) -> np.ndarray:
        cached = getattr(self, "_e_scales", None)
        if cached is None:
            cached = _row_scales(self.E)
            object.__setattr__(self, "_e_scales", cached)
        return cached

    @property
    def n_ineq(self) -> int:
        return self.G.shape[0]

    @property
    def n_eq(self) -> int:
        return self.E.shape[0]

    def __repr__(self):
        return f"Polyhedron(dim={self.dim}, ineq={self.n_ineq}, eq={self.n_eq})"


class PolyCone(Polyhedron):
    """A polyhedron with zero right-hand sides: closed under nonnegative scaling."""

    @staticmethod
    def make_cone(dim: int, G=None, E=None) -> "PolyCone":
        G = _as_rows(G, dim)
        E = _as_rows(E, dim)
        h = np.zeros(G.shape[0])
        d = np.zeros(E.shape[0])
        for arr in (G, h, E, d):
            arr.flags.writeable = False
        return PolyCone(dim, G, h, E, d)


def box(dim: int, half_width: float, center=None) -> Polyhedron:
    """The axis-aligned box |x - center|_inf <= half_width."""
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)
    G = np.vstack([np.eye(dim), -np.eye(dim)])
    h = np.concatenate([c + half_width, half_width - c])
    return Polyhedron.make(dim, G, h)


def intersect(*polys: Polyhedron) -> Polyhedron:
    dim = polys[0].dim
    if any(p.dim != dim for p in polys):
        raise DimensionMismatch("cannot intersect polyhedra of different dimensions")
    return Polyhedron.make(
        dim,
        np.vstack([p.G for p in polys]),
        np.concatenate([p.h for p in polys]),
        np.vstack([p.E for p in polys]),
        np.concatenate([p.d for p in polys]),
    )


def _row_scales(M: np.ndarray) -> np.ndarray:
    if M.shape[0] == 0:
        return np.zeros(0)
    return np.maximum(np.linalg.norm(M, axis=1), 1e-300)


def residuals(P: Polyhedron, x) -> float:
    """Largest row-normalized constraint violation at x (distance proxy)."""
    x = np.asarray(x, dtype=float)
    worst = 0.0
    if P.n_ineq:
        worst = max(worst, float(np.max((P.G @ x - P.h) / P.g_scales)))
    if P.n_eq:
        worst = max(worst, float(np.max(np.abs(P.E @ x - P.d) / P.e_scales)))
    return worst


def contains(P: Polyhedron, x, tol: float = FEAS_TOL) -> bool:
    return residuals(P, x) <= tol


def _rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > RANK_TOL * max(1.0, s[0])))


def _nullspace(M: np.ndarray, dim: int) -> np.ndarray:
    """Orthonormal basis (columns) of {x : M x = 0}."""
    if M.size == 0:
        return np.eye(dim)
    _, s, Vt = np.linalg.svd(M)
    tol = RANK_TOL * max(1.0, s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol))
    return Vt[rank:].T


def _dedupe_sorted(points: list[np.ndarray], tol: float = DEDUP_TOL) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for p in sorted(points, key=lambda v: tuple(v)):
        if all(np.max(np.abs(p - q)) > tol for q in kept):
            kept.append(p)
    return kept


def vertices(P: Polyhedron) -> list[np.ndarray]:
    """All vertices of a bounded polyhedron, deduplicated and in lexicographic
    order.  Enumerates basic solutions: every vertex is the unique solution of
    the equality rows plus dim - rank(E) active inequality rows."""
    if P.dim > MAX_DIM:
        raise DimensionTooLarge(f"vertex enumeration supports dim <= {MAX_DIM}")
    rc_rays, rc_lines = cone_generators(recession_cone(P))
    if rc_rays or rc_lines:
        raise Unbounded("polyhedron has a nontrivial recession cone")
    rank_eq = _rank(P.E)
    need = P.dim - rank_eq
    if need < 0:
        return []
    found: list[np.ndarray] = []
    for S in itertools.combinations(range(P.n_ineq), need):
        M = np.vstack([P.E, P.G[list(S)]])
        b = np.concatenate([P.d, P.h[list(S)]])
        if _rank(M) < P.dim:
            continue
        x, *_ = np.linalg.lstsq(M, b, rcond=None)
        if np.max(np.abs(M @ x - b)) > 1e-7 * (1.0 + np.abs(b).max(initial=0.0)):
            continue
        if contains(P, x, FEAS_TOL * (1.0 + float(np.abs(x).max(initial=0.0)))):
            found.append(x)
    return _dedupe_sorted(found)


def recession_cone(P: Polyhedron) -> PolyCone:
    return PolyCone.make_cone(P.dim, P.G, P.E)


def cone_generators(K: Polyhedron) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Extreme rays and a lineality basis of the cone {G x <= 0, E x = 0}.

    Rays are unit vectors, deduplicated and lexicographically sorted; together
    with the lineality columns they positively span the cone.  An extreme ray
    of the pointed part is the 1-dimensional nullspace of dim-1 independent
    active rows (equalities, the lineality complement, and a subset of G rows).
    """
    if K.dim > MAX_DIM:
        raise DimensionTooLarge(f"ray enumeration supports dim <= {MAX_DIM}")
    stacked = np.vstack([K.G, K.E])
    L = _nullspace(stacked, K.dim)  # lineality space
    lines = [L[:, j] for j in range(L.shape[1])]
    eqs = np.vstack([K.E, L.T])  # restrict to the pointed part K ∩ L^perp
    rank_eq = _rank(eqs)
    need = K.dim - 1 - rank_eq
    if need < 0:
        return [], lines
    rays: list[np.ndarray] = []
    for S in itertools.combinations(range(K.n_ineq), need):
        M = np.vstack([eqs, K.G[list(S)]])
        if _rank(M) != K.dim - 1:
            continue
        u = _nullspace(M, K.dim)
        if u.shape[1] != 1:
            continue
        u = u[:, 0]
        for cand in (u, -u):
            if K.n_ineq == 0 or np.max(K.G @ cand) <= FEAS_TOL:
                rays.append(cand / np.linalg.norm(cand))
    rays = _dedupe_sorted(rays, tol=1e-8)
    return rays, lines


def vrep_to_hrep(points, rays=(), lines=(), dim: int | None = None) -> Polyhedron:
    """H-representation of conv(points) + cone(rays) + span(lines).

    Works through the homogenization cone: the facets of P are the extreme rays
    of the polar of cone({(p,1)} ∪ {(r,0)} ∪ {±(l,0)}), which is itself an
    H-represented cone, so one ray enumeration finishes the job.
    """
    points = [np.asarray(p, dtype=float) for p in points]
    if not points:
        raise EmptyPolyhedron("vrep_to_hrep needs at least one point")
    if dim is None:
        dim = points[0].shape[0]
    rows_ineq = [np.append(p, 1.0) for p in points]
    rows_ineq += [np.append(np.asarray(r, dtype=float), 0.0) for r in rays]
    rows_eq = [np.append(np.asarray(l, dtype=float), 0.0) for l in lines]
    polar = PolyCone.make_cone(
        dim + 1,
        G=np.vstack(rows_ineq),
        E=np.vstack(rows_eq) if rows_eq else None,
    )
    gen_rays, gen_lines = cone_generators(polar)
    G_rows, h_vals, E_rows, d_vals = [], [], [], []
    for a in gen_rays:
        if np.linalg.norm(a[:dim]) <= 1e-12:
            continue  # the trivial polar ray (0, -1)
        G_rows.append(a[:dim])
        h_vals.append(-a[dim])
    for a in gen_lines:
        if np.linalg.norm(a[:dim]) <= 1e-12:
            continue
        E_rows.append(a[:dim])
        d_vals.append(-a[dim])
    return Polyhedron.make(
        dim,
        np.vstack(G_rows) if G_rows else None,
        np.array(h_vals) if G_rows else None,
        np.vstack(E_rows) if E_rows else None,
        np.array(d_vals) if E_rows else None,
    )


def _lex_less(a: np.ndarray, b: np.ndarray, tol: float = DEDUP_TOL) -> bool:
    for x, y in zip(a, b):
        if x < y - tol:
            return True
        if x > y + tol:
            return False
    return False


def lp_max(c, P: Polyhedron) -> tuple[float, np.ndarray]:
    """Maximize <c, y> over a nonempty bounded polyhedron.

    The maximum is attained at a vertex; among optimal vertices the
    lexicographically smallest is returned so ties break identically on
    every run.
    """
    c = np.asarray(c, dtype=float)
    verts = vertices(P)  # raises Unbounded on nontrivial recession cone
    if not verts:
        raise EmptyPolyhedron("LP over an infeasible polyhedron")
    values = [float(c @ v) for v in verts]
    best = max(values)
    tol = 1e-9 * (1.0 + abs(best))
    optimal = [v for v, val in zip(verts, values) if val >= best - tol]
    arg = optimal[0]
    for v in optimal[1:]:
        if _lex_less(v, arg):
            arg = v
    return best, arg


def tangent_cone(P: Polyhedron, x, act_tol: float = ACT_TOL) -> PolyCone:
    """The cone {w : G_act w <= 0, E w = 0} of constraints active at x.

    Redundant active rows are kept: the H-representation may be non-minimal,
    and comparisons downstream are by membership, not by representation.
    """
    x = np.asarray(x, dtype=float)
    if residuals(P, x) > act_tol:
        raise PointNotInSet("point is farther than act_tol from the polyhedron")
    if P.n_ineq:
        slack = (P.G @ x - P.h) / _row_scales(P.G)
        active = P.G[slack >= -act_tol]
    else:
        active = np.zeros((0, P.dim))
    return PolyCone.make_cone(P.dim, active, P.E)


def project(P: Polyhedron, u) -> np.ndarray | None:
    """Exact Euclidean projection of u onto P, or None if P is empty.

    Enumerates candidate active sets: for each subset of inequality rows the
    projection onto the corresponding affine slice is a least-squares solve;
    the feasible candidate nearest to u is the projection.
    """
    if P.dim > MAX_DIM:
        raise DimensionTooLarge(f"projection supports dim <= {MAX_DIM}")
    u = np.asarray(u, dtype=float)
    best, best_d = None, math.inf
    max_active = P.dim - _rank(P.E)
    for k in range(0, max_active + 1):
        for S in itertools.combinations(range(P.n_ineq), k):
            M = np.vstack([P.E, P.G[list(S)]])
            b = np.concatenate([P.d, P.h[list(S)]])
            if M.shape[0] == 0:
                y = u
            else:
                lam = np.linalg.pinv(M @ M.T) @ (b - M @ u)
                y = u + M.T @ lam
            scale = 1.0 + float(np.abs(y).max(initial=0.0))
            if not contains(P, y, 1e-8 * scale):
                continue
            dist = float(np.linalg.norm(y - u))
            if dist < best_d - 1e-12 or (
                abs(dist - best_d) <= 1e-12 and best is not None and _lex_less(y, best)
            ):
                best, best_d = y, dist
    return best


def min_norm_point(P: Polyhedron) -> np.ndarray | None:
    return project(P, np.zeros(P.dim))


def is_empty(P: Polyhedron) -> bool:
    return project(P, np.zeros(P.dim)) is None
