"""Abstract interface of the outer-function catalog.

Every catalog member is a proper lsc convex function with closed-form (or
explicitly numeric-flagged) first- and second-order objects.  All operations
are pure; instances are immutable after construction.
"""

from __future__ import annotations

import numpy as np

from ..errors import DimensionMismatch, NotASubgradient, PointNotInDomain
from ..extreal import ExtReal
from .reprs import CriticalConeRepr, SubdiffRepr

SUBGRADIENT_TOL = 1e-8


class OuterFunction:
    #: ambient dimension of the (vectorized) argument space
    ambient_dim: int
    #: whether parabolic_subderivative is a closed form (False: numeric fallback)
    parabolic_closed_form: bool = True
    tag: str = "outer"

    # -- required operations ---------------------------------------------------

    def value(self, z) -> ExtReal:
        raise NotImplementedError

    def value_batch(self, Z: np.ndarray) -> np.ndarray:
        """Vectorized value on an (N, dim) array; +inf marks points outside
        dom g.  The default loops; hot tags override."""
        return np.array([self.value(row).as_float() for row in np.atleast_2d(Z)])

    def subdifferential(self, z) -> SubdiffRepr:
        raise NotImplementedError

    def subderivative(self, z, w) -> ExtReal:
        raise NotImplementedError

    def second_subderivative(self, z, y, u) -> ExtReal:
        raise NotImplementedError

    def parabolic_subderivative(self, z, w, u, schedule=None) -> ExtReal:
        raise NotImplementedError

    def second_order_tangent_contains(self, z, w, u, schedule=None) -> bool:
        raise NotImplementedError

    def critical_cone(self, z, y) -> CriticalConeRepr:
        raise NotImplementedError

    def lipschitz_bound(self, z) -> float:
        """A Lipschitz constant of the function near z relative to its domain."""
        raise NotImplementedError

    # -- domain geometry ---------------------------------------------------------

    def domain_distance(self, z) -> float:
        raise NotImplementedError

    def domain_project(self, z) -> np.ndarray:
        raise NotImplementedError

    # -- shared precondition helpers ----------------------------------------------

    def _require_dim(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if z.ndim == 1 and z.shape[0] != self.ambient_dim:
            raise DimensionMismatch(
                f"{self.tag}: expected a vector of length {self.ambient_dim}"
            )
        return z

    def _require_in_domain(self, z):
        if not self.value(z).is_finite:
            raise PointNotInDomain(f"{self.tag}: point outside dom g")

    def _require_subgradient(self, z, y, tol: float = SUBGRADIENT_TOL):
        if not self.subdifferential(z).contains(y, tol):
            raise NotASubgradient(f"{self.tag}: y is not a subgradient at z")

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.ambient_dim})"
