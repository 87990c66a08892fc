"""Second-order variational calculus for composite objectives phi + g(F(.)):
closed-form second subderivatives, parabolic subderivatives, multiplier
duality, optimality certificates, and the difference-quotient oracles that
cross-check every closed form."""

from .core import CompositeProblem, GridSchedule, PolyMap
from .extreal import PLUS_INF, ExtReal

__all__ = ["CompositeProblem", "GridSchedule", "PolyMap", "ExtReal", "PLUS_INF"]
