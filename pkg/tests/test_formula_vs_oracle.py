"""The central cross-check: every closed-form second subderivative in the
catalog must agree with the brute-force difference-quotient estimate on seeded
random critical directions."""

import numpy as np
import pytest

from epidiff.core import PolyMap
from epidiff.numkit import svec
from epidiff.oracle import estimate_second_subderivative
from epidiff.outer import (
    MaxEigFunction,
    NegSemidefIndicator,
    SmoothQuadratic,
    SumTopEigFunction,
    absolute_value,
    nonpositive_orthant,
)

from _instances import half_square_plq, outer_sampled, psd_base_data

N_DIRECTIONS = 50


def _tol(value: float) -> float:
    return max(0.05, 0.05 * abs(value))


def _critical_directions(g, z, y, rng, count):
    from epidiff.optimality import _project_to_cone

    cone = g.critical_cone(z, y)
    spectral_project = getattr(g, "project_critical", None)
    dirs = []
    attempts = 0
    while len(dirs) < count and attempts < 60 * count:
        attempts += 1
        cand = rng.standard_normal(g.ambient_dim)
        cand /= np.linalg.norm(cand)
        if not cone.contains(cand):
            projected = _project_to_cone(cone, cand)
            if projected is None and spectral_project is not None:
                raw = spectral_project(z, y, cand)
                nrm = np.linalg.norm(raw)
                projected = raw / nrm if nrm > 1e-9 else None
            if projected is None or not cone.contains(projected):
                continue
            cand = projected
        dirs.append(cand)
    return dirs


CASES = [
    ("plq_abs", absolute_value(), np.array([0.0]), np.array([1.0])),
    ("plq_half_square", half_square_plq(), np.array([0.0]), np.array([0.0])),
    ("ind_orthant", nonpositive_orthant(2), np.array([0.0, -1.0]), np.array([1.0, 0.0])),
    ("ind_negsemidef", NegSemidefIndicator(2), *psd_base_data()),
    ("max_eig", MaxEigFunction(2), svec(np.diag([2.0, 1.0])), svec(np.diag([1.0, 0.0]))),
    (
        "sum_top_eig",
        SumTopEigFunction(3, 2),
        svec(np.diag([3.0, 1.0, 0.0])),
        svec(np.diag([1.0, 1.0, 0.0])),
    ),
    (
        "twice_semidiff",
        SmoothQuadratic(
            PolyMap.from_strings([["x1^2", "0.5 x1 x2"]], 2),
            PolyMap.from_strings([["x2^2"]], 2),
        ),
        np.array([0.0, 0.0]),
        np.array([0.0, 0.0]),
    ),
]


@pytest.mark.parametrize("name,g,z,y", CASES, ids=[c[0] for c in CASES])
def test_closed_form_matches_oracle(name, g, z, y):
    rng = np.random.default_rng(abs(hash(name)) % 2**32)
    f = outer_sampled(g)
    dirs = _critical_directions(g, z, y, rng, N_DIRECTIONS)
    assert len(dirs) >= N_DIRECTIONS // 2, f"{name}: too few critical directions found"
    worst = 0.0
    for w in dirs:
        closed = g.second_subderivative(z, y, w)
        est = estimate_second_subderivative(f, z, y, w)
        assert closed.is_finite and est.is_finite, name
        gap = abs(closed.value - est.value)
        worst = max(worst, gap - _tol(closed.value))
        assert gap <= _tol(closed.value), (name, w, closed.value, est.value)
    assert worst <= 0.0
