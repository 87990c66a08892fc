import numpy as np
import pytest

from epidiff.core import (
    CompositeProblem,
    GridSchedule,
    PolyMap,
    jacobian,
    parse_monomial,
    poly_eval,
    poly_eval_batch,
    second_form,
)
from epidiff.errors import ValidationError
from epidiff.outer import nonpositive_orthant


def test_poly_eval_examples():
    p = PolyMap.from_strings([["x1^2"]], 1)
    assert poly_eval(p, [3.0])[0] == 9.0
    p2 = PolyMap.from_strings([["x2", "-1 x1^2"]], 2)
    assert poly_eval(p2, [1.0, 1.0])[0] == 0.0
    p3 = PolyMap.from_strings([["x1 x2", "x1^3"]], 2)
    assert poly_eval(p3, [2.0, 1.0])[0] == 10.0


def test_jacobian_examples():
    p = PolyMap.from_strings([["x1^2"]], 1)
    assert jacobian(p, [3.0]).tolist() == [[6.0]]
    p2 = PolyMap.from_strings([["x2", "-1 x1^2"]], 2)
    assert jacobian(p2, [0.0, 0.0]).tolist() == [[0.0, 1.0]]
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    lin = PolyMap.linear(A)
    for x in ([0.0, 0.0], [2.0, -1.0]):
        assert np.allclose(jacobian(lin, x), A)


def test_second_form_examples():
    p = PolyMap.from_strings([["x2", "-1 x1^2"]], 2)
    assert second_form(p, [0.0, 0.0], [1.0, 0.0])[0] == -2.0
    lin = PolyMap.linear(np.array([[1.0, 1.0]]))
    assert second_form(lin, [0.3, 0.7], [1.0, 2.0])[0] == 0.0
    p2 = PolyMap.from_strings([["x1^2 x2"]], 2)
    assert second_form(p2, [1.0, 1.0], [1.0, 1.0])[0] == 6.0


def _random_polymap(rng, n_in, n_out, degree):
    comps = []
    for _ in range(n_out):
        comp = []
        for _ in range(rng.integers(1, 5)):
            exps = tuple(int(e) for e in rng.integers(0, degree + 1, size=n_in))
            while sum(exps) > degree:
                exps = tuple(int(e) for e in rng.integers(0, degree + 1, size=n_in))
            comp.append((float(rng.normal()), exps))
        comps.append(comp)
    return PolyMap(n_in, comps)


def test_derivatives_match_central_differences():
    rng = np.random.default_rng(42)
    h = 1e-4
    for _ in range(100):
        n = int(rng.integers(1, 4))
        p = _random_polymap(rng, n, int(rng.integers(1, 3)), 4)
        x = rng.uniform(-1, 1, size=n)
        w = rng.standard_normal(n)
        J = jacobian(p, x)
        scale = 1.0 + max(abs(c) for comp in p.components for c, _ in comp)
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            fd = (poly_eval(p, x + e) - poly_eval(p, x - e)) / (2 * h)
            assert np.max(np.abs(J[:, i] - fd)) <= 1e-5 * scale
        sf = second_form(p, x, w)
        fd2 = (poly_eval(p, x + h * w) - 2 * poly_eval(p, x) + poly_eval(p, x - h * w)) / h**2
        assert np.max(np.abs(sf - fd2)) <= 1e-4 * scale * (1 + np.linalg.norm(w)) ** 2


def test_poly_eval_exact_on_integers():
    p = PolyMap.from_strings([["3 x1^2 x2", "-2 x1", "7"]], 2)
    assert poly_eval(p, [2.0, 5.0])[0] == 3 * 4 * 5 - 4 + 7
    batch = poly_eval_batch(p, np.array([[2.0, 5.0], [1.0, 1.0]]))
    assert batch[0, 0] == 63.0 and batch[1, 0] == 8.0


def test_monomial_parsing():
    assert parse_monomial("3 x1^2 x2", 2) == (3.0, (2, 1))
    assert parse_monomial("x2", 2) == (1.0, (0, 1))
    assert parse_monomial("-x1", 2) == (-1.0, (1, 0))
    assert parse_monomial("0.5", 2) == (0.5, (0, 0))
    with pytest.raises(ValidationError):
        parse_monomial("x3", 2)
    with pytest.raises(ValidationError):
        parse_monomial("3 y1", 2)


def test_polymap_validation():
    with pytest.raises(ValidationError):
        PolyMap(1, [[(1.0, (7,))]])  # degree cap
    merged = PolyMap(1, [[(1.0, (1,)), (2.0, (1,))]])
    assert merged.components[0] == [(3.0, (1,))]


def test_grid_schedule_validation():
    sched = GridSchedule()
    assert len(sched.t_levels()) == sched.steps
    assert sched.radius(0.1) == sched.radius_coeff * 0.1
    with pytest.raises(ValidationError):
        GridSchedule(t0=-1.0)
    with pytest.raises(ValidationError):
        GridSchedule(ratio=1.0)
    with pytest.raises(ValidationError):
        GridSchedule(steps=2)


def test_composite_problem_consistency():
    phi = PolyMap.from_strings([["x2"]], 2)
    F = PolyMap.from_strings([["x2", "-1 x1^2"]], 2)
    prob = CompositeProblem(phi, F, nonpositive_orthant(1))
    assert prob.check_feasible([0.0, 0.0])
    assert not prob.check_feasible([0.0, 1.0])
    with pytest.raises(Exception):
        CompositeProblem(phi, F, nonpositive_orthant(2))
