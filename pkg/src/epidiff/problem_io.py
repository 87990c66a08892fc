"""Problem-file ingestion and serialization.

Files are JSON with monomials written as strings ("3 x1^2 x2"): optional
coefficient first, then variable^power factors.  The outer function g is a
tagged payload; matrix-valued tags live on the isometric vectorization of
symmetric matrices, so for them F must map into R^(n(n+1)/2).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import CompositeProblem, GridSchedule, PolyMap, gradient
from .errors import ParseError, ValidationError
from .numkit import Polyhedron
from .outer import (
    AlphaEigFunction,
    MaxEigFunction,
    NegSemidefIndicator,
    OuterFunction,
    PlqFunction,
    PlqPiece,
    PolyhedralIndicator,
    SmoothQuadratic,
    SumTopEigFunction,
    absolute_value,
    nonpositive_orthant,
    zero_function,
)

DEFAULT_SEED = 20240


@dataclass
class ProblemSpec:
    """A parsed problem: the composite data plus base point and options."""

    problem: CompositeProblem
    x: np.ndarray
    v: np.ndarray
    v_given: bool
    kappa: float | None
    ell: float | None
    schedule: GridSchedule
    seed: int
    g_payload: dict


def _require(cond: bool, msg: str):
    if not cond:
        raise ValidationError(msg)


def _vec(data, name: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except Exception as exc:
        raise ValidationError(f"{name}: expected a numeric vector") from exc
    _require(arr.ndim == 1, f"{name}: expected a flat vector")
    return arr


def _mat(data, name: str) -> np.ndarray:
    try:
        arr = np.asarray(data, dtype=float)
    except Exception as exc:
        raise ValidationError(f"{name}: expected a numeric matrix") from exc
    _require(arr.ndim == 2, f"{name}: expected a matrix")
    return arr


def _build_polyhedron(payload: dict, dim: int, name: str) -> Polyhedron:
    G = h = E = d = None
    if payload.get("G"):
        _require(payload.get("h") is not None, f"{name}: G without h")
        G = _mat(payload["G"], f"{name}.G")
        h = _vec(payload["h"], f"{name}.h")
    if payload.get("E"):
        _require(payload.get("d") is not None, f"{name}: E without d")
        E = _mat(payload["E"], f"{name}.E")
        d = _vec(payload["d"], f"{name}.d")
    try:
        return Polyhedron.make(dim, G, h, E, d)
    except Exception as exc:
        raise ValidationError(f"{name}: {exc}") from exc


def build_outer(payload: dict) -> OuterFunction:
    _require(isinstance(payload, dict) and "tag" in payload, "g: missing tag")
    tag = payload["tag"]
    if tag == "ind_nonpos":
        _require("dim" in payload, "g: ind_nonpos requires dim")
        return nonpositive_orthant(int(payload["dim"]))
    if tag == "ind_polyhedron":
        _require("dim" in payload, "g: ind_polyhedron requires dim")
        dim = int(payload["dim"])
        return PolyhedralIndicator(_build_polyhedron(payload, dim, "g"))
    if tag == "abs":
        return absolute_value()
    if tag == "plq":
        _require("dim" in payload and "pieces" in payload, "g: plq requires dim and pieces")
        dim = int(payload["dim"])
        pieces = []
        for k, pc in enumerate(payload["pieces"]):
            dom = _build_polyhedron(pc, dim, f"g.pieces[{k}]")
            A = _mat(pc["A"], f"g.pieces[{k}].A") if pc.get("A") else np.zeros((dim, dim))
            a = _vec(pc["a"], f"g.pieces[{k}].a") if pc.get("a") is not None else np.zeros(dim)
            _require(A.shape == (dim, dim), f"g.pieces[{k}].A: wrong shape")
            _require(a.shape == (dim,), f"g.pieces[{k}].a: wrong shape")
            pieces.append(PlqPiece(dom, A, a, float(pc.get("alpha", 0.0))))
        g = PlqFunction(pieces)
        if not g.spot_check_agreement(n_samples=40):
            raise ValidationError("g: PLQ piece values disagree on shared faces")
        return g
    if tag == "ind_negsemidef":
        _require("n" in payload, "g: ind_negsemidef requires n")
        return NegSemidefIndicator(int(payload["n"]))
    if tag == "max_eig":
        _require("n" in payload, "g: max_eig requires n")
        return MaxEigFunction(int(payload["n"]))
    if tag == "sum_top_eig":
        _require("n" in payload and "i" in payload, "g: sum_top_eig requires n and i")
        return SumTopEigFunction(int(payload["n"]), int(payload["i"]))
    if tag == "alpha_eig":
        _require("n" in payload and "i" in payload, "g: alpha_eig requires n and i")
        return AlphaEigFunction(int(payload["n"]), int(payload["i"]))
    if tag == "twice_semidiff":
        _require("dim" in payload, "g: twice_semidiff requires dim")
        dim = int(payload["dim"])
        base = PolyMap.from_strings([payload.get("base", [])], dim)
        h = PolyMap.from_strings([payload.get("h", [])], dim)
        center = _vec(payload["center"], "g.center") if payload.get("center") else None
        try:
            return SmoothQuadratic(base, h, center)
        except ValidationError:
            raise
        except Exception as exc:
            raise ValidationError(f"g: {exc}") from exc
    if tag == "zero":
        _require("dim" in payload, "g: zero requires dim")
        return zero_function(int(payload["dim"]))
    raise ValidationError(f"g: unknown tag {tag!r}")


def parse_problem_dict(data: dict) -> ProblemSpec:
    _require(isinstance(data, dict), "problem file must be a JSON object")
    for key in ("phi", "F", "g", "x"):
        _require(key in data, f"missing field {key!r}")
    x = _vec(data["x"], "x")
    n = x.shape[0]
    try:
        phi = PolyMap.from_strings([data["phi"]], n)
        F = PolyMap.from_strings(data["F"], n)
    except ValidationError:
        raise
    except Exception as exc:
        raise ValidationError(f"bad polynomial data: {exc}") from exc
    g = build_outer(data["g"])
    try:
        problem = CompositeProblem(phi, F, g)
    except Exception as exc:
        raise ValidationError(str(exc)) from exc
    v_given = "v" in data and data["v"] is not None
    if v_given:
        v = _vec(data["v"], "v")
        _require(v.shape == (n,), "v: wrong length")
    else:
        v = -gradient(phi, x)
    kappa = float(data["kappa"]) if data.get("kappa") is not None else None
    ell = float(data["ell"]) if data.get("ell") is not None else None
    seed = int(data.get("seed", DEFAULT_SEED))
    sched_data = dict(data.get("schedule") or {})
    sched_data.setdefault("seed", seed)
    try:
        schedule = GridSchedule(**sched_data)
    except TypeError as exc:
        raise ValidationError(f"schedule: {exc}") from exc
    if not problem.check_feasible(x):
        raise ValidationError("base point x is infeasible: F(x) lies outside dom g")
    return ProblemSpec(
        problem=problem,
        x=x,
        v=v,
        v_given=v_given,
        kappa=kappa,
        ell=ell,
        schedule=schedule,
        seed=seed,
        g_payload=dict(data["g"]),
    )


def parse_problem(path: str) -> ProblemSpec:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    return parse_problem_dict(data)


def _monomials_to_strings(p: PolyMap) -> list[list[str]]:
    out = []
    for comp in p.components:
        strs = []
        for coeff, exps in comp:
            factors = [f"{coeff:.12g}"]
            for i, e in enumerate(exps):
                if e == 1:
                    factors.append(f"x{i + 1}")
                elif e > 1:
                    factors.append(f"x{i + 1}^{e}")
            strs.append(" ".join(factors))
        out.append(strs)
    return out


def problem_to_dict(spec: ProblemSpec) -> dict:
    data = {
        "phi": _monomials_to_strings(spec.problem.phi)[0],
        "F": _monomials_to_strings(spec.problem.F),
        "g": spec.g_payload,
        "x": [float(c) for c in spec.x],
        "seed": spec.seed,
    }
    if spec.v_given:
        data["v"] = [float(c) for c in spec.v]
    if spec.kappa is not None:
        data["kappa"] = spec.kappa
    if spec.ell is not None:
        data["ell"] = spec.ell
    sched = spec.schedule
    default = GridSchedule(seed=spec.seed)
    if sched != default:
        data["schedule"] = {
            "t0": sched.t0,
            "ratio": sched.ratio,
            "steps": sched.steps,
            "radius_coeff": sched.radius_coeff,
            "samples_per_axis": sched.samples_per_axis,
            "radius_exponent": sched.radius_exponent,
            "seed": sched.seed,
        }
    return data
