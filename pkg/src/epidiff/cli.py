"""Command-line surface: problem ingestion, command dispatch, and report
emission.

Reports are printed as human-readable text followed by a machine-readable
JSON block (sorted keys, 12-significant-digit floats), so identical inputs and
seeds produce byte-identical output.  Exit codes: 0 all checks pass, 1
numerical disagreement, 2 precondition failure, 3 parse/validation error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import composite, optimality
from .core import GridSchedule
from .errors import (
    BasePointInfeasible,
    EmptyMultiplierSet,
    EpidiffError,
    NotStationary,
    ParseError,
    UnsupportedSpectralMultiplicity,
    ValidationError,
)
from .extreal import ExtReal
from .oracle import check_parabolic_regularity, check_twice_epi_diff
from .optimality import sample_critical_directions
from .problem_io import ProblemSpec, parse_problem

GAP_TOL_ABS = 0.05


def _jsonify(obj):
    if isinstance(obj, ExtReal):
        return "+inf" if obj.is_plus_inf else _jsonify(obj.value)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "+inf" if x > 0 else "-inf"
        return float(f"{x:.12g}") + 0.0  # +0.0 folds away negative zero
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


@dataclass
class Report:
    command: str
    payload: dict = field(default_factory=dict)
    exit_code: int = 0

    def render(self) -> str:
        lines = [f"epidiff {self.command}"]
        lines.extend(_render_block(self.payload, indent=2))
        lines.append("--- machine readable ---")
        lines.append(json.dumps(_jsonify(self.payload), sort_keys=True, indent=2))
        return "\n".join(lines)


def _render_block(data, indent=0) -> list[str]:
    pad = " " * indent
    lines = []
    for key, val in data.items():
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_render_block(val, indent + 2))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{pad}{key}:")
            for item in val:
                lines.append(f"{pad}  -")
                lines.extend(_render_block(item, indent + 4))
        else:
            lines.append(f"{pad}{key}: {json.dumps(_jsonify(val))}")
    return lines


def _next_pow2(x: float) -> float:
    if x <= 0:
        return 0.0
    return float(2.0 ** math.ceil(math.log2(x))) if x > 1e-12 else 0.0


def _resolve_kappa(spec: ProblemSpec, seed: int):
    """User-supplied kappa wins; otherwise the empirical modulus rounded up to
    the next power of two, with its provenance recorded."""
    if spec.kappa is not None:
        return spec.kappa, "user-asserted", None
    mscq = composite.check_mscq(spec.problem, spec.x, n_samples=120, radius=0.25, seed=seed)
    kappa = max(_next_pow2(mscq.kappa_hat), 1e-6)
    prov = "verified-empirically" if mscq.holds_evidence else "failed-empirically"
    return kappa, prov, mscq


def _direction_set(spec: ProblemSpec, ms, seed: int, n_random: int = 8, off_cone: int = 0):
    """The default probing set: extreme rays plus seeded random unit critical
    directions, with optional off-cone probes for the PlusInf branch."""
    prob, x, v = spec.problem, spec.x, spec.v
    cone = composite.critical_cone(prob, x, v, ms)
    dirs = sample_critical_directions(prob, x, v, ms, cone, n_random, seed)
    rng = np.random.default_rng(seed + 1)
    off: list[np.ndarray] = []
    attempts = 0
    while len(off) < off_cone and attempts < 60 * max(1, off_cone):
        attempts += 1
        s = rng.standard_normal(prob.n)
        s /= max(float(np.linalg.norm(s)), 1e-300)
        if not cone.contains(s):
            off.append(s)
    kept: list[np.ndarray] = []
    for d in dirs + off:
        if all(np.max(np.abs(d - k)) > 1e-9 for k in kept):
            kept.append(d)
    return kept, cone


def _parse_dirs(raw_dirs, n) -> list[np.ndarray]:
    out = []
    for raw in raw_dirs or []:
        try:
            vec = np.array([float(t) for t in raw.split(",")], dtype=float)
        except ValueError as exc:
            raise ValidationError(f"--dir {raw!r}: expected comma-separated floats") from exc
        if vec.shape != (n,):
            raise ValidationError(f"--dir {raw!r}: expected {n} components")
        out.append(vec)
    return out


def _gap_tol(value: ExtReal) -> float:
    if value.is_plus_inf:
        return GAP_TOL_ABS
    return max(GAP_TOL_ABS, 0.05 * abs(value.value))


# -- commands -----------------------------------------------------------------


def cmd_analyze(spec: ProblemSpec, raw_dirs, seed: int) -> Report:
    prob, x, v = spec.problem, spec.x, spec.v
    kappa, prov, _ = _resolve_kappa(spec, seed)
    ms = composite.multipliers(prob, x, v, kappa=kappa, ell=spec.ell)
    if ms.is_empty:
        return Report(
            "analyze",
            {"error": "v is not a subgradient of g(F(.)) at x", "multipliers": []},
            exit_code=2,
        )
    dirs = _parse_dirs(raw_dirs, prob.n)
    if not dirs:
        dirs, _ = _direction_set(spec, ms, seed)
    cone = composite.critical_cone(prob, x, v, ms)
    results = []
    worst_gap = 0.0
    for w in dirs:
        info = composite.second_subderivative_chain(
            prob, x, v, w, kappa=kappa, ell=spec.ell,
            sched=spec.schedule, multys=ms, mscq_provenance=prov,
        )
        entry = {
            "direction": w,
            "dual": info.dual_value,
            "primal": info.primal_value,
            "gap": info.gap if math.isfinite(info.gap) else 0.0,
            "argmax_y": info.argmax_y if info.argmax_y is not None else None,
            "provenance": "closed-form" if info.primal_exact else "numeric-fallback",
        }
        if info.dual_value.is_plus_inf:
            entry["reason"] = "outside critical cone"
        else:
            worst_gap = max(worst_gap, info.gap if math.isfinite(info.gap) else math.inf)
        results.append(entry)
    tol = max(_gap_tol(r["dual"]) for r in results) if results else GAP_TOL_ABS
    payload = {
        "multipliers": [m for m in ms.multipliers],
        "tau": ms.tau,
        "kappa": kappa,
        "mscq": prov,
        "critical_cone": cone.description,
        "directions": results,
        "seed": seed,
        "tolerances": {"gap": tol},
    }
    return Report("analyze", payload, exit_code=0 if worst_gap <= tol else 1)


def cmd_verify(spec: ProblemSpec, raw_dirs, seed: int, sched: GridSchedule) -> Report:
    prob, x, v = spec.problem, spec.x, spec.v
    kappa, prov, _ = _resolve_kappa(spec, seed)
    ms = composite.multipliers(prob, x, v, kappa=kappa, ell=spec.ell)
    if ms.is_empty:
        return Report("verify", {"error": "v is not a subgradient of g(F(.)) at x"}, exit_code=2)
    dirs = _parse_dirs(raw_dirs, prob.n)
    if not dirs:
        dirs, _ = _direction_set(spec, ms, seed, off_cone=2)
    break_offset = float(os.environ.get("EPIDIFF_BREAK_FORMULA", "0") or 0)

    def formula(w):
        val, _ = composite.chain_dual_value(prob, x, v, w, ms)
        if break_offset and val.is_finite:
            return ExtReal(val.value + break_offset)
        return val

    f = composite.sampled_objective(prob)
    reports = check_twice_epi_diff(f, x, v, dirs, sched, formula)
    rows = []
    all_ok = True
    for rep in reports:
        tol = _gap_tol(rep.formula_value)
        ok = rep.converged and (not math.isfinite(rep.gap) or rep.gap <= tol)
        row = {
            "direction": rep.direction,
            "formula": rep.formula_value,
            "oracle": rep.oracle_value,
            "gap": rep.gap if math.isfinite(rep.gap) else "+inf",
            "converged": rep.converged,
            "tolerance": tol,
        }
        if rep.formula_value.is_finite:
            try:
                holds, lhs, rhs = check_parabolic_regularity(
                    f, x, v, rep.direction, sched, lhs=rep.oracle_value
                )
                row["parabolic_regularity"] = {"holds": holds, "lhs": lhs, "rhs": rhs}
                ok = ok and holds
            except EpidiffError as exc:
                row["parabolic_regularity"] = {"holds": False, "error": str(exc)}
                ok = False
        all_ok = all_ok and ok
        rows.append(row)
    payload = {
        "directions": rows,
        "mscq": prov,
        "kappa": kappa,
        "schedule": {
            "t0": sched.t0, "ratio": sched.ratio, "steps": sched.steps,
            "radius_coeff": sched.radius_coeff, "radius_exponent": sched.radius_exponent,
        },
        "seed": seed,
    }
    return Report("verify", payload, exit_code=0 if all_ok else 1)


def cmd_certify(spec: ProblemSpec, seed: int) -> Report:
    prob, x = spec.problem, spec.x
    kappa, prov, _ = _resolve_kappa(spec, seed)
    try:
        sonc = optimality.check_sonc(prob, x, seed=seed, kappa=kappa)
        ssosc = optimality.check_ssosc(prob, x, seed=seed, kappa=kappa)
    except NotStationary as exc:
        return Report("certify", {"error": f"not stationary: {exc}"}, exit_code=2)
    growth_rows = []
    consistent = True
    if ssosc.holds and ssosc.worst_value.is_finite:
        ell = 0.5 * ssosc.worst_value.value
        for eps in (0.1, 0.05, 0.01):
            rep = optimality.verify_growth(prob, x, ell=ell, epsilon=eps, n_samples=2000, seed=seed)
            growth_rows.append(
                {"ell": ell, "epsilon": eps, "samples": rep.samples, "violations": rep.violations}
            )
        consistent = growth_rows[-1]["violations"] == 0
    else:
        rep = optimality.verify_growth(prob, x, ell=0.1, epsilon=0.1, n_samples=1000, seed=seed)
        growth_rows.append(
            {"ell": 0.1, "epsilon": 0.1, "samples": rep.samples, "violations": rep.violations}
        )
    cert = optimality.sms_certificate(prob, x, seed=seed, kappa=kappa, mscq_provenance=prov)
    payload = {
        "sonc": {
            "holds": sonc.holds,
            "worst_value": sonc.worst_value,
            "worst_direction": sonc.worst_direction,
            "directions_tested": sonc.directions_tested,
            "method": sonc.method,
        },
        "ssosc": {
            "holds": ssosc.holds,
            "worst_value": ssosc.worst_value,
            "worst_direction": ssosc.worst_direction,
            "directions_tested": ssosc.directions_tested,
            "method": ssosc.method,
        },
        "growth": growth_rows,
        "sms_certificate": {
            "affirmative": cert.affirmative,
            "note": cert.equivalence_note,
            "assumptions": cert.assumptions,
        },
        "mscq": prov,
        "kappa": kappa,
        "seed": seed,
        "tolerances": {"sonc": 1e-6, "ssosc": 1e-6, "growth_slack": 1e-9},
    }
    return Report("certify", payload, exit_code=0 if consistent else 1)


def cmd_check_cq(spec: ProblemSpec, n_samples: int, radius: float, seed: int) -> Report:
    prob, x = spec.problem, spec.x
    mscq = composite.check_mscq(prob, x, n_samples=n_samples, radius=radius, seed=seed)
    try:
        basic = composite.check_basic_cq(prob, x)
    except UnsupportedSpectralMultiplicity as exc:
        basic = f"unsupported: {exc}"
    payload = {
        "mscq": {
            "holds_evidence": mscq.holds_evidence,
            "kappa_hat": mscq.kappa_hat,
            "worst_point": mscq.worst_point,
            "samples": mscq.samples,
            "ratios_by_radius": mscq.ratios_by_radius,
        },
        "basic_cq": basic,
        "seed": seed,
    }
    return Report("check-cq", payload, exit_code=0)


# -- dispatch ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epidiff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    pa = sub.add_parser("analyze", help="multipliers, tau, and the chain-rule values")
    pa.add_argument("file")
    pa.add_argument("--dir", action="append", help="direction as comma-separated floats")
    pa.add_argument("--seed", type=int)
    pv = sub.add_parser("verify", help="closed forms against the difference-quotient oracle")
    pv.add_argument("file")
    pv.add_argument("--dir", action="append")
    pv.add_argument("--t0", type=float)
    pv.add_argument("--ratio", type=float)
    pv.add_argument("--steps", type=int)
    pv.add_argument("--seed", type=int)
    pc = sub.add_parser("certify", help="second-order optimality certificates")
    pc.add_argument("file")
    pc.add_argument("--seed", type=int)
    pq = sub.add_parser("check-cq", help="constraint-qualification evidence")
    pq.add_argument("file")
    pq.add_argument("--samples", type=int, default=240)
    pq.add_argument("--radius", type=float, default=0.25)
    pq.add_argument("--seed", type=int)
    return parser


def run(argv=None) -> tuple[int, str]:
    args = build_parser().parse_args(argv)
    try:
        spec = parse_problem(args.file)
    except (ParseError, ValidationError) as exc:
        return 3, f"error: {exc}"
    seed = spec.seed
    if getattr(args, "seed", None) is not None:
        seed = args.seed
    env_seed = os.environ.get("EPIDIFF_SEED")
    if env_seed:
        seed = int(env_seed)
    try:
        if args.command == "analyze":
            report = cmd_analyze(spec, args.dir, seed)
        elif args.command == "verify":
            sched_kwargs = {"seed": seed}
            base = spec.schedule
            for name in ("t0", "ratio", "steps"):
                val = getattr(args, name)
                sched_kwargs[name] = val if val is not None else getattr(base, name)
            sched = GridSchedule(
                radius_coeff=base.radius_coeff,
                samples_per_axis=base.samples_per_axis,
                radius_exponent=base.radius_exponent,
                **sched_kwargs,
            )
            report = cmd_verify(spec, args.dir, seed, sched)
        elif args.command == "certify":
            report = cmd_certify(spec, seed)
        else:
            report = cmd_check_cq(spec, args.samples, args.radius, seed)
    except (ValidationError, ParseError) as exc:
        return 3, f"error: {exc}"
    except (NotStationary, BasePointInfeasible, EmptyMultiplierSet) as exc:
        return 2, f"error: {exc}"
    except EpidiffError as exc:
        return 2, f"error: {exc}"
    return report.exit_code, report.render()


def main(argv=None) -> int:
    code, text = run(argv)
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
