#!/usr/bin/env python3
"""Sweep the oracle schedule on a chosen benchmark and print how the
second-subderivative estimate converges level by level.

Usage: python scripts/oracle_sweep.py [--benchmark a1|irregular|psd] [--steps K]
"""

import argparse

import numpy as np

from epidiff.composite import sampled_objective
from epidiff.core import GridSchedule
from epidiff.numkit import svec
from epidiff.oracle import _second_order_levels, _stabilize
from epidiff.outer import NegSemidefIndicator


def _benchmark(name):
    if name == "a1":
        import sys
        from pathlib import Path

        sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))
        from _instances import a1_problem

        prob = a1_problem()
        return sampled_objective(prob), [0.0, 0.0], [0.0, 1.0], [1.0, 0.0], -2.0, {}
    if name == "irregular":
        def ev(x):
            return abs(x[1] - abs(x[0]) ** (4.0 / 3.0)) - x[0] ** 2

        from epidiff.oracle import SampledFunction

        f = SampledFunction(
            ev, 2, "irregular",
            batch_evaluator=lambda X: np.abs(X[:, 1] - np.abs(X[:, 0]) ** (4 / 3)) - X[:, 0] ** 2,
        )
        opts = {"radius_coeff": 1.5, "radius_exponent": 1.0 / 3.0, "steps": 21}
        return f, [0.0, 0.0], [0.0, 0.0], [1.0, 0.0], -2.0, opts
    if name == "psd":
        g = NegSemidefIndicator(2)
        from epidiff.oracle import SampledFunction

        f = SampledFunction(
            lambda p: g.value(p), g.ambient_dim, "psd",
            batch_evaluator=g.value_batch,
            restore_feasible=lambda p: g.domain_project(p),
        )
        A = np.diag([0.0, -1.0])
        V = np.diag([1.0, 0.0])
        W = np.array([[0.0, 1.0], [1.0, 0.0]])
        return f, svec(A), svec(V), svec(W), 2.0, {}
    raise SystemExit(f"unknown benchmark {name!r}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--benchmark", default="a1", choices=["a1", "irregular", "psd"])
    parser.add_argument("--steps", type=int, default=None)
    args = parser.parse_args()
    f, x, v, w, target, opts = _benchmark(args.benchmark)
    if args.steps is not None:
        opts["steps"] = args.steps
    sched = GridSchedule(**opts)
    levels = _second_order_levels(f, x, v, w, sched)
    print(f"benchmark {args.benchmark}: target {target}")
    print(f"{'t':>12s} {'level min':>14s}")
    for t, m, _ in levels:
        print(f"{t:12.3e} {m:14.6f}")
    est = _stabilize(levels, sched)
    print(f"stabilized estimate: {est}  (target {target})")


if __name__ == "__main__":
    main()
