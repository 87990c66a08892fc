#!/usr/bin/env python3
"""Drive the CLI over the bundled fixture problems and summarize the results.

Usage: python scripts/run_fixture_suite.py [--seed N]
"""

import argparse
import json
import sys
import time
from pathlib import Path

from epidiff.cli import run

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

PLAN = [
    ("a1_parabola.json", ["analyze", "verify", "check-cq"]),
    ("plq_abs.json", ["analyze", "verify"]),
    ("psd_cone.json", ["analyze"]),
    ("parabola_min.json", ["certify", "check-cq"]),
    ("min_quartic.json", ["certify"]),
    ("mscq_fail.json", ["check-cq"]),
]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()
    failures = 0
    for fixture, commands in PLAN:
        path = str(FIXTURES / fixture)
        for command in commands:
            argv = [command, path]
            if args.seed is not None:
                argv += ["--seed", str(args.seed)]
            start = time.time()
            code, text = run(argv)
            elapsed = time.time() - start
            summary = ""
            if "--- machine readable ---" in text:
                block = json.loads(text.split("--- machine readable ---")[1])
                if command == "analyze":
                    duals = [d["dual"] for d in block.get("directions", [])]
                    summary = f"tau={block.get('tau')} duals={duals}"
                elif command == "verify":
                    rows = block.get("directions", [])
                    summary = f"{sum(r['converged'] for r in rows)}/{len(rows)} converged"
                elif command == "certify":
                    summary = (
                        f"ssosc={block['ssosc']['holds']} "
                        f"sms={block['sms_certificate']['affirmative']}"
                    )
                else:
                    summary = (
                        f"mscq={block['mscq']['holds_evidence']} "
                        f"kappa_hat={block['mscq']['kappa_hat']:.3g}"
                    )
            status = "ok" if code in (0, 1) else f"exit {code}"
            # exit 1 marks a numerical disagreement: surface it
            if code == 1:
                status = "DISAGREEMENT"
                failures += 1
            print(f"{fixture:22s} {command:9s} [{status}] {elapsed:6.2f}s  {summary}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
