#!/usr/bin/env python3
"""Run the three connectivity case studies and write CSV plus SVG charts.

    python3 scripts/run_cases.py --out results/cases --seeds 10
"""

import argparse
import sys

from gstrsim.cli import main


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="results/cases")
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--densities", default="40,80,120,160,200")
    p.add_argument("--protocols", default="gstr,gpsr,tgpsr,gtlr")
    p.add_argument("--parallel", type=int, default=1)
    return p.parse_args(argv)


if __name__ == "__main__":
    a = parse_args()
    sys.exit(main(["cases", "--out", a.out, "--seeds", str(a.seeds), "--densities", a.densities,
                   "--protocols", a.protocols, "--parallel", str(a.parallel)]))
