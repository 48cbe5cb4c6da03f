#!/usr/bin/env python3
"""Protocol comparison over vehicle density, printed as a table of seed means.

    python3 scripts/density_sweep.py --case multi_connected --seeds 5 --csv sweep.csv
"""

import argparse
from collections import defaultdict
from statistics import mean

from gstrsim import ScenarioConfig, SweepSpec
from gstrsim.cli import run_sweep
from gstrsim.config import CASES, PROTOCOLS
from gstrsim.metrics import write_records


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--case", choices=CASES, default="multi_connected")
    p.add_argument("--densities", type=int, nargs="+", default=[40, 80, 120, 160, 200])
    p.add_argument("--protocols", nargs="+", choices=PROTOCOLS, default=list(PROTOCOLS))
    p.add_argument("--seeds", type=int, default=5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--parallel", type=int, default=1)
    p.add_argument("--csv", help="also write the raw records here")
    args = p.parse_args(argv)

    spec = SweepSpec(densities=args.densities, protocols=args.protocols, cases=[args.case],
                     seeds_per_point=args.seeds, base=ScenarioConfig(seed=args.seed))
    records = run_sweep(spec, args.parallel)
    if args.csv:
        write_records(records, args.csv)

    groups = defaultdict(list)
    for r in records:
        groups[(r.protocol, r.num_nodes)].append(r)
    print(f"case={args.case}, {args.seeds} seeds per point")
    print(f"{'protocol':<8} {'nodes':>5} {'delivery':>9} {'hops':>7} {'delay_s':>9}")
    for (proto, n), rs in sorted(groups.items()):
        print(f"{proto:<8} {n:>5} {mean(r.delivery_ratio for r in rs):>9.3f} "
              f"{mean(r.avg_hops for r in rs):>7.3f} {mean(r.avg_e2e_delay for r in rs):>9.3f}")


if __name__ == "__main__":
    main()
