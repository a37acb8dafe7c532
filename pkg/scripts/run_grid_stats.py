#!/usr/bin/env python3
"""Reproduce the grid strategy-matrix statistics.

Runs standard, DRA, DRS, and DRA+DRS on both clause-order variants of the
tabled path program over a depth-N grid, prints the counter tables, and
summarizes the ratios the acceptance gate checks.  With --with-slds it also
runs the sld-instrumented program pair and reports the per-call-site ratios.

Depth 40 takes a few minutes on one core; use a smaller depth for a quick
look at the shape of the numbers.
"""

import argparse
import sys

from lintab.bench import BenchSpec, GraphConfig, run_matrix
from lintab.engine import StrategyConfig

STD = StrategyConfig()
DRA = StrategyConfig(dra=True)
DRS = StrategyConfig(drs=True)
DRADRS = StrategyConfig(dra=True, drs=True)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--depth", type=int, default=40)
    ap.add_argument("--with-slds", action="store_true")
    ap.add_argument("--bound", action="store_true", help="query path(1,Z) instead of path(X,Z)")
    args = ap.parse_args(argv)

    graph = GraphConfig("grid", args.depth)
    for variant in ("recursive_first", "recursive_last"):
        report = run_matrix(
            BenchSpec(graph, variant=variant, bound=args.bound,
                      configs=(STD, DRA, DRS, DRADRS))
        )
        print(report.render_text())
        std, dra, drs = (report.cell(c).stats for c in (STD, DRA, DRS))
        print(f"  Alts(standard)/Alts(DRA) = {std.alts_explored / dra.alts_explored:.3f}")
        print(f"  Sols(standard)/Sols(DRS) = "
              f"{std.nonleader_sols_consumed / drs.nonleader_sols_consumed:.3f}")
        print()

    if args.with_slds:
        report = run_matrix(
            BenchSpec(graph, with_slds=True, bound=args.bound, configs=(STD, DRA))
        )
        print(report.render_text())
        std = report.cell(STD).stats.sld_calls
        dra = report.cell(DRA).stats.sld_calls
        for site in ("sld3/0", "sld4/0"):
            print(f"  {site}: standard {std[site]} vs DRA {dra[site]} "
                  f"(ratio {std[site] / dra[site]:.3f})")
    return 0


if __name__ == "__main__":
    sys.exit(main())
