#!/usr/bin/env python3
"""Tabulate the terminal-block reductions: sparsest cut vs m/(m + maxcut),
and the audited block properties used by the powering soundness argument."""

import os
import sys
from fractions import Fraction

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from treecut.generators import MaxCutInstance, building_block
from treecut.oracle import audit_cuts, exact_maxcut, exact_sparsest_cut

NAMES = ["p3", "k3", "c5", "k4", "k5", "p5"]


def main():
    print(f"{'H':>4} {'m':>3} {'mc':>3} {'phi':>8} {'m/(m+mc)':>9} "
          f"{'min adm cap':>11} {'gamma':>7} {'inadm':>7}")
    for name in NAMES:
        H = MaxCutInstance.named(name)
        _, mc = exact_maxcut(H)
        with_st, _ = building_block(H, include_st_demand=True)
        _, sp = exact_sparsest_cut(with_st)
        block, _ = building_block(H, include_st_demand=False)
        audit = audit_cuts(block)
        formula = Fraction(H.m, H.m + mc)
        assert sp.ratio == formula
        print(f"{name:>4} {H.m:>3} {mc:>3} {str(sp.ratio):>8} {str(formula):>9} "
              f"{str(audit.min_admissible_capacity[1]):>11} {str(audit.gamma()):>7} "
              f"{str(audit.max_inadmissible_ratio[1]):>7}")


if __name__ == "__main__":
    main()
