#!/usr/bin/env python3
"""Scan the three-level closed forms over a grid of bath occupations.

For every (n_1, n_2) pair the script reports the stationary unbalance from
the closed form and from the full generator, plus the thermophoretic force of
both configurations.  Useful for eyeballing where the migration changes sign
and how tightly analytics and numerics agree.
"""

import argparse
import sys

from qthermo.davies import liouvillian, steady_state
from qthermo.three_level import (
    ThreeLevelParams,
    lambda_system,
    populations_from_state,
    steady_unbalance,
    thermophoretic_force,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", default="0.5,1,2,3,5", help="comma list of occupations")
    parser.add_argument("--gamma", type=float, default=1.0)
    parser.add_argument("--out", default=None, help="output CSV (default stdout)")
    args = parser.parse_args()

    grid = [float(v) for v in args.grid.split(",")]
    lines = ["n_1,n_2,unbalance,unbalance_numeric,force,force_vee"]
    for n_1 in grid:
        for n_2 in grid:
            lam = ThreeLevelParams.from_occupations("lambda", n_1, n_2, gamma=args.gamma)
            vee = ThreeLevelParams.from_occupations("vee", n_1, n_2, gamma=args.gamma)
            rho = steady_state(liouvillian(lambda_system(lam)))
            numeric = populations_from_state(rho, lam).unbalance
            lines.append(
                ",".join(
                    f"{v + 0.0:.17g}"
                    for v in (
                        n_1,
                        n_2,
                        steady_unbalance(lam),
                        numeric,
                        thermophoretic_force(lam),
                        thermophoretic_force(vee),
                    )
                )
            )
    text = "\n".join(lines) + "\n"
    if args.out is None:
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        worst = max(
            abs(float(line.split(",")[2]) - float(line.split(",")[3])) for line in lines[1:]
        )
        print(f"wrote {args.out}; worst analytic/numeric gap {worst:.3e}")


if __name__ == "__main__":
    main()
