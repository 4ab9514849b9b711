"""Exact V values for the stretched two-point family by exhaustive search.

mu = (delta at -(1+s) + delta at (1+s))/2 against nu = (delta at -1 +
delta at 1)/2.  The closed form is V = -max(s, 0): the family is ordered
up to s = 0 and separates linearly beyond it.  Small ball grids make the
enumeration exact enough to serve as ground truth for the samplers.
"""
import argparse
import sys

import numpy as np

from convexorder.families import two_point_pair
from convexorder.order import brute_force_v, make_ball_grid


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--spreads", type=float, nargs="+",
        default=list(np.round(np.arange(-0.5, 1.01, 0.25), 2)),
    )
    parser.add_argument("--grid-partitions", type=int, default=3)
    parser.add_argument("--support-size", type=int, default=2)
    parser.add_argument("--weight-step", type=float, default=0.05)
    parser.add_argument("--out", default="-", help="output CSV ('-' = stdout)")
    args = parser.parse_args(argv)

    grid = make_ball_grid(1, args.grid_partitions)
    lines = ["s,v_exact"]
    for s in args.spreads:
        mu, nu = two_point_pair(s)
        v, witness = brute_force_v(
            mu, nu, grid,
            support_size=args.support_size, weight_step=args.weight_step,
        )
        lines.append(f"{s!r},{v!r}")
        atoms = ", ".join(
            f"{w:.2f}@{p[0]:+.2f}" for p, w in zip(witness.points, witness.weights)
        )
        print(f"s={s:+.2f} v={v:+.4f} witness [{atoms}]", file=sys.stderr)

    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
