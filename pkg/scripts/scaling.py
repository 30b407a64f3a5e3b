#!/usr/bin/env python3
"""Product build-time scaling sweep.

Generates sparse random chains across a range of sizes, builds the
automaton product for a fixed recurrence formula, and prints a TSV of
(states, product nodes, product arcs, build seconds).  Finishes with the
fitted log-log slope and R^2, which should be close to linear (slope about
1, R^2 above 0.9) since the build is proportional to the arc count.

Usage:
    python3 scripts/scaling.py [--seed N] [--sizes 100,1000,10000]
                               [--formula "G F a"] [--repeats 2]
"""

import argparse
import math
import os
import random
import statistics
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from pmcsynth.gba import translate
from pmcsynth.ltl import atomic_props, parse_formula
from pmcsynth.modelgen import chain_mc
from pmcsynth.product import build_product

DEFAULT_SIZES = "100,316,1000,3162,10000,31623,100000"


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--seed",
        type=int,
        default=int(os.environ.get("PMC_SYNTH_SEED", "20260819")),
        help="RNG seed for chain generation",
    )
    parser.add_argument("--sizes", default=DEFAULT_SIZES, help="comma-separated state counts")
    parser.add_argument("--formula", default="G F a", help="formula whose tableau is multiplied in")
    parser.add_argument("--repeats", type=int, default=2, help="builds per size (best time kept)")
    args = parser.parse_args(argv)

    formula = parse_formula(args.formula)
    A = translate(formula, ap=tuple(sorted(atomic_props(formula))))
    rng = random.Random(args.seed)

    print("\t".join(("states", "nodes", "arcs", "build_s")))
    arcs, times = [], []
    for size_text in args.sizes.split(","):
        n = int(size_text)
        M = chain_mc(rng, n)
        best = math.inf
        for _ in range(max(1, args.repeats)):
            t0 = time.perf_counter()
            G = build_product(A, M)
            best = min(best, time.perf_counter() - t0)
        arcs.append(G.n_arcs())
        times.append(best)
        print(f"{n}\t{G.n_nodes()}\t{G.n_arcs()}\t{best:.4f}")

    if len(arcs) >= 3:
        xs = [math.log(a) for a in arcs]
        ys = [math.log(t) for t in times]
        slope = statistics.covariance(xs, ys) / statistics.variance(xs)
        r2 = statistics.correlation(xs, ys) ** 2
        print(f"# log-log slope = {slope:.3f}, R^2 = {r2:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
