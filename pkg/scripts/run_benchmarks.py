#!/usr/bin/env python3
"""Benchmark table over the bundled models plus generated instances.

For each (model, formula, evaluation) case the script runs the full
pipeline — translation, product, SCC partition, classification, equation
system — then solves at the given evaluation and prints one TSV row with
the size/time statistics and the exact target probability.

Usage:
    python3 scripts/run_benchmarks.py [--seed N] [--chain-sizes 1000,10000]
"""

import argparse
import os
import random
import sys
import time
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from pmcsynth.eqsys import analyze, solve_concrete
from pmcsynth.ltl import parse_formula
from pmcsynth.modelgen import chain_mc, crowds_like, random_mc
from pmcsynth.pmc import Imc, imc_to_pmc, parse_model

MODELS = ROOT / "models"

COLUMNS = ("model", "formula", "|S_M|", "|V_G|", "SCC_G", "SCC_pos", "T_G", "T_mc", "value")


def load(name):
    model = parse_model((MODELS / name).read_text())
    return imc_to_pmc(model) if isinstance(model, Imc) else model


def run_case(name, M, formula_text, evaluation=None):
    """One TSV row.  evaluation=None analyzes only (exact elimination is
    cubic in the largest SCC, so big instances are classified, not solved)."""
    analysis = analyze(M, parse_formula(formula_text))
    t_mc, value = "-", "-"
    if evaluation is not None:
        t0 = time.perf_counter()
        result = solve_concrete(analysis.system, evaluation)
        t_mc = f"{time.perf_counter() - t0:.4f}"
        value = str(result.target)
    t_g = sum(
        analysis.times.get(k, 0.0) for k in ("translate", "product", "scc", "classify")
    )
    row = (
        name,
        formula_text,
        str(M.n_states()),
        str(analysis.graph.n_nodes()),
        str(len(analysis.partition.sccs)),
        str(sum(1 for r in analysis.pos if r.reachable)),
        f"{t_g:.4f}",
        t_mc,
        value,
    )
    print("\t".join(row))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument(
        "--seed",
        type=int,
        default=int(os.environ.get("PMC_SYNTH_SEED", "20260819")),
        help="RNG seed for the generated instances",
    )
    parser.add_argument(
        "--chain-sizes",
        default="1000,10000",
        help="comma-separated chain sizes for the generated sweep rows",
    )
    args = parser.parse_args(argv)
    rng = random.Random(args.seed)
    half = Fraction(1, 2)

    print("\t".join(COLUMNS))
    run_case("split_cycle.pmc", load("split_cycle.pmc"), "G F y", {"eps": Fraction(1, 8)})
    run_case("loop_pair.pmc", load("loop_pair.pmc"), "G F x | G F w", {})
    run_case("branch13.pmc", load("branch13.pmc"), "F success", {})
    run_case(
        "interval_row.imc",
        load("interval_row.imc"),
        "F goal",
        {"p_s_t": half, "p_s_w": half, "p_t_t": Fraction(1), "p_w_w": Fraction(1)},
    )
    run_case("crowds-like", crowds_like(), "G F fresh")
    run_case("random-mc-12", random_mc(rng, 12), "a U b", {})
    for size_text in args.chain_sizes.split(","):
        n = int(size_text)
        run_case(f"chain-{n}", chain_mc(rng, n), "G F a")
    return 0


if __name__ == "__main__":
    sys.exit(main())
