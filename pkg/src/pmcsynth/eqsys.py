"""Equation system over the product graph, exact solving, and grid synthesis.

For a product node (q, s) the variable mu(q, s) is the probability that the
chain started in s emits a word accepted by the automaton started in q.  The
system asserts, for every node,

    mu(q,s)  =  sum_{s'} P(s,s') * sum_{q' in T(q, L(s))} mu(q',s')     (flow)

together with, for every locally positive SCC C and chain state s in its
projection,  sum_{q : (q,s) in C} mu(q,s) = 1  (the automaton is almost
fully partitioned, so from a state of a positive bottom component the
acceptance probabilities of the subset states add up to one), and mu = 0 on
every other bottom SCC of the product.  The probability of the property is
the sum of mu over initial product nodes.

Concrete evaluations are solved exactly over Fractions, block per SCC along
the condensation (sinks first), substituting solved blocks into earlier
ones; uniqueness and consistency are checked per block rather than assumed.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .gba import Gba, translate
from .ltl import LtlFormula, atomic_props, parse_formula
from .pmc import Evaluation, Pmc, well_defined
from .product import (
    ProductGraph,
    SccPartition,
    SccRecord,
    build_product,
    classify_locally_positive,
    scc_decompose,
)
from .ratfunc import RationalFunction


class EqSysError(Exception):
    pass


class SolveError(EqSysError):
    pass


class IllDefinedEvaluationError(SolveError):
    def __init__(self, problems: Sequence[str]):
        super().__init__("evaluation does not induce a Markov chain:\n  " + "\n  ".join(problems))
        self.problems = tuple(problems)


class SingularSystemError(SolveError):
    pass


class InconsistentSystemError(SolveError):
    pass


class QuerySyntaxError(EqSysError):
    pass


class GridError(EqSysError):
    pass


# ---------------------------------------------------------------------------
# Queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PltlQuery:
    """P-operator query: is the probability of ``formula`` inside the interval?"""

    formula: LtlFormula
    lo: Fraction
    hi: Fraction
    lo_strict: bool = False
    hi_strict: bool = False

    def admits(self, value: Fraction) -> bool:
        if value < self.lo or (self.lo_strict and value == self.lo):
            return False
        if value > self.hi or (self.hi_strict and value == self.hi):
            return False
        return True

    def interval_str(self) -> str:
        return (
            ("(" if self.lo_strict else "[")
            + f"{self.lo}, {self.hi}"
            + (")" if self.hi_strict else "]")
        )


def _fraction_literal(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise QuerySyntaxError(f"bad probability bound {text.strip()!r}: {exc}") from None


def parse_pltl(text: str) -> PltlQuery:
    """Parse 'P >= 1/2 [ phi ]', 'P < 0.3 [ phi ]', or 'P in [a,b] [ phi ]'
    (interval delimiters may be strict: '(' / ')')."""
    s = text.strip()
    if not s.startswith("P"):
        raise QuerySyntaxError("query must start with 'P'")
    rest = s[1:].lstrip()
    lo = hi = None
    lo_strict = hi_strict = False
    matched_op = None
    for op in (">=", "<=", ">", "<"):
        if rest.startswith(op):
            matched_op = op
            rest = rest[len(op):].lstrip()
            break
    if matched_op is not None:
        # bound runs until the '[' that opens the formula
        cut = rest.find("[")
        if cut < 0:
            raise QuerySyntaxError("missing '[ formula ]'")
        c = _fraction_literal(rest[:cut])
        rest = rest[cut:]
        if matched_op == ">=":
            lo, hi = c, Fraction(1)
        elif matched_op == ">":
            lo, hi, lo_strict = c, Fraction(1), True
        elif matched_op == "<=":
            lo, hi = Fraction(0), c
        else:
            lo, hi, hi_strict = Fraction(0), c, True
    elif rest.startswith("in"):
        rest = rest[2:].lstrip()
        if not rest or rest[0] not in "([":
            raise QuerySyntaxError("expected '(' or '[' after 'in'")
        lo_strict = rest[0] == "("
        comma = rest.find(",")
        if comma < 0:
            raise QuerySyntaxError("expected ',' in the probability interval")
        lo = _fraction_literal(rest[1:comma])
        rest = rest[comma + 1:]
        close = min((i for i in (rest.find(")"), rest.find("]")) if i >= 0), default=-1)
        if close < 0:
            raise QuerySyntaxError("unterminated probability interval")
        hi = _fraction_literal(rest[:close])
        hi_strict = rest[close] == ")"
        rest = rest[close + 1:].lstrip()
    else:
        raise QuerySyntaxError("expected one of >=, >, <=, <, in after 'P'")

    if lo > hi or (lo == hi and (lo_strict or hi_strict)):
        raise QuerySyntaxError(f"empty probability interval [{lo}, {hi}]")
    if not rest.startswith("["):
        raise QuerySyntaxError("missing '[ formula ]'")
    end = rest.rfind("]")
    if end < 0:
        raise QuerySyntaxError("missing closing ']'")
    if rest[end + 1:].strip():
        raise QuerySyntaxError(f"trailing input after ']': {rest[end + 1:].strip()!r}")
    formula = parse_formula(rest[1:end])
    return PltlQuery(formula, lo, hi, lo_strict, hi_strict)


# ---------------------------------------------------------------------------
# System construction
# ---------------------------------------------------------------------------


@dataclass
class EquationSystem:
    graph: ProductGraph
    partition: SccPartition
    pos: list[SccRecord]
    neg: list[SccRecord]
    # per node: ((P(s,s'), (successor nodes over s')), ...)
    flow: list[tuple[tuple[RationalFunction, tuple[int, ...]], ...]]
    # per positive SCC and chain state: the member nodes over that state
    positives: list[tuple[int, int, tuple[int, ...]]]
    # nodes whose value is 0: everything that cannot reach a positive SCC
    zeros: tuple[int, ...]
    targets: tuple[int, ...]

    def n_nodes(self) -> int:
        return len(self.flow)


def build_system(
    G: ProductGraph,
    partition: SccPartition | None = None,
    use_oracle: bool | None = None,
    oracle_budget: int = 200_000,
) -> EquationSystem:
    """Assemble the full system (all nodes, all bottom SCCs, reachable or not)."""
    if partition is None:
        partition = scc_decompose(G)
    pos, neg = classify_locally_positive(
        G,
        partition,
        use_oracle=use_oracle,
        include_unreachable=True,
        oracle_budget=oracle_budget,
    )
    A, M = G.gba, G.pmc
    ns = M.n_states()
    flow: list[tuple[tuple[RationalFunction, tuple[int, ...]], ...]] = []
    for u in range(G.n_nodes()):
        q, s = divmod(u, ns)
        qsuccs = A.transitions.get((q, G.letters[s]), ())
        if qsuccs:
            flow.append(
                tuple(
                    (f, tuple(q2 * ns + t for q2 in qsuccs)) for t, f in M.succ(s)
                )
            )
        else:
            flow.append(())
    positives = []
    for record in pos:
        per_state: dict[int, list[int]] = {}
        for u in record.members:
            per_state.setdefault(u % ns, []).append(u)
        for s in sorted(per_state):
            positives.append((record.index, s, tuple(sorted(per_state[s]))))

    # A node has value 0 exactly when no positive SCC is reachable from it
    # (the node-level form of the emptiness criterion).  Zeroing only the
    # bottom SCCs is not enough: a non-accepting self-loop over an absorbing
    # chain state leaves its flow row degenerate (0 = 0) even though every
    # sibling below it is 0, so the value has to be pinned here.
    pos_indices = {record.index for record in pos}
    reaches_pos = [False] * len(partition.sccs)
    for record in reversed(partition.sccs):
        i = record.index
        reaches_pos[i] = i in pos_indices or any(
            reaches_pos[j] for j in partition.succ[i]
        )
    zeros = tuple(
        u
        for record in partition.sccs
        if not reaches_pos[record.index]
        for u in record.members
    )
    return EquationSystem(G, partition, pos, neg, flow, positives, zeros, G.initial)


# ---------------------------------------------------------------------------
# Exact solving
# ---------------------------------------------------------------------------


@dataclass
class SolveResult:
    mu: dict[int, Fraction]
    target: Fraction
    restricted: frozenset[int]


def _gauss_consistent(rows: list[list[Fraction]], n_vars: int, what: str) -> list[Fraction]:
    """Solve a possibly overdetermined system [A | b]; require a unique,
    consistent solution."""
    m = len(rows)
    pivot_row = 0
    where = [-1] * n_vars
    for col in range(n_vars):
        p = next((r for r in range(pivot_row, m) if rows[r][col] != 0), None)
        if p is None:
            continue
        rows[pivot_row], rows[p] = rows[p], rows[pivot_row]
        inv = 1 / rows[pivot_row][col]
        rows[pivot_row] = [v * inv for v in rows[pivot_row]]
        for r in range(m):
            if r != pivot_row and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [v - f * w for v, w in zip(rows[r], rows[pivot_row])]
        where[col] = pivot_row
        pivot_row += 1
    if any(w < 0 for w in where):
        raise SingularSystemError(f"{what}: system does not determine all unknowns")
    for r in range(pivot_row, m):
        if rows[r][n_vars] != 0:
            raise InconsistentSystemError(f"{what}: equations are inconsistent")
    return [rows[where[c]][n_vars] for c in range(n_vars)]


def solve_concrete(
    system: EquationSystem, evaluation: Evaluation, restrict: bool = True
) -> SolveResult:
    """Exact solution under a total evaluation.

    By default only the forward closure of the initial and positive nodes is
    solved — enough for the target.  ``restrict=False`` solves every node,
    which is what a full model for the emitted SMT system needs.
    """
    G = system.graph
    M = G.pmc
    report = well_defined(M, evaluation)
    if not report.ok:
        raise IllDefinedEvaluationError(report.problems)

    prob: dict[tuple[int, int], Fraction] = {
        key: f.evaluate(evaluation).value() for key, f in M.trans.items()
    }
    ns = M.n_states()

    # numeric flow rows, built lazily per node
    def flow_terms(u: int) -> list[tuple[int, Fraction]]:
        s = u % ns
        out = []
        for f, targets_ in system.flow[u]:
            t = targets_[0] % ns
            c = prob[(s, t)]
            for v in targets_:
                out.append((v, c))
        return out

    # restricted node set: forward closure of initial + positive members
    if restrict:
        seeds = list(system.targets)
        for record in system.pos:
            seeds.extend(record.members)
        restricted: set[int] = set(seeds)
        stack = list(restricted)
        offsets, targets_arr = G.offsets, G.targets
        while stack:
            u = stack.pop()
            for i in range(offsets[u], offsets[u + 1]):
                v = targets_arr[i]
                if v not in restricted:
                    restricted.add(v)
                    stack.append(v)
    else:
        restricted = set(range(G.n_nodes()))

    zero_set = set(system.zeros)
    pos_rows: dict[int, list[tuple[int, tuple[int, ...]]]] = {}
    for scc_index, s, nodes in system.positives:
        pos_rows.setdefault(scc_index, []).append((s, nodes))

    mu: dict[int, Fraction] = {}
    for record in reversed(system.partition.sccs):  # sinks first
        if record.members[0] not in restricted:
            continue
        if record.members[0] in zero_set:
            for u in record.members:
                mu[u] = Fraction(0)
            continue
        members = record.members
        if len(members) == 1 and not record.locally_positive:
            u = members[0]
            self_c = Fraction(0)
            rhs = Fraction(0)
            for v, c in flow_terms(u):
                if v == u:
                    self_c += c
                else:
                    rhs += c * mu[v]
            if self_c == 1:
                raise SingularSystemError(f"node {G.node_name(u)}: flow is degenerate")
            mu[u] = rhs / (1 - self_c)
            continue
        index_of = {u: i for i, u in enumerate(members)}
        k = len(members)
        rows = []
        for u in members:
            row = [Fraction(0)] * (k + 1)
            row[index_of[u]] = Fraction(1)
            for v, c in flow_terms(u):
                if v in index_of:
                    row[index_of[v]] -= c
                else:
                    row[k] += c * mu[v]
            rows.append(row)
        if record.locally_positive:
            for s, nodes in pos_rows.get(record.index, ()):
                row = [Fraction(0)] * (k + 1)
                for u in nodes:
                    row[index_of[u]] = Fraction(1)
                row[k] = Fraction(1)
                rows.append(row)
        sol = _gauss_consistent(rows, k, f"SCC {record.index}")
        for u, i in index_of.items():
            mu[u] = sol[i]

    for u, v in mu.items():
        if v < 0 or v > 1:
            raise SolveError(
                f"mu{G.node_name(u)} = {v} is outside [0,1]; the system is not "
                "the one the theory promises — this is a bug, not an input error"
            )
    target = sum((mu[u] for u in system.targets), Fraction(0))
    return SolveResult(mu, target, frozenset(restricted))


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


@dataclass
class Analysis:
    gba: Gba
    graph: ProductGraph
    partition: SccPartition
    pos: list[SccRecord]
    neg: list[SccRecord]
    system: EquationSystem
    times: dict[str, float]


def analyze(
    M: Pmc,
    formula: LtlFormula,
    max_nodes: int = 5_000_000,
    el_cap: int = 20,
    use_oracle: bool | None = None,
    oracle_budget: int = 200_000,
) -> Analysis:
    """translate -> product -> SCCs -> classification -> equation system."""
    times: dict[str, float] = {}
    t0 = time.perf_counter()
    props = atomic_props(formula)
    A = translate(formula, ap=tuple(sorted(props)), el_cap=el_cap)
    times["translate"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    G = build_product(A, M, max_nodes=max_nodes)
    times["product"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    partition = scc_decompose(G)
    times["scc"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    system = build_system(G, partition, use_oracle=use_oracle, oracle_budget=oracle_budget)
    times["classify"] = time.perf_counter() - t0
    return Analysis(A, G, partition, system.pos, system.neg, system, times)


def check_pltl(
    M: Pmc,
    query: PltlQuery,
    evaluation: Evaluation,
    max_nodes: int = 5_000_000,
    use_oracle: bool | None = None,
) -> tuple[bool, Fraction, Analysis]:
    """Decide the query under a total evaluation; returns (verdict, value, analysis)."""
    analysis = analyze(M, query.formula, max_nodes=max_nodes, use_oracle=use_oracle)
    t0 = time.perf_counter()
    result = solve_concrete(analysis.system, evaluation)
    analysis.times["solve"] = time.perf_counter() - t0
    return query.admits(result.target), result.target, analysis


# ---------------------------------------------------------------------------
# Grid synthesis
# ---------------------------------------------------------------------------


@dataclass
class SynthResult:
    witness: dict[str, Fraction] | None
    value: Fraction | None
    tried: int
    admitted: int


def synth_grid(
    M: Pmc,
    query: PltlQuery,
    resolution: int = 11,
    max_nodes: int = 5_000_000,
    use_oracle: bool | None = None,
) -> SynthResult:
    """Scan a regular grid over the parameter box for an evaluation whose
    probability lies in the query interval.

    Classification is done once — admitted evaluations all induce the same
    support.  Grid points that are not well-defined (zero entries, row sums
    off 1) are skipped but counted in ``tried``.
    """
    if resolution < 2:
        raise GridError("grid resolution must be at least 2")
    axes: list[list[Fraction]] = []
    names = list(M.params)
    for name in names:
        p = M.params[name]
        if p.lower is None or p.upper is None:
            raise GridError(f"parameter {name} has an unbounded range; grid synthesis needs a box")
        if p.lower == p.upper:
            axes.append([p.lower])
            continue
        step = (p.upper - p.lower) / (resolution - 1)
        points = [p.lower + i * step for i in range(resolution)]
        if p.lower_strict:
            points = points[1:]
        if p.upper_strict:
            points = points[:-1]
        if not points:
            raise GridError(f"parameter {name}: no grid point inside the open range")
        axes.append(points)

    analysis = analyze(M, query.formula, max_nodes=max_nodes, use_oracle=use_oracle)
    tried = admitted = 0
    for combo in itertools.product(*axes):
        evaluation = dict(zip(names, combo))
        tried += 1
        if not well_defined(M, evaluation).ok:
            continue
        admitted += 1
        result = solve_concrete(analysis.system, evaluation)
        if query.admits(result.target):
            return SynthResult(evaluation, result.target, tried, admitted)
    return SynthResult(None, None, tried, admitted)
