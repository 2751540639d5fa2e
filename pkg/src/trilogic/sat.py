"""Entailment by grounding to propositional clauses and running DPLL.

Quantifiers are read over the closed universe of named constants (plus
skolem constants the clausifier introduced, plus one dummy constant when a
problem names nobody at all). This finite-domain reading matches the
benchmark fragments, where every individual is named up front; problems
that need skolem functions of arity one or more are out of this engine's
fragment and must go to the resolution engine instead.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .fol import (
    Answered, Atom, Clause, Constant, ExecError, ExecFailed, Function,
    Inconsistent, Literal, Not, Outcome, Problem, ResourceLimits,
    DEFAULT_LIMITS, Term, Truth, Variable, Verdict,
)
from .normalize import clausify_all, skolem_supply, variable_supply

DUMMY_CONSTANT = "_c0"


@dataclass
class GroundAtomTable:
    """Bijection between ground atoms and dense propositional indices."""

    atoms: list[Atom] = field(default_factory=list)
    index_of: dict[Atom, int] = field(default_factory=dict)

    def intern(self, atom: Atom) -> int:
        idx = self.index_of.get(atom)
        if idx is None:
            idx = len(self.atoms)
            self.atoms.append(atom)
            self.index_of[atom] = idx
        return idx

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass
class PropClauseSet:
    """Ground clauses as DIMACS-style signed 1-based indices."""

    clauses: list[tuple[int, ...]]
    atom_count: int
    table: GroundAtomTable


def ground(clauses: Iterable[Clause], constants: Iterable[str],
           limits: ResourceLimits = DEFAULT_LIMITS) -> PropClauseSet:
    """Instantiate every clause under every assignment of its variables."""
    universe = sorted(set(constants))
    if not universe:
        universe = [DUMMY_CONSTANT]
    table = GroundAtomTable()
    out: list[tuple[int, ...]] = []
    seen: set[tuple[int, ...]] = set()
    literal_budget = limits.max_ground_literals
    total_literals = 0

    for clause in clauses:
        for lit in clause:
            for arg in lit.atom.args:
                _reject_functions(arg)
        variables = sorted(clause.variables())
        for combo in itertools.product(universe, repeat=len(variables)):
            binding = {v: Constant(c) for v, c in zip(variables, combo)}
            signed: list[int] = []
            tautology = False
            for lit in clause:
                atom = Atom(lit.atom.predicate,
                            tuple(_ground_term(a, binding) for a in lit.atom.args))
                idx = table.intern(atom) + 1
                s = idx if lit.positive else -idx
                if -s in signed:
                    tautology = True
                    break
                if s not in signed:
                    signed.append(s)
            if tautology:
                continue
            key = tuple(sorted(signed, key=lambda x: (abs(x), x)))
            if key in seen:
                continue
            seen.add(key)
            total_literals += len(key)
            if total_literals > literal_budget:
                raise ExecError("grounding budget exceeded")
            out.append(key)
    return PropClauseSet(out, len(table), table)


def _reject_functions(t: Term) -> None:
    if isinstance(t, Function):
        raise ExecError(
            f"unsupported fragment: function term {t.name}/{len(t.args)} "
            "(skolem functions of arity >= 1 need the resolution engine)")


def _ground_term(t: Term, binding: dict[str, Term]) -> Term:
    if isinstance(t, Variable):
        return binding[t.name]
    return t


def dpll(cs: PropClauseSet) -> Optional[dict[int, bool]]:
    """Plain DPLL with unit propagation; a total model, or None if UNSAT.

    Branching is deterministic: lowest unassigned index first, True first.
    """

    def simplify(clauses: list[tuple[int, ...]], lit: int
                 ) -> Optional[list[tuple[int, ...]]]:
        next_clauses: list[tuple[int, ...]] = []
        for c in clauses:
            if lit in c:
                continue
            if -lit in c:
                reduced = tuple(x for x in c if x != -lit)
                if not reduced:
                    return None
                next_clauses.append(reduced)
            else:
                next_clauses.append(c)
        return next_clauses

    def solve(clauses: list[tuple[int, ...]], assign: dict[int, bool]
              ) -> Optional[dict[int, bool]]:
        while True:
            unit = next((c[0] for c in clauses if len(c) == 1), None)
            if unit is None:
                break
            assign[abs(unit)] = unit > 0
            reduced = simplify(clauses, unit)
            if reduced is None:
                return None
            clauses = reduced
        if not clauses:
            return assign
        var = min(abs(l) for c in clauses for l in c)
        for value in (True, False):
            lit = var if value else -var
            reduced = simplify(clauses, lit)
            if reduced is not None:
                branch = dict(assign)
                branch[var] = value
                result = solve(reduced, branch)
                if result is not None:
                    return result
        return None

    if any(len(c) == 0 for c in cs.clauses):
        return None
    model = solve(list(cs.clauses), {})
    if model is None:
        return None
    for i in range(1, cs.atom_count + 1):
        model.setdefault(i, True)
    return model


def to_dimacs(cs: PropClauseSet) -> str:
    """DIMACS CNF dump with atom names in comments."""
    lines = [f"c {i + 1} {atom}" for i, atom in enumerate(cs.table.atoms)]
    lines.append(f"p cnf {cs.atom_count} {len(cs.clauses)}")
    lines.extend(" ".join(str(l) for l in c) + " 0" for c in cs.clauses)
    return "\n".join(lines)


def _clause_constants(clauses: Iterable[Clause]) -> set[str]:
    out: set[str] = set()
    for c in clauses:
        for lit in c:
            for arg in lit.atom.args:
                out |= _term_constants(arg)
    return out


def _term_constants(t: Term) -> set[str]:
    if isinstance(t, Constant):
        return {t.name}
    if isinstance(t, Function):
        names: set[str] = set()
        for a in t.args:
            names |= _term_constants(a)
        return names
    return set()


def entail_sat(p: Problem, limits: ResourceLimits = DEFAULT_LIMITS) -> Outcome:
    """Dual satisfiability queries: UNSAT(P and not C) / UNSAT(P and C)."""
    var_supply, sk_supply = variable_supply(), skolem_supply()
    try:
        premises = clausify_all(p.premises, var_supply, sk_supply, limits)
        neg_goal = clausify_all([Not(p.conclusion)], var_supply, sk_supply, limits)
        pos_goal = clausify_all([p.conclusion], var_supply, sk_supply, limits)
    except ExecError as e:
        return ExecFailed(str(e))

    base = p.constants()

    def satisfiable(goal: list[Clause]) -> bool:
        side = premises + goal
        constants = base | _clause_constants(side)
        cs = ground(side, constants, limits)
        return dpll(cs) is not None

    try:
        sat_with_neg = satisfiable(neg_goal)
        sat_with_pos = satisfiable(pos_goal)
    except ExecError as e:
        return ExecFailed(str(e))

    if not sat_with_neg and not sat_with_pos:
        return Inconsistent()
    if not sat_with_neg:
        return Answered(Verdict(Truth.TRUE))
    if not sat_with_pos:
        return Answered(Verdict(Truth.FALSE))
    return Answered(Verdict(Truth.UNKNOWN))
