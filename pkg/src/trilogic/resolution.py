"""Given-clause resolution prover and the dual-run entailment wrapper.

The saturation loop keeps two clause lists: `usable` holds clauses already
selected, `sos` holds clauses waiting their turn. Each round moves the
lightest sos clause over and resolves it against everything usable
(including itself). Goal clauses are queued ahead of premise clauses, so
goal-directed inferences happen first, but premises do get selected too:
otherwise a contradiction sitting entirely inside the premises could never
surface, and the dual-run wrapper relies on exactly that to report
Inconsistent.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .fol import (
    Answered, Atom, Clause, Constant, ExecFailed, ExecError, Function,
    Inconsistent, Literal, Not, Outcome, Problem, ResourceLimits,
    DEFAULT_LIMITS, Term, Truth, Variable, Verdict, substitute_term,
)
from .normalize import clausify_all, skolem_supply, variable_supply


# ---------------------------------------------------------------------------
# Unification and matching


def unify(a: Atom, b: Atom) -> Optional[dict[str, Term]]:
    """Most general unifier of two atoms, or None. Occurs check included."""
    if a.predicate != b.predicate or len(a.args) != len(b.args):
        return None
    sub: dict[str, Term] = {}
    stack = list(zip(a.args, b.args))
    while stack:
        s, t = stack.pop()
        s = substitute_term(s, sub)
        t = substitute_term(t, sub)
        if s == t:
            continue
        if isinstance(s, Variable):
            if s.name in _term_vars(t):
                return None
            _bind(sub, s.name, t)
        elif isinstance(t, Variable):
            if t.name in _term_vars(s):
                return None
            _bind(sub, t.name, s)
        elif (isinstance(s, Function) and isinstance(t, Function)
              and s.name == t.name and len(s.args) == len(t.args)):
            stack.extend(zip(s.args, t.args))
        else:
            return None
    return sub


def _term_vars(t: Term) -> set[str]:
    if isinstance(t, Variable):
        return {t.name}
    if isinstance(t, Function):
        out: set[str] = set()
        for a in t.args:
            out |= _term_vars(a)
        return out
    return set()


def _bind(sub: dict[str, Term], var: str, term: Term) -> None:
    # keep the substitution idempotent: fold the new binding into old values
    one = {var: term}
    for v in list(sub):
        sub[v] = substitute_term(sub[v], one)
    sub[var] = term


def _match(pattern: Atom, target: Atom, sub: dict[str, Term]) -> Optional[dict[str, Term]]:
    """One-way matching: bind only the pattern's variables."""
    if pattern.predicate != target.predicate or len(pattern.args) != len(target.args):
        return None
    out = dict(sub)
    stack = list(zip(pattern.args, target.args))
    while stack:
        s, t = stack.pop()
        if isinstance(s, Variable):
            if s.name in out:
                if out[s.name] != t:
                    return None
            else:
                out[s.name] = t
        elif isinstance(s, Constant):
            if s != t:
                return None
        elif isinstance(s, Function):
            if not (isinstance(t, Function) and t.name == s.name
                    and len(t.args) == len(s.args)):
                return None
            stack.extend(zip(s.args, t.args))
        else:
            return None
    return out


# ---------------------------------------------------------------------------
# Inference rules


def rename_apart(left: Clause, right: Clause) -> Clause:
    """Rename right's variables away from left's, deterministically.

    Trace replay recomputes this renaming, so it must be a pure function
    of the two clauses.
    """
    left_vars = left.variables()
    taken = left_vars | right.variables()
    ren: dict[str, Term] = {}
    k = 0
    for v in sorted(right.variables()):
        if v in left_vars:
            while f"_r{k}" in taken:
                k += 1
            ren[v] = Variable(f"_r{k}")
            k += 1
    if not ren:
        return right
    return _clause_apply(right, ren)


def _literal_apply(l: Literal, sub: dict[str, Term]) -> Literal:
    return Literal(l.positive, Atom(l.atom.predicate,
                                    tuple(substitute_term(a, sub) for a in l.atom.args)))


def _clause_apply(c: Clause, sub: dict[str, Term]) -> Clause:
    return Clause(tuple(_literal_apply(l, sub) for l in c))


@dataclass(frozen=True)
class Resolvent:
    clause: Clause
    left_literal: Literal   # as it appears in the left parent
    right_literal: Literal  # as it appears in the renamed right parent
    unifier: tuple[tuple[str, Term], ...]


def resolvents(c1: Clause, c2: Clause) -> list[Resolvent]:
    """All binary resolvents of c1 and c2, tautologies dropped."""
    c2r = rename_apart(c1, c2)
    out: list[Resolvent] = []
    for l1 in c1:
        for l2 in c2r:
            if l1.positive == l2.positive:
                continue
            sub = unify(l1.atom, l2.atom)
            if sub is None:
                continue
            rest = [l for l in c1 if l != l1] + [l for l in c2r if l != l2]
            clause = Clause(tuple(_literal_apply(l, sub) for l in rest))
            if clause.is_tautology():
                continue
            out.append(Resolvent(clause, l1, l2, _freeze_sub(sub)))
    return out


def resolve(c1: Clause, c2: Clause) -> list[Clause]:
    """The clauses derivable from c1 and c2 in one resolution step."""
    out: list[Clause] = []
    seen: set[Clause] = set()
    for r in resolvents(c1, c2):
        if r.clause not in seen:
            seen.add(r.clause)
            out.append(r.clause)
    return out


@dataclass(frozen=True)
class Factor:
    clause: Clause
    first: Literal
    second: Literal
    unifier: tuple[tuple[str, Term], ...]


def factors(c: Clause) -> list[Factor]:
    """Factors of c: one for every unifiable same-sign literal pair."""
    out: list[Factor] = []
    lits = c.literals
    for i in range(len(lits)):
        for j in range(i + 1, len(lits)):
            if lits[i].positive != lits[j].positive:
                continue
            sub = unify(lits[i].atom, lits[j].atom)
            if sub is None:
                continue
            clause = _clause_apply(c, sub)
            if clause.is_tautology():
                continue
            out.append(Factor(clause, lits[i], lits[j], _freeze_sub(sub)))
    return out


def factor(c: Clause) -> list[Clause]:
    out: list[Clause] = []
    seen: set[Clause] = set()
    for f in factors(c):
        if f.clause not in seen:
            seen.add(f.clause)
            out.append(f.clause)
    return out


def subsumes(c1: Clause, c2: Clause) -> bool:
    """True iff some substitution maps c1's literals into a subset of c2's."""
    lits2 = c2.literals

    def backtrack(i: int, sub: dict[str, Term]) -> bool:
        if i == len(c1.literals):
            return True
        l1 = c1.literals[i]
        for l2 in lits2:
            if l2.positive != l1.positive:
                continue
            extended = _match(l1.atom, l2.atom, sub)
            if extended is not None and backtrack(i + 1, extended):
                return True
        return False

    return backtrack(0, {})


def _freeze_sub(sub: dict[str, Term]) -> tuple[tuple[str, Term], ...]:
    return tuple(sorted(sub.items()))


# ---------------------------------------------------------------------------
# Saturation


@dataclass(frozen=True)
class ProofStep:
    index: int
    rule: str  # "resolve" or "factor"
    parents: tuple[int, ...]
    left_literal: Literal
    right_literal: Literal
    unifier: tuple[tuple[str, Term], ...]
    clause: Clause

    def __str__(self):
        sub = ", ".join(f"{v} -> {t}" for v, t in self.unifier)
        args = ", ".join(str(p) for p in self.parents)
        return f"step {self.index}: {self.rule}({args}) with {{{sub}}} => {self.clause}"


@dataclass(frozen=True)
class Proved:
    steps: tuple[ProofStep, ...]
    inputs: tuple[tuple[int, Clause], ...]


@dataclass(frozen=True)
class Saturated:
    pass


@dataclass(frozen=True)
class LimitReached:
    reason: str


ProofResult = Proved | Saturated | LimitReached


@dataclass
class ProofState:
    usable: list[int] = field(default_factory=list)
    sos: list[int] = field(default_factory=list)
    processed_count: int = 0
    generated_count: int = 0
    limits: ResourceLimits = DEFAULT_LIMITS


def saturate(premise_clauses: Iterable[Clause], goal_clauses: Iterable[Clause],
             limits: ResourceLimits = DEFAULT_LIMITS) -> ProofResult:
    """Run the given-clause loop to the empty clause, saturation, or a limit."""
    deadline = time.monotonic() + limits.wall_ms / 1000.0
    clauses: dict[int, Clause] = {}
    steps: dict[int, ProofStep] = {}
    next_id = 1
    premise_ids: list[int] = []
    goal_ids: list[int] = []
    seen: set[Clause] = set()
    for c in premise_clauses:
        if c not in seen:
            seen.add(c)
            clauses[next_id] = c
            premise_ids.append(next_id)
            next_id += 1
    for c in goal_clauses:
        if c not in seen:
            seen.add(c)
            clauses[next_id] = c
            goal_ids.append(next_id)
            next_id += 1

    state = ProofState(limits=limits)
    state.sos = goal_ids + premise_ids

    def build_proof(empty_id: int) -> Proved:
        wanted: set[int] = set()
        stack = [empty_id]
        while stack:
            i = stack.pop()
            if i in wanted:
                continue
            wanted.add(i)
            if i in steps:
                stack.extend(steps[i].parents)
        used_steps = tuple(steps[i] for i in sorted(wanted) if i in steps)
        used_inputs = tuple((i, clauses[i]) for i in sorted(wanted) if i not in steps)
        return Proved(used_steps, used_inputs)

    # an input may already be the empty clause (contradictory premises clausify to it)
    for i in state.sos:
        if clauses[i].is_empty():
            return build_proof(i)

    while state.sos:
        if time.monotonic() > deadline:
            return LimitReached("wall clock budget")
        # lightest clause, FIFO on ties
        best = min(range(len(state.sos)), key=lambda k: (len(clauses[state.sos[k]]), k))
        given_id = state.sos.pop(best)
        given = clauses[given_id]
        state.usable.append(given_id)
        state.processed_count += 1

        new: list[tuple[Clause, ProofStep]] = []
        for partner_id in state.usable:
            for r in resolvents(given, clauses[partner_id]):
                step = ProofStep(0, "resolve", (given_id, partner_id),
                                 r.left_literal, r.right_literal, r.unifier, r.clause)
                new.append((r.clause, step))
        for fa in factors(given):
            step = ProofStep(0, "factor", (given_id,),
                             fa.first, fa.second, fa.unifier, fa.clause)
            new.append((fa.clause, step))

        for clause, step in new:
            state.generated_count += 1
            if state.generated_count > limits.max_generated_clauses:
                return LimitReached("generated clause budget")
            if len(clause) > limits.max_clause_literals:
                continue
            if any(subsumes(clauses[k], clause)
                   for k in (*state.usable, *state.sos)):
                continue
            cid = next_id
            next_id += 1
            clauses[cid] = clause
            steps[cid] = ProofStep(cid, step.rule, step.parents, step.left_literal,
                                   step.right_literal, step.unifier, clause)
            if clause.is_empty():
                return build_proof(cid)
            state.sos.append(cid)
    return Saturated()


# ---------------------------------------------------------------------------
# Trace rendering and replay


def render_trace(proof: Proved) -> str:
    lines = [f"clause {i}: {c}" for i, c in proof.inputs]
    lines.extend(str(s) for s in proof.steps)
    return "\n".join(lines)


def replay_trace(proof: Proved) -> bool:
    """Re-derive every step from its parents; True iff all match and the
    final step yields the empty clause."""
    clauses: dict[int, Clause] = dict(proof.inputs)
    for step in proof.steps:
        sub = dict(step.unifier)
        if step.rule == "resolve":
            left, right = (clauses[p] for p in step.parents)
            right = rename_apart(left, right)
            if step.left_literal not in left or step.right_literal not in right:
                return False
            rest = [l for l in left if l != step.left_literal] + \
                   [l for l in right if l != step.right_literal]
            derived = Clause(tuple(_literal_apply(l, sub) for l in rest))
        elif step.rule == "factor":
            parent = clauses[step.parents[0]]
            if step.left_literal not in parent or step.right_literal not in parent:
                return False
            derived = _clause_apply(parent, sub)
        else:
            return False
        if derived != step.clause:
            return False
        clauses[step.index] = step.clause
    if proof.steps:
        return proof.steps[-1].clause.is_empty()
    return any(c.is_empty() for _, c in proof.inputs)


# ---------------------------------------------------------------------------
# Entailment


def resolution_runs(p: Problem, limits: ResourceLimits = DEFAULT_LIMITS
                    ) -> tuple[Outcome, Optional[ProofResult], Optional[ProofResult]]:
    """Outcome plus the two saturation results (prove-C side, prove-not-C side)."""
    var_supply, sk_supply = variable_supply(), skolem_supply()
    try:
        premises = clausify_all(p.premises, var_supply, sk_supply, limits)
        neg_goal = clausify_all([Not(p.conclusion)], var_supply, sk_supply, limits)
        pos_goal = clausify_all([p.conclusion], var_supply, sk_supply, limits)
    except ExecError as e:
        return ExecFailed(str(e)), None, None

    proves_c = saturate(premises, neg_goal, limits)
    proves_not_c = saturate(premises, pos_goal, limits)
    if isinstance(proves_c, Proved) and isinstance(proves_not_c, Proved):
        return Inconsistent(), proves_c, proves_not_c
    if isinstance(proves_c, Proved):
        return Answered(Verdict(Truth.TRUE)), proves_c, proves_not_c
    if isinstance(proves_not_c, Proved):
        return Answered(Verdict(Truth.FALSE)), proves_c, proves_not_c
    if isinstance(proves_c, Saturated) and isinstance(proves_not_c, Saturated):
        return Answered(Verdict(Truth.UNKNOWN)), proves_c, proves_not_c
    return Answered(Verdict(Truth.UNKNOWN, resource_limited=True)), proves_c, proves_not_c


def entail_resolution(p: Problem, limits: ResourceLimits = DEFAULT_LIMITS) -> Outcome:
    outcome, _, _ = resolution_runs(p, limits)
    return outcome
