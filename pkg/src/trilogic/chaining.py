"""Forward chaining over typed ground facts, in the style of a rule engine.

Facts are (predicate, constant args, truth) triples; rules fire by joining
body literals against the fact store until a fixpoint. Negation exists only
as an explicit False truth slot, so deriving both p(A)=True and p(A)=False
is a hard contradiction rather than a logical signal, and a query absent
from the fixpoint is Unknown (open world) or False (closed world).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping

from .dialects.pyke import PykeLiteral, PykeProgram, PykeRule
from .fol import (
    Answered, Constant, ExecError, ExecFailed, Inconsistent, Outcome,
    ResourceLimits, DEFAULT_LIMITS, Truth, Variable, Verdict,
    WorldAssumption,
)

Fact = tuple[str, tuple[str, ...], bool]


class InconsistentFacts(ExecError):
    """Raised when the store asserts some p(args) both True and False."""


@dataclass(frozen=True)
class RuleBase:
    """A compiled program: checked facts and rules, ready to run."""

    facts: tuple[Fact, ...]
    rules: tuple[PykeRule, ...]
    constants: tuple[str, ...]


def compile_rules(prog: PykeProgram) -> RuleBase:
    """Check declarations and assemble the rule base.

    Arity and declaration errors are ExecError here, not ParseError: the
    text was well formed, the program it described was not.
    """
    declared: dict[str, int] = {}
    for name, arity in prog.predicates:
        if name in declared and declared[name] != arity:
            raise ExecError(f"predicate '{name}' declared twice with "
                            f"different arities")
        declared[name] = arity
    inferred: dict[str, int] = {}

    def check(name: str, arity: int, where: str) -> None:
        if declared:
            if name not in declared:
                raise ExecError(f"undeclared predicate '{name}' in {where}")
            if declared[name] != arity:
                raise ExecError(
                    f"arity mismatch for '{name}' in {where}: declared "
                    f"{declared[name]}, used with {arity}")
            return
        known = inferred.get(name)
        if known is None:
            inferred[name] = arity
        elif known != arity:
            raise ExecError(
                f"arity mismatch for '{name}' in {where}: earlier use had "
                f"{known}, this one has {arity}")

    seen: set[Fact] = set()
    facts: list[Fact] = []
    for fact in prog.facts:
        check(fact[0], len(fact[1]), "a fact")
        if fact not in seen:
            seen.add(fact)
            facts.append(fact)
    for rule in prog.rules:
        for lit in rule.body + (rule.head,):
            check(lit.predicate, len(lit.args), "a rule")
    check(prog.query[0], len(prog.query[1]), "the query")

    constants = sorted({c for _, args, _ in facts for c in args})
    return RuleBase(tuple(facts), prog.rules, tuple(constants))


def _match_literal(lit: PykeLiteral, fact: Fact,
                   binding: dict[str, str]) -> dict[str, str] | None:
    pred, args, value = fact
    if lit.predicate != pred or lit.value != value or len(lit.args) != len(args):
        return None
    out = dict(binding)
    for term, name in zip(lit.args, args):
        if isinstance(term, Constant):
            if term.name != name:
                return None
        else:
            bound = out.get(term.name)
            if bound is None:
                out[term.name] = name
            elif bound != name:
                return None
    return out


def _match_body(body: tuple[PykeLiteral, ...], facts: list[Fact],
                binding: dict[str, str]) -> Iterator[dict[str, str]]:
    if not body:
        yield binding
        return
    first, rest = body[0], body[1:]
    for fact in facts:
        extended = _match_literal(first, fact, binding)
        if extended is not None:
            yield from _match_body(rest, facts, extended)


def _instantiate(head: PykeLiteral, binding: Mapping[str, str]) -> Fact:
    args = tuple(t.name if isinstance(t, Constant) else binding[t.name]
                 for t in head.args)
    return head.predicate, args, head.value


def forward_chain(rb: RuleBase,
                  limits: ResourceLimits = DEFAULT_LIMITS) -> tuple[Fact, ...]:
    """Run rules to a fixpoint; the derived fact store in derivation order."""
    store: list[Fact] = []
    present: set[Fact] = set()

    def add(fact: Fact) -> bool:
        if fact in present:
            return False
        flipped = (fact[0], fact[1], not fact[2])
        if flipped in present:
            raise InconsistentFacts(
                f"inconsistent facts: {fact[0]}({', '.join(fact[1])}) "
                "asserted both True and False")
        if len(store) >= limits.max_ground_literals:
            raise ExecError("fact store budget exceeded")
        present.add(fact)
        store.append(fact)
        return True

    for fact in rb.facts:
        add(fact)
    changed = True
    while changed:
        changed = False
        for rule in rb.rules:
            # Snapshot so one pass joins against a stable store.
            snapshot = list(store)
            for binding in _match_body(rule.body, snapshot, {}):
                if add(_instantiate(rule.head, binding)):
                    changed = True
    return tuple(store)


def answer_query(fixpoint: tuple[Fact, ...], query: tuple[str, tuple[str, ...]],
                 assumption: WorldAssumption) -> Verdict:
    name, args = query
    present = set(fixpoint)
    if (name, args, True) in present:
        return Verdict(Truth.TRUE)
    if (name, args, False) in present:
        return Verdict(Truth.FALSE)
    if assumption is WorldAssumption.CWA:
        return Verdict(Truth.FALSE)
    return Verdict(Truth.UNKNOWN)


def dump_fixpoint(fixpoint: tuple[Fact, ...]) -> str:
    lines = [f"{pred}({', '.join(args)})={value}"
             for pred, args, value in sorted(fixpoint)]
    return "\n".join(lines)


def entail_chaining(prog: PykeProgram,
                    limits: ResourceLimits = DEFAULT_LIMITS,
                    assumption: WorldAssumption = WorldAssumption.OWA
                    ) -> Outcome:
    """Compile, chain to fixpoint, and read the query off the fact store."""
    try:
        rb = compile_rules(prog)
        fixpoint = forward_chain(rb, limits)
    except InconsistentFacts:
        return Inconsistent()
    except ExecError as e:
        return ExecFailed(str(e))
    return Answered(answer_query(fixpoint, prog.query, assumption))
