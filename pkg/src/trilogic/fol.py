"""Shared first-order logic syntax and the problem/verdict data model.

Everything here is an immutable value. Terms, formulas, literals and
clauses compare and hash structurally, so they are safe to share across
threads and usable as dict keys. Clauses keep their literals in a fixed
sorted order so that iteration is deterministic regardless of
PYTHONHASHSEED.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Mapping


def _check_name(name: str) -> None:
    # names are non-empty and contain no whitespace
    if not name or any(ch.isspace() for ch in name):
        raise ValueError(f"bad identifier: {name!r}")


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Variable(Term):
    name: str

    def __post_init__(self):
        _check_name(self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Constant(Term):
    name: str

    def __post_init__(self):
        _check_name(self.name)

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Function(Term):
    """A function application; zero-ary symbols are Constants, not Functions."""

    name: str
    args: tuple[Term, ...]

    def __post_init__(self):
        _check_name(self.name)
        object.__setattr__(self, "args", tuple(self.args))
        if len(self.args) < 1:
            raise ValueError("Function arity must be >= 1; use Constant")

    def __str__(self):
        return f"{self.name}({', '.join(str(a) for a in self.args)})"


def term_variables(t: Term) -> set[str]:
    """Names of all variables occurring in t."""
    if isinstance(t, Variable):
        return {t.name}
    if isinstance(t, Function):
        out: set[str] = set()
        for a in t.args:
            out |= term_variables(a)
        return out
    return set()


def term_constants(t: Term) -> set[str]:
    """Names of all constants occurring in t."""
    if isinstance(t, Constant):
        return {t.name}
    if isinstance(t, Function):
        out: set[str] = set()
        for a in t.args:
            out |= term_constants(a)
        return out
    return set()


def substitute_term(t: Term, s: Mapping[str, Term]) -> Term:
    if isinstance(t, Variable):
        return s.get(t.name, t)
    if isinstance(t, Function):
        return Function(t.name, tuple(substitute_term(a, s) for a in t.args))
    return t


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    predicate: str
    args: tuple[Term, ...] = ()

    def __post_init__(self):
        _check_name(self.predicate)
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Not(Formula):
    body: Formula

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class And(Formula):
    parts: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 2:
            raise ValueError("And needs at least 2 conjuncts")

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Or(Formula):
    parts: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 2:
            raise ValueError("Or needs at least 2 disjuncts")

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Xor(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class ForAll(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        _check_name(self.var)

    def __str__(self):
        return pretty(self)


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        _check_name(self.var)

    def __str__(self):
        return pretty(self)


def free_variables(f: Formula) -> set[str]:
    """Variables occurring outside any binder for them."""
    if isinstance(f, Atom):
        out: set[str] = set()
        for a in f.args:
            out |= term_variables(a)
        return out
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for p in f.parts:
            out |= free_variables(p)
        return out
    if isinstance(f, (Xor, Implies, Iff)):
        return free_variables(f.left) | free_variables(f.right)
    if isinstance(f, (ForAll, Exists)):
        return free_variables(f.body) - {f.var}
    raise TypeError(f"not a formula: {f!r}")


def formula_constants(f: Formula) -> set[str]:
    """Names of all constants mentioned anywhere in f."""
    if isinstance(f, Atom):
        out: set[str] = set()
        for a in f.args:
            out |= term_constants(a)
        return out
    if isinstance(f, Not):
        return formula_constants(f.body)
    if isinstance(f, (And, Or)):
        out = set()
        for p in f.parts:
            out |= formula_constants(p)
        return out
    if isinstance(f, (Xor, Implies, Iff)):
        return formula_constants(f.left) | formula_constants(f.right)
    if isinstance(f, (ForAll, Exists)):
        return formula_constants(f.body)
    raise TypeError(f"not a formula: {f!r}")


def fresh_name(base: str, taken: set[str]) -> str:
    """Smallest base_k not in taken (base itself is tried first)."""
    if base not in taken:
        return base
    k = 1
    while f"{base}_{k}" in taken:
        k += 1
    return f"{base}_{k}"


def substitute(f: Formula, s: Mapping[str, Term]) -> Formula:
    """Apply s to the free variables of f, renaming binders to avoid capture."""
    if not s:
        return f
    if isinstance(f, Atom):
        return Atom(f.predicate, tuple(substitute_term(a, s) for a in f.args))
    if isinstance(f, Not):
        return Not(substitute(f.body, s))
    if isinstance(f, And):
        return And(tuple(substitute(p, s) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(substitute(p, s) for p in f.parts))
    if isinstance(f, Xor):
        return Xor(substitute(f.left, s), substitute(f.right, s))
    if isinstance(f, Implies):
        return Implies(substitute(f.left, s), substitute(f.right, s))
    if isinstance(f, Iff):
        return Iff(substitute(f.left, s), substitute(f.right, s))
    if isinstance(f, (ForAll, Exists)):
        inner = {v: t for v, t in s.items() if v != f.var}
        relevant = {v: t for v, t in inner.items() if v in free_variables(f.body)}
        if not relevant:
            return f
        var = f.var
        body = f.body
        incoming = set()
        for t in relevant.values():
            incoming |= term_variables(t)
        if var in incoming:
            # the bound variable would capture a substituted term: rename it
            taken = incoming | free_variables(body) | set(relevant)
            var = fresh_name(f.var, taken)
            body = substitute(body, {f.var: Variable(var)})
        return type(f)(var, substitute(body, relevant))
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# Pretty printing (the ASCII round-trip syntax)

_LEVEL_IMP = 0  # -> and <->
_LEVEL_DIS = 1  # | and ^
_LEVEL_CON = 2  # &
_LEVEL_UNARY = 3  # -, quantifiers


def pretty(f: Formula) -> str:
    """Canonical ASCII rendering; reparses to a structurally equal formula."""
    return _pretty(f, _LEVEL_IMP)


def _pretty(f: Formula, level: int) -> str:
    if isinstance(f, Atom):
        return str(f)
    if isinstance(f, Not):
        return _wrap(f"-{_pretty(f.body, _LEVEL_UNARY)}", _LEVEL_UNARY, level)
    if isinstance(f, (ForAll, Exists)):
        word = "all" if isinstance(f, ForAll) else "exists"
        return _wrap(f"{word} {f.var} ({pretty(f.body)})", _LEVEL_UNARY, level)
    if isinstance(f, And):
        body = " & ".join(_pretty(p, _LEVEL_UNARY) for p in f.parts)
        return _wrap(body, _LEVEL_CON, level)
    if isinstance(f, Or):
        body = " | ".join(_pretty(p, _LEVEL_CON) for p in f.parts)
        return _wrap(body, _LEVEL_DIS, level)
    if isinstance(f, Xor):
        # left may sit at the same level (left-associative), right must bind tighter
        body = f"{_pretty(f.left, _LEVEL_DIS)} ^ {_pretty(f.right, _LEVEL_CON)}"
        return _wrap(body, _LEVEL_DIS, level)
    if isinstance(f, Implies):
        # right-associative
        body = f"{_pretty(f.left, _LEVEL_DIS)} -> {_pretty(f.right, _LEVEL_IMP)}"
        return _wrap(body, _LEVEL_IMP, level)
    if isinstance(f, Iff):
        body = f"{_pretty(f.left, _LEVEL_DIS)} <-> {_pretty(f.right, _LEVEL_IMP)}"
        return _wrap(body, _LEVEL_IMP, level)
    raise TypeError(f"not a formula: {f!r}")


def _wrap(text: str, have: int, need: int) -> str:
    return text if have >= need else f"({text})"


# ---------------------------------------------------------------------------
# Literals and clauses


@dataclass(frozen=True)
class Literal:
    positive: bool
    atom: Atom

    def negated(self) -> "Literal":
        return Literal(not self.positive, self.atom)

    def __str__(self):
        return str(self.atom) if self.positive else f"-{self.atom}"

    def sort_key(self):
        return (self.atom.predicate, str(self.atom), self.positive)


@dataclass(frozen=True)
class Clause:
    """A duplicate-free disjunction of literals, kept in sorted order.

    The empty clause is representable and denotes contradiction. All
    variables are implicitly universally quantified.
    """

    literals: tuple[Literal, ...] = ()

    def __post_init__(self):
        ordered = tuple(sorted(set(self.literals), key=Literal.sort_key))
        object.__setattr__(self, "literals", ordered)

    def __iter__(self) -> Iterator[Literal]:
        return iter(self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __contains__(self, lit: Literal) -> bool:
        return lit in self.literals

    def is_empty(self) -> bool:
        return not self.literals

    def is_tautology(self) -> bool:
        pos = {l.atom for l in self.literals if l.positive}
        neg = {l.atom for l in self.literals if not l.positive}
        return bool(pos & neg)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for lit in self.literals:
            for a in lit.atom.args:
                out |= term_variables(a)
        return out

    def __str__(self):
        if not self.literals:
            return "$false"
        return " | ".join(str(l) for l in self.literals)


def clause_substitute(c: Clause, s: Mapping[str, Term]) -> Clause:
    return Clause(tuple(
        Literal(l.positive, Atom(l.atom.predicate,
                                 tuple(substitute_term(a, s) for a in l.atom.args)))
        for l in c
    ))


# ---------------------------------------------------------------------------
# Problems, verdicts, outcomes


class WorldAssumption(enum.Enum):
    OWA = "OWA"
    CWA = "CWA"


class Truth(enum.Enum):
    TRUE = "True"
    FALSE = "False"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Verdict:
    value: Truth
    resource_limited: bool = False

    def __post_init__(self):
        # the flag marks an inconclusive search, so it only makes sense on Unknown
        if self.resource_limited and self.value is not Truth.UNKNOWN:
            raise ValueError("resource_limited requires an Unknown verdict")

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Problem:
    premises: tuple[Formula, ...]
    conclusion: Formula
    assumption: WorldAssumption = WorldAssumption.OWA
    id: str = ""
    dialect: str = ""

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        for f in (*self.premises, self.conclusion):
            if free_variables(f):
                raise ValueError(f"formula has free variables: {f}")

    def constants(self) -> set[str]:
        out = formula_constants(self.conclusion)
        for p in self.premises:
            out |= formula_constants(p)
        return out


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __post_init__(self):
        if self.line < 1 or self.column < 1 or self.length < 1:
            raise ValueError("spans are 1-based and non-empty")

    def __str__(self):
        return f"line {self.line}, column {self.column}"


@dataclass(frozen=True)
class Outcome:
    pass


@dataclass(frozen=True)
class Answered(Outcome):
    verdict: Verdict

    def __str__(self):
        return str(self.verdict)


@dataclass(frozen=True)
class ParseFailed(Outcome):
    detail: str
    span: SourceSpan

    def __post_init__(self):
        if not self.detail:
            raise ValueError("detail must be non-empty")

    def __str__(self):
        return f"ParseError: {self.detail} ({self.span})"


@dataclass(frozen=True)
class ExecFailed(Outcome):
    detail: str

    def __post_init__(self):
        if not self.detail:
            raise ValueError("detail must be non-empty")

    def __str__(self):
        return f"ExecError: {self.detail}"


@dataclass(frozen=True)
class Inconsistent(Outcome):
    def __str__(self):
        return "Inconsistent"


# ---------------------------------------------------------------------------
# Errors and limits


class ParseError(Exception):
    """Raised by the dialect parsers; carries a position in the source text."""

    def __init__(self, message: str, span: SourceSpan):
        super().__init__(message)
        self.message = message
        self.span = span


class ExecError(Exception):
    """Raised when solving fails for a reason other than syntax."""


@dataclass(frozen=True)
class ResourceLimits:
    max_generated_clauses: int = 200_000
    max_clause_literals: int = 64
    wall_ms: int = 10_000
    max_cnf_clauses: int = 100_000
    max_ground_literals: int = 1_000_000

    def __post_init__(self):
        for f in (self.max_generated_clauses, self.max_clause_literals,
                  self.wall_ms, self.max_cnf_clauses, self.max_ground_literals):
            if f <= 0:
                raise ValueError("limits must be strictly positive")


DEFAULT_LIMITS = ResourceLimits()
