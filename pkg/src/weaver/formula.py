"""Quantifier-free integer formulas in canonical CNF, plus the weakest
precondition calculus over program statements.

Formulas are immutable. Canonicalization sorts and deduplicates literals
and clauses and folds ground atoms, so syntactic equality of canonical
forms implies logical equivalence (never the converse).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

# ---------------------------------------------------------------------------
# Integer expressions
# ---------------------------------------------------------------------------

_OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}


@dataclass(frozen=True)
class IntExpr:
    """Base class for integer expression trees."""

    def evaluate(self, env: Mapping[str, int]) -> int:
        raise NotImplementedError

    def substitute(self, name: str, repl: "IntExpr") -> "IntExpr":
        raise NotImplementedError

    def free_vars(self) -> frozenset[str]:
        raise NotImplementedError

    def key(self):
        """Stable structural sort key."""
        raise NotImplementedError

    def poly(self) -> dict[tuple[str, ...], int]:
        """Polynomial normal form: monomial (sorted var tuple) -> coefficient."""
        raise NotImplementedError

    def to_smt2(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(IntExpr):
    value: int

    def evaluate(self, env):
        return self.value

    def substitute(self, name, repl):
        return self

    def free_vars(self):
        return frozenset()

    def key(self):
        return (0, self.value)

    def poly(self):
        return {(): self.value} if self.value else {}

    def to_smt2(self):
        if self.value < 0:
            return f"(- {-self.value})"
        return str(self.value)

    def __str__(self):
        return str(self.value)


@dataclass(frozen=True)
class Var(IntExpr):
    name: str

    def evaluate(self, env):
        return env[self.name]

    def substitute(self, name, repl):
        return repl if self.name == name else self

    def free_vars(self):
        return frozenset((self.name,))

    def key(self):
        return (1, self.name)

    def poly(self):
        return {(self.name,): 1}

    def to_smt2(self):
        return self.name

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class BinOp(IntExpr):
    op: str  # one of + - *
    left: IntExpr
    right: IntExpr

    def __post_init__(self):
        if self.op not in _OPS:
            raise ValueError(f"unknown operator {self.op!r}")

    def evaluate(self, env):
        return _OPS[self.op](self.left.evaluate(env), self.right.evaluate(env))

    def substitute(self, name, repl):
        return BinOp(self.op, self.left.substitute(name, repl), self.right.substitute(name, repl))

    def free_vars(self):
        return self.left.free_vars() | self.right.free_vars()

    def key(self):
        return (2, self.op, self.left.key(), self.right.key())

    def poly(self):
        lp, rp = self.left.poly(), self.right.poly()
        if self.op in "+-":
            out = dict(lp)
            sign = 1 if self.op == "+" else -1
            for mono, c in rp.items():
                out[mono] = out.get(mono, 0) + sign * c
                if out[mono] == 0:
                    del out[mono]
            return out
        out: dict[tuple[str, ...], int] = {}
        for m1, c1 in lp.items():
            for m2, c2 in rp.items():
                mono = tuple(sorted(m1 + m2))
                out[mono] = out.get(mono, 0) + c1 * c2
                if out[mono] == 0:
                    del out[mono]
        return out

    def to_smt2(self):
        return f"({self.op} {self.left.to_smt2()} {self.right.to_smt2()})"

    def __str__(self):
        lhs, rhs = str(self.left), str(self.right)
        if isinstance(self.left, BinOp) and self.op == "*":
            lhs = f"({lhs})"
        if isinstance(self.right, BinOp):
            rhs = f"({rhs})"
        return f"{lhs} {self.op} {rhs}"


# ---------------------------------------------------------------------------
# Atoms and literals
# ---------------------------------------------------------------------------

_CMP = {
    "=": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}

_SMT_CMP = {"=": "=", "<": "<", "<=": "<=", ">": ">", ">=": ">="}


@dataclass(frozen=True)
class Atom:
    lhs: IntExpr
    cmp: str
    rhs: IntExpr

    def __post_init__(self):
        if self.cmp not in _CMP:
            raise ValueError(f"unknown comparison {self.cmp!r}")

    def evaluate(self, env) -> bool:
        return _CMP[self.cmp](self.lhs.evaluate(env), self.rhs.evaluate(env))

    def substitute(self, name, repl) -> "Atom":
        return Atom(self.lhs.substitute(name, repl), self.cmp, self.rhs.substitute(name, repl))

    def free_vars(self):
        return self.lhs.free_vars() | self.rhs.free_vars()

    def key(self):
        return (self.lhs.key(), self.cmp, self.rhs.key())

    def fold(self) -> bool | None:
        """Truth value if lhs - rhs is a constant polynomial, else None."""
        diff = self.lhs.poly()
        for mono, c in self.rhs.poly().items():
            diff[mono] = diff.get(mono, 0) - c
            if diff[mono] == 0:
                del diff[mono]
        if any(mono != () for mono in diff):
            return None
        return _CMP[self.cmp](diff.get((), 0), 0)

    def to_smt2(self):
        l, r = self.lhs.to_smt2(), self.rhs.to_smt2()
        if self.cmp == "!=":
            return f"(not (= {l} {r}))"
        return f"({_SMT_CMP[self.cmp]} {l} {r})"

    def __str__(self):
        return f"{self.lhs} {self.cmp} {self.rhs}"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.negated)

    def evaluate(self, env) -> bool:
        return self.atom.evaluate(env) != self.negated

    def substitute(self, name, repl) -> "Literal":
        return Literal(self.atom.substitute(name, repl), self.negated)

    def free_vars(self):
        return self.atom.free_vars()

    def key(self):
        return (self.atom.key(), self.negated)

    def fold(self) -> bool | None:
        v = self.atom.fold()
        return None if v is None else v != self.negated

    def to_smt2(self):
        inner = self.atom.to_smt2()
        return f"(not {inner})" if self.negated else inner

    def __str__(self):
        return f"!({self.atom})" if self.negated else str(self.atom)


Clause = tuple[Literal, ...]


# ---------------------------------------------------------------------------
# CNF formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Formula:
    """CNF: conjunction of clauses, each a disjunction of literals.

    TRUE is the empty clause list; FALSE is the single empty clause. Use
    :func:`formula` / the combinators below rather than the raw constructor,
    which expects already-canonical input.
    """

    clauses: tuple[Clause, ...]

    @property
    def is_true(self) -> bool:
        return not self.clauses

    @property
    def is_false(self) -> bool:
        return self.clauses == ((),)

    def shape(self) -> str:
        """One of 'true', 'false', 'literal', 'clause', 'conj'."""
        if self.is_true:
            return "true"
        if self.is_false:
            return "false"
        if len(self.clauses) > 1:
            return "conj"
        return "literal" if len(self.clauses[0]) == 1 else "clause"

    def is_literal_shaped(self) -> bool:
        """No top-level connective: TRUE, FALSE, or a single literal."""
        return self.shape() in ("true", "false", "literal")

    def evaluate(self, env: Mapping[str, int]) -> bool:
        return all(any(lit.evaluate(env) for lit in cl) for cl in self.clauses)

    def free_vars(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for cl in self.clauses:
            for lit in cl:
                out |= lit.free_vars()
        return out

    def key(self):
        return tuple(tuple(lit.key() for lit in cl) for cl in self.clauses)

    def size(self) -> int:
        return sum(len(cl) for cl in self.clauses)

    def to_smt2(self) -> str:
        if self.is_true:
            return "true"
        if self.is_false:
            return "false"
        parts = []
        for cl in self.clauses:
            if len(cl) == 1:
                parts.append(cl[0].to_smt2())
            else:
                parts.append("(or " + " ".join(lit.to_smt2() for lit in cl) + ")")
        if len(parts) == 1:
            return parts[0]
        return "(and " + " ".join(parts) + ")"

    def __str__(self):
        if self.is_true:
            return "true"
        if self.is_false:
            return "false"
        parts = []
        for cl in self.clauses:
            inner = " || ".join(str(lit) for lit in cl)
            parts.append(f"({inner})" if len(self.clauses) > 1 and len(cl) > 1 else inner)
        return " && ".join(parts)


TRUE = Formula(())
FALSE = Formula(((),))


def _canon_clause(lits: Iterable[Literal]) -> Clause | None:
    """Canonicalize a disjunction; None means the clause is trivially true."""
    kept: dict = {}
    for lit in lits:
        v = lit.fold()
        if v is True:
            return None
        if v is False:
            continue
        kept[lit.key()] = lit
    for key, lit in kept.items():
        if (key[0], not key[1]) in kept:  # p || !p
            return None
    return tuple(kept[k] for k in sorted(kept))


def formula(clauses: Iterable[Iterable[Literal]]) -> Formula:
    """Build a canonical CNF formula from nested literal iterables."""
    out: dict = {}
    for cl in clauses:
        canon = _canon_clause(cl)
        if canon is None:
            continue
        if not canon:
            return FALSE
        out[tuple(l.key() for l in canon)] = canon
    return Formula(tuple(out[k] for k in sorted(out)))


def lit(lhs: IntExpr, cmp: str, rhs: IntExpr, negated: bool = False) -> Formula:
    """Single-literal formula."""
    return formula([[Literal(Atom(lhs, cmp, rhs), negated)]])


def conj(*fs: Formula) -> Formula:
    return formula(itertools.chain.from_iterable(f.clauses for f in fs))


def disj(*fs: Formula) -> Formula:
    """CNF disjunction by clause-wise distribution."""
    if any(f.is_true for f in fs):
        return TRUE
    fs = [f for f in fs if not f.is_false]
    if not fs:
        return FALSE
    product = itertools.product(*(f.clauses for f in fs))
    return formula(tuple(itertools.chain.from_iterable(combo)) for combo in product)


def negate(f: Formula) -> Formula:
    """Negation re-normalized to CNF (De Morgan plus distribution)."""
    # not (C1 && ... && Cn) == (not C1) || ... || (not Cn), where each
    # (not Ci) is a conjunction of negated literals.
    negated_clauses = [
        Formula(tuple((l.negate(),) for l in cl)) for cl in f.clauses
    ]
    if not negated_clauses:
        return FALSE
    return disj(*negated_clauses)


def substitute(f: Formula, name: str, repl: IntExpr) -> Formula:
    return formula(tuple(l.substitute(name, repl) for l in cl) for cl in f.clauses)


def implies_formula(premise: Formula, conclusion: Formula) -> Formula:
    return disj(negate(premise), conclusion)


# ---------------------------------------------------------------------------
# Program statements and weakest preconditions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Skip:
    def __str__(self):
        return "skip"


@dataclass(frozen=True)
class Assign:
    var: str
    expr: IntExpr

    def __str__(self):
        return f"{self.var} := {self.expr}"


@dataclass(frozen=True)
class Assume:
    cond: Formula

    def __str__(self):
        return f"assume({self.cond})"


@dataclass(frozen=True)
class Assert:
    cond: Formula

    def __str__(self):
        return f"assert({self.cond})"


@dataclass(frozen=True)
class Lock:
    var: str

    def __str__(self):
        return f"lock({self.var})"


Stmt = Skip | Assign | Assume | Assert | Lock


def _as_stmts(ops) -> list:
    """Flatten a statement, a labeled operation, or a sequence of either."""
    if isinstance(ops, (Skip, Assign, Assume, Assert, Lock)):
        return [ops]
    inner = getattr(ops, "stmt", None)
    if inner is not None:
        return [inner]
    return [s for op in ops for s in _as_stmts(op)]


def wp(op, post: Formula) -> Formula:
    """Weakest precondition of a statement (or sequence) w.r.t. ``post``."""
    stmts = _as_stmts(op)
    f = post
    for s in reversed(stmts):
        if isinstance(s, Skip):
            pass
        elif isinstance(s, Assign):
            f = substitute(f, s.var, s.expr)
        elif isinstance(s, Assert):
            f = conj(f, s.cond)
        elif isinstance(s, Assume):
            f = implies_formula(s.cond, f)
        elif isinstance(s, Lock):
            var_is_free = lit(Var(s.var), "=", Const(0))
            f = wp(Assume(var_is_free), substitute(f, s.var, Const(1)))
        else:
            raise TypeError(f"not a statement: {s!r}")
    return f


def assume_to_assert(ops):
    """Rewrite blocking guards as assertions, so the wp of a trace witnesses
    both blocking and assertion violation.

    assume(p) becomes assert(p); lock(x) becomes assert(x = 0); x := 1.
    Returns a statement list; assignments pass through untouched.
    """
    out = []
    for s in _as_stmts(ops):
        if isinstance(s, Assume):
            out.append(Assert(s.cond))
        elif isinstance(s, Lock):
            out.append(Assert(lit(Var(s.var), "=", Const(0))))
            out.append(Assign(s.var, Const(1)))
        else:
            out.append(s)
    return out


def wp_trace(trace, post: Formula) -> Formula:
    """wp of a whole trace under the assume-to-assert rewriting."""
    return wp(assume_to_assert(trace), post)


def is_stable(ops, f: Formula, oracle=None) -> bool:
    """True iff wp(ops[assume/assert], f) is equivalent to f.

    Syntactic equality of canonical forms is the fast path; an oracle with
    an ``equivalent`` method decides the rest. Without an oracle the check
    is purely syntactic.
    """
    w = wp_trace(ops, f)
    if w == f:
        return True
    if oracle is None:
        return False
    return oracle.equivalent(w, f)


# ---------------------------------------------------------------------------
# Concrete execution (used by the trace interpreter and in tests)
# ---------------------------------------------------------------------------


class ExecutionBlocked(Exception):
    """A guard failed; carries no state."""


def execute_stmt(s: Stmt, env: dict[str, int]) -> dict[str, int]:
    """Run one statement on a valuation; raises ExecutionBlocked on a failed
    guard, otherwise returns the updated valuation (a fresh dict)."""
    if isinstance(s, Skip):
        return dict(env)
    if isinstance(s, Assign):
        out = dict(env)
        out[s.var] = s.expr.evaluate(env)
        return out
    if isinstance(s, Assume):
        if not s.cond.evaluate(env):
            raise ExecutionBlocked
        return dict(env)
    if isinstance(s, Assert):
        if not s.cond.evaluate(env):
            raise ExecutionBlocked
        return dict(env)
    if isinstance(s, Lock):
        if env[s.var] != 0:
            raise ExecutionBlocked
        out = dict(env)
        out[s.var] = 1
        return out
    raise TypeError(f"not a statement: {s!r}")


def valuation_formula(env: Mapping[str, int]) -> Formula:
    """The conjunction v = env(v) over all variables."""
    return conj(*(lit(Var(n), "=", Const(v)) for n, v in sorted(env.items())))


def all_valuations(domains: Mapping[str, Iterable[int]], names=None) -> Iterator[dict[str, int]]:
    """Every total valuation of the given variables over their domains."""
    names = sorted(domains) if names is None else sorted(names)
    for combo in itertools.product(*(tuple(domains[n]) for n in names)):
        yield dict(zip(names, combo))
