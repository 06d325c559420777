import itertools
import random

import pytest

from weaver import formula as fm
from weaver.formula import Atom, BinOp, Const, Formula, Literal, Var
from weaver.oracle import Oracle, OracleConfig

VARS = ("x", "y", "z")
DOMAINS = {"x": (0, 1, 2), "y": (0, 1), "z": (0, 1, 2, 3)}


@pytest.fixture
def oracle():
    return Oracle(DOMAINS, OracleConfig())


def random_int_expr(rng: random.Random, depth: int = 2) -> fm.IntExpr:
    if depth == 0 or rng.random() < 0.45:
        if rng.random() < 0.5:
            return Const(rng.randint(-2, 3))
        return Var(rng.choice(VARS))
    op = rng.choice("+-*" if rng.random() < 0.3 else "+-")
    return BinOp(op, random_int_expr(rng, depth - 1), random_int_expr(rng, depth - 1))


def random_literal(rng: random.Random) -> Literal:
    cmp = rng.choice(("=", "!=", "<", "<=", ">", ">="))
    return Literal(
        Atom(random_int_expr(rng, 1), cmp, random_int_expr(rng, 1)),
        negated=rng.random() < 0.3,
    )


def random_formula(rng: random.Random, max_clauses: int = 3, max_lits: int = 3) -> Formula:
    clauses = []
    for _ in range(rng.randint(0, max_clauses)):
        clauses.append([random_literal(rng) for _ in range(rng.randint(1, max_lits))])
    return fm.formula(clauses)


def random_stmt(rng: random.Random) -> fm.Stmt:
    roll = rng.random()
    if roll < 0.5:
        return fm.Assign(rng.choice(VARS), random_int_expr(rng, 1))
    if roll < 0.7:
        return fm.Assume(random_formula(rng, 1, 2))
    if roll < 0.9:
        return fm.Assert(random_formula(rng, 1, 2))
    return fm.Lock(rng.choice(VARS))


def random_closed_stmt(rng: random.Random) -> fm.Stmt:
    """Statements whose assignments stay inside the declared domains for
    every domain valuation; guards are unrestricted (they never write)."""
    roll = rng.random()
    if roll < 0.55:
        target = rng.choice(VARS)
        choices = [Const(rng.choice(DOMAINS[target]))]
        for src in VARS:
            if set(DOMAINS[src]) <= set(DOMAINS[target]):
                choices.append(Var(src))
        if set(DOMAINS[target]) >= {0, 1}:
            choices.append(BinOp("-", Const(1), Var("y")))  # y is {0,1}
        return fm.Assign(target, rng.choice(choices))
    if roll < 0.75:
        return fm.Assume(random_formula(rng, 1, 2))
    if roll < 0.95:
        return fm.Assert(random_formula(rng, 1, 2))
    return fm.Lock(rng.choice(VARS))


def naive_equivalent(f1: Formula, f2: Formula, domains=DOMAINS) -> bool:
    """Truth-table equivalence, written independently of the oracle."""
    names = sorted(f1.free_vars() | f2.free_vars())
    for combo in itertools.product(*(domains[n] for n in names)):
        env = dict(zip(names, combo))
        if f1.evaluate(env) != f2.evaluate(env):
            return False
    return True
