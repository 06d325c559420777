import itertools
import random

import pytest

from weaver import formula as fm
from weaver.formula import (
    FALSE,
    TRUE,
    Assign,
    Assume,
    Assert,
    BinOp,
    Const,
    Lock,
    Skip,
    Var,
    lit,
)

from conftest import (
    DOMAINS,
    VARS,
    naive_equivalent,
    random_closed_stmt,
    random_formula,
    random_stmt,
)


def x_lt(e):
    return lit(Var("x"), "<", e)


class TestCanonicalization:
    def test_idempotent_on_random_formulas(self):
        rng = random.Random(7)
        for _ in range(300):
            f = random_formula(rng)
            again = fm.formula(f.clauses)
            assert again == f

    def test_duplicate_literals_and_clauses_removed(self):
        a = lit(Var("x"), "=", Const(1))
        both = fm.conj(a, a, fm.disj(a, a))
        assert both == a

    def test_ground_atoms_fold(self):
        assert lit(Const(1), "=", Const(2), negated=True) == TRUE
        assert lit(Const(3), "<", Const(2)) == FALSE

    def test_constant_difference_atoms_fold(self):
        t = Var("t")
        assert lit(BinOp("+", t, Const(1)), "<", t) == FALSE
        assert lit(t, "<=", BinOp("+", t, Const(1))) == TRUE

    def test_complementary_literals_make_clause_true(self):
        a = lit(Var("x"), "=", Const(1))
        na = lit(Var("x"), "=", Const(1), negated=True)
        assert fm.disj(a, na) == TRUE

    def test_empty_clause_collapses_to_false(self):
        f = fm.conj(lit(Var("x"), "=", Const(1)), FALSE)
        assert f == FALSE

    def test_canonical_equality_implies_equivalence(self):
        rng = random.Random(21)
        for _ in range(150):
            f = random_formula(rng)
            g = random_formula(rng)
            if f == g:
                assert naive_equivalent(f, g)


class TestSubstitution:
    def test_no_free_occurrence(self):
        assert fm.substitute(TRUE, "x", Const(5)) == TRUE
        f = lit(Var("y"), "=", Const(0))
        assert fm.substitute(f, "x", Const(5)) == f

    def test_replaces_all_occurrences(self):
        f = fm.disj(x_lt(Const(2)), lit(Var("x"), "=", Var("y")))
        g = fm.substitute(f, "x", BinOp("+", Var("y"), Const(1)))
        assert "x" not in g.free_vars()

    def test_substitution_soundness_random(self):
        # evaluate(f[e/x], v) == evaluate(f, v[x <- eval(e, v)])
        rng = random.Random(3)
        for _ in range(200):
            f = random_formula(rng)
            from conftest import random_int_expr

            e = random_int_expr(rng)
            name = rng.choice(VARS)
            g = fm.substitute(f, name, e)
            for combo in itertools.product(*(DOMAINS[n] for n in VARS)):
                env = dict(zip(VARS, combo))
                shifted = dict(env)
                shifted[name] = e.evaluate(env)
                assert g.evaluate(env) == f.evaluate(shifted)


class TestWeakestPrecondition:
    def test_skip(self):
        f = lit(Var("x"), "=", Const(1))
        assert fm.wp(Skip(), f) == f

    def test_assignment_constant_folds_to_true(self):
        # Fig.-5 step: wp(res := 1, !(res = 2)) collapses to true
        f = lit(Var("res"), "=", Const(2), negated=True)
        assert fm.wp(Assign("res", Const(1)), f) == TRUE

    def test_assignment_folds_to_false(self):
        f = lit(Var("S"), "<", Var("t"))
        assert fm.wp(Assign("S", BinOp("+", Var("t"), Const(1))), f) == FALSE

    def test_assert_conjoins(self):
        guard = fm.disj(lit(Var("flag1"), "=", Const(0)), lit(Var("turn"), "=", Const(2)))
        assert fm.wp(Assert(guard), TRUE) == guard

    def test_assume_is_implication(self, oracle):
        guard = lit(Var("x"), "=", Const(0))
        f = lit(Var("y"), "=", Const(1))
        w = fm.wp(Assume(guard), f)
        assert oracle.equivalent(w, fm.disj(fm.negate(guard), f))

    def test_lock_expands_to_guarded_set(self):
        f = lit(Var("x"), "=", Const(1))
        w = fm.wp(Lock("x"), f)
        # wp(assume(x=0), wp(x:=1, x=1)) = x=0 => true = true
        assert w == TRUE
        w2 = fm.wp(Lock("x"), lit(Var("x"), "=", Const(0)))
        # x := 1 makes x=0 false, so lock can never establish it
        assert w2 == fm.negate(lit(Var("x"), "=", Const(0)))

    def test_sequence_right_to_left(self):
        f = lit(Var("x"), "=", Const(2))
        seq = [Assign("x", BinOp("+", Var("x"), Const(1))), Assign("x", Const(1))]
        assert fm.wp(seq, f) == FALSE  # x:=1 then... wp applied as op1;op2

    def test_wp_distributes_over_and_or(self, oracle):
        # deterministic operations distribute through both connectives
        rng = random.Random(11)
        for _ in range(120):
            op = random_stmt(rng)
            f1, f2 = random_formula(rng, 2, 2), random_formula(rng, 2, 2)
            rewritten = fm.assume_to_assert(op)
            conj_split = fm.conj(fm.wp(rewritten, f1), fm.wp(rewritten, f2))
            assert oracle.equivalent(fm.wp(rewritten, fm.conj(f1, f2)), conj_split)
            disj_split = fm.disj(fm.wp(rewritten, f1), fm.wp(rewritten, f2))
            assert oracle.equivalent(fm.wp(rewritten, fm.disj(f1, f2)), disj_split)

    def test_wp_monotone(self, oracle):
        # Property 2 quantifies over program states; with the finite-domain
        # oracle that means domain-closed assignments, as in real programs.
        rng = random.Random(13)
        checked = 0
        for _ in range(400):
            f1, f2 = random_formula(rng, 2, 2), random_formula(rng, 2, 2)
            if not oracle.implies(f1, f2):
                continue
            checked += 1
            op = fm.assume_to_assert(random_closed_stmt(rng))
            assert oracle.implies(fm.wp(op, f1), fm.wp(op, f2))
        assert checked > 30

    def test_wp_soundness_vs_execution(self):
        # when op does not block: evaluate(wp(op,f), v) == evaluate(f, op(v))
        rng = random.Random(17)
        for _ in range(300):
            op = random_stmt(rng)
            f = random_formula(rng)
            for combo in itertools.product(*(DOMAINS[n] for n in VARS)):
                env = dict(zip(VARS, combo))
                try:
                    after = fm.execute_stmt(op, env)
                except fm.ExecutionBlocked:
                    continue
                assert fm.wp(op, f).evaluate(env) == f.evaluate(after)


class TestAssumeToAssert:
    def test_assume_becomes_assert(self):
        guard = lit(Var("x"), "=", Const(0))
        out = fm.assume_to_assert(Assume(guard))
        assert out == [Assert(guard)]

    def test_assignment_unchanged(self):
        a = Assign("x", Const(1))
        assert fm.assume_to_assert(a) == [a]

    def test_lock_becomes_assert_then_set(self):
        out = fm.assume_to_assert(Lock("m"))
        assert out == [Assert(lit(Var("m"), "=", Const(0))), Assign("m", Const(1))]


class TestTraceWp:
    def test_empty_trace(self):
        f = lit(Var("x"), "=", Const(1))
        assert fm.wp_trace([], f) == f

    def test_trace_fold_matches_manual(self, oracle):
        rng = random.Random(19)
        for _ in range(100):
            ops = [random_stmt(rng) for _ in range(rng.randint(1, 5))]
            f = random_formula(rng)
            manual = f
            for op in reversed(ops):
                manual = fm.wp(fm.assume_to_assert(op), manual)
            assert oracle.equivalent(fm.wp_trace(ops, f), manual)


class TestStability:
    def test_unrelated_assignment_stable(self, oracle):
        assert fm.is_stable(Assign("y", Const(2)), lit(Var("x"), "=", Const(0)), oracle)

    def test_killing_assignment_unstable(self, oracle):
        f = lit(Var("x"), "=", Const(2), negated=True)
        assert not fm.is_stable(Assign("x", Const(2)), f, oracle)

    def test_false_stable_under_anything(self, oracle):
        rng = random.Random(23)
        for _ in range(50):
            assert fm.is_stable(random_stmt(rng), FALSE, oracle)

    def test_oracle_equivalence_beyond_syntax(self, oracle):
        # wp(assert(x=0 || y=0), x=0) = x=0 && (x=0 || y=0): equivalent, not equal
        f = lit(Var("x"), "=", Const(0))
        guard = fm.disj(f, lit(Var("y"), "=", Const(0)))
        assert fm.wp_trace([Assume(guard)], f) != f
        assert fm.is_stable(Assume(guard), f, oracle)


class TestSerialization:
    def test_smt2_terms(self):
        f = fm.conj(
            lit(Var("x"), "=", Const(1), negated=True),
            fm.disj(lit(Var("y"), "<", Const(2)), lit(Var("z"), ">=", Const(0))),
        )
        text = f.to_smt2()
        assert text == "(and (not (= x 1)) (or (< y 2) (>= z 0)))"
        assert TRUE.to_smt2() == "true"
        assert FALSE.to_smt2() == "false"

    def test_infix_readable(self):
        f = fm.disj(lit(Var("flag1"), "=", Const(0)), lit(Var("turn"), "=", Const(2)))
        assert str(f) == "flag1 = 0 || turn = 2"
        g = lit(Var("res"), "=", Const(2), negated=True)
        assert str(g) == "!(res = 2)"
