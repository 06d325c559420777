"""Program model: per-process automata over assign/assume/lock operations,
their interleaving product under sequential consistency, and a concrete
trace interpreter.

The text format is line-oriented::

    shared turn : {1,2} = 1;
    local P1 l1 : {0,1,2} = 0;
    process P1 {
      init q0;
      q0 -> q1 : a : flag1 := 1;
      q2 -> q3 : A : assume(flag2 = 0 || turn = 1);
      assert q5 : l1 = 1;
    }

Comments start with ``#``. Booleans are {0,1} integers. Every variable
needs an explicit finite domain; the default oracle enumerates it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import formula as fm
from .formula import (
    Assign,
    Assume,
    Const,
    Formula,
    Lock,
    Stmt,
    Var,
)


class ParseError(Exception):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class SemanticError(Exception):
    pass


class StateCapExceeded(Exception):
    pass


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Operation:
    """A labeled program instruction. Labels are unique program-wide and
    double as the automaton alphabet."""

    label: str
    stmt: Stmt
    owner: str

    def __str__(self):
        return f"{self.label}: {self.stmt}"


@dataclass
class ProcessAutomaton:
    name: str
    initial: str
    states: tuple[str, ...]
    transitions: tuple[tuple[str, Operation, str], ...]
    assertions: dict[str, Formula]

    def successors(self, state: str):
        for src, op, dst in self.transitions:
            if src == state:
                yield op, dst


@dataclass
class Program:
    shared: dict[str, tuple[tuple[int, ...], int]]  # name -> (domain, initial)
    locals_by_proc: dict[str, dict[str, tuple[tuple[int, ...], int]]]
    processes: list[ProcessAutomaton]

    def domains(self) -> dict[str, tuple[int, ...]]:
        out = {n: dom for n, (dom, _) in self.shared.items()}
        for locs in self.locals_by_proc.values():
            out.update({n: dom for n, (dom, _) in locs.items()})
        return out

    def initial_valuation(self) -> dict[str, int]:
        out = {n: init for n, (_, init) in self.shared.items()}
        for locs in self.locals_by_proc.values():
            out.update({n: init for n, (_, init) in locs.items()})
        return out

    def initial_formula(self) -> Formula:
        return fm.valuation_formula(self.initial_valuation())

    def alphabet(self) -> tuple[str, ...]:
        """All operation labels in declaration order."""
        return tuple(op.label for p in self.processes for _, op, _ in p.transitions)

    def operations(self) -> dict[str, Operation]:
        return {op.label: op for p in self.processes for _, op, _ in p.transitions}

    def trace(self, labels) -> list[Operation]:
        ops = self.operations()
        try:
            return [ops[l] for l in labels]
        except KeyError as e:
            raise SemanticError(f"unknown operation label {e.args[0]!r}") from e


@dataclass(frozen=True)
class Blocked:
    position: int  # index of the first guard that failed


@dataclass
class Terminated:
    valuation: dict


ExecutionOutcome = Blocked | Terminated


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_PUNCT = ("->", ":=", "||", "&&", "!=", "<=", ">=", "==",
          "{", "}", "(", ")", ":", ";", ",", "=", "<", ">", "!", "+", "-", "*")
_KEYWORDS = {"shared", "local", "process", "init", "assert", "assume", "lock"}


def _tokenize(text: str):
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        i = 0
        while i < len(line):
            ch = line[i]
            if ch.isspace():
                i += 1
                continue
            for p in _PUNCT:
                if line.startswith(p, i):
                    tokens.append((p, p, lineno))
                    i += len(p)
                    break
            else:
                if ch.isdigit():
                    j = i
                    while j < len(line) and line[j].isdigit():
                        j += 1
                    tokens.append(("int", line[i:j], lineno))
                    i = j
                elif ch.isalpha() or ch == "_":
                    j = i
                    while j < len(line) and (line[j].isalnum() or line[j] == "_"):
                        j += 1
                    tokens.append(("ident", line[i:j], lineno))
                    i = j
                else:
                    raise ParseError(lineno, f"unexpected character {ch!r}")
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    # -- token helpers

    def _line(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][2]
        return self.tokens[-1][2] if self.tokens else 0

    def at(self, kind: str) -> bool:
        if self.pos >= len(self.tokens):
            return False
        k, v, _ = self.tokens[self.pos]
        if kind in ("ident", "int"):
            return k == kind and (kind != "ident" or v not in _KEYWORDS)
        return v == kind and k == kind

    def take(self, kind: str) -> str:
        if not self.at(kind) and not (kind in _KEYWORDS and self._is_kw(kind)):
            raise ParseError(self._line(), f"expected {kind!r}")
        v = self.tokens[self.pos][1]
        self.pos += 1
        return v

    def _is_kw(self, kw: str) -> bool:
        if self.pos >= len(self.tokens):
            return False
        k, v, _ = self.tokens[self.pos]
        return k == "ident" and v == kw

    def try_take(self, kind: str) -> bool:
        if self.at(kind) or (kind in _KEYWORDS and self._is_kw(kind)):
            self.pos += 1
            return True
        return False

    # -- expressions

    def int_expr(self) -> fm.IntExpr:
        e = self.int_term()
        while self.at("+") or self.at("-"):
            op = self.tokens[self.pos][1]
            self.pos += 1
            e = fm.BinOp(op, e, self.int_term())
        return e

    def int_term(self) -> fm.IntExpr:
        e = self.int_factor()
        while self.at("*"):
            self.pos += 1
            e = fm.BinOp("*", e, self.int_factor())
        return e

    def int_factor(self) -> fm.IntExpr:
        if self.at("int"):
            return Const(int(self.take("int")))
        if self.at("-"):
            self.pos += 1
            f = self.int_factor()
            if isinstance(f, Const):
                return Const(-f.value)
            return fm.BinOp("-", Const(0), f)
        if self.at("ident"):
            return Var(self.take("ident"))
        if self.try_take("("):
            e = self.int_expr()
            self.take(")")
            return e
        raise ParseError(self._line(), "expected integer expression")

    def bool_expr(self) -> Formula:
        f = self.bool_term()
        while self.try_take("||"):
            f = fm.disj(f, self.bool_term())
        return f

    def bool_term(self) -> Formula:
        f = self.bool_not()
        while self.try_take("&&"):
            f = fm.conj(f, self.bool_not())
        return f

    def bool_not(self) -> Formula:
        if self.try_take("!"):
            return fm.negate(self.bool_not())
        if self.at("("):
            # Either a parenthesized boolean or the start of an arithmetic
            # comparison; backtrack if the boolean reading falls through.
            saved = self.pos
            self.pos += 1
            try:
                f = self.bool_expr()
                self.take(")")
                return f
            except ParseError:
                self.pos = saved
        return self.comparison()

    def comparison(self) -> Formula:
        lhs = self.int_expr()
        for cmp in ("==", "=", "!=", "<=", ">=", "<", ">"):
            if self.try_take(cmp):
                rhs = self.int_expr()
                return fm.lit(lhs, "=" if cmp == "==" else cmp, rhs)
        raise ParseError(self._line(), "expected comparison operator")

    # -- declarations and processes

    def statement(self) -> Stmt:
        if self.try_take("assume"):
            self.take("(")
            cond = self.bool_expr()
            self.take(")")
            return Assume(cond)
        if self.try_take("lock"):
            self.take("(")
            var = self.take("ident")
            self.take(")")
            return Lock(var)
        var = self.take("ident")
        self.take(":=")
        return Assign(var, self.int_expr())

    def domain(self) -> tuple[int, ...]:
        self.take("{")
        values = [self._int_value()]
        while self.try_take(","):
            values.append(self._int_value())
        self.take("}")
        return tuple(values)

    def _int_value(self) -> int:
        neg = self.try_take("-")
        v = int(self.take("int"))
        return -v if neg else v

    def program(self) -> Program:
        shared: dict[str, tuple[tuple[int, ...], int]] = {}
        locals_by_proc: dict[str, dict[str, tuple[tuple[int, ...], int]]] = {}
        processes: list[ProcessAutomaton] = []
        while self.pos < len(self.tokens):
            line = self._line()
            if self.try_take("shared"):
                name = self.take("ident")
                self.take(":")
                dom = self.domain()
                self.take("=")
                init = self._int_value()
                self.take(";")
                if name in shared:
                    raise ParseError(line, f"duplicate shared variable {name}")
                shared[name] = (dom, init)
            elif self.try_take("local"):
                proc = self.take("ident")
                name = self.take("ident")
                self.take(":")
                dom = self.domain()
                self.take("=")
                init = self._int_value()
                self.take(";")
                locals_by_proc.setdefault(proc, {})
                if name in locals_by_proc[proc]:
                    raise ParseError(line, f"duplicate local {name} in {proc}")
                locals_by_proc[proc][name] = (dom, init)
            elif self.try_take("process"):
                processes.append(self._process(shared, locals_by_proc))
            else:
                raise ParseError(line, "expected shared, local, or process")
        return _check(Program(shared, locals_by_proc, processes))

    def _process(self, shared, locals_by_proc) -> ProcessAutomaton:
        name = self.take("ident")
        self.take("{")
        initial = None
        states: list[str] = []
        transitions: list[tuple[str, Operation, str]] = []
        assertions: dict[str, Formula] = {}

        def see(state: str):
            if state not in states:
                states.append(state)

        while not self.try_take("}"):
            line = self._line()
            if self.try_take("init"):
                if initial is not None:
                    raise ParseError(line, f"duplicate init in process {name}")
                initial = self.take("ident")
                see(initial)
                self.take(";")
            elif self.try_take("assert"):
                state = self.take("ident")
                see(state)
                self.take(":")
                cond = self.bool_expr()
                self.take(";")
                if state in assertions:
                    assertions[state] = fm.conj(assertions[state], cond)
                else:
                    assertions[state] = cond
            else:
                src = self.take("ident")
                self.take("->")
                dst = self.take("ident")
                self.take(":")
                label = self.take("ident")
                self.take(":")
                stmt = self.statement()
                self.take(";")
                see(src)
                see(dst)
                transitions.append((src, Operation(label, stmt, name), dst))
        if initial is None:
            raise ParseError(self._line(), f"process {name} has no init state")
        return ProcessAutomaton(name, initial, tuple(states), tuple(transitions), assertions)


def _stmt_vars(stmt: Stmt) -> frozenset[str]:
    if isinstance(stmt, Assign):
        return stmt.expr.free_vars() | {stmt.var}
    if isinstance(stmt, Assume):
        return stmt.cond.free_vars()
    if isinstance(stmt, Lock):
        return frozenset((stmt.var,))
    return frozenset()


def _check(program: Program) -> Program:
    if not program.processes:
        raise SemanticError("program has no processes")
    names = [p.name for p in program.processes]
    if len(set(names)) != len(names):
        raise SemanticError("duplicate process names")
    for proc in program.locals_by_proc:
        if proc not in names:
            raise SemanticError(f"locals declared for unknown process {proc}")
    for name, (dom, init) in program.shared.items():
        if init not in dom:
            raise SemanticError(f"initial value {init} of {name} outside its domain")
    shared_names = set(program.shared)
    seen_labels: set[str] = set()
    for p in program.processes:
        local_decls = program.locals_by_proc.get(p.name, {})
        for var, (dom, init) in local_decls.items():
            if var in shared_names:
                raise SemanticError(f"local {var} of {p.name} shadows a shared variable")
            if init not in dom:
                raise SemanticError(f"initial value {init} of {var} outside its domain")
        scope = shared_names | set(local_decls)
        per_state: set[tuple[str, str]] = set()
        for src, op, _dst in p.transitions:
            if op.label in seen_labels:
                raise SemanticError(f"duplicate operation label {op.label}")
            seen_labels.add(op.label)
            if (src, op.label) in per_state:
                raise SemanticError(f"nondeterministic transition on {op.label} at {src}")
            per_state.add((src, op.label))
            undeclared = _stmt_vars(op.stmt) - scope
            if undeclared:
                raise SemanticError(
                    f"undeclared variable(s) {sorted(undeclared)} in operation {op.label}")
            if isinstance(op.stmt, Lock) and op.stmt.var not in shared_names:
                raise SemanticError(f"lock variable {op.stmt.var} must be shared")
        for state, cond in p.assertions.items():
            undeclared = cond.free_vars() - scope
            if undeclared:
                raise SemanticError(
                    f"undeclared variable(s) {sorted(undeclared)} in assertion at {state}")
    # Locals must not collide across processes either (one flat namespace).
    all_locals = [v for locs in program.locals_by_proc.values() for v in locs]
    if len(set(all_locals)) != len(all_locals):
        raise SemanticError("local variable names must be pairwise disjoint")
    return program


def parse_program(text: str) -> Program:
    return _Parser(text).program()


# ---------------------------------------------------------------------------
# Interleaving product
# ---------------------------------------------------------------------------


@dataclass
class ProductNFA:
    """Interleaving composition of all process automata. Accepting states
    are the tuples where at least one component carries an assertion; each
    is tagged with the conjunction of the assertions defined there."""

    states: tuple[tuple[str, ...], ...]
    initial: tuple[str, ...]
    transitions: dict[tuple[tuple[str, ...], str], tuple[str, ...]]
    accepting: dict[tuple[str, ...], Formula]
    member_assertions: dict[tuple[str, ...], tuple[Formula, ...]]
    alphabet: tuple[str, ...]

    def run(self, labels) -> tuple[str, ...] | None:
        state = self.initial
        for l in labels:
            nxt = self.transitions.get((state, l))
            if nxt is None:
                return None
            state = nxt
        return state

    def accepts(self, labels) -> bool:
        state = self.run(labels)
        return state is not None and state in self.accepting


def compose(program: Program, cap: int = 10**6) -> ProductNFA:
    processes = program.processes
    initial = tuple(p.initial for p in processes)
    succ_by_proc = []
    for p in processes:
        table: dict[str, list[tuple[Operation, str]]] = {}
        for src, op, dst in p.transitions:
            table.setdefault(src, []).append((op, dst))
        succ_by_proc.append(table)

    transitions: dict[tuple[tuple[str, ...], str], tuple[str, ...]] = {}
    accepting: dict[tuple[str, ...], Formula] = {}
    member_assertions: dict[tuple[str, ...], tuple[Formula, ...]] = {}
    seen = {initial}
    order = [initial]
    queue = deque([initial])
    while queue:
        state = queue.popleft()
        members = tuple(
            p.assertions[state[i]]
            for i, p in enumerate(processes)
            if state[i] in p.assertions
        )
        if members:
            accepting[state] = fm.conj(*members)
            member_assertions[state] = members
        for i, table in enumerate(succ_by_proc):
            for op, dst in table.get(state[i], ()):
                nxt = state[:i] + (dst,) + state[i + 1:]
                transitions[(state, op.label)] = nxt
                if nxt not in seen:
                    if len(seen) >= cap:
                        raise StateCapExceeded(f"product exceeds {cap} states")
                    seen.add(nxt)
                    order.append(nxt)
                    queue.append(nxt)
    return ProductNFA(tuple(order), initial, transitions, accepting,
                      member_assertions, program.alphabet())


# ---------------------------------------------------------------------------
# Concrete execution
# ---------------------------------------------------------------------------


def execute_trace(program: Program, labels) -> ExecutionOutcome:
    """Run a trace from the initial valuation. Assignments update, assume
    blocks iff its guard is false, lock blocks iff the variable is nonzero
    and otherwise sets it to 1."""
    env = program.initial_valuation()
    for pos, op in enumerate(program.trace(labels)):
        try:
            env = fm.execute_stmt(op.stmt, env)
        except fm.ExecutionBlocked:
            return Blocked(pos)
    return Terminated(env)


# ---------------------------------------------------------------------------
# Remaining languages, reversed, per assertion
# ---------------------------------------------------------------------------


def reversed_remaining_languages(product: ProductNFA):
    """For each distinct assertion formula, an NFA accepting exactly the
    reversals of the traces that reach a state carrying that assertion.

    A state carrying several assertions joins the group of each one, so
    every individual proof obligation lands in exactly one group.
    """
    from .automata import Nfa  # local import: automata knows nothing of programs

    groups: dict = {}
    group_order: list[Formula] = []
    for state in product.states:
        for psi in product.member_assertions.get(state, ()):
            if psi.key() not in groups:
                groups[psi.key()] = (psi, [])
                group_order.append(psi)
            groups[psi.key()][1].append(state)

    def name(state: tuple[str, ...]) -> str:
        return ",".join(state)

    out = []
    for psi in group_order:
        _, members = groups[psi.key()]
        transitions: dict[tuple[str, str], set[str]] = {}
        states = {name(s) for s in product.states}
        for (src, label), dst in product.transitions.items():
            transitions.setdefault((name(dst), label), set()).add(name(src))
        nfa = Nfa(
            states=tuple(sorted(states)),
            alphabet=product.alphabet,
            transitions={k: frozenset(v) for k, v in transitions.items()},
            initial=frozenset(name(s) for s in members),
            accepting=frozenset((name(product.initial),)),
        )
        out.append((psi, nfa))
    return out
