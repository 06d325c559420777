"""Random small concurrent programs for differential testing.

Everything generated here is domain-closed: assignment right-hand sides
stay inside the declared {0,1} domains for every reachable valuation, the
regime under which the finite-domain oracle's reasoning is exact.
"""

from __future__ import annotations

import random
import string

from . import formula as fm
from .formula import Assign, Assume, BinOp, Const, Formula, Lock, Var
from .program import Operation, ProcessAutomaton, Program

_LABELS = string.ascii_lowercase + string.ascii_uppercase


def _random_guard(rng: random.Random, shared: list[str]) -> Formula:
    def literal():
        return fm.lit(Var(rng.choice(shared)), "=", Const(rng.randint(0, 1)),
                      negated=rng.random() < 0.2)

    if rng.random() < 0.6:
        return literal()
    return fm.disj(literal(), literal())


def _random_assign(rng: random.Random, shared: list[str]) -> Assign:
    target = rng.choice(shared)
    roll = rng.random()
    if roll < 0.5:
        expr = Const(rng.randint(0, 1))
    elif roll < 0.8:
        expr = Var(rng.choice(shared))
    else:
        expr = BinOp("-", Const(1), Var(rng.choice(shared)))
    return Assign(target, expr)


def random_program(
    rng: random.Random,
    max_states: int = 4,
    n_processes: int = 2,
    n_shared: int = 2,
    allow_lock: bool = True,
    allow_loop: bool = True,
) -> Program:
    """A program with ``n_processes`` chains of at most ``max_states``
    control states over {0,1} shared variables, at most one assertion per
    process, and optionally one busy-wait self-loop per process."""
    shared_names = [f"s{i}" for i in range(n_shared)]
    shared = {n: ((0, 1), rng.randint(0, 1)) for n in shared_names}
    label_pool = iter(_LABELS)
    processes = []
    for pi in range(n_processes):
        name = f"P{pi + 1}"
        n_states = rng.randint(2, max_states)
        states = tuple(f"{name.lower()}q{i}" for i in range(n_states))
        transitions = []
        for i in range(n_states - 1):
            label = next(label_pool)
            roll = rng.random()
            if roll < 0.6:
                stmt = _random_assign(rng, shared_names)
            elif roll < 0.85 or not allow_lock:
                stmt = Assume(_random_guard(rng, shared_names))
            else:
                stmt = Lock(rng.choice(shared_names))
            transitions.append((states[i], Operation(label, stmt, name), states[i + 1]))
        if allow_loop and n_states > 1 and rng.random() < 0.25:
            at = rng.randrange(n_states - 1)
            label = next(label_pool)
            stmt = Assume(_random_guard(rng, shared_names))
            transitions.append((states[at], Operation(label, stmt, name), states[at]))
        assertions = {}
        if rng.random() < 0.9:
            assertions[states[rng.randrange(1, n_states)] if n_states > 1 else states[0]] = \
                _random_guard(rng, shared_names)
        processes.append(ProcessAutomaton(name, states[0], states, tuple(transitions), assertions))
    return Program(shared=shared, locals_by_proc={}, processes=processes)


def random_product_path(rng: random.Random, program: Program, max_len: int = 8):
    """A random control path of the interleaving product; its labels form a
    trace (not necessarily executable)."""
    state = tuple(p.initial for p in program.processes)
    succ = []
    for p in program.processes:
        table = {}
        for src, op, dst in p.transitions:
            table.setdefault(src, []).append((op, dst))
        succ.append(table)
    path = []
    for _ in range(rng.randint(0, max_len)):
        enabled = []
        for i, table in enumerate(succ):
            for op, dst in table.get(state[i], ()):
                enabled.append((op, state[:i] + (dst,) + state[i + 1:]))
        if not enabled:
            break
        op, state = rng.choice(enabled)
        path.append(op)
    return path, state
