"""The verification loop: prove one trace per iteration, generalize its
proof automaton, and subtract the certified language from what remains
unproven; stop when nothing is left or a counterexample executes.

Also houses an explicit-state reachability checker used as an independent
testing oracle and for counterexample confirmation.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from . import formula as fm
from .automata import (
    CapExceeded,
    afa_accepts,
    complement,
    eliminate_epsilon,
    intersect,
    nfa_to_afa,
    shortest_word,
)
from .formula import Formula
from .oracle import Oracle, OracleConfig, OracleError
from .program import (
    Blocked,
    Program,
    StateCapExceeded,
    Terminated,
    compose,
    execute_trace,
    reversed_remaining_languages,
)
from .proof_afa import add_edges, build, compute_hmap, generalize_universal


@dataclass
class VerifierConfig:
    oracle: OracleConfig = field(default_factory=OracleConfig)
    product_cap: int = 10**6
    subset_cap: int = 10**5
    max_iterations: int = 2000
    max_cores: int = 32


@dataclass
class Safe:
    iterations: int
    stats: dict


@dataclass
class Unsafe:
    trace: tuple[str, ...]  # operation labels, program order
    assertion: Formula
    final_valuation: dict
    iterations: int = 0
    stats: dict = field(default_factory=dict)


@dataclass
class Unknown:
    reason: str
    diagnostics: dict = field(default_factory=dict)


Verdict = Safe | Unsafe | Unknown


@dataclass
class _Group:
    psi: Formula
    remaining: object  # Afa over the program alphabet, reversed traces
    iterations: int = 0
    done: bool = False
    history: list = field(default_factory=list)


def validate_counterexample(program: Program, labels, psi: Formula) -> bool:
    """A counterexample must actually run to completion and end in a state
    falsifying the assertion."""
    outcome = execute_trace(program, labels)
    return isinstance(outcome, Terminated) and not psi.evaluate(outcome.valuation)


def verify(program: Program, config: VerifierConfig | None = None,
           hooks=None) -> Verdict:
    """Check every assertion over all interleavings.

    Per distinct assertion formula, keep an automaton of the reversed
    still-unproven traces. Each round takes the globally shortest
    remaining word, proves the corresponding trace via its proof
    automaton, and either returns the trace as an executable
    counterexample or subtracts every trace the generalized proof covers.
    ``hooks``, if given, is called per iteration with a progress record
    (used by tests to check online progress).
    """
    config = config or VerifierConfig()
    started = time.monotonic()
    stats: dict = {"iterations": 0, "groups": [], "subset_peak": 0,
                   "proof_states": 0, "wall_seconds": 0.0}

    def finish(verdict):
        stats["wall_seconds"] = round(time.monotonic() - started, 6)
        stats["oracle"] = dict(oracle.stats)
        if isinstance(verdict, (Safe, Unsafe)):
            verdict.stats.update(stats)
        return verdict

    oracle = Oracle(program.domains(), config.oracle)
    try:
        product = compose(program, config.product_cap)
    except StateCapExceeded as e:
        return Unknown(f"product construction: {e}")

    groups = [
        _Group(psi=psi, remaining=nfa_to_afa(nfa))
        for psi, nfa in reversed_remaining_languages(product)
    ]
    stats["groups"] = [{"assertion": str(g.psi), "iterations": 0} for g in groups]
    operations = list(program.operations().values())
    label_rank = {label: i for i, label in enumerate(program.alphabet())}
    initial = program.initial_formula()

    for iteration in range(config.max_iterations):
        try:
            best = None
            for gi, group in enumerate(groups):
                if group.done:
                    continue
                word = shortest_word(group.remaining, config.subset_cap, stats)
                if word is None:
                    group.done = True
                    continue
                rank = (len(word), tuple(label_rank[l] for l in word), gi)
                if best is None or rank < best[0]:
                    best = (rank, gi, word)
            if best is None:
                stats["iterations"] = iteration
                return finish(Safe(iterations=iteration, stats=stats))

            _, gi, word = best
            group = groups[gi]
            trace_labels = tuple(reversed(word))
            sigma = program.trace(trace_labels)
            proof = build(sigma, fm.negate(group.psi), oracle, operations)
            compute_hmap(proof, oracle)
            stats["proof_states"] = max(stats["proof_states"], len(proof.afa.states))
            hmap0 = proof.hmap[proof.initial_state]

            if oracle.is_sat(fm.conj(initial, hmap0)):
                if validate_counterexample(program, trace_labels, group.psi):
                    outcome = execute_trace(program, trace_labels)
                    stats["iterations"] = iteration + 1
                    return finish(Unsafe(
                        trace=trace_labels,
                        assertion=group.psi,
                        final_valuation=outcome.valuation,
                        iterations=iteration + 1,
                    ))
                return finish(Unknown(
                    "oracle mode mismatch: satisfiable proof precondition but "
                    "the trace does not execute to a violation",
                    {"trace": trace_labels, "assertion": str(group.psi)},
                ))

            generalize_universal(proof, oracle, config.max_cores)
            add_edges(proof, oracle)
            certified = eliminate_epsilon(proof.afa)
            group.remaining = intersect(group.remaining, complement(certified))
            group.iterations += 1
            stats["groups"][gi]["iterations"] = group.iterations
            group.history.append(word)
            progressed = not afa_accepts(group.remaining, word)
            if hooks is not None:
                hooks({"iteration": iteration, "group": gi, "word": word,
                       "progressed": progressed,
                       "remaining_states": len(group.remaining.states)})
            if not progressed:
                return finish(Unknown(
                    "no progress: subtracted word still accepted",
                    {"word": word, "assertion": str(group.psi)},
                ))
        except (CapExceeded, OracleError) as e:
            return finish(Unknown(f"{type(e).__name__}: {e}"))
    stats["iterations"] = config.max_iterations
    return finish(Unknown(f"iteration cap {config.max_iterations} exceeded"))


# ---------------------------------------------------------------------------
# Independent explicit-state oracle
# ---------------------------------------------------------------------------


def brute_force_check(program: Program, config: VerifierConfig | None = None) -> Verdict:
    """Exhaustive reachability over (control tuple, valuation) pairs.

    Unsafe iff some reachable assertion-tagged product state has a
    valuation violating its assertion; the witness trace comes from
    predecessor links. This never builds formulas, so it is a fully
    independent check on the proof-based verifier.
    """
    config = config or VerifierConfig()
    product = compose(program, config.product_cap)
    operations = program.operations()
    successors: dict = {}
    for (src, label), dst in product.transitions.items():
        successors.setdefault(src, []).append((label, dst))
    init = (product.initial, tuple(sorted(program.initial_valuation().items())))
    parents: dict = {init: None}
    queue = deque([init])

    def witness(config_):
        labels = []
        while parents[config_] is not None:
            config_, label = parents[config_]
            labels.append(label)
        return tuple(reversed(labels))

    while queue:
        current = queue.popleft()
        state, items = current
        env = dict(items)
        psi = product.accepting.get(state)
        if psi is not None and not psi.evaluate(env):
            return Unsafe(
                trace=witness(current),
                assertion=psi,
                final_valuation=env,
            )
        for label, dst in successors.get(state, ()):
            try:
                new_env = fm.execute_stmt(operations[label].stmt, env)
            except fm.ExecutionBlocked:
                continue
            nxt = (dst, tuple(sorted(new_env.items())))
            if nxt not in parents:
                if len(parents) > config.product_cap:
                    raise StateCapExceeded(
                        f"reachable configurations exceed {config.product_cap}")
                parents[nxt] = (current, label)
                queue.append(nxt)
    return Safe(iterations=len(parents), stats={"configurations": len(parents)})
