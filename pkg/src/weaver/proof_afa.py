"""Proof automata: turn a weakest-precondition proof of one trace into an
alternating automaton whose language is a whole set of provably-safe
traces, then enlarge that language.

Construction: from a trace sigma and a postcondition phi, states are
(formula, remaining-prefix) pairs. A literal-annotated state is
existential; scanning its prefix right to left past the maximal stable
suffix yields its single proper successor, and every stable operation adds
a self-loop. A compound formula splits along its top-level connective into
epsilon-children and the state is universal. A state accepts exactly when
its formula is stable across its whole remaining prefix. HMap then
reconstructs, per state, the weakest precondition shared by every word the
state accepts.

Generalization: a universal conjunction state with unsatisfiable HMap only
needs the children of one minimal unsat core to justify the proof, so it
turns existential over fresh per-core universal states; and extra edges
are added between literal states wherever weakest-precondition
monotonicity already guarantees the inductive invariant.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from . import formula as fm
from .automata import (
    EPSILON,
    Afa,
    afa_accepts,
    afa_to_dot,
    afa_to_json,
    pb_and,
    pb_or,
    pb_state,
)
from .formula import Formula
from .program import Operation


class MissingSuccessor(Exception):
    """A non-accepting literal state without a successor: construction bug."""


@dataclass
class ProofAfa:
    afa: Afa
    sigma: tuple[Operation, ...]
    phi: Formula
    operations: dict[str, Operation]  # full alphabet, label -> operation
    amap: dict[str, Formula]
    rmap: dict[str, int]  # length of the remaining prefix of sigma
    kinds: dict[str, str]  # "∀" or "∃"
    children: dict[str, tuple[str, ...]] = field(default_factory=dict)
    comp_kind: dict[str, str] = field(default_factory=dict)  # "conj" / "disj"
    lit_succ: dict[str, tuple[str, str]] = field(default_factory=dict)
    hmap: dict[str, Formula] = field(default_factory=dict)
    cores: dict[str, tuple[frozenset[str], ...]] = field(default_factory=dict)
    synthetic: frozenset[str] = frozenset()

    @property
    def initial_state(self) -> str:
        return "s0"

    def rmap_labels(self, state: str) -> tuple[str, ...]:
        return tuple(op.label for op in self.sigma[: self.rmap[state]])

    def accepts_from(self, state: str, word) -> bool:
        return afa_accepts(self.afa, word, initial=pb_state(state))

    def describe(self, state: str) -> str:
        parts = [f"AMap={self.amap[state]}"]
        if state not in self.synthetic:
            parts.append(f"RMap={''.join(self.rmap_labels(state)) or 'ε'}")
        if state in self.hmap:
            parts.append(f"HMap={self.hmap[state]}")
        return ", ".join(parts)

    def to_dot(self, name: str = "proof") -> str:
        labels = {s: str(self.amap[s]) for s in self.afa.states}
        notes = {}
        for s in self.afa.states:
            note = []
            if s not in self.synthetic:
                note.append(f"RMap: {''.join(self.rmap_labels(s)) or 'ε'}")
            if s in self.hmap:
                note.append(f"HMap: {self.hmap[s]}")
            if note:
                notes[s] = "  ".join(note)
        return afa_to_dot(self.afa, kinds=self.kinds, labels=labels, notes=notes, name=name)

    def to_json(self) -> str:
        annotations = {
            s: {
                "amap": str(self.amap[s]),
                "rmap": None if s in self.synthetic else "".join(self.rmap_labels(s)),
                "hmap": str(self.hmap[s]) if s in self.hmap else None,
                "kind": self.kinds[s],
            }
            for s in self.afa.states
        }
        return afa_to_json(self.afa, annotations)


def _decompose(f: Formula) -> tuple[str, tuple[Formula, ...]]:
    """Two-level CNF split: a conjunction lists its clauses, a single
    clause lists its literals."""
    if f.shape() == "conj":
        return "conj", tuple(Formula((cl,)) for cl in f.clauses)
    if f.shape() == "clause":
        return "disj", tuple(Formula(((l,),)) for l in f.clauses[0])
    raise ValueError(f"not a compound formula: {f}")


def build(sigma, phi: Formula, oracle, operations=None) -> ProofAfa:
    """Definition-style worklist construction of the annotated AFA for a
    trace and a postcondition.

    ``operations`` fixes the automaton alphabet (all program operations in
    declared order); it defaults to the distinct operations of the trace.
    """
    sigma = tuple(sigma)
    if operations is None:
        operations = []
        for op in sigma:
            if op not in operations:
                operations.append(op)
    operations = list(operations)
    op_table = {op.label: op for op in operations}
    alphabet = tuple(op.label for op in operations)
    for op in sigma:
        if op.label not in op_table:
            raise ValueError(f"trace operation {op.label} missing from the alphabet")

    amap: dict[str, Formula] = {}
    rmap: dict[str, int] = {}
    kinds: dict[str, str] = {}
    children: dict[str, tuple[str, ...]] = {}
    comp_kind: dict[str, str] = {}
    lit_succ: dict[str, tuple[str, str]] = {}
    delta: dict[tuple[str, str], object] = {}
    accepting: set[str] = set()
    order: list[str] = []
    index: dict[tuple, str] = {}
    queue: deque[str] = deque()

    def intern(f: Formula, n: int) -> str:
        # A contradictory compound annotation is the FALSE state in
        # disguise; keeping it compound would split it into children that
        # can never be generalized over, so collapse it up front (the
        # paper's toolchain gets the same effect from solver-side
        # simplification of wp results).
        if not f.is_literal_shaped() and not oracle.is_sat(f):
            f = fm.FALSE
        key = (f.key(), n)
        state = index.get(key)
        if state is None:
            state = f"s{len(order)}"
            index[key] = state
            order.append(state)
            amap[state] = f
            rmap[state] = n
            kinds[state] = "∃" if f.is_literal_shaped() else "∀"
            queue.append(state)
        return state

    stable_cache: dict[tuple[str, tuple], bool] = {}

    def stable(label: str, f: Formula) -> bool:
        key = (label, f.key())
        if key not in stable_cache:
            stable_cache[key] = fm.is_stable(op_table[label], f, oracle)
        return stable_cache[key]

    intern(phi, len(sigma))
    while queue:
        s = queue.popleft()
        f, n = amap[s], rmap[s]
        i = n - 1
        while i >= 0 and stable(sigma[i].label, f):
            i -= 1
        if i < 0:
            accepting.add(s)
        if kinds[s] == "∀":
            kind, parts = _decompose(f)
            comp_kind[s] = kind
            kids = tuple(intern(part, n) for part in parts)
            children[s] = kids
            delta[(s, EPSILON)] = pb_and(pb_state(k) for k in kids)
        elif i >= 0:
            op = sigma[i]
            succ = intern(fm.wp_trace([op], f), i)
            lit_succ[s] = (op.label, succ)
            prev = delta.get((s, op.label))
            delta[(s, op.label)] = pb_or([prev, pb_state(succ)] if prev else [pb_state(succ)])
        # Stability self-loops. Restricting these to existential states (as
        # the construction rule is stated) loses nothing when a compound
        # formula's components are individually stable, but a conjunction
        # can be stable as a whole while its parts are not (a guard it
        # already contains gets re-absorbed): without the loop here, busy
        # waits pump traces the proof can never cover and the subtraction
        # fixpoint diverges. Stability is all the invariant's induction
        # needs, so the loop is sound for universal states too.
        for label in alphabet:
            if stable(label, f):
                prev = delta.get((s, label))
                delta[(s, label)] = pb_or([prev, pb_state(s)] if prev else [pb_state(s)])

    afa = Afa(
        states=tuple(order),
        alphabet=alphabet,
        delta=delta,
        initial=pb_state("s0"),
        accepting=frozenset(accepting),
    )
    return ProofAfa(
        afa=afa, sigma=sigma, phi=phi, operations=op_table,
        amap=amap, rmap=rmap, kinds=kinds, children=children,
        comp_kind=comp_kind, lit_succ=lit_succ,
    )


def compute_hmap(proof: ProofAfa, oracle) -> ProofAfa:
    """Assign HMap bottom-up: accepting states keep their formula, compound
    states combine their children with the matching connective, and a
    literal state inherits from its single proper successor."""
    def rank(state: str):
        return (proof.rmap[state], proof.amap[state].size(),
                len(proof.amap[state].clauses), state)

    for s in sorted(proof.afa.states, key=rank):
        if s in proof.afa.accepting:
            proof.hmap[s] = proof.amap[s]
        elif s in proof.children:
            kids = [proof.hmap[k] for k in proof.children[s]]
            combine = fm.conj if proof.comp_kind[s] == "conj" else fm.disj
            proof.hmap[s] = combine(*kids)
        elif s in proof.lit_succ:
            proof.hmap[s] = proof.hmap[proof.lit_succ[s][1]]
        else:
            raise MissingSuccessor(f"state {s} has no HMap rule")
    return proof


def generalize_universal(proof: ProofAfa, oracle, max_cores: int = 32) -> ProofAfa:
    """Convert qualifying universal states to existential ones.

    A universal state whose formula is the conjunction of its children's
    and whose HMap is unsatisfiable gets, per minimal unsat core of the
    children's HMaps, a fresh universal state over just that core; the
    original state then chooses existentially among the cores. Fresh
    states are not reprocessed.
    """
    candidates = [
        s for s in proof.afa.states
        if proof.kinds[s] == "∀" and proof.comp_kind.get(s) == "conj"
        and s in proof.hmap and not oracle.is_sat(proof.hmap[s])
    ]
    states = list(proof.afa.states)
    accepting = set(proof.afa.accepting)
    synthetic = set(proof.synthetic)
    counter = 0
    for s in candidates:
        kids = proof.children[s]
        core_set = oracle.minimal_unsat_cores(
            [proof.hmap[k] for k in kids], max_cores=max_cores)
        fresh: list[str] = []
        recorded: list[frozenset[str]] = []
        for core in core_set:
            members = tuple(kids[i] for i in sorted(core))
            u = f"u{counter}"
            counter += 1
            states.append(u)
            synthetic.add(u)
            proof.kinds[u] = "∀"
            proof.amap[u] = fm.conj(*(proof.amap[m] for m in members))
            proof.hmap[u] = fm.conj(*(proof.hmap[m] for m in members))
            proof.rmap[u] = proof.rmap[s]
            proof.children[u] = members
            proof.comp_kind[u] = "conj"
            proof.afa.delta[(u, EPSILON)] = pb_and(pb_state(m) for m in members)
            fresh.append(u)
            recorded.append(frozenset(members))
        proof.afa.delta[(s, EPSILON)] = pb_or(pb_state(u) for u in fresh)
        proof.kinds[s] = "∃"
        proof.cores[s] = tuple(recorded)
    proof.afa.states = tuple(states)
    proof.afa.accepting = frozenset(accepting)
    proof.synthetic = frozenset(synthetic)
    return proof


def add_edges(proof: ProofAfa, oracle) -> ProofAfa:
    """Monotonicity edges between literal-annotated states.

    For states s, s' with literal formulas and a symbol a (possibly
    epsilon): when both HMaps are unsatisfiable and
    wp(a[assume/assert], AMap(s)) implies AMap(s'), or both are valid and
    AMap(s') implies that wp, an a-edge from s to s' preserves the HMap
    invariant, so it is added. Epsilon self-edges are pointless and
    skipped.
    """
    lits = [s for s in proof.afa.states if proof.amap[s].is_literal_shaped()]
    unsat = {s for s in lits if not oracle.is_sat(proof.hmap[s])}
    valid = {s for s in lits if oracle.is_valid(proof.hmap[s])}
    sources = [s for s in lits if s in unsat or s in valid]
    symbols = proof.afa.alphabet + (EPSILON,)
    for s in sources:
        for symbol in symbols:
            if symbol == EPSILON:
                moved = proof.amap[s]
            else:
                moved = fm.wp_trace([proof.operations[symbol]], proof.amap[s])
            additions = []
            for t in lits:
                if symbol == EPSILON and t == s:
                    continue
                if s in unsat and t in unsat and oracle.implies(moved, proof.amap[t]):
                    additions.append(t)
                elif s in valid and t in valid and oracle.implies(proof.amap[t], moved):
                    additions.append(t)
            if additions:
                prev = proof.afa.delta.get((s, symbol))
                parts = [prev] if prev else []
                parts.extend(pb_state(t) for t in additions)
                proof.afa.delta[(s, symbol)] = pb_or(parts)
    return proof
