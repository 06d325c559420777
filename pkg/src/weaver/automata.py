"""Alternating and nondeterministic finite automata.

Transitions are positive boolean formulas over state ids, which subsumes
the usual universal/existential state split: an existential state's letter
transition is an OR over successors, a universal state's epsilon move is
an AND over its children. Missing transitions read as FALSE, which makes
every automaton total and lets complementation be plain dualization.

Positive boolean formulas are canonical tagged tuples:

    ("1",)            true
    ("0",)            false
    ("s", state)      a state leaf
    ("&", c1, c2, ..) conjunction (children canonical, sorted, deduped)
    ("|", c1, c2, ..) disjunction
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass

PosBool = tuple
PB_TRUE: PosBool = ("1",)
PB_FALSE: PosBool = ("0",)

EPSILON = ""  # the empty label; real operation labels are nonempty


class AutomataError(Exception):
    pass


class EpsilonPresent(AutomataError):
    pass


class AlphabetMismatch(AutomataError):
    pass


class CapExceeded(AutomataError):
    """State budget exhausted; the verdict is unknown, not 'empty'."""


# ---------------------------------------------------------------------------
# Positive boolean formulas
# ---------------------------------------------------------------------------


def pb_state(state: str) -> PosBool:
    return ("s", state)


def _pb_gather(op: str, items) -> list[PosBool]:
    out = []
    for it in items:
        if it[0] == op:
            out.extend(it[1:])
        else:
            out.append(it)
    return out


def pb_and(items) -> PosBool:
    kids = _pb_gather("&", items)
    if any(k == PB_FALSE for k in kids):
        return PB_FALSE
    kids = sorted(set(k for k in kids if k != PB_TRUE))
    if not kids:
        return PB_TRUE
    if len(kids) == 1:
        return kids[0]
    return ("&", *kids)


def pb_or(items) -> PosBool:
    kids = _pb_gather("|", items)
    if any(k == PB_TRUE for k in kids):
        return PB_TRUE
    kids = sorted(set(k for k in kids if k != PB_FALSE))
    if not kids:
        return PB_FALSE
    if len(kids) == 1:
        return kids[0]
    return ("|", *kids)


def pb_dual(pb: PosBool) -> PosBool:
    tag = pb[0]
    if tag == "1":
        return PB_FALSE
    if tag == "0":
        return PB_TRUE
    if tag == "s":
        return pb
    kids = [pb_dual(k) for k in pb[1:]]
    return pb_and(kids) if tag == "|" else pb_or(kids)


def pb_eval(pb: PosBool, truth) -> bool:
    """Evaluate under a leaf valuation (callable state -> bool)."""
    tag = pb[0]
    if tag == "1":
        return True
    if tag == "0":
        return False
    if tag == "s":
        return truth(pb[1])
    if tag == "&":
        return all(pb_eval(k, truth) for k in pb[1:])
    return any(pb_eval(k, truth) for k in pb[1:])


def pb_substitute(pb: PosBool, mapping) -> PosBool:
    """Replace state leaves by formulas; ``mapping`` is state -> PosBool."""
    tag = pb[0]
    if tag in ("1", "0"):
        return pb
    if tag == "s":
        return mapping.get(pb[1], pb)
    kids = [pb_substitute(k, mapping) for k in pb[1:]]
    return pb_and(kids) if tag == "&" else pb_or(kids)


def pb_leaves(pb: PosBool) -> frozenset[str]:
    tag = pb[0]
    if tag in ("1", "0"):
        return frozenset()
    if tag == "s":
        return frozenset((pb[1],))
    out: frozenset[str] = frozenset()
    for k in pb[1:]:
        out |= pb_leaves(k)
    return out


def _prune_minimal(models) -> tuple[frozenset, ...]:
    models = sorted(set(models), key=lambda m: (len(m), sorted(m)))
    kept: list[frozenset] = []
    for m in models:
        if not any(k <= m for k in kept):
            kept.append(m)
    return tuple(kept)


def pb_min_models(pb: PosBool) -> tuple[frozenset[str], ...]:
    """The antichain of minimal state sets satisfying the formula."""
    tag = pb[0]
    if tag == "1":
        return (frozenset(),)
    if tag == "0":
        return ()
    if tag == "s":
        return (frozenset((pb[1],)),)
    if tag == "|":
        return _prune_minimal(m for k in pb[1:] for m in pb_min_models(k))
    models: tuple[frozenset, ...] = (frozenset(),)
    for k in pb[1:]:
        child = pb_min_models(k)
        models = _prune_minimal(m | c for m in models for c in child)
    return models


def pb_str(pb: PosBool) -> str:
    tag = pb[0]
    if tag == "1":
        return "true"
    if tag == "0":
        return "false"
    if tag == "s":
        return pb[1]
    sep = " & " if tag == "&" else " | "
    parts = []
    for k in pb[1:]:
        s = pb_str(k)
        if k[0] in ("&", "|") and k[0] != tag:
            s = f"({s})"
        parts.append(s)
    return sep.join(parts)


def pb_to_json(pb: PosBool):
    tag = pb[0]
    if tag == "1":
        return True
    if tag == "0":
        return False
    if tag == "s":
        return pb[1]
    return {("and" if tag == "&" else "or"): [pb_to_json(k) for k in pb[1:]]}


# ---------------------------------------------------------------------------
# Automata
# ---------------------------------------------------------------------------


@dataclass
class Afa:
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    delta: dict[tuple[str, str], PosBool]  # (state, letter-or-EPSILON) -> PosBool
    initial: PosBool
    accepting: frozenset[str]

    def transition(self, state: str, letter: str) -> PosBool:
        return self.delta.get((state, letter), PB_FALSE)

    def has_epsilon(self) -> bool:
        return any(l == EPSILON and pb != PB_FALSE for (_, l), pb in self.delta.items())


@dataclass
class Nfa:
    states: tuple[str, ...]
    alphabet: tuple[str, ...]
    transitions: dict[tuple[str, str], frozenset[str]]
    initial: frozenset[str]
    accepting: frozenset[str]


def nfa_accepts(nfa: Nfa, word) -> bool:
    current = set(nfa.initial)
    for letter in word:
        current = {t for s in current for t in nfa.transitions.get((s, letter), ())}
        if not current:
            return False
    return bool(current & nfa.accepting)


def nfa_to_afa(nfa: Nfa) -> Afa:
    delta: dict[tuple[str, str], PosBool] = {}
    for (s, letter), targets in nfa.transitions.items():
        delta[(s, letter)] = pb_or(pb_state(t) for t in sorted(targets))
    return Afa(
        states=nfa.states,
        alphabet=nfa.alphabet,
        delta=delta,
        initial=pb_or(pb_state(s) for s in sorted(nfa.initial)),
        accepting=nfa.accepting,
    )


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


def afa_accepts(afa: Afa, word, initial: PosBool | None = None) -> bool:
    """Run the acceptance recursion: existential choice is OR, universal
    branching is AND, with at most |states| consecutive epsilon steps
    between letters (epsilon cycles contribute nothing under finite-run
    semantics)."""
    word = tuple(word)
    budget = len(afa.states)
    memo: dict[tuple[str, int, int], bool] = {}

    def accept(state: str, i: int, eps_left: int) -> bool:
        key = (state, i, eps_left)
        if key in memo:
            return memo[key]
        memo[key] = False  # cut epsilon cycles while computing
        result = False
        if i == len(word) and state in afa.accepting:
            result = True
        if not result and i < len(word):
            result = pb_eval(afa.transition(state, word[i]),
                             lambda t: accept(t, i + 1, budget))
        if not result and eps_left > 0:
            eps = afa.transition(state, EPSILON)
            if eps != PB_FALSE:
                result = pb_eval(eps, lambda t: accept(t, i, eps_left - 1))
        memo[key] = result
        return result

    start = afa.initial if initial is None else initial
    return pb_eval(start, lambda s: accept(s, 0, budget))


# ---------------------------------------------------------------------------
# Epsilon elimination
# ---------------------------------------------------------------------------


def eliminate_epsilon(afa: Afa) -> Afa:
    """Language-equivalent epsilon-free AFA.

    Per letter, the transition formula is closed under leading epsilon
    moves by Kleene iteration of the substitution
    X(s) = delta(s, a) OR eps(s)[t := X(t)]; |states| rounds reach the
    least fixpoint since an accepting run never needs to repeat a state
    between letters. Acceptance is closed the same way.
    """
    if not afa.has_epsilon():
        return Afa(afa.states, afa.alphabet, dict(afa.delta), afa.initial, afa.accepting)
    eps = {s: afa.transition(s, EPSILON) for s in afa.states}
    new_delta: dict[tuple[str, str], PosBool] = {}
    for letter in afa.alphabet:
        base = {s: afa.transition(s, letter) for s in afa.states}
        cur = dict(base)
        for _ in range(len(afa.states)):
            sub = {s: cur[s] for s in afa.states}
            nxt = {}
            changed = False
            for s in afa.states:
                if eps[s] == PB_FALSE:
                    nxt[s] = cur[s]
                else:
                    nxt[s] = pb_or([base[s], pb_substitute(eps[s], sub)])
                changed = changed or nxt[s] != cur[s]
            cur = nxt
            if not changed:
                break
        for s in afa.states:
            if cur[s] != PB_FALSE:
                new_delta[(s, letter)] = cur[s]

    accepting = set(afa.accepting)
    changed = True
    while changed:
        changed = False
        for s in afa.states:
            if s not in accepting and eps[s] != PB_FALSE:
                if pb_eval(eps[s], lambda t: t in accepting):
                    accepting.add(s)
                    changed = True
    return Afa(afa.states, afa.alphabet, new_delta, afa.initial, frozenset(accepting))


# ---------------------------------------------------------------------------
# Boolean operations
# ---------------------------------------------------------------------------


def complement(afa: Afa) -> Afa:
    """De Morgan dual: every transition formula and the initial condition
    are dualized, the accepting set is complemented. Exact because FALSE
    defaults make the transition function total."""
    if afa.has_epsilon():
        raise EpsilonPresent("complement requires an epsilon-free AFA")
    delta = {}
    for s in afa.states:
        for letter in afa.alphabet:
            delta[(s, letter)] = pb_dual(afa.transition(s, letter))
    return Afa(
        states=afa.states,
        alphabet=afa.alphabet,
        delta=delta,
        initial=pb_dual(afa.initial),
        accepting=frozenset(afa.states) - afa.accepting,
    )


def intersect(a: Afa, b: Afa) -> Afa:
    """Disjoint union of the state spaces with conjoined initial
    conditions; accepts exactly the words both accept."""
    if set(a.alphabet) != set(b.alphabet):
        raise AlphabetMismatch(f"{sorted(a.alphabet)} vs {sorted(b.alphabet)}")
    used = set(a.states)
    rename: dict[str, str] = {}
    for s in b.states:
        new = s
        k = 2
        while new in used:
            new = f"{s}~{k}"
            k += 1
        rename[s] = new
        used.add(new)
    remap = {s: pb_state(n) for s, n in rename.items()}
    delta = dict(a.delta)
    for (s, letter), pb in b.delta.items():
        delta[(rename[s], letter)] = pb_substitute(pb, remap)
    return Afa(
        states=a.states + tuple(rename[s] for s in b.states),
        alphabet=a.alphabet,
        delta=delta,
        initial=pb_and([a.initial, pb_substitute(b.initial, remap)]),
        accepting=a.accepting | frozenset(rename[s] for s in b.accepting),
    )


# ---------------------------------------------------------------------------
# Alternation removal, emptiness, shortest word
# ---------------------------------------------------------------------------


def _subset_start(afa: Afa):
    return pb_min_models(afa.initial)


def _subset_step(afa: Afa, group: frozenset, letter: str):
    joint = pb_and([afa.transition(s, letter) for s in group])
    return pb_min_models(joint)


def afa_to_nfa(afa: Afa, cap: int = 10**5) -> Nfa:
    """Subset construction over minimal models (antichain style): an NFA
    state is a set of AFA states that must all accept the rest of the
    word. Membership-equivalent to the input."""
    if afa.has_epsilon():
        raise EpsilonPresent("convert after eliminate_epsilon")
    names: dict[frozenset, str] = {}
    order: list[frozenset] = []

    def intern(group: frozenset) -> str:
        if group not in names:
            if len(names) >= cap:
                raise CapExceeded(f"subset construction exceeds {cap} states")
            names[group] = f"n{len(names)}"
            order.append(group)
        return names[group]

    initial = frozenset(intern(g) for g in _subset_start(afa))
    transitions: dict[tuple[str, str], frozenset[str]] = {}
    i = 0
    while i < len(order):
        group = order[i]
        i += 1
        for letter in afa.alphabet:
            targets = _subset_step(afa, group, letter)
            if targets:
                transitions[(names[group], letter)] = frozenset(intern(t) for t in targets)
    accepting = frozenset(names[g] for g in order if g <= afa.accepting)
    return Nfa(
        states=tuple(names[g] for g in order),
        alphabet=afa.alphabet,
        transitions=transitions,
        initial=initial,
        accepting=accepting,
    )


def shortest_word(afa: Afa, cap: int = 10**5, stats: dict | None = None):
    """A minimum-length accepted word, ties broken lexicographically by the
    alphabet's declared order; None iff the language is empty (within cap).
    """
    if afa.has_epsilon():
        raise EpsilonPresent("extract after eliminate_epsilon")
    parent: dict[frozenset, tuple[frozenset, str] | None] = {}
    queue: deque[frozenset] = deque()
    for group in _subset_start(afa):
        if group not in parent:
            parent[group] = None
            queue.append(group)
    for group in parent:
        if group <= afa.accepting:
            return ()

    def rebuild(group: frozenset, letter: str):
        word = [letter]
        while parent[group] is not None:
            group, letter = parent[group]
            word.append(letter)
        return tuple(reversed(word))

    while queue:
        group = queue.popleft()
        for letter in afa.alphabet:
            for target in _subset_step(afa, group, letter):
                if target in parent:
                    continue
                if len(parent) >= cap:
                    raise CapExceeded(f"subset search exceeds {cap} states")
                parent[target] = (group, letter)
                if stats is not None:
                    stats["subset_peak"] = max(stats.get("subset_peak", 0), len(parent))
                if target <= afa.accepting:
                    return rebuild(group, letter)
                queue.append(target)
    if stats is not None:
        stats["subset_peak"] = max(stats.get("subset_peak", 0), len(parent))
    return None


def is_empty(afa: Afa, cap: int = 10**5) -> bool:
    return shortest_word(afa, cap) is None


def sample_accepted_words(afa: Afa, max_len: int, count: int, node_cap: int = 200_000):
    """Up to ``count`` accepted words of length <= max_len, in shortlex
    order. Walks the word tree of the determinized subset automaton, so it
    tolerates epsilon transitions only after elimination."""
    eps_free = eliminate_epsilon(afa)
    nfa = afa_to_nfa(eps_free)
    found: list[tuple] = []
    start = frozenset(nfa.initial)
    queue: deque[tuple[frozenset, tuple]] = deque([(start, ())])
    nodes = 0
    while queue and len(found) < count and nodes < node_cap:
        current, word = queue.popleft()
        nodes += 1
        if current & nfa.accepting:
            found.append(word)
            if len(found) >= count:
                break
        if len(word) >= max_len:
            continue
        for letter in nfa.alphabet:
            nxt = frozenset(t for s in current for t in nfa.transitions.get((s, letter), ()))
            if nxt:
                queue.append((nxt, word + (letter,)))
    return found


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------


def afa_to_json(afa: Afa, annotations: dict | None = None) -> str:
    table = {}
    for (s, letter), pb in sorted(afa.delta.items()):
        table.setdefault(s, {})[letter or "<eps>"] = pb_to_json(pb)
    doc = {
        "states": list(afa.states),
        "alphabet": list(afa.alphabet),
        "initial": pb_to_json(afa.initial),
        "accepting": sorted(afa.accepting),
        "delta": table,
    }
    if annotations:
        doc["annotations"] = annotations
    return json.dumps(doc, indent=2, sort_keys=True)


def afa_to_dot(afa: Afa, kinds: dict | None = None, labels: dict | None = None,
               notes: dict | None = None, name: str = "afa") -> str:
    """Graphviz rendering: universal states are double-bordered boxes
    annotated with a conjunction mark, existential states with a
    disjunction mark, accepting states double-circled."""
    kinds = kinds or {}
    labels = labels or {}
    notes = notes or {}
    lines = [f"digraph {name} {{", "  rankdir=LR;"]
    for s in afa.states:
        kind = kinds.get(s, "∃")
        shape = "box" if kind == "∀" else "ellipse"
        peripheries = 2 if s in afa.accepting else 1
        text = labels.get(s, s)
        label = f"{s}: {text}" if text != s else s
        label = f"{kind} {label}"
        if s in notes:
            label += f"\\n{notes[s]}"
        lines.append(
            f'  "{s}" [shape={shape}, peripheries={peripheries}, label="{label}"];')
    edges: dict[tuple[str, str], list[str]] = {}
    for (s, letter), pb in sorted(afa.delta.items()):
        if pb == PB_FALSE:
            continue
        display = letter or "ε"
        for t in sorted(pb_leaves(pb)):
            edges.setdefault((s, t), []).append(display)
    for (s, t), letters in sorted(edges.items()):
        lines.append(f'  "{s}" -> "{t}" [label="{",".join(letters)}"];')
    lines.append("}")
    return "\n".join(lines)
