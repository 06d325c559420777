"""Safety verifier for finite-state shared-memory concurrent programs.

Proves all interleavings of a concurrent program correct (or produces a
counterexample trace) by turning weakest-precondition proofs of single
traces into alternating finite automata, generalizing them, and
subtracting their languages from the set of unproven traces.
"""

__version__ = "0.1.0"
