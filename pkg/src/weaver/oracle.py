"""Decision procedures over program formulas.

The default backend enumerates the finite domains declared for every
variable, which is exact for the finite-state programs this tool targets.
An external SMT-LIB2 solver can be swapped in for cross-checking; its
verdicts are over unbounded integers, so "unsat" remains sound for any
domain.
"""

from __future__ import annotations

import itertools
import math
import os
import subprocess
import threading
from dataclasses import dataclass

from .formula import Formula, conj, negate

DomainMap = dict[str, tuple[int, ...]]


class OracleError(Exception):
    pass


class CapExceeded(OracleError):
    """The enumeration or construction cap was hit; the verdict is unknown."""


class SolverFailure(OracleError):
    """The external solver died, timed out, or produced unparsable output."""


@dataclass
class OracleConfig:
    mode: str = "finite"  # "finite" or "smt"
    enum_cap: int = 10**6  # max assignments enumerated per query
    smt_cmd: str | None = None  # solver command line; reads stdin, prints sat/unsat
    timeout_ms: int = 30_000
    core_subset_cap: int = 4096  # max subsets explored by core enumeration

    def __post_init__(self):
        if self.enum_cap < 1 or self.timeout_ms < 1:
            raise ValueError("caps and timeouts must be positive")

    def resolve_smt_cmd(self) -> str:
        cmd = self.smt_cmd or os.environ.get("WEAVER_SMT_CMD")
        if not cmd:
            raise SolverFailure("no SMT solver command configured (--smt-cmd or WEAVER_SMT_CMD)")
        return cmd


@dataclass
class UnsatCoreSet:
    """All minimal index subsets whose conjunction is unsatisfiable."""

    cores: tuple[frozenset[int], ...]
    truncated: bool = False

    def __iter__(self):
        return iter(self.cores)

    def __len__(self):
        return len(self.cores)


def smt2_script(f: Formula) -> str:
    """An SMT-LIB2 satisfiability query for ``f`` over unbounded integers."""
    lines = ["(set-logic QF_LIA)"]
    for v in sorted(f.free_vars()):
        lines.append(f"(declare-const {v} Int)")
    lines.append(f"(assert {f.to_smt2()})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


class Oracle:
    """Satisfiability, implication, equivalence, and minimal-unsat-core
    enumeration, with verdict memoization on canonical formula text.

    Logically stateless: the cache only ever stores verdicts that every
    later call would recompute, so concurrent use is safe.
    """

    def __init__(self, domains: DomainMap, config: OracleConfig | None = None):
        self.domains = {n: tuple(d) for n, d in domains.items()}
        for name, dom in self.domains.items():
            if not dom:
                raise ValueError(f"empty domain for {name}")
        self.config = config or OracleConfig()
        self._cache: dict = {}
        self._lock = threading.Lock()
        self.stats = {"queries": 0, "cache_hits": 0, "solver_calls": 0}

    # -- satisfiability ----------------------------------------------------

    def is_sat(self, f: Formula) -> bool:
        if f.is_true:
            return True
        if f.is_false:
            return False
        key = f.key()
        with self._lock:
            self.stats["queries"] += 1
            if key in self._cache:
                self.stats["cache_hits"] += 1
                return self._cache[key]
        verdict = self._decide(f)
        with self._lock:
            self._cache[key] = verdict
        return verdict

    def _decide(self, f: Formula) -> bool:
        if self.config.mode == "smt":
            return self._decide_smt(f)
        return self._decide_finite(f)

    def _decide_finite(self, f: Formula) -> bool:
        names = sorted(f.free_vars())
        doms = []
        for n in names:
            if n not in self.domains:
                raise OracleError(f"no declared domain for variable {n}")
            doms.append(self.domains[n])
        total = math.prod(len(d) for d in doms)
        if total > self.config.enum_cap:
            raise CapExceeded(f"{total} assignments exceed cap {self.config.enum_cap}")
        for combo in itertools.product(*doms):
            if f.evaluate(dict(zip(names, combo))):
                return True
        return False

    def _decide_smt(self, f: Formula) -> bool:
        cmd = self.config.resolve_smt_cmd()
        with self._lock:
            self.stats["solver_calls"] += 1
        try:
            proc = subprocess.run(
                cmd,
                shell=True,
                input=smt2_script(f),
                capture_output=True,
                text=True,
                timeout=self.config.timeout_ms / 1000.0,
            )
        except subprocess.TimeoutExpired as e:
            raise SolverFailure(f"solver timed out after {self.config.timeout_ms} ms") from e
        except OSError as e:
            raise SolverFailure(f"could not run solver: {e}") from e
        tokens = proc.stdout.split()
        if "unsat" in tokens:
            return False
        if "sat" in tokens:
            return True
        raise SolverFailure(
            f"solver produced no sat/unsat verdict (exit {proc.returncode}): "
            f"{proc.stdout!r} {proc.stderr!r}"
        )

    # -- derived judgments ---------------------------------------------------

    def implies(self, f1: Formula, f2: Formula) -> bool:
        return not self.is_sat(conj(f1, negate(f2)))

    def equivalent(self, f1: Formula, f2: Formula) -> bool:
        if f1 == f2:
            return True
        return self.implies(f1, f2) and self.implies(f2, f1)

    def is_valid(self, f: Formula) -> bool:
        return not self.is_sat(negate(f))

    # -- minimal unsat cores -------------------------------------------------

    def minimal_unsat_cores(self, fs: list[Formula], max_cores: int | None = None) -> UnsatCoreSet:
        """All minimal index subsets of ``fs`` with unsatisfiable conjunction.

        Subsets are explored in increasing size, so the first hit containing
        no previously found core is minimal by construction. If the subset
        budget runs out, one core is still recovered by deletion-based
        shrinking of the full set and the result is flagged truncated.
        """
        if not fs:
            raise ValueError("need at least one formula")
        n = len(fs)
        if self.is_sat(conj(*fs)):
            return UnsatCoreSet(())
        cores: list[frozenset[int]] = []
        explored = 0
        truncated = False
        for size in range(1, n + 1):
            for combo in itertools.combinations(range(n), size):
                s = frozenset(combo)
                if any(core <= s for core in cores):
                    continue
                explored += 1
                if explored > self.config.core_subset_cap:
                    truncated = True
                    break
                if not self.is_sat(conj(*(fs[i] for i in combo))):
                    cores.append(s)
                    if max_cores is not None and len(cores) >= max_cores:
                        truncated = True
                        break
            if truncated:
                break
        if truncated and not cores:
            cores.append(self._shrink(fs, frozenset(range(n))))
        return UnsatCoreSet(tuple(cores), truncated)

    def _shrink(self, fs: list[Formula], seed: frozenset[int]) -> frozenset[int]:
        """Deletion-based reduction of an unsat seed to one minimal core."""
        core = set(seed)
        for i in sorted(seed):
            trial = core - {i}
            if trial and not self.is_sat(conj(*(fs[j] for j in trial))):
                core = trial
        return frozenset(core)
