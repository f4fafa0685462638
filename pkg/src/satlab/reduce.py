"""Pure-literal reduction to the core and (1,1)-resolution to the kernel.

``pla_core`` runs the worklist pure-literal algorithm: satisfied literals'
clauses are removed until no pure literal remains; the result is
order-independent (confluence is exercised by the tests with randomized
worklists).

``kernel`` resolves variables of type (1,1) to a fixpoint.  Degenerate
resolvents (y ∨ ȳ) and single-clause remnants (x ∨ x̄) are dropped and
counted, so kernel variables end with type >= (1,2) or (2,1).  Dropping a
tautology lowers its variable's degrees, which can occasionally strand a
pure literal; those clauses are purged (a pure-literal step) and counted,
keeping the type floor and equisatisfiability intact.  Slot-level
bookkeeping reconciles the kernel clause count with the core census
identity 2|F_K| = M(1,2) + M(2,1) - M(2,2).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .formula import MultiFormula, census, census_M, canonical_clause

__all__ = [
    "PlaResult",
    "KernelResult",
    "ReductionStats",
    "pla_core",
    "pla_succeeds",
    "kernel",
    "kernel_order_invariance_check",
    "reduction_stats",
]


@dataclass(frozen=True)
class PlaResult:
    core: MultiFormula
    satisfied_literals: frozenset  # signed literals set true, no complementary pair
    removed_clauses: int


@dataclass(frozen=True)
class KernelResult:
    kernel: MultiFormula
    resolved_vars: int            # core variables eliminated on the way to the kernel
    dropped_degenerate: int       # tautology resolvents and (x ∨ x̄) remnants dropped
    purged_pure_clauses: int = 0  # clauses removed for literals that became pure
    removed_eligible_slots: int = 0  # slots of core-type >= (1,2)/(2,1) vars lost to drops


def _enc(lit: int) -> int:
    return ((abs(lit) - 1) << 1) | (lit < 0)


def pla_core(formula: MultiFormula, order_rng=None) -> PlaResult:
    """Fixpoint of pure-literal removal.

    Worklist processing is FIFO over literals in index order by default;
    pass ``order_rng`` to randomize the processing order (the core is the
    same either way).  Clauses of any arity are handled; a unit clause (y)
    contributes 1 to d(y).
    """
    n = formula.n
    clauses = formula.clauses
    two_n = 2 * n
    m = len(clauses)
    pairs_only = m > 0 and all(len(cl) == 2 for cl in clauses)
    if pairs_only:
        # vectorized setup: degrees and a CSR occurrence table
        arr = np.array(clauses, dtype=np.int64)
        enc2 = ((np.abs(arr) - 1) << 1) | (arr < 0)
        flat = enc2.ravel()
        deg = np.bincount(flat, minlength=two_n).tolist()
        order = np.argsort(flat, kind="stable")
        occ_ids = (order >> 1).tolist()  # clause id of each occurrence
        indptr = np.searchsorted(flat[order], np.arange(two_n + 1)).tolist()
        lit_rows = enc2.tolist()
    else:
        deg = [0] * two_n
        occ = [[] for _ in range(two_n)]
        lit_rows = []
        for ci, cl in enumerate(clauses):
            row = []
            for l in cl:
                e = _enc(l)
                deg[e] += 1
                occ[e].append(ci)
                row.append(e)
            lit_rows.append(row)

    work = deque()
    for v in range(n):
        a, b = deg[2 * v], deg[2 * v + 1]
        if a and not b:
            work.append(2 * v)
        elif b and not a:
            work.append(2 * v + 1)

    alive = bytearray(b"\x01" * m)
    satisfied = []
    removed = 0
    while work:
        if order_rng is None:
            L = work.popleft()
        else:
            i = int(order_rng.integers(len(work)))
            work[i], work[-1] = work[-1], work[i]
            L = work.pop()
        if deg[L] == 0:
            continue  # vanished before processing; no longer "in a clause"
        satisfied.append(-(L >> 1) - 1 if L & 1 else (L >> 1) + 1)
        occupied = occ_ids[indptr[L]:indptr[L + 1]] if pairs_only else occ[L]
        for ci in occupied:
            if not alive[ci]:
                continue
            alive[ci] = 0
            removed += 1
            for e in lit_rows[ci]:
                deg[e] -= 1
                if deg[e] == 0 and deg[e ^ 1] > 0:
                    work.append(e ^ 1)

    core_clauses = tuple(cl for ci, cl in enumerate(clauses) if alive[ci])
    core = MultiFormula.from_canonical(n, core_clauses, k=formula.k)
    return PlaResult(core=core, satisfied_literals=frozenset(satisfied),
                     removed_clauses=removed)


def pla_succeeds(formula: MultiFormula) -> bool:
    """True iff no clause remains after the pure literal algorithm stops."""
    return pla_core(formula).core.num_clauses == 0


def _signed(e: int) -> int:
    return -(e >> 1) - 1 if e & 1 else (e >> 1) + 1


def kernel(core: MultiFormula, order_rng=None) -> KernelResult:
    """Resolve all type-(1,1) variables of a pure-literal-free 2-SAT core."""
    n = core.n
    if any(len(cl) > 2 for cl in core.clauses):
        raise ValueError("kernel resolution is defined for arity <= 2 clauses")
    two_n = 2 * n
    deg = [0] * two_n
    clauses = list(core.clauses)
    occ = [[] for _ in range(two_n)]
    for ci, cl in enumerate(clauses):
        for l in cl:
            e = ((l - 1) << 1) if l > 0 else ((-l - 1) << 1) | 1
            deg[e] += 1
            occ[e].append(ci)
    for v in range(n):
        a, b = deg[2 * v], deg[2 * v + 1]
        if (a > 0) != (b > 0):
            raise ValueError(f"input contains a pure literal on variable {v + 1}")

    # core-type eligibility: variables the census identity counts as kernel
    eligible = bytearray(n)
    for v in range(n):
        a, b = deg[2 * v], deg[2 * v + 1]
        if (a >= 1 and b >= 2) or (a >= 2 and b >= 1):
            eligible[v] = 1

    alive = bytearray(b"\x01" * len(clauses))
    dropped_degenerate = 0
    purged_pure = 0
    removed_slots = 0
    res_work = deque(v for v in range(n) if deg[2 * v] == 1 and deg[2 * v + 1] == 1)
    pure_work = deque()
    nonlocal_changes = []  # literals whose degree changed since the last flush

    def _kill(ci: int):
        nonlocal removed_slots
        alive[ci] = 0
        for l in clauses[ci]:
            e = ((l - 1) << 1) if l > 0 else ((-l - 1) << 1) | 1
            deg[e] -= 1
            if eligible[e >> 1]:
                removed_slots += 1
            nonlocal_changes.append(e)

    def _spawn(lits) -> None:
        nonlocal removed_slots
        ci = len(clauses)
        clauses.append(lits)
        alive.append(1)
        for l in lits:
            e = ((l - 1) << 1) if l > 0 else ((-l - 1) << 1) | 1
            deg[e] += 1
            if eligible[e >> 1]:
                removed_slots -= 1
            occ[e].append(ci)
            nonlocal_changes.append(e)

    def _flush_changes():
        while nonlocal_changes:
            e = nonlocal_changes.pop()
            v = e >> 1
            a, b = deg[2 * v], deg[2 * v + 1]
            if a == 1 and b == 1:
                res_work.append(v)
            elif (a > 0) != (b > 0):
                pure_work.append(2 * v if a else 2 * v + 1)

    def _find_clause(e: int) -> int:
        for ci in occ[e]:
            if alive[ci]:
                return ci
        raise AssertionError("occurrence list out of sync")

    def _pop(queue):
        if order_rng is None:
            return queue.popleft()
        i = int(order_rng.integers(len(queue)))
        queue[i], queue[-1] = queue[-1], queue[i]
        return queue.pop()

    while res_work or pure_work:
        while pure_work:
            L = _pop(pure_work)
            if deg[L] == 0 or deg[L ^ 1] != 0:
                continue  # stale entry
            for ci in occ[L]:
                if alive[ci]:
                    _kill(ci)
                    purged_pure += 1
            _flush_changes()
        if not res_work:
            break
        v = _pop(res_work)
        ep, en = 2 * v, 2 * v + 1
        if deg[ep] != 1 or deg[en] != 1:
            continue  # stale entry
        ca = _find_clause(ep)
        cb = _find_clause(en)
        if ca == cb:
            # both occurrences in one clause: the remnant (x ∨ x̄)
            _kill(ca)
            dropped_degenerate += 1
            _flush_changes()
            continue
        pv, nv = v + 1, -(v + 1)
        rest = [l for l in clauses[ca] if l != pv]
        rest += [l for l in clauses[cb] if l != nv]
        _kill(ca)
        _kill(cb)
        if len(rest) == 0:
            raise ValueError("resolution produced an empty clause; input is unsatisfiable")
        if len(rest) == 2 and rest[0] == -rest[1]:
            dropped_degenerate += 1  # degenerate resolvent (y ∨ ȳ)
        else:
            _spawn(canonical_clause(rest))
        _flush_changes()

    # clauses are canonical throughout (core input + canonicalized resolvents)
    kernel_clauses = tuple(sorted(cl for ci, cl in enumerate(clauses) if alive[ci]))
    kern = MultiFormula.from_canonical(n, kernel_clauses, k=core.k)
    core_vars = {abs(l) for cl in core.clauses for l in cl}
    kern_vars = {abs(l) for cl in kernel_clauses for l in cl}
    return KernelResult(
        kernel=kern,
        resolved_vars=len(core_vars) - len(kern_vars),
        dropped_degenerate=dropped_degenerate,
        purged_pure_clauses=purged_pure,
        removed_eligible_slots=removed_slots,
    )


def kernel_order_invariance_check(core: MultiFormula, trials: int, rng) -> bool:
    """Run resolution with ``trials`` randomized orders; True iff every run
    yields the same canonical kernel."""
    reference = kernel(core).kernel
    for _ in range(trials):
        if kernel(core, order_rng=rng).kernel != reference:
            return False
    return True


@dataclass(frozen=True)
class ReductionStats:
    core_census: dict
    kernel_census: dict
    core_clauses: int
    kernel_clauses: int
    core_m11: int
    kernel_slot_identity: dict = field(default_factory=dict)


def reduction_stats(formula: MultiFormula) -> ReductionStats:
    """Full pipeline F -> core -> kernel with census statistics.

    Asserts on every input: M_core(1,1) equals the core's total slot count
    (so |F_C| = M(1,1)/2 for unit-free cores), and the kernel slot count
    equals M(1,2)+M(2,1)-M(2,2) minus the slots lost to degenerate drops
    and purges (exact reconciliation; the convention is reported).
    """
    core = pla_core(formula).core
    kres = kernel(core)
    ccen = census(core)
    kcen = census(kres.kernel)
    m11 = census_M(ccen, 1, 1)
    core_slots = core.num_slots
    if m11 != core_slots:
        raise RuntimeError(f"core slot identity violated: M(1,1)={m11} != {core_slots}")
    predicted = census_M(ccen, 1, 2) + census_M(ccen, 2, 1) - census_M(ccen, 2, 2)
    actual = kres.kernel.num_slots
    if predicted != actual + kres.removed_eligible_slots:
        raise RuntimeError(
            "kernel slot identity violated: "
            f"M(1,2)+M(2,1)-M(2,2)={predicted}, kernel slots={actual}, "
            f"removed={kres.removed_eligible_slots}"
        )
    return ReductionStats(
        core_census=ccen,
        kernel_census=kcen,
        core_clauses=core.num_clauses,
        kernel_clauses=kres.kernel.num_clauses,
        core_m11=m11,
        kernel_slot_identity={
            "predicted_slots": predicted,
            "kernel_slots": actual,
            "dropped_degenerate": kres.dropped_degenerate,
            "purged_pure_clauses": kres.purged_pure_clauses,
            "removed_eligible_slots": kres.removed_eligible_slots,
            "convention": "degenerate resolvents dropped; emergent pure literals purged",
        },
    )
