"""Multiformula data model: clauses, degrees, type census and DIMACS I/O.

Literals are signed integers in DIMACS style: ``+v`` is the positive literal
of variable ``v`` (1-based), ``-v`` its negation.  A clause is a tuple of
literals in canonical order (sorted by variable index, positive polarity
first), so clause equality is order-insensitive.  Clauses may repeat a
variable: ``(v, v)`` is a loop and ``(v, -v)`` a tautology; both arise from
clone matchings and from resolution, never from the classical sampler.
Arity-1 clauses encode the defected clause left by an odd clone count.

Degrees are slot counts: a loop contributes 2 to one literal, a tautology 1
to each polarity, a unit clause 1.
"""

from __future__ import annotations

import bisect
import io
from collections import Counter
from dataclasses import dataclass, field
from itertools import chain

import numpy as np

__all__ = [
    "Clause",
    "MultiFormula",
    "TypeCensus",
    "canonical_clause",
    "negate",
    "variable_of",
    "degrees",
    "census",
    "census_D",
    "census_M",
    "is_simple",
    "read_dimacs",
    "write_dimacs",
    "dimacs_str",
    "DimacsError",
    "DimacsHeaderError",
    "DimacsRangeError",
    "DimacsTerminatorError",
]

Clause = tuple  # tuple of signed int literals, canonical order
TypeCensus = dict  # (i, j) -> number of variables of type (i, j)


def negate(lit: int) -> int:
    """Negation of a signed literal; an involution."""
    return -lit


def variable_of(lit: int) -> int:
    return abs(lit)


def _lit_key(lit: int):
    # canonical slot order: by variable index, positive before negative
    return (abs(lit), lit < 0)


def canonical_clause(lits) -> Clause:
    """Sort literal slots into canonical order."""
    return tuple(sorted(lits, key=_lit_key))


@dataclass(frozen=True)
class MultiFormula:
    """Multiset of clauses over n Boolean variables.

    Clauses are stored canonically sorted, so two formulas are equal as
    multisets iff their ``clauses`` tuples are equal.  Instances are
    immutable after construction.
    """

    n: int
    clauses: tuple = ()
    k: int = 2
    _skip_canon: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("variable count must be nonnegative")
        if self._skip_canon:
            return
        canon = sorted(canonical_clause(c) for c in self.clauses)
        for c in canon:
            if len(c) < 1:
                raise ValueError("empty clause not representable")
            for lit in c:
                v = abs(lit)
                if not 1 <= v <= self.n:
                    raise ValueError(f"literal {lit} out of range for n={self.n}")
        object.__setattr__(self, "clauses", tuple(canon))

    @classmethod
    def from_canonical(cls, n: int, clauses_sorted: tuple, k: int = 2) -> "MultiFormula":
        """Trusted constructor: caller guarantees canonical sorted clauses."""
        return cls(n=n, clauses=clauses_sorted, k=k, _skip_canon=True)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def num_slots(self) -> int:
        return sum(len(c) for c in self.clauses)

    def variables(self) -> set:
        return {abs(l) for c in self.clauses for l in c}


def pairs_to_formula(n: int, lo: np.ndarray, hi: np.ndarray, unit_enc=None,
                     k: int = 2) -> MultiFormula:
    """Encoded literal endpoint arrays (lo <= hi per pair, encoded order =
    canonical slot order) to a canonically sorted MultiFormula; an optional
    encoded unit literal is inserted in place.  Vectorized construction for
    the samplers and the matching engine."""
    sa = (1 - 2 * (lo & 1)) * ((lo >> 1) + 1)
    sb = (1 - 2 * (hi & 1)) * ((hi >> 1) + 1)
    order = np.lexsort((sb, sa))
    clauses = list(zip(sa[order].tolist(), sb[order].tolist()))
    if unit_enc is not None:
        u = int(unit_enc)
        bisect.insort(clauses, (-(u >> 1) - 1 if u & 1 else (u >> 1) + 1,))
    return MultiFormula.from_canonical(n, tuple(clauses), k=k)


def degrees(formula: MultiFormula) -> dict:
    """Slot count per literal; includes the zero-degree opposite polarity
    of every variable that occurs."""
    d = Counter(chain.from_iterable(formula.clauses))
    out = {}
    for lit in d:
        out[lit] = d[lit]
        out.setdefault(-lit, 0)
    return out


def census(formula: MultiFormula) -> TypeCensus:
    """Count variables by type (i, j) = (d(x), d(x̄)); isolated variables
    (type (0,0)) are excluded."""
    d = Counter(chain.from_iterable(formula.clauses))
    out = Counter()
    get = d.get
    for v in {abs(l) for l in d}:
        out[(get(v, 0), get(-v, 0))] += 1
    return dict(out)


def _check_type_index(i: int, j: int):
    if i < 0 or j < 0 or (i, j) == (0, 0):
        raise ValueError(f"type index ({i},{j}) must be >= (0,1) or (1,0)")


def census_D(c: TypeCensus, i: int, j: int) -> int:
    """Number of variables of type >= (i, j) componentwise."""
    _check_type_index(i, j)
    return sum(cnt for (a, b), cnt in c.items() if a >= i and b >= j)


def census_M(c: TypeCensus, i: int, j: int) -> int:
    """Total degree (both polarities) of variables of type >= (i, j)."""
    _check_type_index(i, j)
    return sum((a + b) * cnt for (a, b), cnt in c.items() if a >= i and b >= j)


def is_simple(formula: MultiFormula) -> bool:
    """True iff no clause puts two slots on one variable (loop or
    tautology) and no clause occurs twice."""
    seen = set()
    for clause in formula.clauses:
        vs = [abs(l) for l in clause]
        if len(set(vs)) != len(vs):
            return False
        if clause in seen:
            return False
        seen.add(clause)
    return True


class DimacsError(ValueError):
    """Malformed DIMACS input."""


class DimacsHeaderError(DimacsError):
    """Missing or malformed ``p cnf n m`` header."""


class DimacsRangeError(DimacsError):
    """Variable index out of the header's declared range."""


class DimacsTerminatorError(DimacsError):
    """Clause line not terminated by 0."""


def read_dimacs(stream) -> MultiFormula:
    """Parse extended DIMACS CNF: duplicates, repeated variables and
    arity-1 lines (the defected clause) are permitted."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    n = None
    clauses = []
    for raw in stream:
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if n is None:
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsHeaderError(f"bad header line: {line!r}")
            try:
                n, _m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsHeaderError(f"non-integer header fields: {line!r}")
            if n < 0 or _m < 0:
                raise DimacsHeaderError(f"negative header fields: {line!r}")
            continue
        try:
            toks = [int(t) for t in line.split()]
        except ValueError:
            raise DimacsError(f"non-integer token in clause line: {line!r}")
        if not toks or toks[-1] != 0:
            raise DimacsTerminatorError(f"clause line missing 0 terminator: {line!r}")
        lits = toks[:-1]
        if 0 in lits:
            raise DimacsTerminatorError(f"stray 0 inside clause line: {line!r}")
        if not lits:
            raise DimacsError(f"empty clause line: {line!r}")
        for lit in lits:
            if not 1 <= abs(lit) <= n:
                raise DimacsRangeError(f"literal {lit} out of range 1..{n}")
        clauses.append(tuple(lits))
    if n is None:
        raise DimacsHeaderError("missing header")
    k = max((len(c) for c in clauses), default=2)
    return MultiFormula(n=n, clauses=tuple(clauses), k=max(k, 2))


def write_dimacs(formula: MultiFormula, stream) -> None:
    """Write canonical-form DIMACS; read_dimacs(write_dimacs(F)) == F."""
    stream.write(f"p cnf {formula.n} {formula.num_clauses}\n")
    for clause in formula.clauses:
        stream.write(" ".join(str(l) for l in clause) + " 0\n")


def dimacs_str(formula: MultiFormula) -> str:
    buf = io.StringIO()
    write_dimacs(formula, buf)
    return buf.getvalue()
