"""Samplers: classical F(n,p;k), Poisson cloning F_PC(n,p;k), lambda-cells.

Clones are encoded literals 0..2n-1: literal 2(v-1) is +v, literal 2(v-1)+1
is -v, so negation is ``enc ^ 1`` and the integer order of encodings equals
the canonical (variable, polarity) order.

Reproducibility: every sampler takes a ``numpy.random.Generator``.  Parallel
trials derive per-trial generators with :func:`stream_rng`, which mixes
(master seed, stream id) through a SplitMix64-style 64-bit hash.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .formula import MultiFormula, pairs_to_formula

__all__ = [
    "LambdaCell",
    "mix64",
    "stream_rng",
    "sample_binomial",
    "sample_poisson",
    "sample_classical",
    "sample_poisson_cloning",
    "build_lambda_cell",
    "enc_to_signed",
    "signed_to_enc",
]

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15  # SplitMix64 sequence increment


def mix64(z: int) -> int:
    """SplitMix64 finalizer (Steele et al. constants)."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def stream_rng(master_seed: int, stream_id: int = 0) -> np.random.Generator:
    """Deterministic, collision-free per-stream generator: stream seeds are
    mix64(master + (stream_id + 1) * golden), a bijection in stream_id."""
    seed = mix64((master_seed + (stream_id + 1) * _GOLDEN) & _MASK64)
    return np.random.default_rng(seed)


def enc_to_signed(enc: int) -> int:
    v = (enc >> 1) + 1
    return -v if enc & 1 else v


def signed_to_enc(lit: int) -> int:
    return ((abs(lit) - 1) << 1) | (lit < 0)


def sample_binomial(trials: int, p: float, rng: np.random.Generator) -> int:
    """Exact Binomial(trials, p) draw (numpy inversion/BTPE, no normal
    approximation); trials must fit in int64."""
    if trials < 0 or not 0.0 <= p <= 1.0:
        raise ValueError("need trials >= 0 and p in [0,1]")
    if trials >= 1 << 63:
        raise ValueError("trials too large for exact binomial sampling")
    if p == 0.0 or trials == 0:
        return 0
    return int(rng.binomial(trials, p))


def sample_poisson(mu: float, rng: np.random.Generator) -> int:
    """Exact Poisson(mu) draw."""
    if mu < 0:
        raise ValueError("mu must be >= 0")
    if mu == 0.0:
        return 0
    return int(rng.poisson(mu))


def _classical_universe(n: int, k: int) -> int:
    return (1 << k) * math.comb(n, k)


def _decode_pair_clause(idx: int, n: int) -> tuple:
    """Inverse of the clause <-> integer bijection for k=2: index encodes
    (unordered distinct variable pair, two polarity bits)."""
    pol = idx & 3
    q = idx >> 2
    # pair_id = j*(j-1)/2 + i for 0 <= i < j < n
    j = (1 + math.isqrt(1 + 8 * q)) // 2
    while j * (j - 1) // 2 > q:
        j -= 1
    while (j + 1) * j // 2 <= q:
        j += 1
    i = q - j * (j - 1) // 2
    v1, v2 = i + 1, j + 1
    l1 = -v1 if pol & 2 else v1
    l2 = -v2 if pol & 1 else v2
    return (l1, l2)


def _encode_pair_clause(l1: int, l2: int, n: int) -> int:
    v1, v2 = abs(l1), abs(l2)
    if v1 > v2:
        v1, v2 = v2, v1
        l1, l2 = l2, l1
    i, j = v1 - 1, v2 - 1
    pol = (2 if l1 < 0 else 0) | (1 if l2 < 0 else 0)
    return ((j * (j - 1) // 2 + i) << 2) | pol


def sample_classical(n: int, p: float, k: int, rng: np.random.Generator) -> MultiFormula:
    """Classical model: each of the 2^k C(n,k) clauses included independently
    with probability p.  Draws m ~ Binomial exactly, then samples m distinct
    clauses uniformly by rejection against a hash set; the universe is never
    materialized unless p is large and the universe small.
    """
    if k < 2 or k > n:
        raise ValueError("need 2 <= k <= n")
    universe = _classical_universe(n, k)
    m = sample_binomial(universe, p, rng)
    if m == 0:
        return MultiFormula(n=n, clauses=(), k=k)

    if k == 2 and m * 2 > universe and universe <= 4_000_000:
        # dense regime: sample indices without replacement from the universe
        idxs = rng.choice(universe, size=m, replace=False)
        clauses = [_decode_pair_clause(int(i), n) for i in idxs]
        return MultiFormula(n=n, clauses=tuple(clauses), k=k)

    if k == 2:
        # vectorized rejection against integer clause keys
        two_n = 2 * n
        seen = set()
        add = seen.add
        lo_acc, hi_acc = [], []
        need = m
        while need > 0:
            batch = max(256, int(need * 1.3))
            vs = rng.integers(1, n + 1, size=(batch, 2))
            negs = rng.integers(0, 2, size=(batch, 2))
            enc = (vs - 1) * 2 + negs  # canonical order == integer order
            e = enc[vs[:, 0] != vs[:, 1]]
            lo = np.minimum(e[:, 0], e[:, 1]).tolist()
            hi = np.maximum(e[:, 0], e[:, 1]).tolist()
            for i in range(len(lo)):
                key = lo[i] * two_n + hi[i]
                if key not in seen:
                    add(key)
                    lo_acc.append(lo[i])
                    hi_acc.append(hi[i])
                    need -= 1
                    if need == 0:
                        break
        return pairs_to_formula(n, np.asarray(lo_acc, dtype=np.int64),
                                np.asarray(hi_acc, dtype=np.int64))

    seen = set()
    clauses = []
    need = m
    while need > 0:
        batch = max(64, int(need * 1.3))
        vs = rng.integers(1, n + 1, size=(batch, k))
        negs = rng.integers(0, 2, size=(batch, k))
        srt = np.sort(vs, axis=1)
        ok = np.all(srt[:, 1:] != srt[:, :-1], axis=1)
        enc = (vs - 1) * 2 + negs  # canonical order == integer order
        enc = np.sort(enc[ok], axis=1)
        for row in enc.tolist():
            key = tuple(row)
            if key not in seen:
                seen.add(key)
                clauses.append(tuple(-(e >> 1) - 1 if e & 1 else (e >> 1) + 1 for e in row))
                need -= 1
                if need == 0:
                    break
    return MultiFormula.from_canonical(n, tuple(sorted(clauses)), k=k)


def _contract_groups(labels: np.ndarray, k: int) -> list:
    """Turn rows of encoded clone labels into canonical signed clauses."""
    if labels.size == 0:
        return []
    enc = np.sort(labels.reshape(-1, k), axis=1)
    sign = 1 - 2 * (enc & 1)
    signed = sign * ((enc >> 1) + 1)
    return [tuple(row) for row in signed.tolist()]


def sample_poisson_cloning(n: int, lam: float, k: int, rng: np.random.Generator) -> MultiFormula:
    """Poisson cloning model: N ~ Poi(2*lam*n) clones with i.i.d. uniform
    literal labels, partitioned uniformly into k-sets and contracted; a
    remainder r = N mod k becomes one defected clause of arity r."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    if k < 2:
        raise ValueError("k must be >= 2")
    total = sample_poisson(2.0 * lam * n, rng)
    labels = rng.integers(0, 2 * n, size=total)
    perm = rng.permutation(total)
    shuffled = labels[perm]
    full = total - (total % k)
    clauses = _contract_groups(shuffled[:full], k)
    rem = shuffled[full:]
    if rem.size:
        enc = np.sort(rem)
        sign = 1 - 2 * (enc & 1)
        clauses.append(tuple((sign * ((enc >> 1) + 1)).tolist()))
    return MultiFormula(n=n, clauses=tuple(clauses), k=k)


@dataclass(frozen=True)
class LambdaCell:
    """Poisson lambda-cell: clone i carries encoded literal lit[i] and an
    i.i.d. uniform position pos[i] in [0, lam].  All clones start unmatched;
    matching state lives in the cut-off line engine, not here."""

    n: int
    lam: float
    lit: np.ndarray  # int64 encoded literals, one entry per clone
    pos: np.ndarray  # float64 positions in [0, lam]

    @property
    def total_clones(self) -> int:
        return int(self.lit.shape[0])


def build_lambda_cell(n: int, lam: float, rng: np.random.Generator) -> LambdaCell:
    """Per-literal clone counts i.i.d. Poi(lam); positions i.i.d. U[0, lam]."""
    if lam <= 0:
        raise ValueError("lam must be positive")
    counts = rng.poisson(lam, size=2 * n)
    lit = np.repeat(np.arange(2 * n, dtype=np.int64), counts)
    pos = rng.random(lit.shape[0]) * lam
    return LambdaCell(n=n, lam=lam, lit=lit, pos=pos)
