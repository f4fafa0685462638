import math

import numpy as np
import pytest
from scipy.stats import chisquare

from satlab.formula import degrees, is_simple, dimacs_str
from satlab.gen import (
    build_lambda_cell,
    mix64,
    sample_binomial,
    sample_classical,
    sample_poisson,
    sample_poisson_cloning,
    stream_rng,
    _decode_pair_clause,
    _encode_pair_clause,
)


def enumerate_matchings(items):
    """All perfect matchings of an even-size list, as frozensets of pairs."""
    items = list(items)
    if not items:
        return [frozenset()]
    first, rest = items[0], items[1:]
    out = []
    for i, other in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for sub in enumerate_matchings(remaining):
            out.append(sub | {frozenset((first, other))})
    return out


# --- seeding ---------------------------------------------------------------

def test_mix64_is_deterministic_and_distinct():
    seeds = {mix64(i) for i in range(4096)}
    assert len(seeds) == 4096
    assert mix64(0) == mix64(0)


def test_stream_rng_reproducible():
    a = stream_rng(99, 3).integers(0, 1 << 30, 10)
    b = stream_rng(99, 3).integers(0, 1 << 30, 10)
    c = stream_rng(99, 4).integers(0, 1 << 30, 10)
    assert (a == b).all()
    assert not (a == c).all()


# --- scalar samplers --------------------------------------------------------

def test_sample_binomial_edges():
    rng = stream_rng(1, 0)
    assert sample_binomial(1000, 0.0, rng) == 0
    assert sample_binomial(0, 0.5, rng) == 0
    assert sample_binomial(5, 1.0, rng) == 5


def test_sample_poisson_zero():
    rng = stream_rng(1, 1)
    assert sample_poisson(0.0, rng) == 0


def test_sample_poisson_chisquare_gof():
    rng = stream_rng(2, 0)
    draws = rng.poisson(3.0, size=100_000)
    kmax = 12
    observed = np.bincount(np.minimum(draws, kmax), minlength=kmax + 1)
    pmf = np.array([math.exp(-3.0) * 3.0**i / math.factorial(i) for i in range(kmax)])
    expected = np.append(pmf, 1.0 - pmf.sum()) * draws.size
    stat, pvalue = chisquare(observed, expected)
    assert pvalue > 1e-3


def test_sample_binomial_chisquare_gof():
    rng = stream_rng(2, 1)
    trials, p = 12, 0.35
    draws = np.array([sample_binomial(trials, p, rng) for _ in range(30_000)])
    observed = np.bincount(draws, minlength=trials + 1)
    expected = np.array([math.comb(trials, i) * p**i * (1 - p) ** (trials - i)
                         for i in range(trials + 1)]) * draws.size
    # merge sparse tails to keep expected counts reasonable
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    stat, pvalue = chisquare(obs, exp)
    assert pvalue > 1e-3


# --- classical model --------------------------------------------------------

def test_classical_p_zero_empty():
    f = sample_classical(100, 0.0, 2, stream_rng(3, 0))
    assert f.num_clauses == 0


def test_classical_p_one_full_universe():
    f = sample_classical(2, 1.0, 2, stream_rng(3, 1))
    assert f.num_clauses == 4
    assert set(f.clauses) == {(1, 2), (1, -2), (-1, 2), (-1, -2)}


def test_classical_samples_are_simple():
    for trial in range(1000):
        f = sample_classical(25, 1.2 / 49, 2, stream_rng(4, trial))
        assert is_simple(f)
        for cl in f.clauses:
            assert len(cl) == 2 and abs(cl[0]) != abs(cl[1])


def test_classical_mean_clause_count():
    # E[m] = p * 2n(n-1) with p = lam/(2n-1), lam = 1, n = 1000
    n, lam, draws = 1000, 1.0, 10_000
    p = lam / (2 * n - 1)
    target = p * 2 * n * (n - 1)
    counts = [sample_classical(n, p, 2, stream_rng(5, t)).num_clauses
              for t in range(draws)]
    mean = sum(counts) / draws
    sd_mean = math.sqrt(target * (1 - p)) / math.sqrt(draws)
    assert abs(mean - target) <= 3 * sd_mean


def test_classical_per_clause_inclusion_uniform():
    # every clause of the n=3 universe appears with its inclusion probability
    n, p, draws = 3, 0.4, 4000
    from collections import Counter

    seen = Counter()
    for t in range(draws):
        seen.update(sample_classical(n, p, 2, stream_rng(6, t)).clauses)
    assert len(seen) == 12  # 2^2 * C(3,2) possible clauses
    sd = math.sqrt(p * (1 - p) / draws)
    for clause, cnt in seen.items():
        assert abs(cnt / draws - p) <= 4.5 * sd


def test_classical_k3_clauses_distinct_vars():
    f = sample_classical(30, 2.0 / math.comb(59, 2), 3, stream_rng(7, 0))
    for cl in f.clauses:
        assert len(cl) == 3
        assert len({abs(l) for l in cl}) == 3


def test_pair_clause_codec_round_trip():
    n = 5
    universe = 4 * math.comb(n, 2)
    seen = set()
    for idx in range(universe):
        clause = _decode_pair_clause(idx, n)
        assert _encode_pair_clause(clause[0], clause[1], n) == idx
        seen.add(clause)
    assert len(seen) == universe


# --- Poisson cloning --------------------------------------------------------

def test_cloning_slot_conservation_and_single_unit():
    for trial in range(200):
        f = sample_poisson_cloning(20, 1.3, 2, stream_rng(8, trial))
        units = [c for c in f.clauses if len(c) == 1]
        assert len(units) <= 1
        assert f.num_slots == sum(len(c) for c in f.clauses)
        assert sum(degrees(f).values()) == f.num_slots


def test_cloning_mean_clause_count():
    # clauses = ceil(N/2), N ~ Poi(2 lam n):
    # E = lam n + (1 - e^(-4 lam n))/4
    n, lam, draws = 100, 1.0, 10_000
    counts = [sample_poisson_cloning(n, lam, 2, stream_rng(9, t)).num_clauses
              for t in range(draws)]
    mean = sum(counts) / draws
    target = lam * n + 0.25 * (1.0 - math.exp(-4 * lam * n))
    sd_mean = math.sqrt(2 * lam * n) / 2 / math.sqrt(draws)
    assert abs(mean - target) <= 3 * sd_mean


def test_cloning_loop_frequency_against_enumeration_oracle():
    # oracle: in a uniform matching on N clones, a fixed pair is matched in
    # (N-3)!! of (N-1)!! matchings = 1/(N-1); with uniform labels the
    # expected loop count is C(N,2)/((N-1) * 2n) = N/(4n)
    N, n = 6, 50
    matchings = enumerate_matchings(range(N))
    assert len(matchings) == 15
    pair_hits = sum(1 for m in matchings if frozenset((0, 1)) in m)
    assert pair_hits / len(matchings) == pytest.approx(1.0 / (N - 1))
    oracle_mean = math.comb(N, 2) / ((N - 1) * 2 * n)

    rng = stream_rng(10, 0)
    draws = 40_000
    loops = 0
    for _ in range(draws):
        labels = rng.integers(0, 2 * n, N)
        perm = rng.permutation(N)
        a, b = labels[perm[0::2]], labels[perm[1::2]]
        loops += int((a == b).sum())
    mean = loops / draws
    sd_mean = math.sqrt(oracle_mean / draws)  # loop count is nearly Poisson
    assert abs(mean - oracle_mean) <= 3.5 * sd_mean


def test_cloning_deterministic_dimacs_bytes():
    a = sample_poisson_cloning(40, 1.5, 2, stream_rng(11, 7))
    b = sample_poisson_cloning(40, 1.5, 2, stream_rng(11, 7))
    assert dimacs_str(a) == dimacs_str(b)


def test_cloning_k3_arities():
    f = sample_poisson_cloning(50, 2.0, 3, stream_rng(12, 0))
    arities = {len(c) for c in f.clauses}
    assert arities <= {1, 2, 3}
    small = [c for c in f.clauses if len(c) < 3]
    assert len(small) <= 1  # one defected clause of arity N mod 3


# --- lambda cell ------------------------------------------------------------

def test_lambda_cell_counts_positions_dispersion():
    lam = 1.5
    rng = stream_rng(13, 0)
    cell = build_lambda_cell(5000, lam, rng)
    per_lit = np.bincount(cell.lit, minlength=10_000)
    mean_count = per_lit.mean()
    assert abs(mean_count - lam) <= 3 * math.sqrt(lam / 10_000)
    assert abs(cell.pos.mean() - lam / 2) <= 3 * lam / math.sqrt(12 * cell.total_clones)
    assert cell.pos.min() >= 0.0 and cell.pos.max() <= lam
    # total count over repeated draws is Poi(2 lam n): variance/mean ~ 1
    totals = np.array([build_lambda_cell(100, 1.0, stream_rng(13, t)).total_clones
                       for t in range(1, 10_001)])
    ratio = totals.var(ddof=1) / totals.mean()
    assert 0.95 <= ratio <= 1.05


def test_lambda_cell_rejects_bad_lambda():
    with pytest.raises(ValueError):
        build_lambda_cell(10, 0.0, stream_rng(14, 0))
