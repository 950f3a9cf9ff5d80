"""Shared fixtures: reference sources and independent brute-force oracles.

The oracles here (path enumeration, quadrature) are deliberately written
against the mathematical definitions only, so they stay independent of the
library code paths they are used to check.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from shancode import ExactProb, MarkovSource


# -- reference sources -------------------------------------------------------


def memoryless(probs, initial=None) -> MarkovSource:
    """Markov wrapper of a memoryless source with exact rational letters."""
    probs = [str(p) for p in probs]
    rows = [list(probs) for _ in probs]
    return MarkovSource.from_exact(initial or list(probs), rows)


@pytest.fixture(scope="session")
def dyadic_memoryless():
    return memoryless([Fraction(1, 2), Fraction(1, 2)])


@pytest.fixture(scope="session")
def dyadic_markov_pair():
    """Two dyadic Markov chains (every probability a power of two)."""
    a = MarkovSource.from_exact(["1/2", "1/2"], [["1/2", "1/2"], [1, 0]])
    b = MarkovSource.from_exact(["1/4", "1/4", "1/2"], [["1/2", "1/2", 0], [0, "1/2", "1/2"], ["1/2", 0, "1/2"]])
    return a, b


@pytest.fixture(scope="session")
def dyadic_r3():
    return MarkovSource.from_exact(
        ["1/4", "1/4", "1/2"],
        [["1/2", "1/4", "1/4"], ["1/4", "1/2", "1/4"], ["1/4", "1/4", "1/2"]],
    )


@pytest.fixture(scope="session")
def permutation_source():
    """Row-permutation chain with power-of-two letter ratios, initial equal to the first row."""
    return MarkovSource.from_exact(["1/3", "2/3"], [["1/3", "2/3"], ["2/3", "1/3"]])


@pytest.fixture(scope="session")
def permutation_state0_start():
    """Same chain started deterministically at state 0."""
    return MarkovSource.from_exact([1, 0], [["1/3", "2/3"], ["2/3", "1/3"]])


@pytest.fixture(scope="session")
def cycle_source():
    """Deterministic two-cycle with non-dyadic initial probabilities."""
    return MarkovSource.from_exact(["1/3", "2/3"], [[0, 1], [1, 0]])


@pytest.fixture(scope="session")
def bipartite_periodic_source():
    """Irreducible period-2 chain with a stochastic branch out of state 0."""
    return MarkovSource.from_exact(
        [1, 0, 0], [[0, "1/3", "2/3"], [1, 0, 0], [1, 0, 0]]
    )


@pytest.fixture(scope="session")
def absorbing_source():
    """Reducible two-state chain leaking into an absorbing state, alpha = 1/3."""
    return MarkovSource.from_exact([1, 0], [["2/3", "1/3"], [0, 1]])


@pytest.fixture(scope="session")
def float_convergent_source():
    return MarkovSource.from_floats([0.5, 0.5], [[0.3, 0.7], [0.6, 0.4]])


def half_exponent_source(e11, e12, e21, e22, precision=10**13) -> MarkovSource:
    """Positive exact source with half-integer power-of-two exponents.

    Entries have the ratio structure p(j|k) = mu0 (w_j / w_k) 2**e_kj, so all
    anchor log-ratios are exactly rational (multiples of 1/2) regardless of
    the rational factors mu0, w.  Exact stochasticity is impossible with
    non-integer exponents, so mu0 and w are rational approximations of the
    real solution and the rows sum to 1 only within ~1/precision; validation
    accepts the source with the row_sums_inexact flag.
    """
    e = [Fraction(x) for x in (e11, e12, e21, e22)]
    t11, t12, t21, t22 = (2.0 ** float(x) for x in e)
    # rows sum to one: mu0 (t11 + w t12) = 1 = mu0 (t21 / w + t22)
    disc = (t11 - t22) ** 2 + 4.0 * t12 * t21
    w = (-(t11 - t22) + math.sqrt(disc)) / (2.0 * t12)
    mu0 = 1.0 / (t11 + w * t12)
    w_f = Fraction(w).limit_denominator(precision)
    mu0_f = Fraction(mu0).limit_denominator(precision)
    entries = [
        [ExactProb.make(mu0_f, e[0]), ExactProb.make(mu0_f * w_f, e[1])],
        [ExactProb.make(mu0_f / w_f, e[2]), ExactProb.make(mu0_f, e[3])],
    ]
    assert all(p.to_float() > 0 and p.value_at_most_one() for row in entries for p in row)
    return MarkovSource.from_exact(["1/2", "1/2"], entries)


@pytest.fixture(scope="session")
def m2_source():
    """Oscillation order 2: alpha entries {0, 3/2, 1/2}, built from 2^(-1/2) factors."""
    return half_exponent_source(-1, Fraction(-3, 2), -2, Fraction(-1, 2))


@pytest.fixture(scope="session")
def oscillatory_exact_family(permutation_source, permutation_state0_start, m2_source):
    """Positive exact oscillatory sources; the last two have order M = 2."""
    return [
        permutation_source,
        permutation_state0_start,
        memoryless([Fraction(1, 3), Fraction(2, 3)]),
        memoryless([Fraction(1, 5), Fraction(4, 5)]),
        memoryless([Fraction(1, 9), Fraction(8, 9)]),
        memoryless([Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)]),
        MarkovSource.from_exact(
            ["1/2", "1/4", "1/4"],
            [["1/7", "2/7", "4/7"], ["2/7", "4/7", "1/7"], ["4/7", "1/7", "2/7"]],
        ),
        MarkovSource.from_exact(["2/3", "1/3"], [["1/5", "4/5"], ["4/5", "1/5"]]),
        MarkovSource.from_exact(["1/2", "1/2"], [["2/3", "1/3"], ["1/3", "2/3"]]),
        half_exponent_source(-1, Fraction(-5, 2), -1, Fraction(-1, 2)),
        half_exponent_source(-1, Fraction(-3, 2), -2, Fraction(-1, 2)),
    ]


@pytest.fixture(scope="session")
def convergent_exact_source():
    """Positive exact source with a provably irrational log-ratio."""
    return MarkovSource.from_exact(["1/2", "1/2"], [["3/8", "5/8"], ["5/8", "3/8"]])


def random_float_source(rng, r: int, with_zeros: bool = False) -> MarkovSource:
    P = rng.random((r, r)) + 0.05
    if with_zeros and r >= 2:
        # zero one off-diagonal entry per row at most, keeping irreducibility likely
        for k in range(r):
            if rng.random() < 0.5:
                j = int(rng.integers(0, r))
                if j != (k + 1) % r:
                    P[k, j] = 0.0
    P = P / P.sum(axis=1, keepdims=True)
    p0 = rng.random(r) + 0.05
    if with_zeros and r >= 3 and rng.random() < 0.3:
        p0[int(rng.integers(0, r))] = 0.0
    p0 = p0 / p0.sum()
    return MarkovSource.from_floats(p0, P)


# -- independent oracles ------------------------------------------------------


def iter_paths_bruteforce(source: MarkovSource, n: int):
    """Yield (path, mu) over the support, by explicit product of probabilities."""
    init = source.initial_array()
    P = source.transition_array()

    def extend(path, mu):
        if len(path) == n:
            yield tuple(path), mu
            return
        for j in range(source.r):
            p = P[path[-1], j]
            if p > 0:
                path.append(j)
                yield from extend(path, mu * p)
                path.pop()

    for s0 in range(source.r):
        if init[s0] > 0:
            yield from extend([s0], init[s0])


def redundancy_bruteforce(source: MarkovSource, n: int) -> float:
    total = 0.0
    for _, mu in iter_paths_bruteforce(source, n):
        neg = -math.log2(mu)
        nearest = round(neg)
        if abs(neg - nearest) <= 1e-9:
            continue
        total += mu * (math.ceil(neg) - neg)
    return total


def path_arrays(source: MarkovSource, n: int):
    """(probabilities, -log2 mu) over the support as flat arrays, built iteratively."""
    init = source.initial_array()
    P = source.transition_array()
    with np.errstate(divide="ignore"):
        neg_init = np.where(init > 0, -np.log2(np.where(init > 0, init, 1.0)), np.inf)
        neg_step = np.where(P > 0, -np.log2(np.where(P > 0, P, 1.0)), np.inf)
    states = np.arange(source.r)[init > 0]
    probs = init[states]
    negs = neg_init[init > 0]
    for _ in range(n - 1):
        new_states = []
        new_probs = []
        new_negs = []
        for j in range(source.r):
            mask = P[states, j] > 0
            if mask.any():
                new_states.append(np.full(int(mask.sum()), j))
                new_probs.append(probs[mask] * P[states[mask], j])
                new_negs.append(negs[mask] + neg_step[states[mask], j])
        states = np.concatenate(new_states)
        probs = np.concatenate(new_probs)
        negs = np.concatenate(new_negs)
    return probs, negs


def char_fn_bruteforce(source: MarkovSource, m: int, n: int) -> complex:
    """Enumeration expectation of exp(-2 pi i m log2 mu)."""
    probs, negs = path_arrays(source, n)
    return complex(np.sum(probs * np.exp(2j * math.pi * m * negs)))


def simpson(f, a: float, b: float, panels: int = 1 << 12) -> float:
    """Composite Simpson quadrature with an even number of panels."""
    x = np.linspace(a, b, 2 * panels + 1)
    y = f(x)
    h = (b - a) / (2 * panels)
    return float(h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum()))
