"""Ground-truth redundancy: enumeration, count classes, Monte Carlo, lengths."""

import math
from fractions import Fraction

import pytest

from shancode import (
    Limits,
    MarkovSource,
    exact_redundancy,
    kraft_sum,
    monte_carlo_redundancy,
    neg_log_mu,
    shannon_lengths,
    transition_count_classes,
)
from shancode.asymptotics import ceil_defect
from shancode.errors import ResourceLimit, ZeroPathProbability
from tests.conftest import iter_paths_bruteforce, memoryless, redundancy_bruteforce

F = Fraction
LOG3 = math.log2(3.0)


def test_neg_log_mu_examples(dyadic_memoryless, absorbing_source):
    assert neg_log_mu(dyadic_memoryless, [0, 1, 0]) == 3.0
    s = MarkovSource.from_exact([1, 0], [["1/2", "1/2"], ["1/4", "3/4"]])
    assert neg_log_mu(s, [0, 1, 1]) == pytest.approx(3.0 - LOG3, abs=1e-12)
    assert neg_log_mu(absorbing_source, [0, 0, 1]) == pytest.approx(math.log2(4.5), abs=1e-12)


def test_neg_log_mu_zero_step(absorbing_source):
    with pytest.raises(ZeroPathProbability) as exc:
        neg_log_mu(absorbing_source, [0, 1, 0])
    assert exc.value.step == 2
    with pytest.raises(ZeroPathProbability) as exc:
        neg_log_mu(absorbing_source, [1, 1])
    assert exc.value.step == 0


def test_dyadic_redundancy_identically_zero(dyadic_memoryless, dyadic_markov_pair, dyadic_r3):
    for s in (dyadic_memoryless, *dyadic_markov_pair):
        for n in range(1, 21):
            assert exact_redundancy(s, n).value == 0.0
    for n in range(1, 13):
        assert exact_redundancy(dyadic_r3, n).value == 0.0


def test_cycle_source_value(cycle_source):
    target = ceil_defect(LOG3)
    for n in range(1, 11):
        rec = exact_redundancy(cycle_source, n)
        assert rec.value == pytest.approx(target, abs=1e-12)


def test_permutation_chain_both_initials(permutation_source, permutation_state0_start):
    # with initial equal to the first row the oscillation argument is n log2 3;
    # started at state 0 the initial term drops and the argument is (n-1) log2 3
    for n in (2, 5, 10):
        assert exact_redundancy(permutation_source, n).value == pytest.approx(
            ceil_defect(n * LOG3), abs=1e-12
        )
        assert exact_redundancy(permutation_state0_start, n).value == pytest.approx(
            ceil_defect((n - 1) * LOG3), abs=1e-12
        )


def test_redundancy_in_unit_interval(oscillatory_exact_family, float_convergent_source):
    for s in (*oscillatory_exact_family, float_convergent_source):
        for n in (1, 3, 6):
            v = exact_redundancy(s, n).value
            assert 0.0 <= v < 1.0


def test_enumeration_matches_count_dp_exhaustively(
    permutation_source, m2_source, dyadic_r3, float_convergent_source, bipartite_periodic_source
):
    sources = [permutation_source, m2_source, float_convergent_source, bipartite_periodic_source]
    for s in sources:
        for n in range(1, 11):
            a = exact_redundancy(s, n, strategy="enumeration").value
            b = exact_redundancy(s, n, strategy="count_dp").value
            assert abs(a - b) <= 1e-12
    for n in range(1, 9):
        a = exact_redundancy(dyadic_r3, n, strategy="enumeration").value
        b = exact_redundancy(dyadic_r3, n, strategy="count_dp").value
        assert abs(a - b) <= 1e-12


def test_matches_bruteforce_oracle(permutation_source, m2_source, float_convergent_source):
    for s in (permutation_source, m2_source, float_convergent_source):
        for n in (1, 4, 7):
            assert exact_redundancy(s, n).value == pytest.approx(
                redundancy_bruteforce(s, n), abs=1e-10
            )


def test_redundancy_equals_mean_length_minus_entropy(permutation_source, m2_source):
    # E[L] - H reproduces the ceiling-defect expectation
    for s in (permutation_source, m2_source):
        for n in (2, 5):
            lengths = dict(shannon_lengths(s, n))
            mean_len = 0.0
            entropy = 0.0
            for path, mu in iter_paths_bruteforce(s, n):
                mean_len += mu * lengths[path]
                entropy += mu * (-math.log2(mu))
            assert exact_redundancy(s, n).value == pytest.approx(
                mean_len - entropy, abs=1e-10
            )


def test_transition_count_classes_structure(permutation_state0_start):
    s = permutation_state0_start
    r = s.r
    for n in (2, 5, 8):
        classes = transition_count_classes(s, n)
        total_paths = sum(c.multiplicity for c in classes)
        assert total_paths == r ** (n - 1)  # started deterministically at state 0
        for c in classes:
            assert sum(c.counts) == n - 1
            for v in range(r):
                out_deg = sum(c.counts[v * r + j] for j in range(r))
                in_deg = sum(c.counts[k * r + v] for k in range(r))
                expect = (1 if v == c.first_state else 0) - (1 if v == c.last_state else 0)
                assert out_deg - in_deg == expect


def test_snap_flag_on_float_dyadic():
    s = MarkovSource.from_floats([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]])
    for n in (3, 10):
        rec = exact_redundancy(s, n)
        assert rec.value == 0.0


def test_resource_limits():
    s = memoryless([F(1, 3), F(2, 3)])
    with pytest.raises(ResourceLimit):
        exact_redundancy(s, 500)
    with pytest.raises(ResourceLimit):
        exact_redundancy(s, 10, strategy="enumeration", limits=Limits(enumeration_max_paths=100))
    with pytest.raises(ResourceLimit):
        exact_redundancy(s, 10, strategy="count_dp", limits=Limits(count_dp_max_n={2: 5}))


# -- Monte Carlo --------------------------------------------------------------


def test_monte_carlo_dyadic_exact(dyadic_memoryless):
    rec = monte_carlo_redundancy(dyadic_memoryless, 50, 2000, seed=11)
    assert rec.value == 0.0 and rec.stderr == 0.0


def test_monte_carlo_deterministic(float_convergent_source):
    a = monte_carlo_redundancy(float_convergent_source, 12, 5000, seed=1)
    b = monte_carlo_redundancy(float_convergent_source, 12, 5000, seed=1)
    assert a == b
    c = monte_carlo_redundancy(float_convergent_source, 12, 5000, seed=2)
    assert c.value != a.value


def test_monte_carlo_matches_formula_prediction():
    # memoryless 1/3: every path shares the fractional part of -log2 mu
    s = memoryless([F(1, 3), F(2, 3)])
    rec = monte_carlo_redundancy(s, 100, 20000, seed=5)
    assert rec.value == pytest.approx(ceil_defect(100 * LOG3), abs=1e-9)
    assert rec.stderr <= 1e-12


def test_monte_carlo_within_four_stderr(float_convergent_source):
    exact = exact_redundancy(float_convergent_source, 8).value
    bad = 0
    for seed in range(100):
        mc = monte_carlo_redundancy(float_convergent_source, 8, 2000, seed=seed)
        if abs(mc.value - exact) > 4 * mc.stderr:
            bad += 1
    assert bad <= 1  # >= 99% of seeds inside the four-sigma band


# -- Shannon code lengths ------------------------------------------------------


def test_shannon_lengths_dyadic(dyadic_memoryless):
    lengths = shannon_lengths(dyadic_memoryless, 3)
    assert len(lengths) == 8
    assert all(length == 3 for _, length in lengths)
    assert kraft_sum(lengths) == 1


def test_shannon_lengths_markov_example():
    s = MarkovSource.from_exact([1, 0], [["1/2", "1/2"], ["1/4", "3/4"]])
    lengths = dict(shannon_lengths(s, 2))
    assert lengths[(0, 0)] == 1 and lengths[(0, 1)] == 1
    assert kraft_sum(lengths.items()) == 1


def test_shannon_lengths_absorbing_support(absorbing_source):
    lengths = shannon_lengths(absorbing_source, 3)
    assert len(lengths) == 3  # 000, 001, 011
    assert kraft_sum(lengths) <= 1


def test_kraft_inequality_across_sources(oscillatory_exact_family, float_convergent_source):
    for s in (*oscillatory_exact_family[:6], float_convergent_source):
        for n in (2, 4, 6):
            assert float(kraft_sum(shannon_lengths(s, n))) <= 1.0 + 1e-12
