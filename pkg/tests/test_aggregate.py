import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from pytest import approx

# locals
from prescient.aggregate import (
    DeterministicWeightedMajority,
    RandomizedExponentialWeights,
    exponential_weights_rate,
)
from prescient.errors import ContractError, StructuralError
from prescient.transcript import LabelDistribution

labels_4 = st.integers(min_value=0, max_value=3)


def test_weights_halve_per_mistake():
    majority = DeterministicWeightedMajority.from_mistakes([0, 1, 3])
    assert majority.weights == [Fraction(1), Fraction(1, 2), Fraction(1, 8)]


def test_weighted_vote_and_ties():
    majority = DeterministicWeightedMajority(2)
    assert majority.predict([1, 0]) == 0
    assert majority.predict([1, 1]) == 1

    majority.update([1, 0], 0)
    assert majority.mistakes == [1, 0]
    assert majority.predict([1, 0]) == 0
    assert majority.predict([0, 1]) == 1


def test_multiclass_advice():
    majority = DeterministicWeightedMajority.from_mistakes([0, 0, 1, 1])
    assert majority.predict([2, 2, 1, 0]) == 2
    assert majority.label_weights([2, 2, 1, 1]) == {2: Fraction(2), 1: Fraction(1)}


def test_advice_length_mismatch():
    with pytest.raises(ContractError):
        DeterministicWeightedMajority(2).predict([1])

    with pytest.raises(StructuralError):
        DeterministicWeightedMajority(0)


def test_two_experts_exhaustively():
    # Only the mistake counts matter, so every state (m1, m2, M) up to T = 12
    # is reached by some sequence of round outcomes.
    outcomes = list(product(product((0, 1), repeat=2), (0, 1)))
    states = {(0, 0, 0)}
    for _ in range(12):
        following = set()
        for m1, m2, total in states:
            for advice, y in outcomes:
                majority = DeterministicWeightedMajority.from_mistakes([m1, m2])
                wrong = 1 if majority.predict(advice) != y else 0
                following.add((m1 + (advice[0] != y), m2 + (advice[1] != y), total + wrong))
        states = following

        for m1, m2, total in states:
            assert total <= 3 * (min(m1, m2) + 1)


def play_majority(advice, labels):
    majority = DeterministicWeightedMajority(len(advice[0]))
    mistakes = 0
    for a, y in zip(advice, labels):
        if majority.predict(a) != y:
            mistakes += 1
        majority.update(a, y)

    return mistakes, min(majority.mistakes)


def random_advice(rng, experts, horizon, label_count):
    advice = [tuple(int(v) for v in rng.integers(0, label_count, size=experts)) for _ in range(horizon)]
    labels = [int(v) for v in rng.integers(0, label_count, size=horizon)]
    return advice, labels


@pytest.mark.slow
def test_random_runs_respect_the_majority_bound():
    rng = np.random.default_rng(5)
    for _ in range(10_000):
        experts = int(rng.integers(1, 9))
        horizon = int(rng.integers(1, 201))
        advice, labels = random_advice(rng, experts, horizon, 2)

        mistakes, best = play_majority(advice, labels)
        assert mistakes <= (best + math.log2(experts)) / math.log2(4 / 3)
        assert mistakes <= 3 * (best + math.log2(experts))


@settings(max_examples=200, deadline=None)
@given(
    st.integers(min_value=2, max_value=8),
    st.integers(min_value=1, max_value=200),
    st.integers(min_value=3, max_value=5),
    st.integers(min_value=0, max_value=2**32 - 1),
)
def test_plurality_vote_respects_the_majority_bound(experts, horizon, label_count, seed):
    # When the plurality is wrong the true label holds at most half of the
    # weight, so every mistake removes at least a quarter of it.
    advice, labels = random_advice(np.random.default_rng(seed), experts, horizon, label_count)
    mistakes, best = play_majority(advice, labels)
    assert mistakes <= (best + math.log2(experts)) / math.log2(4 / 3)


@given(st.lists(st.tuples(labels_4, st.tuples(labels_4, labels_4, labels_4)), min_size=1, max_size=60))
def test_plurality_vote_with_an_expert_that_is_always_right(rounds):
    labels = [y for y, _ in rounds]
    advice = [(y,) + others for y, others in rounds]

    mistakes, best = play_majority(advice, labels)
    assert best == 0
    assert mistakes <= math.log2(4) / math.log2(4 / 3)


def test_exponential_weights_rate():
    assert exponential_weights_rate(2, 32) == approx(0.4163, abs=1e-4)
    assert exponential_weights_rate(1, 32) == 0.0


def test_exponential_weights_move_away_from_losers():
    weights = RandomizedExponentialWeights(2, 32)
    assert weights.distribution() == approx([0.5, 0.5])

    weights.update([1.0, 0.0])
    p = weights.distribution()
    assert p[1] > p[0]
    assert p[0] / p[1] == approx(math.exp(-weights.eta))
    assert weights.log_weights.max() == 0.0


def test_exponential_weights_are_scale_invariant():
    first = RandomizedExponentialWeights.from_weights([1.0, 2.0, 4.0], 10)
    second = RandomizedExponentialWeights.from_weights([10.0, 20.0, 40.0], 10)
    assert first.distribution() == approx(second.distribution())
    assert first.distribution() == approx([1 / 7, 2 / 7, 4 / 7])

    with pytest.raises(StructuralError):
        RandomizedExponentialWeights.from_weights([1.0, 0.0], 10)


def test_mixture_of_advice():
    weights = RandomizedExponentialWeights(2, 8)
    d = weights.mixture([LabelDistribution.point_mass(0), LabelDistribution.point_mass(1)])
    assert d.probability(1) == approx(0.5)

    with pytest.raises(ContractError):
        weights.mixture([LabelDistribution.uniform()])

    with pytest.raises(ContractError):
        weights.update([1.0])


def test_fixed_advice_regret_is_bounded():
    # Expert 0 is always right, the others always wrong.
    horizon = 64
    for experts in (2, 4, 8):
        weights = RandomizedExponentialWeights(experts, horizon)
        losses = np.ones(experts)
        losses[0] = 0.0
        total = 0.0
        for _ in range(horizon):
            total += float(np.dot(weights.distribution(), losses))
            weights.update(losses)

        assert total <= weights.regret_bound()


def test_sampling_follows_the_distribution():
    weights = RandomizedExponentialWeights(3, 8)
    weights.update([0.0, 50.0, 50.0])
    rng = np.random.default_rng(0)
    assert all(weights.sample_expert(rng) == 0 for _ in range(20))
