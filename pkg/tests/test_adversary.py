import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

# locals
from prescient.adversary import (
    ZnPredictor,
    block_index_from_labels,
    dyadic_order,
    f_even,
    lower_bound_value,
    matches_peeks_schedule,
    nature_offline_step,
    nature_peeks_game,
    peeks_schedule,
    random_zn_stream,
    recover_index,
    stream_blocks,
    stream_gen,
    zn_params,
)
from prescient.errors import ConfigError, ContractError, StructuralError
from prescient.game import check_lower_bound_game
from prescient.hypotheses import FiniteSubset, ThresholdClass, ThresholdInterval, project
from prescient.instance_space import STAR, Point
from prescient.learners import make_learner
from prescient.predictors import wrap


def points(*values):
    return tuple(Point(Fraction(v)) for v in values)


def test_zn_params():
    params = zn_params(21, 2)
    assert params.block == 7
    assert params.initial_block == points(*[Fraction(i, 8) for i in range(1, 8)])

    assert zn_params(60, 3).block == 15
    assert zn_params(15, 0).block == 15

    with pytest.raises(ConfigError):
        zn_params(21, 1)

    with pytest.raises(ConfigError):
        zn_params(20, 1)

    with pytest.raises(ConfigError):
        zn_params(0, 0)


def test_evenly_spaced_points():
    assert f_even(Fraction(0), Fraction(1), 3) == points("1/4", "1/2", "3/4")
    assert f_even(Fraction(1, 4), Fraction(1, 2), 1) == points("3/8")

    with pytest.raises(StructuralError):
        f_even(Fraction(1, 2), Fraction(1, 2), 1)

    with pytest.raises(StructuralError):
        f_even(Fraction(0), Fraction(1), 0)


def test_dyadic_order():
    assert dyadic_order([1]) == (1,)
    assert dyadic_order([1, 2, 3]) == (2, 1, 3)
    assert dyadic_order(list(range(1, 8))) == (4, 2, 6, 1, 3, 5, 7)
    assert dyadic_order(list(range(1, 16)))[:4] == (8, 4, 12, 2)

    with pytest.raises(StructuralError):
        dyadic_order([1, 2])


def test_stream_generation():
    params = zn_params(21, 2)
    stream = stream_gen(params.initial_block, [1, 8])
    assert len(stream) == 21
    assert stream[:3] == points("1/2", "1/4", "3/4")

    # Index 1 refines (0, 1/8), index 8 then refines (7/64, 1/8).
    assert stream[7] == Point(Fraction(1, 16))
    assert stream[14] == Point(Fraction(15, 128))

    with pytest.raises(StructuralError):
        stream_gen(params.initial_block, [9])


@given(st.lists(st.integers(min_value=1, max_value=4), max_size=4))
def test_blocks_are_nested(indices):
    initial = f_even(Fraction(0), Fraction(1), 3)
    blocks = stream_blocks(initial, indices)

    assert len(blocks) == len(indices) + 1
    for (_, a, b), (block, c, d) in zip(blocks, blocks[1:]):
        assert a <= c < d <= b
        assert all(c < x.value < d for x in block)


def test_predictor_mistakes_fall_on_block_starts():
    params = zn_params(21, 2)
    stream = random_zn_stream(params, np.random.default_rng(3))
    predictor = ZnPredictor(params)
    wrapped = wrap(predictor)

    outputs = [wrapped.observe(x) for x in stream]
    mistakes = {t for t in range(2, 22) if outputs[t - 2][t - 1] != stream[t - 1]}

    assert mistakes == {8, 15}
    assert outputs[0][:7] == dyadic_order(params.initial_block)
    assert outputs[0][7:] == (STAR,) * 14
    assert outputs[-1] == stream
    assert stream_gen(params.initial_block, predictor.indices) == stream


def test_recover_index():
    block = points("1/4", "1/2", "3/4")
    assert recover_index(block, Point(Fraction(1, 8))) == 1
    assert recover_index(block, Point(Fraction(5, 8))) == 3
    assert recover_index(block, Point(Fraction(7, 8))) == 4


def test_nature_labels_against_the_learner():
    V = ThresholdInterval()
    x = Point(Fraction(1, 2))

    y, after = nature_offline_step(Fraction(1, 2), V, x)
    assert y == 0
    assert after.hi == Fraction(1, 2)

    y, after = nature_offline_step(Fraction(1, 4), V, x)
    assert y == 1
    assert after.lo == Fraction(1, 2)

    # Forced when only one label stays consistent.
    y, _ = nature_offline_step(Fraction(1), ThresholdInterval(lo=Fraction(3, 4)), x)
    assert y == 1


def test_nature_on_a_finite_subset():
    xs = points("1/4", "3/4")
    V = FiniteSubset.full(project(ThresholdClass(), xs))
    y, after = nature_offline_step(0.9, V, xs[0])
    assert y == 0
    assert after.rows().tolist() == [0]


def test_nature_needs_a_non_empty_version_space():
    with pytest.raises(StructuralError):
        nature_offline_step(Fraction(1, 2), ThresholdInterval(star_violated=True), Point(0))


def test_block_index_from_labels():
    block = points("1/2", "1/4", "3/4")
    assert block_index_from_labels(block, [0, 0, 0]) == 1
    assert block_index_from_labels(block, [0, 1, 0]) == 2
    assert block_index_from_labels(block, [1, 1, 0]) == 3
    assert block_index_from_labels(block, [1, 1, 1]) == 4

    with pytest.raises(ContractError):
        block_index_from_labels(block, [0, 0, 1])


@pytest.mark.parametrize("learner_name", ["soa", "restart", "meta", "combined", "expert:2"])
def test_lower_bound_game_with_two_predictor_mistakes(learner_name):
    params = zn_params(21, 2)
    learner = make_learner(learner_name, ThresholdClass(), 21)
    result = nature_peeks_game(learner, params, learner_name=learner_name)

    assert result.transcript.learner == learner_name
    assert len(result.indices) == 2
    assert len(result.version_spaces) == 4
    assert float(result.forced_expected_mistakes) >= 4.5
    assert float(result.forced_expected_mistakes) >= lower_bound_value(21, 2)
    assert all(check_lower_bound_game(result, params).values())


@pytest.mark.parametrize("learner_name", ["restart", "meta", "combined"])
def test_lower_bound_game_with_three_predictor_mistakes(learner_name):
    params = zn_params(60, 3)
    learner = make_learner(learner_name, ThresholdClass(), 60)
    result = nature_peeks_game(learner, params)

    assert float(result.forced_expected_mistakes) >= 8
    assert float(result.forced_expected_mistakes) >= lower_bound_value(60, 3)
    assert all(check_lower_bound_game(result, params).values())


def test_lower_bound_values():
    assert lower_bound_value(21, 2) == pytest.approx(1.5 * math.log2(7))
    assert lower_bound_value(60, 3) == pytest.approx(2 * math.log2(15))
    assert lower_bound_value(14, 1) == pytest.approx(math.log2(7))


def test_peeks_schedule():
    params = zn_params(21, 2)
    assert peeks_schedule(params, 1) == set(range(2, 8))
    assert peeks_schedule(params, 7) == set()
    assert peeks_schedule(params, 8) == set(range(9, 15))
    assert peeks_schedule(params, 21) == set()


def test_wrapped_predictor_matches_peeks_on_random_streams():
    params = zn_params(21, 2)
    rng = np.random.default_rng(17)
    for _ in range(100):
        assert matches_peeks_schedule(params, random_zn_stream(params, rng))
