import math
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st
from pytest import approx

# locals
from prescient.errors import ContractError, StructuralError
from prescient.instance_space import Point
from prescient.transcript import (
    LabelDistribution,
    LabeledStream,
    RoundRecord,
    Transcript,
    digest_mapping,
    digest_sequence,
    expected_mistakes,
    format_number,
    mixture,
    predictor_mistake_count,
    regret,
)


def make_round(t, y, prediction, predictor_mistake=False):
    return RoundRecord(
        t=t,
        x=Point(Fraction(t, 10)),
        y=y,
        prediction=prediction,
        predictor_output_digest="",
        predictor_mistake=predictor_mistake,
    )


def make_transcript():
    rounds = (
        make_round(1, 1, LabelDistribution.point_mass(0)),
        make_round(2, 0, LabelDistribution.uniform(), predictor_mistake=True),
        make_round(3, 1, LabelDistribution.point_mass(1)),
    )
    return Transcript(rounds, 3, "digest", 5, "restart")


def test_format_number():
    assert format_number(Fraction(3, 2)) == "3/2"
    assert format_number(Fraction(2)) == "2"
    assert format_number(0.25) == "0.25"


def test_exact_distribution_must_sum_to_one():
    d = LabelDistribution((Fraction(1, 2), Fraction(1, 2)))
    assert d.exact
    assert d.label_count == 2

    with pytest.raises(StructuralError):
        LabelDistribution((Fraction(1, 2), Fraction(1, 3)))


def test_float_distribution_within_tolerance():
    d = LabelDistribution((0.25, 0.75))
    assert not d.exact
    assert d.probability(1) == approx(0.75)

    with pytest.raises(StructuralError):
        LabelDistribution((0.25, 0.7))


def test_negative_probability_is_rejected():
    with pytest.raises(StructuralError):
        LabelDistribution((Fraction(3, 2), Fraction(-1, 2)))


def test_point_mass():
    d = LabelDistribution.point_mass(1)
    assert d.probabilities == (Fraction(0), Fraction(1))
    assert d.is_point_mass()
    assert d.label() == 1
    assert d.mistake_probability(0) == 1
    assert d.mistake_probability(1) == 0

    assert LabelDistribution.point_mass(2).label_count == 3


def test_label_of_non_point_mass_is_a_contract_error():
    with pytest.raises(ContractError):
        LabelDistribution.uniform().label()


def test_probability_beyond_label_count_is_zero():
    assert LabelDistribution.point_mass(0).probability(4) == 0


def test_text_form():
    assert LabelDistribution.uniform().to_text() == "0:1/2;1:1/2"
    assert LabelDistribution.point_mass(0).to_text() == "0:1;1:0"


def test_from_weights_normalizes():
    d = LabelDistribution.from_weights([1.0, 3.0])
    assert d.probability(0) == approx(0.25)
    assert d.probability(1) == approx(0.75)


def test_mixture_of_exact_distributions_stays_exact():
    d = mixture(
        [LabelDistribution.point_mass(0), LabelDistribution.point_mass(1)],
        [Fraction(1), Fraction(3)],
    )
    assert d.exact
    assert d.probabilities == (Fraction(1, 4), Fraction(3, 4))


def test_mixture_with_float_weights():
    d = mixture(
        [LabelDistribution.point_mass(0), LabelDistribution.point_mass(2)],
        [0.5, 0.5],
    )
    assert not d.exact
    assert d.label_count == 3
    assert d.probability(0) == approx(0.5)
    assert d.probability(1) == approx(0.0)
    assert d.probability(2) == approx(0.5)


def test_mixture_length_mismatch():
    with pytest.raises(ContractError):
        mixture([LabelDistribution.uniform()], [0.5, 0.5])


def test_labeled_stream():
    stream = LabeledStream.from_parts([Point(0), Point(1)], [1, 0])
    assert stream.horizon == 2
    assert stream.examples() == (Point(0), Point(1))
    assert stream.labels() == (1, 0)

    with pytest.raises(StructuralError):
        LabeledStream.from_parts([Point(0)], [1, 0])

    with pytest.raises(StructuralError):
        LabeledStream(())

    with pytest.raises(StructuralError):
        LabeledStream.from_parts([Point(0)], [-1])


def test_round_record_validation():
    with pytest.raises(StructuralError):
        make_round(0, 0, LabelDistribution.point_mass(0))

    # No predictor mistakes in round 1.
    with pytest.raises(StructuralError):
        make_round(1, 0, LabelDistribution.point_mass(0), predictor_mistake=True)


def test_expected_mistakes_is_exact_for_exact_rounds():
    tr = make_transcript()
    assert tr.is_complete()
    assert not tr.is_deterministic()
    assert expected_mistakes(tr) == Fraction(3, 2)
    assert regret(tr, 1) == Fraction(1, 2)
    assert predictor_mistake_count(tr) == 1


def test_expected_mistakes_with_float_rounds():
    rounds = (
        make_round(1, 0, LabelDistribution((0.75, 0.25))),
        make_round(2, 0, LabelDistribution.point_mass(1)),
    )
    tr = Transcript(rounds, 2, "", 0)
    assert math.isclose(float(expected_mistakes(tr)), 1.25, rel_tol=1e-12)


def test_incomplete_transcript_is_rejected():
    rounds = (make_round(1, 1, LabelDistribution.point_mass(1)),)
    tr = Transcript(rounds, 2, "", 0)
    assert not tr.is_complete()

    with pytest.raises(StructuralError):
        tr.check_complete()

    with pytest.raises(StructuralError):
        expected_mistakes(tr)


def test_out_of_order_transcript_is_incomplete():
    rounds = (
        make_round(2, 1, LabelDistribution.point_mass(1)),
        make_round(1, 1, LabelDistribution.point_mass(1)),
    )
    assert not Transcript(rounds, 2, "", 0).is_complete()


exact_rounds = st.lists(
    st.tuples(st.integers(min_value=0, max_value=1), st.fractions(min_value=0, max_value=1, max_denominator=16)),
    min_size=1,
    max_size=20,
)


def exact_transcript(rounds):
    records = tuple(
        make_round(t, y, LabelDistribution((1 - p, p)))
        for t, (y, p) in enumerate(rounds, start=1)
    )
    return Transcript(records, len(records), "", 0)


@given(exact_rounds, exact_rounds)
def test_expected_mistakes_add_up_over_concatenated_transcripts(first, second):
    head = exact_transcript(first)
    tail = exact_transcript(second)
    shifted = tuple(replace(r, t=r.t + head.horizon) for r in tail.rounds)
    joined = Transcript(head.rounds + shifted, head.horizon + tail.horizon, "", 0)

    assert expected_mistakes(joined) == expected_mistakes(head) + expected_mistakes(tail)
    assert regret(joined, 0) == expected_mistakes(joined)


def test_digests():
    a = digest_sequence([Point(0), Point(1)])
    assert len(a) == 64
    assert a == digest_sequence([Point(0), Point(1)])
    assert a != digest_sequence([Point(1), Point(0)])

    assert digest_mapping({"a": 1, "b": 2}) == digest_mapping({"b": 2, "a": 1})
    assert digest_mapping({"a": 1}) != digest_mapping({"a": 2})
