import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

# local
from .errors import ContractError, StructuralError
from .instance_space import Example, example_to_text

Number = Union[Fraction, float]

FLOAT_TOLERANCE = 1e-12


def format_number(value: Number) -> str:
    if isinstance(value, (Fraction, int)):
        return str(Fraction(value))

    return repr(float(value))


@dataclass(frozen=True)
class LabelDistribution(object):
    """Probability distribution over the labels 0..len(probabilities)-1.

    Exact distributions hold Fractions and sum to exactly 1. Distributions that
    come out of exponential weights hold floats and sum to 1 within 1e-12.
    """

    probabilities: Tuple[Number, ...]

    def __post_init__(self):
        probabilities = tuple(self.probabilities)
        if len(probabilities) == 0:
            raise StructuralError("A label distribution needs at least one label")

        exact = all(isinstance(p, (Fraction, int)) for p in probabilities)
        if exact:
            probabilities = tuple(Fraction(p) for p in probabilities)
            if sum(probabilities) != 1:
                raise StructuralError(
                    "Probabilities {} do not sum to 1".format(probabilities)
                )
        else:
            probabilities = tuple(float(p) for p in probabilities)
            if abs(sum(probabilities) - 1.0) > FLOAT_TOLERANCE:
                raise StructuralError(
                    "Probabilities {} do not sum to 1".format(probabilities)
                )

        if any(p < 0 for p in probabilities):
            raise StructuralError("Negative probability in {}".format(probabilities))

        object.__setattr__(self, "probabilities", probabilities)

    @classmethod
    def point_mass(cls, label: int, label_count: int = 2) -> "LabelDistribution":
        size = max(label_count, label + 1)
        return cls(tuple(Fraction(1 if i == label else 0) for i in range(size)))

    @classmethod
    def uniform(cls, label_count: int = 2) -> "LabelDistribution":
        return cls(tuple(Fraction(1, label_count) for _ in range(label_count)))

    @classmethod
    def from_weights(cls, weights: Sequence[float]) -> "LabelDistribution":
        values = np.asarray(weights, dtype=np.float64)
        return cls(tuple(values / values.sum()))

    @property
    def exact(self) -> bool:
        return isinstance(self.probabilities[0], Fraction)

    @property
    def label_count(self) -> int:
        return len(self.probabilities)

    def probability(self, label: int) -> Number:
        if 0 <= label < len(self.probabilities):
            return self.probabilities[label]

        return Fraction(0) if self.exact else 0.0

    def mistake_probability(self, label: int) -> Number:
        return 1 - self.probability(label)

    def is_point_mass(self) -> bool:
        return any(p == 1 for p in self.probabilities)

    # The label of a point mass. Aggregators that only accept deterministic
    # advice call this.
    def label(self) -> int:
        for index, p in enumerate(self.probabilities):
            if p == 1:
                return index

        raise ContractError("{} is not a point mass".format(self.to_text()))

    def to_text(self) -> str:
        return ";".join(
            "{}:{}".format(label, format_number(p))
            for label, p in enumerate(self.probabilities)
        )


def mixture(
    distributions: Sequence[LabelDistribution], weights: Sequence[Number]
) -> LabelDistribution:
    if len(distributions) != len(weights):
        raise ContractError(
            "Got {} distributions for {} weights".format(len(distributions), len(weights))
        )

    label_count = max(d.label_count for d in distributions)
    exact = all(d.exact for d in distributions) and all(
        isinstance(w, (Fraction, int)) for w in weights
    )
    if exact:
        total = sum(Fraction(w) for w in weights)
        return LabelDistribution(
            tuple(
                sum(Fraction(w) * d.probability(y) for d, w in zip(distributions, weights))
                / total
                for y in range(label_count)
            )
        )

    values = np.zeros(label_count, dtype=np.float64)
    for distribution, weight in zip(distributions, weights):
        for y in range(distribution.label_count):
            values[y] += float(weight) * float(distribution.probability(y))

    return LabelDistribution.from_weights(values)


@dataclass(frozen=True)
class LabeledStream(object):
    items: Tuple[Tuple[Example, int], ...]

    def __post_init__(self):
        items = tuple((x, int(y)) for x, y in self.items)
        if len(items) == 0:
            raise StructuralError("A labeled stream needs at least one round")

        if any(y < 0 for _, y in items):
            raise StructuralError("Labels must be non-negative")

        object.__setattr__(self, "items", items)

    @classmethod
    def from_parts(cls, examples: Sequence[Example], labels: Sequence[int]) -> "LabeledStream":
        if len(examples) != len(labels):
            raise StructuralError(
                "Got {} examples but {} labels".format(len(examples), len(labels))
            )

        return cls(tuple(zip(examples, labels)))

    @property
    def horizon(self) -> int:
        return len(self.items)

    def examples(self) -> Tuple[Example, ...]:
        return tuple(x for x, _ in self.items)

    def labels(self) -> Tuple[int, ...]:
        return tuple(y for _, y in self.items)


@dataclass(frozen=True)
class RoundRecord(object):
    t: int
    x: Example
    y: int
    prediction: LabelDistribution
    predictor_output_digest: str
    predictor_mistake: bool
    predictions: Optional[Tuple[Example, ...]] = None

    def __post_init__(self):
        if self.t < 1:
            raise StructuralError("Round indices start at 1, got {}".format(self.t))

        # Predictor mistakes are only counted from the second round onwards.
        if self.t == 1 and self.predictor_mistake:
            raise StructuralError("A predictor cannot make a mistake in round 1")

    @property
    def mistake_probability(self) -> Number:
        return self.prediction.mistake_probability(self.y)


@dataclass(frozen=True)
class Transcript(object):
    rounds: Tuple[RoundRecord, ...]
    horizon: int
    config_digest: str
    seed: int
    learner: str = ""

    def __post_init__(self):
        object.__setattr__(self, "rounds", tuple(self.rounds))

    def is_complete(self) -> bool:
        if len(self.rounds) != self.horizon:
            return False

        return all(r.t == index for index, r in enumerate(self.rounds, start=1))

    def check_complete(self):
        if not self.is_complete():
            raise StructuralError(
                "Transcript has {} of {} rounds or rounds out of order".format(
                    len(self.rounds), self.horizon
                )
            )

    def is_deterministic(self) -> bool:
        return all(r.prediction.is_point_mass() for r in self.rounds)


def expected_mistakes(tr: Transcript) -> Number:
    tr.check_complete()

    total: Number = Fraction(0)
    for record in tr.rounds:
        total += record.mistake_probability

    return total


def regret(tr: Transcript, best_loss: int) -> Number:
    return expected_mistakes(tr) - best_loss


def predictor_mistake_count(tr: Transcript) -> int:
    return sum(1 for r in tr.rounds if r.t >= 2 and r.predictor_mistake)


def digest_sequence(xs: Iterable[Example]) -> str:
    text = "|".join(example_to_text(x) for x in xs)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def digest_mapping(data: Mapping[str, Any]) -> str:
    text = json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
