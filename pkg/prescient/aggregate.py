import math
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np
from scipy.special import softmax

# local
from .errors import ContractError, StructuralError
from .transcript import LabelDistribution, mixture


class DeterministicWeightedMajority(object):
    """Weighted plurality vote over experts with exact weights (1 - eta)^m_i.

    m_i is the number of mistakes expert i has made so far. Ties go to the
    smallest label.
    """

    def __init__(self, expert_count: int, eta: Fraction = Fraction(1, 2)):
        if expert_count < 1:
            raise StructuralError("Need at least one expert")

        self.expert_count = expert_count
        self.eta = Fraction(eta)
        self.mistakes: List[int] = [0] * expert_count

    @classmethod
    def from_mistakes(
        cls, mistakes: Sequence[int], eta: Fraction = Fraction(1, 2)
    ) -> "DeterministicWeightedMajority":
        aggregator = cls(len(mistakes), eta)
        aggregator.mistakes = [int(m) for m in mistakes]
        return aggregator

    @property
    def weights(self) -> List[Fraction]:
        return [(1 - self.eta) ** m for m in self.mistakes]

    def _check_advice(self, advice: Sequence[int]):
        if len(advice) != self.expert_count:
            raise ContractError(
                "Expected advice from {} experts, got {}".format(
                    self.expert_count, len(advice)
                )
            )

    def label_weights(self, advice: Sequence[int]) -> dict:
        self._check_advice(advice)

        totals = {}
        for label, weight in zip(advice, self.weights):
            totals[label] = totals.get(label, Fraction(0)) + weight

        return totals

    def predict(self, advice: Sequence[int]) -> int:
        totals = self.label_weights(advice)
        best = max(totals.values())
        return min(label for label, total in totals.items() if total == best)

    def update(self, advice: Sequence[int], y: int):
        self._check_advice(advice)
        for index, label in enumerate(advice):
            if label != y:
                self.mistakes[index] += 1


def exponential_weights_rate(expert_count: int, horizon: int) -> float:
    if expert_count <= 1:
        return 0.0

    return math.sqrt(8.0 * math.log(expert_count) / horizon)


class RandomizedExponentialWeights(object):
    """Exponential weights with rate sqrt(8 ln N / T), kept in log space."""

    def __init__(self, expert_count: int, horizon: int, eta: Optional[float] = None):
        if expert_count < 1:
            raise StructuralError("Need at least one expert")

        if horizon < 1:
            raise StructuralError("The horizon must be positive")

        self.expert_count = expert_count
        self.horizon = horizon
        self.eta = exponential_weights_rate(expert_count, horizon) if eta is None else eta
        self.log_weights = np.zeros(expert_count, dtype=np.float64)

    @classmethod
    def from_weights(
        cls, weights: Sequence[float], horizon: int, eta: Optional[float] = None
    ) -> "RandomizedExponentialWeights":
        values = np.asarray(weights, dtype=np.float64)
        if np.any(values <= 0):
            raise StructuralError("Weights must be positive")

        aggregator = cls(len(values), horizon, eta)
        aggregator.log_weights = np.log(values)
        return aggregator

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    def distribution(self) -> np.ndarray:
        return softmax(self.log_weights)

    def mixture(self, advice: Sequence[LabelDistribution]) -> LabelDistribution:
        if len(advice) != self.expert_count:
            raise ContractError(
                "Expected advice from {} experts, got {}".format(
                    self.expert_count, len(advice)
                )
            )

        return mixture(advice, [float(p) for p in self.distribution()])

    def sample_expert(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self.expert_count, p=self.distribution()))

    def update(self, losses: Sequence[float]):
        values = np.asarray(losses, dtype=np.float64)
        if values.shape != (self.expert_count,):
            raise ContractError(
                "Expected {} losses, got {}".format(self.expert_count, len(losses))
            )

        self.log_weights = self.log_weights - self.eta * values
        # The largest log weight is kept at 0.
        self.log_weights -= self.log_weights.max()

    def regret_bound(self) -> float:
        return math.sqrt(self.horizon * math.log2(self.expert_count))
