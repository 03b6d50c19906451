import logging
import math
from abc import ABC, abstractmethod
from typing import List, Optional, Tuple

import numpy as np

# local
from .aggregate import DeterministicWeightedMajority, RandomizedExponentialWeights
from .errors import (
    CapabilityError,
    ConfigError,
    ContractError,
    RealizabilityViolationError,
)
from .hypotheses import (
    FiniteTable,
    HypothesisClass,
    LittlestoneOracle,
    ThresholdClass,
    project,
)
from .instance_space import Example, Star
from .offline import AGNOSTIC, OFFLINE_MODES, REALIZABLE, OfflineLearner
from .transcript import LabelDistribution

logger = logging.getLogger(__name__)

Forecast = Tuple[Example, ...]


class OnlineLearner(ABC):
    """An online learner that predicts a label distribution and then sees the label.

    predict() receives the current example together with the predictor's full
    forecast for this round (None when the learner runs without a predictor).
    """

    name = "learner"

    @abstractmethod
    def predict(self, x: Example, predictions: Optional[Forecast] = None) -> LabelDistribution:
        pass

    @abstractmethod
    def update(self, y: int):
        pass


class SOALearner(OnlineLearner):
    """Standard Optimal Algorithm.

    On a finite table the version space is a bit mask over the rows. For the
    threshold class every round projects the class onto the examples known so
    far (the observed ones and those in the current forecast), keeps the
    behaviours that agree with the labelled history and runs the brute force
    Littlestone oracle on what is left.
    """

    name = "soa"

    def __init__(self, hypothesis_class: HypothesisClass):
        self.hypothesis_class = hypothesis_class
        self.label_count = hypothesis_class.label_count
        self.history: List[Tuple[Example, int]] = []
        self._pending: Optional[Tuple[LittlestoneOracle, int, int]] = None
        self._pending_example: Optional[Example] = None

        self.oracle: Optional[LittlestoneOracle] = None
        if isinstance(hypothesis_class, FiniteTable):
            self.oracle = LittlestoneOracle(hypothesis_class)
            self.alive = self.oracle.full_mask
        elif not isinstance(hypothesis_class, ThresholdClass):
            raise CapabilityError("SOA cannot run on {!r}".format(hypothesis_class))

    def _projected_oracle(self, x: Example, predictions: Optional[Forecast]) -> Tuple[LittlestoneOracle, int, int]:
        known = [e for e, _ in self.history] + [x]
        if predictions is not None:
            known += [e for e in predictions if not isinstance(e, Star)]

        # Deduplicated, in first-seen order.
        domain = list(dict.fromkeys(known))
        behaviours = project(self.hypothesis_class, domain)

        alive = np.ones(behaviours.size, dtype=bool)
        for example, label in self.history:
            alive &= behaviours.table[:, behaviours.index_of(example)] == label

        if not alive.any():
            raise RealizabilityViolationError("No threshold agrees with the labelled history")

        restricted = behaviours.table[alive]
        column = behaviours.index_of(x)
        # Only columns that still split the surviving behaviours matter.
        splitting = [
            c for c in range(restricted.shape[1])
            if c == column or len(np.unique(restricted[:, c])) > 1
        ]
        compressed = FiniteTable(
            [domain[c] for c in splitting], restricted[:, splitting], self.label_count
        )
        oracle = LittlestoneOracle(compressed)
        return oracle, oracle.full_mask, splitting.index(column)

    def predict(self, x: Example, predictions: Optional[Forecast] = None) -> LabelDistribution:
        if self.oracle is not None:
            oracle, alive, column = self.oracle, self.alive, self.hypothesis_class.index_of(x)
        else:
            oracle, alive, column = self._projected_oracle(x, predictions)

        best_label = None
        best_dimension = -1
        for label in range(self.label_count):
            dimension = oracle.dimension(oracle.restrict(alive, column, label))
            if dimension > best_dimension:
                best_label, best_dimension = label, dimension

        if best_label is None:
            raise RealizabilityViolationError("The SOA version space is empty")

        self._pending = (oracle, alive, column)
        self._pending_example = x
        return LabelDistribution.point_mass(best_label, self.label_count)

    def update(self, y: int):
        oracle, alive, column = self._pending
        restricted = oracle.restrict(alive, column, y)
        if restricted == 0:
            raise RealizabilityViolationError("Label {} empties the SOA version space".format(y))

        if self.oracle is not None:
            self.alive = restricted

        self.history.append((self._pending_example, y))
        self._pending = None


class RestartLearner(OnlineLearner):
    """Restarts the offline learner whenever the forecast missed the current example."""

    name = "restart"

    def __init__(self, hypothesis_class: HypothesisClass, horizon: int, mode: str = REALIZABLE):
        self.hypothesis_class = hypothesis_class
        self.horizon = horizon
        self.mode = mode
        self.observed: List[Example] = []
        self.instances = 0
        self.offline: Optional[OfflineLearner] = None
        self._previous: Optional[Forecast] = None
        self._current: Optional[Example] = None

    def predict(self, x: Example, predictions: Optional[Forecast] = None) -> LabelDistribution:
        t = len(self.observed) + 1
        if predictions is None or len(predictions) != self.horizon:
            raise ContractError(
                "Restart learner needs a forecast of length {}".format(self.horizon)
            )

        if predictions[t - 1] != x or (t > 1 and predictions[t - 2] != self.observed[-1]):
            raise ContractError(
                "Forecast in round {} does not start with the observed examples".format(t)
            )

        if t == 1 or self._previous[t - 1] != x:
            if tuple(predictions[:t - 1]) != tuple(self.observed):
                raise ContractError(
                    "Forecast in round {} does not start with the observed examples".format(t)
                )

            self.offline = OfflineLearner(self.hypothesis_class, predictions[t - 1:], self.mode)
            self.instances += 1
            logger.debug("Restart {} at round {}".format(self.instances, t))

        self._previous = tuple(predictions)
        self._current = x
        return self.offline.predict(x)

    def update(self, y: int):
        self.offline.update(y)
        self.observed.append(self._current)


def expert_boundaries(horizon: int, c: int) -> List[int]:
    """Block boundaries 0 = t_0 < ... < t_{c+1} = T with t_i = i * ceil(T / (c + 1)).

    Boundaries past T are clamped to T, so trailing blocks may be empty.
    """
    size = math.ceil(horizon / (c + 1))
    return [min(i * size, horizon) for i in range(c + 1)] + [horizon]


class ExpertLearner(OnlineLearner):

    def __init__(self, c: int, hypothesis_class: HypothesisClass, horizon: int, mode: str = REALIZABLE):
        if c < 0 or c > horizon - 1:
            raise ConfigError("Expert parameter c must lie in [0, {}], got {}".format(horizon - 1, c))

        self.c = c
        self.name = "expert:{}".format(c)
        self.hypothesis_class = hypothesis_class
        self.horizon = horizon
        self.mode = mode
        boundaries = expert_boundaries(horizon, c)
        self.blocks = [
            (start + 1, end) for start, end in zip(boundaries, boundaries[1:]) if end > start
        ]
        self.t = 0
        self.block_index = -1
        self.active: Optional[RestartLearner] = None

    def predict(self, x: Example, predictions: Optional[Forecast] = None) -> LabelDistribution:
        t = self.t + 1
        if self.block_index + 1 < len(self.blocks) and self.blocks[self.block_index + 1][0] == t:
            self.block_index += 1
            start, end = self.blocks[self.block_index]
            self.active = RestartLearner(self.hypothesis_class, end - start + 1, self.mode)

        start, end = self.blocks[self.block_index]
        if predictions is None or len(predictions) != self.horizon:
            raise ContractError("Expert learner needs a forecast of length {}".format(self.horizon))

        # The block learner only sees the forecast window of its block.
        return self.active.predict(x, tuple(predictions[start - 1:end]))

    def update(self, y: int):
        self.active.update(y)
        self.t += 1


class MetaLearner(OnlineLearner):
    """Aggregates Expert(0), ..., Expert(T - 1)."""

    name = "meta"

    def __init__(self, hypothesis_class: HypothesisClass, horizon: int, mode: str = REALIZABLE):
        self.mode = mode
        self.experts = [ExpertLearner(c, hypothesis_class, horizon, mode) for c in range(horizon)]
        self.label_count = hypothesis_class.label_count
        if mode == REALIZABLE:
            self.majority = DeterministicWeightedMajority(horizon)
        else:
            self.weights = RandomizedExponentialWeights(horizon, horizon)
        self._advice: List[LabelDistribution] = []

    def predict(self, x: Example, predictions: Optional[Forecast] = None) -> LabelDistribution:
        self._advice = [expert.predict(x, predictions) for expert in self.experts]
        if self.mode == REALIZABLE:
            label = self.majority.predict([a.label() for a in self._advice])
            return LabelDistribution.point_mass(label, self.label_count)

        return self.weights.mixture(self._advice)

    def update(self, y: int):
        if self.mode == REALIZABLE:
            self.majority.update([a.label() for a in self._advice], y)
        else:
            self.weights.update([float(a.mistake_probability(y)) for a in self._advice])

        for expert in self.experts:
            expert.update(y)


class HypothesisExpertsLearner(OnlineLearner):

    name = "experts"

    def __init__(self, hypothesis_class: HypothesisClass, horizon: int):
        self.hypothesis_class = hypothesis_class
        self.horizon = horizon
        self.label_count = hypothesis_class.label_count
        self.experts: Optional[FiniteTable] = None
        self.weights: Optional[RandomizedExponentialWeights] = None
        self.losses: Optional[np.ndarray] = None

    def _start(self, x: Example, predictions: Optional[Forecast]):
        if isinstance(self.hypothesis_class, FiniteTable):
            self.experts = project(self.hypothesis_class, self.hypothesis_class.domain)
        else:
            # One representative threshold per behaviour on the first forecast.
            self.experts = project(self.hypothesis_class, predictions if predictions is not None else (x,))

        self.weights = RandomizedExponentialWeights(self.experts.size, self.horizon)
        self.losses = np.zeros(self.experts.size, dtype=np.int64)

    def predict(self, x: Example, predictions: Optional[Forecast] = None) -> LabelDistribution:
        if self.experts is None:
            self._start(x, predictions)

        self._advice = np.array(
            [self.experts.evaluate(h, x) for h in range(self.experts.size)], dtype=np.int64
        )
        mass = np.bincount(self._advice, weights=self.weights.distribution(), minlength=self.label_count)
        return LabelDistribution.from_weights(mass)

    def update(self, y: int):
        mistakes = self._advice != y
        self.losses += mistakes
        self.weights.update(mistakes.astype(np.float64))

    def best_expert_loss(self) -> int:
        return int(self.losses.min())

    def regret_bound(self) -> float:
        return math.sqrt(self.horizon / 2.0 * math.log(self.experts.size))


class CombinedRealizableLearner(OnlineLearner):

    name = "combined"

    def __init__(self, hypothesis_class: HypothesisClass, horizon: int):
        self.label_count = hypothesis_class.label_count
        self.constituents: List[OnlineLearner] = []
        self.has_soa = False
        if isinstance(hypothesis_class, FiniteTable):
            try:
                self.constituents.append(SOALearner(hypothesis_class))
                self.has_soa = True
            except CapabilityError as e:
                logger.debug("Leaving SOA out of the combination: {}".format(e))

        self.constituents.append(RestartLearner(hypothesis_class, horizon, REALIZABLE))
        self.constituents.append(MetaLearner(hypothesis_class, horizon, REALIZABLE))
        self.majority = DeterministicWeightedMajority(len(self.constituents))
        self._advice: List[int] = []

    def predict(self, x: Example, predictions: Optional[Forecast] = None) -> LabelDistribution:
        self._advice = [c.predict(x, predictions).label() for c in self.constituents]
        return LabelDistribution.point_mass(self.majority.predict(self._advice), self.label_count)

    def update(self, y: int):
        self.majority.update(self._advice, y)
        for constituent in self.constituents:
            constituent.update(y)


class CombinedAgnosticLearner(OnlineLearner):

    name = "combined-agnostic"

    def __init__(self, hypothesis_class: HypothesisClass, horizon: int):
        self.baseline = HypothesisExpertsLearner(hypothesis_class, horizon)
        self.meta = MetaLearner(hypothesis_class, horizon, AGNOSTIC)
        self.constituents: List[OnlineLearner] = [self.baseline, self.meta]
        self.weights = RandomizedExponentialWeights(len(self.constituents), horizon)
        self._advice: List[LabelDistribution] = []
        self.constituent_losses = [0.0] * len(self.constituents)

    def predict(self, x: Example, predictions: Optional[Forecast] = None) -> LabelDistribution:
        self._advice = [c.predict(x, predictions) for c in self.constituents]
        return self.weights.mixture(self._advice)

    def update(self, y: int):
        losses = [float(a.mistake_probability(y)) for a in self._advice]
        self.weights.update(losses)
        self.constituent_losses = [total + loss for total, loss in zip(self.constituent_losses, losses)]
        for constituent in self.constituents:
            constituent.update(y)


LEARNER_KINDS = ("soa", "restart", "expert:<c>", "meta", "combined", "combined-agnostic", "experts")


def make_learner(
    kind: str,
    hypothesis_class: HypothesisClass,
    horizon: int,
    offline_mode: str = REALIZABLE,
) -> OnlineLearner:
    if offline_mode not in OFFLINE_MODES:
        raise ConfigError("Unknown offline mode '{}'".format(offline_mode))

    kind = kind.strip()
    if kind == "soa":
        return SOALearner(hypothesis_class)

    if kind == "restart":
        return RestartLearner(hypothesis_class, horizon, offline_mode)

    if kind.startswith("expert:"):
        try:
            c = int(kind[len("expert:"):])
        except ValueError as e:
            raise ConfigError("Cannot read the expert parameter in '{}'".format(kind)) from e
        return ExpertLearner(c, hypothesis_class, horizon, offline_mode)

    if kind == "meta":
        return MetaLearner(hypothesis_class, horizon, offline_mode)

    if kind == "combined":
        return CombinedRealizableLearner(hypothesis_class, horizon)

    if kind == "combined-agnostic":
        return CombinedAgnosticLearner(hypothesis_class, horizon)

    if kind == "experts":
        return HypothesisExpertsLearner(hypothesis_class, horizon)

    raise ConfigError(
        "Unknown learner '{}', expected one of {}".format(kind, ", ".join(LEARNER_KINDS))
    )
