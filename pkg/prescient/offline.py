import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

# local
from .aggregate import RandomizedExponentialWeights
from .errors import (
    ContractError,
    RealizabilityViolationError,
    StructuralError,
)
from .hypotheses import FiniteTable, HypothesisClass, ThresholdClass, project
from .instance_space import Example
from .transcript import LabelDistribution, LabeledStream

logger = logging.getLogger(__name__)

REALIZABLE = "realizable"
AGNOSTIC = "agnostic"
OFFLINE_MODES = (REALIZABLE, AGNOSTIC)


class OfflineLearner(object):
    """A transductive learner that knows the example sequence in advance.

    Realizable mode runs halving over the behaviours of the class on the
    sequence: it predicts the label chosen by most surviving behaviours (ties
    toward the smaller label) and drops every behaviour that disagrees with the
    revealed label. Agnostic mode runs exponential weights over the same
    behaviours.

    The learner only answers at its cursor, for the example its sequence holds
    there.
    """

    def __init__(
        self,
        hypothesis_class: HypothesisClass,
        xs: Sequence[Example],
        mode: str = REALIZABLE,
    ):
        if len(xs) == 0:
            raise StructuralError("An offline learner needs a non-empty sequence")

        if mode not in OFFLINE_MODES:
            raise StructuralError("Unknown offline mode '{}'".format(mode))

        self.sequence = tuple(xs)
        self.mode = mode
        self.behaviours: FiniteTable = project(hypothesis_class, self.sequence)
        self.label_count = self.behaviours.label_count
        self._index = 0

        self.alive = np.ones(self.behaviours.size, dtype=bool)
        self.weights: Optional[RandomizedExponentialWeights] = None
        if mode == AGNOSTIC:
            self.weights = RandomizedExponentialWeights(
                self.behaviours.size, len(self.sequence)
            )

        logger.debug(
            "Offline learner over {} behaviours for {} rounds ({})".format(
                self.behaviours.size, len(self.sequence), mode
            )
        )

    @property
    def cursor(self) -> int:
        return self._index + 1

    @property
    def horizon(self) -> int:
        return len(self.sequence)

    @property
    def rate(self) -> float:
        return self.weights.eta if self.weights is not None else 0.0

    def alive_count(self) -> int:
        return int(self.alive.sum())

    def _column(self) -> np.ndarray:
        if self._index >= len(self.sequence):
            raise StructuralError(
                "Offline learner was queried past its horizon {}".format(
                    len(self.sequence)
                )
            )

        return self.behaviours.table[:, self._index]

    def predict(self, x: Optional[Example] = None) -> LabelDistribution:
        column = self._column()
        if x is not None and x != self.sequence[self._index]:
            raise ContractError(
                "Offline learner expected {!r} at position {} but got {!r}".format(
                    self.sequence[self._index], self.cursor, x
                )
            )

        if self.mode == REALIZABLE:
            counts = np.bincount(column[self.alive], minlength=self.label_count)
            # argmax returns the first maximum, which is the smallest label.
            return LabelDistribution.point_mass(int(np.argmax(counts)), self.label_count)

        mass = np.bincount(
            column, weights=self.weights.distribution(), minlength=self.label_count
        )
        return LabelDistribution.from_weights(mass)

    def update(self, y: int):
        column = self._column()

        if self.mode == REALIZABLE:
            alive = self.alive & (column == y)
            if not alive.any():
                raise RealizabilityViolationError(
                    "Label {} at position {} is inconsistent with every behaviour".format(
                        y, self.cursor
                    )
                )
            self.alive = alive
        else:
            self.weights.update((column != y).astype(np.float64))

        self._index += 1

    # Expected regret guarantee of the agnostic mode against the best behaviour.
    def regret_bound(self) -> float:
        return math.sqrt(len(self.sequence) / 2.0 * math.log(self.behaviours.size))


def offline_init(
    hypothesis_class: HypothesisClass, xs: Sequence[Example], mode: str = REALIZABLE
) -> OfflineLearner:
    return OfflineLearner(hypothesis_class, xs, mode)


BOUND_CONSTANT = "constant"
BOUND_LOG = "log"
BOUND_SQRT = "sqrt"


@dataclass(frozen=True)
class BoundFn(object):
    """A closed form mistake or regret bound as a function of the horizon.

    constant: c, log: c * log2(T + 1), sqrt: c * sqrt(T * log2(T + 1)).
    """

    kind: str
    coefficient: Union[Fraction, float]

    def __post_init__(self):
        if self.kind not in (BOUND_CONSTANT, BOUND_LOG, BOUND_SQRT):
            raise StructuralError("Unknown bound form '{}'".format(self.kind))

        if self.coefficient < 0:
            raise StructuralError("Bound coefficients must be non-negative")

    def __call__(self, horizon: float) -> float:
        c = float(self.coefficient)
        if self.kind == BOUND_CONSTANT:
            return c

        if self.kind == BOUND_LOG:
            return c * math.log2(horizon + 1)

        return c * math.sqrt(horizon * math.log2(horizon + 1))

    def describe(self) -> str:
        if self.kind == BOUND_CONSTANT:
            return "{}".format(self.coefficient)

        if self.kind == BOUND_LOG:
            return "{}*log2(T+1)".format(self.coefficient)

        return "{}*sqrt(T*log2(T+1))".format(self.coefficient)


def is_concave_on_grid(bound: BoundFn, grid: Iterable[float], tolerance: float = 1e-9) -> bool:
    points = sorted(grid)
    values = [bound(p) for p in points]

    if any(later < earlier - tolerance for earlier, later in zip(values, values[1:])):
        return False

    for i, a in enumerate(points):
        for b in points[i + 1:]:
            if bound((a + b) / 2.0) < (bound(a) + bound(b)) / 2.0 - tolerance:
                return False

    return True


def offline_bound(hypothesis_class: HypothesisClass, mode: str = REALIZABLE) -> BoundFn:
    if isinstance(hypothesis_class, ThresholdClass):
        # Halving over at most T + 1 behaviours; the VC dimension is 1.
        if mode == REALIZABLE:
            return BoundFn(BOUND_LOG, Fraction(1))

        return BoundFn(BOUND_SQRT, Fraction(1))

    if not isinstance(hypothesis_class, FiniteTable):
        raise StructuralError("No offline bound for {!r}".format(hypothesis_class))

    size = hypothesis_class.size
    if mode == REALIZABLE:
        return BoundFn(BOUND_CONSTANT, math.log2(size))

    # sqrt(T ln N / 2) <= c * sqrt(T log2(T + 1)) for T >= 1.
    return BoundFn(BOUND_SQRT, math.sqrt(math.log(size) / 2.0))


def behaviour_losses(hypothesis_class: HypothesisClass, stream: LabeledStream) -> np.ndarray:
    behaviours = project(hypothesis_class, stream.examples())
    labels = np.array(stream.labels(), dtype=np.int64)
    return (behaviours.table != labels[np.newaxis, :]).sum(axis=1)


def best_in_hindsight(hypothesis_class: HypothesisClass, stream: LabeledStream) -> int:
    return int(behaviour_losses(hypothesis_class, stream).min())
