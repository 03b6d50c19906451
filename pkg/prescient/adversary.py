import logging
import math
from fractions import Fraction
from typing import Any, List, NamedTuple, Optional, Sequence, Set, Tuple

import numpy as np

# local
from .errors import ConfigError, ContractError, StructuralError
from .hypotheses import ThresholdInterval, VersionSpace, vs_exists, vs_restrict
from .instance_space import STAR, Example, Point, example_sort_key
from .learners import OnlineLearner
from .predictors import Forecast, Predictor, wrap
from .transcript import (
    LabeledStream,
    RoundRecord,
    Transcript,
    digest_sequence,
    expected_mistakes,
)

logger = logging.getLogger(__name__)


class ZnParams(NamedTuple):
    horizon: int
    mistakes: int
    block: int
    initial_block: Tuple[Point, ...]


def zn_params(horizon: int, mistakes: int) -> ZnParams:
    if horizon < 1 or mistakes < 0:
        raise ConfigError("Need T >= 1 and n >= 0, got T={} n={}".format(horizon, mistakes))

    if horizon % (mistakes + 1) != 0:
        raise ConfigError("n + 1 = {} does not divide T = {}".format(mistakes + 1, horizon))

    block = horizon // (mistakes + 1)
    if (block + 1) & block != 0:
        raise ConfigError("T / (n + 1) + 1 = {} is not a power of two".format(block + 1))

    return ZnParams(horizon, mistakes, block, f_even(Fraction(0), Fraction(1), block))


def f_even(a: Fraction, b: Fraction, m: int) -> Tuple[Point, ...]:
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise StructuralError("Need a < b, got a={} b={}".format(a, b))

    if m < 1:
        raise StructuralError("Need at least one point, got {}".format(m))

    step = (b - a) / (m + 1)
    return tuple(Point(a + i * step) for i in range(1, m + 1))


def dyadic_order(s: Sequence[Any]) -> Tuple[Any, ...]:
    """Midpoint-first order: level j emits the elements at 1-based positions
    i (N + 1) / 2^j for odd i."""
    size = len(s)
    if size < 1 or (size + 1) & size != 0:
        raise StructuralError("Dyadic order needs 2^k - 1 elements, got {}".format(size))

    result = []
    level = 1
    while (size + 1) >> level >= 1 and (1 << level) <= size + 1:
        step = (size + 1) >> level
        result.extend(s[i * step - 1] for i in range(1, 1 << level, 2))
        level += 1

    return tuple(result)


def _gap(
    previous: Tuple[Point, ...], j: int, a: Fraction, b: Fraction
) -> Tuple[Fraction, Fraction]:
    block = len(previous)
    if j == 1:
        return a, previous[0].value

    if j == block + 1:
        return previous[-1].value, b

    return previous[j - 2].value, previous[j - 1].value


def stream_blocks(
    initial_block: Sequence[Point], indices: Sequence[int]
) -> List[Tuple[Tuple[Point, ...], Fraction, Fraction]]:
    block = len(initial_block)
    a, b = Fraction(0), Fraction(1)
    blocks = [(tuple(initial_block), a, b)]
    for j in indices:
        if j < 1 or j > block + 1:
            raise StructuralError("Index {} lies outside 1..{}".format(j, block + 1))

        previous = blocks[-1][0]
        a, b = _gap(previous, j, a, b)
        blocks.append((f_even(a, b, block), a, b))

    return blocks


def stream_gen(initial_block: Sequence[Point], indices: Sequence[int]) -> Tuple[Point, ...]:
    result: List[Point] = []
    for sorted_block, _, _ in stream_blocks(initial_block, indices):
        result.extend(dyadic_order(sorted_block))

    return tuple(result)


def random_zn_indices(params: ZnParams, rng: np.random.Generator) -> Tuple[int, ...]:
    return tuple(int(j) for j in rng.integers(1, params.block + 2, size=params.mistakes))


def random_zn_stream(params: ZnParams, rng: np.random.Generator) -> Tuple[Point, ...]:
    return stream_gen(params.initial_block, random_zn_indices(params, rng))


def recover_index(previous_block: Sequence[Example], x: Example) -> int:
    ordered = sorted(previous_block, key=example_sort_key)
    key = example_sort_key(x)
    for j, s in enumerate(ordered, start=1):
        if key < example_sort_key(s):
            return j

    return len(ordered) + 1


class ZnPredictor(Predictor):
    """Forecaster for the Z_n stream family.

    At the first round of every block it recovers the refinement index from the
    block that just ended and predicts the stream of the recovered indices
    followed by stars.
    """

    def __init__(self, params: ZnParams):
        super().__init__(params.horizon)
        self.params = params
        self.indices: List[int] = []

    def _padded(self, xs: Sequence[Example]) -> Forecast:
        return tuple(xs) + (STAR,) * (self.horizon - len(xs))

    def _forecast(self, observed: Forecast, side_information: Any) -> Sequence[Example]:
        t = len(observed)
        block = self.params.block
        if t == 1:
            return self._padded(dyadic_order(self.params.initial_block))

        if (t - 1) % block == 0 and len(self.indices) < self.params.mistakes:
            j = recover_index(observed[t - 1 - block:t - 1], observed[t - 1])
            self.indices.append(j)
            return self._padded(stream_gen(self.params.initial_block, self.indices))

        return self.last_output


# Labels against the likelier prediction whenever the version space allows it.
def nature_offline_step(
    p_one: Any, V: VersionSpace, x: Example
) -> Tuple[int, VersionSpace]:
    if V.is_empty():
        raise StructuralError("Nature needs a non-empty version space")

    if p_one >= Fraction(1, 2):
        y = 0 if vs_exists(V, x, 0) else 1
    else:
        y = 1 if vs_exists(V, x, 1) else 0

    return y, vs_restrict(V, x, y)


def block_index_from_labels(block: Sequence[Point], labels: Sequence[int]) -> int:
    pairs = sorted(zip(block, labels), key=lambda pair: pair[0].value)
    ordered = [y for _, y in pairs]

    # Labels over a sorted block must be ones followed by zeros.
    if any(later > earlier for earlier, later in zip(ordered, ordered[1:])):
        raise ContractError("Sorted block labels {} are not ones then zeros".format(ordered))

    if ordered[-1] == 1:
        return len(ordered) + 1

    return ordered.index(0) + 1


class PeeksGameResult(NamedTuple):
    stream: LabeledStream
    transcript: Transcript
    forced_expected_mistakes: Any
    indices: Tuple[int, ...]
    version_spaces: Tuple[VersionSpace, ...]


def nature_peeks_game(
    learner: OnlineLearner,
    params: ZnParams,
    config_digest: str = "",
    seed: int = 0,
    retain_predictions: bool = False,
    learner_name: Optional[str] = None,
) -> PeeksGameResult:
    """Plays the lower bound game against a learner that sees the current block."""
    predictor = wrap(ZnPredictor(params))
    version = ThresholdInterval()
    version_spaces: List[VersionSpace] = [version]
    indices: List[int] = []
    items: List[Tuple[Example, int]] = []
    rounds: List[RoundRecord] = []
    previous: Optional[Forecast] = None

    t = 0
    for block_number in range(params.mistakes + 1):
        generated = stream_gen(params.initial_block, indices)
        block_examples = generated[-params.block:]
        block_labels: List[int] = []

        for x in block_examples:
            t += 1
            predictions = predictor.observe(x)
            distribution = learner.predict(x, predictions)
            y, version = nature_offline_step(distribution.probability(1), version, x)
            learner.update(y)

            rounds.append(
                RoundRecord(
                    t=t,
                    x=x,
                    y=y,
                    prediction=distribution,
                    predictor_output_digest=digest_sequence(predictions),
                    predictor_mistake=previous is not None and previous[t - 1] != x,
                    predictions=predictions if retain_predictions else None,
                )
            )
            items.append((x, y))
            block_labels.append(y)
            previous = predictions

        version_spaces.append(version)
        if block_number < params.mistakes:
            indices.append(block_index_from_labels(block_examples, block_labels))
            logger.debug("Block {} ends with index {}".format(block_number + 1, indices[-1]))

    transcript = Transcript(
        tuple(rounds),
        params.horizon,
        config_digest,
        seed,
        learner_name or getattr(learner, "name", "learner"),
    )
    return PeeksGameResult(
        stream=LabeledStream(tuple(items)),
        transcript=transcript,
        forced_expected_mistakes=expected_mistakes(transcript),
        indices=tuple(indices),
        version_spaces=tuple(version_spaces),
    )


def lower_bound_value(horizon: int, mistakes: int) -> float:
    params = zn_params(horizon, mistakes)
    return (mistakes + 1) / 2.0 * math.log2(params.block)


def peeks_schedule(params: ZnParams, t: int) -> Set[int]:
    block_end = ((t - 1) // params.block + 1) * params.block
    return set(range(t + 1, block_end + 1))


def revealed_future_positions(
    predictions: Sequence[Example], stream: Sequence[Example], t: int
) -> Set[int]:
    return {
        s for s in range(t + 1, len(stream) + 1) if predictions[s - 1] == stream[s - 1]
    }


def matches_peeks_schedule(params: ZnParams, stream: Sequence[Example]) -> bool:
    predictor = wrap(ZnPredictor(params))
    for t, x in enumerate(stream, start=1):
        predictions = predictor.observe(x)
        if revealed_future_positions(predictions, stream, t) != peeks_schedule(params, t):
            return False

    return True
