from abc import ABC, abstractmethod
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

# local
from .errors import ConfigError, ProtocolViolationError, StructuralError
from .instance_space import Example, decoy_for

Forecast = Tuple[Example, ...]


class Predictor(ABC):
    """Online forecaster of the example stream.

    Every call to observe() takes the next example of the stream and returns a
    prediction for the full length-T sequence.
    """

    def __init__(self, horizon: int):
        if horizon < 1:
            raise StructuralError("The horizon must be positive")

        self.horizon = horizon
        self.observed: List[Example] = []
        self.last_output: Optional[Forecast] = None

    @property
    def t(self) -> int:
        return len(self.observed)

    def observe(self, x: Example, side_information: Any = None) -> Forecast:
        if len(self.observed) >= self.horizon:
            raise StructuralError(
                "Predictor observed more than {} examples".format(self.horizon)
            )

        self.observed.append(x)
        output = tuple(self._forecast(tuple(self.observed), side_information))
        if len(output) != self.horizon:
            raise ProtocolViolationError(
                len(self.observed),
                "predictor returned {} examples instead of {}".format(
                    len(output), self.horizon
                ),
            )

        self.last_output = output
        return output

    @abstractmethod
    def _forecast(self, observed: Forecast, side_information: Any) -> Sequence[Example]:
        pass


class ConsistentPredictor(Predictor):
    """Overwrites the first t predicted positions with the observed prefix."""

    def __init__(self, inner: Predictor):
        super().__init__(inner.horizon)
        self.inner = inner

    def _forecast(self, observed: Forecast, side_information: Any) -> Sequence[Example]:
        forecast = self.inner.observe(observed[-1], side_information)
        return observed + tuple(forecast[len(observed):])


class LazyPredictor(Predictor):
    """Keeps the previous prediction whenever it was right about the new example.

    The inner predictor still observes every example so that its state keeps up
    with the stream.
    """

    def __init__(self, inner: Predictor):
        super().__init__(inner.horizon)
        self.inner = inner

    def _forecast(self, observed: Forecast, side_information: Any) -> Sequence[Example]:
        forecast = self.inner.observe(observed[-1], side_information)

        previous = self.last_output
        if previous is not None and previous[len(observed) - 1] == observed[-1]:
            return previous

        return forecast


def wrap_consistent(p: Predictor) -> Predictor:
    return ConsistentPredictor(p)


def wrap_lazy(p: Predictor) -> Predictor:
    return LazyPredictor(p)


# The game always runs predictors through both wrappers.
def wrap(p: Predictor) -> Predictor:
    return wrap_lazy(wrap_consistent(p))


class PerfectPredictor(Predictor):

    def __init__(self, stream: Sequence[Example]):
        super().__init__(len(stream))
        self.stream = tuple(stream)

    def _forecast(self, observed: Forecast, side_information: Any) -> Sequence[Example]:
        return self.stream


class StaticPredictor(Predictor):
    """Always predicts the same fixed sequence z_{1:T}."""

    def __init__(self, z: Sequence[Example]):
        super().__init__(len(z))
        self.z = tuple(z)

    def _forecast(self, observed: Forecast, side_information: Any) -> Sequence[Example]:
        return self.z


class CorruptingPredictor(Predictor):
    """Knows the base stream but is wrong about k randomly drawn rounds.

    Until a corrupted round has been observed its position holds a decoy that
    differs from the base example there. Run against its own base stream the
    predictor therefore errs in exactly those k rounds.
    """

    def __init__(
        self,
        base: Sequence[Example],
        k: int,
        rng: np.random.Generator,
        domain: Optional[Sequence[Example]] = None,
    ):
        super().__init__(len(base))
        if k < 0 or k > self.horizon - 1:
            raise ConfigError(
                "A corrupting predictor over {} rounds can make 0 to {} mistakes, "
                "got {}".format(self.horizon, self.horizon - 1, k)
            )

        self.base = tuple(base)
        self.mistake_rounds = frozenset(
            int(r) for r in rng.choice(np.arange(2, self.horizon + 1), size=k, replace=False)
        )
        self.decoys = {r: decoy_for(self.base[r - 1], domain) for r in self.mistake_rounds}

    def _forecast(self, observed: Forecast, side_information: Any) -> Sequence[Example]:
        t = len(observed)
        return tuple(
            self.decoys[s] if s in self.mistake_rounds and s > t else x
            for s, x in enumerate(self.base, start=1)
        )


def make_corrupting(
    base: Sequence[Example],
    k: int,
    seed: int,
    domain: Optional[Sequence[Example]] = None,
) -> CorruptingPredictor:
    return CorruptingPredictor(base, k, np.random.default_rng(seed), domain)


class CustomPredictor(Predictor):
    """Delegates to fn(observed_prefix, horizon, side_information)."""

    def __init__(
        self,
        horizon: int,
        fn: Callable[[Forecast, int, Any], Sequence[Example]],
    ):
        super().__init__(horizon)
        self.fn = fn

    def _forecast(self, observed: Forecast, side_information: Any) -> Sequence[Example]:
        return self.fn(observed, self.horizon, side_information)
