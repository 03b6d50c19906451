import math
from pathlib import Path
from typing import Any, List, Mapping, NamedTuple, Optional, Tuple, Union

import numpy as np
import yaml
from yaml.loader import SafeLoader

# local
from .errors import ConfigError, StructuralError
from .hypotheses import FiniteTable, HypothesisClass, ThresholdClass
from .instance_space import Atom, Example, example_to_json, parse_example
from .learners import LEARNER_KINDS
from .offline import OFFLINE_MODES, REALIZABLE
from .transcript import digest_mapping

CLASS_KINDS = ("threshold", "table", "random-table")
PREDICTOR_KINDS = ("perfect", "static", "corrupting", "zn", "custom-none")
STREAM_SOURCES = ("explicit", "random-realizable", "nature-zn", "agnostic-noise")
BOUND_NAMES = (
    "littlestone",
    "restart",
    "meta",
    "envelope",
    "expert",
    "agnostic-restart",
    "agnostic-combined",
    "rewa",
    "lower-bound",
)
SWEEP_AXES = ("mistakes", "horizon")
SQRT_MISTAKES = "sqrt"


class ClassSpec(NamedTuple):
    kind: str
    hypothesis_class: HypothesisClass


class PredictorSpec(NamedTuple):
    kind: str
    mistakes: Union[int, str]
    static: Optional[Tuple[Example, ...]]


class StreamSpec(NamedTuple):
    source: str
    examples: Optional[Tuple[Example, ...]]
    labels: Optional[Tuple[int, ...]]
    noise_rate: float
    n: int


class GameConfig(NamedTuple):
    name: str
    description: str
    hypothesis_class: ClassSpec
    predictor: PredictorSpec
    learner: Tuple[str, ...]
    stream: StreamSpec
    horizon: int
    seed: int
    trials: int
    retain_full_predictions: bool
    offline_mode: str
    bounds: Tuple[str, ...]


class SweepConfig(NamedTuple):
    axis: str
    values: Tuple[int, ...]


def _section(data: Mapping[str, Any], key: str, path: str) -> Mapping[str, Any]:
    if key not in data:
        raise ConfigError("Missing required key '{}{}'".format(path, key))

    value = data[key]
    if not isinstance(value, Mapping):
        raise ConfigError("'{}{}' must be a mapping".format(path, key))

    return value


def _integer(value: Any, key: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError("'{}' must be an integer, got {!r}".format(key, value))

    if minimum is not None and value < minimum:
        raise ConfigError("'{}' must be at least {}, got {}".format(key, minimum, value))

    return value


def _examples(values: Any, key: str) -> Tuple[Example, ...]:
    if not isinstance(values, list):
        raise ConfigError("'{}' must be a list of examples".format(key))

    try:
        return tuple(parse_example(v) for v in values)
    except StructuralError as e:
        raise ConfigError("'{}': {}".format(key, e)) from e


def _random_table(data: Mapping[str, Any], seed: int) -> FiniteTable:
    hypotheses = _integer(data.get("hypotheses", 8), "hypothesis_class.hypotheses", 1)
    domain_size = _integer(data.get("domain_size", 4), "hypothesis_class.domain_size", 1)
    labels = _integer(data.get("labels", 2), "hypothesis_class.labels", 2)

    rng = np.random.default_rng(seed)
    table = rng.integers(0, labels, size=(hypotheses, domain_size))

    # Duplicate rows are dropped, keeping the first occurrence.
    _, first = np.unique(table, axis=0, return_index=True)
    table = table[np.sort(first)]
    return FiniteTable([Atom(i) for i in range(domain_size)], table, labels)


def parse_class(data: Mapping[str, Any], seed: int) -> ClassSpec:
    kind = data.get("kind")
    if kind not in CLASS_KINDS:
        raise ConfigError(
            "'hypothesis_class.kind' must be one of {}, got {!r}".format(
                ", ".join(CLASS_KINDS), kind
            )
        )

    if kind == "threshold":
        return ClassSpec(kind, ThresholdClass())

    if kind == "random-table":
        return ClassSpec(kind, _random_table(data, seed))

    if "domain" not in data or "table" not in data:
        raise ConfigError("'hypothesis_class' of kind table needs 'domain' and 'table'")

    domain = _examples(data["domain"], "hypothesis_class.domain")
    try:
        table = FiniteTable(domain, data["table"], data.get("labels"))
    except (StructuralError, ValueError) as e:
        raise ConfigError("'hypothesis_class.table': {}".format(e)) from e

    return ClassSpec(kind, table)


def parse_predictor(data: Mapping[str, Any]) -> PredictorSpec:
    kind = data.get("kind")
    if kind not in PREDICTOR_KINDS:
        raise ConfigError(
            "'predictor.kind' must be one of {}, got {!r}".format(
                ", ".join(PREDICTOR_KINDS), kind
            )
        )

    mistakes = data.get("mistakes", 0)
    if mistakes != SQRT_MISTAKES:
        mistakes = _integer(mistakes, "predictor.mistakes", 0)

    static = None
    if "static" in data:
        static = _examples(data["static"], "predictor.static")

    return PredictorSpec(kind, mistakes, static)


def parse_stream(data: Mapping[str, Any]) -> StreamSpec:
    source = data.get("source")
    if source not in STREAM_SOURCES:
        raise ConfigError(
            "'stream.source' must be one of {}, got {!r}".format(
                ", ".join(STREAM_SOURCES), source
            )
        )

    examples = None
    if "examples" in data:
        examples = _examples(data["examples"], "stream.examples")

    labels = None
    if "labels" in data:
        labels = tuple(_integer(y, "stream.labels", 0) for y in data["labels"])

    if source == "explicit":
        if examples is None or labels is None:
            raise ConfigError("An explicit 'stream' needs 'examples' and 'labels'")

        if len(examples) != len(labels):
            raise ConfigError(
                "'stream.examples' has {} entries but 'stream.labels' has {}".format(
                    len(examples), len(labels)
                )
            )

    noise_rate = float(data.get("noise_rate", 0.0))
    if not 0.0 <= noise_rate <= 1.0:
        raise ConfigError("'stream.noise_rate' must lie in [0, 1], got {}".format(noise_rate))

    n = _integer(data.get("n", 0), "stream.n", 0)
    return StreamSpec(source, examples, labels, noise_rate, n)


def parse_learners(value: Any) -> Tuple[str, ...]:
    names = [value] if isinstance(value, str) else value
    if not isinstance(names, list) or len(names) == 0:
        raise ConfigError("'learner' must be a learner name or a non-empty list of names")

    for name in names:
        if not isinstance(name, str):
            raise ConfigError("'learner' entries must be strings, got {!r}".format(name))

        base = name.split(":")[0] + (":<c>" if ":" in name else "")
        if base not in LEARNER_KINDS:
            raise ConfigError(
                "Unknown learner '{}', expected one of {}".format(name, ", ".join(LEARNER_KINDS))
            )

    return tuple(names)


def parse_config(data: Mapping[str, Any]) -> Tuple[GameConfig, Optional[SweepConfig]]:
    if not isinstance(data, Mapping):
        raise ConfigError("A configuration must be a mapping with a 'game' key")

    game = _section(data, "game", "")
    seed = _integer(game.get("seed", 0), "game.seed", 0)
    trials = _integer(game.get("trials", 1), "game.trials", 1)

    stream = parse_stream(_section(game, "stream", "game."))
    if "horizon" in game:
        horizon = _integer(game["horizon"], "game.horizon", 1)
    elif stream.examples is not None:
        horizon = len(stream.examples)
    else:
        raise ConfigError("Missing required key 'game.horizon'")

    if stream.examples is not None and len(stream.examples) != horizon:
        raise ConfigError(
            "'stream.examples' has {} entries but the horizon is {}".format(
                len(stream.examples), horizon
            )
        )

    offline_mode = game.get("offline_mode", REALIZABLE)
    if offline_mode not in OFFLINE_MODES:
        raise ConfigError(
            "'game.offline_mode' must be one of {}, got {!r}".format(
                ", ".join(OFFLINE_MODES), offline_mode
            )
        )

    bounds = tuple(game.get("bounds", []))
    for bound in bounds:
        if bound not in BOUND_NAMES:
            raise ConfigError(
                "Unknown bound '{}' in 'game.bounds', expected one of {}".format(
                    bound, ", ".join(BOUND_NAMES)
                )
            )

    config = GameConfig(
        name=str(game.get("name", "game")),
        description=str(game.get("description", "")),
        hypothesis_class=parse_class(_section(game, "hypothesis_class", "game."), seed),
        predictor=parse_predictor(_section(game, "predictor", "game.")),
        learner=parse_learners(game.get("learner", "restart")),
        stream=stream,
        horizon=horizon,
        seed=seed,
        trials=trials,
        retain_full_predictions=bool(game.get("retain_full_predictions", False)),
        offline_mode=offline_mode,
        bounds=bounds,
    )
    _check_mistakes(config)

    sweep = None
    if "sweep" in data:
        sweep = parse_sweep(data["sweep"])

    return config, sweep


def parse_sweep(data: Any) -> SweepConfig:
    if not isinstance(data, Mapping):
        raise ConfigError("'sweep' must be a mapping")

    axis = data.get("axis")
    if axis not in SWEEP_AXES:
        raise ConfigError(
            "'sweep.axis' must be one of {}, got {!r}".format(", ".join(SWEEP_AXES), axis)
        )

    values = data.get("values")
    if not isinstance(values, list) or len(values) == 0:
        raise ConfigError("'sweep.values' must be a non-empty list")

    minimum = 0 if axis == "mistakes" else 1
    return SweepConfig(axis, tuple(_integer(v, "sweep.values", minimum) for v in values))


def read_config(file_path: str) -> Tuple[GameConfig, Optional[SweepConfig]]:
    relative = Path(file_path)
    if not relative.exists():
        raise ConfigError("The configuration file {} does not exist".format(file_path))

    with open(relative.absolute()) as f:
        print("Reading {} ...".format(f.name))
        try:
            data = yaml.load(f, Loader=SafeLoader)
        except yaml.YAMLError as e:
            raise ConfigError("Cannot parse {}: {}".format(file_path, e)) from e

    return parse_config(data)


def resolve_mistakes(mistakes: Union[int, str], horizon: int) -> int:
    # The sqrt budget is capped at T - 1.
    if mistakes == SQRT_MISTAKES:
        return min(math.ceil(math.sqrt(horizon)), horizon - 1)

    k = int(mistakes)
    if k > horizon - 1:
        raise ConfigError(
            "'predictor.mistakes' must be between 0 and {} for a horizon of {}, got {}".format(
                horizon - 1, horizon, k
            )
        )

    return k


def _check_mistakes(config: GameConfig) -> GameConfig:
    if config.predictor.kind == "corrupting":
        resolve_mistakes(config.predictor.mistakes, config.horizon)

    return config


def with_overrides(
    config: GameConfig,
    seed: Optional[int] = None,
    trials: Optional[int] = None,
    retain_full_predictions: Optional[bool] = None,
    horizon: Optional[int] = None,
    mistakes: Optional[Union[int, str]] = None,
) -> GameConfig:
    changes = {}
    if seed is not None:
        changes["seed"] = _integer(seed, "seed", 0)

    if trials is not None:
        changes["trials"] = _integer(trials, "trials", 1)

    if retain_full_predictions:
        changes["retain_full_predictions"] = True

    if horizon is not None:
        if config.stream.examples is not None:
            raise ConfigError("Cannot change the horizon of a stream with explicit examples")
        changes["horizon"] = _integer(horizon, "horizon", 1)

    if mistakes is not None:
        changes["predictor"] = config.predictor._replace(mistakes=mistakes)

    return _check_mistakes(config._replace(**changes))


def config_to_dict(config: GameConfig) -> Mapping[str, Any]:
    hypothesis_class = config.hypothesis_class.hypothesis_class
    class_data: Mapping[str, Any] = {"kind": config.hypothesis_class.kind}
    if isinstance(hypothesis_class, FiniteTable):
        class_data = dict(class_data, **hypothesis_class.to_json())

    def examples(xs: Optional[Tuple[Example, ...]]) -> Optional[List[Mapping[str, Any]]]:
        return None if xs is None else [example_to_json(x) for x in xs]

    return {
        "name": config.name,
        "hypothesis_class": class_data,
        "predictor": {
            "kind": config.predictor.kind,
            "mistakes": config.predictor.mistakes,
            "static": examples(config.predictor.static),
        },
        "learner": list(config.learner),
        "stream": {
            "source": config.stream.source,
            "examples": examples(config.stream.examples),
            "labels": None if config.stream.labels is None else list(config.stream.labels),
            "noise_rate": config.stream.noise_rate,
            "n": config.stream.n,
        },
        "horizon": config.horizon,
        "seed": config.seed,
        "trials": config.trials,
        "offline_mode": config.offline_mode,
    }


def config_digest(config: GameConfig) -> str:
    return digest_mapping(config_to_dict(config))
