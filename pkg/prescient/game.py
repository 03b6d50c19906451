import logging
import math
from fractions import Fraction
from typing import Any, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import sem

# local
from .adversary import (
    PeeksGameResult,
    ZnParams,
    ZnPredictor,
    lower_bound_value,
    nature_peeks_game,
    random_zn_stream,
    stream_blocks,
    stream_gen,
    zn_params,
)
from .config import GameConfig, SweepConfig, config_digest, resolve_mistakes, with_overrides
from .errors import CapabilityError, ConfigError, ContractError, ProtocolViolationError
from .hypotheses import (
    FiniteTable,
    HypothesisClass,
    ThresholdClass,
    littlestone_dimension,
    natarajan_dimension,
    project,
    threshold_shatter_check,
    vc_dimension,
)
from .instance_space import STAR, Atom, Example, Point
from .learners import (
    CombinedAgnosticLearner,
    HypothesisExpertsLearner,
    OnlineLearner,
    RestartLearner,
    make_learner,
)
from .offline import AGNOSTIC, REALIZABLE, BoundFn, best_in_hindsight, offline_bound
from .predictors import (
    CorruptingPredictor,
    CustomPredictor,
    PerfectPredictor,
    Predictor,
    StaticPredictor,
    wrap,
)
from .transcript import (
    LabeledStream,
    RoundRecord,
    Transcript,
    digest_sequence,
    expected_mistakes,
    predictor_mistake_count,
)

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
POINT_RESOLUTION = 1 << 16

# Slack used when comparing float bound values.
TOLERANCE = 1e-9
STANDARD_ERRORS = 3


def splitmix64(value: int) -> int:
    z = (value + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master_seed: int, trial: int) -> int:
    """Seed of trial i: splitmix64 of master + i * golden gamma (mod 2^64)."""
    return splitmix64((master_seed + trial * GOLDEN_GAMMA) & MASK64)


def build_hypothesis_class(config: GameConfig) -> HypothesisClass:
    return config.hypothesis_class.hypothesis_class


def filler_example(hypothesis_class: HypothesisClass) -> Example:
    """The example an uninformative predictor puts in every unknown position."""
    if isinstance(hypothesis_class, FiniteTable):
        return hypothesis_class.domain[-1]

    return STAR


def _random_point(rng: np.random.Generator) -> Point:
    return Point(Fraction(int(rng.integers(0, POINT_RESOLUTION + 1)), POINT_RESOLUTION))


def _random_examples(config: GameConfig, rng: np.random.Generator) -> Tuple[Example, ...]:
    hypothesis_class = build_hypothesis_class(config)
    if config.stream.examples is not None:
        return config.stream.examples

    if config.predictor.kind == "zn":
        k = resolve_mistakes(config.predictor.mistakes, config.horizon)
        return random_zn_stream(zn_params(config.horizon, k), rng)

    if isinstance(hypothesis_class, FiniteTable):
        domain = hypothesis_class.domain
        return tuple(domain[int(i)] for i in rng.integers(0, len(domain), size=config.horizon))

    return tuple(_random_point(rng) for _ in range(config.horizon))


def build_stream(config: GameConfig, rng: np.random.Generator) -> LabeledStream:
    source = config.stream.source
    if source == "explicit":
        return LabeledStream.from_parts(config.stream.examples, config.stream.labels)

    if source == "nature-zn":
        raise ConfigError("A 'nature-zn' stream is built by the adaptive lower bound game only")

    hypothesis_class = build_hypothesis_class(config)
    examples = _random_examples(config, rng)
    if isinstance(hypothesis_class, FiniteTable):
        target: Any = int(rng.integers(0, hypothesis_class.size))
    else:
        target = _random_point(rng).value

    labels = [hypothesis_class.evaluate(target, x) for x in examples]
    if source == "agnostic-noise":
        label_count = hypothesis_class.label_count
        flips = rng.random(len(labels)) < config.stream.noise_rate
        for t in np.flatnonzero(flips):
            if label_count == 2:
                labels[t] = 1 - labels[t]
            else:
                labels[t] = (labels[t] + int(rng.integers(1, label_count))) % label_count

    return LabeledStream.from_parts(examples, labels)


def build_predictor(
    config: GameConfig, stream: LabeledStream, rng: np.random.Generator
) -> Predictor:
    hypothesis_class = build_hypothesis_class(config)
    kind = config.predictor.kind
    horizon = stream.horizon

    if kind == "perfect":
        return PerfectPredictor(stream.examples())

    if kind == "static":
        z = config.predictor.static
        if z is None:
            z = (filler_example(hypothesis_class),) * horizon
        if len(z) != horizon:
            raise ConfigError(
                "'predictor.static' has {} examples but the horizon is {}".format(len(z), horizon)
            )
        return StaticPredictor(z)

    if kind == "corrupting":
        k = resolve_mistakes(config.predictor.mistakes, horizon)
        domain = hypothesis_class.domain if isinstance(hypothesis_class, FiniteTable) else None
        return CorruptingPredictor(stream.examples(), k, rng, domain)

    if kind == "zn":
        return ZnPredictor(zn_params(horizon, resolve_mistakes(config.predictor.mistakes, horizon)))

    filler = filler_example(hypothesis_class)

    def pad(observed, length, side_information):
        return tuple(observed) + (filler,) * (length - len(observed))

    return CustomPredictor(horizon, pad)


def play_protocol(
    stream: LabeledStream,
    predictor: Predictor,
    learner: OnlineLearner,
    digest: str = "",
    seed: int = 0,
    retain_predictions: bool = False,
    learner_name: Optional[str] = None,
) -> Transcript:
    """Runs one game: reveal x_t, let the predictor forecast, let the learner
    predict, reveal y_t and update the learner."""
    wrapped = wrap(predictor)
    rounds: List[RoundRecord] = []
    previous = None
    for t, (x, y) in enumerate(stream.items, start=1):
        predictions = wrapped.observe(x)
        try:
            distribution = learner.predict(x, predictions)
            learner.update(y)
        except ContractError as e:
            raise ProtocolViolationError(t, str(e)) from e

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
        previous = predictions

    return Transcript(
        tuple(rounds), stream.horizon, digest, seed, learner_name or learner.name
    )


class TrialResult(NamedTuple):
    trial: int
    seed: int
    stream: LabeledStream
    transcript: Transcript
    expected_mistakes: Any
    best_loss: int
    regret: Any
    predictor_mistakes: int
    extras: Mapping[str, Any]


class RunReport(NamedTuple):
    config: GameConfig
    learner: str
    config_digest: str
    trials: Tuple[TrialResult, ...]


def _learner_extras(learner: OnlineLearner) -> Mapping[str, Any]:
    extras = {}
    if isinstance(learner, RestartLearner):
        extras["restart_instances"] = learner.instances

    baseline = learner
    if isinstance(learner, CombinedAgnosticLearner):
        baseline = learner.baseline
        extras["constituent_losses"] = tuple(learner.constituent_losses)
        extras["expert_count"] = len(learner.constituents)

    if isinstance(baseline, HypothesisExpertsLearner):
        extras["baseline_best_loss"] = baseline.best_expert_loss()
        extras["baseline_bound"] = baseline.regret_bound()

    return extras


def run_game(config: GameConfig, learner_name: Optional[str] = None) -> RunReport:
    learner_name = learner_name or config.learner[0]
    hypothesis_class = build_hypothesis_class(config)
    digest = config_digest(config)

    results: List[TrialResult] = []
    for trial in range(config.trials):
        seed = trial_seed(config.seed, trial)
        stream_rng, predictor_rng = [
            np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(2)
        ]

        stream = build_stream(config, stream_rng)
        predictor = build_predictor(config, stream, predictor_rng)
        learner = make_learner(learner_name, hypothesis_class, stream.horizon, config.offline_mode)
        transcript = play_protocol(
            stream,
            predictor,
            learner,
            digest,
            seed,
            config.retain_full_predictions,
            learner_name,
        )

        mistakes = expected_mistakes(transcript)
        best_loss = best_in_hindsight(hypothesis_class, stream)
        results.append(
            TrialResult(
                trial=trial,
                seed=seed,
                stream=stream,
                transcript=transcript,
                expected_mistakes=mistakes,
                best_loss=best_loss,
                regret=mistakes - best_loss,
                predictor_mistakes=predictor_mistake_count(transcript),
                extras=_learner_extras(learner),
            )
        )
        logger.debug(
            "Trial {} ({}): expected mistakes {}, predictor mistakes {}".format(
                trial, learner_name, mistakes, results[-1].predictor_mistakes
            )
        )

    return RunReport(config, learner_name, digest, tuple(results))


class BoundRow(NamedTuple):
    name: str
    analytic: float
    measured_mean: float
    stderr: float
    passed: bool
    deterministic: bool
    direction: str
    asserted: bool
    inputs: Mapping[str, Any]


class BoundReport(NamedTuple):
    rows: Tuple[BoundRow, ...]

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows if row.asserted)


def restart_bound(offline: BoundFn, horizon: int, predictor_mistakes: float) -> float:
    return (predictor_mistakes + 1) * offline(horizon)


def meta_bound(offline: BoundFn, horizon: int, predictor_mistakes: float) -> float:
    m = predictor_mistakes + 1
    return 6 * (m * offline(horizon / m + 1) + math.log2(horizon))


def agnostic_meta_bound(offline: BoundFn, horizon: int, predictor_mistakes: float) -> float:
    m = predictor_mistakes + 1
    return 2 * m * offline(horizon / m + 1) + math.sqrt(horizon * math.log2(horizon))


def expert_bound(
    offline: BoundFn, horizon: int, predictor_mistakes: float, c: int, plus_one: bool = True
) -> float:
    block = horizon / (c + 1) + (1 if plus_one else 0)
    return (predictor_mistakes + c + 1) * offline(block)


def littlestone_term(hypothesis_class: HypothesisClass) -> Optional[int]:
    if not isinstance(hypothesis_class, FiniteTable):
        return None

    try:
        return littlestone_dimension(hypothesis_class)
    except CapabilityError:
        return None


def envelope_bound(
    hypothesis_class: HypothesisClass, horizon: int, predictor_mistakes: float
) -> float:
    offline = offline_bound(hypothesis_class, REALIZABLE)
    terms = [
        restart_bound(offline, horizon, predictor_mistakes),
        meta_bound(offline, horizon, predictor_mistakes),
    ]
    littlestone = littlestone_term(hypothesis_class)
    if littlestone is not None:
        terms.append(littlestone)

    return 3 * min(terms) + 5


def _compare(
    name: str,
    analytic: float,
    values: Sequence[Any],
    deterministic: bool,
    inputs: Mapping[str, Any],
    asserted: bool = True,
    direction: str = "<=",
) -> BoundRow:
    if deterministic and all(isinstance(v, (Fraction, int)) for v in values):
        mean = float(sum(Fraction(v) for v in values) / len(values))
    else:
        mean = float(np.mean([float(v) for v in values]))

    stderr = float(sem([float(v) for v in values])) if len(values) > 1 else 0.0
    slack = TOLERANCE if deterministic else STANDARD_ERRORS * stderr + TOLERANCE
    if direction == "<=":
        passed = mean <= analytic + slack
    else:
        passed = mean >= analytic - slack

    logger.debug("Bound {}: measured {} {} {} ({})".format(name, mean, direction, analytic, passed))
    return BoundRow(name, float(analytic), mean, stderr, passed, deterministic, direction, asserted, inputs)


def _expert_parameter(learner_name: str, horizon: int, predictor_mistakes: float) -> int:
    if learner_name.startswith("expert:"):
        return int(learner_name[len("expert:"):])

    return min(math.ceil(predictor_mistakes), horizon - 1)


def evaluate_bounds(report: RunReport, names: Optional[Sequence[str]] = None) -> BoundReport:
    names = tuple(names) if names is not None else report.config.bounds
    if len(names) == 0:
        raise ConfigError("No bounds were requested for '{}'".format(report.config.name))

    if len(report.trials) == 0:
        raise ConfigError("Cannot evaluate bounds without trials")

    hypothesis_class = build_hypothesis_class(report.config)
    horizon = report.trials[0].stream.horizon
    m = float(np.mean([r.predictor_mistakes for r in report.trials]))
    mistakes = [r.expected_mistakes for r in report.trials]
    regrets = [r.regret for r in report.trials]
    deterministic = all(r.transcript.is_deterministic() for r in report.trials)
    realizable = offline_bound(hypothesis_class, REALIZABLE)
    agnostic = offline_bound(hypothesis_class, AGNOSTIC)
    inputs = {"T": horizon, "M_P": m, "M_B": realizable.describe()}

    rows: List[BoundRow] = []
    for name in names:
        if name == "littlestone":
            littlestone = littlestone_term(hypothesis_class)
            if littlestone is None:
                raise ConfigError(
                    "The littlestone bound needs a finite class within the brute force guard"
                )
            rows.append(_compare(name, littlestone, mistakes, deterministic, dict(inputs, L=littlestone)))

        elif name == "restart":
            rows.append(_compare(name, restart_bound(realizable, horizon, m), mistakes, deterministic, inputs))

        elif name == "meta":
            rows.append(_compare(name, meta_bound(realizable, horizon, m), mistakes, deterministic, inputs))

        elif name == "envelope":
            rows.append(
                _compare(
                    name,
                    envelope_bound(hypothesis_class, horizon, m),
                    mistakes,
                    deterministic,
                    dict(inputs, L=littlestone_term(hypothesis_class)),
                )
            )

        elif name == "expert":
            c = _expert_parameter(report.learner, horizon, m)
            rows.append(
                _compare(name, expert_bound(realizable, horizon, m, c), mistakes, deterministic, dict(inputs, c=c))
            )
            # Reported alongside for comparison, not asserted.
            rows.append(
                _compare(
                    "expert-no-plus-one",
                    expert_bound(realizable, horizon, m, c, plus_one=False),
                    mistakes,
                    deterministic,
                    dict(inputs, c=c),
                    asserted=False,
                )
            )

        elif name == "agnostic-restart":
            rows.append(
                _compare(
                    name,
                    restart_bound(agnostic, horizon, m),
                    regrets,
                    deterministic,
                    dict(inputs, R_B=agnostic.describe()),
                )
            )

        elif name == "agnostic-combined":
            if "baseline_bound" not in report.trials[0].extras:
                raise ConfigError("The agnostic-combined bound needs the 'experts' or 'combined-agnostic' learner")

            baseline = float(
                np.mean(
                    [
                        r.extras["baseline_bound"] + r.extras["baseline_best_loss"] - r.best_loss
                        for r in report.trials
                    ]
                )
            )
            analytic = min(baseline, agnostic_meta_bound(agnostic, horizon, m)) + math.sqrt(horizon)
            rows.append(
                _compare(name, analytic, regrets, deterministic, dict(inputs, baseline=baseline, R_B=agnostic.describe()))
            )

        elif name == "rewa":
            if "constituent_losses" not in report.trials[0].extras:
                raise ConfigError("The rewa bound needs the 'combined-agnostic' learner")

            analytic = float(
                np.mean(
                    [
                        min(r.extras["constituent_losses"])
                        + math.sqrt(horizon * math.log2(r.extras["expert_count"]))
                        for r in report.trials
                    ]
                )
            )
            rows.append(_compare(name, analytic, mistakes, deterministic, inputs))

        elif name == "lower-bound":
            raise ConfigError("The lower-bound row comes from the lower bound game, not from a run")

        else:
            raise ConfigError("Unknown bound '{}'".format(name))

    return BoundReport(tuple(rows))


def check_lower_bound_game(result: PeeksGameResult, params: ZnParams) -> Mapping[str, bool]:
    """Membership, realizability, shattering and predictor mistake checks of one
    lower bound game."""
    examples = result.stream.examples()
    blocks = stream_blocks(params.initial_block, result.indices)
    shattered = all(
        threshold_shatter_check(version, sorted_block)
        for (sorted_block, _, _), version in zip(blocks, result.version_spaces)
    )

    return {
        "in_zn": stream_gen(params.initial_block, result.indices) == examples,
        "realizable": not result.version_spaces[-1].is_empty(),
        "shattered": shattered,
        "predictor_mistakes": predictor_mistake_count(result.transcript) == params.mistakes,
    }


def run_lower_bound(config: GameConfig) -> Tuple[BoundReport, Tuple[PeeksGameResult, ...]]:
    if config.stream.source != "nature-zn":
        raise ConfigError("The lower bound game needs 'stream.source: nature-zn'")

    hypothesis_class = build_hypothesis_class(config)
    if not isinstance(hypothesis_class, ThresholdClass):
        raise ConfigError("The lower bound game is played over the threshold class")

    params = zn_params(config.horizon, config.stream.n)
    target = lower_bound_value(config.horizon, config.stream.n)
    digest = config_digest(config)

    rows: List[BoundRow] = []
    results: List[PeeksGameResult] = []
    for learner_name in config.learner:
        learner = make_learner(learner_name, hypothesis_class, config.horizon, config.offline_mode)
        result = nature_peeks_game(
            learner,
            params,
            digest,
            config.seed,
            config.retain_full_predictions,
            learner_name,
        )
        checks = check_lower_bound_game(result, params)
        row = _compare(
            "lower-bound:{}".format(learner_name),
            target,
            [result.forced_expected_mistakes],
            True,
            dict(checks, T=config.horizon, n=config.stream.n, indices=result.indices),
            direction=">=",
        )
        rows.append(row._replace(passed=row.passed and all(checks.values())))
        results.append(result)

    return BoundReport(tuple(rows)), tuple(results)


class SweepPoint(NamedTuple):
    value: int
    horizon: int
    mistakes: int
    mean_expected_mistakes: float
    mean_predictor_mistakes: float
    restart_bound: float
    meta_bound: float
    envelope_bound: float


class SweepResult(NamedTuple):
    axis: str
    points: Tuple[SweepPoint, ...]
    sublinear: bool
    monotone: bool


def sweep(config: GameConfig, sweep_config: SweepConfig) -> SweepResult:
    if len(sweep_config.values) == 0:
        raise ConfigError("A sweep needs at least one axis value")

    hypothesis_class = build_hypothesis_class(config)
    offline = offline_bound(hypothesis_class, REALIZABLE)

    points: List[SweepPoint] = []
    for value in sweep_config.values:
        if sweep_config.axis == "mistakes":
            point_config = with_overrides(config, mistakes=value)
        else:
            point_config = with_overrides(config, horizon=value)

        report = run_game(point_config)
        horizon = point_config.horizon
        m = float(np.mean([r.predictor_mistakes for r in report.trials]))
        points.append(
            SweepPoint(
                value=value,
                horizon=horizon,
                mistakes=resolve_mistakes(point_config.predictor.mistakes, horizon),
                mean_expected_mistakes=float(np.mean([float(r.expected_mistakes) for r in report.trials])),
                mean_predictor_mistakes=m,
                restart_bound=restart_bound(offline, horizon, m),
                meta_bound=meta_bound(offline, horizon, m),
                envelope_bound=envelope_bound(hypothesis_class, horizon, m),
            )
        )

    ratios = [p.mean_expected_mistakes / p.horizon for p in points]
    means = [p.mean_expected_mistakes for p in points]
    return SweepResult(
        axis=sweep_config.axis,
        points=tuple(points),
        sublinear=all(later < earlier for earlier, later in zip(ratios, ratios[1:])),
        monotone=all(later >= earlier - TOLERANCE for earlier, later in zip(means, means[1:])),
    )


class DimensionReport(NamedTuple):
    vc: Optional[int]
    littlestone: Optional[int]
    natarajan: Optional[int]
    regime: str


def _dimension_or_none(fn, table: FiniteTable) -> Optional[int]:
    try:
        return fn(table)
    except CapabilityError as e:
        logger.debug("Dimension left out: {}".format(e))
        return None


def dimension_report(config: GameConfig) -> DimensionReport:
    """Brute force dimensions of the configured class.

    Thresholds are projected onto the configured stream examples, or onto a
    dyadic block of 15 points when the stream has none.
    """
    hypothesis_class = build_hypothesis_class(config)
    if isinstance(hypothesis_class, FiniteTable):
        table = hypothesis_class
        regime = "constant"
    else:
        xs = config.stream.examples
        if xs is None:
            xs = stream_gen(zn_params(15, 0).initial_block, [])
        table = project(hypothesis_class, [x for x in xs if not isinstance(x, Atom)])
        # Infinite Littlestone dimension but VC dimension 1.
        regime = "logarithmic"

    vc = _dimension_or_none(vc_dimension, table) if table.label_count == 2 else None
    return DimensionReport(
        vc=vc,
        littlestone=_dimension_or_none(littlestone_dimension, table),
        natarajan=_dimension_or_none(natarajan_dimension, table),
        regime=regime,
    )
