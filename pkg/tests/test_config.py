import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

# locals
from prescient.config import (
    config_digest,
    parse_config,
    read_config,
    resolve_mistakes,
    with_overrides,
)
from prescient.errors import ConfigError
from prescient.hypotheses import FiniteTable, ThresholdClass
from prescient.instance_space import Atom, Point

EXPERIMENTS = Path(__file__).parent.parent / "experiments"


def game_data(**overrides):
    game = {
        "name": "unit",
        "hypothesis_class": {"kind": "threshold"},
        "predictor": {"kind": "corrupting", "mistakes": 2},
        "learner": "restart",
        "stream": {"source": "random-realizable"},
        "horizon": 16,
        "seed": 3,
        "trials": 4,
    }
    game.update(overrides)
    return {"game": game}


def test_minimal_configuration():
    config, sweep = parse_config(game_data())
    assert sweep is None
    assert config.name == "unit"
    assert isinstance(config.hypothesis_class.hypothesis_class, ThresholdClass)
    assert config.predictor.mistakes == 2
    assert config.learner == ("restart",)
    assert config.horizon == 16
    assert config.offline_mode == "realizable"
    assert config.bounds == ()
    assert not config.retain_full_predictions


def test_explicit_stream_infers_the_horizon():
    data = game_data(
        predictor={"kind": "perfect"},
        stream={"source": "explicit", "examples": ["1/4", "3/4"], "labels": [1, 0]},
    )
    del data["game"]["horizon"]
    config, _ = parse_config(data)

    assert config.horizon == 2
    assert config.stream.examples == (Point(Fraction(1, 4)), Point(Fraction(3, 4)))
    assert config.stream.labels == (1, 0)


def test_table_class():
    config, _ = parse_config(
        game_data(
            hypothesis_class={"kind": "table", "domain": ["atom:0", "atom:1"], "table": [[0, 1], [2, 1]]}
        )
    )
    H = config.hypothesis_class.hypothesis_class
    assert isinstance(H, FiniteTable)
    assert H.domain == (Atom(0), Atom(1))
    assert H.label_count == 3


def test_random_table_is_seeded():
    data = game_data(hypothesis_class={"kind": "random-table", "hypotheses": 24, "domain_size": 6, "labels": 3})
    first = parse_config(data)[0].hypothesis_class.hypothesis_class
    second = parse_config(data)[0].hypothesis_class.hypothesis_class

    assert np.array_equal(first.table, second.table)
    assert first.size <= 24
    assert first.label_count == 3
    assert first.domain == tuple(Atom(i) for i in range(6))


@pytest.mark.parametrize(
    "data",
    [
        {},
        {"game": []},
        game_data(hypothesis_class={"kind": "circle"}),
        game_data(hypothesis_class={"kind": "table", "domain": ["atom:0"]}),
        game_data(hypothesis_class={"kind": "table", "domain": ["atom:0"], "table": [[0], [0]]}),
        game_data(predictor={"kind": "psychic"}),
        game_data(predictor={"kind": "corrupting", "mistakes": -1}),
        game_data(predictor={"kind": "corrupting", "mistakes": "many"}),
        game_data(stream={"source": "explicit", "examples": ["1/4"]}),
        game_data(stream={"source": "explicit", "examples": ["1/4"], "labels": [1, 0]}),
        game_data(stream={"source": "random-realizable", "examples": ["half"]}),
        game_data(stream={"source": "agnostic-noise", "noise_rate": 1.5}),
        game_data(stream={"source": "random-realizable", "examples": ["1/4"]}),
        game_data(horizon=0),
        game_data(seed=True),
        game_data(learner="oracle"),
        game_data(learner=[]),
        game_data(offline_mode="lucky"),
        game_data(bounds=["envelope2"]),
    ],
)
def test_invalid_configurations(data):
    with pytest.raises(ConfigError):
        parse_config(data)


def test_missing_horizon():
    data = game_data()
    del data["game"]["horizon"]
    with pytest.raises(ConfigError):
        parse_config(data)


def test_sweep_section():
    data = game_data()
    data["sweep"] = {"axis": "mistakes", "values": [0, 1, 3]}
    _, sweep = parse_config(data)
    assert sweep.axis == "mistakes"
    assert sweep.values == (0, 1, 3)

    data["sweep"] = {"axis": "horizon", "values": [0]}
    with pytest.raises(ConfigError):
        parse_config(data)

    data["sweep"] = {"axis": "noise", "values": [1]}
    with pytest.raises(ConfigError):
        parse_config(data)


@pytest.mark.parametrize("file_path", sorted(EXPERIMENTS.glob("*.yaml")), ids=lambda p: p.stem)
def test_sample_experiments_parse(file_path):
    config, _ = read_config(str(file_path))
    assert config.name == file_path.stem


def test_read_config_from_yaml_and_json(tmp_path):
    yaml_file = tmp_path / "game.yaml"
    yaml_file.write_text(
        "game:\n"
        "  name: from-yaml\n"
        "  hypothesis_class: {kind: threshold}\n"
        "  predictor: {kind: perfect}\n"
        "  stream: {source: random-realizable}\n"
        "  horizon: 8\n"
    )
    config, _ = read_config(str(yaml_file))
    assert config.name == "from-yaml"

    json_file = tmp_path / "game.json"
    json_file.write_text(json.dumps(game_data()))
    config, _ = read_config(str(json_file))
    assert config.name == "unit"


def test_read_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        read_config(str(tmp_path / "missing.yaml"))

    broken = tmp_path / "broken.yaml"
    broken.write_text("game: [unclosed\n")
    with pytest.raises(ConfigError):
        read_config(str(broken))


def test_resolve_mistakes():
    assert resolve_mistakes("sqrt", 64) == 8
    assert resolve_mistakes("sqrt", 10) == 4
    assert resolve_mistakes("sqrt", 2) == 1
    assert resolve_mistakes(3, 64) == 3
    assert resolve_mistakes(9, 10) == 9

    with pytest.raises(ConfigError):
        resolve_mistakes(100, 10)


def test_corrupting_budget_must_fit_the_horizon():
    with pytest.raises(ConfigError):
        parse_config(game_data(predictor={"kind": "corrupting", "mistakes": 16}))

    config, _ = parse_config(game_data(predictor={"kind": "corrupting", "mistakes": 15}))
    assert config.predictor.mistakes == 15

    with pytest.raises(ConfigError):
        with_overrides(config, horizon=8)

    with pytest.raises(ConfigError):
        with_overrides(config, mistakes=16)

    # Other predictors ignore the budget.
    config, _ = parse_config(game_data(predictor={"kind": "perfect", "mistakes": 40}))
    assert config.predictor.kind == "perfect"


def test_overrides():
    config, _ = parse_config(game_data())
    changed = with_overrides(config, seed=9, trials=2, retain_full_predictions=True, horizon=32, mistakes="sqrt")

    assert changed.seed == 9
    assert changed.trials == 2
    assert changed.retain_full_predictions
    assert changed.horizon == 32
    assert changed.predictor.mistakes == "sqrt"
    assert with_overrides(config) == config

    with pytest.raises(ConfigError):
        with_overrides(config, trials=0)


def test_explicit_streams_keep_their_horizon():
    data = game_data(
        predictor={"kind": "perfect"},
        stream={"source": "explicit", "examples": ["1/4", "3/4"], "labels": [1, 0]},
        horizon=2,
    )
    config, _ = parse_config(data)
    with pytest.raises(ConfigError):
        with_overrides(config, horizon=4)


def test_config_digest():
    config, _ = parse_config(game_data())
    assert config_digest(config) == config_digest(parse_config(game_data())[0])
    assert config_digest(config) != config_digest(with_overrides(config, seed=4))
