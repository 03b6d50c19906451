import argparse
import logging
import os
import sys
from os import makedirs, path
from typing import Mapping

# local
from prescient.config import GameConfig, read_config, with_overrides
from prescient.errors import (
    CapabilityError,
    ConfigError,
    ContractError,
    DomainMismatchError,
    ProtocolViolationError,
    RealizabilityViolationError,
    StructuralError,
)
from prescient.game import (
    BoundReport,
    dimension_report,
    evaluate_bounds,
    run_game,
    run_lower_bound,
    sweep,
)
from sim_output.csv_output import (
    write_bounds,
    write_dimensions,
    write_sweep,
    write_transcripts,
)
from sim_output.plots import plot_sweep

PROJECT_ERRORS = (
    CapabilityError,
    ConfigError,
    ContractError,
    DomainMismatchError,
    ProtocolViolationError,
    RealizabilityViolationError,
    StructuralError,
)

EXIT_SUCCESS = 0
EXIT_BOUND_FAILED = 1
EXIT_ERROR = 2

SEED_VARIABLE = "PRESCIENT_SEED"


def read_arguments(args=None) -> Mapping[str, any]:
    parser = argparse.ArgumentParser(
        description="Simulate online classification with a predictor of future examples",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    parser.add_argument(
        "command",
        action="store",
        choices=["run", "bounds", "lowerbound", "sweep", "dims"],
        help="The experiment to run. Current options are: 'run', 'bounds', 'lowerbound', 'sweep', 'dims'")

    parser.add_argument(
        "-c",
        "--config",
        action="store",
        required=True,
        type=str,
        help="The file path for the YAML or JSON file which describes the game")

    parser.add_argument(
        "-o",
        "--out",
        action="store",
        required=False,
        default="out",
        type=str,
        help="The directory path for the output files")

    parser.add_argument(
        "-s",
        "--seed",
        action="store",
        required=False,
        type=int,
        help="The master seed. Overrides the seed in the configuration file; {} overrides this flag".format(SEED_VARIABLE))

    parser.add_argument(
        "-t",
        "--trials",
        action="store",
        required=False,
        type=int,
        help="The number of trials. Overrides the configuration file")

    parser.add_argument(
        "-rp",
        "--retain-predictions",
        action="store_true",
        required=False,
        help="Keep the full predicted sequence of every round in memory")

    parser.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        required=False,
        help="Print debug logging")

    parsed = parser.parse_args(args)

    return vars(parsed)


def resolve_seed(arg_dict: Mapping[str, any]):
    if SEED_VARIABLE in os.environ:
        try:
            return int(os.environ[SEED_VARIABLE])
        except ValueError as e:
            raise ConfigError("{} must be an integer, got '{}'".format(SEED_VARIABLE, os.environ[SEED_VARIABLE])) from e

    return arg_dict["seed"]


def output_directory_for(arg_dict: Mapping[str, any], config: GameConfig) -> str:
    output_directory = path.join(arg_dict["out"], config.name)
    if not path.isdir(output_directory):
        print("Output directory {} does not exist. Creating directory ...".format(output_directory))
        makedirs(output_directory)

    return output_directory


def print_bounds(report: BoundReport):
    for row in report.rows:
        print(
            "    {:<24} measured {:.4f} (se {:.4f}) {} analytic {:.4f} ... {}{}".format(
                row.name,
                row.measured_mean,
                row.stderr,
                row.direction,
                row.analytic,
                "pass" if row.passed else "FAIL",
                "" if row.asserted else " (not asserted)",
            )
        )


def simulation_run_game(config: GameConfig, output_directory: str, with_bounds: bool) -> int:
    print("Running {} trials of '{}' with learner {} ...".format(config.trials, config.name, config.learner[0]))
    report = run_game(config)

    write_transcripts(path.join(output_directory, "transcripts.csv"), report.trials)
    mean = sum(float(r.expected_mistakes) for r in report.trials) / len(report.trials)
    print("Mean expected mistakes: {:.4f}".format(mean))

    if not with_bounds:
        return EXIT_SUCCESS

    bounds = evaluate_bounds(report)
    write_bounds(path.join(output_directory, "bounds.csv"), bounds.rows)
    print("Bounds (randomized rows pass within 3 standard errors):")
    print_bounds(bounds)
    return EXIT_SUCCESS if bounds.passed else EXIT_BOUND_FAILED


def simulation_run_lower_bound(config: GameConfig, output_directory: str) -> int:
    print("Playing the lower bound game for '{}' against {} ...".format(config.name, ", ".join(config.learner)))
    report, _ = run_lower_bound(config)

    write_bounds(path.join(output_directory, "lowerbound.csv"), report.rows)
    print_bounds(report)
    return EXIT_SUCCESS if report.passed else EXIT_BOUND_FAILED


def simulation_run_sweep(config: GameConfig, sweep_config, output_directory: str) -> int:
    if sweep_config is None:
        raise ConfigError("The sweep command needs a 'sweep' section in the configuration")

    print("Sweeping '{}' over {} = {} ...".format(config.name, sweep_config.axis, list(sweep_config.values)))
    result = sweep(config, sweep_config)

    write_sweep(path.join(output_directory, "sweep.csv"), result)
    plot_sweep(config.name, output_directory, result)
    print("Sublinear: {}, monotone: {}".format(result.sublinear, result.monotone))
    return EXIT_SUCCESS


def simulation_run_dimensions(config: GameConfig, output_directory: str) -> int:
    report = dimension_report(config)
    write_dimensions(path.join(output_directory, "dims.csv"), report)
    print("VC: {}, Littlestone: {}, Natarajan: {}, regime: {}".format(
        report.vc, report.littlestone, report.natarajan, report.regime))
    return EXIT_SUCCESS


def simulation_run(arg_dict: Mapping[str, any]) -> int:
    command: str = arg_dict["command"]
    config, sweep_config = read_config(arg_dict["config"])
    config = with_overrides(
        config,
        seed=resolve_seed(arg_dict),
        trials=arg_dict["trials"],
        retain_full_predictions=arg_dict["retain_predictions"],
    )

    output_directory = output_directory_for(arg_dict, config)
    print("Outputting to {}".format(output_directory))

    if command == "run":
        return simulation_run_game(config, output_directory, False)

    if command == "bounds":
        return simulation_run_game(config, output_directory, True)

    if command == "lowerbound":
        return simulation_run_lower_bound(config, output_directory)

    if command == "sweep":
        return simulation_run_sweep(config, sweep_config, output_directory)

    return simulation_run_dimensions(config, output_directory)


def main(args=None) -> int:
    arg_dict = read_arguments(args)
    logging.basicConfig(level=logging.DEBUG if arg_dict["verbose"] else logging.WARNING)

    try:
        return simulation_run(arg_dict)
    except PROJECT_ERRORS as e:
        print("Error: {}".format(e))
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
