from typing import Iterable

# local
from prescient.game import BoundRow, DimensionReport, SweepResult, TrialResult
from prescient.instance_space import example_to_text
from prescient.transcript import format_number

TRANSCRIPT_HEADER = "trial,t,x,y,pred_dist,mistake_prob,predictor_mistake,learner,seed"
BOUND_HEADER = "bound_name,analytic,measured_mean,stderr,pass"
SWEEP_HEADER = (
    "axis,value,horizon,mistakes,mean_expected_mistakes,mean_predictor_mistakes,"
    "restart_bound,meta_bound,envelope_bound"
)
DIMENSION_HEADER = "dimension,value"


def initialize_transcript_file(file_path: str):
    with open(file_path, mode="w", newline="\n") as file_:
        file_.write(TRANSCRIPT_HEADER)
        file_.write("\n")


def record_trial(file_path: str, result: TrialResult):
    with open(file_path, mode="a", newline="\n") as file_:
        for record in result.transcript.rounds:
            file_.write("{},{},".format(result.trial, record.t))
            file_.write("{},{},".format(example_to_text(record.x), record.y))
            file_.write("{},".format(record.prediction.to_text()))
            file_.write("{},".format(format_number(record.mistake_probability)))
            file_.write("{},".format(1 if record.predictor_mistake else 0))
            file_.write("{},{}".format(result.transcript.learner, result.seed))
            file_.write("\n")


def write_transcripts(file_path: str, results: Iterable[TrialResult]):
    initialize_transcript_file(file_path)
    for result in results:
        record_trial(file_path, result)


def write_bounds(file_path: str, rows: Iterable[BoundRow]):
    with open(file_path, mode="w", newline="\n") as file_:
        file_.write(BOUND_HEADER)
        file_.write("\n")
        for row in rows:
            file_.write(
                "{},{},{},{},{}\n".format(
                    row.name,
                    repr(row.analytic),
                    repr(row.measured_mean),
                    repr(row.stderr),
                    "true" if row.passed else "false",
                )
            )


def write_sweep(file_path: str, result: SweepResult):
    with open(file_path, mode="w", newline="\n") as file_:
        file_.write(SWEEP_HEADER)
        file_.write("\n")
        for point in result.points:
            file_.write("{},{},{},{},".format(result.axis, point.value, point.horizon, point.mistakes))
            file_.write(
                "{},{},".format(
                    repr(point.mean_expected_mistakes), repr(point.mean_predictor_mistakes)
                )
            )
            file_.write(
                "{},{},{}\n".format(
                    repr(point.restart_bound), repr(point.meta_bound), repr(point.envelope_bound)
                )
            )


def write_dimensions(file_path: str, report: DimensionReport):
    def value(v):
        # Dimensions beyond the brute force guards are left blank.
        return "" if v is None else str(v)

    with open(file_path, mode="w", newline="\n") as file_:
        file_.write(DIMENSION_HEADER)
        file_.write("\n")
        file_.write("vc,{}\n".format(value(report.vc)))
        file_.write("littlestone,{}\n".format(value(report.littlestone)))
        file_.write("natarajan,{}\n".format(value(report.natarajan)))
        file_.write("regime,{}\n".format(report.regime))
