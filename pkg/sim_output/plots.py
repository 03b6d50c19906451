from os import path
from typing import List, Mapping, NamedTuple

import matplotlib

matplotlib.use("Agg")

import plotly.graph_objects as go  # noqa: E402
from matplotlib import pyplot as plt  # noqa: E402
from plotly.subplots import make_subplots  # noqa: E402

# local
from prescient.game import SweepResult  # noqa: E402

plt.rcParams["svg.hashsalt"] = "prescient"


class SweepPlotValues(NamedTuple):
    name: str
    markers: Mapping[str, str]
    x_values: List[float]
    y_values: List[float]
    dash: str = "solid"


def generate_plot_information(result: SweepResult) -> List[SweepPlotValues]:
    x_values = [float(p.value) for p in result.points]

    return [
        SweepPlotValues(
            name="measured expected mistakes",
            markers=dict(color="darkblue", symbol="circle"),
            x_values=x_values,
            y_values=[p.mean_expected_mistakes for p in result.points],
        ),
        SweepPlotValues(
            name="restart bound",
            markers=dict(color="darkgoldenrod", symbol="square-open"),
            x_values=x_values,
            y_values=[p.restart_bound for p in result.points],
            dash="dash",
        ),
        SweepPlotValues(
            name="meta bound",
            markers=dict(color="darkgreen", symbol="diamond-open"),
            x_values=x_values,
            y_values=[p.meta_bound for p in result.points],
            dash="dash",
        ),
        SweepPlotValues(
            name="combined bound",
            markers=dict(color="darkmagenta", symbol="cross-open"),
            x_values=x_values,
            y_values=[p.envelope_bound for p in result.points],
            dash="dot",
        ),
    ]


def generate_plot_traces(title: str, axis: str, plots: List[SweepPlotValues]) -> go.Figure:
    fig = make_subplots(rows=1, cols=1)
    for values in plots:
        print("Creating plot with title [{}] ...".format(values.name))
        fig.append_trace(
            go.Scatter(
                x=values.x_values,
                y=values.y_values,
                mode="lines+markers",
                marker=values.markers,
                line=dict(color=values.markers["color"], dash=values.dash),
                name=values.name,
                showlegend=True,
            ),
            row=1,
            col=1,
        )

    fig.update_xaxes(title_text=axis)
    fig.update_yaxes(title_text="mistakes")
    fig.update_layout(title=title, template="ggplot2", legend={"itemsizing": "constant"})
    return fig


_MATPLOTLIB_DASHES = {"solid": "-", "dash": "--", "dot": ":"}


def plot_sweep_svg(title: str, axis: str, plots: List[SweepPlotValues], file_path: str):
    fig, ax = plt.subplots(figsize=[8.0, 5.0], constrained_layout=True)
    for values in plots:
        ax.plot(
            values.x_values,
            values.y_values,
            _MATPLOTLIB_DASHES[values.dash],
            marker="o",
            lw=1.5,
            color=values.markers["color"],
            label=values.name,
        )

    ax.set_title(title)
    ax.set_xlabel(axis)
    ax.set_ylabel("mistakes")
    ax.legend(loc="upper left")
    fig.savefig(file_path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_sweep(name: str, output_directory: str, result: SweepResult):
    plots = generate_plot_information(result)
    title = "{} ({} sweep)".format(name, result.axis)

    plot_sweep_svg(title, result.axis, plots, path.join(output_directory, "sweep.svg"))

    fig = generate_plot_traces(title, result.axis, plots)
    fig.write_html(path.join(output_directory, "sweep.html"))
