"""Gnuplot data and script emission for the windowed series

``<prefix>.dat`` holds one whitespace-separated row per window
(instances, ce_loss, node_count, grad_norm; ``NaN`` where undefined) and
``<prefix>.gp`` plots the three panels loss, node count and gradient norm
against instances.
"""

from pathlib import Path

from jinja2 import Environment, StrictUndefined

from sohot.evaluation.prequential import EvalReport

GNUPLOT_TEMPLATE = """\
# {{ title }}
set terminal pngcairo size 900,900
set output '{{ image }}'
set multiplot layout 3,1 title '{{ title }}'
set xlabel 'instances'
set key off
{%- for position in drifts %}
set arrow from {{ position }}, graph 0 to {{ position }}, graph 1 nohead lc rgb "red" dt 2
{%- endfor %}
{%- for panel in panels %}
set ylabel '{{ panel.label }}'
plot '{{ data }}' using 1:{{ panel.column }} with lines lw 2
{%- endfor %}
unset multiplot
"""

PANELS = [
    {"label": "cross-entropy", "column": 2},
    {"label": "nodes", "column": 3},
    {"label": "|dL/dT|", "column": 4},
]

_env = Environment(undefined=StrictUndefined, keep_trailing_newline=True)


def _cell(value: float | int | None) -> str:
    if value is None:
        return "NaN"
    if isinstance(value, int):
        return str(value)
    return f"{value:.6f}"


def plot_data(report: EvalReport) -> str:
    lines = ["# instances ce_loss node_count grad_norm"]
    for w in report.mean_windows():
        lines.append(
            " ".join(
                [
                    _cell(w.instances),
                    _cell(w.ce_loss),
                    _cell(w.node_count),
                    _cell(w.grad_norm),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def plot_script(data_name: str, image_name: str, title: str, drifts: list[int]) -> str:
    template = _env.from_string(GNUPLOT_TEMPLATE)
    return template.render(
        title=title, data=data_name, image=image_name, panels=PANELS, drifts=drifts
    )


def write_plot(
    report: EvalReport, prefix: Path, drifts: list[int] | None = None
) -> tuple[Path, Path]:
    """Write ``<prefix>.dat`` and ``<prefix>.gp``"""
    data_path = prefix.with_name(prefix.name + ".dat")
    script_path = prefix.with_name(prefix.name + ".gp")
    data_path.write_text(plot_data(report))
    script_path.write_text(
        plot_script(
            data_path.name,
            prefix.name + ".png",
            f"{report.model} (p={report.n_features}, k={report.n_classes})",
            drifts or [],
        )
    )
    return data_path, script_path
