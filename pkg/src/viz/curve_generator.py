"""Bokeh page of training curves: loss, PER and total-score correlations per epoch."""

import os
from typing import Any, Dict, List

from bokeh.io import curdoc
from bokeh.layouts import column, row
from bokeh.models import Button, CheckboxGroup, CustomJS, Div, HoverTool
from bokeh.plotting import figure, save
from bokeh.resources import CDN
from bs4 import BeautifulSoup

from config.chart_config import CHART_COLORS, CURVE_PANELS, PLOT_SIZE
from util.file_util import ensure_directory_exists
from util.log_util import get_logger
from util.validation import ValidationError
from viz.plot_point import PlotPoint

logger = get_logger("viz.curves")

CUSTOM_CSS = """
<style>
    body {
        background-color: #2e2e2e;
        color: white;
    }

    .custom_button_bokeh button.bk.bk-btn.bk-btn-success {
        background-color: lime;
        color: black;
        }
</style>
"""


class CurveGenerator:
    """
    Builds one HTML page with a panel per training quantity.

    `runs` maps a run label (e.g. "seed_1" or "mamba") to its epoch history rows.
    """

    def __init__(self, runs: Dict[str, List[Dict[str, Any]]], title: str = "Training curves"):
        if not runs:
            raise ValidationError("no runs to plot")
        self.runs = runs
        self.title = title

        curdoc().theme = "dark_minimal"

        self.custom_css_div = Div(text=CUSTOM_CSS)
        self.checkboxes = None
        self.toggle_symbols_btn = None

    def generate(self, out_path: str) -> str:
        """
        Render every panel and write the page.

        Parameters:
            out_path (str): Destination .html file

        Returns:
            str: The written path
        """

        renderers = {"line": {}, "asterick": {}}
        panels = [
            self._create_panel(name, spec, renderers) for name, spec in CURVE_PANELS.items()
        ]
        self._add_toggles(renderers)
        layout = column(self.custom_css_div, *panels, row(self.checkboxes, self.toggle_symbols_btn))

        ensure_directory_exists(os.path.dirname(out_path))
        save(layout, filename=out_path, resources=CDN, title=self.title)
        self._modify_html(out_path)
        logger.info("Wrote training curves for %d run(s) to %s", len(self.runs), out_path)
        return out_path

    def _create_panel(self, panel_name: str, spec: Dict[str, Any], renderers: Dict) -> figure:
        """One figure with a line per (run, field)."""
        log_axis = spec["y_axis_type"] == "log"
        plot = figure(
            title=panel_name,
            x_axis_label="Epoch",
            y_axis_label=panel_name,
            y_axis_type=spec["y_axis_type"],
            width=PLOT_SIZE[0],
            height=PLOT_SIZE[1],
        )
        color_index = 0
        for run_name, rows in self.runs.items():
            epochs = [r.get("epoch") for r in rows]
            for field_name in spec["fields"]:
                label = run_name if len(spec["fields"]) == 1 else f"{run_name} {field_name}"
                curve = PlotPoint(
                    label,
                    plot,
                    epochs,
                    [r.get(field_name) for r in rows],
                    CHART_COLORS[color_index % len(CHART_COLORS)],
                    log_axis,
                )
                color_index += 1
                if curve.empty:
                    logger.debug("No %s values for %s", field_name, run_name)
                key = f"{panel_name}: {label}"
                renderers["line"][key] = curve.get_line()
                renderers["asterick"][key] = curve.get_asterick()

        plot.add_tools(HoverTool(tooltips=[("Run", "$name"), ("Epoch", "@x"), ("Value", "@y")]))
        plot.legend.click_policy = "hide"
        return plot

    def _add_toggles(self, renderers: Dict) -> None:
        """Symbol toggle button plus one checkbox per curve."""
        self.toggle_symbols_btn = Button(
            label="TOGGLE SYMBOLS",
            button_type="success",
            css_classes=["custom_button_bokeh"],
            height=50,
            width=50,
        )
        toggle_symbols = """
        for (var key in astericks){
            if (lines[key].visible) {
                astericks[key].visible = ! astericks[key].visible;
            }
        }
        """
        self.toggle_symbols_btn.js_on_click(
            CustomJS(args=dict(astericks=renderers["asterick"], lines=renderers["line"]), code=toggle_symbols)
        )

        labels = list(renderers["line"].keys())
        self.checkboxes = CheckboxGroup(labels=labels, active=list(range(len(labels))))
        checkboxes_code = """
        const checked = new Set(this.active)
        for (let i = 0; i < labels.length; i++) {
            let key = labels[i]
            renderers["line"][key].visible = checked.has(i)
            if (!checked.has(i)) {
                renderers["asterick"][key].visible = false
            }
        }
        """
        self.checkboxes.js_on_change(
            "active", CustomJS(args={"renderers": renderers, "labels": labels}, code=checkboxes_code)
        )

    def _modify_html(self, path: str) -> None:
        """Post processing of the HTML file with Beautiful Soup."""
        with open(path, "r", encoding="utf-8") as plot_file:
            soup = BeautifulSoup(plot_file, "html.parser")

        if soup.head:
            soup.head.append(BeautifulSoup(CUSTOM_CSS, "html.parser"))
        for title in soup.find_all("title"):
            title.string = self.title

        with open(path, "w", encoding="utf-8") as plot_file:
            plot_file.write(str(soup))


def epoch_rows(history: List[Dict[str, Any]]) -> List[Dict[str, Any]]:
    """Epoch rows of a history file, in epoch order."""
    rows = [r for r in history if r.get("kind") == "epoch"]
    return sorted(rows, key=lambda r: r["epoch"])
