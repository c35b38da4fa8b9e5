"""One training curve drawn on a Bokeh figure."""

from typing import Sequence

from bokeh.models import ColumnDataSource
from bokeh.plotting import figure
import numpy as np

from config.chart_config import ASTERICK_SIZE, LINE_WIDTH


class PlotPoint:
    """
    A named series (epoch -> value) as a line plus hidden asterisk markers.

    Rows with missing or non-finite values are skipped; on a log axis
    non-positive values are skipped too.
    """

    def __init__(
        self,
        name: str,
        figure: figure,
        x_values: Sequence,
        y_values: Sequence,
        color: str,
        log_axis: bool = False,
    ):
        self.name = name
        self.figure = figure
        self.color = color
        self.x_values, self.y_values = self._filter_valid_data(x_values, y_values, log_axis)

        self.source = ColumnDataSource(data={"x": self.x_values, "y": self.y_values})

        self.line = None
        self.asterick = None

        self.plot()

    @staticmethod
    def _filter_valid_data(x_values, y_values, log_axis: bool):
        x = np.asarray(x_values, dtype=np.double)
        y = np.array([np.nan if v is None else v for v in y_values], dtype=np.double)
        mask = np.isfinite(x) & np.isfinite(y)
        if log_axis:
            mask &= y > 0
        return x[mask], y[mask]

    @property
    def empty(self) -> bool:
        return self.y_values.size == 0

    def plot(self):
        """Draw the line and its (initially hidden) markers."""
        self.line = self.figure.line(
            "x",
            "y",
            source=self.source,
            legend_label=self.name,
            color=self.color,
            line_width=LINE_WIDTH,
            name=self.name,
        )

        self.asterick = self.figure.scatter(
            "x",
            "y",
            source=self.source,
            legend_label=self.name,
            color=self.color,
            marker="asterisk",
            size=ASTERICK_SIZE,
            visible=False,
        )

    def get_line(self):
        return self.line

    def get_asterick(self):
        return self.asterick
