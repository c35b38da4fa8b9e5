"""
Bokeh graphing modules for training curves.

This package contains the training-curve page.
- CurveGenerator
- PlotPoint
"""

from .curve_generator import CurveGenerator, epoch_rows
from .plot_point import PlotPoint

__all__ = ["CurveGenerator", "PlotPoint", "epoch_rows"]
