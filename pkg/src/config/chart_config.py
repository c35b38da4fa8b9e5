"""Bokeh chart configuration module."""

CHART_COLORS = [
    "magenta",
    "lime",
    "aqua",
    "red",
    "gold",
    "deepskyblue",
    "blueviolet",
    "deeppink",
    "orange",
    "lightcoral",
]

LINE_WIDTH = 2
ASTERICK_SIZE = 7

# One panel per training quantity; keys are history-row fields
CURVE_PANELS = {
    "Training loss": {"fields": ["train_loss"], "y_axis_type": "log"},
    "Phone error rate": {"fields": ["per"], "y_axis_type": "linear"},
    "Phone total PCC": {"fields": ["phone_pcc"], "y_axis_type": "linear"},
    "Word and utterance total PCC": {
        "fields": ["word_total_pcc", "utterance_total_pcc"],
        "y_axis_type": "linear",
    },
}

PLOT_SIZE = (900, 320)
