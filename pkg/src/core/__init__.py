"""
Training, evaluation and command modules.

This package contains the optimizer, the schedule,
the training loop and the command workflow.
- lr_at, Adam, adam_step
- Trainer, train
- evaluate, predict, format_score_card
- WorkflowManager, ApplicationController
"""

from .scheduler import lr_at
from .optimizer import Adam, OptimizerState, adam_step
from .evaluator import UtterancePrediction, build_report, evaluate, predict
from .score_card import format_score_card
from .trainer import Trainer, train
from .benchmark import benchmark
from .workflow_manager import WorkflowManager
from .application_controller import ApplicationController, run_application

__all__ = [
    "lr_at",
    "Adam",
    "OptimizerState",
    "adam_step",
    "UtterancePrediction",
    "build_report",
    "evaluate",
    "predict",
    "format_score_card",
    "Trainer",
    "train",
    "benchmark",
    "WorkflowManager",
    "ApplicationController",
    "run_application",
]
