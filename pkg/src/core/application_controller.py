"""Command-line controller: parses arguments, runs the workflow, maps failures to exit codes."""

import argparse
import os
import sys
from typing import Callable, Dict, List, Optional

from config.constants import APP_NAME, APP_TITLE, APP_VERSION
from config.run_config import RunConfig
from core.workflow_manager import WorkflowManager
from util.file_util import dumps_json
from util.log_util import configure_logging, get_logger, write_error_log
from util.validation import ToolkitError, ValidationError

logger = get_logger("core.controller")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


class ApplicationController:
    """Builds the parser and dispatches each subcommand to the WorkflowManager."""

    def __init__(self):
        self.parser = self.build_parser()
        self.handlers: Dict[str, Callable[[argparse.Namespace, WorkflowManager], int]] = {
            "gen-synth": self.on_gen_synth,
            "train": self.on_train,
            "eval": self.on_eval,
            "score": self.on_score,
            "sweep-alpha": self.on_sweep_alpha,
            "bench": self.on_bench,
            "plot-curves": self.on_plot_curves,
        }

    @staticmethod
    def build_parser() -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=APP_NAME, description=APP_TITLE)
        parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
        parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
        parser.add_argument("--log-file", help="Also write log records to this file")

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument("--config", help="Key-value config file (section.key = value)")
        common.add_argument(
            "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
            help="Config override, repeatable; wins over the config file",
        )

        sub = parser.add_subparsers(dest="command", required=True)

        p = sub.add_parser("gen-synth", parents=[common], help="Generate a synthetic corpus")
        p.add_argument("--out", required=True)
        p.add_argument("--n", type=int, default=100, help="Training utterances")
        p.add_argument("--n-test", type=int, default=20, help="Test utterances")
        p.add_argument("--phones", type=int, default=12, help="Phones per utterance")
        p.add_argument("--error-rate", type=float, default=0.15)
        p.add_argument("--noise", type=float, default=0.3)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--force", action="store_true")

        p = sub.add_parser("train", parents=[common], help="Train one model per seed")
        p.add_argument("--data", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--seeds", type=_int_list, help="Comma-separated seeds (default: train.seeds)")
        p.add_argument("--force", action="store_true")

        p = sub.add_parser("eval", parents=[common], help="Evaluate a checkpoint")
        p.add_argument("--model", required=True)
        p.add_argument("--data", required=True)
        p.add_argument("--out", required=True)
        p.add_argument("--split", default="test")
        p.add_argument("--dump-predictions", help="Write per-utterance predictions (JSONL)")

        p = sub.add_parser("score", parents=[common], help="Score one utterance")
        p.add_argument("--model", required=True)
        p.add_argument("--utt", required=True)

        p = sub.add_parser("sweep-alpha", parents=[common], help="MDD metrics across deXent alphas")
        p.add_argument("--data", required=True)
        p.add_argument("--alphas", type=_float_list, default=[0.0, 0.3, 0.5, 0.7, 0.9])
        p.add_argument("--seeds", type=_int_list)
        p.add_argument("--out", required=True)
        p.add_argument("--work-dir", help="Where the per-alpha runs go")
        p.add_argument("--force", action="store_true")

        p = sub.add_parser("bench", parents=[common], help="Compare Mamba and Transformer blocks")
        p.add_argument("--seq-len", type=int, default=50)
        p.add_argument("--repeats", type=int, default=5)
        p.add_argument("--out", help="Write the JSON here as well as to stdout")

        p = sub.add_parser("plot-curves", parents=[common], help="Training-curve page from history files")
        p.add_argument("histories", nargs="+")
        p.add_argument("--labels", help="Comma-separated run labels")
        p.add_argument("--out", required=True)
        return parser

    def start_application(self, argv: Optional[List[str]] = None) -> int:
        """
        Run one command.

        Returns:
            int: 0 on success, 1 for invalid input, 2 for runtime or numeric failures
        """

        try:
            args = self.parser.parse_args(argv)
        except SystemExit as e:
            return EXIT_OK if e.code in (0, None) else EXIT_VALIDATION
        configure_logging(args.log_level, args.log_file)
        try:
            run_config = RunConfig.load(args.config, args.overrides)
            return self.handlers[args.command](args, WorkflowManager(run_config))
        except ValidationError as e:
            logger.error("%s", e)
            return EXIT_VALIDATION
        except (ToolkitError, ArithmeticError, FloatingPointError) as e:
            logger.error("%s failed: %s", args.command, e)
            self._write_error_log(args, e)
            return EXIT_RUNTIME
        except Exception as e:
            logger.exception("%s failed unexpectedly", args.command)
            self._write_error_log(args, e)
            return EXIT_RUNTIME

    @staticmethod
    def _write_error_log(args: argparse.Namespace, error: BaseException) -> None:
        out = getattr(args, "out", None)
        if not out:
            return
        directory = out if os.path.isdir(out) or not os.path.splitext(out)[1] else os.path.dirname(out)
        log_path = write_error_log(directory or ".", error)
        if log_path:
            logger.error("Error details written to: %s", log_path)

    def on_gen_synth(self, args, workflow: WorkflowManager) -> int:
        corpora = workflow.generate_data(
            args.out, args.n, args.n_test, args.error_rate, args.noise, args.seed, args.phones, args.force
        )
        print(f"Wrote {', '.join(f'{len(c)} {s}' for s, c in corpora.items())} utterances to {args.out}")
        return EXIT_OK

    def on_train(self, args, workflow: WorkflowManager) -> int:
        report = workflow.train(args.data, args.out, args.seeds, args.force)
        print(dumps_json(report.mdd, indent=2))
        return EXIT_OK

    def on_eval(self, args, workflow: WorkflowManager) -> int:
        report = workflow.evaluate(args.model, args.data, args.out, args.split, args.dump_predictions)
        print(dumps_json({"apa": report.apa, "mdd": report.mdd}, indent=2))
        return EXIT_OK

    def on_score(self, args, workflow: WorkflowManager) -> int:
        sys.stdout.write(workflow.score(args.model, args.utt))
        return EXIT_OK

    def on_sweep_alpha(self, args, workflow: WorkflowManager) -> int:
        rows = workflow.sweep_alpha(args.data, args.out, args.alphas, args.seeds, args.work_dir, args.force)
        print(dumps_json(rows, indent=2))
        return EXIT_OK

    def on_bench(self, args, workflow: WorkflowManager) -> int:
        print(dumps_json(workflow.bench(args.seq_len, args.out, args.repeats), indent=2))
        return EXIT_OK

    def on_plot_curves(self, args, workflow: WorkflowManager) -> int:
        labels = [s.strip() for s in args.labels.split(",")] if args.labels else None
        print(workflow.plot_curves(args.histories, args.out, labels))
        return EXIT_OK


def create_application() -> ApplicationController:
    return ApplicationController()


def run_application(argv: Optional[List[str]] = None) -> int:
    """Parse `argv` (default sys.argv[1:]) and run the command; returns the exit code."""
    return create_application().start_application(argv)
