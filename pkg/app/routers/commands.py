import argparse
import logging
from importlib import resources

from app.config import EngineSettings
from app.errors import CalibrationFailed, ScenarioParseError, ScenarioValidationError
from app.services.scenario_runner import parse_scenario, render_json, render_text, run_scenario
from app.services.schubert import calibrate

logger = logging.getLogger(__name__)

DEMOS = {"quadric": "quadric.json"}


def settings_from(args: argparse.Namespace) -> EngineSettings:
    update = {"seed": args.seed, "max_workers": args.threads}
    if getattr(args, "check_substitutions", None) is not None:
        update["check_substitutions"] = args.check_substitutions
    return EngineSettings().model_copy(update=update)


def read_bundled(name: str) -> str:
    return resources.files("app.scenarios").joinpath(name).read_text(encoding="utf-8")


def _emit(text: str, output: str, settings: EngineSettings) -> int:
    scenario = parse_scenario(text)
    report = run_scenario(scenario, settings)
    print(render_json(report) if output == "json" else render_text(report))
    return 0


def run_command(args: argparse.Namespace) -> int:
    try:
        with open(args.file, encoding="utf-8") as handle:
            text = handle.read()
    except OSError as e:
        raise ScenarioParseError(f"cannot read {args.file}: {e.strerror}", file=args.file) from None
    return _emit(text, args.output, settings_from(args))


def demo_command(args: argparse.Namespace) -> int:
    return _emit(read_bundled(DEMOS[args.name]), args.output, settings_from(args))


def calibrate_command(args: argparse.Namespace) -> int:
    if args.n < 2 or args.n > 6:
        raise ScenarioValidationError(f"calibration rank must be between 2 and 6, got {args.n}")
    ranks = tuple(sorted({2, 3, args.n}))
    try:
        report = calibrate(ranks)
    except CalibrationFailed:
        logger.error("no unique convention on ranks %s", ranks)
        raise
    print(f"calibration ranks: {', '.join(str(n) for n in report.ranks)}")
    for result in report.results:
        status = "pass" if result.passed else f"fail ({result.failure})"
        print(f"  {result.convention}: {status}")
    print(f"selected: {report.chosen}")
    return 0
