import argparse
import logging
import pathlib
import sys

from mdl_snr.classes.exceptions import ConfigurationError
from mdl_snr.modules.run_scenario import print_status, report, run
from mdl_snr.modules.scenario_io import (
    list_presets,
    load_scenario,
    validate_scenario)
from mdl_snr.modules.step_calibration import calibrate_step


logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIGURATION = 2
EXIT_RUNTIME = 3


def _run(args):
    output_dir = args.out
    if output_dir is None:
        output_dir = f"runs/{load_scenario(args.scenario).name}"
    manifest = run(
        scenario=args.scenario,
        output_dir=pathlib.Path(output_dir),
        workers=args.workers,
        clobber=args.clobber,
        seed=args.seed)
    print(f"wrote {manifest.output_dir} ({manifest.status})")


def _report(args):
    print(report(pathlib.Path(args.manifest)))


def _validate(args):
    problems = validate_scenario(args.scenario)
    if len(problems) > 0:
        for p in problems:
            print(p)
        raise ConfigurationError(f"{args.scenario} is not a valid scenario")
    print(f"{args.scenario} is valid")


def _calibrate_step(args):
    controller = calibrate_step(
        args.scenario,
        num_seeds=args.num_seeds,
        tolerance_db=args.tolerance_db,
        output_path=args.output_path)
    print(controller.to_dict())


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Monte-Carlo SNR statistics of coupled-core "
                    "multi-core fiber links with MDL and SMD. "
                    f"Presets: {', '.join(list_presets())}")
    parser.add_argument('--log_level', type=str, default='INFO')
    subparsers = parser.add_subparsers(dest='command', required=True)

    run_parser = subparsers.add_parser('run')
    run_parser.add_argument('scenario', type=str)
    run_parser.add_argument('--seed', type=int, default=None)
    run_parser.add_argument('--workers', type=int, default=1)
    run_parser.add_argument('--out', type=str, default=None)
    run_parser.add_argument('--clobber', default=False, action='store_true')
    run_parser.set_defaults(func=_run)

    report_parser = subparsers.add_parser('report')
    report_parser.add_argument('manifest', type=str)
    report_parser.set_defaults(func=_report)

    validate_parser = subparsers.add_parser('validate')
    validate_parser.add_argument('scenario', type=str)
    validate_parser.set_defaults(func=_validate)

    calibrate_parser = subparsers.add_parser('calibrate-step')
    calibrate_parser.add_argument('scenario', type=str)
    calibrate_parser.add_argument('--num_seeds', type=int, default=10)
    calibrate_parser.add_argument('--tolerance_db', type=float, default=0.05)
    calibrate_parser.add_argument('--output_path', type=str, default=None)
    calibrate_parser.set_defaults(func=_calibrate_step)

    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level.upper(), logging.INFO),
        format='%(asctime)s %(name)s %(levelname)s %(message)s')

    try:
        args.func(args)
    except ConfigurationError as err:
        print(err, file=sys.stderr)
        return EXIT_CONFIGURATION
    except RuntimeError as err:
        logger.error(f"{type(err).__name__}: {err}")
        return EXIT_RUNTIME
    print_status("done")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
