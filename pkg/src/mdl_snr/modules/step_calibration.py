import json
import logging
import pathlib

import numpy as np

from mdl_snr.classes.exceptions import (
    ConfigurationError,
    NonConvergenceError)
from mdl_snr.modules.realization import simulate_realization
from mdl_snr.modules.scenario_io import load_scenario


logger = logging.getLogger(__name__)


def first_span_snrs(scenario, controller, num_seeds, tag):
    """
    Detected SNR (dB) of realizations 0..num_seeds-1 over the
    first span only
    """
    single = scenario.replace(
            link=scenario.link.replace(num_spans=1),
            step_controller=controller,
            tags=(tag,),
            cut_cores=(scenario.cut_cores[0],),
            archive_fields=False)
    snrs = []
    for r in range(num_seeds):
        result = simulate_realization(single, r)
        snrs.append(result.records[0].snr_db)
    return np.array(snrs)


def calibrate_step(scenario,
                   num_seeds=10,
                   tolerance_db=0.05,
                   max_halvings=8,
                   tag='BOTH',
                   output_path=None):
    """
    Halve the initial step and the local error target until the
    first-span SNR of num_seeds realizations changes by less than
    tolerance_db under a further halving.

    Parameters
    ----------
    scenario: Scenario, or anything load_scenario accepts
    num_seeds: int
    tolerance_db: float
    max_halvings: int
    tag: str
        which noise scenario to calibrate on
    output_path: pathlib.Path
        if not None, the calibrated controller is written there as JSON

    Returns
    -------
    StepController
        the coarsest controller that has saturated
    """
    scenario = load_scenario(scenario)
    if scenario.kind != 'link' or scenario.method != 'ssfm':
        raise ConfigurationError(
            "step calibration needs a link scenario simulated with ssfm")
    scenario = scenario.at_sweep_point(0)

    controller = scenario.step_controller
    current = first_span_snrs(scenario, controller, num_seeds, tag)
    calibrated = None
    for i_halving in range(max_halvings):
        finer = controller.halved()
        finer_snrs = first_span_snrs(scenario, finer, num_seeds, tag)
        change = float(np.max(np.abs(finer_snrs-current)))
        logger.info(f"initial step {controller.initial_step_km:.3e} km, "
                    f"target {controller.local_error_target:.3e}: "
                    f"max SNR change {change:.4f} dB under halving")
        if change < tolerance_db:
            calibrated = controller
            break
        controller = finer
        current = finer_snrs

    if calibrated is None:
        raise NonConvergenceError(
            f"SNR did not saturate within {tolerance_db} dB after "
            f"{max_halvings} halvings")

    if output_path is not None:
        output_path = pathlib.Path(output_path)
        if output_path.exists():
            raise RuntimeError(f"{output_path} exists already")
        with open(output_path, 'w') as out_file:
            out_file.write(json.dumps(
                {'step_controller': calibrated.to_dict()}, indent=2))
    return calibrated
