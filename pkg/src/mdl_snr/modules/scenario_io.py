import json
import logging
import pathlib

from mdl_snr.classes.exceptions import (
    ConfigurationError,
    ScenarioParseError,
    ScenarioValidationError)
from mdl_snr.classes.scenario import Scenario


logger = logging.getLogger(__name__)

PRESET_DIR = pathlib.Path(__file__).parent.parent / 'scenario_configs'

DESK_SUFFIX = '_desk'
DESK_NUM_SPANS = 2
DESK_NUM_CHANNELS = 3
DESK_SYMBOLS_PER_BLOCK = 8192
DESK_NUM_REALIZATIONS = 100


def list_presets():
    return sorted(p.stem for p in PRESET_DIR.glob('*.json'))


def _parse_json(text, path):
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise ScenarioParseError(
                path=str(path), line=err.lineno, column=err.colno, msg=err.msg)


def _is_manifest(data):
    return isinstance(data, dict) and 'scenario' in data and 'code_version' in data


def scenario_from_dict(data):
    """
    Build and validate a Scenario; every violated bound is reported
    in one ScenarioValidationError.
    """
    scenario = Scenario.from_dict(data)
    bad = scenario.violations()
    if len(bad) > 0:
        raise ScenarioValidationError(bad)
    return scenario


def desk_variant(scenario):
    """
    Desk-scale version of a scenario: at most 2 spans, 3 channels,
    8192 symbols per block and 100 realizations.
    """
    changes = {'name': scenario.name + DESK_SUFFIX,
               'num_realizations': min(scenario.num_realizations,
                                       DESK_NUM_REALIZATIONS)}
    if scenario.kind == 'link':
        changes['link'] = scenario.link.replace(
                num_spans=min(scenario.link.num_spans, DESK_NUM_SPANS))
        changes['wdm'] = scenario.wdm.replace(
                num_channels=min(scenario.wdm.num_channels, DESK_NUM_CHANNELS),
                symbols_per_block=min(scenario.wdm.symbols_per_block,
                                      DESK_SYMBOLS_PER_BLOCK))
        sweep = scenario.sweep
        if sweep is not None and sweep.variable == 'num_channels':
            values = []
            powers = []
            for ii, v in enumerate(sweep.values):
                v = min(v, DESK_NUM_CHANNELS)
                if v in values:
                    continue
                values.append(v)
                if sweep.powers_per_channel_dbm is not None:
                    powers.append(sweep.powers_per_channel_dbm[ii])
            changes['sweep'] = sweep.replace(
                    values=tuple(values),
                    powers_per_channel_dbm=(
                        tuple(powers)
                        if sweep.powers_per_channel_dbm is not None else None))
        if scenario.cut_channel is not None:
            changes['cut_channel'] = None
    return scenario.replace(**changes)


def _read_preset(name):
    path = PRESET_DIR / f"{name}.json"
    if not path.is_file():
        raise ConfigurationError(
            f"{name} is neither a file nor a preset; presets are "
            f"{list_presets()}")
    return path


def load_scenario(path_or_preset):
    """
    Read a scenario.

    Parameters
    ----------
    path_or_preset: str or pathlib.Path
        a scenario JSON file, a run manifest (its scenario snapshot is
        used), or a preset name; a preset name ending in '_desk'
        selects the desk-scale variant of that preset

    Returns
    -------
    Scenario

    Raises
    ------
    ScenarioParseError
        malformed JSON (carries line and column)
    ScenarioValidationError
        unknown keys or violated bounds
    """
    if isinstance(path_or_preset, Scenario):
        return path_or_preset

    path = pathlib.Path(path_or_preset)
    desk = False
    if not path.is_file():
        name = str(path_or_preset)
        if name.endswith(DESK_SUFFIX):
            desk = True
            name = name[:-len(DESK_SUFFIX)]
        path = _read_preset(name)

    with open(path, 'r') as in_file:
        data = _parse_json(in_file.read(), path)
    if _is_manifest(data):
        logger.info(f"using the scenario snapshot of manifest {path}")
        data = data['scenario']

    scenario = scenario_from_dict(data)
    if desk:
        scenario = desk_variant(scenario)
        bad = scenario.violations()
        if len(bad) > 0:
            raise ScenarioValidationError(bad)
    return scenario


def serialize_scenario(scenario, path=None, clobber=False):
    """
    JSON text of a scenario; load_scenario reads it back unchanged.
    Written to path when one is given.
    """
    text = json.dumps(scenario.to_dict(), indent=2)
    if path is not None:
        path = pathlib.Path(path)
        if path.exists() and not clobber:
            raise RuntimeError(f"{path} exists already")
        with open(path, 'w') as out_file:
            out_file.write(text)
    return text


def validate_scenario(path_or_preset):
    """
    List of problems with a scenario; empty when it is valid
    """
    try:
        load_scenario(path_or_preset)
    except ScenarioValidationError as err:
        return err.violations
    except ConfigurationError as err:
        return [str(err)]
    return []
