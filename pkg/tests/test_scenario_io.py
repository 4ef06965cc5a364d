import json

import numpy as np
import pytest

from mdl_snr.classes.exceptions import (
    ConfigurationError,
    ScenarioParseError,
    ScenarioValidationError)
from mdl_snr.classes.link_configs import MdlElementConfig
from mdl_snr.classes.scenario import Scenario
from mdl_snr.modules.scenario_io import (
    list_presets,
    load_scenario,
    scenario_from_dict,
    serialize_scenario,
    validate_scenario)
from mdl_snr.utils.mdl_utils import sigma_g_from_nominal_pp_db


def test_presets_load():
    presets = list_presets()
    assert 'fig1_mcf' in presets
    assert 'fig3a_link' in presets
    assert len(presets) == 12
    for name in presets:
        scenario = load_scenario(name)
        assert scenario.name == name
        desk = load_scenario(name + '_desk')
        assert desk.name == name + '_desk'
        assert desk.num_realizations <= 100
        if desk.kind == 'link':
            assert desk.link.num_spans <= 2
            assert desk.wdm.num_channels <= 3
            assert desk.wdm.symbols_per_block <= 8192


def test_preset_values():
    fig1 = load_scenario('fig1_mcf')
    assert fig1.kind == 'mdl_statistics'
    assert fig1.mdl_statistics.num_modes == 8
    assert fig1.mdl_statistics.num_sections == 256
    np.testing.assert_allclose(fig1.mdl_statistics.sigma_g, 0.014)

    fig3a = load_scenario('fig3a_link')
    assert fig3a.method == 'ssfm'
    assert fig3a.tags == ('ASE', 'NLI', 'BOTH')
    assert fig3a.link.num_spans == 10
    assert fig3a.link.num_modes == 8
    assert fig3a.wdm.num_channels == 5
    assert fig3a.wdm.n_t == 65536*16
    assert fig3a.resolved_cut_channel == 2
    np.testing.assert_allclose(
        fig3a.link.mdl_element.effective_sigma_g, np.sqrt(0.015))


def test_mdl_element_sigma_g():
    assert (MdlElementConfig(pp_db=2.5).effective_sigma_g
            == sigma_g_from_nominal_pp_db(2.5))
    assert MdlElementConfig(pp_db=2.5, sigma_g=0.1).effective_sigma_g == 0.1
    assert not MdlElementConfig().enabled


def test_desk_channel_sweep():
    desk = load_scenario('fig9_smd0_desk')
    assert desk.sweep.values == (1, 3)
    assert desk.sweep.powers_per_channel_dbm == (5.5, 5.0)
    point = desk.at_sweep_point(1)
    assert point.wdm.num_channels == 3
    assert point.wdm.power_per_channel_dbm == 5.0
    assert point.sweep is None


def test_serialize_round_trip(tmp_path):
    scenario = load_scenario('fig9_smd8')
    path = tmp_path / 'copy.json'
    serialize_scenario(scenario, path=path)
    assert load_scenario(path) == scenario
    with pytest.raises(RuntimeError):
        serialize_scenario(scenario, path=path)
    serialize_scenario(scenario, path=path, clobber=True)

    text = serialize_scenario(load_scenario('fig1_smf'))
    assert scenario_from_dict(json.loads(text)) == load_scenario('fig1_smf')


def test_violations_are_aggregated(oracle_scenario_dict):
    data = oracle_scenario_dict()
    data['num_realizations'] = 0
    data['wdm']['num_channels'] = 4
    data['link']['fiber']['waveplate_length_km'] = 3.0
    with pytest.raises(ScenarioValidationError) as context:
        scenario_from_dict(data)
    violations = context.value.violations
    assert len(violations) == 3
    assert any('num_realizations' in v for v in violations)
    assert any('num_channels' in v for v in violations)
    assert any('waveplate_length_km' in v for v in violations)


def test_unknown_key(oracle_scenario_dict):
    data = oracle_scenario_dict()
    data['link']['fiber']['gamma'] = 1.0
    with pytest.raises(ScenarioValidationError) as context:
        scenario_from_dict(data)
    assert "unknown key 'gamma'" in context.value.violations[0]


def test_oracle_needs_ase_only(oracle_scenario_dict):
    data = oracle_scenario_dict()
    data['tags'] = ['ASE', 'NLI']
    with pytest.raises(ScenarioValidationError):
        scenario_from_dict(data)


def test_cut_core_out_of_range(oracle_scenario_dict):
    with pytest.raises(ScenarioValidationError):
        scenario_from_dict(oracle_scenario_dict(cut_cores=(0, 2)))


def test_parse_error(tmp_path):
    path = tmp_path / 'broken.json'
    with open(path, 'w') as out_file:
        out_file.write('{\n  "name": "broken",\n  "kind": ,\n}\n')
    with pytest.raises(ScenarioParseError) as context:
        load_scenario(path)
    assert context.value.line == 3
    assert isinstance(context.value, ConfigurationError)


def test_missing_preset():
    with pytest.raises(ConfigurationError):
        load_scenario('not_a_preset')


def test_validate_scenario(oracle_scenario_dict, write_json):
    assert validate_scenario('fig7') == []
    assert validate_scenario(write_json(oracle_scenario_dict())) == []

    data = oracle_scenario_dict()
    data['oracle_bins'] = 0
    problems = validate_scenario(write_json(data, name='bad.json'))
    assert len(problems) == 1
    assert 'oracle_bins' in problems[0]

    assert len(validate_scenario('not_a_preset')) == 1


def test_scenario_defaults():
    scenario = Scenario()
    assert scenario.violations() == []
    assert scenario.num_sweep_points == 1
    assert scenario.sweep_column == 'sweep_idx'
