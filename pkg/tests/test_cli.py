import json

import pytest

from run_mdl_snr import (
    EXIT_CONFIGURATION,
    EXIT_OK,
    EXIT_RUNTIME,
    main)


@pytest.fixture
def scenario_path(oracle_scenario_dict, write_json):
    return write_json(oracle_scenario_dict(num_realizations=30))


def test_validate(scenario_path, write_json, oracle_scenario_dict, capsys):
    assert main(['validate', str(scenario_path)]) == EXIT_OK
    assert main(['validate', 'fig10_desk']) == EXIT_OK

    data = oracle_scenario_dict()
    data['num_realizations'] = -1
    bad_path = write_json(data, name='bad.json')
    assert main(['validate', str(bad_path)]) == EXIT_CONFIGURATION
    assert 'num_realizations' in capsys.readouterr().out


def test_run_and_report(scenario_path, tmp_path, capsys):
    out_dir = tmp_path / 'run'
    assert main(['run', str(scenario_path),
                 '--out', str(out_dir),
                 '--seed', '3']) == EXIT_OK
    with open(out_dir / 'manifest.json', 'rb') as in_file:
        manifest = json.load(in_file)
    assert manifest['status'] == 'complete'
    assert manifest['master_seed'] == 3

    capsys.readouterr()
    assert main(['report', str(out_dir / 'manifest.json')]) == EXIT_OK
    assert 'master_seed: 3' in capsys.readouterr().out

    # refuses to overwrite a finished run
    assert main(['run', str(scenario_path),
                 '--out', str(out_dir)]) == EXIT_RUNTIME
    assert main(['run', str(scenario_path),
                 '--out', str(out_dir), '--clobber']) == EXIT_OK


def test_configuration_errors(tmp_path):
    assert main(['run', 'not_a_preset',
                 '--out', str(tmp_path / 'run')]) == EXIT_CONFIGURATION
    assert main(['report', str(tmp_path / 'missing.json')]) == EXIT_CONFIGURATION
