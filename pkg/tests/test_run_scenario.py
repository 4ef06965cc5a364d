import json

import numpy as np
import pandas as pd
import pytest

from mdl_snr.classes.exceptions import ConfigurationError
from mdl_snr.classes.scenario import RunManifest
from mdl_snr.modules.run_scenario import (
    report,
    run)
from mdl_snr.modules.scenario_io import scenario_from_dict
from mdl_snr.utils.archive_utils import read_spectra


def test_run_writes_outputs(oracle_scenario, tmp_path):
    out_dir = tmp_path / 'run'
    manifest = run(oracle_scenario, out_dir)
    assert manifest.status == 'complete'
    assert manifest.num_failures == 0
    assert manifest.master_seed == 11
    for key in ('records', 'moments', 'sweep_table', 'spectra'):
        assert manifest.path_to(key).is_file()
    assert len(manifest.files['histograms']) == 1

    on_disk = RunManifest.read(out_dir / 'manifest.json')
    assert on_disk.status == 'complete'
    assert scenario_from_dict(on_disk.scenario) == oracle_scenario
    assert on_disk.timing['duration_s'] >= 0.0

    df = pd.read_csv(out_dir / 'records.csv')
    assert len(df) == 80
    assert 'sweep_idx' in df.columns
    assert set(df['tag']) == {'ASE'}

    spectra, values = read_spectra(out_dir / 'spectra.h5')
    assert len(spectra) == 1
    assert spectra[0].shape == (40, 4)


def test_report(oracle_scenario, tmp_path):
    out_dir = tmp_path / 'run'
    run(oracle_scenario, out_dir)
    text = report(out_dir / 'manifest.json')
    assert 'status: complete' in text
    assert 'master_seed: 11' in text
    assert 'x/y correlation' in text
    assert (out_dir / 'report' / 'sweep_table.tsv').is_file()
    assert (out_dir / 'report' / 'pdf_delta_snr_ASE_point_000.tsv').is_file()
    assert (out_dir / 'report' / 'best_worst_ASE_point_000.tsv').is_file()

    table = pd.read_csv(out_dir / 'report' / 'sweep_long.tsv', sep='\t')
    records = pd.read_csv(out_dir / 'records.csv')
    np.testing.assert_allclose(table['mean_snr_db'].values[0],
                               records['snr_db'].mean())


def test_clobber(oracle_scenario, tmp_path):
    out_dir = tmp_path / 'run'
    run(oracle_scenario, out_dir)
    with pytest.raises(RuntimeError):
        run(oracle_scenario, out_dir)
    manifest = run(oracle_scenario, out_dir, clobber=True)
    assert manifest.status == 'complete'


def test_seed_override(oracle_scenario_dict, write_json, tmp_path):
    path = write_json(oracle_scenario_dict(num_realizations=10))
    manifest = run(path, tmp_path / 'run', seed=99)
    assert manifest.master_seed == 99
    assert manifest.scenario['master_seed'] == 99


def test_sweep_run(oracle_scenario_dict, tmp_path):
    sweep = {'variable': 'smd_coeff_ps_per_sqrt_km', 'values': [0.0, 2.0]}
    scenario = scenario_from_dict(
        oracle_scenario_dict(num_realizations=30, sweep=sweep))
    out_dir = tmp_path / 'run'
    run(scenario, out_dir, workers=2)
    df = pd.read_csv(out_dir / 'records.csv')
    assert sorted(set(df['sweep_value_ps_per_sqrt_km'])) == [0.0, 2.0]

    report(out_dir / 'manifest.json')
    wide = pd.read_csv(out_dir / 'report' / 'sweep_table.tsv', sep='\t')
    assert list(wide['tag']) == ['ASE']
    assert 'mean_snr_db@0.0' in wide.columns
    assert 'std_ci_high_db@2.0' in wide.columns


def test_mdl_statistics_run(mdl_statistics_dict, tmp_path):
    scenario = scenario_from_dict(mdl_statistics_dict)
    out_dir = tmp_path / 'run'
    manifest = run(scenario, out_dir)
    assert manifest.path_to('spectra').is_file()
    assert len(manifest.files['order_statistics']) == 5

    text = report(manifest)
    assert 'mean peak-to-peak MDL' in text
    mixture = pd.read_csv(
        out_dir / 'report' / 'order_statistics_mixture.tsv', sep='\t')
    integral = np.sum(mixture['density_per_db']
                      * (mixture['bin_right_db']-mixture['bin_left_db']))
    np.testing.assert_allclose(integral, 1.0, rtol=1.0e-9)


def test_bad_manifests(tmp_path):
    path = tmp_path / 'manifest.json'
    with open(path, 'w') as out_file:
        out_file.write(json.dumps({}))
    with pytest.raises(ConfigurationError):
        report(path)
    with pytest.raises(ConfigurationError):
        report(tmp_path / 'missing.json')


def test_report_single_core_best_worst(oracle_scenario_dict, tmp_path):
    scenario = scenario_from_dict(
        oracle_scenario_dict(num_cores=1, cut_cores=(0,)))
    out_dir = tmp_path / 'run'
    run(scenario, out_dir)
    text = report(out_dir / 'manifest.json')
    assert 'best/worst deviation means' in text
    bw = pd.read_csv(out_dir / 'report' / 'best_worst_ASE_point_000.tsv',
                     sep='\t')
    assert len(bw) == 40
    assert np.all(bw['best_db'] >= bw['worst_db'])
