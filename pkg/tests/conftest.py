import json

import numpy as np
import pytest

from mdl_snr.modules.scenario_io import scenario_from_dict


def _small_link_dict(num_spans=2,
                     num_cores=2,
                     gamma=0.0,
                     smd=0.0,
                     pp_db=1.0,
                     span_length_km=10.0,
                     waveplate_length_km=1.0):
    return {'num_spans': num_spans,
            'num_cores': num_cores,
            'fiber': {'attenuation_db_per_km': 0.2,
                      'dispersion_ps_per_nm_km': 17.0,
                      'gamma_eff_per_w_km': gamma,
                      'smd_coeff_ps_per_sqrt_km': smd,
                      'waveplate_length_km': waveplate_length_km,
                      'span_length_km': span_length_km},
            'amplifier': {'gain_db': 0.2*span_length_km,
                          'noise_figure_db': 6.0,
                          'ase_enabled': True},
            'mdl_element': {'pp_db': pp_db}}


@pytest.fixture
def small_link_dict():
    return _small_link_dict


@pytest.fixture
def oracle_scenario_dict():
    """
    Factory for a fast ASE-only scenario computed by the oracle
    """
    def factory(num_realizations=40, cut_cores=(0, 1), sweep=None, **kwargs):
        data = {'name': 'small_oracle',
                'kind': 'link',
                'method': 'oracle',
                'tags': ['ASE'],
                'num_realizations': num_realizations,
                'master_seed': 11,
                'link': _small_link_dict(**kwargs),
                'wdm': {'num_channels': 1,
                        'symbols_per_block': 1024,
                        'power_per_channel_dbm': -20.0},
                'cut_cores': list(cut_cores),
                'oracle_bins': 16}
        if sweep is not None:
            data['sweep'] = sweep
        return data
    return factory


@pytest.fixture
def oracle_scenario(oracle_scenario_dict):
    return scenario_from_dict(oracle_scenario_dict())


@pytest.fixture
def mdl_statistics_dict():
    return {'name': 'small_mdl_statistics',
            'kind': 'mdl_statistics',
            'num_realizations': 60,
            'master_seed': 5,
            'mdl_statistics': {'num_modes': 4,
                               'num_sections': 8,
                               'sigma_g': 0.05}}


@pytest.fixture
def write_json(tmp_path):
    def writer(data, name='scenario.json'):
        path = tmp_path / name
        with open(path, 'w') as out_file:
            out_file.write(json.dumps(data, indent=2))
        return path
    return writer


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
