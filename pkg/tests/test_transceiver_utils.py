import numpy as np
import pytest

from mdl_snr.classes.channel import TransferMatrix
from mdl_snr.classes.exceptions import (
    ConfigurationError,
    DimensionError,
    EqualizationError,
    EstimationError)
from mdl_snr.classes.field import MultimodeField
from mdl_snr.classes.link_configs import WdmConfig
from mdl_snr.classes.records import SNR_CEILING_DB
from mdl_snr.utils.mdl_utils import sample_haar_unitary
from mdl_snr.utils.transceiver_utils import (
    carrier_phase_recover,
    combine_snr_db,
    demodulate_cut,
    estimate_carrier_phase,
    estimate_snr,
    generate_wdm,
    raised_cosine,
    rrc_transfer,
    zero_forcing_equalize)


@pytest.fixture
def wdm_cfg():
    return WdmConfig(num_channels=3,
                     symbol_rate_baud=64.0e9,
                     spacing_hz=75.0e9,
                     symbols_per_block=1024,
                     power_per_channel_dbm=0.0,
                     rolloff=0.1)


def test_samples_per_symbol(wdm_cfg):
    # 2 x (2*75 + 70.4) GHz needs 8 samples per 64 GBd symbol
    assert wdm_cfg.resolved_samples_per_symbol == 8
    assert wdm_cfg.n_t == 8192
    assert WdmConfig(num_channels=1).resolved_samples_per_symbol == 4
    assert WdmConfig(num_channels=21).resolved_samples_per_symbol == 64


def test_raised_cosine_folds_to_one():
    rate = 64.0e9
    f = np.linspace(-0.5*rate, 0.5*rate, 101)
    folded = sum(raised_cosine(f + k*rate, rate, 0.1) for k in range(-2, 3))
    np.testing.assert_allclose(folded, 1.0, atol=1.0e-12)
    np.testing.assert_allclose(rrc_transfer(0.0, rate, 0.1), 1.0)
    np.testing.assert_allclose(rrc_transfer(0.6*rate, rate, 0.1), 0.0)


def test_back_to_back_is_isi_free(wdm_cfg, rng):
    field, frame = generate_wdm(wdm_cfg, num_cores=2, rng=rng)
    assert field.num_modes == 4
    assert frame.symbols.shape == (4, 3, 1024)
    for core in range(2):
        for channel in range(3):
            rx = demodulate_cut(field, wdm_cfg, core, channel)
            tx = frame.tx_symbols(core, channel)
            np.testing.assert_allclose(
                rx, tx, atol=1.0e-6*frame.amplitude)


def test_launch_power(rng):
    cfg = WdmConfig(num_channels=1,
                    symbols_per_block=65536,
                    power_per_channel_dbm=3.0)
    field, frame = generate_wdm(cfg, num_cores=1, rng=rng)
    np.testing.assert_allclose(
        np.mean(field.power()), 0.5*cfg.power_per_channel_w, rtol=0.01)
    np.testing.assert_allclose(
        frame.amplitude**2, 0.5*cfg.power_per_channel_w, rtol=1.0e-12)


def test_bandwidth_overflow(rng):
    cfg = WdmConfig(num_channels=5, samples_per_symbol=2)
    with pytest.raises(ConfigurationError):
        generate_wdm(cfg, num_cores=1, rng=rng)


def test_demodulate_checks(wdm_cfg, rng):
    field, _ = generate_wdm(wdm_cfg, num_cores=1, rng=rng)
    with pytest.raises(DimensionError):
        demodulate_cut(field, wdm_cfg, 1, 0)
    with pytest.raises(DimensionError):
        demodulate_cut(field, wdm_cfg, 0, 3)


def test_zero_forcing_transfer_matrix(wdm_cfg, rng):
    field, frame = generate_wdm(wdm_cfg, num_cores=1, rng=rng)
    omega = field.omega()
    mix = sample_haar_unitary(2, rng) @ np.diag([1.2, 0.7])
    H = np.broadcast_to(mix, (len(omega), 2, 2))
    channel = TransferMatrix(omega_grid=omega, H=H)
    rx = field.with_spectrum(
        np.einsum('ij,jk->ik', mix, field.spectrum()))
    eq = zero_forcing_equalize(rx, channel)
    np.testing.assert_allclose(
        demodulate_cut(eq, wdm_cfg, 0, 1), frame.tx_symbols(0, 1),
        atol=1.0e-6*frame.amplitude)


def test_zero_forcing_ill_conditioned(rng):
    n_t = 64
    field = MultimodeField(
        samples=rng.standard_normal((2, n_t)) + 0j, dt=1.0e-12, f0=193.414e12)
    omega = field.omega()
    H = np.broadcast_to(np.eye(2, dtype=complex), (n_t, 2, 2)).copy()
    H[5] = np.diag([1.0, 1.0e-10])
    with pytest.raises(EqualizationError) as context:
        zero_forcing_equalize(field, TransferMatrix(omega_grid=omega, H=H))
    np.testing.assert_allclose(
        context.value.frequency_hz, omega[5]/(2.0*np.pi))
    assert context.value.condition_number > 1.0e8


def test_zero_forcing_grid_mismatch(rng):
    field = MultimodeField(
        samples=rng.standard_normal((2, 64)) + 0j, dt=1.0e-12, f0=193.414e12)
    channel = TransferMatrix(
        omega_grid=np.zeros(32),
        H=np.broadcast_to(np.eye(2, dtype=complex), (32, 2, 2)))
    with pytest.raises(DimensionError):
        zero_forcing_equalize(field, channel)


def test_carrier_phase_recovery(rng):
    tx = (rng.standard_normal((2, 4096))
          + 1j*rng.standard_normal((2, 4096)))/np.sqrt(2.0)
    theta = np.array([0.7, -2.1])
    noise = 0.01*(rng.standard_normal((2, 4096))
                  + 1j*rng.standard_normal((2, 4096)))
    rx = tx*np.exp(1j*theta)[:, None] + noise
    np.testing.assert_allclose(
        estimate_carrier_phase(rx, tx), theta, atol=1.0e-3)
    np.testing.assert_allclose(
        carrier_phase_recover(rx, tx), tx, atol=0.1)

    with pytest.raises(EstimationError):
        estimate_carrier_phase(np.zeros((2, 8)), np.ones((2, 8)))
    with pytest.raises(EstimationError):
        estimate_carrier_phase(np.zeros((2, 0)), np.zeros((2, 0)))


def test_estimate_snr(rng):
    n = 65536
    tx = (rng.standard_normal((2, n))
          + 1j*rng.standard_normal((2, n)))/np.sqrt(2.0)
    noise = np.sqrt(0.005)*(rng.standard_normal((2, n))
                            + 1j*rng.standard_normal((2, n)))
    rx = 0.9*tx + 0.9*noise
    record = estimate_snr(rx, tx, realization_id=4, tag='ASE', core_index=1)
    np.testing.assert_allclose(record.snr_db, 20.0, atol=0.1)
    np.testing.assert_allclose(record.snr_x_db, 20.0, atol=0.1)
    np.testing.assert_allclose(record.snr_y_db, 20.0, atol=0.1)
    np.testing.assert_allclose(record.P_x, 0.81, rtol=0.02)
    assert record.realization_id == 4
    assert record.core_index == 1
    # an ASE-only record is its own ASE SNR
    assert record.snr_ase_db == record.snr_db
    assert np.isnan(record.snr_nli_db)


def test_estimate_snr_noiseless(rng):
    tx = (rng.standard_normal((2, 128))
          + 1j*rng.standard_normal((2, 128)))
    record = estimate_snr(tx, tx)
    assert record.snr_db == SNR_CEILING_DB


def test_estimate_snr_errors():
    with pytest.raises(EstimationError):
        estimate_snr(np.zeros((2, 0)), np.zeros((2, 0)))
    with pytest.raises(DimensionError):
        estimate_snr(np.zeros((3, 8)), np.zeros((3, 8)))
    with pytest.raises(EstimationError):
        estimate_snr(np.ones((2, 8)), np.zeros((2, 8)))


def test_combine_snr_db():
    np.testing.assert_allclose(combine_snr_db(20.0, 20.0), 16.9897, atol=1.0e-4)
    np.testing.assert_allclose(combine_snr_db(15.0), 15.0)
    with pytest.raises(EstimationError):
        combine_snr_db()
