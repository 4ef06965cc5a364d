import logging

import numpy as np

from mdl_snr.classes.channel import (
    ChannelRecord,
    TransferMatrix)

from mdl_snr.classes.exceptions import (
    DimensionError,
    EqualizationError,
    EstimationError)

from mdl_snr.classes.field import MultimodeField
from mdl_snr.classes.records import SnrRecord, SymbolFrame


logger = logging.getLogger(__name__)

MAX_CONDITION_NUMBER = 1.0e8

# bins per chunk when the condition number is checked bin by bin
CONDITION_CHUNK = 4096


def raised_cosine(freq, symbol_rate, rolloff):
    """
    Raised-cosine spectrum with peak 1; its folded sum over
    multiples of symbol_rate is exactly 1.
    """
    f = np.abs(np.asarray(freq, dtype=float))
    f1 = 0.5*(1.0-rolloff)*symbol_rate
    f2 = 0.5*(1.0+rolloff)*symbol_rate
    out = np.zeros(f.shape, dtype=float)
    out[f <= f1] = 1.0
    if rolloff > 0.0:
        transition = np.logical_and(f > f1, f <= f2)
        out[transition] = 0.5*(1.0 + np.cos(
            np.pi/(rolloff*symbol_rate)*(f[transition]-f1)))
    return out


def rrc_transfer(freq, symbol_rate, rolloff):
    """
    Root-raised-cosine amplitude response (peak 1)
    """
    return np.sqrt(raised_cosine(freq, symbol_rate, rolloff))


def _pulse_spectrum(cfg):
    """
    Transmit filter on the simulation grid (FFT order), scaled so that
    zero-stuffed unit-power symbols come out at unit mean power.
    """
    sps = cfg.resolved_samples_per_symbol
    freq = np.fft.fftfreq(cfg.n_t, d=cfg.dt)
    return sps*rrc_transfer(freq, cfg.symbol_rate_baud, cfg.rolloff)


def generate_wdm(cfg, num_cores, rng):
    """
    Generate the WDM signal launched into every core.

    Parameters
    ----------
    cfg: WdmConfig
    num_cores: int
    rng: np.random.Generator

    Returns
    -------
    field: MultimodeField
        2*num_cores modes carrying cfg.num_channels RRC channels each
    frame: SymbolFrame
        the transmitted symbols, for data-aided reception

    Notes
    -----
    Pulse shaping is done in the frequency domain on the periodic
    block, so tx filter + matched filter is exactly ISI-free.
    Channels are placed by an integer shift of frequency bins.
    """
    cfg.check_bandwidth()
    num_modes = 2*num_cores
    n_ch = cfg.num_channels
    n_sym = cfg.symbols_per_block
    sps = cfg.resolved_samples_per_symbol

    symbols = (rng.standard_normal((num_modes, n_ch, n_sym))
               + 1j*rng.standard_normal((num_modes, n_ch, n_sym)))/np.sqrt(2.0)
    amplitude = np.sqrt(0.5*cfg.power_per_channel_w)

    pulse = _pulse_spectrum(cfg)
    spectrum = np.zeros((num_modes, cfg.n_t), dtype=complex)
    for i_ch in range(n_ch):
        base = np.tile(np.fft.fft(symbols[:, i_ch, :], axis=1), (1, sps))
        base = base*pulse[None, :]
        spectrum += np.roll(base, cfg.channel_offset_bins(i_ch), axis=1)

    field = MultimodeField.from_spectrum(
                amplitude*spectrum, dt=cfg.dt, f0=cfg.center_frequency_hz)
    frame = SymbolFrame(symbols=symbols, amplitude=amplitude)
    return field, frame


def demodulate_cut(field, cfg, core_index, channel_index):
    """
    Downconvert one channel of one core to baseband, apply the
    matched RRC filter and sample at the symbol instants.

    Returns
    -------
    np.ndarray of shape (2, symbols_per_block): x and y polarizations
    """
    if not 0 <= core_index < field.num_cores:
        raise DimensionError(
            f"core_index {core_index} out of range for {field.num_cores} cores")
    if not 0 <= channel_index < cfg.num_channels:
        raise DimensionError(
            f"channel_index {channel_index} out of range for "
            f"{cfg.num_channels} channels")
    if field.n_t != cfg.n_t:
        raise DimensionError(
            f"field has {field.n_t} samples; WDM grid needs {cfg.n_t}")

    sps = cfg.resolved_samples_per_symbol
    spectrum = field.spectrum()[2*core_index:2*core_index+2, :]
    spectrum = np.roll(spectrum, -cfg.channel_offset_bins(channel_index), axis=1)
    spectrum = spectrum*(np.conj(_pulse_spectrum(cfg))/sps)[None, :]
    samples = np.fft.ifft(spectrum, axis=1)
    return samples[:, ::sps]


def _check_condition(transfer, omega):
    for i0 in range(0, len(omega), CONDITION_CHUNK):
        if isinstance(transfer, ChannelRecord):
            H = transfer.transfer_matrix(omega[i0:i0+CONDITION_CHUNK]).H
        else:
            H = transfer.H[i0:i0+CONDITION_CHUNK]
        cond = np.linalg.cond(H)
        bad = np.logical_not(np.isfinite(cond))
        bad = np.logical_or(bad, cond > MAX_CONDITION_NUMBER)
        if np.any(bad):
            idx = np.where(bad)[0][0]
            raise EqualizationError(
                frequency_hz=omega[i0+idx]/(2.0*np.pi),
                condition_number=float(cond[idx]))


def zero_forcing_equalize(rx, channel):
    """
    Multiply every frequency bin of rx by the inverse channel matrix.

    Parameters
    ----------
    rx: MultimodeField
    channel: TransferMatrix or ChannelRecord
        a TransferMatrix must be sampled on rx.omega(); a ChannelRecord
        is inverted element by element in reverse order

    Returns
    -------
    MultimodeField
    """
    omega = rx.omega()
    spectrum = rx.spectrum()

    if isinstance(channel, ChannelRecord):
        if channel.num_modes != rx.num_modes:
            raise DimensionError(
                f"channel has {channel.num_modes} modes; "
                f"field has {rx.num_modes}")
        bound = channel.condition_bound()
        if bound > MAX_CONDITION_NUMBER:
            logger.info(f"condition bound {bound:.2e} exceeds "
                        f"{MAX_CONDITION_NUMBER:.0e}; checking every bin")
            _check_condition(channel, omega)
        return rx.with_spectrum(channel.invert(spectrum, omega))

    if not isinstance(channel, TransferMatrix):
        raise DimensionError(
            f"cannot equalize with {type(channel).__name__}")
    if channel.num_modes != rx.num_modes:
        raise DimensionError(
            f"channel has {channel.num_modes} modes; field has {rx.num_modes}")
    if (len(channel.omega_grid) != len(omega)
            or not np.allclose(channel.omega_grid, omega)):
        raise DimensionError(
            "transfer matrix is not sampled on the field's frequency grid")

    _check_condition(channel, omega)
    eq = np.linalg.solve(channel.H, spectrum.T[:, :, None])[:, :, 0]
    return rx.with_spectrum(eq.T)


def estimate_carrier_phase(rx_symbols, tx_symbols):
    """
    theta = arg(sum rx conj(tx)) per polarization
    """
    rx_symbols = np.atleast_2d(rx_symbols)
    tx_symbols = np.atleast_2d(tx_symbols)
    if rx_symbols.shape != tx_symbols.shape:
        raise DimensionError(
            f"rx shape {rx_symbols.shape} != tx shape {tx_symbols.shape}")
    if rx_symbols.shape[-1] == 0:
        raise EstimationError("cannot recover phase of empty symbol arrays")
    corr = np.sum(rx_symbols*np.conj(tx_symbols), axis=-1)
    if np.any(np.abs(corr) == 0.0):
        raise EstimationError(
            "rx and tx symbols are uncorrelated; carrier phase is undefined")
    return np.angle(corr)


def carrier_phase_recover(rx_symbols, tx_symbols):
    theta = estimate_carrier_phase(rx_symbols, tx_symbols)
    return np.atleast_2d(rx_symbols)*np.exp(-1j*theta)[:, None]


def estimate_snr(rx_symbols,
                 tx_symbols,
                 realization_id=0,
                 tag='BOTH',
                 core_index=0,
                 channel_index=0,
                 sweep_value=np.nan):
    """
    Data-aided SNR estimate of one core.

    Per polarization p:
        c_p = <rx conj(tx)>/<|tx|^2>
        P_p = |c_p|^2 <|tx|^2>
        N_p = <|rx - c_p tx|^2>

    Returns
    -------
    SnrRecord with SNR = (P_x+P_y)/(N_x+N_y)
    """
    rx_symbols = np.atleast_2d(rx_symbols)
    tx_symbols = np.atleast_2d(tx_symbols)
    if rx_symbols.shape != tx_symbols.shape or rx_symbols.shape[0] != 2:
        raise DimensionError(
            f"expected two polarizations of equal length; got rx "
            f"{rx_symbols.shape}, tx {tx_symbols.shape}")
    if rx_symbols.shape[1] == 0:
        raise EstimationError("cannot estimate SNR from empty symbol arrays")

    tx_power = np.mean(np.abs(tx_symbols)**2, axis=1)
    if np.any(tx_power == 0.0):
        raise EstimationError("transmitted symbols have zero power")
    c = np.mean(rx_symbols*np.conj(tx_symbols), axis=1)/tx_power
    signal = np.abs(c)**2*tx_power
    noise = np.mean(np.abs(rx_symbols - c[:, None]*tx_symbols)**2, axis=1)

    return SnrRecord(
            P_x=float(signal[0]),
            P_y=float(signal[1]),
            N_x=float(noise[0]),
            N_y=float(noise[1]),
            realization_id=realization_id,
            tag=tag,
            core_index=core_index,
            channel_index=channel_index,
            sweep_value=sweep_value)


def combine_snr_db(*snr_db):
    """
    SNR of independent additive noises: 1/SNR = sum_i 1/SNR_i
    """
    snr_db = np.asarray(snr_db, dtype=float)
    if snr_db.size == 0:
        raise EstimationError("need at least one SNR to combine")
    return float(-10.0*np.log10(np.sum(10.0**(-snr_db/10.0))))
