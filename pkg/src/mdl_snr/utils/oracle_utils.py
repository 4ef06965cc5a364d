import numpy as np

from mdl_snr.classes.exceptions import (
    DimensionError,
    EqualizationError)

from mdl_snr.classes.records import SnrRecord

from mdl_snr.utils.transceiver_utils import (
    MAX_CONDITION_NUMBER,
    raised_cosine)


def cut_band_grid(cfg, channel_index, num_bins):
    """
    Bin centers (Hz offset from the carrier) spanning the RRC band of
    one channel, and the matched-filter weights |P(f)|^2 on them.
    """
    if num_bins < 1:
        raise DimensionError(f"num_bins must be >= 1; got {num_bins}")
    half_band = 0.5*cfg.channel_bandwidth_hz
    df = 2.0*half_band/num_bins
    rel = -half_band + df*(np.arange(num_bins)+0.5)
    weights = raised_cosine(rel, cfg.symbol_rate_baud, cfg.rolloff)
    return cfg.channel_offset_hz(channel_index) + rel, weights


def equalized_noise_covariance(channel_record, omega, rows):
    """
    sum_k S_k T_k T_k^H restricted to `rows`, where T_k is the inverse
    of the channel up to ASE tap k. Shape (len(omega), len(rows)).
    """
    n = channel_record.num_modes
    prefix = np.broadcast_to(
                np.eye(n, dtype=complex), (len(omega), n, n)).copy()
    diag_cov = np.zeros((len(omega), len(rows)), dtype=float)

    taps = sorted(channel_record.ase_taps, key=lambda t: t[0])
    i_tap = 0
    for i_el in range(len(channel_record.elements)+1):
        while i_tap < len(taps) and taps[i_tap][0] == i_el:
            psd = taps[i_tap][1]
            if psd > 0.0:
                T = np.linalg.inv(prefix)[:, rows, :]
                diag_cov += psd*np.sum(np.abs(T)**2, axis=2)
            i_tap += 1
        if i_el < len(channel_record.elements):
            prefix = channel_record.elements[i_el].left_multiply(prefix, omega)

    cond = np.linalg.cond(prefix)
    bad = np.logical_or(np.logical_not(np.isfinite(cond)),
                        cond > MAX_CONDITION_NUMBER)
    if np.any(bad):
        idx = np.where(bad)[0][0]
        raise EqualizationError(
            frequency_hz=omega[idx]/(2.0*np.pi),
            condition_number=float(cond[idx]))
    return diag_cov


def linear_snr_oracle(channel_record,
                      cfg,
                      core_index=0,
                      channel_index=None,
                      num_bins=64,
                      realization_id=0,
                      sweep_value=np.nan):
    """
    ASE-only SNR of one core after zero-forcing, computed from the
    channel matrices without any time-domain simulation.

    Parameters
    ----------
    channel_record: ChannelRecord
    cfg: WdmConfig
    core_index: int
    channel_index: int
        defaults to the center channel
    num_bins: int
        frequency bins across the channel band

    Returns
    -------
    SnrRecord tagged 'ASE'

    Notes
    -----
    N_p = R_s * sum_f C_pp(f) w(f) / sum_f w(f), with C the equalized
    ASE covariance and w the raised-cosine matched-filter weight.
    The equalized signal is MDL-free, so P_p = P_ch/2.
    """
    if channel_index is None:
        channel_index = cfg.center_channel_index
    if not 0 <= core_index < channel_record.num_modes//2:
        raise DimensionError(
            f"core_index {core_index} out of range for "
            f"{channel_record.num_modes//2} cores")

    freq, weights = cut_band_grid(cfg, channel_index, num_bins)
    omega = 2.0*np.pi*freq
    rows = [2*core_index, 2*core_index+1]
    cov = equalized_noise_covariance(channel_record, omega, rows)
    noise = cfg.symbol_rate_baud*np.sum(
                cov*weights[:, None], axis=0)/np.sum(weights)
    signal = 0.5*cfg.power_per_channel_w

    return SnrRecord(
            P_x=signal,
            P_y=signal,
            N_x=float(noise[0]),
            N_y=float(noise[1]),
            realization_id=realization_id,
            tag='ASE',
            core_index=core_index,
            channel_index=channel_index,
            sweep_value=sweep_value)
