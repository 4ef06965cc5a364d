import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from mdl_snr.classes.link_configs import SpanDescriptor
from mdl_snr.utils.archive_utils import write_realization_archive
from mdl_snr.utils.mdl_utils import (
    compose,
    make_lumped_mdl_element,
    sample_mdl_spectrum,
    singular_gains)
from mdl_snr.utils.oracle_utils import linear_snr_oracle
from mdl_snr.utils.rng_utils import substream
from mdl_snr.utils.ssfm_utils import (
    configure_link_for_tag,
    draw_span_sections,
    link_channel_record,
    run_link)
from mdl_snr.utils.transceiver_utils import (
    carrier_phase_recover,
    demodulate_cut,
    estimate_snr,
    generate_wdm,
    zero_forcing_equalize)


logger = logging.getLogger(__name__)


@dataclass
class RealizationResult:
    realization_index: int
    records: List = field(default_factory=list)
    spectrum: Optional[np.ndarray] = None


def build_link(scenario, realization_index):
    """
    Draw the random channel of one realization: the waveplates of
    every span and the lumped MDL element at each span end.

    Each kind of draw has its own substream, so that changing one
    sweep variable leaves the other draws untouched.
    """
    link_cfg = scenario.link
    num_modes = link_cfg.num_modes
    mdl_rng = substream(scenario.master_seed, realization_index, 'mdl')
    wp_rng = substream(scenario.master_seed, realization_index, 'waveplates')
    sigma_g = link_cfg.mdl_element.effective_sigma_g

    link = []
    for _ in range(link_cfg.num_spans):
        sections = draw_span_sections(link_cfg.fiber, num_modes, wp_rng)
        mdl_element = None
        if link_cfg.mdl_element.enabled:
            mdl_element = make_lumped_mdl_element(sigma_g, num_modes, mdl_rng)
        link.append(SpanDescriptor(
                fiber=link_cfg.fiber,
                amplifier=link_cfg.amplifier,
                sections=sections,
                mdl_element=mdl_element))
    return link


def link_mdl_spectrum(link, num_modes, omega):
    """
    Sorted log-gains of the coupling sections of a link at one
    angular frequency (loss and amplifier gain left out)
    """
    sections = []
    for span in link:
        sections += span.sections
        if span.mdl_element is not None:
            sections.append(span.mdl_element)
    if len(sections) == 0:
        return np.zeros(num_modes)
    H = compose(sections, [omega], num_modes=num_modes).H[0]
    return singular_gains(H).g_sorted


def _fill_joint_snr(records):
    """
    Copy the ASE-only and NLI-only SNRs of a core onto its BOTH record
    """
    by_key = {(r.tag, r.core_index): r for r in records}
    for r in records:
        if r.tag != 'BOTH':
            continue
        ase = by_key.get(('ASE', r.core_index))
        nli = by_key.get(('NLI', r.core_index))
        if ase is not None:
            r.snr_ase_db = ase.snr_db
        if nli is not None:
            r.snr_nli_db = nli.snr_db


def simulate_realization(scenario, realization_index,
                         sweep_value=np.nan, archive_path=None):
    """
    Run one Monte-Carlo realization of a single-point scenario.

    Parameters
    ----------
    scenario: Scenario
        without a sweep (see Scenario.at_sweep_point)
    realization_index: int
    sweep_value: float
        stored on every SnrRecord
    archive_path: pathlib.Path
        if not None (and the method is ssfm), the fields, symbols and
        channel records are written there

    Returns
    -------
    RealizationResult
    """
    if scenario.sweep is not None:
        raise ValueError("simulate_realization takes a single sweep point")

    seed = scenario.master_seed
    result = RealizationResult(realization_index=realization_index)

    if scenario.kind == 'mdl_statistics':
        cfg = scenario.mdl_statistics
        spectrum = sample_mdl_spectrum(
                num_sections=cfg.num_sections,
                sigma_g=cfg.sigma_g,
                num_modes=cfg.num_modes,
                rng=substream(seed, realization_index, 'mdl'))
        result.spectrum = spectrum.g_sorted
        return result

    wdm = scenario.wdm
    num_modes = scenario.link.num_modes
    channel = scenario.resolved_cut_channel
    link = build_link(scenario, realization_index)
    omega_cut = 2.0*np.pi*wdm.channel_offset_hz(channel)
    result.spectrum = link_mdl_spectrum(link, num_modes, omega_cut)

    if scenario.method == 'oracle':
        record = link_channel_record(
                    configure_link_for_tag(link, 'ASE'),
                    num_modes=num_modes,
                    f0=wdm.center_frequency_hz)
        for core in scenario.cut_cores:
            result.records.append(linear_snr_oracle(
                    record, wdm,
                    core_index=core,
                    channel_index=channel,
                    num_bins=scenario.oracle_bins,
                    realization_id=realization_index,
                    sweep_value=sweep_value))
        return result

    tx, frame = generate_wdm(
            wdm, scenario.link.num_cores,
            substream(seed, realization_index, 'symbols'))

    rx_fields = dict()
    channel_records = dict()
    for tag in scenario.tags:
        # every tag sees the same ASE draws
        noise_rng = substream(seed, realization_index, 'noise')
        rx, record = run_link(
                tx, configure_link_for_tag(link, tag),
                scenario.step_controller, noise_rng)
        eq = zero_forcing_equalize(rx, record)
        for core in scenario.cut_cores:
            tx_sym = frame.tx_symbols(core, channel)
            rx_sym = carrier_phase_recover(
                    demodulate_cut(eq, wdm, core, channel), tx_sym)
            result.records.append(estimate_snr(
                    rx_sym, tx_sym,
                    realization_id=realization_index,
                    tag=tag,
                    core_index=core,
                    channel_index=channel,
                    sweep_value=sweep_value))
        if archive_path is not None:
            rx_fields[tag] = rx
            channel_records[tag] = record

    _fill_joint_snr(result.records)

    if archive_path is not None:
        write_realization_archive(
                archive_path, tx_field=tx, frame=frame,
                rx_fields=rx_fields, records=channel_records)

    return result
