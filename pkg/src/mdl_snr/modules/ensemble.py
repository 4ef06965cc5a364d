import logging
import multiprocessing
import os
import pathlib
import time
import warnings

import numpy as np
import pandas as pd

from mdl_snr.classes.exceptions import EnsembleError
from mdl_snr.classes.records import (
    DummyLock,
    EnsembleSummary)
from mdl_snr.modules.realization import simulate_realization
from mdl_snr.utils.multiprocessing_utils import (
    _winnow_process_list,
    round_robin)
from mdl_snr.utils.rng_utils import substream
from mdl_snr.utils.stats_utils import (
    MIN_PDF_SAMPLES,
    bootstrap_ci,
    delta_snr,
    estimate_pdf,
    moments,
    order_statistics_pdfs,
    polarization_correlation,
    snr_values)


logger = logging.getLogger(__name__)

# an ensemble fails when more than this fraction of realizations fail
MAX_FAILURE_FRACTION = 0.01

BOOTSTRAP_RESAMPLES = 1000


def _realization_archive_path(archive_dir, point_index, realization_index):
    if archive_dir is None:
        return None
    return (pathlib.Path(archive_dir)
            / f"point_{point_index:03d}_realization_{realization_index:06d}.h5")


def _run_realizations_worker(
        scenario,
        realization_list,
        sweep_value,
        point_index,
        archive_dir,
        output_dict,
        lock):
    """
    Run every realization in realization_list, storing
    ('ok', RealizationResult) or ('failed', message) in output_dict
    keyed by realization index.
    """
    t0 = time.time()
    n_tot = len(realization_list)
    ct = 0
    result = dict()
    for r in realization_list:
        try:
            this = simulate_realization(
                    scenario, r,
                    sweep_value=sweep_value,
                    archive_path=_realization_archive_path(
                        archive_dir, point_index, r))
            result[r] = ('ok', this)
        except Exception as err:
            result[r] = ('failed', repr(err))

        ct += 1
        if ct % 10 == 0:
            pid = os.getpid()
            duration = time.time()-t0
            per = duration/ct
            pred = per*n_tot
            remain = pred-duration
            with lock:
                logger.info(f"{pid} -- {ct} in {duration:.2e} "
                            f"-- {remain:.2e} of {pred:.2e} remain")

    with lock:
        for k in result:
            output_dict[k] = result[k]


def _dispatch(scenario, sweep_value, point_index, worker_budget, archive_dir):
    indices = list(range(scenario.num_realizations))
    n_workers = max(1, min(worker_budget, len(indices)))

    if n_workers == 1:
        output = dict()
        _run_realizations_worker(
            scenario=scenario,
            realization_list=indices,
            sweep_value=sweep_value,
            point_index=point_index,
            archive_dir=archive_dir,
            output_dict=output,
            lock=DummyLock())
        return output

    # more chunks than workers so a slow chunk does not stall the rest
    sub_lists = round_robin(indices, 4*n_workers)

    mgr = multiprocessing.Manager()
    output = mgr.dict()
    lock = mgr.Lock()

    process_list = []
    for sub_list in sub_lists:
        p = multiprocessing.Process(
                target=_run_realizations_worker,
                kwargs={'scenario': scenario,
                        'realization_list': sub_list,
                        'sweep_value': sweep_value,
                        'point_index': point_index,
                        'archive_dir': archive_dir,
                        'output_dict': output,
                        'lock': lock})
        p.start()
        process_list.append(p)
        while len(process_list) >= n_workers:
            process_list = _winnow_process_list(process_list)
            time.sleep(0.05)

    for p in process_list:
        p.join()

    output = dict(output)
    missing = [r for r in indices if r not in output]
    for r in missing:
        output[r] = ('failed', 'worker process exited without a result')
    return output


def summarize(records, spectra, scenario, sweep_value=np.nan, failures=None):
    """
    Histograms, moments and correlations of one ensemble.

    Delta-SNR histograms are built per tag when at least 30 records
    carry that tag.
    """
    summary = EnsembleSummary(
            records=list(records),
            spectra=spectra,
            failures=dict(failures or dict()),
            sweep_value=sweep_value,
            num_realizations=scenario.num_realizations)
    summary.binning = {
        'method': ('fixed' if scenario.histogram_bin_width_db is not None
                   else 'freedman-diaconis'),
        'bin_width_db': scenario.histogram_bin_width_db,
        'anchor_db': 0.0}

    for tag in summary.tags:
        tagged = summary.records_for(tag)
        summary.moments[tag] = moments(snr_values(tagged))
        if len(tagged) >= 2:
            summary.correlations[tag] = polarization_correlation(tagged, tag)
        if len(tagged) >= MIN_PDF_SAMPLES:
            summary.histograms[tag] = estimate_pdf(
                    delta_snr(tagged),
                    bin_width=scenario.histogram_bin_width_db)

    if spectra is not None and len(spectra) >= MIN_PDF_SAMPLES:
        summary.order_statistics = order_statistics_pdfs(
                spectra, bin_width=scenario.histogram_bin_width_db)
    return summary


def run_ensemble(scenario, worker_budget=1, point_index=0,
                 sweep_value=None, archive_dir=None, collector=None):
    """
    Run all realizations of a single-point scenario.

    Parameters
    ----------
    scenario: Scenario
        without a sweep
    worker_budget: int
        maximum number of concurrent worker processes
    point_index: int
        sweep point index (names archive files and collector keys)
    sweep_value:
        value stored on the records; defaults to point_index
    archive_dir: pathlib.Path
        where per-realization archives go when scenario.archive_fields
    collector: SnrRecordCollector
        optional; receives the records keyed by (point_index, realization)

    Returns
    -------
    EnsembleSummary

    Raises
    ------
    EnsembleError
        if more than 1% of the realizations failed
    """
    if sweep_value is None:
        sweep_value = point_index
    if not scenario.archive_fields:
        archive_dir = None
    if archive_dir is not None:
        pathlib.Path(archive_dir).mkdir(parents=True, exist_ok=True)

    t0 = time.time()
    output = _dispatch(
            scenario, sweep_value, point_index, worker_budget, archive_dir)

    records = []
    spectra = []
    failures = dict()
    for r in range(scenario.num_realizations):
        status, payload = output.get(
                r, ('failed', 'worker exited without a result'))
        if status != 'ok':
            failures[r] = payload
            continue
        records += payload.records
        if collector is not None:
            collector.collect((point_index, r), payload.records)
        if payload.spectrum is not None:
            spectra.append(payload.spectrum)

    logger.info(f"ensemble of {scenario.num_realizations} realizations in "
                f"{time.time()-t0:.2e} seconds; {len(failures)} failed")

    if len(failures) > MAX_FAILURE_FRACTION*scenario.num_realizations:
        raise EnsembleError(failures, scenario.num_realizations)
    if len(failures) > 0:
        warnings.warn(f"{len(failures)} of {scenario.num_realizations} "
                      "realizations failed and were dropped")

    spectra = np.array(spectra) if len(spectra) > 0 else None
    return summarize(records, spectra, scenario,
                     sweep_value=sweep_value, failures=failures)


def run_sweep(scenario, worker_budget=1, archive_dir=None, collector=None):
    """
    One EnsembleSummary per sweep point (a single one without a sweep).
    Every point reuses the same realization keys.
    """
    summaries = []
    for ii in range(scenario.num_sweep_points):
        point = scenario.at_sweep_point(ii)
        value = scenario.sweep_value(ii)
        logger.info(f"sweep point {ii+1} of {scenario.num_sweep_points} "
                    f"({scenario.sweep_column} = {value})")
        summaries.append(run_ensemble(
                point,
                worker_budget=worker_budget,
                point_index=ii,
                sweep_value=value,
                archive_dir=archive_dir,
                collector=collector))
    return summaries


def sweep_summary(summaries, master_seed=0, sweep_column='sweep_value'):
    """
    Mean and std of snr_db per tag and sweep point, with percentile
    bootstrap 95% confidence intervals.

    Returns
    -------
    pd.DataFrame, one row per (sweep point, tag)
    """
    rows = []
    for ii, summary in enumerate(summaries):
        for tag in summary.tags:
            values = snr_values(summary.records_for(tag))
            rng = substream(master_seed, ii, 'bootstrap')
            mean_lo, mean_hi = bootstrap_ci(
                    values, rng, statistic=np.mean,
                    n_resamples=BOOTSTRAP_RESAMPLES)
            std_lo, std_hi = bootstrap_ci(
                    values, rng, statistic=_std,
                    n_resamples=BOOTSTRAP_RESAMPLES)
            stats = moments(values)
            rows.append({sweep_column: summary.sweep_value,
                         'tag': tag,
                         'mean_snr_db': stats['mean_db'],
                         'mean_ci_low_db': mean_lo,
                         'mean_ci_high_db': mean_hi,
                         'std_snr_db': stats['std_db'],
                         'std_ci_low_db': std_lo,
                         'std_ci_high_db': std_hi,
                         'skewness': stats['skewness'],
                         'samples_count': stats['samples_count']})
    return pd.DataFrame(rows)


def _std(values, axis=-1):
    if np.shape(values)[axis] < 2:
        return 0.0
    return np.std(values, ddof=1, axis=axis)
