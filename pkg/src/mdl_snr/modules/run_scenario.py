import logging
import pathlib
import shutil
import time

import numpy as np
import pandas as pd

import mdl_snr
from mdl_snr.classes.exceptions import (
    ConfigurationError,
    EnsembleError)
from mdl_snr.classes.records import (
    SnrRecordCollector,
    records_from_frame)
from mdl_snr.classes.scenario import RunManifest
from mdl_snr.modules.ensemble import (
    run_ensemble,
    summarize,
    sweep_summary)
from mdl_snr.modules.scenario_io import (
    load_scenario,
    scenario_from_dict)
from mdl_snr.utils.archive_utils import (
    read_spectra,
    write_spectra)
from mdl_snr.utils.stats_utils import (
    best_worst_deviations,
    count_mixture_peaks,
    mean_peak_to_peak_db)


logger = logging.getLogger(__name__)

RECORDS_FILE = 'records.csv'
MOMENTS_FILE = 'moments.csv'
SWEEP_TABLE_FILE = 'sweep_table.csv'
SPECTRA_FILE = 'spectra.h5'
MANIFEST_FILE = 'manifest.json'
HISTOGRAM_DIR = 'histograms'
ORDER_STATISTICS_DIR = 'order_statistics'
FIELD_DIR = 'fields'
REPORT_DIR = 'report'


def print_status(msg):
    logger.info(f"===={msg}====")


def _prepare_output_dir(output_dir, clobber):
    output_dir = pathlib.Path(output_dir)
    if output_dir.exists():
        if not output_dir.is_dir():
            raise RuntimeError(f"{output_dir} is not a directory")
        if any(output_dir.iterdir()):
            if not clobber:
                raise RuntimeError(
                    f"{output_dir} is not empty; run with clobber to "
                    "overwrite it")
            shutil.rmtree(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    return output_dir


def moments_frame(summaries, sweep_column):
    rows = []
    for summary in summaries:
        for tag in summary.tags:
            row = {sweep_column: summary.sweep_value, 'tag': tag}
            row.update(summary.moments[tag])
            for core, corr in summary.correlations.get(tag, dict()).items():
                row[f'pol_corr_core_{core}'] = corr
            rows.append(row)
    return pd.DataFrame(rows)


def _write_histograms(output_dir, summaries, files):
    hist_dir = output_dir / HISTOGRAM_DIR
    os_dir = output_dir / ORDER_STATISTICS_DIR
    for ii, summary in enumerate(summaries):
        for tag, hist in summary.histograms.items():
            hist_dir.mkdir(exist_ok=True)
            name = f"delta_snr_{tag}_point_{ii:03d}.csv"
            hist.to_frame().to_csv(hist_dir / name, index=False)
            files.setdefault('histograms', []).append(f"{HISTOGRAM_DIR}/{name}")
        if summary.order_statistics is not None:
            os_dir.mkdir(exist_ok=True)
            name = f"mixture_point_{ii:03d}.csv"
            summary.order_statistics['mixture'].to_frame().to_csv(
                os_dir / name, index=False)
            files.setdefault('order_statistics', []).append(
                f"{ORDER_STATISTICS_DIR}/{name}")
            for i_mode, hist in enumerate(summary.order_statistics['marginals']):
                name = f"marginal_{i_mode:02d}_point_{ii:03d}.csv"
                hist.to_frame().to_csv(os_dir / name, index=False)
                files['order_statistics'].append(
                    f"{ORDER_STATISTICS_DIR}/{name}")


def run(scenario, output_dir, workers=1, clobber=False, seed=None):
    """
    Run a scenario and write its outputs.

    Parameters
    ----------
    scenario: Scenario, or anything load_scenario accepts
    output_dir: pathlib.Path
        must be empty or absent unless clobber
    workers: int
    clobber: bool
    seed: int
        overrides scenario.master_seed

    Returns
    -------
    RunManifest

    Notes
    -----
    The manifest is written first with status 'partial' and rewritten
    as 'complete' once every sweep point has finished.
    """
    scenario = load_scenario(scenario)
    if seed is not None:
        scenario = scenario_from_dict(
                scenario.replace(master_seed=int(seed)).to_dict())

    output_dir = _prepare_output_dir(output_dir, clobber)
    manifest_path = output_dir / MANIFEST_FILE
    t0 = time.time()
    manifest = RunManifest(
            scenario=scenario.to_dict(),
            master_seed=scenario.master_seed,
            code_version=mdl_snr.__version__,
            timing={'started_unix_s': t0},
            output_dir=str(output_dir))
    manifest.write(manifest_path)

    print_status(f"running {scenario.name} "
                 f"({scenario.num_sweep_points} sweep points x "
                 f"{scenario.num_realizations} realizations)")

    sweep_column = scenario.sweep_column
    collector = SnrRecordCollector(
            output_path=output_dir / RECORDS_FILE, sweep_column=sweep_column)
    summaries = []
    error = None
    for ii in range(scenario.num_sweep_points):
        point = scenario.at_sweep_point(ii)
        value = scenario.sweep_value(ii)
        print_status(f"sweep point {ii+1} of {scenario.num_sweep_points}: "
                     f"{sweep_column} = {value}")
        try:
            summaries.append(run_ensemble(
                    point,
                    worker_budget=workers,
                    point_index=ii,
                    sweep_value=value,
                    archive_dir=output_dir / FIELD_DIR,
                    collector=collector))
        except EnsembleError as err:
            error = err
            manifest.num_failures += len(err.failures)
            break
        manifest.num_failures += len(summaries[-1].failures)

    files = dict()
    collector.write_to_file()
    files['records'] = RECORDS_FILE

    moments_frame(summaries, sweep_column).to_csv(
        output_dir / MOMENTS_FILE, index=False)
    files['moments'] = MOMENTS_FILE

    if len(summaries) > 0:
        sweep_summary(summaries,
                      master_seed=scenario.master_seed,
                      sweep_column=sweep_column).to_csv(
            output_dir / SWEEP_TABLE_FILE, index=False)
        files['sweep_table'] = SWEEP_TABLE_FILE

    spectra = [s.spectra for s in summaries if s.spectra is not None]
    if len(spectra) > 0:
        write_spectra(
            output_dir / SPECTRA_FILE,
            spectra=spectra,
            sweep_values=[s.sweep_value for s in summaries
                          if s.spectra is not None],
            metadata={'quantity': 'sorted log of squared singular values'})
        files['spectra'] = SPECTRA_FILE

    _write_histograms(output_dir, summaries, files)
    if scenario.archive_fields and scenario.kind == 'link':
        files['fields'] = FIELD_DIR

    t1 = time.time()
    manifest.files = files
    manifest.timing.update({'finished_unix_s': t1, 'duration_s': t1-t0})
    manifest.status = 'complete' if error is None else 'partial'
    manifest.write(manifest_path, clobber=True)

    print_status(f"wrote {output_dir} ({manifest.status})")
    if error is not None:
        raise error
    return manifest


def _read_records(manifest):
    path = manifest.path_to('records')
    if path is None or not path.is_file():
        raise ConfigurationError(
            f"manifest in {manifest.output_dir} lists no records file")
    df = pd.read_csv(path)
    return df


def _wide_sweep_table(sweep_table, sweep_column):
    """
    One row per tag; for every sweep value, columns of mean, std
    and their confidence bounds
    """
    stats = ['mean_snr_db', 'mean_ci_low_db', 'mean_ci_high_db',
             'std_snr_db', 'std_ci_low_db', 'std_ci_high_db']
    wide = sweep_table.pivot(index='tag', columns=sweep_column, values=stats)
    wide.columns = [f"{stat}@{value}" for stat, value in wide.columns]
    return wide.reset_index()


def report(manifest):
    """
    Summarize a finished (or partial) run.

    Writes tab-delimited tables under <run>/report/ and returns a
    human-readable summary.

    Parameters
    ----------
    manifest: RunManifest, or path to manifest.json

    Returns
    -------
    str
    """
    if not isinstance(manifest, RunManifest):
        manifest = RunManifest.read(manifest)
    scenario = scenario_from_dict(manifest.scenario)
    sweep_column = scenario.sweep_column
    out_dir = pathlib.Path(manifest.output_dir) / REPORT_DIR
    out_dir.mkdir(exist_ok=True)

    lines = [f"scenario: {scenario.name} ({scenario.kind}, "
             f"method {scenario.method})",
             f"master_seed: {manifest.master_seed}",
             f"code_version: {manifest.code_version}",
             f"status: {manifest.status}"]
    if manifest.status != 'complete':
        lines.append("WARNING: partial run; tables cover finished points only")
    if manifest.num_failures > 0:
        lines.append(f"failed realizations: {manifest.num_failures}")

    spectra_path = manifest.path_to('spectra')
    spectra = []
    spectra_values = []
    if spectra_path is not None and spectra_path.is_file():
        spectra, spectra_values = read_spectra(spectra_path)

    if scenario.kind == 'mdl_statistics':
        if len(spectra) == 0:
            raise ConfigurationError(
                f"manifest in {manifest.output_dir} has no spectra")
        g = spectra[0]
        summary = summarize([], g, scenario)
        if summary.order_statistics is None:
            raise ConfigurationError(
                f"too few realizations ({len(g)}) for order statistics")
        summary.order_statistics['mixture'].to_frame().to_csv(
            out_dir / 'order_statistics_mixture.tsv', sep='\t', index=False)
        for ii, hist in enumerate(summary.order_statistics['marginals']):
            hist.to_frame().to_csv(
                out_dir / f'order_statistics_marginal_{ii:02d}.tsv',
                sep='\t', index=False)
        lines.append(f"realizations: {len(g)}")
        lines.append(f"mean peak-to-peak MDL: {mean_peak_to_peak_db(g):.3f} dB")
        lines.append(f"mixture peaks: {count_mixture_peaks(g)}")
        lines.append(f"mean sum of log-gains: {np.mean(np.sum(g, axis=1)):.3e}")
        return "\n".join(lines)

    df = _read_records(manifest)
    if len(df) == 0:
        raise ConfigurationError(
            f"run in {manifest.output_dir} has no records")

    spectra_by_value = {float(v): g for v, g in zip(spectra_values, spectra)}
    summaries = []
    for ii, (value, sub) in enumerate(df.groupby(sweep_column, sort=True)):
        g = spectra_by_value.get(float(value))
        records = records_from_frame(sub, sweep_column=sweep_column)
        summary = summarize(records, g, scenario, sweep_value=value)
        summaries.append(summary)
        for tag, hist in summary.histograms.items():
            hist.to_frame().to_csv(
                out_dir / f'pdf_delta_snr_{tag}_point_{ii:03d}.tsv',
                sep='\t', index=False)
        for tag in summary.tags:
            m = summary.moments[tag]
            lines.append(
                f"{sweep_column}={value} {tag}: mean {m['mean_db']:.3f} dB, "
                f"std {m['std_db']:.3f} dB, skewness {m['skewness']:.3f}, "
                f"n={m['samples_count']}")
            corr = summary.correlations.get(tag, dict())
            if len(corr) > 0:
                text = ", ".join(f"core {c}: {v:.3f}" for c, v in corr.items())
                lines.append(f"    x/y correlation {text}")
            bw = best_worst_deviations(summary.records_for(tag), tag)
            bw.to_csv(out_dir / f'best_worst_{tag}_point_{ii:03d}.tsv',
                      sep='\t', index=False)
            lines.append(
                f"    best/worst deviation means "
                f"{bw['best_db'].mean():+.3f} / {bw['worst_db'].mean():+.3f} dB")

    table = sweep_summary(summaries,
                          master_seed=manifest.master_seed,
                          sweep_column=sweep_column)
    table.to_csv(out_dir / 'sweep_long.tsv', sep='\t', index=False)
    _wide_sweep_table(table, sweep_column).to_csv(
        out_dir / 'sweep_table.tsv', sep='\t', index=False)
    lines.append(f"tables written to {out_dir}")
    return "\n".join(lines)
