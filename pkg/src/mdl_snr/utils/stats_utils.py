import inspect
import warnings

import numpy as np
import pandas as pd
from scipy import ndimage, signal, stats

from mdl_snr.classes.channel import SingularSpectrum
from mdl_snr.classes.exceptions import EstimationError
from mdl_snr.classes.records import Histogram
from mdl_snr.utils.mdl_utils import NEPER_TO_DB


MIN_PDF_SAMPLES = 30

# width of the single bin reported for degenerate (all-equal) samples
DEGENERATE_BIN_WIDTH = 1.0

# default resolution of the mixture peak count, in marginal stds
PEAK_BINS_PER_SPREAD = 8.0
PEAK_SMOOTHING_PER_SPREAD = 0.5

_BOOTSTRAP_PARAMS = inspect.signature(stats.bootstrap).parameters


def snr_values(records):
    return np.array([r.snr_db for r in records], dtype=float)


def delta_snr(records):
    """
    snr_db minus its ensemble mean, one value per record
    """
    if len(records) > 0 and not np.isscalar(records[0]):
        values = snr_values(records)
    else:
        values = np.asarray(records, dtype=float)
    if len(values) < 2:
        raise EstimationError(
            f"need at least 2 records for a deviation; got {len(values)}")
    return values - np.mean(values)


def freedman_diaconis_width(samples):
    samples = np.asarray(samples, dtype=float)
    width = 2.0*stats.iqr(samples)*len(samples)**(-1.0/3.0)
    if width <= 0.0:
        # Sturges on the full range
        width = np.ptp(samples)/(np.log2(len(samples))+1.0)
    return float(width)


def anchored_edges(lo, hi, width):
    """
    Edges at integer multiples of width covering [lo, hi]
    """
    first = np.floor(lo/width)
    last = np.ceil(hi/width)
    if last <= first:
        last = first + 1
    edges = width*np.arange(first, last+1)
    if edges[-1] < hi:
        edges = np.append(edges, edges[-1]+width)
    return edges


def _degenerate_histogram(value, n, bin_width):
    width = DEGENERATE_BIN_WIDTH if bin_width is None else bin_width
    warnings.warn(
        f"all {n} samples equal {value}; reporting a single bin")
    return Histogram(
            edges=np.array([value-0.5*width, value+0.5*width]),
            density=np.array([1.0/width]),
            counts=np.array([n]))


def estimate_pdf(samples, bin_width=None):
    """
    Density histogram of samples.

    Parameters
    ----------
    samples: array-like
        at least 30 finite values
    bin_width: float
        fixed bin width; edges fall on integer multiples of it.
        None selects the Freedman-Diaconis width.

    Returns
    -------
    Histogram whose density integrates to 1
    """
    samples = np.asarray(samples, dtype=float).ravel()
    if len(samples) < MIN_PDF_SAMPLES:
        raise EstimationError(
            f"need at least {MIN_PDF_SAMPLES} samples for a PDF; "
            f"got {len(samples)}")
    if not np.all(np.isfinite(samples)):
        raise EstimationError("samples contain non-finite values")
    if bin_width is not None and not bin_width > 0.0:
        raise EstimationError(f"bin_width must be > 0; got {bin_width}")

    if np.ptp(samples) == 0.0:
        return _degenerate_histogram(samples[0], len(samples), bin_width)

    if bin_width is None:
        bin_width = freedman_diaconis_width(samples)
    edges = anchored_edges(samples.min(), samples.max(), bin_width)
    counts, edges = np.histogram(samples, bins=edges)
    density = counts/(len(samples)*np.diff(edges))
    return Histogram(edges=edges, density=density, counts=counts)


def moments(values):
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        raise EstimationError("cannot take moments of an empty array")
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    skewness = np.nan
    if len(values) > 2 and np.ptp(values) > 0.0:
        skewness = float(stats.skew(values))
    return {'mean_db': float(np.mean(values)),
            'std_db': std,
            'skewness': skewness,
            'samples_count': len(values)}


def _as_gain_array(spectra):
    if isinstance(spectra, np.ndarray):
        g = np.asarray(spectra, dtype=float)
    else:
        g = np.array([s.g_sorted if isinstance(s, SingularSpectrum) else s
                      for s in spectra], dtype=float)
    if g.ndim != 2:
        raise EstimationError(
            f"spectra must stack to (n_realizations, 2N); got {g.shape}")
    return g


def order_statistics_pdfs(spectra, bin_width=None):
    """
    PDFs (in dB) of each sorted system gain and of a randomly picked one.

    Parameters
    ----------
    spectra: list of SingularSpectrum, or array (n_realizations, 2N)
    bin_width: float
        dB; None selects Freedman-Diaconis on the pooled samples

    Returns
    -------
    dict with 'marginals' (2N Histograms on shared edges) and
    'mixture' (their bin-wise mean)
    """
    g_db = NEPER_TO_DB*_as_gain_array(spectra)
    n, num_modes = g_db.shape
    if n < MIN_PDF_SAMPLES:
        raise EstimationError(
            f"need at least {MIN_PDF_SAMPLES} realizations; got {n}")

    pooled = g_db.ravel()
    if np.ptp(pooled) == 0.0:
        hist = _degenerate_histogram(pooled[0], n, bin_width)
        marginals = [hist]*num_modes
        mixture = Histogram(edges=hist.edges,
                            density=hist.density.copy(),
                            counts=np.array([n*num_modes]))
        return {'marginals': marginals, 'mixture': mixture}

    if bin_width is None:
        bin_width = freedman_diaconis_width(pooled)
    edges = anchored_edges(pooled.min(), pooled.max(), bin_width)
    widths = np.diff(edges)

    marginals = []
    for i in range(num_modes):
        counts, _ = np.histogram(g_db[:, i], bins=edges)
        marginals.append(Histogram(
            edges=edges, density=counts/(n*widths), counts=counts))

    mixture = Histogram(
        edges=edges,
        density=np.mean([m.density for m in marginals], axis=0),
        counts=np.sum([m.counts for m in marginals], axis=0))
    return {'marginals': marginals, 'mixture': mixture}


def count_mixture_peaks(spectra, bin_width=None, smoothing_db=None,
                        prominence_fraction=0.03):
    """
    Number of local maxima of the smoothed mixture PDF of system gains.
    The default bin and kernel scale with the median std of the
    marginals.

    Parameters
    ----------
    spectra: list of SingularSpectrum, or array (n_realizations, 2N)
    bin_width: float
        dB; None selects PEAK_BINS_PER_SPREAD bins per marginal std
    smoothing_db: float
        std of the Gaussian smoothing kernel in dB; None selects
        PEAK_SMOOTHING_PER_SPREAD marginal stds
    prominence_fraction: float
        minimum peak prominence relative to the highest density
    """
    g = _as_gain_array(spectra)
    g_db = NEPER_TO_DB*g
    if len(g_db) < MIN_PDF_SAMPLES:
        raise EstimationError(
            f"need at least {MIN_PDF_SAMPLES} realizations; got {len(g_db)}")
    spread = float(np.median(np.std(g_db, axis=0, ddof=1)))
    if spread == 0.0:
        return 1
    if bin_width is None:
        bin_width = spread/PEAK_BINS_PER_SPREAD
    if smoothing_db is None:
        smoothing_db = PEAK_SMOOTHING_PER_SPREAD*spread

    mixture = order_statistics_pdfs(g, bin_width=bin_width)['mixture']
    if len(mixture.density) < 3:
        return 1
    smooth = ndimage.gaussian_filter1d(
                mixture.density, sigma=smoothing_db/bin_width, mode='constant')
    peaks, _ = signal.find_peaks(
                smooth, prominence=prominence_fraction*smooth.max())
    return len(peaks)


def mean_peak_to_peak_db(spectra):
    """
    Ensemble mean of the peak-to-peak MDL in dB
    """
    g = _as_gain_array(spectra)
    return float(np.mean(NEPER_TO_DB*(g[:, -1]-g[:, 0])))


def per_pol_frame(records, tag):
    df = pd.DataFrame(
        [{'realization_idx': r.realization_id,
          'core_idx': r.core_index,
          'snr_x_db': r.snr_x_db,
          'snr_y_db': r.snr_y_db} for r in records if r.tag == tag])
    return df


def polarization_correlation(records, tag, core_index=None):
    """
    Correlation coefficient between the x and y SNR deviations.

    Returns a float for a given core_index, otherwise a dict
    core_index -> coefficient.
    """
    df = per_pol_frame(records, tag)
    if len(df) == 0:
        raise EstimationError(f"no records tagged {tag}")
    result = dict()
    for core, sub in df.groupby('core_idx'):
        x = sub['snr_x_db'].values
        y = sub['snr_y_db'].values
        if len(x) < 2 or np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
            result[int(core)] = np.nan
            continue
        result[int(core)] = float(np.corrcoef(x-x.mean(), y-y.mean())[0, 1])
    if core_index is not None:
        if core_index not in result:
            raise EstimationError(f"no records for core {core_index}")
        return result[core_index]
    return result


def best_worst_deviations(records, tag):
    """
    Per realization, the largest and smallest per-polarization SNR
    deviation (dB) over every recorded core. Deviations are taken
    from the mean per-polarization SNR of the ensemble.

    Returns
    -------
    pd.DataFrame with columns realization_idx, best_db, worst_db
    """
    df = per_pol_frame(records, tag)
    if len(df) == 0:
        raise EstimationError(f"no records tagged {tag}")
    mean = np.mean(np.concatenate([df['snr_x_db'].values,
                                   df['snr_y_db'].values]))
    df['dev_x_db'] = df['snr_x_db'] - mean
    df['dev_y_db'] = df['snr_y_db'] - mean
    grouped = df.groupby('realization_idx')
    best = np.maximum(grouped['dev_x_db'].max(), grouped['dev_y_db'].max())
    worst = np.minimum(grouped['dev_x_db'].min(), grouped['dev_y_db'].min())
    return pd.DataFrame({'realization_idx': best.index.values,
                         'best_db': best.values,
                         'worst_db': worst.values})


def bootstrap_ci(values, rng, statistic=np.mean,
                 n_resamples=1000, confidence_level=0.95):
    """
    Percentile bootstrap confidence interval of statistic(values).
    Fewer than two values, or all-equal values, give a degenerate
    interval.
    """
    values = np.asarray(values, dtype=float)
    if len(values) == 0:
        raise EstimationError("cannot bootstrap an empty array")
    if len(values) < 2 or np.ptp(values) == 0.0:
        point = float(statistic(values))
        return point, point
    # newer scipy renamed random_state to rng
    rng_kwarg = 'rng' if 'rng' in _BOOTSTRAP_PARAMS else 'random_state'
    res = stats.bootstrap(
            (values,),
            statistic,
            n_resamples=n_resamples,
            confidence_level=confidence_level,
            method='percentile',
            vectorized=False,
            **{rng_kwarg: rng})
    return (float(res.confidence_interval.low),
            float(res.confidence_interval.high))
