import pathlib
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from mdl_snr.classes.exceptions import (
    DimensionError,
    EstimationError)


# reported SNR when the measured noise power is exactly zero
SNR_CEILING_DB = 99.0


def snr_db_from_powers(signal_w, noise_w):
    if noise_w <= 0.0:
        return SNR_CEILING_DB
    if signal_w <= 0.0:
        return -np.inf
    return float(min(10.0*np.log10(signal_w/noise_w), SNR_CEILING_DB))


@dataclass(eq=False)
class SymbolFrame:
    """
    Transmitted symbols of every stream.

    symbols: complex array (2N, n_channels, n_symbols) of unit
    average power; the launched symbols are amplitude*symbols with
    amplitude = sqrt(P_ch/2) per polarization.
    """

    symbols: np.ndarray
    amplitude: float

    def __post_init__(self):
        self.symbols = np.asarray(self.symbols, dtype=complex)
        if self.symbols.ndim != 3:
            raise DimensionError(
                f"symbols must be (2N, n_channels, n_symbols); "
                f"got {self.symbols.shape}")

    @property
    def num_modes(self):
        return self.symbols.shape[0]

    @property
    def num_channels(self):
        return self.symbols.shape[1]

    @property
    def num_symbols(self):
        return self.symbols.shape[2]

    def tx_symbols(self, core_index, channel_index):
        """
        Launched (x, y) symbols of one core and channel, shape (2, n_symbols)
        """
        if not 0 <= core_index < self.num_modes//2:
            raise DimensionError(
                f"core_index {core_index} out of range for "
                f"{self.num_modes//2} cores")
        if not 0 <= channel_index < self.num_channels:
            raise DimensionError(
                f"channel_index {channel_index} out of range for "
                f"{self.num_channels} channels")
        return self.amplitude*self.symbols[2*core_index:2*core_index+2,
                                           channel_index, :]


@dataclass
class SnrRecord:
    """
    Signal and noise powers of the two polarizations of one core in
    one channel, with SNR = (P_x + P_y)/(N_x + N_y).
    """

    P_x: float
    P_y: float
    N_x: float
    N_y: float
    realization_id: int = 0
    tag: str = 'BOTH'
    core_index: int = 0
    channel_index: int = 0
    sweep_value: float = np.nan
    snr_ase_db: float = np.nan
    snr_nli_db: float = np.nan

    def __post_init__(self):
        for name in ('P_x', 'P_y', 'N_x', 'N_y'):
            value = float(getattr(self, name))
            if not value >= 0.0:
                raise EstimationError(f"{name} must be >= 0; got {value}")
            setattr(self, name, value)
        if self.tag == 'ASE' and np.isnan(self.snr_ase_db):
            self.snr_ase_db = self.snr_db
        elif self.tag == 'NLI' and np.isnan(self.snr_nli_db):
            self.snr_nli_db = self.snr_db

    @property
    def snr_db(self):
        return snr_db_from_powers(self.P_x+self.P_y, self.N_x+self.N_y)

    @property
    def snr_x_db(self):
        return snr_db_from_powers(self.P_x, self.N_x)

    @property
    def snr_y_db(self):
        return snr_db_from_powers(self.P_y, self.N_y)

    def to_row(self, sweep_column='sweep_value'):
        return {'realization_idx': int(self.realization_id),
                'tag': self.tag,
                'core_idx': int(self.core_index),
                'channel_idx': int(self.channel_index),
                sweep_column: self.sweep_value,
                'P_x_W': self.P_x,
                'P_y_W': self.P_y,
                'N_x_W': self.N_x,
                'N_y_W': self.N_y,
                'snr_db': self.snr_db,
                'snr_ase_db': self.snr_ase_db,
                'snr_nli_db': self.snr_nli_db,
                'snr_x_db': self.snr_x_db,
                'snr_y_db': self.snr_y_db}

    @classmethod
    def from_row(cls, row, sweep_column='sweep_value'):
        sweep_value = np.nan
        if sweep_column in row:
            sweep_value = float(row[sweep_column])
        return cls(P_x=float(row['P_x_W']),
                   P_y=float(row['P_y_W']),
                   N_x=float(row['N_x_W']),
                   N_y=float(row['N_y_W']),
                   realization_id=int(row['realization_idx']),
                   tag=str(row['tag']),
                   core_index=int(row['core_idx']),
                   channel_index=int(row['channel_idx']),
                   sweep_value=sweep_value,
                   snr_ase_db=float(row['snr_ase_db']),
                   snr_nli_db=float(row['snr_nli_db']))


def record_columns(sweep_column='sweep_value'):
    return ['realization_idx', 'tag', 'core_idx', 'channel_idx',
            sweep_column, 'P_x_W', 'P_y_W', 'N_x_W', 'N_y_W',
            'snr_db', 'snr_ase_db', 'snr_nli_db', 'snr_x_db', 'snr_y_db']


def records_to_frame(records, sweep_column='sweep_value'):
    rows = [r.to_row(sweep_column=sweep_column) for r in records]
    df = pd.DataFrame(rows, columns=record_columns(sweep_column))
    if len(df) > 0:
        df = df.sort_values(
                by=[sweep_column, 'tag', 'realization_idx', 'core_idx'],
                kind='stable').reset_index(drop=True)
    return df


def records_from_frame(df, sweep_column='sweep_value'):
    return [SnrRecord.from_row(row, sweep_column=sweep_column)
            for _, row in df.iterrows()]


@dataclass(eq=False)
class Histogram:
    """
    Density histogram; density integrates to one over the edges.
    """

    edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=float)
        self.density = np.asarray(self.density, dtype=float)
        self.counts = np.asarray(self.counts)
        if len(self.edges) != len(self.density)+1:
            raise DimensionError(
                f"{len(self.edges)} edges for {len(self.density)} bins")

    @property
    def centers(self):
        return 0.5*(self.edges[1:]+self.edges[:-1])

    @property
    def widths(self):
        return np.diff(self.edges)

    def integral(self):
        return float(np.sum(self.density*self.widths))

    def to_frame(self):
        return pd.DataFrame(
            {'bin_center_db': self.centers,
             'bin_left_db': self.edges[:-1],
             'bin_right_db': self.edges[1:],
             'density_per_db': self.density,
             'samples_count': self.counts})


@dataclass(eq=False)
class EnsembleSummary:
    """
    Statistics of one ensemble (one sweep point).

    histograms: tag -> Histogram of delta-SNR (dB)
    moments: tag -> {'mean_db', 'std_db', 'skewness', 'samples_count'}
    correlations: tag -> {core_index: corr(delta-SNR_x, delta-SNR_y)}
    order_statistics: {'mixture': Histogram, 'marginals': [Histogram, ...]}
    spectra: (n_realizations, 2N) sorted system log-gains, if collected
    failures: realization index -> error message
    binning: how the histograms were built
    """

    records: List = field(default_factory=list)
    histograms: Dict = field(default_factory=dict)
    moments: Dict = field(default_factory=dict)
    correlations: Dict = field(default_factory=dict)
    order_statistics: Optional[Dict] = None
    spectra: Optional[np.ndarray] = None
    failures: Dict = field(default_factory=dict)
    binning: Dict = field(default_factory=dict)
    sweep_value: float = np.nan
    num_realizations: int = 0

    @property
    def tags(self):
        return sorted(set(r.tag for r in self.records))

    def records_for(self, tag):
        return [r for r in self.records if r.tag == tag]


class DummyLock(object):

    def __enter__(self):
        pass

    def __exit__(
            self,
            exception_type,
            exception_value,
            exception_traceback):
        pass


class SnrRecordCollector(object):
    """
    Gathers the SnrRecords of an ensemble keyed by
    (sweep index, realization index), optionally behind a lock so
    several workers can share one collector.
    """

    def __init__(self, output_path=None, sweep_column='sweep_value'):
        self._records = dict()
        self._lock = None
        self.output_path = output_path
        self.sweep_column = sweep_column

    def set_lock(self, lock_obj):
        self._lock = lock_obj

    @property
    def records(self):
        result = []
        for k in sorted(self._records.keys()):
            result += self._records[k]
        return result

    def collect(self, key, records):
        if self._lock is None:
            this_lock = DummyLock()
        else:
            this_lock = self._lock

        with this_lock:
            if key in self._records:
                raise RuntimeError(
                    f"Trying to write {key} more than once")
            self._records[key] = list(records)

    def __len__(self):
        return len(self._records)

    def write_to_file(self):
        output_path = pathlib.Path(self.output_path)
        if output_path.exists():
            raise RuntimeError(f"{output_path} exists already")
        df = records_to_frame(self.records, sweep_column=self.sweep_column)
        df.to_csv(output_path, index=False)
