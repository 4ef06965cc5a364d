"""
HDF5 archives of fields, symbol frames, channel records and
singular spectra.

Complex arrays are stored as complex128 datasets (row-major
binary64 real/imag pairs); headers live in attributes.
"""
import pathlib

import h5py
import numpy as np

from mdl_snr.classes.channel import (
    ChannelRecord,
    CouplingSection,
    DelayVector,
    GainVector,
    ScalarElement)

from mdl_snr.classes.field import MultimodeField
from mdl_snr.classes.records import SymbolFrame


FORMAT_VERSION = 1


def _check_output_path(path, clobber):
    path = pathlib.Path(path)
    if path.exists():
        if not clobber:
            raise RuntimeError(f"{path} exists already")
        path.unlink()
    return path


def write_field_group(group, field):
    group.create_dataset('samples', data=field.samples.astype(np.complex128))
    group.attrs['dt_s'] = field.dt
    group.attrs['f0_hz'] = field.f0
    group.attrs['num_modes'] = field.num_modes
    group.attrs['format_version'] = FORMAT_VERSION


def read_field_group(group):
    return MultimodeField(
            samples=group['samples'][()],
            dt=float(group.attrs['dt_s']),
            f0=float(group.attrs['f0_hz']))


def write_field_archive(path, field, clobber=False):
    path = _check_output_path(path, clobber)
    with h5py.File(path, 'w') as out_file:
        write_field_group(out_file, field)


def read_field_archive(path):
    with h5py.File(path, 'r') as in_file:
        return read_field_group(in_file)


def write_frame_group(group, frame):
    group.create_dataset('symbols', data=frame.symbols.astype(np.complex128))
    group.attrs['amplitude'] = frame.amplitude
    group.attrs['format_version'] = FORMAT_VERSION


def read_frame_group(group):
    return SymbolFrame(
            symbols=group['symbols'][()],
            amplitude=float(group.attrs['amplitude']))


def write_channel_record_group(group, record):
    group.attrs['num_modes'] = record.num_modes
    group.attrs['num_elements'] = len(record.elements)
    group.attrs['format_version'] = FORMAT_VERSION
    taps = np.array(record.ase_taps, dtype=float).reshape(-1, 2)
    group.create_dataset('ase_taps', data=taps)
    for ii, el in enumerate(record.elements):
        sub = group.create_group(f'element_{ii:06d}')
        if isinstance(el, CouplingSection):
            sub.attrs['kind'] = 'coupling'
            sub.attrs['mean_gain'] = el.mean_gain
            sub.create_dataset('V', data=el.V)
            sub.create_dataset('U', data=el.U)
            sub.create_dataset('gains', data=el.gains.g)
            sub.create_dataset('delays', data=el.delays.tau)
        else:
            sub.attrs['kind'] = 'scalar'
            sub.attrs['log_gain'] = el.log_gain
            sub.attrs['beta2_length'] = el.beta2_length
            sub.attrs['label'] = el.label


def read_channel_record_group(group):
    record = ChannelRecord(num_modes=int(group.attrs['num_modes']))
    for ii in range(int(group.attrs['num_elements'])):
        sub = group[f'element_{ii:06d}']
        if sub.attrs['kind'] == 'coupling':
            record.append(CouplingSection(
                V=sub['V'][()],
                U=sub['U'][()],
                gains=GainVector(g=sub['gains'][()]),
                delays=DelayVector(tau=sub['delays'][()]),
                mean_gain=float(sub.attrs['mean_gain'])))
        else:
            record.append(ScalarElement(
                log_gain=float(sub.attrs['log_gain']),
                beta2_length=float(sub.attrs['beta2_length']),
                label=str(sub.attrs['label'])))
    for position, psd in group['ase_taps'][()]:
        record.ase_taps.append((int(position), float(psd)))
    return record


def write_realization_archive(path, tx_field=None, frame=None,
                              rx_fields=None, records=None, clobber=False):
    """
    One realization: the launched field, its symbols and, per tag,
    the received field and channel record.
    """
    path = _check_output_path(path, clobber)
    with h5py.File(path, 'w') as out_file:
        out_file.attrs['format_version'] = FORMAT_VERSION
        if tx_field is not None:
            write_field_group(out_file.create_group('tx'), tx_field)
        if frame is not None:
            write_frame_group(out_file.create_group('frame'), frame)
        for tag, rx in (rx_fields or dict()).items():
            write_field_group(out_file.create_group(f'rx/{tag}'), rx)
        for tag, rec in (records or dict()).items():
            write_channel_record_group(
                    out_file.create_group(f'channel/{tag}'), rec)


def read_realization_archive(path):
    result = {'tx': None, 'frame': None, 'rx': dict(), 'channel': dict()}
    with h5py.File(path, 'r') as in_file:
        if 'tx' in in_file:
            result['tx'] = read_field_group(in_file['tx'])
        if 'frame' in in_file:
            result['frame'] = read_frame_group(in_file['frame'])
        if 'rx' in in_file:
            for tag in in_file['rx'].keys():
                result['rx'][tag] = read_field_group(in_file['rx'][tag])
        if 'channel' in in_file:
            for tag in in_file['channel'].keys():
                result['channel'][tag] = read_channel_record_group(
                        in_file['channel'][tag])
    return result


def write_spectra(path, spectra, sweep_values, metadata=None, clobber=False):
    """
    Parameters
    ----------
    spectra: list of np.ndarray
        one (n_realizations, 2N) array of sorted log-gains per sweep point
    sweep_values: list
    metadata: dict
        stored as attributes
    """
    path = _check_output_path(path, clobber)
    with h5py.File(path, 'w') as out_file:
        out_file.attrs['format_version'] = FORMAT_VERSION
        out_file.attrs['num_points'] = len(spectra)
        for k, v in (metadata or dict()).items():
            out_file.attrs[k] = v
        for ii, (g, value) in enumerate(zip(spectra, sweep_values)):
            ds = out_file.create_dataset(
                    f'point_{ii:03d}', data=np.asarray(g, dtype=float))
            ds.attrs['sweep_value'] = value


def read_spectra(path):
    with h5py.File(path, 'r') as in_file:
        n = int(in_file.attrs['num_points'])
        spectra = []
        values = []
        for ii in range(n):
            ds = in_file[f'point_{ii:03d}']
            spectra.append(ds[()])
            values.append(ds.attrs['sweep_value'])
    return spectra, values
