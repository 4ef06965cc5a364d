from dataclasses import dataclass

import numpy as np

from mdl_snr.classes.exceptions import DimensionError


def is_power_of_two(n):
    n = int(n)
    return n > 0 and (n & (n-1)) == 0


@dataclass(eq=False)
class MultimodeField:
    """
    2N complex baseband envelopes on a shared time grid.

    Parameters
    ----------
    samples: np.ndarray
        complex array of shape (2N, n_t); n_t must be a power of two.
        Row 2c is the x polarization of core c, row 2c+1 the y polarization.
    dt: float
        sample spacing in seconds
    f0: float
        center frequency in Hz (used for the photon energy and for
        the wavelength at which dispersion is evaluated)
    """

    samples: np.ndarray
    dt: float
    f0: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 2:
            raise DimensionError(
                f"field samples must be (2N, n_t); got {samples.shape}")
        if samples.shape[0] < 2 or samples.shape[0] % 2 != 0:
            raise DimensionError(
                f"field must have 2N >= 2 modes; got {samples.shape[0]}")
        if not is_power_of_two(samples.shape[1]):
            raise DimensionError(
                f"n_t must be a power of two; got {samples.shape[1]}")
        if not self.dt > 0.0:
            raise DimensionError(f"dt must be > 0; got {self.dt}")
        self.samples = samples
        self.dt = float(self.dt)
        self.f0 = float(self.f0)

    @classmethod
    def from_spectrum(cls, spectrum, dt, f0):
        return cls(samples=np.fft.ifft(spectrum, axis=1), dt=dt, f0=f0)

    @property
    def num_modes(self):
        return self.samples.shape[0]

    @property
    def num_cores(self):
        return self.samples.shape[0] // 2

    @property
    def n_t(self):
        return self.samples.shape[1]

    @property
    def sample_rate(self):
        return 1.0/self.dt

    def omega(self):
        """
        Angular-frequency offsets (rad/s) in FFT order
        """
        return 2.0*np.pi*np.fft.fftfreq(self.n_t, d=self.dt)

    def frequency(self):
        return np.fft.fftfreq(self.n_t, d=self.dt)

    def spectrum(self):
        return np.fft.fft(self.samples, axis=1)

    def power(self):
        """
        Mean power per mode (W), shape (2N,)
        """
        return np.mean(np.abs(self.samples)**2, axis=1)

    def energy(self):
        """
        Total energy (J) summed over modes
        """
        return float(np.sum(np.abs(self.samples)**2)*self.dt)

    def with_samples(self, samples):
        return MultimodeField(samples=samples, dt=self.dt, f0=self.f0)

    def with_spectrum(self, spectrum):
        return MultimodeField.from_spectrum(spectrum, dt=self.dt, f0=self.f0)

    def copy(self):
        return self.with_samples(self.samples.copy())
