from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from mdl_snr.classes.exceptions import DimensionError


GAIN_SUM_ATOL = 1.0e-12
DELAY_MEAN_ATOL = 1.0e-18
UNITARY_ATOL = 1.0e-12


@dataclass(frozen=True, eq=False)
class GainVector:
    """
    2N dimensionless log-power gains (nepers of power).
    The mode-averaged gain is stored separately, so the
    entries must sum to zero.
    """

    g: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float).copy()
        if g.ndim != 1 or len(g) < 2 or len(g) % 2 != 0:
            raise DimensionError(
                f"gain vector must have length 2N >= 2; got shape {g.shape}")
        if abs(g.sum()) > GAIN_SUM_ATOL:
            raise DimensionError(
                f"gain vector sums to {g.sum():.3e}, expected 0")
        g.setflags(write=False)
        object.__setattr__(self, 'g', g)

    def __len__(self):
        return len(self.g)


@dataclass(frozen=True, eq=False)
class DelayVector:
    """
    2N mode delays in seconds with the common delay factored out.
    """

    tau: np.ndarray

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=float).copy()
        if tau.ndim != 1 or len(tau) < 2 or len(tau) % 2 != 0:
            raise DimensionError(
                f"delay vector must have length 2N >= 2; got shape {tau.shape}")
        if abs(tau.mean()) > DELAY_MEAN_ATOL:
            raise DimensionError(
                f"delay vector has mean {tau.mean():.3e} s, expected 0")
        tau.setflags(write=False)
        object.__setattr__(self, 'tau', tau)

    @classmethod
    def zeros(cls, num_modes):
        return cls(tau=np.zeros(num_modes, dtype=float))

    def __len__(self):
        return len(self.tau)


def _check_unitary(mat, name):
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionError(f"{name} must be square; got {mat.shape}")
    err = np.linalg.norm(mat.conj().T @ mat - np.eye(mat.shape[0]))
    if err > UNITARY_ATOL:
        raise DimensionError(
            f"{name} is not unitary: ||{name}^H {name} - I||_F = {err:.3e}")
    return mat


@dataclass(frozen=True, eq=False)
class CouplingSection:
    """
    One waveplate / MDL element

        M(omega) = exp(mean_gain/2) V diag(exp(g_i/2 - j omega tau_i)) U^H

    V and U are the random coupling matrices at the two ends
    of the section.
    """

    V: np.ndarray
    U: np.ndarray
    gains: GainVector
    delays: DelayVector
    mean_gain: float = 0.0

    def __post_init__(self):
        V = _check_unitary(self.V, 'V')
        U = _check_unitary(self.U, 'U')
        n = len(self.gains)
        if V.shape != (n, n) or U.shape != (n, n) or len(self.delays) != n:
            raise DimensionError(
                f"inconsistent section dimensions: V {V.shape}, U {U.shape}, "
                f"{n} gains, {len(self.delays)} delays")
        object.__setattr__(self, 'V', V)
        object.__setattr__(self, 'U', U)
        object.__setattr__(self, 'mean_gain', float(self.mean_gain))

    @property
    def num_modes(self):
        return len(self.gains)

    def diagonal(self, omega):
        """
        exp(mean_gain/2 + g_i/2 - j omega tau_i), shape (len(omega), 2N)
        """
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        return np.exp(0.5*self.mean_gain
                      + 0.5*self.gains.g[None, :]
                      - 1j*omega[:, None]*self.delays.tau[None, :])

    def response(self, omega):
        scalar = np.ndim(omega) == 0
        diag = self.diagonal(omega)
        mat = self.V[None, :, :] @ (diag[:, :, None] * self.U.conj().T[None, :, :])
        if scalar:
            return mat[0]
        return mat

    def left_multiply(self, H, omega):
        """
        Return M(omega) @ H(omega) for a stack H of shape (n_omega, 2N, 2N)
        """
        diag = self.diagonal(omega)
        return self.V @ (diag[:, :, None] * (self.U.conj().T @ H))

    def apply(self, spectrum, omega):
        """
        Multiply each frequency bin of spectrum (2N, n_omega) by M(omega)
        """
        if spectrum.shape[0] != self.num_modes:
            raise DimensionError(
                f"section has {self.num_modes} modes; "
                f"spectrum has {spectrum.shape[0]}")
        diag = self.diagonal(omega).T
        return self.V @ (diag * (self.U.conj().T @ spectrum))

    def invert(self, spectrum, omega):
        if spectrum.shape[0] != self.num_modes:
            raise DimensionError(
                f"section has {self.num_modes} modes; "
                f"spectrum has {spectrum.shape[0]}")
        diag = 1.0/self.diagonal(omega).T
        return self.U @ (diag * (self.V.conj().T @ spectrum))

    def condition_number(self):
        return float(np.exp(0.5*(self.gains.g.max() - self.gains.g.min())))


@dataclass(frozen=True)
class ScalarElement:
    """
    Mode-independent linear element: a length of fiber (loss and
    chromatic dispersion) or a flat amplifier gain.

        response(omega) = exp(log_gain/2 + j beta2_length/2 omega^2)

    log_gain is in nepers of power, beta2_length in s^2.
    """

    log_gain: float = 0.0
    beta2_length: float = 0.0
    label: str = ''

    def factor(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.exp(0.5*self.log_gain + 0.5j*self.beta2_length*omega**2)

    def left_multiply(self, H, omega):
        return self.factor(np.atleast_1d(omega))[:, None, None] * H

    def apply(self, spectrum, omega):
        return spectrum * self.factor(omega)[None, :]

    def invert(self, spectrum, omega):
        return spectrum / self.factor(omega)[None, :]

    def condition_number(self):
        return 1.0


ChannelElement = Union[CouplingSection, ScalarElement]


@dataclass(eq=False)
class TransferMatrix:
    """
    Frequency-resolved channel matrix H(omega), shape (n_omega, 2N, 2N)
    """

    omega_grid: np.ndarray
    H: np.ndarray

    def __post_init__(self):
        self.omega_grid = np.atleast_1d(np.asarray(self.omega_grid, dtype=float))
        self.H = np.asarray(self.H, dtype=complex)
        if self.H.ndim != 3 or self.H.shape[1] != self.H.shape[2]:
            raise DimensionError(f"H must be (n_omega, 2N, 2N); got {self.H.shape}")
        if self.H.shape[0] != len(self.omega_grid):
            raise DimensionError(
                f"H has {self.H.shape[0]} bins but omega_grid has "
                f"{len(self.omega_grid)}")

    @property
    def num_modes(self):
        return self.H.shape[1]

    def at(self, omega):
        idx = np.argmin(np.abs(self.omega_grid - omega))
        return self.H[idx]


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    """
    System log-gains g_i (log of squared singular values), ascending
    """

    g_sorted: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g_sorted, dtype=float).copy()
        if g.ndim != 1:
            raise DimensionError(f"spectrum must be 1-D; got {g.shape}")
        if np.any(np.diff(g) < 0.0):
            raise DimensionError("singular spectrum is not sorted")
        g.setflags(write=False)
        object.__setattr__(self, 'g_sorted', g)

    @property
    def g_min(self):
        return float(self.g_sorted[0])

    @property
    def g_max(self):
        return float(self.g_sorted[-1])

    def __len__(self):
        return len(self.g_sorted)


@dataclass(eq=False)
class ChannelRecord:
    """
    Ordered list of every linear element a signal traversed, in
    transmission order, plus the positions where ASE was injected.

    ase_taps holds (num_elements_before_tap, one-sided PSD per mode in W/Hz);
    noise injected at a tap traverses only the elements that follow it.
    """

    num_modes: int
    elements: List[ChannelElement] = field(default_factory=list)
    ase_taps: List[Tuple[int, float]] = field(default_factory=list)

    def append(self, element):
        if isinstance(element, CouplingSection):
            if element.num_modes != self.num_modes:
                raise DimensionError(
                    f"record has {self.num_modes} modes; "
                    f"section has {element.num_modes}")
        self.elements.append(element)

    def extend(self, elements):
        for el in elements:
            self.append(el)

    def add_ase_tap(self, psd_w_per_hz):
        self.ase_taps.append((len(self.elements), float(psd_w_per_hz)))

    def coupling_sections(self):
        return [el for el in self.elements if isinstance(el, CouplingSection)]

    def transfer_matrix(self, omega_grid):
        from mdl_snr.utils.mdl_utils import compose
        return compose(self.elements, omega_grid, num_modes=self.num_modes)

    def apply(self, spectrum, omega):
        for el in self.elements:
            spectrum = el.apply(spectrum, omega)
        return spectrum

    def invert(self, spectrum, omega):
        for el in reversed(self.elements):
            spectrum = el.invert(spectrum, omega)
        return spectrum

    def condition_bound(self):
        """
        Upper bound on the condition number of the end-to-end matrix
        at every frequency (delays are pure phases, so each element's
        condition number is frequency independent).
        """
        log_bound = 0.0
        for el in self.elements:
            log_bound += np.log(el.condition_number())
        return float(np.exp(log_bound))
