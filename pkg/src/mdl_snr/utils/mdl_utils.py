import numpy as np
from scipy.linalg import qr

from mdl_snr.classes.channel import (
    CouplingSection,
    DelayVector,
    GainVector,
    ScalarElement,
    SingularSpectrum,
    TransferMatrix)

from mdl_snr.classes.exceptions import (
    ConfigurationError,
    DimensionError,
    EstimationError)


# 10*log10(e); converts a difference of natural-log power gains to dB
NEPER_TO_DB = 10.0*np.log10(np.e)

# a nominal 1 dB peak-to-peak element corresponds to sigma_g^2 = 0.015
SIGMA_G_PER_NOMINAL_DB = np.sqrt(0.015)


def sample_haar_unitary(dim, rng, size=None):
    """
    Draw Haar-distributed unitary matrices.

    Parameters
    ----------
    dim: int
        matrix dimension
    rng: np.random.Generator
    size: int
        if not None, return a stack of `size` independent matrices

    Returns
    -------
    np.ndarray of shape (dim, dim) or (size, dim, dim)

    Notes
    -----
    QR of a complex Ginibre matrix; the phases of diag(R) are moved
    into Q so the law does not depend on the QR convention.
    """
    if dim is None or int(dim) != dim or dim < 1:
        raise DimensionError(f"cannot sample a unitary of dimension {dim}")
    dim = int(dim)

    if size is None:
        z = (rng.standard_normal((dim, dim))
             + 1j*rng.standard_normal((dim, dim)))/np.sqrt(2.0)
        q, r = qr(z)
        d = np.diag(r)
        return q * (d/np.abs(d))[None, :]

    z = (rng.standard_normal((size, dim, dim))
         + 1j*rng.standard_normal((size, dim, dim)))/np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d/np.abs(d))[:, None, :]


def make_section(gains, delays, mean_gain, rng):
    """
    Build a CouplingSection with fresh, independent Haar coupling
    matrices at each end.
    """
    if not isinstance(gains, GainVector):
        gains = GainVector(g=gains)
    if not isinstance(delays, DelayVector):
        delays = DelayVector(tau=delays)
    if len(gains) != len(delays):
        raise DimensionError(
            f"{len(gains)} gains but {len(delays)} delays")
    n = len(gains)
    V = sample_haar_unitary(n, rng)
    U = sample_haar_unitary(n, rng)
    return CouplingSection(
            V=V, U=U, gains=gains, delays=delays, mean_gain=mean_gain)


def section_response(section, omega):
    """
    exp(mean_gain/2) V diag(exp(g_i/2 - j omega tau_i)) U^H,
    for a scalar omega or an array of them.
    """
    return section.response(omega)


def compose(sections, omega_grid, num_modes=None):
    """
    Concatenate elements in transmission order (the first element
    of `sections` is traversed first):

        H(omega) = M_K(omega) ... M_2(omega) M_1(omega)

    ScalarElements may be mixed in; num_modes is needed only when
    no CouplingSection fixes the dimension.
    """
    omega_grid = np.atleast_1d(np.asarray(omega_grid, dtype=float))
    if len(omega_grid) == 0:
        raise DimensionError("omega_grid is empty")

    dims = set(s.num_modes for s in sections
               if isinstance(s, CouplingSection))
    if num_modes is not None:
        dims.add(int(num_modes))
    if len(dims) != 1:
        raise DimensionError(
            f"cannot compose sections with dimensions {sorted(dims)}")
    n = dims.pop()

    H = np.broadcast_to(
            np.eye(n, dtype=complex),
            (len(omega_grid), n, n)).copy()
    for s in sections:
        H = s.left_multiply(H, omega_grid)
    return TransferMatrix(omega_grid=omega_grid, H=H)


def singular_gains(M):
    """
    Logarithm of the squared singular values of M, ascending.

    A stack of shape (n, 2N, 2N) returns an (n, 2N) array
    rather than a SingularSpectrum.
    """
    M = np.asarray(M)
    if not np.all(np.isfinite(M)):
        raise EstimationError("matrix has non-finite entries")
    s = np.linalg.svd(M, compute_uv=False)
    g = np.sort(2.0*np.log(s), axis=-1)
    if g.ndim == 1:
        return SingularSpectrum(g_sorted=g)
    return g


def peak_to_peak_db(spectrum):
    if isinstance(spectrum, SingularSpectrum):
        return NEPER_TO_DB*(spectrum.g_max - spectrum.g_min)
    g = np.asarray(spectrum)
    return NEPER_TO_DB*(g[..., -1] - g[..., 0])


def calibrate_smd_delays(kappa, section_length, num_modes, rng):
    """
    Draw the mode delays of one waveplate.

    Parameters
    ----------
    kappa: float
        SMD coefficient in s/sqrt(m)
    section_length: float
        waveplate length in m
    num_modes: int
        2N
    rng: np.random.Generator

    Returns
    -------
    DelayVector whose entries have standard deviation
    kappa*sqrt(section_length) after removal of the common delay
    """
    if kappa < 0.0:
        raise ConfigurationError(f"SMD coefficient must be >= 0; got {kappa}")
    if section_length <= 0.0:
        raise ConfigurationError(
            f"section length must be > 0; got {section_length}")
    if kappa == 0.0:
        return DelayVector.zeros(num_modes)

    sigma_tau = kappa*np.sqrt(section_length)

    # re-centering removes 1/(2N) of the variance; pre-scale so the
    # per-mode std after re-centering is sigma_tau
    inflate = np.sqrt(num_modes/(num_modes-1.0))
    tau = rng.normal(0.0, sigma_tau*inflate, num_modes)
    tau = tau - tau.mean()
    return DelayVector(tau=tau)


def smd_coeff_si(ps_per_sqrt_km):
    """
    Convert an SMD coefficient from ps/sqrt(km) to s/sqrt(m)
    """
    return ps_per_sqrt_km*1.0e-12/np.sqrt(1.0e3)


def alternating_gains(num_modes, sigma_g):
    """
    g_i = (-1)^i sigma_g for i = 1..2N
    """
    if num_modes < 2 or num_modes % 2 != 0:
        raise DimensionError(f"num_modes must be even and >= 2; got {num_modes}")
    idx = np.arange(1, num_modes+1)
    return GainVector(g=sigma_g*(-1.0)**idx)


def sigma_g_from_nominal_pp_db(pp_db):
    return pp_db*SIGMA_G_PER_NOMINAL_DB


def make_lumped_mdl_element(sigma_g, num_modes, rng):
    """
    Lumped MDL element: alternating gains, no delays, no mean loss
    (the mode-averaged loss is taken up by the amplifier).
    """
    return make_section(
        gains=alternating_gains(num_modes, sigma_g),
        delays=DelayVector.zeros(num_modes),
        mean_gain=0.0,
        rng=rng)


def make_waveplate(fiber, num_modes, rng):
    """
    One lossless, MDL-free waveplate of the fiber carrying the
    SMD delays accumulated over fiber.waveplate_length_km
    """
    delays = calibrate_smd_delays(
        kappa=smd_coeff_si(fiber.smd_coeff_ps_per_sqrt_km),
        section_length=fiber.waveplate_length_km*1.0e3,
        num_modes=num_modes,
        rng=rng)
    return make_section(
        gains=np.zeros(num_modes),
        delays=delays,
        mean_gain=0.0,
        rng=rng)


def fiber_scalar_element(fiber, length_km, f0):
    return ScalarElement(
        log_gain=-fiber.alpha_per_km*length_km,
        beta2_length=fiber.beta2_s2_per_km(f0)*length_km,
        label='fiber')


def sample_mdl_spectrum(num_sections, sigma_g, num_modes, rng):
    """
    One matrix-only realization of a cascade of delay-free
    alternating-gain sections (frequency-flat, so omega = 0 suffices).
    """
    if num_sections < 1:
        raise DimensionError(f"need at least one section; got {num_sections}")
    V = sample_haar_unitary(num_modes, rng, size=num_sections)
    U = sample_haar_unitary(num_modes, rng, size=num_sections)
    lam = np.exp(0.5*alternating_gains(num_modes, sigma_g).g)
    M = np.eye(num_modes, dtype=complex)
    for k in range(num_sections):
        M = V[k] @ (lam[:, None] * (U[k].conj().T @ M))
    return singular_gains(M)


def impulse_response_rms_spread(transfer, dt, pulse_rms):
    """
    Energy-weighted rms delay of the intensity impulse response
    sum_ij |h_ij(t)|^2 probed with a Gaussian pulse.

    Parameters
    ----------
    transfer: TransferMatrix
        sampled on the FFT grid 2*pi*fftfreq(n_t, dt)
    dt: float
        sample spacing in seconds
    pulse_rms: float
        rms width (s) of the probe pulse intensity; its contribution
        is removed from the result

    Returns
    -------
    float, seconds
    """
    omega = transfer.omega_grid
    n_t = len(omega)
    # intensity exp(-t^2/(2 pulse_rms^2)) has field width T0 = sqrt(2) pulse_rms
    t0 = np.sqrt(2.0)*pulse_rms
    probe = np.exp(-0.5*(omega*t0)**2)
    resp = transfer.H * probe[:, None, None]
    h = np.fft.ifft(resp, axis=0)
    intensity = np.sum(np.abs(h)**2, axis=(1, 2))
    intensity = np.fft.fftshift(intensity)
    t = (np.arange(n_t) - n_t//2)*dt
    energy = intensity.sum()
    mean_t = np.sum(t*intensity)/energy
    var_t = np.sum((t-mean_t)**2*intensity)/energy
    return float(np.sqrt(max(var_t - pulse_rms**2, 0.0)))
