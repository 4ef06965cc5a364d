import logging
from dataclasses import replace

import numpy as np
from scipy import constants

from mdl_snr.classes.channel import (
    ChannelRecord,
    ScalarElement)

from mdl_snr.classes.exceptions import (
    DimensionError,
    NonConvergenceError)

from mdl_snr.classes.field import MultimodeField

from mdl_snr.utils.mdl_utils import (
    fiber_scalar_element,
    make_waveplate)


logger = logging.getLogger(__name__)

STEP_GROWTH = 2.0**(1.0/3.0)

TAGS = ('ASE', 'NLI', 'BOTH')


def beta2(fiber, f0):
    """
    beta2 = -D lambda^2/(2 pi c) in s^2/km, lambda = c/f0
    """
    return fiber.beta2_s2_per_km(f0)


def _linear_factor(omega, fiber, f0, length_km):
    arg = (-0.5*fiber.alpha_per_km
           + 0.5j*beta2(fiber, f0)*omega**2)
    return np.exp(arg*length_km)


def linear_half_step(field, fiber, length_km):
    """
    Apply loss and chromatic dispersion over length_km,
    exp(-alpha L/2 + j beta2/2 omega^2 L), identically on every mode.
    """
    if length_km < 0.0:
        raise DimensionError(f"step length must be >= 0; got {length_km}")
    if length_km == 0.0:
        return field.copy()
    factor = _linear_factor(field.omega(), fiber, field.f0, length_km)
    return field.with_spectrum(field.spectrum()*factor[None, :])


def _nonlinear_phase(samples, gamma, length_km):
    total_power = np.sum(np.abs(samples)**2, axis=0)
    return samples*np.exp(1j*gamma*total_power*length_km)[None, :]


def nonlinear_step(field, fiber, effective_length_km):
    """
    Kerr phase of the coupled Manakov equation: every mode picks up
    exp(j gamma_eff S(t) L_eff) with S the power summed over all modes.
    """
    if effective_length_km < 0.0:
        raise DimensionError(
            f"effective length must be >= 0; got {effective_length_km}")
    gamma = fiber.gamma_eff_per_w_km
    if gamma == 0.0 or effective_length_km == 0.0:
        return field.copy()
    return field.with_samples(
        _nonlinear_phase(field.samples, gamma, effective_length_km))


def apply_waveplate(field, section):
    if section.num_modes != field.num_modes:
        raise DimensionError(
            f"section has {section.num_modes} modes; "
            f"field has {field.num_modes}")
    return field.with_spectrum(section.apply(field.spectrum(), field.omega()))


class _SpanStepper(object):
    """
    Symmetric split-step propagation in the spectral domain with
    step-doubling error control. The step size persists across
    waveplate segments of the same span.
    """

    def __init__(self, fiber, controller, omega, f0, max_step_km):
        self.fiber = fiber
        self.controller = controller
        self.omega = omega
        self.f0 = f0
        self.gamma = fiber.gamma_eff_per_w_km
        self.max_step_km = max_step_km
        self.step_km = min(controller.initial_step_km, max_step_km)
        self.n_accepted = 0
        self.n_rejected = 0
        self._cache = dict()

    def _half_factor(self, h):
        key = float(h)
        if key not in self._cache:
            if len(self._cache) > 16:
                self._cache = dict()
            self._cache[key] = _linear_factor(
                    self.omega, self.fiber, self.f0, 0.5*h)[None, :]
        return self._cache[key]

    def symmetric_step(self, spectrum, h):
        half = self._half_factor(h)
        spectrum = spectrum*half
        samples = np.fft.ifft(spectrum, axis=1)
        samples = _nonlinear_phase(samples, self.gamma, h)
        return np.fft.fft(samples, axis=1)*half

    def propagate(self, spectrum, length_km):
        if self.gamma == 0.0:
            factor = _linear_factor(self.omega, self.fiber, self.f0, length_km)
            return spectrum*factor[None, :]

        target = self.controller.local_error_target
        min_step = self.controller.min_step_km
        z = 0.0
        while z < length_km*(1.0-1.0e-12):
            remaining = length_km - z
            h = min(self.step_km, remaining)
            clipped = h < self.step_km

            coarse = self.symmetric_step(spectrum, h)
            fine = self.symmetric_step(
                        self.symmetric_step(spectrum, 0.5*h), 0.5*h)
            norm = np.linalg.norm(fine)
            if norm > 0.0:
                err = np.linalg.norm(fine-coarse)/norm
            else:
                err = 0.0

            if err > 2.0*target:
                self.n_rejected += 1
                self.step_km = 0.5*h
                if self.step_km < min_step:
                    raise NonConvergenceError(
                        f"step size {self.step_km:.3e} km fell below "
                        f"min_step_km {min_step:.3e} "
                        f"(local error {err:.3e}, target {target:.3e})")
                continue

            spectrum = (4.0*fine - coarse)/3.0
            z += h
            self.n_accepted += 1

            if err > target:
                self.step_km = max(h/STEP_GROWTH, min_step)
            elif err < 0.5*target and not clipped:
                self.step_km = min(self.step_km*STEP_GROWTH, self.max_step_km)

        return spectrum


def draw_span_sections(fiber, num_modes, rng):
    """
    Waveplates of one span; an uncoupled fiber has none.
    """
    if not fiber.is_coupled:
        return []
    return [make_waveplate(fiber, num_modes, rng)
            for _ in range(fiber.num_waveplates)]


def propagate_span(field, fiber, controller, sections=None, rng=None):
    """
    Propagate a field through one span of coupled fiber.

    Parameters
    ----------
    field: MultimodeField
    fiber: FiberConfig
    controller: StepController
    sections: list of CouplingSection
        one waveplate per fiber.waveplate_length_km, applied at the end
        of each segment. An empty list is an uncoupled span. None draws
        the waveplates from rng when the fiber has SMD.
    rng: np.random.Generator

    Returns
    -------
    MultimodeField
    """
    if sections is None:
        if fiber.is_coupled and rng is None:
            raise DimensionError(
                "need either waveplate sections or an rng to draw them")
        sections = draw_span_sections(fiber, field.num_modes, rng)

    for s in sections:
        if s.num_modes != field.num_modes:
            raise DimensionError(
                f"section has {s.num_modes} modes; field has {field.num_modes}")

    omega = field.omega()
    spectrum = field.spectrum()

    if len(sections) == 0:
        stepper = _SpanStepper(
                    fiber=fiber, controller=controller, omega=omega,
                    f0=field.f0, max_step_km=fiber.span_length_km)
        spectrum = stepper.propagate(spectrum, fiber.span_length_km)
    else:
        if len(sections) != fiber.num_waveplates:
            raise DimensionError(
                f"span of {fiber.span_length_km} km needs "
                f"{fiber.num_waveplates} waveplates; got {len(sections)}")
        segment = fiber.span_length_km/len(sections)
        stepper = _SpanStepper(
                    fiber=fiber, controller=controller, omega=omega,
                    f0=field.f0, max_step_km=segment)
        for s in sections:
            spectrum = stepper.propagate(spectrum, segment)
            spectrum = s.apply(spectrum, omega)

    if stepper.gamma > 0.0:
        logger.debug(f"span done: {stepper.n_accepted} steps accepted, "
                     f"{stepper.n_rejected} rejected")

    return field.with_spectrum(spectrum)


def ase_psd(amp, f0):
    """
    One-sided ASE PSD per mode in W/Hz,
    S = n_sp h nu (G-1) with n_sp = F G/(2 (G-1))
    """
    g = amp.gain_linear
    if g <= 1.0:
        return 0.0
    nsp = amp.noise_figure_linear*g/(2.0*(g-1.0))
    return nsp*constants.h*f0*(g-1.0)


def amplify_with_ase(field, amp, rng):
    samples = field.samples*np.sqrt(amp.gain_linear)
    if amp.ase_enabled:
        psd = ase_psd(amp, field.f0)
        if psd > 0.0:
            sigma2 = psd/field.dt
            noise = (rng.standard_normal(samples.shape)
                     + 1j*rng.standard_normal(samples.shape))
            samples = samples + np.sqrt(0.5*sigma2)*noise
    return field.with_samples(samples)


def configure_link_for_tag(link, tag):
    """
    ASE: fiber nonlinearity off; NLI: amplifier noise off; BOTH: as given
    """
    if tag not in TAGS:
        raise ValueError(f"unknown tag {tag}; expected one of {TAGS}")
    new_link = []
    for span in link:
        if tag == 'ASE':
            span = replace(
                span, fiber=span.fiber.replace(gamma_eff_per_w_km=0.0))
        elif tag == 'NLI':
            span = replace(
                span, amplifier=span.amplifier.replace(ase_enabled=False))
        new_link.append(span)
    return new_link


def record_span(record, span, sections, f0):
    """
    Append the linear elements of one span to a ChannelRecord:
    fiber loss/dispersion, waveplates, MDL element, amplifier gain,
    then the amplifier's ASE tap.
    """
    record.append(fiber_scalar_element(
            span.fiber, span.fiber.span_length_km, f0))
    record.extend(sections)
    if span.mdl_element is not None:
        record.append(span.mdl_element)
    record.append(ScalarElement(
            log_gain=np.log(span.amplifier.gain_linear), label='amplifier'))
    if span.amplifier.ase_enabled:
        record.add_ase_tap(ase_psd(span.amplifier, f0))
    return record


def link_channel_record(link, num_modes, f0):
    """
    ChannelRecord of a link whose waveplates are already drawn,
    without propagating any field
    """
    record = ChannelRecord(num_modes=num_modes)
    for span in link:
        if span.sections is None:
            raise DimensionError(
                "link_channel_record needs the waveplates of every span")
        record_span(record, span, span.sections, f0)
    return record


def run_link(tx_field, link, controller, rng):
    """
    Propagate tx_field through a list of SpanDescriptors.

    Each span is fiber (with its waveplates), then the lumped MDL
    element, then the amplifier.

    Returns
    -------
    rx_field: MultimodeField
    record: ChannelRecord
        every linear element in transmission order plus the
        position and PSD of each ASE injection
    """
    num_modes = tx_field.num_modes
    record = ChannelRecord(num_modes=num_modes)
    field = tx_field
    for i_span, span in enumerate(link):
        sections = span.sections
        if sections is None:
            sections = draw_span_sections(span.fiber, num_modes, rng)

        field = propagate_span(
                    field, span.fiber, controller, sections=sections, rng=rng)
        if span.mdl_element is not None:
            field = apply_waveplate(field, span.mdl_element)
        field = amplify_with_ase(field, span.amplifier, rng)
        record_span(record, span, sections, field.f0)

        logger.debug(f"span {i_span+1} of {len(link)} done")

    return field, record
