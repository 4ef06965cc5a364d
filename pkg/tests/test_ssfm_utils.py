import numpy as np
import pytest
from scipy import constants

from mdl_snr.classes.exceptions import (
    DimensionError,
    NonConvergenceError)
from mdl_snr.classes.field import MultimodeField
from mdl_snr.classes.link_configs import (
    AmplifierConfig,
    FiberConfig,
    SpanDescriptor,
    StepController)
from mdl_snr.utils.mdl_utils import make_lumped_mdl_element
from mdl_snr.utils.ssfm_utils import (
    amplify_with_ase,
    apply_waveplate,
    ase_psd,
    configure_link_for_tag,
    draw_span_sections,
    linear_half_step,
    link_channel_record,
    nonlinear_step,
    propagate_span,
    run_link)
from mdl_snr.utils.transceiver_utils import zero_forcing_equalize


F0 = 193.414e12


def _random_field(rng, num_modes=4, n_t=1024, dt=1.0e-12, power_w=1.0e-3):
    samples = (rng.standard_normal((num_modes, n_t))
               + 1j*rng.standard_normal((num_modes, n_t)))
    samples *= np.sqrt(0.5*power_w)
    # band-limit so the field is smooth on the grid
    spectrum = np.fft.fft(samples, axis=1)
    freq = np.fft.fftfreq(n_t, d=dt)
    spectrum[:, np.abs(freq) > 0.25/dt] = 0.0
    return MultimodeField.from_spectrum(spectrum, dt=dt, f0=F0)


def test_field_checks():
    with pytest.raises(DimensionError):
        MultimodeField(samples=np.zeros((2, 100)), dt=1.0e-12, f0=F0)
    with pytest.raises(DimensionError):
        MultimodeField(samples=np.zeros((3, 128)), dt=1.0e-12, f0=F0)


def test_lossless_identity(rng):
    fiber = FiberConfig(attenuation_db_per_km=0.0,
                        dispersion_ps_per_nm_km=0.0,
                        gamma_eff_per_w_km=0.0,
                        span_length_km=10.0)
    field = _random_field(rng)
    out = propagate_span(field, fiber, StepController())
    np.testing.assert_allclose(out.samples, field.samples, atol=1.0e-12)


def test_linear_half_step_loss(rng):
    fiber = FiberConfig(attenuation_db_per_km=0.2,
                        dispersion_ps_per_nm_km=17.0)
    field = _random_field(rng)
    out = linear_half_step(field, fiber, 50.0)
    # 10 dB of power loss, identical for every mode
    np.testing.assert_allclose(out.power(), 0.1*field.power(), rtol=1.0e-12)


def test_beta2():
    fiber = FiberConfig(dispersion_ps_per_nm_km=17.0)
    wavelength = constants.c/F0
    np.testing.assert_allclose(wavelength, 1550.0e-9, rtol=1.0e-4)
    # -21.7 ps^2/km at 1550 nm
    np.testing.assert_allclose(
        fiber.beta2_s2_per_km(F0), -21.68e-24, rtol=2.0e-3)


def test_gaussian_dispersion():
    fiber = FiberConfig(attenuation_db_per_km=0.0,
                        dispersion_ps_per_nm_km=17.0,
                        gamma_eff_per_w_km=0.0,
                        span_length_km=100.0)
    n_t = 4096
    dt = 1.0e-12
    t = (np.arange(n_t) - n_t//2)*dt
    t0 = 20.0e-12
    pulse = np.exp(-0.5*(t/t0)**2)
    field = MultimodeField(
        samples=np.stack([pulse, np.zeros(n_t)]), dt=dt, f0=F0)

    out = propagate_span(field, fiber, StepController())

    intensity = np.abs(out.samples[0])**2
    mean_t = np.sum(t*intensity)/np.sum(intensity)
    rms = np.sqrt(np.sum((t-mean_t)**2*intensity)/np.sum(intensity))
    beta2_l = fiber.beta2_s2_per_km(F0)*100.0
    expected_t1 = t0*np.sqrt(1.0 + (beta2_l/t0**2)**2)
    np.testing.assert_allclose(np.sqrt(2.0)*rms, expected_t1, rtol=1.0e-3)
    np.testing.assert_allclose(out.energy(), field.energy(), rtol=1.0e-9)


def test_nonlinear_step_is_pure_phase(rng):
    fiber = FiberConfig(gamma_eff_per_w_km=1.3)
    field = _random_field(rng, power_w=0.1)
    out = nonlinear_step(field, fiber, 5.0)
    np.testing.assert_allclose(
        np.abs(out.samples), np.abs(field.samples), rtol=1.0e-12)
    total = np.sum(np.abs(field.samples)**2, axis=0)
    np.testing.assert_allclose(
        out.samples, field.samples*np.exp(1j*1.3*total*5.0)[None, :],
        rtol=1.0e-9, atol=1.0e-15)


def test_cw_self_phase():
    gamma = 1.267
    power_w = 0.1
    fiber = FiberConfig(attenuation_db_per_km=0.0,
                        dispersion_ps_per_nm_km=17.0,
                        gamma_eff_per_w_km=gamma,
                        span_length_km=10.0)
    n_t = 256
    samples = np.full((2, n_t), np.sqrt(0.5*power_w), dtype=complex)
    field = MultimodeField(samples=samples, dt=1.0e-12, f0=F0)
    out = propagate_span(field, fiber, StepController())
    phase = np.angle(out.samples[:, 0]/samples[:, 0])
    np.testing.assert_allclose(
        phase, np.angle(np.exp(1j*gamma*power_w*10.0)), atol=1.0e-9)


def test_cw_self_phase_with_loss():
    gamma = 1.267
    power_w = 0.01
    fiber = FiberConfig(attenuation_db_per_km=0.2,
                        dispersion_ps_per_nm_km=17.0,
                        gamma_eff_per_w_km=gamma,
                        span_length_km=100.0)
    samples = np.full((2, 256), np.sqrt(0.5*power_w), dtype=complex)
    field = MultimodeField(samples=samples, dt=1.0e-12, f0=F0)
    out = propagate_span(field, fiber, StepController())
    phase = np.angle(out.samples[0, 0]/samples[0, 0])
    expected = gamma*power_w*fiber.effective_length_km(100.0)
    np.testing.assert_allclose(phase, expected, rtol=1.0e-2)
    np.testing.assert_allclose(out.power(), 0.01*field.power(), rtol=1.0e-6)


def test_lossless_energy_conservation(rng):
    fiber = FiberConfig(attenuation_db_per_km=0.0,
                        dispersion_ps_per_nm_km=17.0,
                        gamma_eff_per_w_km=0.0,
                        smd_coeff_ps_per_sqrt_km=5.0,
                        waveplate_length_km=1.0,
                        span_length_km=10.0)
    field = _random_field(rng)
    out = propagate_span(field, fiber, StepController(), rng=rng)
    np.testing.assert_allclose(out.energy(), field.energy(), rtol=1.0e-9)


def test_nonlinear_energy_drift_is_small(rng):
    fiber = FiberConfig(attenuation_db_per_km=0.0,
                        dispersion_ps_per_nm_km=17.0,
                        gamma_eff_per_w_km=1.3,
                        smd_coeff_ps_per_sqrt_km=5.0,
                        waveplate_length_km=1.0,
                        span_length_km=10.0)
    field = _random_field(rng, power_w=0.02)
    out = propagate_span(field, fiber, StepController(), rng=rng)
    np.testing.assert_allclose(out.energy(), field.energy(), rtol=1.0e-5)


def test_step_underflow(rng):
    fiber = FiberConfig(attenuation_db_per_km=0.0,
                        dispersion_ps_per_nm_km=17.0,
                        gamma_eff_per_w_km=1.3,
                        span_length_km=10.0)
    controller = StepController(initial_step_km=0.1,
                                local_error_target=1.0e-14,
                                min_step_km=0.05)
    field = _random_field(rng, power_w=1.0)
    with pytest.raises(NonConvergenceError):
        propagate_span(field, fiber, controller)


def test_propagate_span_needs_sections_or_rng(rng):
    fiber = FiberConfig(smd_coeff_ps_per_sqrt_km=1.0,
                        waveplate_length_km=1.0,
                        span_length_km=10.0)
    field = _random_field(rng)
    with pytest.raises(DimensionError):
        propagate_span(field, fiber, StepController())
    sections = draw_span_sections(fiber, 4, rng)
    assert len(sections) == 10
    with pytest.raises(DimensionError):
        propagate_span(field, fiber, StepController(), sections=sections[:3])


def test_apply_waveplate_mismatch(rng):
    field = _random_field(rng, num_modes=4)
    section = make_lumped_mdl_element(0.1, 2, rng)
    with pytest.raises(DimensionError):
        apply_waveplate(field, section)


def test_ase_psd():
    amp = AmplifierConfig(gain_db=20.0, noise_figure_db=6.0)
    np.testing.assert_allclose(ase_psd(amp, F0), 2.551e-17, rtol=1.0e-3)
    assert ase_psd(AmplifierConfig(gain_db=0.0), F0) == 0.0


def test_ase_variance(rng):
    amp = AmplifierConfig(gain_db=20.0, noise_figure_db=6.0)
    dt = 1.0/256.0e9
    field = MultimodeField(
        samples=np.zeros((2, 16384), dtype=complex), dt=dt, f0=F0)
    out = amplify_with_ase(field, amp, rng)
    np.testing.assert_allclose(
        np.mean(np.abs(out.samples)**2), ase_psd(amp, F0)/dt, rtol=0.03)
    # circular: real and imaginary parts share the power
    np.testing.assert_allclose(
        np.mean(out.samples.real**2), np.mean(out.samples.imag**2), rtol=0.05)

    quiet = amplify_with_ase(
        field, amp.replace(ase_enabled=False), rng)
    np.testing.assert_array_equal(quiet.samples, field.samples)


def test_configure_link_for_tag():
    span = SpanDescriptor(fiber=FiberConfig(), amplifier=AmplifierConfig(),
                          sections=[])
    ase = configure_link_for_tag([span], 'ASE')[0]
    assert ase.fiber.gamma_eff_per_w_km == 0.0
    assert ase.amplifier.ase_enabled
    nli = configure_link_for_tag([span], 'NLI')[0]
    assert nli.fiber.gamma_eff_per_w_km == span.fiber.gamma_eff_per_w_km
    assert not nli.amplifier.ase_enabled
    both = configure_link_for_tag([span], 'BOTH')[0]
    assert both == span
    with pytest.raises(ValueError):
        configure_link_for_tag([span], 'XPM')


def test_channel_record_reconstruction(rng):
    """
    Without nonlinearity or noise the recorded elements reproduce
    the received field, and zero-forcing returns the launched one
    """
    fiber = FiberConfig(attenuation_db_per_km=0.2,
                        dispersion_ps_per_nm_km=17.0,
                        gamma_eff_per_w_km=0.0,
                        smd_coeff_ps_per_sqrt_km=3.0,
                        waveplate_length_km=1.0,
                        span_length_km=5.0)
    amp = AmplifierConfig(gain_db=1.0, ase_enabled=False)
    link = [SpanDescriptor(fiber=fiber,
                           amplifier=amp,
                           mdl_element=make_lumped_mdl_element(0.12, 4, rng))
            for _ in range(3)]
    tx = _random_field(rng)
    rx, record = run_link(tx, link, StepController(), rng)

    omega = tx.omega()
    np.testing.assert_allclose(
        record.apply(tx.spectrum(), omega), rx.spectrum(),
        atol=1.0e-9*np.max(np.abs(rx.spectrum())))

    eq = zero_forcing_equalize(rx, record)
    np.testing.assert_allclose(
        eq.samples, tx.samples, atol=1.0e-9*np.max(np.abs(tx.samples)))

    # the record of drawn waveplates matches one built without a field
    # MDL elements are the only delay-free sections
    waveplates = [s for s in record.coupling_sections()
                  if s.delays.tau.any()]
    drawn = [SpanDescriptor(fiber=fiber, amplifier=amp,
                            sections=waveplates[5*ii:5*ii+5],
                            mdl_element=link[ii].mdl_element)
             for ii in range(3)]
    rebuilt = link_channel_record(drawn, num_modes=4, f0=F0)
    np.testing.assert_allclose(
        rebuilt.apply(tx.spectrum(), omega), rx.spectrum(),
        atol=1.0e-9*np.max(np.abs(rx.spectrum())))


def test_run_link_ase_taps(rng):
    fiber = FiberConfig(gamma_eff_per_w_km=0.0, span_length_km=10.0)
    amp = AmplifierConfig(gain_db=2.0)
    link = [SpanDescriptor(fiber=fiber, amplifier=amp, sections=[])
            for _ in range(4)]
    _, record = run_link(_random_field(rng), link, StepController(), rng)
    assert len(record.ase_taps) == 4
    # fiber, amplifier per span; each tap sits after its amplifier
    assert [t[0] for t in record.ase_taps] == [2, 4, 6, 8]
    np.testing.assert_allclose(
        [t[1] for t in record.ase_taps], ase_psd(amp, F0), rtol=1.0e-12)
