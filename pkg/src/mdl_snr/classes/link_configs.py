"""
Physical configuration of a link: fiber, amplifiers, lumped MDL
elements, split-step controller and the WDM transmitter.

Every config is a frozen dataclass whose field names carry their
units. from_dict() rejects unknown keys; violations() lists every
violated bound without raising, so that a scenario loader can report
all problems at once.
"""
from dataclasses import dataclass, fields, asdict, replace
from typing import List, Optional

import numpy as np
from scipy import constants

from mdl_snr.classes.channel import CouplingSection
from mdl_snr.classes.exceptions import (
    ConfigurationError,
    ScenarioValidationError)
from mdl_snr.classes.field import is_power_of_two
from mdl_snr.utils.mdl_utils import sigma_g_from_nominal_pp_db


DEFAULT_CENTER_FREQUENCY_HZ = 193.414e12

# relative tolerance for "waveplate length divides span length"
DIVISIBILITY_RTOL = 1.0e-6


class ConfigMixin(object):

    # maps field name -> config class for nested configs
    _nested = dict()

    @classmethod
    def from_dict(cls, data, context=None):
        if context is None:
            context = cls.__name__
        if not isinstance(data, dict):
            raise ScenarioValidationError(
                [f"{context}: expected an object; got {type(data).__name__}"])
        known = set(f.name for f in fields(cls))
        unknown = sorted(set(data.keys()) - known)
        if len(unknown) > 0:
            raise ScenarioValidationError(
                [f"{context}: unknown key '{k}'" for k in unknown])
        kwargs = dict()
        for k, v in data.items():
            if k in cls._nested and isinstance(v, dict):
                v = cls._nested[k].from_dict(v, context=f"{context}.{k}")
            kwargs[k] = v
        return cls(**kwargs)

    def to_dict(self):
        return asdict(self)

    def violations(self, context=None):
        return []

    def validate(self):
        bad = self.violations()
        if len(bad) > 0:
            raise ScenarioValidationError(bad)
        return self

    def replace(self, **kwargs):
        return replace(self, **kwargs)


def _is_number(value):
    return (isinstance(value, (int, float, np.integer, np.floating))
            and not isinstance(value, bool)
            and np.isfinite(value))


def _is_int(value):
    return (isinstance(value, (int, np.integer))
            and not isinstance(value, bool))


def _check_number(value, name, context, lower=None, strict=False):
    if not _is_number(value):
        return [f"{context}.{name} must be a finite number; got {value!r}"]
    if lower is not None:
        if strict and not value > lower:
            return [f"{context}.{name} must be > {lower}; got {value}"]
        if not strict and not value >= lower:
            return [f"{context}.{name} must be >= {lower}; got {value}"]
    return []


@dataclass(frozen=True)
class FiberConfig(ConfigMixin):
    attenuation_db_per_km: float = 0.2
    dispersion_ps_per_nm_km: float = 17.0
    gamma_eff_per_w_km: float = 0.3167
    smd_coeff_ps_per_sqrt_km: float = 0.0
    waveplate_length_km: float = 0.1
    span_length_km: float = 100.0

    def violations(self, context='fiber'):
        bad = []
        bad += _check_number(
            self.attenuation_db_per_km, 'attenuation_db_per_km', context, 0.0)
        bad += _check_number(
            self.dispersion_ps_per_nm_km, 'dispersion_ps_per_nm_km', context)
        bad += _check_number(
            self.gamma_eff_per_w_km, 'gamma_eff_per_w_km', context, 0.0)
        bad += _check_number(
            self.smd_coeff_ps_per_sqrt_km, 'smd_coeff_ps_per_sqrt_km',
            context, 0.0)
        wp_bad = _check_number(
            self.waveplate_length_km, 'waveplate_length_km', context,
            0.0, strict=True)
        span_bad = _check_number(
            self.span_length_km, 'span_length_km', context, 0.0, strict=True)
        bad += wp_bad + span_bad
        if len(wp_bad) == 0 and len(span_bad) == 0:
            ratio = self.span_length_km/self.waveplate_length_km
            if abs(ratio - np.round(ratio)) > DIVISIBILITY_RTOL*ratio:
                bad.append(
                    f"{context}.waveplate_length_km ({self.waveplate_length_km}) "
                    f"does not divide span_length_km ({self.span_length_km})")
        return bad

    @property
    def alpha_per_km(self):
        """
        Power attenuation coefficient in 1/km
        """
        return self.attenuation_db_per_km/(10.0*np.log10(np.e))

    def beta2_s2_per_km(self, f0):
        """
        beta2 = -D lambda^2/(2 pi c) at lambda = c/f0, in s^2/km
        """
        wavelength = constants.c/f0
        # ps/(nm km) -> s/(m km)
        d_si = self.dispersion_ps_per_nm_km*1.0e-3
        return -d_si*wavelength**2/(2.0*np.pi*constants.c)

    @property
    def num_waveplates(self):
        return int(np.round(self.span_length_km/self.waveplate_length_km))

    @property
    def is_coupled(self):
        return self.smd_coeff_ps_per_sqrt_km > 0.0

    def effective_length_km(self, length_km):
        alpha = self.alpha_per_km
        if alpha == 0.0:
            return float(length_km)
        return float(-np.expm1(-alpha*length_km)/alpha)


@dataclass(frozen=True)
class AmplifierConfig(ConfigMixin):
    gain_db: float = 20.0
    noise_figure_db: float = 6.0
    ase_enabled: bool = True

    def violations(self, context='amplifier'):
        bad = []
        bad += _check_number(self.gain_db, 'gain_db', context, 0.0)
        bad += _check_number(self.noise_figure_db, 'noise_figure_db', context)
        if not isinstance(self.ase_enabled, bool):
            bad.append(f"{context}.ase_enabled must be true or false")
        return bad

    @property
    def gain_linear(self):
        return 10.0**(self.gain_db/10.0)

    @property
    def noise_figure_linear(self):
        return 10.0**(self.noise_figure_db/10.0)


@dataclass(frozen=True)
class MdlElementConfig(ConfigMixin):
    """
    Lumped MDL element placed at the end of every span.

    pp_db is the nominal peak-to-peak MDL of one element; 1 dB
    corresponds to sigma_g^2 = 0.015 (true peak-to-peak 1.064 dB).
    sigma_g, when given, overrides the nominal value.
    """

    pp_db: float = 0.0
    sigma_g: Optional[float] = None

    def violations(self, context='mdl_element'):
        bad = _check_number(self.pp_db, 'pp_db', context, 0.0)
        if self.sigma_g is not None:
            bad += _check_number(self.sigma_g, 'sigma_g', context, 0.0)
        return bad

    @property
    def effective_sigma_g(self):
        if self.sigma_g is not None:
            return float(self.sigma_g)
        return float(sigma_g_from_nominal_pp_db(self.pp_db))

    @property
    def enabled(self):
        return self.effective_sigma_g > 0.0


@dataclass(frozen=True)
class LinkConfig(ConfigMixin):
    num_spans: int = 10
    num_cores: int = 4
    fiber: FiberConfig = FiberConfig()
    amplifier: AmplifierConfig = AmplifierConfig()
    mdl_element: MdlElementConfig = MdlElementConfig()

    _nested = {'fiber': FiberConfig,
               'amplifier': AmplifierConfig,
               'mdl_element': MdlElementConfig}

    def violations(self, context='link'):
        bad = []
        if not _is_int(self.num_spans) or self.num_spans < 1:
            bad.append(f"{context}.num_spans must be an integer >= 1; "
                       f"got {self.num_spans!r}")
        if not _is_int(self.num_cores) or self.num_cores < 1:
            bad.append(f"{context}.num_cores must be an integer >= 1; "
                       f"got {self.num_cores!r}")
        bad += self.fiber.violations(context=f"{context}.fiber")
        bad += self.amplifier.violations(context=f"{context}.amplifier")
        bad += self.mdl_element.violations(context=f"{context}.mdl_element")
        return bad

    @property
    def num_modes(self):
        return 2*self.num_cores


@dataclass(frozen=True)
class StepController(ConfigMixin):
    initial_step_km: float = 0.1
    local_error_target: float = 1.0e-4
    min_step_km: float = 1.0e-5

    def violations(self, context='step_controller'):
        bad = []
        bad += _check_number(
            self.initial_step_km, 'initial_step_km', context, 0.0, strict=True)
        bad += _check_number(
            self.local_error_target, 'local_error_target', context,
            0.0, strict=True)
        min_bad = _check_number(
            self.min_step_km, 'min_step_km', context, 0.0, strict=True)
        bad += min_bad
        if len(bad) == 0 and self.min_step_km > self.initial_step_km:
            bad.append(
                f"{context}.min_step_km ({self.min_step_km}) must be <= "
                f"initial_step_km ({self.initial_step_km})")
        return bad

    def halved(self):
        """
        Controller with half the initial step and half the error target
        """
        initial = 0.5*self.initial_step_km
        return StepController(
            initial_step_km=initial,
            local_error_target=0.5*self.local_error_target,
            min_step_km=min(self.min_step_km, initial))


@dataclass(frozen=True)
class WdmConfig(ConfigMixin):
    num_channels: int = 5
    symbol_rate_baud: float = 64.0e9
    spacing_hz: float = 75.0e9
    symbols_per_block: int = 65536
    power_per_channel_dbm: float = 5.0
    rolloff: float = 0.1
    samples_per_symbol: Optional[int] = None
    center_frequency_hz: float = DEFAULT_CENTER_FREQUENCY_HZ

    def violations(self, context='wdm'):
        bad = []
        if (not _is_int(self.num_channels) or self.num_channels < 1
                or self.num_channels % 2 != 1):
            bad.append(f"{context}.num_channels must be an odd integer >= 1 "
                       f"(the CUT is the center channel); "
                       f"got {self.num_channels!r}")
        rate_bad = _check_number(
            self.symbol_rate_baud, 'symbol_rate_baud', context, 0.0, strict=True)
        bad += rate_bad
        rolloff_bad = _check_number(self.rolloff, 'rolloff', context, 0.0)
        if len(rolloff_bad) == 0 and self.rolloff > 1.0:
            rolloff_bad = [f"{context}.rolloff must be <= 1; got {self.rolloff}"]
        bad += rolloff_bad
        spacing_bad = _check_number(
            self.spacing_hz, 'spacing_hz', context, 0.0, strict=True)
        bad += spacing_bad
        if (not _is_int(self.symbols_per_block)
                or not is_power_of_two(self.symbols_per_block)):
            bad.append(f"{context}.symbols_per_block must be a power of two; "
                       f"got {self.symbols_per_block!r}")
        bad += _check_number(
            self.power_per_channel_dbm, 'power_per_channel_dbm', context)
        bad += _check_number(
            self.center_frequency_hz, 'center_frequency_hz', context,
            0.0, strict=True)
        if self.samples_per_symbol is not None:
            if (not _is_int(self.samples_per_symbol)
                    or not is_power_of_two(self.samples_per_symbol)):
                bad.append(f"{context}.samples_per_symbol must be a power "
                           f"of two; got {self.samples_per_symbol!r}")

        if len(bad) > 0:
            return bad

        if self.spacing_hz < self.channel_bandwidth_hz*(1.0-1.0e-12):
            bad.append(
                f"{context}.spacing_hz ({self.spacing_hz:.4e}) is smaller than "
                f"symbol_rate_baud*(1+rolloff) ({self.channel_bandwidth_hz:.4e})")
        bins = self.spacing_hz*self.symbols_per_block/self.symbol_rate_baud
        if abs(bins - np.round(bins)) > 1.0e-6:
            bad.append(
                f"{context}.spacing_hz*symbols_per_block/symbol_rate_baud "
                f"must be an integer number of frequency bins; got {bins}")
        if self.samples_per_symbol is not None:
            if self.sample_rate_hz < self.occupied_bandwidth_hz:
                bad.append(
                    f"{context}: sample rate {self.sample_rate_hz:.4e} Hz "
                    f"cannot hold the WDM band "
                    f"{self.occupied_bandwidth_hz:.4e} Hz")
        return bad

    @property
    def channel_bandwidth_hz(self):
        return self.symbol_rate_baud*(1.0+self.rolloff)

    @property
    def occupied_bandwidth_hz(self):
        return ((self.num_channels-1)*self.spacing_hz
                + self.channel_bandwidth_hz)

    @property
    def resolved_samples_per_symbol(self):
        """
        samples_per_symbol, or the smallest power of two giving a
        sample rate of at least twice the occupied WDM band
        """
        if self.samples_per_symbol is not None:
            return int(self.samples_per_symbol)
        sps = 1
        while sps*self.symbol_rate_baud < 2.0*self.occupied_bandwidth_hz:
            sps *= 2
        return sps

    @property
    def sample_rate_hz(self):
        return self.resolved_samples_per_symbol*self.symbol_rate_baud

    @property
    def n_t(self):
        return self.resolved_samples_per_symbol*self.symbols_per_block

    @property
    def dt(self):
        return 1.0/self.sample_rate_hz

    @property
    def power_per_channel_w(self):
        return 1.0e-3*10.0**(self.power_per_channel_dbm/10.0)

    @property
    def center_channel_index(self):
        return (self.num_channels-1)//2

    def channel_offset_hz(self, channel_index):
        """
        Frequency offset of channel `channel_index` (0-based) from the
        carrier: (k - (n+1)/2)*spacing with k = channel_index+1
        """
        return (channel_index - self.center_channel_index)*self.spacing_hz

    def channel_offset_bins(self, channel_index):
        bins_per_spacing = self.spacing_hz*self.symbols_per_block/self.symbol_rate_baud
        return int(np.round(
            (channel_index - self.center_channel_index)*bins_per_spacing))

    def check_bandwidth(self):
        if self.sample_rate_hz < self.occupied_bandwidth_hz:
            raise ConfigurationError(
                f"sample rate {self.sample_rate_hz:.4e} Hz cannot hold "
                f"the WDM band {self.occupied_bandwidth_hz:.4e} Hz")


@dataclass
class SpanDescriptor:
    """
    One span of a link as realized for a single Monte-Carlo draw.

    sections: per-waveplate CouplingSections; an empty list is an
    uncoupled span and None asks propagate_span to draw them.
    """

    fiber: FiberConfig
    amplifier: AmplifierConfig
    sections: Optional[List[CouplingSection]] = None
    mdl_element: Optional[CouplingSection] = None
