"""
Scenario, sweep and run-manifest types.
"""
import json
import pathlib
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from mdl_snr.classes.exceptions import ConfigurationError
from mdl_snr.classes.link_configs import (
    ConfigMixin,
    LinkConfig,
    StepController,
    WdmConfig,
    _check_number,
    _is_int)


KINDS = ('link', 'mdl_statistics')
METHODS = ('ssfm', 'oracle')
TAGS = ('ASE', 'NLI', 'BOTH')

# sweep variable -> unit suffix of its output column
SWEEP_UNITS = {'smd_coeff_ps_per_sqrt_km': 'ps_per_sqrt_km',
               'mdl_element_pp_db': 'db',
               'num_channels': 'count'}

NO_SWEEP_COLUMN = 'sweep_idx'


@dataclass(frozen=True)
class MdlStatisticsConfig(ConfigMixin):
    """
    Matrix-only ensemble of a cascade of delay-free sections
    """

    num_modes: int = 8
    num_sections: int = 256
    sigma_g: float = 0.014

    def violations(self, context='mdl_statistics'):
        bad = []
        if (not _is_int(self.num_modes) or self.num_modes < 2
                or self.num_modes % 2 != 0):
            bad.append(f"{context}.num_modes must be an even integer >= 2; "
                       f"got {self.num_modes!r}")
        if not _is_int(self.num_sections) or self.num_sections < 1:
            bad.append(f"{context}.num_sections must be an integer >= 1; "
                       f"got {self.num_sections!r}")
        bad += _check_number(self.sigma_g, 'sigma_g', context, 0.0)
        return bad


@dataclass(frozen=True)
class SweepDescriptor(ConfigMixin):
    """
    One scenario variable stepped over a list of values.
    powers_per_channel_dbm, when given, sets the launch power
    paired with each value.
    """

    variable: str = 'smd_coeff_ps_per_sqrt_km'
    values: Tuple = ()
    powers_per_channel_dbm: Optional[Tuple] = None

    def __post_init__(self):
        object.__setattr__(self, 'values', tuple(self.values))
        if self.powers_per_channel_dbm is not None:
            object.__setattr__(
                self, 'powers_per_channel_dbm',
                tuple(self.powers_per_channel_dbm))

    def violations(self, context='sweep'):
        bad = []
        if self.variable not in SWEEP_UNITS:
            bad.append(f"{context}.variable must be one of "
                       f"{sorted(SWEEP_UNITS)}; got {self.variable!r}")
        if len(self.values) == 0:
            bad.append(f"{context}.values must not be empty")
        for ii, v in enumerate(self.values):
            if self.variable == 'num_channels':
                if not _is_int(v) or v < 1 or v % 2 != 1:
                    bad.append(f"{context}.values[{ii}] must be an odd "
                               f"channel count; got {v!r}")
            else:
                bad += _check_number(v, f"values[{ii}]", context, 0.0)
        if self.powers_per_channel_dbm is not None:
            if len(self.powers_per_channel_dbm) != len(self.values):
                bad.append(
                    f"{context}.powers_per_channel_dbm has "
                    f"{len(self.powers_per_channel_dbm)} entries for "
                    f"{len(self.values)} values")
            for ii, p in enumerate(self.powers_per_channel_dbm):
                bad += _check_number(p, f"powers_per_channel_dbm[{ii}]", context)
        return bad

    @property
    def column(self):
        return f"sweep_value_{SWEEP_UNITS[self.variable]}"

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class Scenario(ConfigMixin):
    name: str = 'scenario'
    kind: str = 'link'
    method: str = 'ssfm'
    tags: Tuple = ('ASE', 'NLI', 'BOTH')
    num_realizations: int = 500
    master_seed: int = 0
    link: LinkConfig = LinkConfig()
    wdm: WdmConfig = WdmConfig()
    step_controller: StepController = StepController()
    mdl_statistics: Optional[MdlStatisticsConfig] = None
    sweep: Optional[SweepDescriptor] = None
    cut_cores: Tuple = (0,)
    cut_channel: Optional[int] = None
    histogram_bin_width_db: Optional[float] = None
    oracle_bins: int = 64
    archive_fields: bool = False

    _nested = {'link': LinkConfig,
               'wdm': WdmConfig,
               'step_controller': StepController,
               'mdl_statistics': MdlStatisticsConfig,
               'sweep': SweepDescriptor}

    def __post_init__(self):
        if isinstance(self.tags, (list, tuple)):
            object.__setattr__(self, 'tags', tuple(self.tags))
        if isinstance(self.cut_cores, (list, tuple)):
            object.__setattr__(self, 'cut_cores', tuple(self.cut_cores))

    def violations(self, context='scenario'):
        bad = []
        if not isinstance(self.name, str) or len(self.name) == 0:
            bad.append(f"{context}.name must be a non-empty string")
        if self.kind not in KINDS:
            bad.append(f"{context}.kind must be one of {KINDS}; "
                       f"got {self.kind!r}")
        if not _is_int(self.num_realizations) or self.num_realizations < 1:
            bad.append(f"{context}.num_realizations must be an integer >= 1; "
                       f"got {self.num_realizations!r}")
        if not _is_int(self.master_seed) or self.master_seed < 0:
            bad.append(f"{context}.master_seed must be an integer >= 0; "
                       f"got {self.master_seed!r}")

        if self.kind == 'mdl_statistics':
            if self.mdl_statistics is None:
                bad.append(f"{context}.mdl_statistics is required "
                           "when kind is 'mdl_statistics'")
            else:
                bad += self.mdl_statistics.violations(
                            context=f"{context}.mdl_statistics")
            if self.sweep is not None:
                bad.append(f"{context}.sweep is not supported "
                           "when kind is 'mdl_statistics'")
        else:
            bad += self._link_violations(context)

        if self.histogram_bin_width_db is not None:
            bad += _check_number(self.histogram_bin_width_db,
                                 'histogram_bin_width_db', context,
                                 0.0, strict=True)
        if not isinstance(self.archive_fields, bool):
            bad.append(f"{context}.archive_fields must be true or false")
        return bad

    def _link_violations(self, context):
        bad = []
        if self.method not in METHODS:
            bad.append(f"{context}.method must be one of {METHODS}; "
                       f"got {self.method!r}")
        if len(self.tags) == 0:
            bad.append(f"{context}.tags must not be empty")
        for t in self.tags:
            if t not in TAGS:
                bad.append(f"{context}.tags: unknown tag {t!r}; "
                           f"expected a subset of {TAGS}")
        if len(set(self.tags)) != len(self.tags):
            bad.append(f"{context}.tags has duplicates: {list(self.tags)}")
        if self.method == 'oracle' and tuple(self.tags) != ('ASE',):
            bad.append(f"{context}: the oracle method only supports "
                       f"tags ['ASE']; got {list(self.tags)}")
        if not _is_int(self.oracle_bins) or self.oracle_bins < 1:
            bad.append(f"{context}.oracle_bins must be an integer >= 1; "
                       f"got {self.oracle_bins!r}")

        link_bad = self.link.violations(context=f"{context}.link")
        bad += link_bad
        bad += self.wdm.violations(context=f"{context}.wdm")
        bad += self.step_controller.violations(
                    context=f"{context}.step_controller")

        if len(self.cut_cores) == 0:
            bad.append(f"{context}.cut_cores must not be empty")
        if len(link_bad) == 0:
            for c in self.cut_cores:
                if not _is_int(c) or not 0 <= c < self.link.num_cores:
                    bad.append(f"{context}.cut_cores: core {c!r} out of "
                               f"range for {self.link.num_cores} cores")
        if self.cut_channel is not None:
            if not _is_int(self.cut_channel) or self.cut_channel < 0:
                bad.append(f"{context}.cut_channel must be an integer >= 0; "
                           f"got {self.cut_channel!r}")

        if self.sweep is not None:
            sweep_bad = self.sweep.violations(context=f"{context}.sweep")
            bad += sweep_bad
            if len(sweep_bad) == 0 and len(bad) == 0:
                for ii in range(len(self.sweep)):
                    point = self.at_sweep_point(ii)
                    for v in point.wdm.violations(
                            context=f"{context}.sweep[{ii}].wdm"):
                        bad.append(v)
                    bad += point._cut_channel_violations(
                            f"{context}.sweep[{ii}]")
        elif len(bad) == 0:
            bad += self._cut_channel_violations(context)
        return bad

    def _cut_channel_violations(self, context):
        if self.cut_channel is None:
            return []
        if self.cut_channel >= self.wdm.num_channels:
            return [f"{context}.cut_channel {self.cut_channel} out of range "
                    f"for {self.wdm.num_channels} channels"]
        return []

    @property
    def num_sweep_points(self):
        if self.sweep is None:
            return 1
        return len(self.sweep)

    @property
    def sweep_column(self):
        if self.sweep is None:
            return NO_SWEEP_COLUMN
        return self.sweep.column

    def sweep_value(self, index):
        if self.sweep is None:
            return index
        return self.sweep.values[index]

    @property
    def resolved_cut_channel(self):
        if self.cut_channel is None:
            return self.wdm.center_channel_index
        return self.cut_channel

    def at_sweep_point(self, index):
        """
        The scenario with the sweep variable (and paired power)
        set to its index-th value, and no sweep
        """
        if self.sweep is None:
            if index != 0:
                raise ConfigurationError(
                    f"scenario has no sweep; asked for point {index}")
            return self
        value = self.sweep.values[index]
        link = self.link
        wdm = self.wdm
        if self.sweep.variable == 'smd_coeff_ps_per_sqrt_km':
            link = link.replace(
                fiber=link.fiber.replace(smd_coeff_ps_per_sqrt_km=value))
        elif self.sweep.variable == 'mdl_element_pp_db':
            link = link.replace(
                mdl_element=link.mdl_element.replace(pp_db=value, sigma_g=None))
        elif self.sweep.variable == 'num_channels':
            wdm = wdm.replace(num_channels=value)
        if self.sweep.powers_per_channel_dbm is not None:
            wdm = wdm.replace(
                power_per_channel_dbm=self.sweep.powers_per_channel_dbm[index])
        return self.replace(link=link, wdm=wdm, sweep=None)


@dataclass
class RunManifest(object):
    """
    Everything needed to re-execute a run and locate its outputs.

    status is 'complete' once every sweep point finished, 'partial'
    otherwise.
    """

    scenario: Dict
    master_seed: int
    code_version: str
    files: Dict = field(default_factory=dict)
    timing: Dict = field(default_factory=dict)
    status: str = 'partial'
    num_failures: int = 0
    output_dir: Optional[str] = None

    def to_dict(self):
        return {'scenario': self.scenario,
                'master_seed': self.master_seed,
                'code_version': self.code_version,
                'files': self.files,
                'timing': self.timing,
                'status': self.status,
                'num_failures': self.num_failures}

    @classmethod
    def from_dict(cls, data, output_dir=None):
        required = ('scenario', 'master_seed', 'code_version')
        missing = [k for k in required if k not in data]
        if len(missing) > 0:
            raise ConfigurationError(
                f"manifest is missing {missing}")
        return cls(scenario=data['scenario'],
                   master_seed=int(data['master_seed']),
                   code_version=str(data['code_version']),
                   files=dict(data.get('files', dict())),
                   timing=dict(data.get('timing', dict())),
                   status=str(data.get('status', 'partial')),
                   num_failures=int(data.get('num_failures', 0)),
                   output_dir=output_dir)

    def write(self, path, clobber=False):
        path = pathlib.Path(path)
        if path.exists() and not clobber:
            raise RuntimeError(f"{path} exists already")
        with open(path, 'w') as out_file:
            out_file.write(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def read(cls, path):
        path = pathlib.Path(path)
        if not path.is_file():
            raise ConfigurationError(f"{path} is not a file")
        with open(path, 'rb') as in_file:
            data = json.load(in_file)
        if not isinstance(data, dict) or len(data) == 0:
            raise ConfigurationError(f"{path} is an empty manifest")
        return cls.from_dict(data, output_dir=str(path.parent))

    def path_to(self, key):
        if key not in self.files:
            return None
        return pathlib.Path(self.output_dir) / self.files[key]
