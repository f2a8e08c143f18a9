"""
Run configuration: every physical, waveform, geometry and algorithm parameter.

The on-disk form is a flat ``key = value`` file with ``#`` comment lines,
read through python-decouple. Keys carry their SI unit as a suffix.
"""
import logging
import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from decouple import Config, RepositoryEnv, UndefinedValueError
from django.core.exceptions import ImproperlyConfigured
from scipy.constants import c as SPEED_OF_LIGHT

logger = logging.getLogger(__name__)

THRESHOLD_RULES = ('fixed', 'calibrated')
WRAP_STRATEGIES = ('tracked', 'pairwise')
CROSS_RANGE_MODES = ('reference', 'per_frame')
FRAME_FORMATS = ('bin', 'csv')

# Zero-sidelobe span of the s512 correlation around a peak (before, after).
CLEAN_LAGS_BEFORE = 64
CLEAN_LAGS_AFTER = 128


def _cast_bool(value):
    if isinstance(value, bool):
        return value
    lowered = str(value).strip().lower()
    if lowered in ('1', 'true', 'yes', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'off', ''):
        return False
    raise ValueError(f"not a boolean: {value!r}")


@dataclass(frozen=True)
class SimConfig:
    # carrier, waveform and timing
    carrier_hz: float = 60e9
    bandwidth_hz: float = 1.76e9
    training_len: int = 3328
    frame_len: int = 13632
    cpi_s: float = 10e-3
    frames: int = 0
    # link budget
    tx_power_dbm: float = 30.0
    noise_density_dbm_hz: float = -174.0
    clutter_power_dbm: float = -72.275
    rcs_dbsm: float = 20.0
    path_loss_exp: float = 2.0
    # geometry and motion
    x0_m: float = 0.0
    y0_m: float = 20.0
    z0_m: float = -7.0
    xv_m: float = 5.0
    yv_m: float = 2.0
    zv_m: float = 1.5
    speed_mps: float = 40.0
    # arrays
    nx_tx: int = 8
    ny_tx: int = 8
    nx_rx: int = 8
    ny_rx: int = 8
    # estimation and imaging
    i_gap: int = 6
    x_size_m: float = 15.0
    y_size_m: float = 20.0
    seed: int = 2020
    noiseless: bool = False
    threshold_rule: str = 'fixed'
    thresh_mult: float = 512.0
    false_alarm_kappa: float = 4.0
    search_window: int = 0
    detection_gating: bool = True
    wrap_strategy: str = 'tracked'
    cross_range_mode: str = 'reference'
    cross_range_frame: int = -1
    vehicle_file: str = ''
    frame_format: str = 'bin'
    write_frames: bool = True

    # --- derived quantities -------------------------------------------------

    @property
    def symbol_period_s(self):
        return 1.0 / self.bandwidth_hz

    @property
    def wavelength_m(self):
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def num_frames(self):
        """M: frames per CPI, floor(CPI / (N_f T_s)) unless overridden."""
        if self.frames:
            return self.frames
        return int(math.floor(self.cpi_s * self.bandwidth_hz / self.frame_len))

    @property
    def frame_period_s(self):
        return self.frame_len * self.symbol_period_s

    @property
    def observation_s(self):
        """Time between the first and last frame of the CPI."""
        return (self.num_frames - 1) * self.frame_period_s

    @property
    def range_resolution_m(self):
        return SPEED_OF_LIGHT / (2.0 * self.bandwidth_hz)

    @property
    def reference_range_m(self):
        return math.sqrt(self.x0_m ** 2 + self.y0_m ** 2 + self.z0_m ** 2)

    @property
    def tx_power_w(self):
        return 10 ** ((self.tx_power_dbm - 30.0) / 10.0)

    @property
    def sample_amplitude(self):
        """Per-sample transmit amplitude sqrt(Es / T_s)."""
        return math.sqrt(self.tx_power_w)

    @property
    def sigma_nc2(self):
        """Noise plus clutter variance N_o W + P_c in watts; zero when noiseless."""
        if self.noiseless:
            return 0.0
        noise = 10 ** ((self.noise_density_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz
        clutter = 10 ** ((self.clutter_power_dbm - 30.0) / 10.0)
        return noise + clutter

    @property
    def total_rcs_m2(self):
        return 10 ** (self.rcs_dbsm / 10.0)

    @property
    def window_half_width(self):
        """Delay search half-width around the strongest return, in samples."""
        if self.search_window:
            return self.search_window
        return int(math.ceil(1.5 * self.xv_m / self.range_resolution_m))

    @property
    def anchor_frame(self):
        return self.num_frames - 1

    @property
    def reference_frame(self):
        """Frame whose Doppler sets the cross-range tone in ``reference`` mode."""
        if self.cross_range_frame < 0:
            return self.num_frames + self.cross_range_frame
        return self.cross_range_frame

    @property
    def range_bins(self):
        return int(math.floor(self.x_size_m / self.range_resolution_m))

    # --- validation and text form ----------------------------------------------

    def validate(self):
        """Raise ImproperlyConfigured for inconsistent settings; return self."""
        numeric = [getattr(self, f.name) for f in fields(self) if f.type in (float, 'float')]
        if not all(math.isfinite(v) for v in numeric):
            raise ImproperlyConfigured("all numeric settings must be finite")
        if self.carrier_hz <= 0 or self.bandwidth_hz <= 0 or self.cpi_s <= 0:
            raise ImproperlyConfigured("carrier_hz, bandwidth_hz and cpi_s must be positive")
        if self.frame_len < self.training_len:
            raise ImproperlyConfigured(
                f"frame_len ({self.frame_len}) must be at least training_len ({self.training_len})")
        if self.training_len != 3328:
            raise ImproperlyConfigured("training_len is fixed by the SC PHY preamble at 3328")
        if self.frames < 0:
            raise ImproperlyConfigured("frames must be 0 (derived) or positive")
        if self.i_gap < 1:
            raise ImproperlyConfigured("i_gap must be at least 1")
        if self.num_frames <= self.i_gap:
            raise ImproperlyConfigured(
                f"M must exceed i_gap (M={self.num_frames}, i_gap={self.i_gap})")
        if min(self.nx_tx, self.ny_tx, self.nx_rx, self.ny_rx) < 1:
            raise ImproperlyConfigured("array dimensions must be at least 1")
        if self.path_loss_exp <= 0:
            raise ImproperlyConfigured("path_loss_exp must be positive")
        if self.reference_range_m <= 0:
            raise ImproperlyConfigured("the vehicle reference point cannot sit on the array")
        if self.x_size_m <= 0 or self.y_size_m <= 0:
            raise ImproperlyConfigured("image plane sizes must be positive")
        if self.search_window < 0:
            raise ImproperlyConfigured("search_window must be 0 (derived) or positive")
        if not 0 <= self.reference_frame < self.num_frames:
            raise ImproperlyConfigured(
                f"cross_range_frame {self.cross_range_frame} is outside 0..{self.num_frames - 1}")
        for name, allowed in (('threshold_rule', THRESHOLD_RULES),
                              ('wrap_strategy', WRAP_STRATEGIES),
                              ('cross_range_mode', CROSS_RANGE_MODES),
                              ('frame_format', FRAME_FORMATS)):
            if getattr(self, name) not in allowed:
                raise ImproperlyConfigured(
                    f"{name} must be one of {', '.join(allowed)}, got {getattr(self, name)!r}")
        if self.seed < 0:
            raise ImproperlyConfigured("seed must be non-negative")
        return self

    def with_overrides(self, **overrides):
        return replace(self, **overrides).validate()

    def as_dict(self):
        return asdict(self)

    def to_text(self):
        """Emit every setting in declaration order; parse(to_text()) is a fixed point."""
        lines = ['# ISAR simulation run configuration']
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = 'true' if value else 'false'
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f'{f.name} = {value}')
        return '\n'.join(lines) + '\n'


_CASTS = {int: int, float: float, str: str, bool: _cast_bool,
          'int': int, 'float': float, 'str': str, 'bool': _cast_bool}


def field_names():
    return [f.name for f in fields(SimConfig)]


def cast_value(name, raw):
    """Cast a textual value for ``name``; ImproperlyConfigured on failure."""
    lookup = {f.name: f for f in fields(SimConfig)}
    if name not in lookup:
        raise ImproperlyConfigured(f"unknown setting {name!r}")
    try:
        return _CASTS[lookup[name].type](raw)
    except (TypeError, ValueError) as exc:
        raise ImproperlyConfigured(f"bad value for {name}: {raw!r} ({exc})") from exc


def load_config(path=None, **overrides):
    """
    Read a run configuration file. Missing keys take their defaults, so an
    empty file (or no file) gives the default scene. Keyword overrides win
    over the file and are cast like file values.
    """
    values = {}
    if path:
        path = Path(path)
        if not path.exists():
            raise ImproperlyConfigured(f"config file {path} does not exist")
        repository = RepositoryEnv(str(path))
        unknown = sorted(set(repository.data) - set(field_names()))
        if unknown:
            raise ImproperlyConfigured(f"unknown setting(s) in {path}: {', '.join(unknown)}")
        source = Config(repository)
        for f in fields(SimConfig):
            try:
                raw = source(f.name)
            except UndefinedValueError:
                continue
            values[f.name] = cast_value(f.name, raw)

    for name, raw in overrides.items():
        if raw is None:
            continue
        values[name] = raw if not isinstance(raw, str) else cast_value(name, raw)

    try:
        cfg = SimConfig(**values)
    except TypeError as exc:
        raise ImproperlyConfigured(str(exc)) from exc
    cfg.validate()
    logger.debug("Loaded configuration from %s", path or 'defaults')
    return cfg
