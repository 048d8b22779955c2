"""Surface configuration: the parameter set shared by every other module.

A deployment is described by its antenna count, the grid of common modules
driving those antennas, the served-terminal population, converter settings,
and backplane link parameters. Counts are kept as exact integers so that
every derived bit rate stays exact; the oversampling factor may be any
rational >= 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path


class ConfigError(ValueError):
    """Base class for invalid surface configurations."""


class RangeError(ConfigError):
    """A parameter lies outside its allowed range."""


class DivisibilityError(ConfigError):
    """An integer-divisibility requirement is violated."""


class GeometryError(ConfigError):
    """The module grid is inconsistent with the module count."""


@dataclass(frozen=True)
class SurfaceConfig:
    """Static description of one surface deployment.

    ``grid`` is the physical (rows, cols) arrangement of the common modules;
    ``cp_position`` optionally pins the central processor to a grid cell
    (star center, mesh attachment point). Immutable once validated, so it is
    safe to share across concurrent readers.
    """

    antennas: int
    modules: int
    terminals: int
    bandwidth_hz: int | float
    adc_bits: int
    oversampling: int | Fraction
    beamf_bits: int
    chains: int
    grid: tuple[int, int]
    energy_per_bit: float = 1.0e-12
    module_pitch: float = 0.1
    cp_position: tuple[int, int] | None = None

    @property
    def antennas_per_module(self) -> int:
        return self.antennas // self.modules

    @property
    def chain_length(self) -> int:
        """Number of modules strung in series on each daisy-chain."""
        return self.modules // self.chains


def validate(config: SurfaceConfig) -> SurfaceConfig:
    """Check every structural constraint and return the config unchanged.

    Raises :class:`RangeError` for non-positive parameters,
    :class:`DivisibilityError` when the module count does not divide the
    antenna count or the chain count does not divide the module count, and
    :class:`GeometryError` when the grid does not multiply out to the module
    count. Idempotent: a config that passes once always passes again.
    """
    counts = (
        ("antennas", config.antennas),
        ("modules", config.modules),
        ("terminals", config.terminals),
        ("adc_bits", config.adc_bits),
        ("beamf_bits", config.beamf_bits),
        ("chains", config.chains),
    )
    for name, value in counts:
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise RangeError(f"{name} must be a positive integer, got {value!r}")
    if config.bandwidth_hz <= 0:
        raise RangeError(f"bandwidth_hz must be > 0, got {config.bandwidth_hz!r}")
    if config.oversampling < 1:
        raise RangeError(f"oversampling must be >= 1, got {config.oversampling!r}")
    if config.energy_per_bit <= 0:
        raise RangeError(f"energy_per_bit must be > 0, got {config.energy_per_bit!r}")
    if config.module_pitch <= 0:
        raise RangeError(f"module_pitch must be > 0, got {config.module_pitch!r}")
    if config.antennas % config.modules:
        raise DivisibilityError(
            f"modules ({config.modules}) must divide antennas ({config.antennas})"
        )
    if config.modules % config.chains:
        raise DivisibilityError(
            f"chains ({config.chains}) must divide modules ({config.modules})"
        )
    rows, cols = config.grid
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise RangeError(f"grid dimensions must be positive integers, got {config.grid!r}")
    if rows * cols != config.modules:
        raise GeometryError(
            f"grid {rows}x{cols} holds {rows * cols} modules, expected {config.modules}"
        )
    if config.cp_position is not None:
        r, c = config.cp_position
        if not (0 <= r < rows and 0 <= c < cols):
            raise GeometryError(f"cp_position {config.cp_position} outside grid {rows}x{cols}")
    return config


# Text-file keys, one ``key = value`` per line. Energy is given in pJ/bit on
# disk and stored in J/bit.
_REQUIRED_KEYS = (
    "antennas",
    "modules",
    "terminals",
    "bandwidth_hz",
    "adc_bits",
    "beamf_bits",
    "chains",
    "grid_rows",
    "grid_cols",
)
_OPTIONAL_KEYS = ("oversampling", "energy_pj_per_bit", "module_pitch_m", "cp_position")


def parse_key_values(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blanks ignored."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {raw!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def _int(key: str, text: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _number(key: str, text: str) -> int | float:
    """Integer when the value is integral (keeps rate math exact)."""
    try:
        value = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    return int(value) if value.is_integer() else value


def _fraction(key: str, text: str) -> int | Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: expected a rational number, got {text!r}") from None
    return int(value) if value.denominator == 1 else value


def config_from_values(values: dict[str, str]) -> SurfaceConfig:
    """Build and validate a :class:`SurfaceConfig` from parsed key/values."""
    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_KEYS)
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = [k for k in _REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing config keys: {', '.join(missing)}")

    cp_position = None
    if "cp_position" in values:
        parts = values["cp_position"].split(",")
        if len(parts) != 2:
            raise ConfigError(f"cp_position: expected 'row,col', got {values['cp_position']!r}")
        cp_position = (_int("cp_position", parts[0]), _int("cp_position", parts[1]))

    config = SurfaceConfig(
        antennas=_int("antennas", values["antennas"]),
        modules=_int("modules", values["modules"]),
        terminals=_int("terminals", values["terminals"]),
        bandwidth_hz=_number("bandwidth_hz", values["bandwidth_hz"]),
        adc_bits=_int("adc_bits", values["adc_bits"]),
        oversampling=_fraction("oversampling", values.get("oversampling", "1")),
        beamf_bits=_int("beamf_bits", values["beamf_bits"]),
        chains=_int("chains", values["chains"]),
        grid=(_int("grid_rows", values["grid_rows"]), _int("grid_cols", values["grid_cols"])),
        energy_per_bit=float(values.get("energy_pj_per_bit", "1.0")) * 1.0e-12,
        module_pitch=float(values.get("module_pitch_m", "0.1")),
        cp_position=cp_position,
    )
    return validate(config)


def parse_config(text: str) -> SurfaceConfig:
    return config_from_values(parse_key_values(text))


def load_config(path: str | Path) -> SurfaceConfig:
    return parse_config(Path(path).read_text())
