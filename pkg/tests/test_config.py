from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from lisbackplane.config import (
    ConfigError,
    DivisibilityError,
    GeometryError,
    RangeError,
    SurfaceConfig,
    parse_config,
    validate,
)

from conftest import surface


def test_valid_config_passes_and_is_returned():
    cfg = surface(antennas=1024, modules=256, terminals=32, chains=8, grid=(16, 16))
    assert validate(cfg) is cfg


def test_modules_must_divide_antennas():
    cfg = surface(antennas=1024, modules=250, chains=10, grid=(10, 25))
    with pytest.raises(DivisibilityError):
        validate(cfg)


def test_chains_must_divide_modules():
    cfg = surface(antennas=1024, modules=256, chains=10, grid=(16, 16))
    with pytest.raises(DivisibilityError):
        validate(cfg)


def test_zero_terminals_rejected():
    with pytest.raises(RangeError):
        validate(surface(antennas=8, modules=8, terminals=0, chains=1, grid=(1, 8)))


@pytest.mark.parametrize(
    "override",
    [
        {"antennas": 0},
        {"adc_bits": 0},
        {"beamf_bits": -1},
        {"bandwidth_hz": 0},
        {"oversampling": Fraction(1, 2)},
        {"energy_per_bit": 0.0},
        {"module_pitch": -0.1},
    ],
)
def test_out_of_range_parameters(override):
    with pytest.raises(RangeError):
        validate(surface(**override))


def test_grid_must_match_module_count():
    with pytest.raises(GeometryError):
        validate(surface(grid=(4, 5)))


def test_cp_position_must_lie_on_grid():
    with pytest.raises(GeometryError):
        validate(surface(cp_position=(4, 0)))
    validate(surface(cp_position=(3, 3)))


@given(
    per_module=st.integers(1, 8),
    chains=st.integers(1, 4),
    depth=st.integers(1, 6),
    rows=st.integers(1, 6),
)
def test_validate_is_idempotent_on_accepted_configs(per_module, chains, depth, rows):
    modules = chains * depth * rows
    cfg = surface(
        antennas=per_module * modules,
        modules=modules,
        chains=chains,
        grid=(rows, chains * depth),
    )
    once = validate(cfg)
    assert validate(once) is once
    assert cfg.antennas_per_module * cfg.modules == cfg.antennas
    assert cfg.chain_length * cfg.chains == cfg.modules


CONFIG_TEXT = """
# surface under test
antennas = 1024
modules = 256
terminals = 32
bandwidth_hz = 20000000
adc_bits = 10
oversampling = 1
beamf_bits = 15
chains = 8
grid_rows = 16
grid_cols = 16
energy_pj_per_bit = 1.0
module_pitch_m = 0.1
"""


def test_parse_config_reads_every_key():
    cfg = parse_config(CONFIG_TEXT)
    assert cfg.antennas == 1024
    assert cfg.modules == 256
    assert cfg.terminals == 32
    assert cfg.bandwidth_hz == 20_000_000
    assert cfg.adc_bits == 10
    assert cfg.oversampling == 1
    assert cfg.beamf_bits == 15
    assert cfg.chains == 8
    assert cfg.grid == (16, 16)
    assert cfg.energy_per_bit == pytest.approx(1.0e-12)
    assert cfg.module_pitch == 0.1


def test_parse_config_defaults():
    text = "\n".join(
        line
        for line in CONFIG_TEXT.splitlines()
        if line and not line.startswith(("oversampling", "energy_pj", "module_pitch", "#"))
    )
    cfg = parse_config(text)
    assert cfg.oversampling == 1
    assert cfg.energy_per_bit == pytest.approx(1.0e-12)
    assert cfg.module_pitch == 0.1


def test_parse_config_energy_is_in_picojoules():
    cfg = parse_config(CONFIG_TEXT.replace("energy_pj_per_bit = 1.0", "energy_pj_per_bit = 2.5"))
    assert cfg.energy_per_bit == pytest.approx(2.5e-12)


def test_parse_config_fractional_oversampling():
    cfg = parse_config(CONFIG_TEXT.replace("oversampling = 1", "oversampling = 5/4"))
    assert cfg.oversampling == Fraction(5, 4)
    cfg = parse_config(CONFIG_TEXT.replace("oversampling = 1", "oversampling = 1.25"))
    assert cfg.oversampling == Fraction(5, 4)


def test_parse_config_cp_position():
    cfg = parse_config(CONFIG_TEXT + "cp_position = 0,15\n")
    assert cfg.cp_position == (0, 15)


@pytest.mark.parametrize(
    "mutation",
    [
        lambda t: t + "unknown_key = 3\n",
        lambda t: t.replace("antennas = 1024\n", ""),
        lambda t: t + "antennas = 512\n",  # duplicate
        lambda t: t.replace("adc_bits = 10", "adc_bits = ten"),
        lambda t: t.replace("grid_rows = 16", "grid_rows 16"),
    ],
)
def test_parse_config_rejects_malformed_input(mutation):
    with pytest.raises(ConfigError):
        parse_config(mutation(CONFIG_TEXT))
