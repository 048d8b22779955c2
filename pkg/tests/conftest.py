import pytest

from lisbackplane.config import SurfaceConfig, validate


def surface(
    antennas=64,
    modules=16,
    terminals=8,
    bandwidth_hz=20_000_000,
    adc_bits=10,
    oversampling=1,
    beamf_bits=15,
    chains=4,
    grid=(4, 4),
    **kwargs,
) -> SurfaceConfig:
    """Valid small config unless overridden."""
    return SurfaceConfig(
        antennas=antennas,
        modules=modules,
        terminals=terminals,
        bandwidth_hz=bandwidth_hz,
        adc_bits=adc_bits,
        oversampling=oversampling,
        beamf_bits=beamf_bits,
        chains=chains,
        grid=grid,
        **kwargs,
    )


@pytest.fixture
def headline_config() -> SurfaceConfig:
    """The 1024-antenna, 20 MHz, 10-bit parameter set used throughout."""
    return validate(
        surface(antennas=1024, modules=256, terminals=32, chains=8, grid=(16, 16))
    )
