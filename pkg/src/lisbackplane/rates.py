"""Closed-form backplane throughput and energy calculators.

All rates are bits/s and are computed in exact rational arithmetic, so
results are plain ints whenever the inputs are integral. The parameter-level
functions accept raw values (no divisibility checks) so that analytic sweeps
can evaluate the chained closed form with a fractional chain depth; the
config-level wrappers validate first.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable

from .config import SurfaceConfig, validate


class Scheme(Enum):
    """Processing scheme a throughput report is computed for."""

    CENTRALIZED_PARALLEL = "CentralizedParallel"
    CENTRALIZED_CHAINED = "CentralizedChained"
    DISTRIBUTED = "DistributedBeamforming"


def _exact(value: Fraction) -> int | float:
    return int(value) if value.denominator == 1 else float(value)


def per_element_rate(
    bandwidth_hz: int | float, adc_bits: int, oversampling: int | Fraction = 1
) -> int | float:
    """Bits/s produced (or consumed) by one antenna element: twice the
    bandwidth times converter resolution times oversampling."""
    if bandwidth_hz <= 0 or adc_bits <= 0 or oversampling <= 0:
        raise ValueError("per-element rate requires positive arguments")
    return _exact(2 * Fraction(bandwidth_hz) * adc_bits * Fraction(oversampling))


def per_module_rate(config: SurfaceConfig) -> int | float:
    """Bits/s handled by one common module (its share of the elements)."""
    validate(config)
    rate = per_element_rate(config.bandwidth_hz, config.adc_bits, config.oversampling)
    return _exact(config.antennas_per_module * Fraction(rate))


def centralized_max(config: SurfaceConfig) -> int | float:
    """Peak rate crossing the central processor when every element's
    waveform is exchanged: antenna count times the per-element rate."""
    validate(config)
    rate = per_element_rate(config.bandwidth_hz, config.adc_bits, config.oversampling)
    return _exact(config.antennas * Fraction(rate))


def chained_aggregate_rate(
    antennas: int, modules: int | Fraction, chains: int, element_rate: int | float | Fraction
) -> int | float:
    """Total bits/s summed over all links of a chained centralized backplane.

    Along a chain the traffic at each hop is proportional to the number of
    modules behind it; summing the resulting arithmetic series over all
    chains collapses to ``antennas/2 * (depth + 1) * element_rate`` with
    depth = modules/chains. Evaluated as an exact rational so a fractional
    depth (analytic sweeps) costs no precision.
    """
    if antennas < 1 or modules < 1 or chains < 1:
        raise ValueError("antennas, modules, and chains must be >= 1")
    depth = Fraction(modules, chains)
    return _exact(Fraction(antennas) * (depth + 1) * Fraction(element_rate) / 2)


def centralized_aggregate(config: SurfaceConfig) -> int | float:
    """Aggregate bits/s over the whole backplane for chained centralized
    processing (equals :func:`centralized_max` when every module has its own
    chain)."""
    validate(config)
    rate = per_element_rate(config.bandwidth_hz, config.adc_bits, config.oversampling)
    return chained_aggregate_rate(config.antennas, config.modules, config.chains, rate)


def centralized_aggregate_from_hops(config: SurfaceConfig, hop_counts: Iterable[int]) -> int | float:
    """Aggregate bits/s for centralized processing over arbitrary routes.

    Each module's waveforms cross every link on its route, so the total is
    the per-module rate times the sum of route hop counts. Reduces to
    ``antennas * element_rate`` on a star and to the chained closed form on
    parallel chains.
    """
    validate(config)
    total_hops = sum(hop_counts)
    return _exact(Fraction(per_module_rate(config)) * total_hops)


def distributed_max_rate(terminals: int, bandwidth_hz: int | float, beamf_bits: int) -> int | float:
    """Peak per-link bits/s at the central processor with in-network
    combining: one I/Q stream per terminal, independent of antenna count."""
    if terminals < 1 or bandwidth_hz <= 0 or beamf_bits < 1:
        raise ValueError("distributed max rate requires positive arguments")
    return _exact(2 * terminals * Fraction(bandwidth_hz) * beamf_bits)


def distributed_max(config: SurfaceConfig) -> int | float:
    validate(config)
    return distributed_max_rate(config.terminals, config.bandwidth_hz, config.beamf_bits)


def distributed_aggregate_rate(
    modules: int, terminals: int, bandwidth_hz: int | float, beamf_bits: int
) -> int | float:
    """Total bits/s to carry every terminal stream to/from every module."""
    if modules < 1:
        raise ValueError("modules must be >= 1")
    return _exact(modules * Fraction(distributed_max_rate(terminals, bandwidth_hz, beamf_bits)))


def distributed_aggregate(config: SurfaceConfig) -> int | float:
    validate(config)
    return distributed_aggregate_rate(
        config.modules, config.terminals, config.bandwidth_hz, config.beamf_bits
    )


def backplane_power(r_aggregate: int | float, energy_per_bit: float) -> float:
    """Watts burned moving ``r_aggregate`` bits/s at ``energy_per_bit`` J/bit."""
    if r_aggregate < 0 or energy_per_bit < 0:
        raise ValueError("power requires non-negative inputs")
    return float(r_aggregate) * energy_per_bit


def format_gbps(bits_per_s: int | float) -> str:
    """Decimal rendering, 1 Gb/s = 1e9 bits/s."""
    return f"{bits_per_s / 1e9:.3f} Gb/s"


def format_gibps(bits_per_s: int | float) -> str:
    """Binary rendering, 1 Gib/s = 2**30 bits/s."""
    return f"{bits_per_s / 2**30:.2f} Gib/s"


CSV_HEADER = (
    "scheme,M,N,K,B_hz,n_res,n_oversamp,n_bit_beamf,n_ch,"
    "r_element,r_module,r_max_central,r_aggregate,power_w"
)


@dataclass(frozen=True)
class ThroughputReport:
    """One scheme's rates and backplane power for a parameter set."""

    scheme: Scheme
    antennas: int
    modules: int
    terminals: int
    bandwidth_hz: int | float
    adc_bits: int
    oversampling: int | Fraction
    beamf_bits: int
    chains: int
    r_element: int | float
    r_module: int | float
    r_max_central: int | float
    r_aggregate: int | float
    power_w: float

    def to_csv_row(self) -> str:
        fields = (
            self.scheme.value,
            self.antennas,
            self.modules,
            self.terminals,
            self.bandwidth_hz,
            self.adc_bits,
            Fraction(self.oversampling),
            self.beamf_bits,
            self.chains,
            self.r_element,
            self.r_module,
            self.r_max_central,
            self.r_aggregate,
            repr(self.power_w),
        )
        return ",".join(str(f) for f in fields)

    @classmethod
    def from_csv_row(cls, row: str) -> "ThroughputReport":
        parts = row.strip().split(",")
        if len(parts) != 14:
            raise ValueError(f"expected 14 CSV fields, got {len(parts)}")

        def num(text: str) -> int | float:
            value = float(text)
            return int(value) if value.is_integer() else value

        oversamp = Fraction(parts[6])
        return cls(
            scheme=Scheme(parts[0]),
            antennas=int(parts[1]),
            modules=int(parts[2]),
            terminals=int(parts[3]),
            bandwidth_hz=num(parts[4]),
            adc_bits=int(parts[5]),
            oversampling=int(oversamp) if oversamp.denominator == 1 else oversamp,
            beamf_bits=int(parts[7]),
            chains=int(parts[8]),
            r_element=num(parts[9]),
            r_module=num(parts[10]),
            r_max_central=num(parts[11]),
            r_aggregate=num(parts[12]),
            power_w=float(parts[13]),
        )


def report_from_params(
    scheme: Scheme,
    antennas: int,
    modules: int,
    terminals: int,
    bandwidth_hz: int | float,
    adc_bits: int,
    oversampling: int | Fraction,
    beamf_bits: int,
    chains: int,
    energy_per_bit: float = 1.0e-12,
) -> ThroughputReport:
    """Assemble a report from raw parameters (no divisibility checks)."""
    element = per_element_rate(bandwidth_hz, adc_bits, oversampling)
    module = _exact(Fraction(antennas, modules) * Fraction(element))
    if scheme is Scheme.DISTRIBUTED:
        r_max = distributed_max_rate(terminals, bandwidth_hz, beamf_bits)
        r_agg = distributed_aggregate_rate(modules, terminals, bandwidth_hz, beamf_bits)
    else:
        r_max = _exact(antennas * Fraction(element))
        if scheme is Scheme.CENTRALIZED_PARALLEL:
            r_agg = r_max
        else:
            r_agg = chained_aggregate_rate(antennas, modules, chains, element)
    return ThroughputReport(
        scheme=scheme,
        antennas=antennas,
        modules=modules,
        terminals=terminals,
        bandwidth_hz=bandwidth_hz,
        adc_bits=adc_bits,
        oversampling=oversampling,
        beamf_bits=beamf_bits,
        chains=chains,
        r_element=element,
        r_module=module,
        r_max_central=r_max,
        r_aggregate=r_agg,
        power_w=backplane_power(r_agg, energy_per_bit),
    )


def report(config: SurfaceConfig, scheme: Scheme) -> ThroughputReport:
    """Fully populated report for a validated config under one scheme."""
    validate(config)
    return report_from_params(
        scheme,
        config.antennas,
        config.modules,
        config.terminals,
        config.bandwidth_hz,
        config.adc_bits,
        config.oversampling,
        config.beamf_bits,
        config.chains,
        config.energy_per_bit,
    )
