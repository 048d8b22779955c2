"""Backplane interconnect modeling and distributed beamforming simulation
for large active antenna surfaces."""

from .beamforming import (
    ANTENNA,
    MRC,
    TERMINAL,
    ZF,
    BeamformingWeights,
    ChannelMatrix,
    DimensionError,
    ModuleState,
    PartitionError,
    RankError,
    SampleBlock,
    SingularMatrixError,
    add_noise,
    centralized_downlink,
    centralized_uplink,
    compute_weights,
    dft_pilots,
    distributed_downlink,
    distributed_uplink,
    estimate_channel,
    generate_channel,
    load_sample_block,
    make_module_states,
    per_subcarrier_process,
    quantize,
    random_symbols,
    save_sample_block,
    transmit,
)
from .config import (
    ConfigError,
    DivisibilityError,
    GeometryError,
    RangeError,
    SurfaceConfig,
    load_config,
    parse_config,
    validate,
)
from .netsim import (
    LinkLoad,
    PayloadKind,
    SimEvent,
    SimResult,
    aggregation_misalignments,
    compute_buffer_depths,
    expected_aggregate_rate,
    inject_failure,
    module_payload_bits,
    rates_agree,
    simulate_centralized,
    simulate_distributed,
    terminal_payload_bits,
)
from .rates import (
    Scheme,
    ThroughputReport,
    backplane_power,
    centralized_aggregate,
    centralized_aggregate_from_hops,
    centralized_max,
    chained_aggregate_rate,
    distributed_aggregate,
    distributed_max,
    per_element_rate,
    per_module_rate,
    report,
)
from .topology import (
    CENTRAL,
    DisconnectedError,
    Topology,
    TopologyError,
    TopologyKind,
    UnsupportedTopologyError,
    build,
    build_daisy_chains,
    build_fully_parallel,
    build_mesh,
    reroute_on_failure,
)

__version__ = "0.1.0"
