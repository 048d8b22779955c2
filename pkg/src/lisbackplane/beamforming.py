"""Sample-level linear beamforming with centralized and in-network execution.

Arrays carry a leading subcarrier axis throughout: channels and weights are
``(subcarriers, antennas, terminals)``, sample blocks are
``(subcarriers, dim, symbols)`` where ``dim`` is the antenna count in the
antenna domain and the terminal count in the terminal domain. Subcarriers
never mix: every operation factors over that axis.

The distributed path splits the weight matrix across the common modules of a
topology, forms per-module partial combining sums, and adds them pairwise
along the module routes (children before parents, in module-index order), so
aggregation is bit-for-bit reproducible. Partial sums can optionally be
re-quantized at every hop to model finite-resolution backplane transport.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SurfaceConfig, validate
from .topology import CENTRAL, Topology, TopologyError, module_index, module_node

ANTENNA = "antenna"
TERMINAL = "terminal"

MRC = "mrc"
ZF = "zf"


class DimensionError(ValueError):
    """Array dimensions do not match the operation's contract."""


class RankError(ValueError):
    """Pilot matrix does not have full row rank."""


class SingularMatrixError(ValueError):
    """Channel is rank-deficient; zero-forcing weights do not exist."""


class PartitionError(ValueError):
    """Module antenna ranges overlap or do not cover every antenna."""


@dataclass(frozen=True)
class ChannelMatrix:
    """Complex gains between every antenna and terminal, per subcarrier."""

    gains: np.ndarray  # (subcarriers, antennas, terminals)

    def __post_init__(self):
        if self.gains.ndim != 3:
            raise DimensionError(f"channel must be 3-D, got shape {self.gains.shape}")
        if not np.all(np.isfinite(self.gains)):
            raise ValueError("channel gains must be finite")

    @property
    def subcarriers(self) -> int:
        return self.gains.shape[0]

    @property
    def antennas(self) -> int:
        return self.gains.shape[1]

    @property
    def terminals(self) -> int:
        return self.gains.shape[2]


@dataclass(frozen=True)
class BeamformingWeights:
    """Per-element combining weights, one column per terminal."""

    entries: np.ndarray  # (subcarriers, antennas, terminals)
    method: str

    @property
    def subcarriers(self) -> int:
        return self.entries.shape[0]

    @property
    def antennas(self) -> int:
        return self.entries.shape[1]

    @property
    def terminals(self) -> int:
        return self.entries.shape[2]


@dataclass
class SampleBlock:
    """A batch of complex samples plus its domain and quantization tag.

    ``bits`` is None for exact (unquantized) samples; ``saturated`` counts
    clipped real/imag components accumulated by quantization steps.
    """

    samples: np.ndarray  # (subcarriers, dim, symbols)
    domain: str
    bits: int | None = None
    saturated: int = 0

    def __post_init__(self):
        if self.domain not in (ANTENNA, TERMINAL):
            raise ValueError(f"unknown sample domain {self.domain!r}")
        if self.samples.ndim != 3:
            raise DimensionError(f"sample block must be 3-D, got shape {self.samples.shape}")

    @property
    def subcarriers(self) -> int:
        return self.samples.shape[0]

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    @property
    def symbol_count(self) -> int:
        return self.samples.shape[2]


@dataclass
class ModuleState:
    """One common module's slice of the array and its runtime state."""

    node: str
    antenna_start: int
    antenna_stop: int
    weights: np.ndarray  # (subcarriers, local antennas, terminals)
    buffer_depth: int = 0
    accumulator: np.ndarray | None = field(default=None, repr=False)


def generate_channel(antennas: int, terminals: int, subcarriers: int = 1, seed: int = 0) -> ChannelMatrix:
    """Unit-variance circularly-symmetric Gaussian channel, seeded."""
    if terminals < 1 or antennas < terminals:
        raise DimensionError(f"need antennas >= terminals >= 1, got {antennas}, {terminals}")
    rng = np.random.default_rng(seed)
    shape = (subcarriers, antennas, terminals)
    gains = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return ChannelMatrix(gains)


def dft_pilots(terminals: int, length: int | None = None) -> SampleBlock:
    """Orthogonal unit-modulus pilot sequences (rows of a DFT matrix)."""
    length = terminals if length is None else length
    if length < terminals:
        raise DimensionError(f"pilot length {length} shorter than terminal count {terminals}")
    k = np.arange(terminals)[:, None]
    n = np.arange(length)[None, :]
    pilots = np.exp(-2j * np.pi * k * n / length)
    return SampleBlock(pilots[None, :, :], TERMINAL)


def random_symbols(
    terminals: int, symbols: int, subcarriers: int = 1, seed: int = 0
) -> SampleBlock:
    """Unit-power QPSK terminal symbols, seeded."""
    rng = np.random.default_rng(seed)
    phases = rng.integers(0, 4, (subcarriers, terminals, symbols))
    return SampleBlock(np.exp(1j * (np.pi / 4 + np.pi / 2 * phases)), TERMINAL)


def add_noise(block: SampleBlock, snr_db: float, seed: int = 0) -> SampleBlock:
    """Additive complex Gaussian noise at the given SNR vs the block's own
    mean sample power."""
    rng = np.random.default_rng(seed)
    power = float(np.mean(np.abs(block.samples) ** 2))
    sigma2 = power / 10 ** (snr_db / 10)
    noise = np.sqrt(sigma2 / 2) * (
        rng.standard_normal(block.samples.shape) + 1j * rng.standard_normal(block.samples.shape)
    )
    return SampleBlock(block.samples + noise, block.domain, block.bits, block.saturated)


def transmit(channel: ChannelMatrix, terminal_block: SampleBlock) -> SampleBlock:
    """Propagate terminal symbols through the channel: antenna-domain output."""
    if terminal_block.domain != TERMINAL:
        raise DimensionError("transmit expects a terminal-domain block")
    if channel.subcarriers != terminal_block.subcarriers:
        raise DimensionError("subcarrier count mismatch between channel and block")
    if channel.terminals != terminal_block.dim:
        raise DimensionError("terminal count mismatch between channel and block")
    return SampleBlock(channel.gains @ terminal_block.samples, ANTENNA)


def estimate_channel(pilots: SampleBlock, received: SampleBlock) -> ChannelMatrix:
    """Least-squares channel estimate from known pilots.

    Solves ``received = H @ pilots`` in the LS sense via the normal
    equations; with orthogonal pilots and no noise this is exact. The pilot
    block may carry a single subcarrier to be shared by all received
    subcarriers.
    """
    if pilots.domain != TERMINAL or received.domain != ANTENNA:
        raise DimensionError("estimate_channel expects terminal pilots and antenna samples")
    if pilots.symbol_count != received.symbol_count:
        raise DimensionError("pilot and received symbol counts differ")
    if pilots.subcarriers not in (1, received.subcarriers):
        raise DimensionError("pilot subcarrier count must be 1 or match the received block")
    terminals = pilots.dim
    estimates = np.empty(
        (received.subcarriers, received.dim, terminals), dtype=np.complex128
    )
    for s in range(received.subcarriers):
        p = pilots.samples[0 if pilots.subcarriers == 1 else s]
        if np.linalg.matrix_rank(p) < terminals:
            raise RankError("pilot matrix is rank-deficient; terminals are not separable")
        gram = p @ p.conj().T
        rhs = received.samples[s] @ p.conj().T
        estimates[s] = np.linalg.solve(gram.T, rhs.T).T
    return ChannelMatrix(estimates)


def compute_weights(channel: ChannelMatrix, method: str = ZF) -> BeamformingWeights:
    """Combining weights: matched filter (``mrc``) or zero-forcing (``zf``).

    Zero-forcing solves ``W = H (H^H H)^-1`` so that ``W^H H`` is the
    identity; a rank-deficient channel raises :class:`SingularMatrixError`.
    """
    if method == MRC:
        return BeamformingWeights(channel.gains.copy(), MRC)
    if method != ZF:
        raise ValueError(f"unknown beamforming method {method!r}")
    terminals = channel.terminals
    entries = np.empty_like(channel.gains)
    for s in range(channel.subcarriers):
        h = channel.gains[s]
        if np.linalg.matrix_rank(h) < terminals:
            raise SingularMatrixError("channel columns are linearly dependent")
        gram = h.conj().T @ h
        entries[s] = np.linalg.solve(gram.T, h.T).T
    return BeamformingWeights(entries, ZF)


def _check_uplink_dims(weights: BeamformingWeights, block: SampleBlock):
    if block.domain != ANTENNA:
        raise DimensionError("uplink combining expects an antenna-domain block")
    if weights.subcarriers != block.subcarriers:
        raise DimensionError("subcarrier count mismatch between weights and block")
    if weights.antennas != block.dim:
        raise DimensionError(
            f"weights cover {weights.antennas} antennas but block has {block.dim}"
        )


def centralized_uplink(weights: BeamformingWeights, block: SampleBlock) -> SampleBlock:
    """Apply the full combining matrix at one place: ``W^H y`` per subcarrier."""
    _check_uplink_dims(weights, block)
    out = np.einsum("smk,smt->skt", weights.entries.conj(), block.samples)
    return SampleBlock(out, TERMINAL)


def centralized_downlink(weights: BeamformingWeights, block: SampleBlock) -> SampleBlock:
    """Precode terminal streams for every antenna: ``W x`` per subcarrier."""
    if block.domain != TERMINAL:
        raise DimensionError("downlink precoding expects a terminal-domain block")
    if weights.subcarriers != block.subcarriers:
        raise DimensionError("subcarrier count mismatch between weights and block")
    if weights.terminals != block.dim:
        raise DimensionError(
            f"weights serve {weights.terminals} terminals but block has {block.dim}"
        )
    out = np.einsum("smk,skt->smt", weights.entries, block.samples)
    return SampleBlock(out, ANTENNA)


def make_module_states(config: SurfaceConfig, weights: BeamformingWeights) -> list[ModuleState]:
    """Split the weight rows into contiguous per-module antenna ranges."""
    validate(config)
    if weights.antennas != config.antennas:
        raise DimensionError(
            f"weights cover {weights.antennas} antennas, config has {config.antennas}"
        )
    per = config.antennas_per_module
    return [
        ModuleState(
            node=module_node(i),
            antenna_start=i * per,
            antenna_stop=(i + 1) * per,
            weights=weights.entries[:, i * per : (i + 1) * per, :],
        )
        for i in range(config.modules)
    ]


def _check_partition(modules: list[ModuleState], antennas: int):
    ordered = sorted(modules, key=lambda m: m.antenna_start)
    expected = 0
    for m in ordered:
        if m.antenna_start != expected or m.antenna_stop <= m.antenna_start:
            raise PartitionError(
                f"module {m.node} covers [{m.antenna_start}, {m.antenna_stop}), "
                f"expected start {expected}"
            )
        expected = m.antenna_stop
    if expected != antennas:
        raise PartitionError(f"module ranges cover {expected} antennas, block has {antennas}")


def _aggregation_order(modules: list[ModuleState], topology: Topology):
    """Parents/children maps plus a children-before-parents visit order."""
    if topology.modules != len(modules):
        raise TopologyError(
            f"topology routes {topology.modules} modules, got {len(modules)} module states"
        )
    parent: dict[str, str] = {}
    for m in modules:
        route = topology.routes.get(m.node)
        if route is None:
            raise TopologyError(f"module {m.node} has no route in the topology")
        parent[m.node] = route[1]
    children: dict[str, list[str]] = {}
    for node in sorted(parent, key=module_index):
        children.setdefault(parent[node], []).append(node)
    order = sorted(parent, key=lambda n: (-topology.hops(n), module_index(n)))
    return parent, children, order


def _quantize_array(values: np.ndarray, bits: int, full_scale: float):
    """Uniform midrise quantization of real and imaginary parts.

    Components at or beyond +/- full_scale clip to the outermost code; the
    clip count is returned alongside the quantized array.
    """
    step = 2.0 * full_scale / (1 << bits)
    top = full_scale - step / 2

    def component(x):
        clipped = int(np.count_nonzero((x >= full_scale) | (x < -full_scale)))
        return np.clip((np.floor(x / step) + 0.5) * step, -top, top), clipped

    re, clipped_re = component(values.real)
    im, clipped_im = component(values.imag)
    return re + 1j * im, clipped_re + clipped_im


def quantize(block: SampleBlock, bits: int, full_scale: float) -> SampleBlock:
    """Quantize a block's real and imaginary parts to ``bits`` each.

    The in-range error per component is at most ``full_scale / 2**bits``;
    clipping is silent but counted in the returned block's ``saturated``.
    """
    if bits < 1:
        raise ValueError(f"bits must be >= 1, got {bits}")
    if full_scale <= 0:
        raise ValueError(f"full_scale must be > 0, got {full_scale}")
    values, clipped = _quantize_array(block.samples, bits, full_scale)
    return SampleBlock(values, block.domain, bits, block.saturated + clipped)


def distributed_uplink(
    modules: list[ModuleState],
    block: SampleBlock,
    topology: Topology,
    quantize_bits: int | None = None,
    full_scale: float = 1.0,
) -> SampleBlock:
    """Combine uplink samples module-by-module along the topology routes.

    Each module forms its local terminal-domain partial sum, adds its
    children's sums, optionally re-quantizes, and forwards one K-vector per
    symbol toward the processor. Unquantized, the result equals
    :func:`centralized_uplink` up to floating-point summation order.
    """
    if block.domain != ANTENNA:
        raise DimensionError("distributed uplink expects an antenna-domain block")
    _check_partition(modules, block.dim)
    parent, children, order = _aggregation_order(modules, topology)

    by_node = {m.node: m for m in modules}
    terminals = modules[0].weights.shape[2]
    saturated = block.saturated
    sums: dict[str, np.ndarray] = {}
    for node in order:
        m = by_node[node]
        if m.weights.shape[0] != block.subcarriers:
            raise DimensionError("module weights and block disagree on subcarriers")
        local = np.einsum(
            "sak,sat->skt",
            m.weights.conj(),
            block.samples[:, m.antenna_start : m.antenna_stop, :],
        )
        for child in children.get(node, ()):
            local = local + sums[child]
        if quantize_bits is not None:
            local, clipped = _quantize_array(local, quantize_bits, full_scale)
            saturated += clipped
        sums[node] = local
        m.accumulator = local

    total = np.zeros((block.subcarriers, terminals, block.symbol_count), dtype=np.complex128)
    for head in children.get(CENTRAL, ()):
        total = total + sums[head]
    return SampleBlock(total, TERMINAL, quantize_bits, saturated)


def distributed_downlink(
    modules: list[ModuleState], block: SampleBlock, topology: Topology
) -> SampleBlock:
    """Broadcast terminal streams along reversed routes; each module precodes
    only its own antenna rows. Concatenation equals the centralized product."""
    if block.domain != TERMINAL:
        raise DimensionError("distributed downlink expects a terminal-domain block")
    _aggregation_order(modules, topology)  # validates routing
    antennas = max(m.antenna_stop for m in modules)
    _check_partition(modules, antennas)
    out = np.empty((block.subcarriers, antennas, block.symbol_count), dtype=np.complex128)
    for m in modules:
        if m.weights.shape[2] != block.dim:
            raise DimensionError("module weights and block disagree on terminals")
        out[:, m.antenna_start : m.antenna_stop, :] = np.einsum(
            "sak,skt->sat", m.weights, block.samples
        )
    return SampleBlock(out, ANTENNA)


def per_subcarrier_process(
    weights: BeamformingWeights,
    block: SampleBlock,
    modules: list[ModuleState] | None = None,
    topology: Topology | None = None,
    direction: str = "uplink",
    quantize_bits: int | None = None,
    full_scale: float = 1.0,
) -> SampleBlock:
    """Run uplink or downlink processing one subcarrier at a time.

    Subcarriers are handled in isolation, so the output is identical to
    running each subcarrier as its own single-subcarrier block. ``modules``
    plus ``topology`` selects the distributed path; otherwise centralized.
    """
    if weights.subcarriers != block.subcarriers:
        raise DimensionError(
            f"weights carry {weights.subcarriers} subcarriers, block has {block.subcarriers}"
        )
    if direction not in ("uplink", "downlink"):
        raise ValueError(f"unknown direction {direction!r}")
    outputs = []
    saturated = 0
    bits = block.bits
    for s in range(block.subcarriers):
        sub_block = SampleBlock(block.samples[s : s + 1], block.domain, block.bits)
        if modules is None:
            w = BeamformingWeights(weights.entries[s : s + 1], weights.method)
            if direction == "uplink":
                result = centralized_uplink(w, sub_block)
            else:
                result = centralized_downlink(w, sub_block)
        else:
            sliced = [
                ModuleState(m.node, m.antenna_start, m.antenna_stop, m.weights[s : s + 1])
                for m in modules
            ]
            if direction == "uplink":
                result = distributed_uplink(
                    sliced, sub_block, topology, quantize_bits=quantize_bits, full_scale=full_scale
                )
                bits = result.bits
            else:
                result = distributed_downlink(sliced, sub_block, topology)
        saturated += result.saturated
        outputs.append(result.samples)
    merged = np.concatenate(outputs, axis=0)
    domain = TERMINAL if direction == "uplink" else ANTENNA
    return SampleBlock(merged, domain, bits, saturated)


SAMPLE_MAGIC = b"IQSB"


def save_sample_block(block: SampleBlock, path: str | Path) -> None:
    """Write a block as little-endian interleaved I/Q float64.

    Layout: 16-byte header (4-byte magic, uint32 dim, uint32 symbol count,
    uint32 subcarrier count) followed by the samples in C order with each
    complex value stored as consecutive real and imaginary float64s.
    """
    header = SAMPLE_MAGIC + struct.pack(
        "<III", block.dim, block.symbol_count, block.subcarriers
    )
    payload = np.ascontiguousarray(block.samples, dtype="<c16").tobytes()
    Path(path).write_bytes(header + payload)


def load_sample_block(path: str | Path, domain: str = ANTENNA) -> SampleBlock:
    """Read a block written by :func:`save_sample_block`."""
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != SAMPLE_MAGIC:
        raise ValueError(f"{path}: not a sample block file")
    dim, symbols, subcarriers = struct.unpack("<III", raw[4:16])
    expected = subcarriers * dim * symbols
    samples = np.frombuffer(raw[16:], dtype="<c16")
    if samples.size != expected:
        raise ValueError(f"{path}: expected {expected} samples, found {samples.size}")
    return SampleBlock(samples.reshape(subcarriers, dim, symbols).copy(), domain)
