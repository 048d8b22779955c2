"""End-to-end acceptance suite.

Each test covers one numbered criterion at its stated tolerance and runtime
budget and prints one ``criterion N: PASS`` line (visible with ``pytest -s``
or ``-rA``); the pytest verdict per test is the pass/fail signal itself.
"""

import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from lisbackplane import beamforming as bf
from lisbackplane import netsim, rates
from lisbackplane.cli import main
from lisbackplane.config import SurfaceConfig, validate
from lisbackplane.rates import Scheme, ThroughputReport
from lisbackplane.topology import CENTRAL, build, reroute_on_failure

from conftest import surface

HEADLINE = """
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
"""


@contextmanager
def criterion(number: int, budget_s: float, label: str):
    start = time.perf_counter()
    yield
    elapsed = time.perf_counter() - start
    assert elapsed < budget_s, f"criterion {number} took {elapsed:.2f}s, budget {budget_s}s"
    print(f"criterion {number}: PASS ({elapsed:.2f}s) - {label}")


def csv_reports(output: str) -> list[ThroughputReport]:
    return [
        ThroughputReport.from_csv_row(line)
        for line in output.strip().splitlines()
        if line and not line.startswith(("#", "scheme,"))
    ]


def test_criterion_01_headline_central_rate(tmp_path, capsys):
    with criterion(1, 1.0, "1024-antenna central throughput, binary rendering"):
        cfg = tmp_path / "headline.cfg"
        cfg.write_text(HEADLINE)
        assert main(["rates", "--config", str(cfg)]) == 0
        out = capsys.readouterr().out
        row = csv_reports(out)[0]
        assert row.r_max_central == 409_600_000_000
        assert "381.47 Gib/s" in out
        assert abs(row.r_max_central / 2**30 - 381.4) / 381.4 < 1e-3


def test_criterion_02_backplane_power_band():
    with criterion(2, 1.0, "central-link power at 1 pJ/bit in the hundreds of mW"):
        cfg = validate(surface(antennas=1024, modules=256, terminals=32, chains=8, grid=(16, 16)))
        power = rates.backplane_power(rates.centralized_max(cfg), cfg.energy_per_bit)
        assert power == pytest.approx(0.4096)
        assert 0.1 < power < 1.0


def test_criterion_03_chained_closed_form_exhaustive():
    with criterion(3, 10.0, "chained aggregate closed form vs term-by-term sum"):
        element = 400_000_000
        limit_m, limit_n = 4096, 1024
        divisors = [[] for _ in range(limit_n + 1)]
        for d in range(1, limit_n + 1):
            for n in range(d, limit_n + 1, d):
                divisors[n].append(d)
        checked = 0
        for modules in range(1, limit_n + 1):
            for antennas in range(modules, limit_m + 1, modules):
                per_module = (antennas // modules) * element
                for chains in divisors[modules]:
                    depth = modules // chains
                    brute = chains * sum(level * per_module for level in range(1, depth + 1))
                    closed = rates.chained_aggregate_rate(antennas, modules, chains, element)
                    assert brute == closed, (antennas, modules, chains)
                    checked += 1
        assert checked > 100_000


def test_criterion_04_per_link_load_pattern():
    with criterion(4, 5.0, "depth-3 chain: 400/800/1200 Mb/s centralized, uniform distributed"):
        cfg = validate(
            surface(antennas=3, modules=3, terminals=1, beamf_bits=10, chains=1, grid=(1, 3))
        )
        chain = build(cfg, "chain")
        central = netsim.simulate_centralized(cfg, chain, duration_symbols=6)
        per_link = {
            key: int(Fraction(load.total_bits) * cfg.bandwidth_hz / 6)
            for key, load in central.loads.items()
        }
        assert per_link == {
            ("m1", "m2"): 400_000_000,
            ("m0", "m1"): 800_000_000,
            ("m0", CENTRAL): 1_200_000_000,
        }
        distributed = netsim.simulate_distributed(cfg, chain, duration_symbols=6)
        uniform = {
            int(Fraction(load.total_bits) * cfg.bandwidth_hz / 6)
            for load in distributed.loads.values()
        }
        assert uniform == {400_000_000}


def test_criterion_05_scaling_curves(tmp_path, capsys):
    with criterion(5, 5.0, "antenna sweep: four monotone curves, 64/3 ratio, distributed below"):
        sweep = tmp_path / "sweep.cfg"
        sweep.write_text(
            """
sweep_m = 64:4096:x2
ratio_m_over_k = 32
modules_per = 4
bandwidth_hz = 20000000
adc_bits = 10
oversampling = 1
beamf_bits = 15
chains = 10
"""
        )
        assert main(["scan", "--config", str(sweep)]) == 0
        rows = csv_reports(capsys.readouterr().out)
        antennas = sorted({r.antennas for r in rows})
        assert antennas == [64, 128, 256, 512, 1024, 2048, 4096]
        curves = {name: [] for name in ("cmax", "cagg", "dmax", "dagg")}
        for m in antennas:
            chained = next(r for r in rows if r.antennas == m and r.scheme is Scheme.CENTRALIZED_CHAINED)
            dist = next(r for r in rows if r.antennas == m and r.scheme is Scheme.DISTRIBUTED)
            assert Fraction(chained.r_max_central, dist.r_max_central) == Fraction(64, 3)
            assert dist.r_aggregate < chained.r_aggregate
            curves["cmax"].append(chained.r_max_central)
            curves["cagg"].append(chained.r_aggregate)
            curves["dmax"].append(dist.r_max_central)
            curves["dagg"].append(dist.r_aggregate)
        for values in curves.values():
            assert all(a < b for a, b in zip(values, values[1:]))


def test_criterion_06_distributed_equals_centralized(tmp_path, capsys):
    with criterion(6, 30.0, "in-network combining vs direct products, 50 seeds, 3 topologies"):
        cfg = tmp_path / "verify.cfg"
        cfg.write_text(
            """
antennas = 64
modules = 16
terminals = 8
bandwidth_hz = 20000000
adc_bits = 10
oversampling = 1
beamf_bits = 15
chains = 4
grid_rows = 4
grid_cols = 4
"""
        )
        worst = 0.0
        for seed in range(50):
            assert main(["verify", "--config", str(cfg), "--seed", str(seed), "--symbols", "4"]) == 0
            last = capsys.readouterr().out.strip().splitlines()[-1]
            worst = max(worst, float(last.split("=")[1]))
        assert worst < 1e-9


def test_criterion_07_simulation_matches_analytics():
    with criterion(7, 60.0, "simulated bits equal closed-form rates, randomized configs"):
        rng = np.random.default_rng(7)
        for kind in ("parallel", "chain", "mesh"):
            for scheme in ("centralized", "distributed"):
                for _ in range(20):
                    rows = int(rng.integers(1, 6))
                    cols = int(rng.integers(1, 6))
                    modules = rows * cols
                    chains = int(rng.choice([d for d in range(1, modules + 1) if modules % d == 0]))
                    cfg = validate(
                        surface(
                            antennas=int(rng.integers(1, 5)) * modules,
                            modules=modules,
                            terminals=int(rng.integers(1, 9)),
                            bandwidth_hz=int(rng.choice([1_000_000, 20_000_000, 50_000_000])),
                            adc_bits=int(rng.integers(1, 17)),
                            beamf_bits=int(rng.integers(1, 33)),
                            chains=chains,
                            grid=(rows, cols),
                        )
                    )
                    topo = build(cfg, kind)
                    duration = int(rng.integers(1, 11))
                    if scheme == "centralized":
                        result = netsim.simulate_centralized(cfg, topo, duration)
                    else:
                        result = netsim.simulate_distributed(cfg, topo, duration)
                    expected = netsim.expected_aggregate_rate(cfg, topo, scheme)
                    assert netsim.rates_agree(result, cfg, expected), (kind, scheme, cfg)


def test_criterion_08_buffer_alignment():
    with criterion(8, 30.0, "delay buffers align every aggregation, grids to 8x8"):
        for rows in range(1, 9):
            for cols in range(1, 9):
                modules = rows * cols
                cfg = validate(
                    surface(
                        antennas=2 * modules,
                        modules=modules,
                        terminals=2,
                        chains=1,
                        grid=(rows, cols),
                    )
                )
                for kind in ("parallel", "chain", "mesh"):
                    topo = build(cfg, kind)
                    result = netsim.simulate_distributed(cfg, topo, duration_symbols=3)
                    assert netsim.aggregation_misalignments(result) == [], (rows, cols, kind)


def test_criterion_09_mesh_failure_resilience():
    with criterion(9, 60.0, "every single internal-link failure survives, grids 2x2 to 6x6"):
        for rows in range(2, 7):
            for cols in range(2, 7):
                modules = rows * cols
                cfg = validate(
                    surface(
                        antennas=modules,
                        modules=modules,
                        terminals=2,
                        chains=1,
                        grid=(rows, cols),
                    )
                )
                topo = build(cfg, "mesh")
                internal = [key for key in topo.links if CENTRAL not in key]
                assert len(internal) == 2 * rows * cols - rows - cols
                expected_bits = 3 * modules * netsim.terminal_payload_bits(cfg)
                for key in internal:
                    rerouted = reroute_on_failure(topo, key)
                    assert set(rerouted.routes) == set(topo.routes)
                    result = netsim.inject_failure(cfg, topo, "distributed", 3, key, at_step=1)
                    assert result.delivered_symbols == 3
                    assert result.total_bits == expected_bits


def test_criterion_10_quantized_aggregation_error():
    with criterion(10, 60.0, "15-bit requantized uplink inside the Monte-Carlo bound"):
        # Bound 10*(full_scale/2^15)*sqrt(modules) validated beforehand with an
        # independent 2000-trial hop-by-hop model (worst case 0.57x the bound).
        cfg = validate(surface(antennas=32, modules=8, terminals=4, chains=2, grid=(2, 4)))
        full_scale = 96.0
        bound = 10.0 * (full_scale / 2**15) * np.sqrt(cfg.modules)
        trials = 0
        for kind in ("parallel", "chain", "mesh"):
            topo = build(cfg, kind)
            for seed in range(70):
                channel = bf.generate_channel(cfg.antennas, cfg.terminals, seed=seed)
                weights = bf.compute_weights(channel, bf.MRC)
                received = bf.transmit(
                    channel, bf.random_symbols(cfg.terminals, 4, seed=10_000 + seed)
                )
                modules = bf.make_module_states(cfg, weights)
                exact = bf.distributed_uplink(modules, received, topo)
                quantized = bf.distributed_uplink(
                    modules, received, topo, quantize_bits=15, full_scale=full_scale
                )
                error = float(np.max(np.abs(quantized.samples - exact.samples)))
                assert error < bound
                trials += 1
        assert trials >= 200
