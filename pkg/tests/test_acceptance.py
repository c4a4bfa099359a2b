"""End-to-end acceptance checks on the full production study grid.

Runs the complete two-network, four-architecture, three-scenario, ten-seed
study once with shipped defaults and validates the headline outcomes: power
ordering between architectures, savings bands, module-count reduction,
optical-layer invariance, traffic monotonicity, determinism, and closeness to
the brute-force optimum on small instances. One summary line per check is
printed in the terminal summary.
"""

import itertools
import time

import pytest

import conftest
from helpers import toy_instance
from ipowdm.cli import load_named_topology, main
from ipowdm.dimensioning import network_cost
from ipowdm.experiment import ExperimentConfig, average_rows, run_experiment, run_single
from ipowdm.oracle import (
    Infeasible,
    exhaustive_min_channel_split,
    exhaustive_min_cost_provision,
    exhaustive_regen_min,
)
from ipowdm.rmsa import ARCH_NAMES, provision_all
from ipowdm.traffic import load_scenario
from ipowdm.transceiver import (
    DEFAULT_CATALOG,
    LinkExceedsReach,
    NoFeasibleMode,
    plan_regeneration,
    select_modes_min_channels,
)

TOPOLOGIES = ("j14", "g17")
SCENARIOS = ("TS1", "TS2", "TS3")
CELLS = list(itertools.product(TOPOLOGIES, SCENARIOS))
BYPASS_ARCHS = ("TrIP", "TrZR", "TrIPandZR")


def record(label: str, passed: bool, detail: str = ""):
    suffix = f"  [{detail}]" if detail else ""
    conftest.ACCEPTANCE_LINES.append(
        f"{label}: {'PASS' if passed else 'FAIL'}{suffix}"
    )
    assert passed, f"{label}{suffix}"


@pytest.fixture(scope="module")
def grid():
    cfg = ExperimentConfig(
        topologies=[load_named_topology(t) for t in TOPOLOGIES],
        scenarios=[load_scenario(s) for s in SCENARIOS],
    )
    t0 = time.time()
    rows = run_experiment(cfg)
    elapsed = time.time() - t0
    avg = {(e["topology"], e["arch"], e["scenario"]): e for e in average_rows(rows)}
    return rows, avg, elapsed


def cell(avg, topo, scen, arch):
    return avg[(topo, arch, scen)]


def test_total_power_ordering(grid):
    _, avg, _ = grid
    ok = all(
        cell(avg, t, s, "OpIP")["power_total"]
        > max(cell(avg, t, s, x)["power_total"] for x in BYPASS_ARCHS)
        and cell(avg, t, s, "TrIPandZR")["power_total"]
        <= min(cell(avg, t, s, x)["power_total"] for x in ("TrIP", "TrZR"))
        for t, s in CELLS
    )
    record("total power: opaque highest, merged-regen lowest", ok)


def test_grid_runtime(grid):
    _, _, elapsed = grid
    record("full 240-run study under 5 minutes", elapsed < 300, f"{elapsed:.1f}s")


def test_bypass_total_power_saving_band(grid):
    _, avg, _ = grid
    vals = [
        100.0
        * (cell(avg, t, s, "OpIP")["power_total"] - cell(avg, t, s, "TrIP")["power_total"])
        / cell(avg, t, s, "OpIP")["power_total"]
        for t, s in CELLS
    ]
    record(
        "bypass total-power saving in 15-35% band",
        all(15 <= v <= 35 for v in vals),
        " ".join(f"{v:.1f}" for v in vals),
    )


def test_bypass_module_count_reduction_band(grid):
    _, avg, _ = grid

    def mods(t, s, arch):
        e = cell(avg, t, s, arch)
        return e["zr_count"] + e["zrplus_count"]

    vals = [
        100.0 * (mods(t, s, "OpIP") - mods(t, s, "TrIP")) / mods(t, s, "OpIP")
        for t, s in CELLS
    ]
    record(
        "bypass module-count reduction in 30-50% band",
        all(30 <= v <= 50 for v in vals),
        " ".join(f"{v:.1f}" for v in vals),
    )


def test_router_power_lowest_without_ip_grooming(grid):
    _, avg, _ = grid
    strict = all(
        cell(avg, t, s, "TrZR")["power_ip"]
        < min(cell(avg, t, s, x)["power_ip"] for x in ("OpIP", "TrIP", "TrIPandZR"))
        for t, s in CELLS
    )
    vals = [
        100.0
        * (cell(avg, t, s, "OpIP")["power_ip"] - cell(avg, t, s, "TrZR")["power_ip"])
        / cell(avg, t, s, "OpIP")["power_ip"]
        for t, s in CELLS
    ]
    record(
        "router power: grooming-free arch strictly lowest, 25-40% below opaque",
        strict and all(25 <= v <= 40 for v in vals),
        " ".join(f"{v:.1f}" for v in vals),
    )


def test_module_power_identity_and_gap(grid):
    _, avg, _ = grid
    identical = all(
        abs(
            cell(avg, t, s, "TrIP")["power_zr"]
            - cell(avg, t, s, "TrIPandZR")["power_zr"]
        )
        < 1e-9
        for t, s in CELLS
    )
    gaps = [
        100.0
        * (cell(avg, t, s, "TrZR")["power_zr"] - cell(avg, t, s, "TrIP")["power_zr"])
        / cell(avg, t, s, "TrZR")["power_zr"]
        for t, s in CELLS
    ]
    record(
        "pluggable power: identical with/without merge, 2-10% below grooming-free",
        identical and all(2 <= g <= 10 for g in gaps),
        " ".join(f"{g:.1f}" for g in gaps),
    )


def test_optical_power_invariant_across_traffic(grid):
    rows, _, _ = grid
    ok = all(
        len({r.power_optical for r in rows if r.topology == t and r.arch == a}) == 1
        for t in TOPOLOGIES
        for a in ARCH_NAMES
    )
    record("optical power bit-identical across scenarios and seeds", ok)


def test_transparent_vs_opaque_optical_ratio(grid):
    rows, _, _ = grid
    targets = {"j14": 1.556, "g17": 1.683}
    details = []
    ok = True
    for t in TOPOLOGIES:
        opaque = next(r.power_optical for r in rows if r.topology == t and r.arch == "OpIP")
        transparent = next(
            r.power_optical for r in rows if r.topology == t and r.arch == "TrIP"
        )
        ratio = transparent / opaque
        details.append(f"{t}={ratio:.3f}")
        ok = ok and abs(ratio - targets[t]) / targets[t] <= 0.10
    record(
        "transparent/opaque optical power ratio within 10% of target",
        ok,
        " ".join(details),
    )


def test_total_power_monotone_in_traffic_load(grid):
    _, avg, _ = grid
    ok = all(
        cell(avg, t, "TS1", a)["power_total"]
        <= cell(avg, t, "TS2", a)["power_total"]
        <= cell(avg, t, "TS3", a)["power_total"]
        for t in TOPOLOGIES
        for a in ARCH_NAMES
    )
    record("total power non-decreasing with traffic load", ok)


def test_no_blocking_and_state_invariants(grid):
    rows, _, _ = grid
    blocked = sum(r.blocked for r in rows)
    sampled_ok = True
    ts1 = load_scenario("TS1")
    for topo_name in TOPOLOGIES:
        topo = load_named_topology(topo_name)
        for arch in ARCH_NAMES:
            _, state = run_single(topo, arch, ts1, 0)
            state.audit()
            for lp in state.lightpaths.values():
                for seg in lp.segments:
                    sampled_ok &= topo.path_length_km(seg.nodes) <= lp.mode.reach_km
                sampled_ok &= lp.residual >= 0 and bool(lp.carried)
    record(
        "zero blocked demands and clean state audits",
        blocked == 0 and sampled_ok,
        f"blocked={blocked}",
    )


def test_near_optimal_on_toy_instances():
    worst = 0.0
    for seed in range(25):
        topo, matrix = toy_instance(seed)
        for arch in ARCH_NAMES:
            opt_cost, _ = exhaustive_min_cost_provision(topo, list(matrix.demands), arch)
            got = network_cost(provision_all(topo, matrix, arch)).module_cost
            worst = max(worst, got / opt_cost)
    record(
        "heuristic within 1.2x of brute-force module cost on toy instances",
        worst <= 1.2 + 1e-9,
        f"worst={worst:.3f}",
    )


def test_exact_match_on_enumeration_lattices():
    lengths_pool = (100, 300, 500, 600, 900, 1200)
    mismatches = 0
    for mode in DEFAULT_CATALOG:
        for n_links in range(1, 5):
            for lengths in itertools.product(lengths_pool, repeat=n_links):
                oracle = exhaustive_regen_min(list(lengths), mode.reach_km)
                try:
                    mine = plan_regeneration(list(lengths), mode).regen_count
                except LinkExceedsReach:
                    mine = None
                mismatches += mine != oracle
    for rate in (100, 200, 300, 400, 500, 600):
        for dist in range(100, 3001, 100):
            try:
                oracle_count, _ = exhaustive_min_channel_split(rate, dist)
            except Infeasible:
                oracle_count = None
            try:
                mine = len(select_modes_min_channels(rate, dist))
            except NoFeasibleMode:
                mine = None
            mismatches += mine != oracle_count
    record(
        "regen placement and channel splits match exhaustive enumeration",
        mismatches == 0,
        f"mismatches={mismatches}",
    )


def test_repeated_cli_invocation_byte_identical(tmp_path, capsys):
    argv = [
        "experiment", "--topology", "j14", "--scenario", "TS1", "--runs", "2",
    ]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    main(argv + ["--out", str(out_a)])
    main(argv + ["--out", str(out_b)])
    capsys.readouterr()
    ok = all(
        (out_a / name).read_bytes() == (out_b / name).read_bytes()
        for name in ("rows.csv", "averages.csv")
    )
    record("repeated identical invocations produce byte-identical output", ok)
