"""Batch experiment runner and reporting: one row per (topology, architecture,
scenario, seed), plus per-cell averages over seeds and savings tables against a
baseline architecture. Output is deterministic and byte-stable."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

from .dimensioning import DimensioningConfig, PowerTable, network_cost, network_power
from .rmsa import ARCH_NAMES, PlannerConfig, provision_all
from .topology import Topology
from .traffic import TrafficScenario, generate_traffic
from .transceiver import DEFAULT_CATALOG

CSV_COLUMNS = (
    "topology", "arch", "scenario", "seed",
    "zr_count", "zrplus_count", "b2b_modules", "router_ports", "module_cost",
    "power_zr", "power_ip", "power_optical", "power_total", "blocked",
)


class BlockingError(RuntimeError):
    """Raised in strict mode when any demand is blocked."""


@dataclass(frozen=True)
class RunResult:
    topology: str
    arch: str
    scenario: str
    seed: int
    zr_count: int
    zrplus_count: int
    b2b_modules: int
    router_ports: int
    module_cost: float
    power_zr: float
    power_ip: float
    power_optical: float
    power_total: float
    blocked: int


@dataclass
class ExperimentConfig:
    topologies: list[Topology]
    archs: list[str] = field(default_factory=lambda: list(ARCH_NAMES))
    scenarios: list[TrafficScenario] = field(default_factory=list)
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    planner: PlannerConfig = field(default_factory=PlannerConfig)
    power: PowerTable = field(default_factory=PowerTable)
    dimensioning: DimensioningConfig = field(default_factory=DimensioningConfig)
    catalog: tuple = DEFAULT_CATALOG
    strict: bool = True


def run_single(
    topo: Topology,
    arch: str,
    scenario: TrafficScenario,
    seed: int,
    planner: PlannerConfig = PlannerConfig(),
    power: PowerTable = PowerTable(),
    dimensioning: DimensioningConfig = DimensioningConfig(),
    catalog=DEFAULT_CATALOG,
    strict: bool = True,
):
    """Provision + dimension + evaluate one run; returns (RunResult, state)."""
    matrix = generate_traffic(topo, scenario, seed)
    state = provision_all(topo, matrix, arch, planner, catalog)
    if strict and state.blocked:
        raise BlockingError(
            f"{len(state.blocked)} blocked demands on "
            f"{topo.name}/{arch}/{scenario.name}/seed {seed}"
        )
    cost = network_cost(state)
    _, total = network_power(state, power, dimensioning)
    row = RunResult(
        topology=topo.name,
        arch=arch,
        scenario=scenario.name,
        seed=seed,
        zr_count=cost.zr_count,
        zrplus_count=cost.zrplus_count,
        b2b_modules=cost.b2b_modules,
        router_ports=cost.router_ports,
        module_cost=cost.module_cost,
        power_zr=total.zr_zrplus,
        power_ip=total.ip_router,
        power_optical=total.optical,
        power_total=total.total,
        blocked=len(state.blocked),
    )
    return row, state


def run_experiment(cfg: ExperimentConfig) -> list[RunResult]:
    rows = []
    for topo in cfg.topologies:
        for arch in cfg.archs:
            for scenario in cfg.scenarios:
                for seed in cfg.seeds:
                    row, _ = run_single(
                        topo, arch, scenario, seed,
                        cfg.planner, cfg.power, cfg.dimensioning, cfg.catalog,
                        strict=cfg.strict,
                    )
                    rows.append(row)
    return rows


_NUMERIC = CSV_COLUMNS[4:]


def average_rows(rows: list[RunResult]) -> list[dict]:
    """Arithmetic mean over seeds per (topology, arch, scenario) cell."""
    cells: dict[tuple, list[RunResult]] = {}
    for row in rows:
        cells.setdefault((row.topology, row.arch, row.scenario), []).append(row)
    out = []
    for (topo, arch, scen), members in sorted(cells.items()):
        entry = {"topology": topo, "arch": arch, "scenario": scen, "runs": len(members)}
        for col in _NUMERIC:
            entry[col] = sum(getattr(m, col) for m in members) / len(members)
        out.append(entry)
    return out


def compare(averages: list[dict], baseline: str) -> list[dict]:
    """Percentage savings per power category and total versus a baseline arch."""
    base = {
        (e["topology"], e["scenario"]): e for e in averages if e["arch"] == baseline
    }
    out = []
    for e in sorted(averages, key=lambda e: (e["topology"], e["scenario"], e["arch"])):
        b = base.get((e["topology"], e["scenario"]))
        if b is None:
            continue
        entry = {
            "topology": e["topology"],
            "scenario": e["scenario"],
            "arch": e["arch"],
            "baseline": baseline,
        }
        for col in ("power_zr", "power_ip", "power_optical", "power_total",
                    "module_cost", "router_ports"):
            ref = b[col]
            entry[f"saving_{col}_pct"] = (
                0.0 if ref == 0 else 100.0 * (ref - e[col]) / ref
            )
        out.append(entry)
    return out


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)


def rows_to_csv(rows: list[RunResult]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        d = asdict(row)
        lines.append(",".join(_fmt(d[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def rows_from_csv(text: str) -> list[RunResult]:
    lines = [l for l in text.strip().splitlines() if l]
    header = lines[0].split(",")
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header: {header}")
    out = []
    for line in lines[1:]:
        vals = dict(zip(CSV_COLUMNS, line.split(",")))
        out.append(
            RunResult(
                topology=vals["topology"], arch=vals["arch"],
                scenario=vals["scenario"], seed=int(vals["seed"]),
                zr_count=int(vals["zr_count"]), zrplus_count=int(vals["zrplus_count"]),
                b2b_modules=int(vals["b2b_modules"]),
                router_ports=int(vals["router_ports"]),
                module_cost=float(vals["module_cost"]),
                power_zr=float(vals["power_zr"]), power_ip=float(vals["power_ip"]),
                power_optical=float(vals["power_optical"]),
                power_total=float(vals["power_total"]), blocked=int(vals["blocked"]),
            )
        )
    return out


def dicts_to_csv(entries: list[dict]) -> str:
    if not entries:
        return "\n"
    cols = list(entries[0].keys())
    lines = [",".join(cols)]
    for e in entries:
        lines.append(",".join(_fmt(e[c]) for c in cols))
    return "\n".join(lines) + "\n"


def rows_to_json(rows: list[RunResult]) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2, sort_keys=True) + "\n"
