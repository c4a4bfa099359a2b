"""Reproducible full-mesh traffic matrices under configurable rate-mix scenarios.

Rates are drawn i.i.d. per ordered node pair from the scenario weights using
Python's Mersenne Twister (``random.Random``) seeded with the run seed; pairs
are visited in lexicographic order, so a matrix is a pure function of
(topology, scenario, seed) and is identical across platforms.
"""

from __future__ import annotations

import io
import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .topology import Topology

RATE_CLASSES: tuple[int, ...] = (100, 200, 300, 400, 500, 600)
BUILTIN_SCENARIOS = ("TS1", "TS2", "TS3")

_WEIGHT_TOL = 1e-9


class TrafficError(ValueError):
    pass


@dataclass(frozen=True)
class TrafficScenario:
    name: str
    weights: tuple[float, ...]  # one weight per RATE_CLASSES entry

    def __post_init__(self):
        if len(self.weights) != len(RATE_CLASSES):
            raise TrafficError(
                f"scenario needs {len(RATE_CLASSES)} weights, got {len(self.weights)}"
            )
        if any(w < 0 for w in self.weights):
            raise TrafficError(f"negative weight in scenario {self.name!r}")
        if abs(sum(self.weights) - 1.0) > _WEIGHT_TOL:
            raise TrafficError(
                f"weights of {self.name!r} sum to {sum(self.weights)}, expected 1"
            )


@dataclass(frozen=True)
class Demand:
    src: str
    dst: str
    rate_gbps: int

    def __post_init__(self):
        if self.src == self.dst:
            raise TrafficError(f"demand src == dst ({self.src!r})")
        if self.rate_gbps not in RATE_CLASSES:
            raise TrafficError(f"invalid rate {self.rate_gbps}")

    @property
    def key(self) -> tuple[str, str]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class TrafficMatrix:
    scenario: str
    seed: int
    demands: tuple[Demand, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("src,dst,rate_gbps\n")
        for d in self.demands:
            buf.write(f"{d.src},{d.dst},{d.rate_gbps}\n")
        return buf.getvalue()


def scenario_from_dict(doc: dict) -> TrafficScenario:
    raw = doc["weights"]
    weights = tuple(float(raw.get(str(r), 0.0)) for r in RATE_CLASSES)
    return TrafficScenario(str(doc["name"]), weights)


def load_scenario(name_or_path: str | Path) -> TrafficScenario:
    """Load a scenario by builtin name (TS1/TS2/TS3) or from a JSON file."""
    name = str(name_or_path)
    if name.upper() in BUILTIN_SCENARIOS:
        text = (
            resources.files("ipowdm.data").joinpath(f"{name.lower()}.json").read_text()
        )
        return scenario_from_dict(json.loads(text))
    return scenario_from_dict(json.loads(Path(name_or_path).read_text()))


def _draw_rate(rng: random.Random, scenario: TrafficScenario) -> int:
    x = rng.random()
    acc = 0.0
    for rate, w in zip(RATE_CLASSES, scenario.weights):
        acc += w
        if x < acc:
            return rate
    return RATE_CLASSES[-1]  # guard against rounding at the top end


def generate_traffic(topo: Topology, scenario: TrafficScenario, seed: int) -> TrafficMatrix:
    """One demand per ordered node pair; deterministic in (topo, scenario, seed)."""
    rng = random.Random(seed)
    demands = []
    for src in topo.nodes:
        for dst in topo.nodes:
            if src == dst:
                continue
            demands.append(Demand(src, dst, _draw_rate(rng, scenario)))
    return TrafficMatrix(scenario.name, seed, tuple(demands))
