"""Provisioning engine: auxiliary-graph routing, grooming, mode selection,
regeneration, and first-fit spectrum assignment for the four node architectures.

Architectures:

* ``OpIP``       -- opaque: every hop terminates in routers; grooming and
                    regeneration happen in the IP layer at every node.
* ``TrIP``       -- transparent bypass; regeneration and intermediate grooming
                    through routers.
* ``TrZR``       -- transparent bypass; end-to-end grooming only, regeneration
                    with back-to-back module pairs that never touch a router.
* ``TrIPandZR``  -- like TrIP, but terminations that turn out to be pure
                    regenerations (no grooming at the node) are converted to
                    back-to-back pairs in a final pass.

Demands above 400 Gb/s are inverse-multiplexed into sub-flows before routing
(except under TrZR, where the minimum-channel split decides the parallel
channels). Each sub-flow is routed on the auxiliary graph: grooming edges
reuse residual lightpath capacity at strongly reduced weight, candidate edges
open new lightpaths at physical length plus a small per-lightpath penalty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from heapq import heappush, heappop

from .topology import Topology, k_shortest_paths
from .transceiver import (
    DEFAULT_CATALOG,
    NoFeasibleMode,
    TransceiverMode,
    plan_regeneration,
    select_modes_min_channels,
)
from .traffic import Demand, TrafficMatrix

ARCH_NAMES = ("OpIP", "TrIP", "TrZR", "TrIPandZR")


@dataclass(frozen=True)
class ArchitectureConfig:
    name: str
    optical_bypass: bool
    intermediate_ip_grooming: bool
    ip_regeneration: bool
    b2b_zr_regeneration: bool


ARCHITECTURES: dict[str, ArchitectureConfig] = {
    "OpIP": ArchitectureConfig("OpIP", False, True, True, False),
    "TrIP": ArchitectureConfig("TrIP", True, True, True, False),
    "TrZR": ArchitectureConfig("TrZR", True, False, False, True),
    "TrIPandZR": ArchitectureConfig("TrIPandZR", True, True, True, True),
}


@dataclass(frozen=True)
class PlannerConfig:
    k: int = 3
    grooming_weight_factor: float = 0.01
    demand_order: str = "rate_desc"  # or "input_order"
    max_retries: int = 30
    # Bypass-with-IP-grooming architectures ride existing lightpath chains
    # only when the chain is short and detour-free; otherwise they open a
    # fresh transparent path. See _route_flow.
    groom_chain_hops: int = 2
    groom_detour_factor: float = 1.0
    groom_max_flows_per_lp: int = 2
    groom_min_rate: int = 150
    groom_new_edges: int = 0
    # Hop-by-hop (no optical bypass) lightpaths cost modules per fiber hop,
    # not per kilometre, so a new-lightpath edge carries this dominant per-hop
    # weight; route length only breaks ties between equal-hop routes.
    opaque_hop_weight: float = 10000.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if not (0 < self.grooming_weight_factor <= 1):
            raise ValueError(
                f"grooming_weight_factor must be in (0, 1], got {self.grooming_weight_factor}"
            )
        if self.demand_order not in ("rate_desc", "input_order"):
            raise ValueError(f"unknown demand_order {self.demand_order!r}")
        if self.groom_chain_hops < 0:
            raise ValueError(f"groom_chain_hops must be >= 0, got {self.groom_chain_hops}")
        if self.groom_detour_factor < 1.0:
            raise ValueError(
                f"groom_detour_factor must be >= 1.0, got {self.groom_detour_factor}"
            )
        if self.groom_max_flows_per_lp < 1:
            raise ValueError(
                f"groom_max_flows_per_lp must be >= 1, got {self.groom_max_flows_per_lp}"
            )
        if self.groom_min_rate < 0:
            raise ValueError(f"groom_min_rate must be >= 0, got {self.groom_min_rate}")
        if self.groom_new_edges < 0:
            raise ValueError(f"groom_new_edges must be >= 0, got {self.groom_new_edges}")
        if self.opaque_hop_weight <= 0:
            raise ValueError(
                f"opaque_hop_weight must be > 0, got {self.opaque_hop_weight}"
            )


class BlockedError(Exception):
    def __init__(self, demand: Demand, reason: str):
        self.demand = demand
        self.reason = reason  # "no_spectrum" | "no_feasible_mode"
        super().__init__(f"{demand.src}->{demand.dst} {demand.rate_gbps}G: {reason}")


class NoSpectrum(Exception):
    pass


@dataclass
class Segment:
    nodes: tuple[str, ...]
    channel: int


@dataclass
class Lightpath:
    id: int
    route: tuple[str, ...]
    mode: TransceiverMode
    segments: list[Segment]
    b2b_regen_nodes: tuple[str, ...] = ()
    carried: list[tuple[str, int]] = field(default_factory=list)

    @property
    def residual(self) -> int:
        return self.mode.rate_gbps - sum(r for _, r in self.carried)

    @property
    def endpoints(self) -> tuple[str, str]:
        return (self.route[0], self.route[-1])


@dataclass
class FlowRecord:
    flow_id: str
    src: str
    dst: str
    rate_gbps: int
    placements: list[tuple[int, int]] = field(default_factory=list)  # (lp_id, rate)


class NetworkState:
    """Mutable provisioning state for one run. Mutation is strictly sequential."""

    def __init__(self, topo: Topology, arch: str, cfg: PlannerConfig, catalog=DEFAULT_CATALOG):
        if arch not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {arch!r}")
        self.topology = topo
        self.arch = ARCHITECTURES[arch]
        self.cfg = cfg
        self.catalog = catalog
        self.lightpaths: dict[int, Lightpath] = {}
        self.occupancy: dict[tuple[str, str], set[int]] = {
            f: set() for f in topo.directed_fibers()
        }
        self.records: dict[tuple[str, str], list[FlowRecord]] = {}
        self.blocked: list[tuple[Demand, str]] = []
        self._next_id = 0
        self._ksp: dict[tuple[str, str], list[list[str]]] = {}
        self._new_lp_penalty = 2.0 * min(m.cost_units for m in catalog)

    # -- helpers -------------------------------------------------------------

    def paths(self, src: str, dst: str) -> list[list[str]]:
        key = (src, dst)
        if key not in self._ksp:
            self._ksp[key] = k_shortest_paths(self.topology, src, dst, self.cfg.k)
        return self._ksp[key]

    def new_lp_id(self) -> int:
        self._next_id += 1
        return self._next_id

    def recompute_occupancy(self) -> dict[tuple[str, str], set[int]]:
        occ: dict[tuple[str, str], set[int]] = {f: set() for f in self.occupancy}
        for lp in self.lightpaths.values():
            for seg in lp.segments:
                for u, v in zip(seg.nodes, seg.nodes[1:]):
                    if seg.channel in occ[(u, v)]:
                        raise AssertionError(
                            f"channel clash on fiber {(u, v)} channel {seg.channel}"
                        )
                    occ[(u, v)].add(seg.channel)
        return occ

    def audit(self) -> None:
        """Occupancy must equal the union of lightpath segment claims."""
        if self.recompute_occupancy() != self.occupancy:
            raise AssertionError("stored occupancy diverges from lightpath claims")

    def to_dict(self) -> dict:
        return {
            "topology": self.topology.name,
            "arch": self.arch.name,
            "lightpaths": [
                {
                    "id": lp.id,
                    "route": list(lp.route),
                    "mode": list(lp.mode.key),
                    "segments": [
                        {"nodes": list(s.nodes), "channel": s.channel} for s in lp.segments
                    ],
                    "b2b_regen_nodes": list(lp.b2b_regen_nodes),
                    "carried": [list(c) for c in sorted(lp.carried)],
                }
                for lp in sorted(self.lightpaths.values(), key=lambda l: l.id)
            ],
            "blocked": [
                {"src": d.src, "dst": d.dst, "rate_gbps": d.rate_gbps, "reason": r}
                for d, r in self.blocked
            ],
        }


# -- auxiliary graph ---------------------------------------------------------

_GROOM = 0
_NEW = 1


@dataclass
class AuxEdge:
    u: str
    v: str
    weight: float
    kind: int            # _GROOM | _NEW
    lp_id: int = -1      # grooming edges
    subpath: tuple[str, ...] = ()  # candidate edges

    @property
    def sort_key(self) -> tuple:
        return (self.weight, self.kind, self.lp_id, self.subpath)


def _chain_feasible(link_lengths, rate, catalog) -> bool:
    longest = max(link_lengths)
    return any(m.rate_gbps >= rate and m.reach_km >= longest for m in catalog)


def build_auxiliary_graph(
    state: NetworkState, demand: Demand, parent_rate: int | None = None
) -> dict[tuple[str, str], list[AuxEdge]]:
    """Edges keyed by (u, v); each key holds alternatives best-first.

    ``parent_rate`` is the rate of the original demand when ``demand`` is an
    inverse-multiplexed sub-flow (unused here; the chain-grooming policy
    applies the rate floor to it).
    """
    topo = state.topology
    arch = state.arch
    factor = state.cfg.grooming_weight_factor
    penalty = state._new_lp_penalty
    edges: dict[tuple[str, str], list[AuxEdge]] = {}

    def add(edge: AuxEdge):
        edges.setdefault((edge.u, edge.v), []).append(edge)

    for lp in sorted(state.lightpaths.values(), key=lambda l: l.id):
        if lp.residual < demand.rate_gbps:
            continue
        if not arch.intermediate_ip_grooming and lp.endpoints != (demand.src, demand.dst):
            continue
        if arch.intermediate_ip_grooming and len(lp.carried) >= state.cfg.groom_max_flows_per_lp:
            continue
        add(AuxEdge(lp.route[0], lp.route[-1],
                    factor * topo.path_length_km(lp.route), _GROOM, lp_id=lp.id))

    if not arch.optical_bypass:
        for u, v in topo.directed_fibers():
            length = topo.link_length(u, v)
            add(AuxEdge(u, v, state.cfg.opaque_hop_weight + length, _NEW, subpath=(u, v)))
    elif not arch.intermediate_ip_grooming:
        # end-to-end only: candidate edges are whole source-destination paths
        for path in state.paths(demand.src, demand.dst):
            lengths = topo.path_link_lengths(path)
            if max(lengths) > max(m.reach_km for m in state.catalog):
                continue
            add(AuxEdge(demand.src, demand.dst,
                        sum(lengths) + penalty, _NEW, subpath=tuple(path)))
    else:
        rate = min(demand.rate_gbps, max(m.rate_gbps for m in state.catalog))
        seen_sub: set[tuple[str, ...]] = set()
        for path in state.paths(demand.src, demand.dst):
            for i in range(len(path) - 1):
                for j in range(i + 1, len(path)):
                    sub = tuple(path[i:j + 1])
                    if sub in seen_sub:
                        continue
                    seen_sub.add(sub)
                    lengths = topo.path_link_lengths(sub)
                    if not _chain_feasible(lengths, rate, state.catalog):
                        continue
                    add(AuxEdge(sub[0], sub[-1], sum(lengths) + penalty, _NEW, subpath=sub))

    for alts in edges.values():
        alts.sort(key=lambda e: e.sort_key)
    return edges


def _aux_shortest_path(edges, src, dst):
    """Dijkstra over best edge per node pair; ties broken on the node sequence."""
    adj: dict[str, list[AuxEdge]] = {}
    for (u, _v), alts in edges.items():
        if alts:
            adj.setdefault(u, []).append(alts[0])
    for lst in adj.values():
        lst.sort(key=lambda e: e.v)
    heap = [(0.0, (src,))]
    done = set()
    while heap:
        dist, path = heappop(heap)
        node = path[-1]
        if node == dst:
            return [edges[(u, v)][0] for u, v in zip(path, path[1:])]
        if node in done:
            continue
        done.add(node)
        for e in adj.get(node, ()):
            if e.v in path:
                continue
            heappush(heap, (dist + e.weight, path + (e.v,)))
    return None


# -- transport realization ---------------------------------------------------

def _pick_chain_mode(link_lengths, rate, catalog):
    """Mode for a new max-rate-policy lightpath over the given hops.

    Among modes that can carry the flow, minimize IP-regen splits, then prefer
    the highest rate (residual stays groomable), then lower power.
    """
    best = None
    for m in catalog:
        if m.rate_gbps < rate or max(link_lengths) > m.reach_km:
            continue
        plan = plan_regeneration(link_lengths, m)
        key = (plan.regen_count, -m.rate_gbps, m.power_units, m.module, m.modulation)
        if best is None or key < best[0]:
            best = (key, m, plan)
    if best is None:
        raise NoFeasibleMode(f"no mode carries {rate}G over hops {link_lengths}")
    return best[1], best[2]


def _best_segment_mode(length, rate, catalog):
    cands = [m for m in catalog if m.rate_gbps >= rate and m.reach_km >= length]
    return min(cands, key=lambda m: (-m.rate_gbps, m.power_units, m.module, m.modulation))


def assign_spectrum_first_fit(state: NetworkState, segment_nodes) -> int:
    """Lowest channel index free on every directed fiber of the segment."""
    busy: set[int] = set()
    for u, v in zip(segment_nodes, segment_nodes[1:]):
        busy |= state.occupancy[(u, v)]
    for ch in range(state.topology.grid.channel_count):
        if ch not in busy:
            return ch
    raise NoSpectrum(f"no free channel along {'-'.join(segment_nodes)}")


def _create_lightpath(state, route, mode, b2b_nodes, undo):
    """Claims first-fit spectrum per transparent segment and registers the LP."""
    node_idx = {n: i for i, n in enumerate(route)}
    cuts = [0] + [node_idx[n] for n in b2b_nodes] + [len(route) - 1]
    segments = []
    claimed = []
    try:
        for a, b in zip(cuts, cuts[1:]):
            seg_nodes = tuple(route[a:b + 1])
            ch = assign_spectrum_first_fit(state, seg_nodes)
            for u, v in zip(seg_nodes, seg_nodes[1:]):
                state.occupancy[(u, v)].add(ch)
                claimed.append(((u, v), ch))
            segments.append(Segment(seg_nodes, ch))
    except NoSpectrum:
        for fiber, ch in claimed:
            state.occupancy[fiber].discard(ch)
        raise
    lp = Lightpath(state.new_lp_id(), tuple(route), mode, segments, tuple(b2b_nodes))
    state.lightpaths[lp.id] = lp

    def revert():
        del state.lightpaths[lp.id]
        for fiber, ch in claimed:
            state.occupancy[fiber].discard(ch)

    undo.append(revert)
    return lp


def _realize_candidate_edge(state, edge, rate, flow_id, undo):
    """Open new lightpath(s) for `rate` over edge.subpath; returns placements."""
    topo = state.topology
    lengths = topo.path_link_lengths(edge.subpath)
    placements = []
    if state.arch.name == "TrZR":
        modes = select_modes_min_channels(rate, sum(lengths), state.catalog, lengths)
        remaining = rate
        for m in modes:
            plan = plan_regeneration(lengths, m)
            b2b = tuple(edge.subpath[i] for i in plan.boundaries)
            lp = _create_lightpath(state, edge.subpath, m, b2b, undo)
            amount = min(remaining, m.rate_gbps)
            lp.carried.append((flow_id, amount))
            remaining -= amount
            placements.append((lp.id, amount))
        return placements

    mode, plan = _pick_chain_mode(lengths, rate, state.catalog)
    if plan.regen_count == 0:
        lp = _create_lightpath(state, edge.subpath, mode, (), undo)
        lp.carried.append((flow_id, rate))
        return [(lp.id, rate)]
    # IP regeneration: terminate at routers; each segment is its own lightpath
    cuts = [0] + list(plan.boundaries) + [len(edge.subpath) - 1]
    for a, b in zip(cuts, cuts[1:]):
        seg = edge.subpath[a:b + 1]
        seg_mode = _best_segment_mode(topo.path_length_km(seg), rate, state.catalog)
        lp = _create_lightpath(state, seg, seg_mode, (), undo)
        lp.carried.append((flow_id, rate))
        placements.append((lp.id, rate))
    return placements


def _lex_aux_path(edges, src, dst):
    """Dijkstra minimizing (new-lightpath edges, weight), ties on node sequence."""
    adj: dict[str, list[AuxEdge]] = {}
    for (u, _v), alts in edges.items():
        if alts:
            adj.setdefault(u, []).append(alts[0])
    for lst in adj.values():
        lst.sort(key=lambda e: e.v)
    heap = [(0, 0.0, (src,))]
    done = set()
    while heap:
        nnew, dist, path = heappop(heap)
        node = path[-1]
        if node == dst:
            return [edges[(u, v)][0] for u, v in zip(path, path[1:])]
        if node in done:
            continue
        done.add(node)
        for e in adj.get(node, ()):
            if e.v in path:
                continue
            step = 1 if e.kind == _NEW else 0
            heappush(heap, (nnew + step, dist + e.weight, path + (e.v,)))
    return None


def _try_groom_chain(state: NetworkState, flow: FlowRecord, edges, undo,
                     parent_rate: int | None = None) -> bool:
    """Ride existing lightpaths end to end if a short, detour-free chain exists.

    Bypass architectures with IP grooming reuse residual capacity along a
    chain of at most ``groom_chain_hops`` lightpaths (optionally bridged by up
    to ``groom_new_edges`` fresh segments) following a shortest physical
    route; anything longer opens a fresh transparent path instead, because
    half-groomed detours fragment capacity into short, poorly reusable
    lightpaths.

    Demands whose original rate is below ``groom_min_rate`` may still ride
    chains of existing lightpaths, but never open fresh segments while doing
    so: grooming a small demand is only worthwhile when it is pure reuse.
    """
    cfg = state.cfg
    floor_rate = flow.rate_gbps if parent_rate is None else parent_rate
    max_new = 0 if floor_rate < cfg.groom_min_rate else cfg.groom_new_edges
    chain = _lex_aux_path(edges, flow.src, flow.dst)
    if chain is None:
        return False
    n_new = sum(1 for e in chain if e.kind == _NEW)
    n_groom = len(chain) - n_new
    if n_groom == 0 or n_groom > cfg.groom_chain_hops or n_new > max_new:
        return False
    chain_km = sum(
        state.topology.path_length_km(
            state.lightpaths[e.lp_id].route if e.kind == _GROOM else e.subpath
        )
        for e in chain
    )
    direct = state.paths(flow.src, flow.dst)
    if not direct:
        return False
    direct_km = state.topology.path_length_km(direct[0])
    if chain_km > cfg.groom_detour_factor * direct_km:
        return False
    local: list = []
    try:
        placements = []
        for e in chain:
            if e.kind == _GROOM:
                lp = state.lightpaths[e.lp_id]
                entry = (flow.flow_id, flow.rate_gbps)
                lp.carried.append(entry)
                local.append(lambda lp=lp, entry=entry: lp.carried.remove(entry))
                placements.append((lp.id, flow.rate_gbps))
            else:
                placements.extend(
                    _realize_candidate_edge(state, e, flow.rate_gbps, flow.flow_id, local)
                )
    except (NoSpectrum, NoFeasibleMode):
        for op in reversed(local):
            op()
        return False
    flow.placements = placements
    undo.extend(local)
    return True


def _route_flow(state: NetworkState, flow: FlowRecord, demand_like: Demand, undo,
                parent_rate: int | None = None):
    edges = build_auxiliary_graph(state, demand_like, parent_rate)
    if state.arch.optical_bypass and state.arch.intermediate_ip_grooming:
        if _try_groom_chain(state, flow, edges, undo, parent_rate):
            return
        edges = {k: alts for k, alts in
                 ((key, [e for e in alts if e.kind == _NEW]) for key, alts in edges.items())
                 if alts}
    spectrum_failed = False
    for _ in range(state.cfg.max_retries):
        path_edges = _aux_shortest_path(edges, flow.src, flow.dst)
        if path_edges is None:
            reason = "no_spectrum" if spectrum_failed else "no_feasible_mode"
            raise BlockedError(demand_like, reason)
        attempt_undo: list = []
        try:
            placements: list[tuple[int, int]] = []
            for e in path_edges:
                if e.kind == _GROOM:
                    lp = state.lightpaths[e.lp_id]
                    if lp.residual < flow.rate_gbps:
                        raise NoSpectrum("stale grooming edge")
                    entry = (flow.flow_id, flow.rate_gbps)
                    lp.carried.append(entry)
                    attempt_undo.append(lambda lp=lp, entry=entry: lp.carried.remove(entry))
                    placements.append((lp.id, flow.rate_gbps))
                else:
                    placements.extend(
                        _realize_candidate_edge(state, e, flow.rate_gbps, flow.flow_id, attempt_undo)
                    )
            flow.placements = placements
            undo.extend(attempt_undo)
            return
        except (NoSpectrum, NoFeasibleMode):
            spectrum_failed = True
            for op in reversed(attempt_undo):
                op()
            # drop the first failing-capable edge alternative and retry
            dropped = False
            for e in path_edges:
                alts = edges.get((e.u, e.v), [])
                if alts and alts[0] is e:
                    alts.pop(0)
                    if not alts:
                        del edges[(e.u, e.v)]
                    dropped = True
                    break
            if not dropped:
                raise BlockedError(demand_like, "no_spectrum") from None
    raise BlockedError(demand_like, "no_spectrum")


def _subflow_rates(demand: Demand, state: NetworkState) -> list[int]:
    """Inverse-multiplexing split for demands above one channel's capacity.

    Greedy fill with the highest rate feasible without regeneration over the
    shortest physical path, so sub-flows ride single lightpaths where the
    reach allows it.
    """
    if state.arch.name == "TrZR":
        return [demand.rate_gbps]  # min-channel split handled at realization
    paths = state.paths(demand.src, demand.dst)
    unit = max(m.rate_gbps for m in state.catalog)
    if paths:
        dist = state.topology.path_length_km(paths[0])
        reachable = [m.rate_gbps for m in state.catalog if m.reach_km >= dist]
        if reachable:
            unit = max(reachable)
    rates = []
    remaining = demand.rate_gbps
    while remaining > 0:
        part = min(remaining, unit)
        rates.append(part)
        remaining -= part
    return rates


def route_demand(
    state: NetworkState,
    demand: Demand,
    deferred: list[tuple[Demand, "FlowRecord"]] | None = None,
) -> list[FlowRecord]:
    """Provision one demand atomically; raises BlockedError with state unchanged.

    When ``deferred`` is given and the architecture grooms at intermediate
    routers, sub-flows below ``groom_min_rate`` are parked there (with empty
    placements) instead of being routed now. Routing them after the whole
    high-rate mesh exists lets them ride residual capacity instead of opening
    dedicated lightpaths; see :func:`provision_all`.
    """
    if demand.key in state.records:
        raise ValueError(f"demand {demand.key} already provisioned")
    defer_small = deferred is not None and state.arch.intermediate_ip_grooming
    undo: list = []
    flows = []
    try:
        for i, rate in enumerate(_subflow_rates(demand, state)):
            flow = FlowRecord(f"{demand.src}->{demand.dst}#{i}", demand.src, demand.dst, rate)
            flows.append(flow)
            if defer_small and rate < state.cfg.groom_min_rate:
                deferred.append((demand, flow))
                continue
            sub = Demand(demand.src, demand.dst, rate)
            _route_flow(state, flow, sub, undo, parent_rate=demand.rate_gbps)
    except BlockedError:
        for op in reversed(undo):
            op()
        raise
    state.records[demand.key] = flows
    return flows


def _ordered_demands(matrix: TrafficMatrix, cfg: PlannerConfig):
    if cfg.demand_order == "input_order":
        return list(matrix.demands)
    return sorted(matrix.demands, key=lambda d: (-d.rate_gbps, d.src, d.dst))


def merge_pure_ip_regens(state: NetworkState) -> int:
    """Convert pure-regeneration router terminations into back-to-back pairs.

    Two lightpaths L1: X->B and L2: B->Y with identical carried sets and the
    same mode pass traffic straight through the router at B; replace them by
    one lightpath X->..->Y with a b2b regen at B. Repeats until fixpoint.
    Returns the number of merges performed.
    """
    merges = 0
    changed = True
    while changed:
        changed = False
        by_start: dict[str, list[Lightpath]] = {}
        for lp in state.lightpaths.values():
            by_start.setdefault(lp.route[0], []).append(lp)
        for lst in by_start.values():
            lst.sort(key=lambda l: l.id)
        for l1 in sorted(state.lightpaths.values(), key=lambda l: l.id):
            if l1.id not in state.lightpaths:
                continue
            b = l1.route[-1]
            for l2 in by_start.get(b, ()):
                if l2.id == l1.id or l2.id not in state.lightpaths:
                    continue
                if l2.mode.key != l1.mode.key:
                    continue
                if sorted(l1.carried) != sorted(l2.carried) or not l1.carried:
                    continue
                merged_route = l1.route + l2.route[1:]
                if len(set(merged_route)) != len(merged_route):
                    continue
                merged = Lightpath(
                    state.new_lp_id(),
                    merged_route,
                    l1.mode,
                    l1.segments + l2.segments,
                    l1.b2b_regen_nodes + (b,) + l2.b2b_regen_nodes,
                    list(l1.carried),
                )
                del state.lightpaths[l1.id]
                del state.lightpaths[l2.id]
                state.lightpaths[merged.id] = merged
                _remap_records(state, {l1.id: merged.id, l2.id: merged.id})
                merges += 1
                changed = True
                break
            if changed:
                break
    return merges


def _unplace_demand(state: NetworkState, demand: Demand) -> None:
    """Remove every placement of ``demand`` and drop lightpaths left empty.

    Used when a deferred sub-flow blocks after its siblings were already
    committed: lightpaths the demand shares with other flows survive with the
    demand's capacity returned, dedicated ones are torn down and their
    spectrum freed.
    """
    touched: set[int] = set()
    for flow in state.records.pop(demand.key, []):
        for lp_id, rate in flow.placements:
            lp = state.lightpaths.get(lp_id)
            if lp is not None:
                lp.carried.remove((flow.flow_id, rate))
                touched.add(lp_id)
        flow.placements = []
    for lp_id in touched:
        lp = state.lightpaths[lp_id]
        if lp.carried:
            continue
        del state.lightpaths[lp_id]
        for seg in lp.segments:
            for u, v in zip(seg.nodes, seg.nodes[1:]):
                state.occupancy[(u, v)].discard(seg.channel)


def _remap_records(state: NetworkState, id_map: dict[int, int]) -> None:
    for flows in state.records.values():
        for flow in flows:
            out: list[tuple[int, int]] = []
            for lp_id, rate in flow.placements:
                lp_id = id_map.get(lp_id, lp_id)
                if out and out[-1] == (lp_id, rate):
                    continue
                out.append((lp_id, rate))
            flow.placements = out


def provision_all(
    topo: Topology,
    matrix: TrafficMatrix,
    arch: str,
    cfg: PlannerConfig | None = None,
    catalog=DEFAULT_CATALOG,
) -> NetworkState:
    """Provision the full matrix; blocking is recorded, never fatal."""
    cfg = cfg or PlannerConfig()
    # TrIPandZR provisions exactly like TrIP and converts pure regens afterwards,
    # which keeps its module tally identical to TrIP by construction.
    engine_arch = "TrIP" if arch == "TrIPandZR" else arch
    state = NetworkState(topo, engine_arch, cfg, catalog)
    # Stage 1: high-rate flows build the lightpath mesh; grooming-capable
    # architectures park flows below groom_min_rate for stage 2.
    deferred: list[tuple[Demand, FlowRecord]] = []
    for demand in _ordered_demands(matrix, cfg):
        try:
            route_demand(state, demand, deferred)
        except BlockedError as exc:
            state.blocked.append((demand, exc.reason))
    # Stage 2: shortest parked flows first, so longer ones can chain over the
    # short lightpaths these create in addition to the stage-1 mesh.
    def _deferred_km(item: tuple[Demand, FlowRecord]) -> float:
        paths = state.paths(item[1].src, item[1].dst)
        return topo.path_length_km(paths[0]) if paths else math.inf

    for demand, flow in sorted(deferred, key=_deferred_km):
        if demand.key not in state.records:
            continue  # a sibling sub-flow already blocked this demand
        undo: list = []
        try:
            sub = Demand(flow.src, flow.dst, flow.rate_gbps)
            _route_flow(state, flow, sub, undo, parent_rate=demand.rate_gbps)
        except BlockedError as exc:
            _unplace_demand(state, demand)
            state.blocked.append((demand, exc.reason))
    if arch == "TrIPandZR":
        state.arch = ARCHITECTURES["TrIPandZR"]
        merge_pure_ip_regens(state)
    state.audit()
    return state
