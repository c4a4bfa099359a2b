"""Command line front end.

Subcommands::

    ipowdm gen-traffic --topology j14 --scenario TS1 --seed 0
    ipowdm plan        --topology j14 --arch TrIP --scenario TS1 --seed 0 --out out/
    ipowdm power       --topology j14 --arch TrIP --scenario TS1 --seed 0
    ipowdm experiment  --topology j14 --topology g17 --runs 10 --out out/
    ipowdm compare     --in out/rows.csv --baseline OpIP

``--topology`` accepts the builtin names ``j14``/``g17`` or a JSON file path;
``--scenario`` accepts ``TS1``/``TS2``/``TS3`` or a JSON file path.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

from .dimensioning import (
    DimensioningConfig,
    PowerTable,
    load_power_config,
    network_power,
)
from .experiment import (
    ExperimentConfig,
    average_rows,
    compare,
    dicts_to_csv,
    rows_from_csv,
    rows_to_csv,
    rows_to_json,
    run_experiment,
    run_single,
)
from .rmsa import ARCH_NAMES, PlannerConfig
from .topology import Topology, load_topology, parse_topology
from .traffic import generate_traffic, load_scenario
from .transceiver import DEFAULT_CATALOG, load_catalog

BUILTIN_TOPOLOGIES = ("j14", "g17")


def load_named_topology(name_or_path: str) -> Topology:
    if name_or_path.lower() in BUILTIN_TOPOLOGIES:
        text = (
            resources.files("ipowdm.data")
            .joinpath(f"{name_or_path.lower()}.json")
            .read_text()
        )
        return parse_topology(text)
    return load_topology(name_or_path)


def _common_flags(p: argparse.ArgumentParser, multi=False):
    action = "append" if multi else "store"
    p.add_argument("--topology", action=action, required=True,
                   help="builtin name (j14/g17) or topology JSON file")
    p.add_argument("--scenario", action=action, default=None,
                   help="builtin name (TS1/TS2/TS3) or scenario JSON file")
    p.add_argument("--k", type=int, default=3, help="candidate paths per pair")
    p.add_argument("--modes", default=None, help="transceiver catalog JSON file")
    p.add_argument("--power-config", default=None,
                   help="JSON with power table / dimensioning overrides")


def _planner(args) -> PlannerConfig:
    return PlannerConfig(k=args.k)

def _power(args):
    if getattr(args, "power_config", None):
        return load_power_config(args.power_config)
    return PowerTable(), DimensioningConfig()


def _catalog(args):
    return load_catalog(args.modes) if getattr(args, "modes", None) else DEFAULT_CATALOG


def _write(path_or_none, name, text, out_dir=None):
    if out_dir is not None:
        target = Path(out_dir) / name
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(text)
        print(f"wrote {target}")
    elif path_or_none:
        Path(path_or_none).write_text(text)
        print(f"wrote {path_or_none}")
    else:
        sys.stdout.write(text)


def cmd_gen_traffic(args) -> int:
    topo = load_named_topology(args.topology)
    scenario = load_scenario(args.scenario or "TS1")
    matrix = generate_traffic(topo, scenario, args.seed)
    _write(args.out, None, matrix.to_csv())
    return 0


def cmd_plan(args) -> int:
    topo = load_named_topology(args.topology)
    scenario = load_scenario(args.scenario or "TS1")
    pt, dc = _power(args)
    row, state = run_single(
        topo, args.arch, scenario, args.seed,
        _planner(args), pt, dc, _catalog(args), strict=args.strict,
    )
    doc = state.to_dict()
    doc["summary"] = {
        "zr_count": row.zr_count, "zrplus_count": row.zrplus_count,
        "b2b_modules": row.b2b_modules, "router_ports": row.router_ports,
        "module_cost": row.module_cost, "blocked": row.blocked,
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        _write(None, f"plan_{topo.name}_{args.arch}_{scenario.name}_{args.seed}.json",
               text, out_dir=args.out)
    else:
        sys.stdout.write(text)
    return 0


def cmd_power(args) -> int:
    topo = load_named_topology(args.topology)
    scenario = load_scenario(args.scenario or "TS1")
    pt, dc = _power(args)
    row, state = run_single(
        topo, args.arch, scenario, args.seed,
        _planner(args), pt, dc, _catalog(args), strict=args.strict,
    )
    per_node, total = network_power(state, pt, dc)
    if args.format == "json":
        doc = {
            "per_node": {
                n: {"zr_zrplus": pb.zr_zrplus, "ip_router": pb.ip_router,
                    "optical": pb.optical, "total": pb.total}
                for n, pb in sorted(per_node.items())
            },
            "total": {"zr_zrplus": total.zr_zrplus, "ip_router": total.ip_router,
                      "optical": total.optical, "total": total.total},
        }
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    else:
        lines = ["node,power_zr,power_ip,power_optical,power_total"]
        for n, pb in sorted(per_node.items()):
            lines.append(f"{n},{pb.zr_zrplus:.4f},{pb.ip_router:.4f},"
                         f"{pb.optical:.4f},{pb.total:.4f}")
        lines.append(f"TOTAL,{total.zr_zrplus:.4f},{total.ip_router:.4f},"
                     f"{total.optical:.4f},{total.total:.4f}")
        text = "\n".join(lines) + "\n"
    _write(args.out, None, text)
    return 0


def cmd_experiment(args) -> int:
    topos = [load_named_topology(t) for t in args.topology]
    scen_names = args.scenario or ["TS1", "TS2", "TS3"]
    scenarios = [load_scenario(s) for s in scen_names]
    archs = args.arch or list(ARCH_NAMES)
    pt, dc = _power(args)
    cfg = ExperimentConfig(
        topologies=topos,
        archs=archs,
        scenarios=scenarios,
        seeds=[args.seed + i for i in range(args.runs)],
        planner=_planner(args),
        power=pt,
        dimensioning=dc,
        catalog=_catalog(args),
        strict=args.strict,
    )
    rows = run_experiment(cfg)
    averages = average_rows(rows)
    out_dir = args.out or "."
    if args.format == "json":
        _write(None, "rows.json", rows_to_json(rows), out_dir=out_dir)
        _write(None, "averages.json",
               json.dumps(averages, indent=2, sort_keys=True) + "\n", out_dir=out_dir)
    else:
        _write(None, "rows.csv", rows_to_csv(rows), out_dir=out_dir)
        _write(None, "averages.csv", dicts_to_csv(averages), out_dir=out_dir)
    return 0


def cmd_compare(args) -> int:
    rows = rows_from_csv(Path(args.infile).read_text())
    table = compare(average_rows(rows), args.baseline)
    if args.format == "json":
        text = json.dumps(table, indent=2, sort_keys=True) + "\n"
    else:
        text = dicts_to_csv(table)
    _write(args.out, None, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ipowdm")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-traffic", help="emit a traffic matrix as CSV")
    _common_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_gen_traffic)

    p = sub.add_parser("plan", help="provision one run and dump the lightpaths")
    _common_flags(p)
    p.add_argument("--arch", choices=ARCH_NAMES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("power", help="per-node and total power for one run")
    _common_flags(p)
    p.add_argument("--arch", choices=ARCH_NAMES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_power)

    p = sub.add_parser("experiment", help="full batch study with averages")
    _common_flags(p, multi=True)
    p.add_argument("--arch", action="append", choices=ARCH_NAMES, default=None)
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--runs", type=int, default=10, help="seeds per cell")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("compare", help="savings versus a baseline architecture")
    p.add_argument("--in", dest="infile", required=True, help="rows CSV from experiment")
    p.add_argument("--baseline", default="OpIP", choices=ARCH_NAMES)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
