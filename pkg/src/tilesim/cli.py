"""Command-line interface.

Exit codes: 0 success, 1 spec error, 2 infeasible tiling.  Reports contain
no timestamps, so identical inputs produce byte-identical outputs; the
metadata block carries input file hashes, the tool version, and the model
conventions in effect.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import random
import sys
import time
from pathlib import Path

from . import __version__, explorer, oracle, simulate
from .conv_engine import conv_eval
from .energy import compute_energy, load_backend_characterization
from .explorer import DSE_PARAMS, DseConfig
from .specs import (
    DRAM_KEYS,
    SRAM_KEYS,
    NetworkStats,
    SpecError,
    load_hardware_spec,
    load_network_spec,
    save_hardware_spec,
    save_network_spec,
)
from .tiler import TilingInfeasibleError
from .train_expand import expand_training

OP_COLUMNS = ("mac", "add", "sub", "mul", "div", "max")

CSV_COLUMNS = (
    ["layer", "kind", "executed_on", "compute_cycles", "stall_cycles", "total_cycles"]
    + [f"dram_{k}_bits" for k in DRAM_KEYS]
    + [f"sram_{k.lower()}_bits" for k in SRAM_KEYS]
    + [f"ops_{k}" for k in OP_COLUMNS]
)


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _metadata(args, extra=None) -> dict:
    meta = {
        "tool": "tilesim",
        "version": __version__,
        "hw_file": str(args.hw),
        "hw_sha256": _sha256(args.hw),
    }
    if getattr(args, "net", None):
        meta["net_file"] = str(args.net)
        meta["net_sha256"] = _sha256(args.net)
    if extra:
        meta.update(extra)
    return meta


def _stats_row(s) -> list:
    return ([s.layer, s.kind, s.executed_on, s.compute_cycles, s.stall_cycles,
             s.total_cycles]
            + [s.dram_bits[k] for k in DRAM_KEYS]
            + [s.sram_bits[k] for k in SRAM_KEYS]
            + [s.op_counts.get(k, 0) for k in OP_COLUMNS])


def _write_layers_csv(stats: NetworkStats, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for s in stats.layers:
            writer.writerow(_stats_row(s))


def _aggregates(stats: NetworkStats) -> dict:
    return {
        "c_sa": stats.c_sa,
        "c_simd": stats.c_simd,
        "l_total": stats.l_total,
        "dram_bits": stats.dram_bits,
        "dram_bits_total": stats.dram_bits_total,
        "sram_bits": stats.sram_bits,
        "op_counts": stats.op_counts,
    }


def _load_workload(args, hw):
    layers = load_network_spec(args.net, hw)
    if getattr(args, "batch", None):
        layers = simulate.scale_batch(layers, args.batch)
    if args.mode == "training":
        layers = expand_training(layers).all_layers
    else:
        layers = simulate.inference_layers(layers)
    return layers


def cmd_simulate(args) -> int:
    hw = load_hardware_spec(args.hw)
    layers = _load_workload(args, hw)
    stats = simulate.evaluate_network(layers, hw, variant=args.variant,
                                      include_edges=args.include_edges)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "metadata": _metadata(args, {"mode": args.mode, "variant": args.variant,
                                     "include_edges": args.include_edges,
                                     "batch": args.batch}),
        "aggregates": _aggregates(stats),
        "layers": [dict(zip(CSV_COLUMNS, _stats_row(s))) for s in stats.layers],
    }
    if args.energy:
        bc = load_backend_characterization(args.energy)
        report["energy"] = compute_energy(stats, bc).to_dict()
        report["metadata"]["energy_file"] = str(args.energy)
        report["metadata"]["energy_sha256"] = _sha256(args.energy)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    _write_layers_csv(stats, out / "layers.csv")
    print(f"{len(stats.layers)} layers  L_total={stats.l_total}  "
          f"C_SA={stats.c_sa}  C_SIMD={stats.c_simd}  "
          f"DRAM={stats.dram_bits_total} bits")
    if args.energy:
        e = report["energy"]
        print(f"E_total={e['e_total_j']:.6g} J  P_avg={e['p_avg_w']:.6g} W  "
              f"runtime={e['runtime_s']:.6g} s")
    print(f"wrote {out / 'report.json'} and {out / 'layers.csv'}")
    return 0


def cmd_expand(args) -> int:
    hw = load_hardware_spec(args.hw)
    layers = load_network_spec(args.net, hw)
    if args.batch:
        layers = simulate.scale_batch(layers, args.batch)
    graph = expand_training(layers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_network_spec(graph.all_layers, out / "training_graph.json")
    print(f"forward {len(graph.forward)}  backward {len(graph.backward)}  "
          f"updates {len(graph.updates)}")
    print(f"wrote {out / 'training_graph.json'}")
    return 0


def cmd_compare(args) -> int:
    hw = load_hardware_spec(args.hw)
    layers = _load_workload(args, hw)
    totals = {}
    per_layer = {}
    for variant in ("nostall", "simplified", "full"):
        stats = simulate.evaluate_network(layers, hw, variant=variant)
        totals[variant] = stats.l_total
        per_layer[variant] = [s.total_cycles for s in stats.layers]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "compare.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["layer", "kind", "nostall", "simplified", "full",
                         "full_over_nostall"])
        stats = simulate.evaluate_network(layers, hw, variant="full")
        for i, s in enumerate(stats.layers):
            ns = per_layer["nostall"][i]
            writer.writerow([s.layer, s.kind, ns, per_layer["simplified"][i],
                             per_layer["full"][i],
                             f"{per_layer['full'][i] / ns:.4f}" if ns else ""])
    print(f"L_total  nostall={totals['nostall']}  simplified={totals['simplified']}  "
          f"full={totals['full']}")
    print(f"wrote {out / 'compare.csv'}")
    return 0


def _dse_config(args) -> DseConfig:
    size_grid = tuple(int(v) * 1024 for v in args.size_grid.split(",")) if args.size_grid else ()
    bw_grid = tuple(int(v) for v in args.bw_grid.split(",")) if args.bw_grid else ()
    return DseConfig(
        sram_budget_bytes=args.sram_budget_kb * 1024,
        bw_budget_bits_per_cycle=args.bw_budget,
        deviation_fraction=args.deviation,
        size_grids={p: size_grid for p in explorer.SIZE_PARAMS} if size_grid else {},
        bw_grids={p: bw_grid for p in explorer.BW_PARAMS} if bw_grid else {},
        variant=args.variant,
        workers=args.workers,
    )


def cmd_dse(args) -> int:
    hw = load_hardware_spec(args.hw)
    layers = _load_workload(args, hw)
    cfg = _dse_config(args)
    result = explorer.run_dse(layers, hw, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    explorer.write_dse_csv(result.all_points, out / "dse.csv")
    landscape = explorer.extract_landscape(result.all_points, result.optimal, args.within)
    summary = {
        "metadata": _metadata(args, {"mode": args.mode, "variant": args.variant,
                                     "sram_budget_bytes": cfg.sram_budget_bytes,
                                     "bw_budget_bits_per_cycle": cfg.bw_budget_bits_per_cycle,
                                     "deviation_fraction": cfg.deviation_fraction,
                                     "grid_points": cfg.grid_point_count}),
        "optimal": {"params": dict(zip(DSE_PARAMS, result.optimal.params)),
                    "metric": result.optimal.metric},
        "worst": {"params": dict(zip(DSE_PARAMS, result.worst.params)),
                  "metric": result.worst.metric},
        "improvement_ratio": result.improvement_ratio,
        "landscape_within": args.within,
        "landscape_size": len(landscape),
    }
    if landscape:
        sram_pick = explorer.minimized_sram_pick(landscape)
        bw_pick = explorer.minimized_bw_pick(landscape)
        summary["minimized_sram"] = {"params": dict(zip(DSE_PARAMS, sram_pick.params)),
                                     "metric": sram_pick.metric}
        summary["minimized_bandwidth"] = {"params": dict(zip(DSE_PARAMS, bw_pick.params)),
                                          "metric": bw_pick.metric}
    (out / "dse_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    # hardware spec at the optimal point, ready for `tilesim sensitivity --hw`
    save_hardware_spec(explorer.apply_point(hw, result.optimal), out / "optimal_hw.json")
    print(f"{cfg.grid_point_count} grid points, "
          f"{len(result.feasible_points)} feasible")
    print(f"optimal metric {result.optimal.metric}  worst {result.worst.metric}  "
          f"improvement {result.improvement_ratio:.2f}x")
    print(f"wrote {out / 'dse.csv'} and {out / 'dse_summary.json'}")
    return 0


def cmd_sensitivity(args) -> int:
    hw = load_hardware_spec(args.hw)
    layers = _load_workload(args, hw)
    cfg = _dse_config(args)
    params = list(DSE_PARAMS) if args.param == "all" else [args.param]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for param in params:
        rows = explorer.sensitivity_sweep(layers, hw, param, cfg)
        path = out / f"sensitivity_{param}.csv"
        explorer.write_sensitivity_csv(rows, param, path)
        print(f"{param}: {len(rows)} feasible values -> {path}")
    return 0


def cmd_oracle_check(args) -> int:
    from .testing import random_conv_instance, random_simd_instance

    t0 = time.monotonic()
    mismatches = 0
    for seed in range(args.seeds):
        rng = random.Random(seed)
        shape, tiling, hw = random_conv_instance(rng, max_dim=args.max_dim)
        stats = conv_eval(shape, tiling, hw, variant="full")
        trace = oracle.simulate_conv(shape, tiling, hw)
        ok = (trace.total_cycles == stats.total_cycles
              and all(trace.bits[k] == stats.dram_bits[k] for k in trace.bits))
        if not ok:
            mismatches += 1
            print(f"seed {seed}: analytical total={stats.total_cycles} "
                  f"oracle total={trace.total_cycles}")
            print(f"  shape={shape}")
            print(f"  tiling={tiling.outer}")
            print(f"  analytical bits={stats.dram_bits}")
            print(f"  oracle bits={dict(trace.bits)}")
            break
        kind, sshape, stiling, shw = random_simd_instance(rng, max_dim=args.max_dim)
        sstats = simulate.evaluate_layer(_simd_layer(kind, sshape, stiling), shw)
        strace = oracle.simulate_simd(kind, sshape, stiling, shw)
        if strace.total_cycles != sstats.total_cycles:
            mismatches += 1
            print(f"seed {seed}: SIMD {kind} analytical={sstats.total_cycles} "
                  f"oracle={strace.total_cycles}")
            break
    elapsed = time.monotonic() - t0
    if mismatches:
        print(f"FAIL: mismatch found ({elapsed:.1f}s)")
        return 3
    print(f"{args.seeds}/{args.seeds} exact matches ({elapsed:.1f}s)")
    return 0


def _simd_layer(kind, shape, tiling):
    from .specs import LayerSpec

    return LayerSpec(name=f"check.{kind}", kind=kind, shape=shape, tiling=tiling)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tilesim",
        description="Analytical performance simulator for systolic+SIMD DNN accelerators")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, net=True):
        p.add_argument("--hw", required=True, help="hardware spec JSON")
        if net:
            p.add_argument("--net", required=True, help="network spec JSON")
            p.add_argument("--mode", choices=("inference", "training"), default="inference")
            p.add_argument("--batch", type=int, default=None,
                           help="override the batch dimension of every layer")
        p.add_argument("--out", default="out", help="output directory")

    p = sub.add_parser("simulate", help="evaluate a network and write reports")
    common(p)
    p.add_argument("--variant", choices=("full", "nostall", "simplified"), default="full")
    p.add_argument("--energy", default=None, help="backend characterization JSON")
    p.add_argument("--include-edges", action="store_true",
                   help="count first-tile load and last-tile store cycles")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("expand", help="export the training graph of a network")
    common(p)
    p.set_defaults(func=cmd_expand, mode="training")

    p = sub.add_parser("compare", help="run all three model variants side by side")
    common(p)
    p.set_defaults(func=cmd_compare)

    for name, fn in (("dse", cmd_dse), ("sensitivity", cmd_sensitivity)):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--variant", choices=("full", "nostall", "simplified"), default="full")
        p.add_argument("--sram-budget-kb", type=int, required=True)
        p.add_argument("--bw-budget", type=int, required=True)
        p.add_argument("--deviation", type=float, default=0.15)
        p.add_argument("--size-grid", default=None, help="comma-separated kB values")
        p.add_argument("--bw-grid", default=None, help="comma-separated bits/cycle values")
        p.add_argument("--workers", type=int, default=1)
        if name == "dse":
            p.add_argument("--within", type=float, default=0.15,
                           help="landscape window around the optimum")
        else:
            p.add_argument("--param", default="all",
                           choices=("all",) + DSE_PARAMS)
        p.set_defaults(func=fn)

    p = sub.add_parser("oracle-check",
                       help="randomized analytical-vs-oracle equivalence check")
    p.add_argument("--seeds", type=int, default=200)
    p.add_argument("--max-dim", type=int, default=16)
    p.set_defaults(func=cmd_oracle_check)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except TilingInfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
