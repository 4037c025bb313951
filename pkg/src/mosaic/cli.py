"""Command line entry point.

    mosaic verify <config.json> [--set key=value]...
    mosaic oracle <config.json> --state 0.1,0.0 [--k 5]
    mosaic export-model <config.json> --out model.tra

Exit status: 0 on success, 1 on configuration or validation errors,
2 when the state cap is hit.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
import time
from importlib import resources
from pathlib import Path

from .abstraction import DEFAULT_MAX_STATES, build_mdp, initial_grid
from .environment import make_environment
from .errors import ConfigError, MemoryGuardExceeded, MosaicError
from .extraction import default_eps
from .faults import fault_model_from_config
from .geometry import box_volume
from .mdp import export_model
from .model_check import concrete_reach, max_reach
from .network import BOUND_METHODS, load_network
from .refinement import initial_results, refine_iter
from .results import safe_volume, total_volume, volume_histogram, write_results

log = logging.getLogger("mosaic")

DEFAULTS = {
    "environment": None,
    "network": None,
    "fault_model": {"kind": "sticky", "p": 0.2},
    "horizon": 5,
    "eps": None,
    "p_safe": 0.2,
    "grid_cell_widths": None,
    "refinement_rounds": 0,
    "refine_eps": None,
    "max_splits_per_round": None,
    "max_states": DEFAULT_MAX_STATES,
    "bound_method": "planet",
    "cache": False,
    "output_dir": "mosaic-out",
    "workers": None,
    "histogram_bins": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
}

REPORT_NOTE = ("state counts and wall times are informational and comparable in kind "
               "to published scale figures; they are not acceptance targets")


def parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, item: str) -> None:
    """Apply one ``dotted.key=value`` override; values are read as JSON when possible."""
    if "=" not in item:
        raise ConfigError(f"override {item!r} is not key=value")
    key, value = item.split("=", 1)
    parts = key.strip().split(".")
    node = cfg
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = parse_value(value)


def load_config(path, overrides=()) -> dict:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read configuration {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a JSON object")
    cfg = copy.deepcopy(DEFAULTS)
    cfg.update(raw)
    for item in overrides:
        apply_override(cfg, item)
    unknown = set(cfg) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    for key in ("environment", "network"):
        if cfg[key] is None:
            raise ConfigError(f"configuration needs {key!r}")
    cfg["_base"] = str(path.resolve().parent)
    return cfg


def _network_path(cfg) -> Path:
    ref = cfg["network"]
    if isinstance(ref, str) and ref.startswith("builtin:"):
        return Path(str(resources.files("mosaic") / "fixtures" / f"{ref[8:]}.json"))
    p = Path(ref)
    return p if p.is_absolute() else Path(cfg["_base"]) / p


def worker_count(cfg) -> int:
    env = os.environ.get("MOSAIC_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"MOSAIC_WORKERS must be an integer, got {env!r}") from None
    else:
        n = cfg["workers"] or os.cpu_count() or 1
    if n < 1:
        raise ConfigError("worker count must be positive")
    return n


class Setup:
    """Everything a run needs, built from a validated configuration."""

    def __init__(self, cfg: dict):
        e = cfg["environment"]
        if isinstance(e, str):
            e = {"name": e}
        self.env = make_environment(e.get("name"), e.get("constants"), e.get("init_region"))
        self.net = load_network(_network_path(cfg))
        if self.net.input_dim != self.env.state_dim or self.net.output_dim != self.env.n_actions:
            raise ConfigError(f"network shape {self.net.input_dim}->{self.net.output_dim} does not "
                              f"match {self.env.name} ({self.env.state_dim} states, "
                              f"{self.env.n_actions} actions)")
        self.f = fault_model_from_config(cfg["fault_model"], self.env.n_actions)
        self.k = int(cfg["horizon"])
        if self.k < 1:
            raise ConfigError("horizon must be at least 1")
        widths = self.env.init_region.widths
        cells = cfg["grid_cell_widths"] or [w / 4 for w in widths]
        self.cells = initial_grid(self.env, cells)
        self.eps = cfg["eps"] if cfg["eps"] is not None else default_eps(self.env.init_region)
        self.refine_eps = cfg["refine_eps"] if cfg["refine_eps"] is not None else self.eps
        p_safe = cfg["p_safe"]
        if not isinstance(p_safe, (int, float)) or not 0.0 <= p_safe <= 1.0:
            raise ConfigError(f"p_safe must lie in [0, 1], got {p_safe!r}")
        self.p_safe = float(p_safe)
        if cfg["bound_method"] not in BOUND_METHODS:
            raise ConfigError(f"bound_method must be one of {sorted(BOUND_METHODS)}")
        self.cfg = cfg

    def build(self):
        return build_mdp(self.net, self.env, self.f, self.cells, self.k, self.eps,
                         bound_method=self.cfg["bound_method"],
                         max_states=int(self.cfg["max_states"]), cache=bool(self.cfg["cache"]))


def verify(cfg: dict) -> int:
    setup = Setup(cfg)
    out_dir = Path(cfg["output_dir"])
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {"environment": setup.env.name, "horizon": setup.k, "initial_cells": len(setup.cells),
              "note": REPORT_NOTE, "memory_guard": {"max_states": int(cfg["max_states"]),
                                                   "exceeded": False},
              "phase_seconds": {}}
    times = report["phase_seconds"]
    try:
        t0 = time.perf_counter()
        mdp = setup.build()
        times["build_mdp"] = time.perf_counter() - t0
        report.update(states=len(mdp), choices=mdp.n_choices, transitions=mdp.n_transitions)
        t0 = time.perf_counter()
        values = max_reach(mdp, setup.k)
        times["max_reach"] = time.perf_counter() - t0
        results = initial_results(mdp, values, setup.p_safe, setup.refine_eps)
        rounds = 0
        t0 = time.perf_counter()
        for results in refine_iter(setup.net, setup.env, setup.f, results, setup.k, setup.eps,
                                   setup.p_safe, int(cfg["refinement_rounds"]),
                                   refine_eps=setup.refine_eps,
                                   bound_method=cfg["bound_method"],
                                   max_states=int(cfg["max_states"]), cache=bool(cfg["cache"]),
                                   max_splits_per_round=cfg["max_splits_per_round"],
                                   workers=worker_count(cfg)):
            rounds += 1
        times["refine"] = time.perf_counter() - t0
    except MemoryGuardExceeded as exc:
        report["memory_guard"]["exceeded"] = True
        report["error"] = f"{exc.code}: {exc}"
        _write_report(out_dir, report)
        raise
    t0 = time.perf_counter()
    write_results(results, out_dir, setup.env.state_labels)
    times["export"] = time.perf_counter() - t0
    hist = volume_histogram(results, cfg["histogram_bins"])
    report.update(
        refinement_rounds_run=rounds, regions=len(results),
        total_volume=total_volume(results),
        init_volume=box_volume(setup.env.init_region),
        safe_volume=safe_volume(results, setup.p_safe),
        max_bound=max(r.upper_bound for r in results),
        histogram=[{"bin": list(b), "volume": v} for b, v in hist])
    _write_report(out_dir, report)
    print(f"{setup.env.name}: {len(mdp)} states, {len(results)} regions, safe volume "
          f"{report['safe_volume']:.6g} of {report['init_volume']:.6g} -> {out_dir}")
    return 0


def _write_report(out_dir: Path, report: dict) -> None:
    (out_dir / "report.json").write_text(json.dumps(report, indent=1) + "\n")


def oracle(cfg: dict, state, k=None) -> float:
    setup = Setup(cfg)
    return concrete_reach(setup.net, setup.env, setup.f, state, setup.k if k is None else k)


def export(cfg: dict, out) -> list[Path]:
    setup = Setup(cfg)
    return list(export_model(setup.build(), out))


def _parse_state(text: str):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"bad state {text!r}; expected comma-separated numbers") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mosaic", description="Safety verification of "
                                 "neural controllers under controller faults.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("verify", "build, check and refine; write results"),
                       ("oracle", "exact failure probability of one concrete state"),
                       ("export-model", "write the abstraction as .tra/.lab/.sta")):
        p = sub.add_parser(name, help=text)
        p.add_argument("config")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a configuration key (dotted keys reach nested objects)")
        if name == "oracle":
            p.add_argument("--state", required=True)
            p.add_argument("--k", type=int)
        if name == "export-model":
            p.add_argument("--out", required=True)
    return ap


def _glue_state(argv):
    # "--state -0.1,0" would otherwise read as an option
    out = []
    for item in argv:
        if out and out[-1] == "--state":
            out[-1] = f"--state={item}"
        else:
            out.append(item)
    return out


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_glue_state(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.set)
        if args.command == "verify":
            return verify(cfg)
        if args.command == "oracle":
            print(repr(oracle(cfg, _parse_state(args.state), args.k)))
            return 0
        for p in export(cfg, args.out):
            print(p)
        return 0
    except MemoryGuardExceeded as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 2
    except MosaicError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, KeyError) as exc:
        print(f"error [cli.{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
