"""Command-line entry point.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import platform
import sys
import time
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, config_from_dict, config_to_dict, load_config
from .em_field import write_sweep_csv
from .experiment import header_comment, run_chamber, run_v2v_sweep, write_results_csv
from .geometry import build_cylindrical_layout
from .phase import (AngleSpec, phase_cylindrical_mirror, phase_general, quantize_phases,
                    write_phase_csv, zero_reference_profile)

log = logging.getLogger("cirsim")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


@dataclass(frozen=True)
class RunManifest:
    subcommand: str
    config: Path | None
    out: Path
    seed: int | None = None
    threads: int = 1


def _load(manifest: RunManifest) -> RunConfig:
    if manifest.config is None:
        cfg = config_from_dict({})
    else:
        cfg = load_config(manifest.config)
    if manifest.seed is not None:
        cfg = replace(cfg, sweep=replace(cfg.sweep, global_seed=manifest.seed))
    return cfg


def cmd_v2v(manifest: RunManifest) -> int:
    cfg = _load(manifest)
    t0 = time.perf_counter()
    stats = run_v2v_sweep(cfg.sweep, threads=manifest.threads)
    seed = cfg.sweep.global_seed
    write_results_csv(stats, manifest.out, header_comment(seed))
    diag = {
        "tool": "cirsim",
        "version": __version__,
        "seed": seed,
        "threads": manifest.threads,
        "elapsed_s": round(time.perf_counter() - t0, 3),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "failed_drops": {f"{s.mode}/{s.rho:g}/{s.P:g}": s.failed for s in stats if s.failed},
        "config": config_to_dict(cfg),
    }
    diag_path = manifest.out.with_suffix(manifest.out.suffix + ".json")
    diag_path.write_text(json.dumps(diag, indent=2, sort_keys=True) + "\n")
    for s in stats:
        log.info("%-6s rho=%-5g P=%-4g mean=%8.2f dB std=%6.2f dB", s.mode, s.rho, s.P,
                 s.mean_db, s.std_db)
    return EXIT_OK


def cmd_chamber(manifest: RunManifest) -> int:
    cfg = _load(manifest)
    ref, pat, summary = run_chamber(cfg.chamber)
    seed = cfg.sweep.global_seed
    write_sweep_csv(ref, pat, manifest.out, header_comment(seed))
    print(f"focusing gain: {summary['focusing_gain_db']:.2f} dB "
          f"(-3 dB width {summary['cirs_width_3db_deg']:.2f} deg vs "
          f"{summary['ref_width_3db_deg']:.2f} deg reference)")
    return EXIT_OK


def cmd_phase(manifest: RunManifest) -> int:
    cfg = _load(manifest)
    job = cfg.phase
    if job.surface == "chamber":
        params = cfg.chamber.cirs_params()
        default_theta = cfg.chamber.design_angle_deg
    else:
        params = cfg.sweep.surface.params(cfg.sweep.link.wavelength)
        default_theta = cfg.sweep.surface.theta_bar_deg
    layout = build_cylindrical_layout(params)
    if job.design == "mirror":
        theta = default_theta if job.theta_bar_deg is None else job.theta_bar_deg
        profile = phase_cylindrical_mirror(layout, math.radians(theta))
    elif job.design == "general":
        angles = AngleSpec(*(math.radians(v) for v in (job.theta_in_deg, job.phi_in_deg,
                                                       job.theta_out_deg, job.phi_out_deg)))
        profile = phase_general(layout, angles)
    else:
        profile = zero_reference_profile(layout)
    if job.levels is not None:
        profile = quantize_phases(profile, job.levels)
    write_phase_csv(layout, profile, manifest.out, header_comment(cfg.sweep.global_seed))
    span = float(np.ptp(profile.unwrapped))
    print(f"{layout.size} elements, unwrapped phase span {span:.3f} rad")
    return EXIT_OK


COMMANDS = {"v2v": cmd_v2v, "chamber": cmd_chamber, "phase": cmd_phase}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cirsim", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cirsim {__version__}")
    sub = p.add_subparsers(dest="subcommand", required=True)
    help_text = {
        "v2v": "Monte Carlo highway SNR sweep",
        "chamber": "simulated anechoic-chamber scattering sweep",
        "phase": "export a surface phase profile",
    }
    for name in COMMANDS:
        s = sub.add_parser(name, help=help_text[name])
        s.add_argument("--config", type=Path, help="JSON configuration file")
        s.add_argument("--out", type=Path, required=True, help="output CSV path")
        s.add_argument("--seed", type=int, help="override sweep.global_seed")
        s.add_argument("--threads", type=int, default=1, help="worker processes")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s")
    if args.seed is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    manifest = RunManifest(args.subcommand, args.config, args.out, args.seed, args.threads)
    try:
        return COMMANDS[args.subcommand](manifest)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - stable exit-code contract
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
