"""Command-line harness: single runs, pause sweeps, spectral scans, codegen.

Configuration comes from an optional TOML file plus flag overrides; flags
win. Schedule durations are physical microseconds and are converted to
dimensionless time via ``time_scale`` (default 1000 units per microsecond);
integrator resolutions (output_step, record_step) are dimensionless.

Exit codes: 0 success, 1 validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, analysis, codegen, exports, spectral, verify
from .dynamics import DynamicsParams, integrate
from .errors import NumericalError, ValidationError
from .ising import SIGNATURE_CORE, IsingModel, build_quantum_signature, load_model_file
from .schedule import LINEAR_CURVES, ScheduleCurves, linear_path, load_curve_file, \
    make_pause_path

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml


@dataclass
class RunConfig:
    model_preset: str | None = "signature"
    model_file: str | None = None
    curves: str = "linear"
    tau_anneal: float = 1.0      # microseconds
    tau_pause: float = 1.0       # microseconds
    s_pause: float = 0.46
    alpha: float = 0.0045
    temperature: float = 0.3
    time_scale: float = 1000.0
    atol: float = 1.136871e-13
    rtol: float = 1.136871e-13
    output_step: float = 0.01
    reg_floor: float = 1e-24
    bare_energies: bool = False
    outdir: str = "out"
    workers: int = 1
    record_step: float = 0.1     # dimensionless time units
    timestamp: bool = True
    amplitudes: bool = False
    core: tuple[int, ...] | None = None
    path_breakpoints: list[tuple[float, float]] | None = None
    s_pause_grid: list[float] | None = None
    grid_step: float = 0.02
    tau_pairs: list[tuple[float, float]] = field(default_factory=lambda: [(1.0, 1.0)])
    k_levels: int = 20
    s_step: float = 0.002

    def dynamics_params(self) -> DynamicsParams:
        return DynamicsParams(
            alpha=self.alpha, temperature=self.temperature,
            time_scale=self.time_scale, reg_floor=self.reg_floor,
            atol=self.atol, rtol=self.rtol, output_step=self.output_step,
            bare_energies=self.bare_energies)

    def load_model(self) -> IsingModel:
        if self.model_file:
            return load_model_file(self.model_file)
        if self.model_preset == "signature":
            return build_quantum_signature()
        raise ValidationError(f"unknown model preset {self.model_preset!r}")

    def load_curves(self) -> ScheduleCurves:
        if self.curves == "linear":
            return LINEAR_CURVES
        return load_curve_file(self.curves)

    def partition_core(self):
        """(partition, core) when observables apply, else (None, None)."""
        if self.core is not None:
            core = tuple(self.core)
        elif self.model_file is None and self.model_preset == "signature":
            core = SIGNATURE_CORE
        else:
            return None, None
        return analysis.ground_state_partition(self.load_model(), core), core


_CONFIG_SECTIONS = {
    "model": {"preset": "model_preset", "file": "model_file"},
    "schedule": {"curves": "curves", "tau_anneal": "tau_anneal",
                 "tau_pause": "tau_pause", "s_pause": "s_pause"},
    "dynamics": {"alpha": "alpha", "temperature": "temperature",
                 "time_scale": "time_scale", "atol": "atol", "rtol": "rtol",
                 "output_step": "output_step", "reg_floor": "reg_floor",
                 "bare_energies": "bare_energies"},
    "run": {"outdir": "outdir", "workers": "workers", "record_step": "record_step",
            "timestamp": "timestamp", "amplitudes": "amplitudes", "core": "core"},
    "sweep": {"s_pause_grid": "s_pause_grid", "grid_step": "grid_step",
              "tau_pairs": "tau_pairs"},
    "spectrum": {"k": "k_levels", "s_step": "s_step"},
}


def load_config(path) -> RunConfig:
    cfg = RunConfig()
    with open(path, "rb") as fh:
        try:
            data = _toml.load(fh)
        except _toml.TOMLDecodeError as exc:
            raise ValidationError(f"cannot parse config {path}: {exc}") from exc
    for section, keys in _CONFIG_SECTIONS.items():
        block = data.get(section, {})
        if not isinstance(block, dict):
            raise ValidationError(f"config section [{section}] must be a table")
        for key, attr in keys.items():
            if key in block:
                setattr(cfg, attr, block[key])
    unknown = set(data) - set(_CONFIG_SECTIONS)
    if unknown:
        raise ValidationError(f"unknown config sections: {sorted(unknown)}")
    if cfg.core is not None:
        cfg.core = tuple(int(b) for b in cfg.core)
    cfg.tau_pairs = [tuple(map(float, pair)) for pair in cfg.tau_pairs]
    return cfg


def _apply_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    mapping = {
        "model_preset": "model_preset", "model_file": "model_file",
        "curves": "curves", "tau_anneal": "tau_anneal", "tau_pause": "tau_pause",
        "s_pause": "s_pause", "alpha": "alpha", "temperature": "temperature",
        "time_scale": "time_scale", "atol": "atol", "rtol": "rtol",
        "output_step": "output_step", "outdir": "outdir", "workers": "workers",
        "record_step": "record_step", "amplitudes": "amplitudes",
        "grid_step": "grid_step", "k_levels": "k_levels", "s_step": "s_step",
    }
    for arg_name, attr in mapping.items():
        val = getattr(args, arg_name, None)
        if val is not None:
            setattr(cfg, attr, val)
    if getattr(args, "bare_energies", False):
        cfg.bare_energies = True
    if getattr(args, "no_timestamp", False):
        cfg.timestamp = False
    if getattr(args, "core", None) is not None:
        cfg.core = tuple(int(b) for b in args.core.split(","))
    if getattr(args, "model_file", None):
        cfg.model_preset = None
    if getattr(args, "s_pause_grid", None) is not None:
        cfg.s_pause_grid = [float(s) for s in args.s_pause_grid.split(",") if s]
    if getattr(args, "path_breakpoints", None):
        pts = []
        for chunk in args.path_breakpoints.split(","):
            t, _, s = chunk.partition(":")
            pts.append((float(t), float(s)))
        cfg.path_breakpoints = pts
    if getattr(args, "tau_pairs", None):
        pairs = []
        for chunk in args.tau_pairs.split(","):
            a, _, p = chunk.partition("+")
            pairs.append((float(a), float(p)))
        cfg.tau_pairs = pairs
    return cfg


def _build_path(cfg: RunConfig, tau_anneal_us: float, tau_pause_us: float,
                s_pause: float):
    if cfg.path_breakpoints is not None:
        pts = tuple((t * cfg.time_scale, s) for t, s in cfg.path_breakpoints)
        return AnnealPath(breakpoints=pts)
    tau_a = tau_anneal_us * cfg.time_scale
    tau_p = tau_pause_us * cfg.time_scale
    if s_pause == 0.0 or tau_p == 0.0:
        return linear_path(tau_a)
    return make_pause_path(tau_a, tau_p, s_pause)


def cmd_run(cfg: RunConfig) -> int:
    model = cfg.load_model()
    curves = cfg.load_curves()
    params = cfg.dynamics_params()
    path = _build_path(cfg, cfg.tau_anneal, cfg.tau_pause, cfg.s_pause)
    record_every = max(1, round(cfg.record_step / cfg.output_step))
    traj = integrate(model, curves, path, params, record_every=record_every)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    exports.write_trajectory(outdir / "trajectory.tsv", traj,
                             amplitudes=cfg.amplitudes, timestamp=cfg.timestamp)
    partition, core = cfg.partition_core()
    if partition is not None:
        exports.write_ps_pc_series(outdir / "ps_pc.tsv", traj, partition,
                                   timestamp=cfg.timestamp)
        full = analysis.group_probabilities(traj, core=core)
        restricted = analysis.group_probabilities(traj, core=core, path_only=True)
        exports.write_group_series(outdir / "groups.tsv", full,
                                   timestamp=cfg.timestamp)
        exports.write_group_series(outdir / "groups_path_restricted.tsv", restricted,
                                   timestamp=cfg.timestamp)
        ps, pc, ratio = analysis.ps_pc(traj.final_state(), partition)
        print(f"final P_s = {ps:.6g}  P_c = {pc:.6g}  ratio = {ratio:.6g}")
    else:
        print("no ground-state partition for this model; wrote trajectory only")
    print(f"snapshots = {traj.times.size}  max norm drift = {traj.max_drift:.3e}")
    print(f"outputs in {outdir}")
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    model = cfg.load_model()
    curves = cfg.load_curves()
    params = cfg.dynamics_params()
    partition, _ = cfg.partition_core()
    if partition is None:
        raise ValidationError(
            "sweep needs a ground-state partition; use the signature preset or --core")
    if cfg.s_pause_grid is not None:
        grid = [float(s) for s in cfg.s_pause_grid]
    else:
        if not 0.0 < cfg.grid_step < 1.0:
            raise ValidationError(f"grid_step must be in (0, 1), got {cfg.grid_step}")
        grid = list(np.arange(cfg.grid_step, 1.0 - 1e-12, cfg.grid_step))
    rows = []
    for tau_a_us, tau_p_us in cfg.tau_pairs:
        rows.extend(analysis.ratio_sweep(
            model, curves, params,
            tau_a_us * cfg.time_scale, tau_p_us * cfg.time_scale,
            grid, partition=partition, workers=cfg.workers))
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    exports.write_sweep(outdir / "sweep.tsv", rows, timestamp=cfg.timestamp)
    n_err = sum(1 for r in rows if r.status != "ok")
    print(f"{len(rows)} rows ({n_err} failed) -> {outdir / 'sweep.tsv'}")
    return 0


def cmd_spectrum(cfg: RunConfig) -> int:
    if cfg.k_levels < 1:
        raise ValidationError(f"k must be >= 1, got {cfg.k_levels}")
    model = cfg.load_model()
    curves = cfg.load_curves()
    s_vals, gap_matrix = spectral.gap_grid(model, curves, cfg.k_levels, cfg.s_step)
    outdir = Path(cfg.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    exports.write_gap_grid(outdir / "gaps.tsv", s_vals, gap_matrix,
                           timestamp=cfg.timestamp)
    print(f"{s_vals.size} rows x {cfg.k_levels + 1} columns -> {outdir / 'gaps.tsv'}")
    return 0


def cmd_codegen(cfg: RunConfig, target: str, out_path: str | None) -> int:
    model = cfg.load_model()
    program = codegen.generate_rhs_program(model)
    text = codegen.emit(program, target)
    if out_path:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(text, encoding="utf-8")
        print(f"{len(program.equations)} equations -> {out_path}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify() -> int:
    results = verify.run_all()
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failed += 0 if ok else 1
    return 0 if failed == 0 else 2


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML config file")
    p.add_argument("--model-preset", dest="model_preset", help="built-in model name")
    p.add_argument("--model-file", dest="model_file", help="model description file")
    p.add_argument("--curves", help="'linear' or a 3-column (s, A, B) table file")
    p.add_argument("--alpha", type=float, help="thermal coupling strength")
    p.add_argument("--temperature", "-T", type=float, dest="temperature")
    p.add_argument("--time-scale", dest="time_scale", type=float,
                   help="dimensionless time units per microsecond")
    p.add_argument("--atol", type=float)
    p.add_argument("--rtol", type=float)
    p.add_argument("--output-step", dest="output_step", type=float,
                   help="renormalization grid (dimensionless)")
    p.add_argument("--bare-energies", dest="bare_energies", action="store_true",
                   help="rate matrix uses unscaled diagonal energies")
    p.add_argument("--outdir")
    p.add_argument("--no-timestamp", dest="no_timestamp", action="store_true",
                   help="omit the timestamp header line for byte-identical output")
    p.add_argument("--core", help="comma-separated core spin indices")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="idqa",
        description="Open-system quantum annealing simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one trajectory and export observables")
    _add_common_flags(p_run)
    p_run.add_argument("--tau-anneal", dest="tau_anneal", type=float,
                       help="anneal duration (microseconds)")
    p_run.add_argument("--tau-pause", dest="tau_pause", type=float,
                       help="pause duration (microseconds)")
    p_run.add_argument("--s-pause", dest="s_pause", type=float,
                       help="hold fraction in (0, 1); 0 disables the pause")
    p_run.add_argument("--record-step", dest="record_step", type=float,
                       help="snapshot spacing (dimensionless time units)")
    p_run.add_argument("--amplitudes", action="store_true",
                       help="write full amplitudes into the trajectory file")

    p_sweep = sub.add_parser("sweep", help="ratio vs pause point over a grid")
    _add_common_flags(p_sweep)
    p_sweep.add_argument("--grid-step", dest="grid_step", type=float,
                         help="uniform s_pause grid step (default 0.02)")
    p_sweep.add_argument("--s-pause-grid", dest="s_pause_grid",
                         help="comma-separated explicit s_pause values")
    p_sweep.add_argument("--tau-pairs", dest="tau_pairs",
                         help="comma-separated anneal+pause pairs in us, e.g. 1+1,2+2")
    p_sweep.add_argument("--workers", type=int, help="parallel integrations")

    p_spec = sub.add_parser("spectrum", help="instantaneous gap curves over s")
    _add_common_flags(p_spec)
    p_spec.add_argument("--k", dest="k_levels", type=int,
                        help="number of excited levels (default 20)")
    p_spec.add_argument("--s-step", dest="s_step", type=float,
                        help="s grid step (default 0.002)")

    p_gen = sub.add_parser("codegen", help="emit unrolled RHS source text")
    _add_common_flags(p_gen)
    p_gen.add_argument("--target", choices=codegen.EMIT_TARGETS, default="c")
    p_gen.add_argument("-o", "--output", dest="output", help="output file (default stdout)")

    sub.add_parser("verify", help="run the built-in oracle suites")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify()
        cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
        cfg = _apply_flags(cfg, args)
        if args.command == "run":
            return cmd_run(cfg)
        if args.command == "sweep":
            return cmd_sweep(cfg)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        if args.command == "codegen":
            return cmd_codegen(cfg, args.target, args.output)
        raise ValidationError(f"unknown command {args.command}")
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
