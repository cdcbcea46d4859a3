"""Command-line interface: scans, estimator tables, optimization, event display.

Every command resolves its options as built-in defaults < config file <
flags, materializes the full configuration into a JSON run manifest next
to its outputs, and can be re-run byte-identically from that manifest via
``branchgrad replay``. Exit codes: 0 ok, 1 runtime error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .detector import DetectorParams, material_map
from .dual import DomainError, Dual
from .estimators import Method
from .experiments import grad_table, optimize, scan
from .runio import ConfigError, RunManifest, parse_config_file, write_csv
from .sampling import PrimalContext
from .simulate import Event, Mode, SimConfig, run_alternative, simulate_event
from .streams import EventStreams, child_seed
from .discrete import pruned_weight

__all__ = ["main"]

log = logging.getLogger(__name__)

_DEFAULT_METHODS = "numeric,score,score_baseline,stochad"


@dataclass(frozen=True)
class _Opt:
    key: str
    kind: type
    default: Any
    help: str
    choices: tuple[str, ...] | None = None


def _physics_opts(mode_default: str = "shower", mode_choices=("shower", "energy-loss")) -> list[_Opt]:
    sim = SimConfig.__dataclass_fields__
    det = DetectorParams.__dataclass_fields__
    return [
        _Opt("seed", int, 1, "root seed; all streams derive from it"),
        _Opt("mode", str, mode_default, "simulation mode", mode_choices),
        _Opt("step_size", float, sim["step_size"].default, "propagation step (m)"),
        _Opt("e_init", float, sim["e_init"].default, "initial particle energy (GeV)"),
        _Opt("e_threshold", float, sim["e_threshold"].default, "retire particles below this energy (GeV)"),
        _Opt("e_loss", float, sim["e_loss"].default, "energy lost per interaction in energy-loss mode (GeV)"),
        _Opt("opening_angle", float, sim["opening_angle"].default, "shower split opening angle (rad)"),
        _Opt("target_radius", float, sim["target_radius"].default, "loss target radius (m)"),
        _Opt("max_steps", int, sim["max_steps"].default, "step budget per event"),
        _Opt("world_radius", float, sim["world_radius"].default, "world boundary (m); squared value is the no-hit loss"),
        _Opt("init_x", float, sim["initial_position"].default[0], "initial x (m)"),
        _Opt("init_y", float, sim["initial_position"].default[1], "initial y (m)"),
        _Opt("initial_direction", str, "random", "launch angle in radians, or 'random'"),
        _Opt("sharpness", float, det["sharpness"].default, "material edge sharpness beta"),
        _Opt("seg_freq", float, det["seg_freq"].default, "material segmentation frequency omega"),
        _Opt("r_max", float, det["r_max"].default, "radial extent of the sensitive band (m)"),
        _Opt("fd_eps", float, 0.01, "finite-difference step for the numeric estimator"),
    ]


_SCAN_OPTS = _physics_opts() + [
    _Opt("theta_min", float, 1.0, "grid start (m)"),
    _Opt("theta_max", float, 4.0, "grid end (m)"),
    _Opt("points", int, 31, "grid size"),
    _Opt("n", int, 200, "samples per grid point (losses and per-method gradients)"),
    _Opt("methods", str, _DEFAULT_METHODS, "comma-separated estimators, or 'all'"),
]

_GRADSTATS_OPTS = _physics_opts("both", ("shower", "energy-loss", "both")) + [
    _Opt("theta", float, 2.5, "evaluation point (m)"),
    _Opt("n", int, 5000, "samples per (mode, method) cell"),
    _Opt("methods", str, _DEFAULT_METHODS, "comma-separated estimators, or 'all'"),
]

_OPTIMIZE_OPTS = _physics_opts() + [
    _Opt("methods", str, _DEFAULT_METHODS, "comma-separated estimators, or 'all'"),
    _Opt("replicas", int, 10, "independent optimization runs"),
    _Opt("steps", int, 500, "Adam steps per replica"),
    _Opt("batch", int, 2, "gradient samples per step"),
    _Opt("lr", float, 0.01, "Adam learning rate"),
    _Opt("theta_init", float, 3.0, "starting radius (m)"),
    _Opt("theta_lo", float, 0.5, "lower clamp for theta (m)"),
    _Opt("theta_hi", float, 6.0, "upper clamp for theta (m)"),
]

_DISPLAY_OPTS = _physics_opts() + [
    _Opt("theta", float, 2.5, "detector start radius (m)"),
    _Opt("tangent", float, 1.0, "tangent seeded on theta; 0 disables the alternative"),
    _Opt("grid", int, 200, "material raster cells per axis"),
    _Opt("extent", float, 6.0, "raster half-width; covers [-extent, extent]^2 (m)"),
]


def _coerce(opt: _Opt, raw: str) -> Any:
    if opt.kind is str:
        return raw
    try:
        if opt.kind is int:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"option {opt.key}: cannot parse {raw!r} as {opt.kind.__name__}") from exc


def _resolve(opts: list[_Opt], args: argparse.Namespace) -> dict[str, Any]:
    file_cfg: dict[str, str] = {}
    if args.config is not None:
        file_cfg = parse_config_file(args.config)
        known = {o.key for o in opts}
        unknown = sorted(set(file_cfg) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s) for this command: {', '.join(unknown)}")
    resolved: dict[str, Any] = {}
    for opt in opts:
        value = getattr(args, opt.key)
        if value is None and opt.key in file_cfg:
            value = _coerce(opt, file_cfg[opt.key])
        if value is None:
            value = opt.default
        if opt.choices is not None and value not in opt.choices:
            raise ConfigError(f"option {opt.key}: {value!r} not one of {opt.choices}")
        resolved[opt.key] = value
    direction = resolved.get("initial_direction")
    if isinstance(direction, str) and direction != "random":
        resolved["initial_direction"] = _coerce(_Opt("initial_direction", float, None, ""), direction)
    return resolved


def _build_sim(cfg: dict[str, Any], mode: str | None = None) -> SimConfig:
    direction = cfg["initial_direction"]
    return SimConfig(
        mode=Mode(mode or cfg["mode"]),
        step_size=cfg["step_size"],
        e_init=cfg["e_init"],
        e_threshold=cfg["e_threshold"],
        e_loss=cfg["e_loss"],
        opening_angle=cfg["opening_angle"],
        target_radius=cfg["target_radius"],
        max_steps=cfg["max_steps"],
        world_radius=cfg["world_radius"],
        initial_position=(cfg["init_x"], cfg["init_y"]),
        initial_direction=None if direction == "random" else float(direction),
    )


def _build_detector(cfg: dict[str, Any], theta: float = 1.0, tangent: float = 1.0) -> DetectorParams:
    return DetectorParams(
        theta_r=Dual(theta, tangent),
        sharpness=cfg["sharpness"],
        seg_freq=cfg["seg_freq"],
        r_max=cfg["r_max"],
    )


def _parse_methods(text: str) -> list[Method]:
    if text.strip() == "all":
        text = _DEFAULT_METHODS
    methods = []
    for name in text.split(","):
        name = name.strip()
        if not name:
            continue
        try:
            methods.append(Method(name))
        except ValueError:
            raise ConfigError(f"unknown method {name!r}; pick from "
                              f"{', '.join(m.value for m in Method)}") from None
    if not methods:
        raise ConfigError("methods list is empty")
    return methods


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _run_scan(cfg: dict[str, Any], outdir: Path, threads: int) -> list[str]:
    _require(cfg["points"] >= 2, "points must be at least 2")
    _require(cfg["n"] >= 1, "n must be at least 1")
    _require(cfg["theta_max"] > cfg["theta_min"], "theta_max must exceed theta_min")
    _require(cfg["fd_eps"] > 0, "fd_eps must be positive")
    methods = _parse_methods(cfg["methods"])
    dt = (cfg["theta_max"] - cfg["theta_min"]) / (cfg["points"] - 1)
    thetas = [round(cfg["theta_min"] + i * dt, 10) for i in range(cfg["points"])]
    result = scan(
        _build_sim(cfg), _build_detector(cfg), thetas, cfg["n"], methods, cfg["seed"],
        fd_eps=cfg["fd_eps"], threads=threads,
    )
    write_csv(
        outdir / "scan_loss.csv",
        ["theta", "loss_mean", "loss_median", "q25", "q75", "poly_fit_grad"],
        [(r.theta, r.loss_mean, r.loss_median, r.loss_q25, r.loss_q75, r.poly_fit_grad) for r in result.loss_rows],
    )
    write_csv(
        outdir / "scan_grads.csv",
        ["theta", "method", "grad_mean", "grad_std", "n"],
        [(r.theta, r.method, r.grad_mean, r.grad_std, r.n) for r in result.grad_rows],
    )
    return ["scan_loss.csv", "scan_grads.csv"]


def _run_gradstats(cfg: dict[str, Any], outdir: Path, threads: int) -> list[str]:
    _require(cfg["n"] >= 1, "n must be at least 1")
    _require(cfg["fd_eps"] > 0, "fd_eps must be positive")
    methods = _parse_methods(cfg["methods"])
    modes = ["energy-loss", "shower"] if cfg["mode"] == "both" else [cfg["mode"]]
    rows = []
    for k, mode in enumerate(modes):
        rows.extend(
            grad_table(
                _build_sim(cfg, mode), _build_detector(cfg), cfg["theta"], cfg["n"],
                methods, child_seed(cfg["seed"], k), fd_eps=cfg["fd_eps"], threads=threads,
            )
        )
    write_csv(
        outdir / "gradstats.csv",
        ["mode", "method", "theta", "n", "mean", "std", "q25", "q50", "q75"],
        [(r.mode, r.method, r.theta, r.n, r.mean, r.std, r.q25, r.q50, r.q75) for r in rows],
    )
    return ["gradstats.csv"]


def _check_ordering(path: Path) -> None:
    import csv as _csv

    stds: dict[str, dict[str, float]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in _csv.DictReader(fh):
            stds.setdefault(row["mode"], {})[row["method"]] = float(row["std"])
    problems = []
    for mode, by_method in sorted(stds.items()):
        chain = ["numeric", "score", "score_baseline"]
        for hi, lo in zip(chain, chain[1:]):
            if hi in by_method and lo in by_method and not by_method[hi] > by_method[lo]:
                problems.append(f"{mode}: std({hi}) <= std({lo})")
        if "stochad" in by_method and "score_baseline" in by_method:
            if by_method["stochad"] > 2.0 * by_method["score_baseline"]:
                problems.append(f"{mode}: std(stochad) > 2*std(score_baseline)")
    if problems:
        raise RuntimeError("ordering assertion failed: " + "; ".join(problems))


def _run_optimize(cfg: dict[str, Any], outdir: Path, threads: int) -> list[str]:
    _require(cfg["steps"] >= 1, "steps must be at least 1")
    _require(cfg["replicas"] >= 1, "replicas must be at least 1")
    _require(cfg["batch"] >= 1, "batch must be at least 1")
    _require(cfg["lr"] > 0, "lr must be positive")
    _require(cfg["theta_lo"] < cfg["theta_hi"], "theta_lo must be below theta_hi")
    _require(cfg["fd_eps"] > 0, "fd_eps must be positive")
    methods = _parse_methods(cfg["methods"])
    _require(Method.SMOOTH_ONLY not in methods,
             "smooth_only has an identically zero tangent here; nothing to optimize")
    baseline = {Method.SCORE, Method.SCORE_BASELINE}
    if baseline & set(methods):
        _require(cfg["batch"] >= 2, "batch must be at least 2 for score-based methods")
    outputs = []
    for method in methods:
        runs = optimize(
            _build_sim(cfg), _build_detector(cfg), method,
            cfg["replicas"], cfg["steps"], cfg["batch"], cfg["theta_init"], cfg["seed"],
            lr=cfg["lr"], theta_bounds=(cfg["theta_lo"], cfg["theta_hi"]),
            fd_eps=cfg["fd_eps"], threads=threads,
        )
        name = f"opt_{method.value}.csv"
        rows = []
        for run in runs:
            for step, (theta, loss_val) in enumerate(zip(run.theta_trace, run.loss_trace)):
                rows.append((run.replica_id, step, theta, loss_val))
        write_csv(outdir / name, ["replica", "step", "theta", "loss"], rows)
        outputs.append(name)
    return outputs


def _event_doc(event: Event) -> dict[str, Any]:
    return {
        "tracks": [
            {
                "track_id": t.track_id,
                "parent_id": t.parent_id,
                "birth_step": t.birth_step,
                "energy": t.energy,
                "points": [[x, y] for x, y in t.points],
            }
            for t in (event.tracks or [])
        ],
        "hits": [{"x": h.pos[0], "y": h.pos[1], "r": h.r, "step": h.step_index} for h in event.hits],
        "termination": event.terminated_by.value,
        "n_steps": event.n_steps,
    }


def _run_display(cfg: dict[str, Any], outdir: Path, threads: int) -> list[str]:
    _require(cfg["grid"] >= 1, "grid must be at least 1")
    _require(cfg["extent"] > 0, "extent must be positive")
    sim = _build_sim(cfg)
    det = _build_detector(cfg, cfg["theta"], cfg["tangent"])
    streams = EventStreams(cfg["seed"], 0, 0)
    ctx = PrimalContext(streams, prune=True, record=True)
    primal = simulate_event(sim, det, ctx, record_tracks=True)

    alternative = None
    chosen = ctx.pruning.chosen
    if chosen is not None:
        trace = ctx.trace()
        alt_event, _ = run_alternative(
            sim, det, trace, chosen.draw_id, chosen.flipped_value, streams, record_tracks=True
        )
        alternative = _event_doc(alt_event)
        alternative["divergence_step"] = trace.draws[chosen.draw_id].step
        alternative["flipped_to"] = chosen.flipped_value
        alternative["weight"] = pruned_weight(ctx.pruning)

    nx = cfg["grid"]
    cell = 2.0 * cfg["extent"] / nx
    values = []
    for iy in range(nx):
        y = -cfg["extent"] + (iy + 0.5) * cell
        row = []
        for ix in range(nx):
            x = -cfg["extent"] + (ix + 0.5) * cell
            try:
                row.append(material_map((x, y), det).value)
            except DomainError:
                row.append(0.0)  # origin is a measure-zero hole in the map
        values.append(row)

    doc = {
        "mode": sim.mode.value,
        "theta": cfg["theta"],
        "tangent": cfg["tangent"],
        "primal": _event_doc(primal),
        "alternative": alternative,
        "material": {"nx": nx, "ny": nx, "extent": cfg["extent"], "values": values},
    }
    with open(outdir / "event.json", "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    return ["event.json"]


_COMMANDS: dict[str, tuple[list[_Opt], Callable[[dict[str, Any], Path, int], list[str]]]] = {
    "scan": (_SCAN_OPTS, _run_scan),
    "gradstats": (_GRADSTATS_OPTS, _run_gradstats),
    "optimize": (_OPTIMIZE_OPTS, _run_optimize),
    "display": (_DISPLAY_OPTS, _run_display),
}

_COMMAND_HELP = {
    "scan": "loss and gradient statistics over a theta grid",
    "gradstats": "estimator mean/std/quantile table at one theta",
    "optimize": "Adam optimization replicas per estimator",
    "display": "one event plus material raster as JSON",
}


def _execute(command: str, cfg: dict[str, Any], outdir: Path, threads: int) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    _, handler = _COMMANDS[command]
    outputs = handler(cfg, outdir, threads)
    manifest = RunManifest(command, cfg["seed"], cfg, outputs, __version__)
    manifest.write(outdir / f"{command}_manifest.json")
    for name in outputs:
        log.info("wrote %s", outdir / name)


def _cmd_standard(command: str, args: argparse.Namespace) -> int:
    opts, _ = _COMMANDS[command]
    cfg = _resolve(opts, args)
    outdir = Path(args.outdir)
    _execute(command, cfg, outdir, args.threads)
    if command == "gradstats" and args.assert_ordering:
        _check_ordering(outdir / "gradstats.csv")
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    manifest = RunManifest.load(args.manifest)
    if manifest.command not in _COMMANDS:
        raise ConfigError(f"manifest names unknown command {manifest.command!r}")
    opts, _ = _COMMANDS[manifest.command]
    known = {o.key for o in opts}
    missing = sorted(known - set(manifest.config))
    if missing:
        raise ConfigError(f"manifest config is missing key(s): {', '.join(missing)}")
    outdir = Path(args.outdir) if args.outdir is not None else Path(args.manifest).parent
    _execute(manifest.command, manifest.config, outdir, args.threads)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="branchgrad",
        description="Gradient estimators for branching stochastic programs: "
                    "detector-design scans, estimator tables, optimization, event display.",
    )
    parser.add_argument("--version", action="version", version=f"branchgrad {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    for command, (opts, _) in _COMMANDS.items():
        p = sub.add_parser(command, help=_COMMAND_HELP[command])
        for opt in opts:
            flag = "--" + opt.key.replace("_", "-")
            if opt.kind in (int, float):
                p.add_argument(flag, type=opt.kind, default=None, help=opt.help)
            else:
                p.add_argument(flag, default=None, choices=opt.choices, help=opt.help)
        p.add_argument("--config", default=None, help="key = value file; flags override it")
        p.add_argument("--outdir", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=1, help="worker count; output identical for any value")
        if command == "gradstats":
            p.add_argument("--assert-ordering", action="store_true",
                           help="fail (exit 1) unless the std ordering across estimators holds")
        p.set_defaults(func=lambda a, c=command: _cmd_standard(c, a))

    p = sub.add_parser("replay", help="re-run a command from its manifest, byte-identically")
    p.add_argument("manifest", help="path to a *_manifest.json written by a previous run")
    p.add_argument("--outdir", default=None, help="output directory (default: the manifest's)")
    p.add_argument("--threads", type=int, default=1, help="worker count")
    p.set_defaults(func=_cmd_replay)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
