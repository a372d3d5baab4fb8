"""Command-line driver: one subcommand per reproduced figure.

Every run writes a CSV table, a JSON manifest and (unless disabled) PNG
figures into the output directory. Exit status is 0 on success, 1 on a
configuration or input error and 2 when beam feedback misses its threshold
(outputs are still written).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__, plotting
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .effective import EffectiveModelSpec, c_scaling, doublet_splitting, level_curves, wkb_gap
from .hamiltonian import RingSpec
from .io import write_csv, write_manifest
from .observables import (
    SolverSettings,
    sweep_currents,
    sweep_density,
    sweep_flux,
    sweep_gaps,
)
from .parallel import default_workers, pmap

log = logging.getLogger("aquid")

TWO_PI = "6.283185307179586"

# used when --config is omitted
PRESETS = {
    "spectrum": f"""
model:
  ring: {{M: 8, N: 10, U: 1.0, weak_links: [[2, 0.5], [5, 0.8], [8, 0.8]]}}
sweep:
  Omega: {{start: 0.0, stop: {TWO_PI}, num: 101}}
""",
    "currents": f"""
model:
  ring: {{M: 8, N: 10, U: 1.0, weak_links: [[2, 0.5], [5, 0.8], [8, 0.8]]}}
sweep:
  Omega: {{start: 0.0, stop: {TWO_PI}, num: 41}}
""",
    "gaps": """
model:
  ring: {M: 8, N: 10, weak_links: [[2, 0.5], [5, 0.8], [8, 0.8]]}
sweep:
  U: [0.5, 1.0, 2.0, 4.0, 8.0, 16.0]
""",
    "density": """
model:
  ring: {M: 8, N: 10, U: 1.0, weak_links: [[2, 0.5], [5, 0.8], [8, 0.8]]}
""",
    "effective": f"""
model:
  effective: {{M: 12, Jp: 0.7, Jpp: 0.8, U: 0.5}}
sweep:
  Omega: {{start: 0.0, stop: {TWO_PI}, num: 61}}
  M: [12, 18, 24, 30]
""",
    "wkb": """
model:
  wkb: {U: 1.0}
sweep:
  delta: {start: 1.5, stop: 4.0, step: 0.5}
  EJ_over_U: [1.0, 2.0, 3.0, 4.0]
""",
    "shape": """
model:
  beam:
    aberration: {defocus: 0.5}
""",
}

EXPECTED_MODEL = {
    "spectrum": "ring", "currents": "ring", "gaps": "ring", "density": "ring",
    "effective": "effective", "wkb": "wkb", "shape": "beam",
}


class UsageError(ValueError):
    pass


# -- helpers --------------------------------------------------------------

def _ring_spec(params: dict) -> RingSpec:
    return RingSpec(
        M=params["M"], N=params["N"], U=params["U"], t=params["t"],
        weak_links=tuple((int(i), float(s)) for i, s in params["weak_links"]),
        Omega=params["Omega"], flux_mode=params["flux_mode"], flux_link=params["flux_link"],
    )


def _settings(cfg: ExperimentConfig) -> SolverSettings:
    s = cfg.solver
    return SolverSettings(tol=s["tol"], seed=s["seed"], max_dimension=s["max_dimension"])


def _require(cfg: ExperimentConfig, command: str, axes: tuple[str, ...], any_of: bool = False):
    present = [a for a in axes if a in cfg.sweep]
    if (any_of and not present) or (not any_of and len(present) != len(axes)):
        need = " or ".join(axes) if any_of else " and ".join(axes)
        raise UsageError(f"{command} needs sweep axis {need}")


def _reject(cfg: ExperimentConfig, command: str, allowed: set[str]):
    extra = sorted(set(cfg.sweep) - allowed)
    if extra:
        raise UsageError(f"{command} does not sweep {', '.join(extra)}")


def _figure(cfg, outputs: list[str], out: Path, name: str, fn, *args, **kwargs):
    if not cfg.output["figures"]:
        return
    fn(*args, out / name, **kwargs)
    outputs.append(name)


def _table(out: Path, name: str, table: dict, outputs: list[str]):
    write_csv(out / name, table)
    outputs.append(name)


# -- subcommands ----------------------------------------------------------

def run_spectrum(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    _require(cfg, "spectrum", ("Omega",))
    _reject(cfg, "spectrum", {"Omega"})
    spec = _ring_spec(cfg.params)
    k = max(cfg.solver["k"], 3)
    table = sweep_flux(spec, cfg.sweep["Omega"], k, _settings(cfg), workers)
    e = np.column_stack([table[f"E{i}"] for i in range(3)])
    table["gap"] = e[:, 1] - e[:, 0]
    table["quality"] = (e[:, 1] - e[:, 0]) / (e[:, 2] - e[:, 0])
    outputs: list[str] = []
    _table(out, "spectrum.csv", table, outputs)
    _figure(cfg, outputs, out, "spectrum.png", plotting.plot_levels, table)
    return outputs


def _normalized(values: np.ndarray) -> np.ndarray:
    scale = np.nanmax(np.abs(values)) if np.isfinite(values).any() else 0.0
    return values / scale if scale > 0 else np.full_like(values, np.nan)


def run_currents(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    _require(cfg, "currents", ("Omega",))
    _reject(cfg, "currents", {"Omega"})
    spec = _ring_spec(cfg.params)
    settings = _settings(cfg)
    omegas = cfg.sweep["Omega"]
    table = sweep_flux(spec, omegas, 2, settings, workers)
    curves = sweep_currents(spec, omegas, (0, 1), cfg.solver["current_step"], settings, workers)
    for c in curves:
        table[f"I{c.level}"] = c.currents
    for c in curves:
        table[f"I{c.level}_norm"] = _normalized(c.currents)
    outputs: list[str] = []
    _table(out, "currents.csv", table, outputs)
    _figure(cfg, outputs, out, "currents.png", plotting.plot_currents, table)
    return outputs


def run_gaps(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    axes = ("t_prime", "t_second", "N", "U")
    _require(cfg, "gaps", axes, any_of=True)
    _reject(cfg, "gaps", set(axes))
    spec = _ring_spec(cfg.params)
    grids = {a: cfg.sweep[a].tolist() for a in axes if a in cfg.sweep}
    table = sweep_gaps(spec, grids, _settings(cfg), workers)
    outputs: list[str] = []
    _table(out, "gaps.csv", table, outputs)
    # x axis: the last swept axis; colour by the first remaining one
    swept = [a for a in axes if a in grids]
    x = "U" if "U" in grids else ("N" if "N" in grids else swept[-1])
    others = [a for a in swept if a != x and len(grids[a]) > 1]
    _figure(cfg, outputs, out, "gaps.png", plotting.plot_gaps, table, x,
            group=others[0] if others else None)
    return outputs


def run_density(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    axes = ("t_prime", "t_second", "N", "U")
    _reject(cfg, "density", set(axes))
    if "N" in cfg.sweep:
        raise UsageError("density cannot sweep N: the profile length is fixed by M")
    spec = _ring_spec(cfg.params)
    grids = {a: cfg.sweep[a].tolist() for a in axes if a in cfg.sweep}
    table = sweep_density(spec, grids, _settings(cfg), workers)
    outputs: list[str] = []
    _table(out, "density.csv", table, outputs)
    label = next((a for a in axes if a in grids and len(grids[a]) > 1), None)
    _figure(cfg, outputs, out, "density.png", plotting.plot_density, table, label_key=label)
    return outputs


def _effective_spec(params: dict, **override) -> EffectiveModelSpec:
    keys = ("M", "J", "Jp", "Jpp", "U", "Omega", "kinetic")
    kw = {k: params[k] for k in keys}
    kw.update(override)
    return EffectiveModelSpec(**kw)


def run_effective(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    _require(cfg, "effective", ("Omega", "M"), any_of=True)
    p = cfg.params
    if p["include_quadratic"]:
        raise UsageError("the 1D level curves are computed without quadratic terms; "
                         "set include_quadratic: false")
    outputs: list[str] = []
    if "Omega" in cfg.sweep:
        spec = _effective_spec(p)
        table = level_curves(spec, cfg.sweep["Omega"], p["levels"], p["basis_size"])
        if p["levels"] >= 3:
            table["quality"] = (table["E1"] - table["E0"]) / (table["E2"] - table["E0"])
        _table(out, "effective_levels.csv", table, outputs)
        _figure(cfg, outputs, out, "effective_levels.png", plotting.plot_levels, table,
                title=f"kinetic: {p['kinetic']}")
    if "M" in cfg.sweep:
        kw = {k: p[k] for k in ("J", "Jp", "Jpp", "U", "Omega")}
        table = c_scaling(cfg.sweep["M"].tolist(), **kw)
        _table(out, "c_scaling.csv", table, outputs)
        _figure(cfg, outputs, out, "c_scaling.png", plotting.plot_c_scaling, table)
    return outputs


def _wkb_point(args):
    U, ratio, delta, points = args
    E_J = ratio * U
    return wkb_gap(U, E_J, delta), doublet_splitting(U, E_J, delta, points=points)


def run_wkb(cfg: ExperimentConfig, out: Path, workers: int) -> list[str]:
    _require(cfg, "wkb", ("delta", "EJ_over_U"))
    U, points = cfg.params["U"], cfg.params["points"]
    pairs = [(r, d) for r in sorted(cfg.sweep["EJ_over_U"]) for d in sorted(cfg.sweep["delta"])]
    results = pmap(_wkb_point, [(U, r, d, points) for r, d in pairs], workers)
    wkb = np.array([w for w, _ in results])
    grid = np.array([g for _, g in results])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(wkb > 0, grid / wkb, np.nan)
    table = {
        "EJ_over_U": np.array([r for r, _ in pairs]),
        "delta": np.array([d for _, d in pairs]),
        "wkb_gap": wkb,
        "grid_gap": grid,
        "ratio": ratio,
    }
    outputs: list[str] = []
    _table(out, "wkb.csv", table, outputs)
    _figure(cfg, outputs, out, "wkb.png", plotting.plot_wkb, table)
    return outputs


def run_shape(cfg: ExperimentConfig, out: Path, workers: int) -> tuple[list[str], bool]:
    from .beam import AngularSpectrum, FeedbackNotConverged, RingTarget, feedback_loop
    from .beam.imageio import write_intensity, write_kinoform
    from .beam.optics import Aberration

    p = cfg.params
    target = RingTarget(
        shape=(p["grid"], p["grid"]), M=p["M"], radius_um=p["radius_um"],
        pixel_um=p["pixel_um"], spot_sigma_um=p["spot_sigma_um"],
        depths=None if p["depths"] is None else tuple(p["depths"]),
    )
    propagator = None
    if p["propagation"] == "angular-spectrum":
        propagator = AngularSpectrum(p["distance_um"], p["pitch_um"], p["wavelength_um"])
    try:
        result = feedback_loop(
            target, alpha=p["alpha"], max_iter=p["max_iter"], threshold=p["threshold"],
            aberration=Aberration(**p["aberration"]), mixing=p["mixing"],
            mraf_iterations=p["mraf_iterations"], propagator=propagator,
            verbatim_discrepancy=p["verbatim_discrepancy"], noise_sigma=p["noise_sigma"],
            seed=cfg.solver["seed"],
        )
        converged = True
    except FeedbackNotConverged as exc:
        result = exc.result
        converged = False
        log.error("%s", exc)

    outputs: list[str] = []
    write_kinoform(out / "kinoform.pgm", result.best.kinoform)
    write_intensity(out / "final_image.pgm", result.best.image)
    write_intensity(out / "target.pgm", target.intensity)
    outputs += ["kinoform.pgm", "final_image.pgm", "target.pgm"]

    history = {
        "iteration": np.array([s.iteration for s in result.history]),
        "discrepancy_percent": np.array([s.discrepancy for s in result.history]),
        "max_over_min_contrast": np.array([s.contrast for s in result.history]),
    }
    _table(out, "history.csv", history, outputs)

    profiles = {"angle": result.target_profile.angles,
                "target": result.target_profile.normalized()}
    for label, it in (("iter1", 1), ("iter5", 5)):
        if it <= len(result.history):
            profiles[label] = result.history[it - 1].profile()
    profiles["best"] = result.best.profile()
    _table(out, "profiles.csv", profiles, outputs)

    _figure(cfg, outputs, out, "profiles.png", plotting.plot_profiles, profiles)
    _figure(cfg, outputs, out, "history.png", plotting.plot_history, history,
            threshold=p["threshold"])
    _figure(cfg, outputs, out, "final_image.png", plotting.plot_image, result.best.image,
            title=f"iteration {result.best.iteration}")
    return outputs, converged


COMMANDS = {
    "spectrum": run_spectrum,
    "currents": run_currents,
    "gaps": run_gaps,
    "density": run_density,
    "effective": run_effective,
    "wkb": run_wkb,
    "shape": run_shape,
}

HELP = {
    "spectrum": "lowest levels of the ring against flux",
    "currents": "persistent currents of the two lowest levels against flux",
    "gaps": "qubit gap and quality over U, N, t'' and t' at fixed flux",
    "density": "ground-state site occupations",
    "effective": "reduced phase-model levels against flux and c_alpha against M",
    "wkb": "grid-solver doublet splitting against the WKB formula",
    "shape": "MRAF hologram with camera feedback for a ring lattice",
}


def _seed_arg(text: str) -> int:
    try:
        return int(text, 16)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a hexadecimal seed: {text!r}") from None


def _positive_int(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aquid", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML experiment config "
                        "(default: built-in preset for the subcommand)")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output.dir)")
    common.add_argument("--workers", metavar="N", type=_positive_int,
                        help="worker processes for sweeps (default: all CPUs)")
    common.add_argument("--seed", metavar="HEX", type=_seed_arg,
                        help="solver start-vector / camera-noise seed, hexadecimal")
    common.add_argument("--tol", metavar="FLOAT", type=_positive_float,
                        help="eigensolver residual tolerance")
    common.add_argument("--no-figures", action="store_true", help="write tables only")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name])
    return parser


def resolve_config(command: str, args) -> ExperimentConfig:
    if args.config:
        cfg = load_config(args.config)
    else:
        cfg = parse_config(PRESETS[command], source=f"<preset {command}>")
    if cfg.model != EXPECTED_MODEL[command]:
        raise UsageError(f"{command} needs a '{EXPECTED_MODEL[command]}' model section, "
                         f"{cfg.source} has '{cfg.model}'")
    if args.seed is not None:
        cfg.solver["seed"] = args.seed
    if args.tol is not None:
        cfg.solver["tol"] = args.tol
    if args.out is not None:
        cfg.output["dir"] = args.out
    if args.no_figures:
        cfg.output["figures"] = False
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args.command, args)
    except (ConfigError, UsageError, OSError) as exc:
        print(f"aquid {args.command}: {exc}", file=sys.stderr)
        return 1
    out = Path(cfg.output["dir"])
    out.mkdir(parents=True, exist_ok=True)
    workers = args.workers or default_workers()

    status = 0
    try:
        produced = COMMANDS[args.command](cfg, out, workers)
    except (UsageError, ValueError) as exc:
        print(f"aquid {args.command}: {exc}", file=sys.stderr)
        return 1
    if args.command == "shape":
        produced, converged = produced
        status = 0 if converged else 2

    resolved = cfg.resolved()
    # the output location does not influence any result
    resolved["output"] = {k: v for k, v in resolved["output"].items() if k != "dir"}
    manifest = f"{args.command}.json"
    write_manifest(out / manifest, args.command, resolved, produced,
                   extra={"source": cfg.source, "seed_hex": hex(cfg.solver["seed"])})
    for name in produced + [manifest]:
        log.info("wrote %s", out / name)
    return status


if __name__ == "__main__":
    sys.exit(main())
