"""
Command-line surface: simulate, gauge, reconstruct, fbp, verify, spectrum, convergence.

Every subcommand returns an exit code; 0 iff all verdicts it computed passed.
"""
from __future__ import annotations

import argparse
import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from att_tomo.config.settings import PRESETS, ExperimentConfig, config_from_mapping, load_config, preset
from att_tomo.gauge import gauge_reduce, stability_check
from att_tomo.io.store import load_disc_field, load_sinogram, save_disc_field, save_representative, save_sinogram
from att_tomo.logger import LEVELS, setup_logger
from att_tomo.reconstruction import FBP_KINDS, GS_MODES, fbp_unattenuated, recon_full

from .acceptance import verify
from .config import APP_TITLE, REPORT_NAME, __version__
from .experiments import STUDIES, convergence_study, output_dir, run_experiment, simulate, spectrum_table

logger = logging.getLogger("att_tomo")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------

def _overrides(pairs: Sequence[str]) -> dict[str, str]:
    values = {}
    for pair in pairs:
        if "=" not in pair:
            raise ValueError(f"Expected key=value, got {pair!r}")
        key, raw = (part.strip() for part in pair.split("=", 1))
        values[key] = raw
    return values


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """--config file, else --preset, else defaults; --set pairs applied last."""
    if getattr(args, "config", None):
        config = load_config(args.config)
    elif getattr(args, "preset", None):
        config = preset(args.preset)
    else:
        config = ExperimentConfig()
    values = _overrides(getattr(args, "set", None) or [])
    if getattr(args, "output", None):
        values["output_dir"] = args.output
    return config_from_mapping(values, config) if values else config


def _settings_for(config: ExperimentConfig, sino=None, a=None) -> ExperimentConfig:
    """Match the grids of loaded files."""
    updates = {}
    if sino is not None:
        updates.update(N_beta=sino.grid.n_beta, N_alpha=sino.grid.n_alpha)
    if a is not None:
        updates.update(n_rho=a.grid.n_rho, n_beta=a.grid.n_beta, radial_stencil=a.grid.radial_stencil)
    return replace(config, settings=replace(config.settings, **updates)) if updates else config


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    phantom, sino = simulate(config)
    out = output_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    save_sinogram(out / "sinogram.atf", sino)
    if phantom.a is not None:
        save_disc_field(out / "attenuation.atf", phantom.a)
    (out / "config.txt").write_text(config.to_text(), encoding="utf-8")
    print(f"{sino.name}: ||I_a f|| = {sino.norm():.6e}, a_inf = {sino.a_inf:.4f} -> {out}")
    return EXIT_OK


def cmd_gauge(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    disc = config.settings.discretization()
    phantom, _ = simulate(config, disc)
    g = gauge_reduce(phantom.f, phantom.a, phantom.m)
    budget = stability_check(phantom.f, g, phantom.a)
    out = output_dir(config)
    save_representative(out / "gauge", g)
    print(f"{g.name}: ||g|| = {g.norm():.6e}, stability {budget.lhs:.4e} <= {budget.rhs:.4e} "
          f"(ratio {budget.ratio:.3f})")
    return EXIT_FAILED if budget.violated else EXIT_OK


def cmd_reconstruct(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.sinogram is None:
        report = run_experiment(config, write=True)
        print(report.to_frame().to_string(index=False))
        return EXIT_OK if report.passed else EXIT_FAILED

    sino = load_sinogram(args.sinogram)
    a = load_disc_field(args.attenuation) if args.attenuation else None
    config = _settings_for(config, sino, a)
    disc = config.settings.discretization()
    m = sino.m if args.m is None else args.m
    rep, report = recon_full(sino, m, a, disc, config.gs_mode, config.fast)
    out = Path(args.output or output_dir(config))
    save_representative(out / "reconstruction", rep)
    (out / REPORT_NAME).write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
    print(json.dumps(report.to_dict(), indent=2))
    if report.peel_diverged:
        logger.warning("Residual peeling grew at some stage; check %s", out / REPORT_NAME)
    return EXIT_FAILED if report.peel_diverged else EXIT_OK


def cmd_fbp(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    if args.sinogram is not None:
        sino = load_sinogram(args.sinogram)
        config = _settings_for(config, sino)
    else:
        if config.attenuation != "none":
            raise ValueError(f"fbp inverts unattenuated data, config has attenuation={config.attenuation!r}")
        _, sino = simulate(config)
    disc = config.settings.discretization()
    field = fbp_unattenuated(sino, args.kind, disc)
    out = Path(args.output or output_dir(config))
    out.mkdir(parents=True, exist_ok=True)
    path = save_disc_field(out / f"fbp_{args.kind}.atf", field)
    print(f"{args.kind}: ||f|| = {field.norm():.6e} -> {path}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    table = verify(config.settings, args.items)
    print(table.drop(columns="detail").to_string(index=False))
    if args.output:
        out = Path(args.output)
        out.mkdir(parents=True, exist_ok=True)
        table.to_csv(out / "acceptance.csv", index=False)
    return EXIT_OK if bool(table["passed"].all()) else EXIT_FAILED


def cmd_spectrum(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    disc = config.settings.discretization()
    table = spectrum_table(disc.bgrid, args.operators, args.max_abs)
    out = output_dir(config)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "spectrum.csv", index=False)
    summary = table.groupby("operator")["discrepancy"].max()
    print(summary.to_string())
    return EXIT_OK if bool((summary <= args.tol).all()) else EXIT_FAILED


def cmd_convergence(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    table = convergence_study(config, args.levels, args.study, write=True)
    print(table.to_string(index=False))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_config_args(p: argparse.ArgumentParser):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="flat key = value experiment file")
    src.add_argument("--preset", choices=sorted(PRESETS), help="named experiment")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key (repeatable)")
    p.add_argument("--output", help="output directory (overrides output_dir)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="main_app.py", description=APP_TITLE)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="INFO", choices=LEVELS)
    parser.add_argument("--no-log-file", action="store_true", help="console logging only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="phantom -> sinogram (+ attenuation) files")
    _add_config_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gauge", help="phantom -> gauge representative and stability budget")
    _add_config_args(p)
    p.set_defaults(func=cmd_gauge)

    p = sub.add_parser("reconstruct", help="full reconstruction from files, or a whole experiment")
    _add_config_args(p)
    p.add_argument("--sinogram", type=Path, help="sinogram .atf with its .json manifest")
    p.add_argument("--attenuation", type=Path, help="attenuation .atf with its .json manifest")
    p.add_argument("--m", type=int, help="tensor order (defaults to the sinogram manifest)")
    p.add_argument("--gs-mode", choices=GS_MODES, help="shorthand for --set gs_mode=...")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("fbp", help="unattenuated filtered backprojection")
    _add_config_args(p)
    p.add_argument("--sinogram", type=Path)
    p.add_argument("--kind", choices=FBP_KINDS, default="rcI0")
    p.set_defaults(func=cmd_fbp)

    p = sub.add_parser("verify", help="acceptance suite")
    _add_config_args(p)
    p.add_argument("--items", type=int, nargs="+", help="item numbers (default: all)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("spectrum", help="boundary-operator tables against their closed forms")
    _add_config_args(p)
    p.add_argument("--operators", nargs="+", help="operators to dump (default: all)")
    p.add_argument("--max-abs", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("convergence", help="errors under grid refinement")
    _add_config_args(p)
    p.add_argument("--study", choices=STUDIES, default="pipeline")
    p.add_argument("--levels", type=int, default=2)
    p.set_defaults(func=cmd_convergence)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logger(level=args.log_level, to_file=not args.no_log_file)
    if getattr(args, "gs_mode", None):
        args.set = [*(args.set or []), f"gs_mode={args.gs_mode}"]
    logger.info("%s %s: %s", APP_TITLE, __version__, args.command)
    try:
        return args.func(args)
    except Exception as e:
        logger.exception("Failed %s: %s", args.command, e)
        return EXIT_ERROR
