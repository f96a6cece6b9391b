"""``bispec`` command-line front end.

Exit codes: 0 on success, 2 for bad input or configuration, 3 when the
numerics fail (degenerate data, ill-conditioned inversion, divergence).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .errors import BispecError, DegenerateSignalError, DivergedError, IllConditionedError, ParseError
from .experiments import (
    dist,
    load_sweep,
    power_spectrum_table,
    write_sweep_csv,
    write_sweep_json,
)
from .io import atomic_write
from .polyspectra import (
    add_noise,
    load_grid,
    mask_k1_rows,
    save_grid,
    signal_bispectrum,
    third_order_cumulant,
    write_cumulant_csv,
)
from .recovery import InitConfig, SolverConfig, constructive_recover, init_spectral, trust_region_solve
from .signals import (
    Signal,
    SupportSpec,
    child_seed,
    default_band_width,
    generate_gaussian_spectrum,
    load_signal,
    rng_for,
    save_signal,
)

log = logging.getLogger("bispec")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3
LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
METHODS = ("spectral-init", "trust-region", "oracle")


def _configure_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("BISPEC_LOG", "").lower(), logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def _echo(cfg: dict) -> None:
    print(json.dumps(cfg, indent=2, sort_keys=True, default=str))


def _read_config(path) -> dict:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ParseError(f"{path}: config must be a JSON object")
    return data


def _override(cfg: dict, args, names) -> dict:
    """Flags that were given on the command line win over file values."""
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            cfg[name] = value
    return cfg


def _sidecar(out: Path, tag: str, suffix: str) -> Path:
    return out.with_name(f"{out.stem}.{tag}{suffix}")


# --- subcommands -----------------------------------------------------------


def cmd_generate(args) -> int:
    cfg = _override({"n": 128, "band_width": None, "seed": 0, **_read_config(args.config)},
                    args, ("n", "band_width", "seed"))
    if cfg["band_width"] is None:
        cfg["band_width"] = default_band_width(int(cfg["n"]))
    _echo(cfg)
    x = generate_gaussian_spectrum(int(cfg["n"]), SupportSpec.band(int(cfg["band_width"])), seed=int(cfg["seed"]))
    save_signal(x, args.out)
    return EXIT_OK


def cmd_bispectrum(args) -> int:
    cfg = _override({"snr_db": math.inf, "removal": 0.0, "seed": 0, **_read_config(args.config)},
                    args, ("snr_db", "removal", "seed"))
    _echo(cfg)
    x = load_signal(args.input)
    b = signal_bispectrum(x)
    b = add_noise(b, float(cfg["snr_db"]), child_seed(int(cfg["seed"]), "noise"))
    b = mask_k1_rows(b, float(cfg["removal"]), child_seed(int(cfg["seed"]), "mask"))
    save_grid(b, args.out)
    return EXIT_OK


def cmd_cumulant(args) -> int:
    _echo({"input": str(args.input)})
    c = third_order_cumulant(load_signal(args.input))
    atomic_write(args.out, lambda fh: write_cumulant_csv(c, fh))
    return EXIT_OK


def _split_recovery_config(data: dict) -> tuple[SolverConfig, InitConfig]:
    """Accepts ``{"solver": {...}, "init": {...}}`` or one flat document
    holding fields of either config."""
    if "solver" in data or "init" in data:
        extra = set(data) - {"solver", "init"}
        if extra:
            raise ParseError(f"unknown config fields: {sorted(extra)}")
        solver_d, init_d = dict(data.get("solver", {})), dict(data.get("init", {}))
    else:
        init_names = set(InitConfig.__dataclass_fields__)
        init_d = {k: v for k, v in data.items() if k in init_names}
        solver_d = {k: v for k, v in data.items() if k not in init_names}
    unknown = set(init_d) - set(InitConfig.__dataclass_fields__)
    if unknown:
        raise ParseError(f"unknown init config fields: {sorted(unknown)}")
    try:
        return SolverConfig.from_dict(solver_d), InitConfig(**init_d)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"bad recovery config: {exc}") from exc


def cmd_recover(args) -> int:
    out = Path(args.out)
    b = load_grid(args.input)
    reference = load_signal(args.reference) if args.reference else None
    solver_cfg, init_cfg = _split_recovery_config(_read_config(args.config))
    seed = 0 if args.seed is None else args.seed
    band_width = args.band_width if args.band_width is not None else default_band_width(b.n)
    if args.delta is not None and reference is None:
        raise ParseError("--delta perturbs the reference, so --reference is required")

    effective = {"method": args.method, "input": str(args.input), "seed": seed}
    if args.method == "oracle":
        effective["band_width"] = band_width
    else:
        effective["init"] = init_cfg.__dict__ if args.delta is None else {"perturbed_delta": args.delta}
    if args.method == "trust-region":
        effective["solver"] = solver_cfg.to_dict()
    _echo(effective)

    summary: dict = {"config": effective, "n": b.n}
    trace = None
    try:
        if args.method == "oracle":
            x_hat = constructive_recover(b, SupportSpec.band(band_width))
        else:
            if args.delta is not None:
                zeta = rng_for(seed, "perturbation").choice([-1.0, 1.0], size=b.n)
                x_hat = Signal(reference.to_time().values + args.delta * zeta)
            else:
                x_hat = init_spectral(b, init_cfg)
            if args.method == "trust-region":
                x_hat, trace = trust_region_solve(b, x_hat, solver_cfg, seed=child_seed(seed, "solver"))
    except DivergedError as exc:
        trace = exc.trace
        summary["error"] = str(exc)
        _write_recovery(out, None, trace, summary, reference)
        raise

    if trace is not None:
        summary.update(iterations=len(trace), final_h=trace.final_h, initial_h=trace.h0,
                       stop_reason=trace.stop_reason)
    _write_recovery(out, x_hat, trace, summary, reference)
    return EXIT_OK


def _write_recovery(out: Path, x_hat, trace, summary: dict, reference) -> None:
    if x_hat is not None:
        save_signal(x_hat, out)
        if reference is not None:
            summary["dist"] = dist(reference, x_hat)
            table = power_spectrum_table(reference, x_hat)
            atomic_write(_sidecar(out, "power", ".csv"),
                         "k,true_power,estimated_power\n"
                         + "".join(f"{r['k']},{r['true_power']!r},{r['estimated_power']!r}\n" for r in table))
    if trace is not None:
        atomic_write(_sidecar(out, "trace", ".csv"), trace.write_csv)
    atomic_write(_sidecar(out, "summary", ".json"), json.dumps(summary, indent=2, default=str))


def cmd_oracle(args) -> int:
    args.method = "oracle"
    args.config = None
    args.delta = None
    return cmd_recover(args)


def cmd_sweep(args) -> int:
    spec = load_sweep(args.config or "smoke")
    overrides = {}
    flag_fields = {"n": "n", "band_width": "band_width", "snr_db": "snr_db",
                   "removal": "removal_fraction", "delta": "delta", "seed": "seed"}
    for flag, name in flag_fields.items():
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    try:
        base = spec.base.replace(**overrides)
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad override: {exc}") from exc
    trials = args.trials if args.trials is not None else spec.trials
    spec = type(spec)(base, spec.axis1, spec.axis2, trials, spec.name)
    _echo(spec.to_dict())
    rows = spec.run(jobs=args.jobs)
    out = Path(args.out)
    write_sweep_csv(rows, out)
    write_sweep_json(rows, out.with_suffix(".json"))
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bispec", description="Signal recovery from bispectrum data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output file")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--config", default=None, help="JSON config file; flags override its values")

    p = sub.add_parser("generate", parents=[common], help="synthesize a band-limited test signal")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--band-width", type=int, default=None)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("bispectrum", parents=[common], help="bispectrum of a signal, optionally noisy and masked")
    p.add_argument("--input", required=True)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--removal", type=float, default=None, help="fraction of k1 rows to remove")
    p.set_defaults(func=cmd_bispectrum)

    p = sub.add_parser("cumulant", parents=[common], help="third-order cumulant of a signal")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_cumulant)

    p = sub.add_parser("recover", parents=[common], help="recover a signal from a bispectrum file")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=METHODS, default="trust-region")
    p.add_argument("--reference", default=None, help="true signal, for dist and power-spectrum output")
    p.add_argument("--delta", type=float, default=None, help="start from reference + delta * (+-1) noise")
    p.add_argument("--band-width", type=int, default=None, help="band width for the oracle")
    p.set_defaults(func=cmd_recover)

    p = sub.add_parser("oracle", parents=[common], help="constructive recovery of a band-limited signal")
    p.add_argument("--input", required=True)
    p.add_argument("--reference", default=None)
    p.add_argument("--band-width", type=int, default=None)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", parents=[common],
                       help="run a trial sweep; --config takes a JSON path or a preset name (fig1, fig3, smoke)")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--band-width", type=int, default=None)
    p.add_argument("--snr-db", type=float, default=None)
    p.add_argument("--removal", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DegenerateSignalError, IllConditionedError, DivergedError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (BispecError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
