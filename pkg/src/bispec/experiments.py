"""Monte-Carlo trials and factorial sweeps over the recovery pipeline."""
from __future__ import annotations

import csv
import dataclasses
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BispecError, ParseError
from .io import atomic_write
from .polyspectra import add_noise, mask_k1_rows, signal_bispectrum
from .recovery import InitConfig, SolverConfig, init_spectral, trust_region_solve
from .signals import Signal, SupportSpec, child_seed, default_band_width, generate_gaussian_spectrum, rng_for

log = logging.getLogger(__name__)

INIT_MODES = ("spectral", "perturbed")
SWEEP_COLUMNS = ("axis1", "axis2", "trials", "mean_dist_init", "mean_dist_final", "success_rate", "mean_iters", "mean_wall_ms")


def dist(x: Signal, w: Signal) -> float:
    """Relative Frobenius distance ``||B - W||_F / ||B||_F`` between the
    full bispectra of ``x`` (the reference) and ``w``."""
    if x.n != w.n:
        raise ValueError(f"length mismatch: {x.n} vs {w.n}")
    ref = signal_bispectrum(x).entries
    ref_norm = float(np.linalg.norm(ref))
    if ref_norm == 0.0:
        raise ValueError("dist is undefined for a reference with zero bispectrum")
    return float(np.linalg.norm(ref - signal_bispectrum(w).entries)) / ref_norm


def power_spectrum_table(x: Signal, estimate: Signal) -> list[dict]:
    """Per-bin ``|y[k]|^2`` of the reference next to that of the estimate."""
    true_p = np.abs(x.to_frequency().values) ** 2
    est_p = np.abs(estimate.to_frequency().values) ** 2
    return [{"k": k, "true_power": float(a), "estimated_power": float(b)}
            for k, (a, b) in enumerate(zip(true_p, est_p))]


@dataclass(frozen=True)
class TrialConfig:
    n: int = 128
    band_width: int | None = None
    snr_db: float = math.inf
    removal_fraction: float = 0.0
    init_mode: str = "spectral"
    delta: float = 0.0
    solver: SolverConfig = field(default_factory=SolverConfig)
    init: InitConfig = field(default_factory=InitConfig)
    seed: int = 0
    success_threshold: float = 1e-6

    def __post_init__(self):
        if not 0.0 <= self.removal_fraction <= 1.0:
            raise ValueError("removal_fraction must lie in [0, 1]")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")
        if math.isnan(float(self.snr_db)):
            raise ValueError("snr_db must not be NaN")

    @property
    def width(self) -> int:
        return self.band_width if self.band_width is not None else default_band_width(self.n)

    def replace(self, **changes) -> TrialConfig:
        """Copy with ``changes``; ``solver.<field>`` / ``init.<field>`` keys
        update the nested configs."""
        top, nested = {}, {"solver": {}, "init": {}}
        for key, value in changes.items():
            head, _, tail = key.partition(".")
            if tail:
                if head not in nested:
                    raise KeyError(key)
                nested[head][tail] = value
            elif key in _TRIAL_FIELDS:
                top[key] = _coerce(key, value)
            else:
                raise KeyError(key)
        for head, upd in nested.items():
            if upd:
                sub = getattr(self, head)
                valid = {f.name for f in dataclasses.fields(sub)}
                bad = set(upd) - valid
                if bad:
                    raise KeyError(f"{head}.{sorted(bad)[0]}")
                top[head] = dataclasses.replace(top.get(head, sub), **upd)
        return dataclasses.replace(self, **top)

    @classmethod
    def from_dict(cls, data: dict) -> TrialConfig:
        data = dict(data)
        try:
            solver = SolverConfig.from_dict(data.pop("solver", {}))
            init = InitConfig(**data.pop("init", {}))
            unknown = set(data) - _TRIAL_FIELDS
            if unknown:
                raise ParseError(f"unknown trial config fields: {sorted(unknown)}")
            data = {k: _coerce(k, v) for k, v in data.items()}
            return cls(solver=solver, init=init, **data)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(f"bad trial config: {exc}") from exc

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["snr_db"] = _float_out(self.snr_db)
        return out


_TRIAL_FIELDS = {f.name for f in dataclasses.fields(TrialConfig)} - {"solver", "init"}


def _coerce(key, value):
    if key in ("snr_db", "removal_fraction", "delta", "success_threshold"):
        return float(value)  # accepts "inf"
    if key in ("n", "seed") or (key == "band_width" and value is not None):
        return int(value)
    return value


def _float_out(v):
    return "inf" if v == math.inf else v


@dataclass(frozen=True)
class TrialReport:
    dist_init: float
    dist_final: float
    success: bool
    iterations: int
    wall_ms: float
    stop_reason: str = ""
    error: str | None = None


def run_trial(cfg: TrialConfig) -> TrialReport:
    """Generate, observe (noise, then row removal), initialise, solve, score.

    Every random draw derives from ``cfg.seed``. Recovery errors become a
    failed report rather than an exception.
    """
    start = time.perf_counter()
    x = generate_gaussian_spectrum(cfg.n, SupportSpec.band(cfg.width), seed=child_seed(cfg.seed, "signal"))
    b = signal_bispectrum(x)
    b = add_noise(b, cfg.snr_db, child_seed(cfg.seed, "noise"))
    b = mask_k1_rows(b, cfg.removal_fraction, child_seed(cfg.seed, "mask"))

    dist_init = math.nan
    try:
        if cfg.init_mode == "spectral":
            x0 = init_spectral(b, cfg.init)
        else:
            zeta = rng_for(cfg.seed, "perturbation").choice([-1.0, 1.0], size=cfg.n)
            x0 = Signal(x.values + cfg.delta * zeta)
        dist_init = dist(x, x0)
        x_hat, trace = trust_region_solve(b, x0, cfg.solver, seed=child_seed(cfg.seed, "solver"))
    except BispecError as exc:
        log.info("trial seed=%d failed: %s", cfg.seed, exc)
        trace = getattr(exc, "trace", None)
        return TrialReport(dist_init, math.nan, False, len(trace) if trace else 0,
                           (time.perf_counter() - start) * 1e3, "error", f"{type(exc).__name__}: {exc}")
    dist_final = dist(x, x_hat)
    return TrialReport(
        dist_init=dist_init,
        dist_final=dist_final,
        success=dist_final < cfg.success_threshold,
        iterations=len(trace),
        wall_ms=(time.perf_counter() - start) * 1e3,
        stop_reason=trace.stop_reason,
    )


def _finite_mean(values) -> float:
    finite = [float(v) for v in values if math.isfinite(v)]
    return math.fsum(finite) / len(finite) if finite else math.nan


def aggregate(reports: list[TrialReport]) -> dict:
    """Cell summary; means skip non-finite entries (failed trials)."""
    count = len(reports)
    return {
        "trials": count,
        "mean_dist_init": _finite_mean(r.dist_init for r in reports),
        "mean_dist_final": _finite_mean(r.dist_final for r in reports),
        "success_rate": sum(r.success for r in reports) / count if count else math.nan,
        "mean_iters": math.fsum(r.iterations for r in reports) / count if count else math.nan,
        "mean_wall_ms": math.fsum(r.wall_ms for r in reports) / count if count else math.nan,
    }


def trial_seed(base_seed: int, cell: tuple[int, int], i: int) -> int:
    return child_seed(base_seed, "trial", cell[0], cell[1], i)


def run_sweep(base: TrialConfig, axis1: tuple[str, list], axis2: tuple[str, list],
              trials: int, jobs: int = 1) -> list[dict]:
    """Full factorial sweep; one summary row per ``(axis1, axis2)`` cell.

    ``axis1``/``axis2`` are ``(name, values)`` where ``name`` is a
    :class:`TrialConfig` field or a dotted ``solver.``/``init.`` field. Rows
    carry the cell coordinates under the keys ``axis1`` and ``axis2``; trial
    ``i`` of cell ``(i1, i2)`` runs with seed ``trial_seed(base.seed, (i1, i2), i)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    name1, values1 = axis1
    name2, values2 = axis2
    for name in (name1, name2):
        _check_axis(base, name)

    cells, configs = [], []
    for i1, v1 in enumerate(values1):
        for i2, v2 in enumerate(values2):
            cell_cfg = base.replace(**{name1: v1, name2: v2})
            cells.append((v1, v2))
            configs += [cell_cfg.replace(seed=trial_seed(base.seed, (i1, i2), i)) for i in range(trials)]

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_trial, configs, chunksize=max(1, trials // 4)))
    else:
        reports = [run_trial(c) for c in configs]

    rows = []
    for c, (v1, v2) in enumerate(cells):
        row = {"axis1": _float_out(v1), "axis2": _float_out(v2)}
        row.update(aggregate(reports[c * trials:(c + 1) * trials]))
        rows.append(row)
        log.info("cell %s=%s %s=%s: %s", name1, v1, name2, v2, row)
    return rows


def _check_axis(base: TrialConfig, name: str) -> None:
    try:
        base.replace(**{name: getattr(base, name) if "." not in name else
                        getattr(getattr(base, name.split(".")[0]), name.split(".")[1])})
    except (KeyError, AttributeError):
        raise ParseError(f"unknown sweep axis {name!r}") from None


# --- sweep documents -------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    base: TrialConfig
    axis1: tuple[str, list]
    axis2: tuple[str, list]
    trials: int
    name: str = ""

    @classmethod
    def from_dict(cls, data: dict) -> SweepSpec:
        try:
            axes = [(a["name"], list(a["values"])) for a in (data["axis1"], data["axis2"])]
            spec = cls(TrialConfig.from_dict(data.get("base", {})), axes[0], axes[1],
                       int(data.get("trials", 100)), data.get("name", ""))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"bad sweep config: {exc!r}") from exc
        for name, _ in (spec.axis1, spec.axis2):
            _check_axis(spec.base, name)
        return spec

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "base": self.base.to_dict(),
            "axis1": {"name": self.axis1[0], "values": [_float_out(v) for v in self.axis1[1]]},
            "axis2": {"name": self.axis2[0], "values": [_float_out(v) for v in self.axis2[1]]},
            "trials": self.trials,
        }

    def run(self, jobs: int = 1) -> list[dict]:
        return run_sweep(self.base, self.axis1, self.axis2, self.trials, jobs=jobs)


PRESET_DIR = Path(__file__).with_name("presets")


def load_sweep(source) -> SweepSpec:
    """Sweep from a preset name (``fig1``, ``fig3``, ``smoke``) or a JSON path."""
    path = Path(source)
    if not path.exists():
        path = PRESET_DIR / f"{source}.json"
        if not path.exists():
            raise ParseError(f"no sweep config or preset named {source!r}")
    try:
        return SweepSpec.from_dict(json.loads(path.read_text()))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def write_sweep_csv(rows: list[dict], path) -> None:
    if not rows:
        raise ValueError("no rows to write")
    header = list(SWEEP_COLUMNS)

    def emit(fh):
        writer = csv.DictWriter(fh, fieldnames=header)
        writer.writeheader()
        writer.writerows(rows)

    atomic_write(path, emit)


def write_sweep_json(rows: list[dict], path) -> None:
    clean = [{k: (_float_out(v) if isinstance(v, float) and math.isinf(v) else
                  (None if isinstance(v, float) and math.isnan(v) else v)) for k, v in r.items()}
             for r in rows]
    atomic_write(path, json.dumps(clean, indent=2))
