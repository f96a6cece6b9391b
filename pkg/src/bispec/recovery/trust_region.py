"""Cauchy-point trust-region refinement with Armijo backtracking.

The iterate is the spectrum ``y``, but radii and step norms are reported in
time-domain units (``||x|| = ||y|| / sqrt(N)``), so ``delta0``, ``eps`` and
the trace are comparable with signal norms. Since the DFT is a scaled
isometry the iteration is the same as running it on ``x`` directly.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import zlib
from dataclasses import asdict, dataclass, field, fields
from typing import NamedTuple

import numpy as np

from .. import kernels
from ..errors import DivergedError, ParseError
from ..polyspectra import BispectrumGrid
from ..signals import Signal, dft, idft
from .objective import sample_block

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    """Tunables of the trust-region loop.

    ``delta0=None`` picks ``0.9 * ||x0|| / q``; ``q=None`` means ``q = N``.
    ``alpha0`` is the first trial step of the very first line search; every
    later search starts from 1.
    """

    delta0: float | None = None
    gamma: float = 0.1
    gamma_shrink: float = 0.1
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    alpha0: float = 0.6
    q: int | None = None
    eps: float = 1e-4
    max_iter: int = 10_000
    grad_tol: float = 1e-10
    rho_min: float = 1e-12

    def __post_init__(self):
        for name in ("gamma", "gamma_shrink", "armijo_c", "backtrack"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value}")
        if not 0.0 < self.alpha0 <= 1.0:
            raise ValueError(f"alpha0 must lie in (0, 1], got {self.alpha0}")
        if self.delta0 is not None and not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        if self.q is not None and self.q < 1:
            raise ValueError("q must be at least 1")
        if self.eps <= 0 or self.max_iter < 0:
            raise ValueError("eps must be positive and max_iter nonnegative")

    @classmethod
    def from_dict(cls, data: dict) -> SolverConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParseError(f"unknown solver config fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SolverTrace:
    """Per-iteration history: objective after the step, step norm, accepted
    step size, radius used, and a crc32 digest of the sampled block."""

    h0: float = math.nan
    h: list = field(default_factory=list)
    step_norm: list = field(default_factory=list)
    alpha: list = field(default_factory=list)
    delta: list = field(default_factory=list)
    block_digest: list = field(default_factory=list)
    stop_reason: str = ""

    def __len__(self):
        return len(self.h)

    def record(self, h, step_norm, alpha, delta, digest):
        self.h.append(float(h))
        self.step_norm.append(float(step_norm))
        self.alpha.append(float(alpha))
        self.delta.append(float(delta))
        self.block_digest.append(int(digest))

    @property
    def final_h(self) -> float:
        return self.h[-1] if self.h else self.h0

    def write_csv(self, fh) -> None:
        writer = csv.writer(fh)
        writer.writerow(["iter", "h", "step_norm", "alpha", "delta"])
        for i, row in enumerate(zip(self.h, self.step_norm, self.alpha, self.delta)):
            writer.writerow([i, *(repr(v) for v in row)])


class LineSearch(NamedTuple):
    rho: float
    stalled: bool
    h: float


def armijo_backtrack(y, d, b_step, b: BispectrumGrid, armijo_c=1e-4, backtrack=0.5,
                     rho0=1.0, rho_min=1e-12, h_y=None) -> LineSearch:
    """Largest ``rho`` in ``rho0 * backtrack**j`` passing the sufficient-decrease test

        h(y + rho b_step) <= h(y) + armijo_c * rho * Re(d^H b_step).

    Gives up below ``rho_min`` and returns it flagged as stalled. Non-finite
    trial objectives count as failures.
    """
    mask = b.mask.view(np.uint8)
    if h_y is None:
        h_y = kernels.objective(y, b.entries, mask)
    slope = float(np.real(np.vdot(d, b_step)))
    rho = rho0
    while rho >= rho_min:
        h_trial = kernels.objective(y + rho * b_step, b.entries, mask)
        if math.isfinite(h_trial) and h_trial <= h_y + armijo_c * rho * slope:
            return LineSearch(rho, False, h_trial)
        rho *= backtrack
    return LineSearch(rho_min, True, h_y)


def _digest(block: np.ndarray) -> int:
    return zlib.crc32(np.ascontiguousarray(block, dtype=np.int64).tobytes())


def trust_region_solve(b: BispectrumGrid, x0: Signal, cfg: SolverConfig | None = None,
                       seed: int = 0) -> tuple[Signal, SolverTrace]:
    """Refine ``x0`` by minimising the bispectrum misfit.

    Each iteration samples a block of ``q`` summation indices, takes the
    Cauchy step ``-delta * d / ||d||`` scaled back by Armijo backtracking,
    and shrinks the radius by ``gamma_shrink`` whenever the accepted step is
    shorter than ``gamma * delta``. The loop ends when an accepted step is
    shorter than ``eps``, the radius drops below ``eps``, the block gradient
    vanishes (``||d|| <= grad_tol * max(1, ||B||_F)``), the full-gradient line
    search stalls, or after ``max_iter`` iterations. With a partial block two
    consecutive stalls shrink the radius instead.

    Raises:
        DivergedError: the objective became non-finite; carries the trace.
    """
    cfg = cfg or SolverConfig()
    n = b.n
    x0 = x0.to_time()
    if x0.n != n:
        raise ValueError(f"length mismatch: x0 has {x0.n}, grid has {n}")
    if not np.all(np.isfinite(x0.values)):
        raise ValueError("x0 must be finite")

    entries = b.entries
    mask = np.ascontiguousarray(b.mask, dtype=np.uint8)
    y = np.array(dft(x0).values)
    root_n = math.sqrt(n)
    q = n if cfg.q is None else min(int(cfg.q), n * n)
    full_gradient = q >= n
    delta = cfg.delta0 if cfg.delta0 is not None else 0.9 * float(np.linalg.norm(x0.values)) / q
    if not delta > 0:
        raise ValueError("initial trust radius is zero; supply delta0 for a zero start")
    grad_floor = cfg.grad_tol * max(1.0, b.norm())

    trace = SolverTrace()
    h = kernels.objective(y, entries, mask)
    trace.h0 = h
    if not math.isfinite(h):
        trace.stop_reason = "diverged"
        raise DivergedError("initial objective is not finite", trace)

    stalls = 0
    trace.stop_reason = "max_iter"
    for t in range(cfg.max_iter):
        block = sample_block(n, q, seed, t)
        d = kernels.gradient(y, entries, mask, block)
        d_norm = float(np.linalg.norm(d))
        if not math.isfinite(d_norm):
            trace.stop_reason = "diverged"
            raise DivergedError(f"non-finite gradient at iteration {t}", trace)
        if d_norm <= grad_floor:
            trace.stop_reason = "stationary"
            break
        step = (-delta * root_n / d_norm) * d
        ls = armijo_backtrack(y, d, step, b, cfg.armijo_c, cfg.backtrack,
                              rho0=cfg.alpha0 if t == 0 else 1.0,
                              rho_min=cfg.rho_min, h_y=h)
        if ls.stalled:
            if full_gradient:
                trace.stop_reason = "stalled"
                break
            trace.record(h, 0.0, 0.0, delta, _digest(block))
            stalls += 1
            if stalls >= 2:
                delta *= cfg.gamma_shrink
                stalls = 0
            if delta < cfg.eps:
                trace.stop_reason = "radius"
                break
            continue

        stalls = 0
        y = y + ls.rho * step
        h = ls.h
        step_norm = ls.rho * delta
        trace.record(h, step_norm, ls.rho, delta, _digest(block))
        if not math.isfinite(h):
            trace.stop_reason = "diverged"
            raise DivergedError(f"non-finite objective at iteration {t}", trace)
        if step_norm < cfg.gamma * delta:
            delta *= cfg.gamma_shrink
        if step_norm < cfg.eps:
            trace.stop_reason = "step"
            break
    log.debug("trust region stopped after %d iterations (%s), h=%.3e",
              len(trace), trace.stop_reason, trace.final_h)
    return idft(y), trace


def load_solver_config(text: str) -> SolverConfig:
    try:
        return SolverConfig.from_dict(json.loads(text))
    except (json.JSONDecodeError, TypeError) as exc:
        raise ParseError(f"bad solver config: {exc}") from exc
