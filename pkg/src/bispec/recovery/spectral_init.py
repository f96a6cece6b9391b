"""Spectral initializer: first-column square roots with sign tracking."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateSignalError
from ..polyspectra import BispectrumGrid
from ..signals import Signal, idft
from .objective import objective_h

FILL_MODES = ("zero", "interpolate")


@dataclass(frozen=True)
class InitConfig:
    """Finite-difference weights, walk start bin and hole filling.

    ``fill`` decides what unobserved rows of the first column become:
    ``"zero"`` or ``"interpolate"`` (linear in re/im between tracked bins).
    """

    gamma0: float = 0.09
    gamma1: float = 0.425
    gamma2: float = 1.0
    n0: int = 0
    fill: str = "zero"

    def __post_init__(self):
        if min(self.gamma0, self.gamma1, self.gamma2) < 0:
            raise ValueError("initializer weights must be nonnegative")
        if self.fill not in FILL_MODES:
            raise ValueError(f"fill must be one of {FILL_MODES}, got {self.fill!r}")


def estimate_dc(b: BispectrumGrid) -> float:
    """``|y[0]|`` as the cube root of ``|B[0, 0]|``."""
    if not b.mask[0, 0]:
        raise DegenerateSignalError("B[0, 0] is unobserved")
    magnitude = float(np.cbrt(abs(b.entries[0, 0])))
    if magnitude == 0.0:
        raise DegenerateSignalError("B[0, 0] vanishes, so y[0] = 0")
    return magnitude


def _track_signs(roots: np.ndarray, observed: np.ndarray, y0: float, cfg: InitConfig) -> np.ndarray:
    """Walk the bins circularly from ``n0``; at each observed bin keep the root
    whose weighted first/second/third differences against the previously
    fixed bins are smallest.

    Unobserved bins are stepped over, so differences link consecutive
    observed bins, and missing history terms count as zero. Bin 0 is pinned
    to ``y0``.
    """
    n = roots.size
    s = np.zeros(n, dtype=np.complex128)
    hist: list[complex] = []
    for p in range(n):
        m = (cfg.n0 + p) % n
        if m == 0:
            s[0] = y0
            hist.append(y0)
            continue
        if not observed[m]:
            continue
        if not hist:
            s[m] = roots[m]
            hist.append(roots[m])
            continue
        cur = hist[-1]
        back1 = cur - hist[-2] if len(hist) >= 2 else 0.0
        back2 = hist[-2] - hist[-3] if len(hist) >= 3 else 0.0
        scores = []
        for cand in (roots[m], -roots[m]):
            d0 = cand - cur
            d1 = d0 - back1
            d2 = d1 - back2
            scores.append(cfg.gamma0 * abs(d0) ** 2 + cfg.gamma1 * abs(d1) ** 2 + cfg.gamma2 * abs(d2) ** 2)
        s[m] = roots[m] if scores[0] <= scores[1] else -roots[m]
        hist.append(s[m])
    return s


def _interpolate_holes(s: np.ndarray, observed: np.ndarray) -> np.ndarray:
    known = np.flatnonzero(observed)
    holes = np.flatnonzero(~observed)
    if holes.size == 0:
        return s
    n = s.size
    # periodic interpolation: pad the known bins by one period on each side
    xp = np.concatenate([known - n, known, known + n])
    fp = np.tile(s[known], 3)
    out = s.copy()
    out[holes] = np.interp(holes, xp, fp.real) + 1j * np.interp(holes, xp, fp.imag)
    return out


def init_spectral(b: BispectrumGrid, cfg: InitConfig | None = None) -> Signal:
    """Initial time-domain estimate from the first bispectrum column.

    With ``y[0] = +-|B[0, 0]|^(1/3)`` the first column gives
    ``s[n]^2 = B[n, 0] / y[0]``; the signs of the roots are fixed by
    :func:`_track_signs`. Four candidates (both signs of ``y[0]``, the walk
    and its flip with bin 0 kept) are scored against the observed data and
    the best one is returned.
    """
    cfg = cfg or InitConfig()
    magnitude = estimate_dc(b)
    observed = b.mask[:, 0].copy()
    observed[0] = True

    candidates = []
    for y0 in (magnitude, -magnitude):
        roots = np.sqrt(np.where(observed, b.entries[:, 0] / y0, 0.0))
        s = _track_signs(roots, observed, y0, cfg)
        if cfg.fill == "interpolate":
            s = _interpolate_holes(s, observed)
        flipped = -s
        flipped[0] = y0
        candidates += [s, flipped]
    best = min(candidates, key=lambda cand: objective_h(cand, b))
    return idft(best)
