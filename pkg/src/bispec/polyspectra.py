"""Bispectrum and third-order cumulant maps, masking and noise injection.

The bispectrum used throughout is ``B[k1, k2] = y[k1] * conj(y[k2]) * y[k1 - k2]``
with circular indices, built from the unnormalised DFT ``y`` of the signal.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ParseError
from .io import atomic_write
from .signals import Domain, Signal, _as_values, rng_for


@dataclass(frozen=True)
class BispectrumGrid:
    """N x N bispectrum samples plus the boolean mask of observed cells.

    Unobserved cells hold zero; the mask is authoritative.
    """

    entries: np.ndarray
    mask: np.ndarray = field(default=None)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"bispectrum grid must be square, got shape {entries.shape}")
        if self.mask is None:
            mask = np.ones(entries.shape, dtype=bool)
        else:
            mask = np.array(self.mask, dtype=bool)
        if mask.shape != entries.shape:
            raise ValueError("mask and entries must have the same shape")
        entries[~mask] = 0.0
        entries.setflags(write=False)
        mask.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "mask", mask)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def observed_rows(self) -> np.ndarray:
        """Row indices ``k1`` with at least one observed cell."""
        return np.flatnonzero(self.mask.any(axis=1))

    def norm(self) -> float:
        """Frobenius norm over the observed cells."""
        return float(np.linalg.norm(self.entries[self.mask]))


@dataclass(frozen=True)
class CumulantGrid:
    entries: np.ndarray

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def bispectrum(y) -> BispectrumGrid:
    """Full bispectrum of a frequency-domain signal (all cells observed)."""
    return BispectrumGrid(kernels.bispectrum(_as_values(y, Domain.FREQUENCY)))


def signal_bispectrum(x: Signal) -> BispectrumGrid:
    """Bispectrum of a signal given in either domain."""
    return bispectrum(x.to_frequency())


def third_order_cumulant(x) -> CumulantGrid:
    """``C[n1, n2] = (1/N) sum_n x[n] conj(x[n - n1]) x[n + n2]``.

    Row ``n1`` is the circular cross-correlation of ``x * conj(roll(x, n1))``
    with ``x``, evaluated for all ``n2`` at once by FFT.
    """
    x = _as_values(x, Domain.TIME)
    n = x.size
    lag = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    u = x[None, :] * np.conj(x[lag])
    # sum_n u[n] x[n + m]  ->  DFT is fft(u)[-k] * fft(x)[k]
    u_rev = np.fft.ifft(u, axis=1) * n
    corr = np.fft.ifft(u_rev * np.fft.fft(x)[None, :], axis=1)
    return CumulantGrid(corr / n)


def add_noise(b: BispectrumGrid, snr_db: float, seed: int) -> BispectrumGrid:
    """Add circular complex Gaussian noise to the observed cells.

    The per-cell variance is set so that ``10 log10(||B||_F^2 / (M sigma^2))``
    equals ``snr_db``, with ``M`` the number of observed cells. ``inf`` means
    no noise.
    """
    snr_db = float(snr_db)
    if math.isnan(snr_db):
        raise ValueError("snr_db must not be NaN")
    if snr_db == math.inf:
        return b
    m = int(b.mask.sum())
    if m == 0:
        return b
    power = b.norm() ** 2
    sigma2 = power / (m * 10.0 ** (snr_db / 10.0))
    rng = rng_for(seed, "bispectrum-noise")
    noise = rng.standard_normal((b.n, b.n, 2)) @ np.array([1.0, 1.0j])
    noise *= math.sqrt(sigma2 / 2.0)
    return BispectrumGrid(b.entries + np.where(b.mask, noise, 0.0), b.mask)


def mask_k1_rows(b: BispectrumGrid, fraction: float, seed: int) -> BispectrumGrid:
    """Remove ``round(fraction * N)`` randomly chosen rows ``k1``.

    Row 0 is never removed; the count is capped at ``N - 1``. Rows are taken
    from the front of a seeded permutation, so for a fixed seed the removed
    set grows monotonically with ``fraction``.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    n = b.n
    count = min(int(round(fraction * n)), n - 1)
    if count == 0:
        return b
    rng = rng_for(seed, "row-mask")
    rows = rng.permutation(np.arange(1, n))[:count]
    mask = b.mask.copy()
    mask[rows, :] = False
    return BispectrumGrid(b.entries, mask)


def check_conjugate_symmetry(b: BispectrumGrid) -> float:
    """Max of ``|B[k1, k2] - conj(B[-k1, -k2])|``; zero for real signals."""
    neg = (-np.arange(b.n)) % b.n
    reflected = b.entries[np.ix_(neg, neg)]
    return float(np.max(np.abs(b.entries - np.conj(reflected))))


# --- serialisation ---------------------------------------------------------


def grid_to_dict(b: BispectrumGrid) -> dict:
    return {
        "n": b.n,
        "re": b.entries.real.ravel().tolist(),
        "im": b.entries.imag.ravel().tolist(),
        "observed": b.mask.ravel().astype(int).tolist(),
    }


def grid_from_dict(data: dict) -> BispectrumGrid:
    try:
        n = int(data["n"])
        re = np.asarray(data["re"], dtype=float).reshape(n, n)
        im = np.asarray(data["im"], dtype=float).reshape(n, n)
        observed = np.asarray(data["observed"], dtype=bool).reshape(n, n)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed bispectrum document: {exc}") from exc
    return BispectrumGrid(re + 1j * im, observed)


def write_grid_csv(b: BispectrumGrid, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["k1", "k2", "re", "im", "observed"])
    for k1 in range(b.n):
        for k2 in range(b.n):
            v = b.entries[k1, k2]
            writer.writerow([k1, k2, repr(float(v.real)), repr(float(v.imag)), int(b.mask[k1, k2])])


def read_grid_csv(fh) -> BispectrumGrid:
    try:
        rows = list(csv.DictReader(fh))
        n = math.isqrt(len(rows))
        if n * n != len(rows) or n == 0:
            raise ParseError(f"expected N*N rows, got {len(rows)}")
        entries = np.zeros((n, n), dtype=np.complex128)
        mask = np.zeros((n, n), dtype=bool)
        seen = np.zeros((n, n), dtype=bool)
        for r in rows:
            k1, k2 = int(r["k1"]), int(r["k2"])
            entries[k1, k2] = complex(float(r["re"]), float(r["im"]))
            mask[k1, k2] = bool(int(r["observed"]))
            seen[k1, k2] = True
        if not seen.all():
            raise ParseError("bispectrum CSV does not cover every (k1, k2) cell")
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ParseError(f"malformed bispectrum CSV: {exc}") from exc
    return BispectrumGrid(entries, mask)


def write_cumulant_csv(c: CumulantGrid, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["n1", "n2", "re", "im"])
    for n1 in range(c.n):
        for n2 in range(c.n):
            v = c.entries[n1, n2]
            writer.writerow([n1, n2, repr(float(v.real)), repr(float(v.imag))])


def save_grid(b: BispectrumGrid, path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        atomic_write(path, json.dumps(grid_to_dict(b)))
    else:
        atomic_write(path, lambda fh: write_grid_csv(b, fh))


def load_grid(path) -> BispectrumGrid:
    path = Path(path)
    with open(path, newline="") as fh:
        if path.suffix == ".json":
            try:
                return grid_from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc}") from exc
        return read_grid_csv(fh)
