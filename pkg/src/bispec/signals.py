"""Complex signals, DFTs, support descriptors and the synthetic generator.

Conventions: the forward DFT is unnormalised, ``y[k] = sum_n x[n] w^(-kn)``
with ``w = exp(2*pi*i/N)``, and the inverse carries the ``1/N``. All indices
are circular.
"""
from __future__ import annotations

import csv
import enum
import json
import math
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidSupportError, ParseError
from .io import atomic_write

MIN_LENGTH = 4
SUPPORT_TOL = 1e-12


class Domain(str, enum.Enum):
    TIME = "time"
    FREQUENCY = "frequency"


class SupportKind(str, enum.Enum):
    BAND_LIMITED = "band"
    TIME_LIMITED = "time"


@dataclass(frozen=True)
class Signal:
    """A length-N complex vector tagged with the domain it lives in."""

    values: np.ndarray
    domain: Domain = Domain.TIME

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128).reshape(-1)
        if values.size < MIN_LENGTH:
            raise ValueError(f"signal length must be >= {MIN_LENGTH}, got {values.size}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "domain", Domain(self.domain))

    @property
    def n(self) -> int:
        return self.values.size

    def to_time(self) -> Signal:
        return self if self.domain is Domain.TIME else idft(self)

    def to_frequency(self) -> Signal:
        return self if self.domain is Domain.FREQUENCY else dft(self)

    def __len__(self):
        return self.n


@dataclass(frozen=True)
class SupportSpec:
    """Contiguous circular support: ``width`` bins starting at ``offset``.

    For a band-limited spec the bins are DFT indices, for a time-limited one
    they are sample indices. Everything outside the support must vanish.
    """

    kind: SupportKind
    width: int
    offset: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", SupportKind(self.kind))
        if int(self.width) < 1:
            raise InvalidSupportError(f"support width must be positive, got {self.width}")

    @classmethod
    def band(cls, width: int, offset: int = 0) -> SupportSpec:
        return cls(SupportKind.BAND_LIMITED, width, offset)

    @classmethod
    def time(cls, width: int, offset: int = 0) -> SupportSpec:
        return cls(SupportKind.TIME_LIMITED, width, offset)

    def indices(self, n: int) -> np.ndarray:
        return (self.offset + np.arange(self.width)) % n

    def zero_indices(self, n: int) -> np.ndarray:
        return (self.offset + self.width + np.arange(n - self.width)) % n


def default_band_width(n: int) -> int:
    return math.ceil((n - 1) / 2)


def derive_seed(seed: int, *keys) -> np.random.SeedSequence:
    """Child seed sequence for ``seed`` tagged by ``keys`` (ints or strings).

    Every random draw in the package goes through here so that a single
    user seed fixes signals, noise, masks and solver blocks bit-for-bit.
    """
    spawn_key = tuple(
        k if isinstance(k, (int, np.integer)) else zlib.crc32(str(k).encode())
        for k in keys
    )
    return np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=spawn_key)


def child_seed(seed: int, *keys) -> int:
    """Integer seed derived from ``seed`` and ``keys``."""
    return int(derive_seed(seed, *keys).generate_state(1, np.uint64)[0])


def rng_for(seed: int, *keys) -> np.random.Generator:
    return np.random.default_rng(derive_seed(seed, *keys))


def _as_values(x, domain: Domain) -> np.ndarray:
    if isinstance(x, Signal):
        if x.domain is not domain:
            raise ValueError(f"expected a {domain.value}-domain signal, got {x.domain.value}")
        return x.values
    return np.asarray(x, dtype=np.complex128)


def dft(x) -> Signal:
    """Unnormalised forward DFT of a time-domain signal."""
    return Signal(np.fft.fft(_as_values(x, Domain.TIME)), Domain.FREQUENCY)


def idft(y) -> Signal:
    """Inverse DFT (with the 1/N factor) of a frequency-domain signal."""
    return Signal(np.fft.ifft(_as_values(y, Domain.FREQUENCY)), Domain.TIME)


def generate_gaussian_spectrum(n: int, support: SupportSpec | None = None, seed: int = 0) -> Signal:
    """Band-limited signal with a Gaussian amplitude spectrum and random phase.

    The in-band amplitude peaks at 1 in the middle of the support with a
    standard deviation of ``width / 4`` bins. A single phase drawn uniformly
    from ``[0, 2*pi)`` multiplies the whole band, after which bin 0 (when in
    band) is reset to its positive real magnitude.

    Returns the time-domain signal.
    """
    if support is None:
        support = SupportSpec.band(default_band_width(n))
    if support.kind is not SupportKind.BAND_LIMITED:
        raise InvalidSupportError("the Gaussian generator only builds band-limited signals")
    if n < MIN_LENGTH or support.width > n:
        raise InvalidSupportError(f"invalid support: width {support.width} for length {n}")

    rng = rng_for(seed, "gaussian-spectrum")
    theta = rng.uniform(0.0, 2.0 * np.pi)
    j = np.arange(support.width)
    center = (support.width - 1) / 2
    sigma = support.width / 4
    amplitude = np.exp(-((j - center) ** 2) / (2.0 * sigma**2))

    y = np.zeros(n, dtype=np.complex128)
    y[support.indices(n)] = amplitude * np.exp(1j * theta)
    if y[0] != 0:
        y[0] = abs(y[0])
    return idft(Signal(y, Domain.FREQUENCY))


def is_support_satisfied(x: Signal, support: SupportSpec, tol: float = SUPPORT_TOL) -> bool:
    """True when every entry outside ``support`` has magnitude <= ``tol``.

    Band-limited specs are checked on the DFT, time-limited ones on the
    samples, converting ``x`` as needed.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    if support.kind is SupportKind.BAND_LIMITED:
        values = x.to_frequency().values
    else:
        values = x.to_time().values
    if support.width > values.size:
        return False
    return bool(np.all(np.abs(values[support.zero_indices(values.size)]) <= tol))


def circular_shift(x: Signal, s: int) -> Signal:
    return Signal(np.roll(x.values, s), x.domain)


# --- serialisation ---------------------------------------------------------


def signal_to_dict(x: Signal) -> dict:
    return {
        "n": x.n,
        "domain": x.domain.value,
        "values": [[float(v.real), float(v.imag)] for v in x.values],
    }


def signal_from_dict(data: dict) -> Signal:
    try:
        values = np.array([complex(re, im) for re, im in data["values"]])
        sig = Signal(values, Domain(data.get("domain", Domain.TIME)))
        if "n" in data and int(data["n"]) != sig.n:
            raise ParseError(f"declared n={data['n']} but found {sig.n} values")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed signal document: {exc}") from exc
    return sig


def write_signal_csv(x: Signal, fh) -> None:
    writer = csv.writer(fh)
    writer.writerow(["index", "re", "im"])
    for i, v in enumerate(x.values):
        writer.writerow([i, repr(float(v.real)), repr(float(v.imag))])


def read_signal_csv(fh, domain: Domain = Domain.TIME) -> Signal:
    try:
        rows = list(csv.DictReader(fh))
        rows.sort(key=lambda r: int(r["index"]))
        if [int(r["index"]) for r in rows] != list(range(len(rows))):
            raise ParseError("signal CSV indices must be 0..N-1")
        values = [complex(float(r["re"]), float(r["im"])) for r in rows]
        return Signal(np.array(values), domain)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed signal CSV: {exc}") from exc


def save_signal(x: Signal, path) -> None:
    """JSON keeps the domain tag; CSV has none and always holds time samples."""
    path = Path(path)
    if path.suffix == ".json":
        atomic_write(path, json.dumps(signal_to_dict(x)))
    else:
        x = x.to_time()
        atomic_write(path, lambda fh: write_signal_csv(x, fh))


def load_signal(path, domain: Domain = Domain.TIME) -> Signal:
    path = Path(path)
    with open(path, newline="") as fh:
        if path.suffix == ".json":
            try:
                return signal_from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}: {exc}") from exc
        return read_signal_csv(fh, domain)
