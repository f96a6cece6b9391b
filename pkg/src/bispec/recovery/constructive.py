"""Exact recursive inversion for noiseless band-limited bispectra."""
from __future__ import annotations

import numpy as np

from ..errors import DegenerateSignalError, IllConditionedError, InvalidSupportError
from ..polyspectra import BispectrumGrid
from ..signals import Domain, Signal, SupportKind, SupportSpec

DIVISOR_RTOL = 1e-14
POWER_RTOL = 1e-8


def constructive_recover(
    b: BispectrumGrid,
    support: SupportSpec,
    known_power_spectrum=None,
) -> Signal:
    """Rebuild ``y`` bin by bin from rows ``0 .. width-1`` of a clean bispectrum.

    ``y[0]`` is the real cube root of ``B[0, 0]``; ``y[1]`` is the principal
    root of ``B[1, 0] / y[0]`` (the other root is the half-period translate
    and has the same bispectrum); ``y[2] = B[2, 1] / |y[1]|^2`` and
    ``y[k] = B[k, 1] / (conj(y[1]) y[k-1])`` afterwards. ``|y[1]|^2`` comes
    from the diagonal ``B[1, 1] / y[0]`` unless ``known_power_spectrum``
    (``|y[k]|^2`` per bin) is supplied, in which case the diagonal is only
    checked against it.

    Raises:
        InvalidSupportError: support is not band-limited at offset 0 with
            ``width <= N / 2``.
        IllConditionedError: a divisor fell below ``1e-14 * ||B||_F``.
    """
    n = b.n
    if support.kind is not SupportKind.BAND_LIMITED or support.offset % n != 0:
        raise InvalidSupportError("constructive recovery needs a band support starting at bin 0")
    width = int(support.width)
    if width > n // 2:
        raise InvalidSupportError(f"band width {width} exceeds N/2 = {n // 2}")
    needed = [(0, 0)] + [(1, 0)] * (width >= 2) + [(k, 1) for k in range(2, width)]
    if width >= 3 and known_power_spectrum is None:
        needed.append((1, 1))
    if not all(b.mask[cell] for cell in needed):
        raise ValueError("constructive recovery needs rows 0..width-1 observed")

    floor = DIVISOR_RTOL * b.norm()
    b00 = b.entries[0, 0]
    if abs(b00) <= floor or b00 == 0:
        raise DegenerateSignalError("B[0, 0] vanishes, so y[0] = 0")
    y0 = float(np.cbrt(b00.real))

    y = np.zeros(n, dtype=np.complex128)
    y[0] = y0
    if width == 1:
        return Signal(y, Domain.FREQUENCY)

    diagonal = b.entries[np.arange(width), np.arange(width)].real / y0
    if known_power_spectrum is not None:
        power = np.asarray(known_power_spectrum, dtype=float)[:width]
        seen = b.mask[np.arange(width), np.arange(width)]
        gap = np.abs(diagonal - power)[seen]
        if np.any(gap > POWER_RTOL * max(1.0, float(np.max(power)))):
            raise ValueError("known power spectrum disagrees with the bispectrum diagonal")
    else:
        power = diagonal

    y[1] = np.sqrt(b.entries[1, 0] / y0)
    if width == 2:
        return Signal(y, Domain.FREQUENCY)
    if abs(power[1]) <= floor:
        raise IllConditionedError("|y[1]|^2 vanishes")
    y[2] = b.entries[2, 1] / power[1]
    for k in range(3, width):
        divisor = np.conj(y[1]) * y[k - 1]
        if abs(divisor) <= floor:
            raise IllConditionedError(f"in-band coefficient y[{k - 1}] vanishes")
        y[k] = b.entries[k, 1] / divisor
    return Signal(y, Domain.FREQUENCY)
