"""Least-squares bispectrum misfit, its Wirtinger gradient and block sampling."""
from __future__ import annotations

import numpy as np

from .. import kernels
from ..polyspectra import BispectrumGrid
from ..signals import Domain, _as_values, rng_for


def objective_h(y, b: BispectrumGrid) -> float:
    """Sum over observed cells of ``|B[k1,k2] - y[k1] conj(y[k2]) y[k1-k2]|^2``."""
    y = _as_values(y, Domain.FREQUENCY)
    if y.size != b.n:
        raise ValueError(f"length mismatch: signal {y.size}, grid {b.n}")
    return kernels.objective(y, b.entries, b.mask)


def wirtinger_gradient(y, b: BispectrumGrid, block=None) -> np.ndarray:
    """Block gradient ``d`` of the misfit with respect to ``conj(y)``.

    ``d[p]`` sums, over ``k`` in ``block``, three data terms and the
    matching model terms::

        - y[k] y[k-p] conj(B[k,p])          cell (k, p)
        - y[k] conj(y[p-k]) B[p,k]          cell (p, k)
        - B[k,k-p] y[k-p] conj(y[k])        cell (k, k-p)
        + y[p] |y[k]|^2 |y[p-k]|^2          cell (p, k)
        + y[p] |y[k]|^2 |y[k-p]|^2          cell (k, p)
        + y[p] |y[k+p]|^2 |y[k]|^2          cell (k+p, k)

    where each term is dropped when its cell is unobserved. With the full
    block this is exactly the Wirtinger derivative of the masked misfit, so
    ``h(y + t v) - h(y) ~ 2 t Re(v^H d)``.
    """
    y = _as_values(y, Domain.FREQUENCY)
    if y.size != b.n:
        raise ValueError(f"length mismatch: signal {y.size}, grid {b.n}")
    if block is None:
        block = np.arange(b.n)
    block = np.asarray(block, dtype=np.intp)
    if block.size == 0:
        raise ValueError("gradient block must not be empty")
    if block.min() < 0 or block.max() >= b.n:
        raise ValueError("block indices out of range")
    return kernels.gradient(y, b.entries, b.mask, block)


def sample_block(n: int, q: int, seed: int, t: int, observed=None) -> np.ndarray:
    """Draw ``q`` distinct summation indices ``k`` uniformly for iteration ``t``.

    Indices come from ``observed`` when given, otherwise from ``range(n)``;
    ``q`` at or above the population size returns the whole population.
    """
    if q < 1:
        raise ValueError("block size q must be at least 1")
    population = np.arange(n) if observed is None else np.unique(np.asarray(observed, dtype=np.intp))
    if q >= population.size:
        return population.copy()
    rng = rng_for(seed, "block", int(t))
    return np.sort(rng.choice(population, size=q, replace=False))
