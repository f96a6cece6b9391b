import os
import subprocess
import sys

import numpy as np
import pytest

from _oracles import naive_bispectrum, naive_objective, random_complex
from bispec import _kernels_py, kernels

try:
    from bispec import _kernels as compiled
except ImportError:  # pragma: no cover - exercised only without a build
    compiled = None

needs_ext = pytest.mark.skipif(compiled is None, reason="compiled extension not built")
IMPLS = [pytest.param(_kernels_py, id="python"), pytest.param(compiled, id="compiled", marks=needs_ext)]


def _case(rng, n, observed=0.8):
    y = random_complex(rng, n)
    bf = naive_bispectrum(random_complex(rng, n))
    mask = (rng.random((n, n)) < observed).astype(np.uint8)
    return y, bf, mask


@pytest.mark.parametrize("impl", IMPLS)
@pytest.mark.parametrize("n", [4, 9, 16])
def test_bispectrum_against_loop(impl, rng, n):
    y = random_complex(rng, n)
    np.testing.assert_allclose(kernels.bispectrum(y, impl=impl), naive_bispectrum(y), atol=1e-12)


@pytest.mark.parametrize("impl", IMPLS)
@pytest.mark.parametrize("n", [4, 9, 16])
def test_objective_against_loop(impl, rng, n):
    y, bf, mask = _case(rng, n)
    assert np.isclose(kernels.objective(y, bf, mask, impl=impl), naive_objective(y, bf, mask), rtol=1e-12)


@needs_ext
@pytest.mark.parametrize("n", [5, 16, 33])
def test_backends_agree(rng, n):
    y, bf, mask = _case(rng, n, observed=0.6)
    np.testing.assert_allclose(compiled.bispectrum(y), _kernels_py.bispectrum(y), rtol=1e-13, atol=1e-13)
    assert np.isclose(compiled.objective(y, bf, mask), _kernels_py.objective(y, bf, mask), rtol=1e-12)
    for block in (np.arange(n), np.array([0]), np.sort(rng.choice(n, n // 2, replace=False))):
        block = block.astype(np.intp)
        a = kernels.gradient(y, bf, mask, block, impl=compiled)
        b = kernels.gradient(y, bf, mask, block, impl=_kernels_py)
        np.testing.assert_allclose(a, b, rtol=1e-11, atol=1e-11 * np.abs(b).max())


@needs_ext
def test_compiled_accepts_read_only_inputs(rng):
    y, bf, mask = _case(rng, 8)
    for arr in (y, bf, mask):
        arr.setflags(write=False)
    block = np.arange(8, dtype=np.intp)
    block.setflags(write=False)
    kernels.bispectrum(y, impl=compiled)
    kernels.objective(y, bf, mask, impl=compiled)
    kernels.gradient(y, bf, mask, block, impl=compiled)


def test_backend_is_reported():
    assert kernels.BACKEND in ("compiled", "python")


def test_pure_env_var_forces_fallback():
    env = dict(os.environ, BISPEC_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import bispec; print(bispec.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
