import numpy as np
import pytest

from _oracles import naive_bispectrum, naive_gradient, naive_objective, random_complex
from bispec.polyspectra import BispectrumGrid
from bispec.recovery import objective_h, sample_block, wirtinger_gradient
from bispec.signals import Domain, Signal


def _grid(rng, n, observed=1.0):
    bf = naive_bispectrum(random_complex(rng, n))
    mask = rng.random((n, n)) < observed
    return BispectrumGrid(bf, mask)


def test_objective_zero_at_truth(rng):
    y = random_complex(rng, 12)
    assert objective_h(y, BispectrumGrid(naive_bispectrum(y))) < 1e-20


def test_objective_against_loop(rng):
    y = random_complex(rng, 10)
    b = _grid(rng, 10, 0.7)
    assert np.isclose(objective_h(y, b), naive_objective(y, b.entries, b.mask), rtol=1e-12)


def test_objective_rejects_length_mismatch(rng):
    with pytest.raises(ValueError):
        objective_h(random_complex(rng, 8), _grid(rng, 10))


@pytest.mark.parametrize("n", [6, 11])
def test_gradient_against_five_sum_loop(rng, n):
    y = random_complex(rng, n)
    b = _grid(rng, n)
    np.testing.assert_allclose(wirtinger_gradient(y, b), naive_gradient(y, b.entries), rtol=1e-10, atol=1e-9)
    block = [1, 3, 4]
    np.testing.assert_allclose(wirtinger_gradient(y, b, block), naive_gradient(y, b.entries, block),
                               rtol=1e-10, atol=1e-9)


@pytest.mark.parametrize("observed", [1.0, 0.6])
def test_gradient_matches_finite_differences(rng, observed):
    n = 9
    b = _grid(rng, n, observed)
    for _ in range(5):
        y = random_complex(rng, n)
        v = random_complex(rng, n)
        d = wirtinger_gradient(y, b)
        t = 1e-5
        fd = (objective_h(y + t * v, b) - objective_h(y - t * v, b)) / (2 * t)
        assert abs(fd - 2 * np.real(np.vdot(v, d))) <= 1e-6 * max(1.0, abs(fd))


def test_gradient_is_additive_over_blocks(rng):
    n = 8
    y = random_complex(rng, n)
    b = _grid(rng, n, 0.7)
    total = sum(wirtinger_gradient(y, b, [k]) for k in range(n))
    np.testing.assert_allclose(total, wirtinger_gradient(y, b), rtol=1e-10, atol=1e-10)


def test_gradient_vanishes_at_truth(rng):
    y = random_complex(rng, 16)
    b = BispectrumGrid(naive_bispectrum(y))
    assert np.max(np.abs(wirtinger_gradient(y, b))) <= 1e-10 * max(1.0, b.norm())


def test_gradient_block_validation(rng):
    b = _grid(rng, 6)
    y = random_complex(rng, 6)
    with pytest.raises(ValueError):
        wirtinger_gradient(y, b, [])
    with pytest.raises(ValueError):
        wirtinger_gradient(y, b, [6])
    with pytest.raises(ValueError):
        wirtinger_gradient(Signal(y), b)
    wirtinger_gradient(Signal(y, Domain.FREQUENCY), b)


def test_sample_block_properties():
    blk = sample_block(20, 5, seed=3, t=7)
    assert blk.size == 5 and np.unique(blk).size == 5
    assert np.all(np.diff(blk) > 0) and blk.min() >= 0 and blk.max() < 20
    assert np.array_equal(blk, sample_block(20, 5, seed=3, t=7))
    assert not np.array_equal(blk, sample_block(20, 5, seed=3, t=8))
    assert np.array_equal(sample_block(20, 20, 0, 0), np.arange(20))
    assert np.array_equal(sample_block(20, 400, 0, 0), np.arange(20))
    assert set(sample_block(20, 2, 0, 0, observed=[4, 9, 11])) <= {4, 9, 11}
    with pytest.raises(ValueError):
        sample_block(20, 0, 0, 0)


def test_sample_block_is_uniform():
    counts = np.zeros(10)
    for t in range(2000):
        counts[sample_block(10, 3, seed=1, t=t)] += 1
    expected = 2000 * 3 / 10
    assert np.all(np.abs(counts - expected) < 5 * np.sqrt(expected))
