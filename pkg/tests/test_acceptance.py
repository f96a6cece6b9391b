"""Acceptance criteria, one test each.

Every test records a single ``PASS``/``FAIL`` line with the measured
quantity; the lines are printed in the pytest terminal summary and, when this
file is run as a script, directly to stdout.
"""
import csv
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from _oracles import naive_bispectrum, naive_cumulant, random_complex  # noqa: E402
from bispec.errors import IllConditionedError  # noqa: E402
from bispec.experiments import (  # noqa: E402
    SWEEP_COLUMNS,
    TrialConfig,
    dist,
    load_sweep,
    run_sweep,
    run_trial,
    write_sweep_csv,
)
from bispec.polyspectra import (  # noqa: E402
    BispectrumGrid,
    bispectrum,
    check_conjugate_symmetry,
    signal_bispectrum,
    third_order_cumulant,
)
from bispec.recovery import (  # noqa: E402
    SolverConfig,
    constructive_recover,
    init_spectral,
    objective_h,
    trust_region_solve,
    wirtinger_gradient,
)
from bispec.signals import (  # noqa: E402
    Domain,
    Signal,
    SupportSpec,
    circular_shift,
    generate_gaussian_spectrum,
    rng_for,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []


def record(number: int, title: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


def test_c1_forward_maps_match_loops():
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    worst_b = worst_c = 0.0
    for n in (8, 16):
        for _ in range(50):
            x = random_complex(rng, n)
            y = np.fft.fft(x)
            ref_b = naive_bispectrum(y)
            ref_c = naive_cumulant(x)
            worst_b = max(worst_b, np.max(np.abs(bispectrum(y).entries - ref_b)) / np.linalg.norm(ref_b))
            worst_c = max(worst_c, np.max(np.abs(third_order_cumulant(x).entries - ref_c)) / np.linalg.norm(ref_c))
    elapsed = time.perf_counter() - start
    record(1, "forward-map oracle equivalence", worst_b <= 1e-12 and worst_c <= 1e-12 and elapsed < 5,
           f"max scaled err bispectrum {worst_b:.1e}, cumulant {worst_c:.1e} (tol 1e-12); {elapsed:.2f}s (< 5s)")


def test_c2_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    n = 16
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        b = BispectrumGrid(naive_bispectrum(random_complex(rng, n)))
        y = random_complex(rng, n)
        v = random_complex(rng, n)
        v /= np.linalg.norm(v)
        d = wirtinger_gradient(y, b, np.arange(n))
        t = 1e-6 * np.linalg.norm(y)
        fd = (objective_h(y + t * v, b) - objective_h(y - t * v, b)) / (2 * t)
        analytic = 2 * np.real(np.vdot(v, d))
        worst = max(worst, abs(fd - analytic) / abs(analytic))
    elapsed = time.perf_counter() - start
    record(2, "gradient vs central differences", worst <= 1e-6 and elapsed < 10,
           f"max relative error {worst:.1e} (tol 1e-6); {elapsed:.2f}s (< 10s)")


def test_c3_stationary_at_truth():
    rng = np.random.default_rng(3)
    worst = 0.0
    for n in (8, 32):
        for y in (generate_gaussian_spectrum(n, seed=n).to_frequency().values, random_complex(rng, n)):
            b = bispectrum(y)
            d = wirtinger_gradient(y, b)
            worst = max(worst, np.max(np.abs(d)) / max(1.0, b.norm()))
    record(3, "stationarity at the true spectrum", worst <= 1e-10,
           f"max ||d||_inf / max(1, ||B||_F) = {worst:.1e} (tol 1e-10)")


def test_c4_constructive_oracle():
    start = time.perf_counter()
    results = {}
    for n, width in ((16, 8), (64, 32)):
        ok = 0
        for seed in range(100):
            x = generate_gaussian_spectrum(n, SupportSpec.band(width), seed=seed)
            ok += dist(x, constructive_recover(signal_bispectrum(x), SupportSpec.band(width))) <= 1e-8
        results[(n, width)] = ok
    raised = 0
    for seed in range(20):
        y = generate_gaussian_spectrum(16, SupportSpec.band(8), seed=seed).to_frequency().values.copy()
        y[1 + seed % 6] = 0.0
        try:
            constructive_recover(signal_bispectrum(Signal(y, Domain.FREQUENCY)), SupportSpec.band(8))
        except IllConditionedError:
            raised += 1
    elapsed = time.perf_counter() - start
    passed = all(v == 100 for v in results.values()) and raised == 20 and elapsed < 30
    record(4, "constructive oracle exactness", passed,
           f"N=16,B=8: {results[(16, 8)]}/100; N=64,B=32: {results[(64, 32)]}/100 with dist <= 1e-8; "
           f"in-band zero raised {raised}/20; {elapsed:.1f}s (< 30s)")


def test_c5_initializer_quality():
    init_only = TrialConfig(n=128, band_width=64, solver=SolverConfig(max_iter=0))
    exact = sum(run_trial(init_only.replace(seed=s)).dist_init <= 1e-6 for s in range(100))
    fractions = (0.0, 0.1, 0.25, 0.5)
    means = []
    for f in fractions:
        dists = [run_trial(init_only.replace(seed=s, snr_db=20, removal_fraction=f)).dist_init for s in range(100)]
        means.append(math.fsum(dists) / len(dists))
    trend = all(b >= a for a, b in zip(means, means[1:]))
    record(5, "initializer quality", exact >= 90 and trend,
           f"noiseless exact {exact}/100 (need >= 90); mean dist at 20 dB over removal {fractions}: "
           + ", ".join(f"{m:.3f}" for m in means) + (" nondecreasing" if trend else " NOT monotone"))


def test_c6_end_to_end_recovery():
    start = time.perf_counter()
    perturbed = run_sweep(TrialConfig(n=128, band_width=64, init_mode="perturbed", seed=6),
                          ("delta", [0.0]), ("removal_fraction", [0.0]), trials=100)[0]["success_rate"]
    spectral = run_sweep(TrialConfig(n=32, init_mode="spectral", seed=6, solver=SolverConfig(eps=1e-8)),
                         ("snr_db", [math.inf]), ("removal_fraction", [0.0]), trials=100)[0]["success_rate"]
    elapsed = time.perf_counter() - start
    record(6, "end-to-end recovery", perturbed == 1.0 and spectral >= 0.9 and elapsed < 300,
           f"perturbed delta=0 success {perturbed:.2f} (need 1.00); spectral N=32 success {spectral:.2f} "
           f"(need >= 0.90); {elapsed:.1f}s (< 300s)")


def test_c7_full_gradient_descent():
    n = 16
    strict = 0
    steps = []
    for seed in range(10):
        x = generate_gaussian_spectrum(n, SupportSpec.band(8), seed=seed)
        zeta = rng_for(seed, "c7").choice([-1.0, 1.0], size=n)
        x0 = Signal(x.values + 0.05 * zeta)
        _, trace = trust_region_solve(signal_bispectrum(x), x0, SolverConfig(q=n * n, eps=1e-8))
        h = [trace.h0] + trace.h
        strict += len(trace) > 0 and all(b < a for a, b in zip(h, h[1:]))
        steps.append(len(trace))
    record(7, "deterministic-mode descent", strict == 10,
           f"strictly decreasing on {strict}/10 instances (iterations {min(steps)}..{max(steps)})")


def test_c8_symmetries():
    rng = np.random.default_rng(8)
    sym = 0.0
    for n in (8, 16, 33):
        for _ in range(10):
            b = signal_bispectrum(Signal(rng.standard_normal(n)))
            sym = max(sym, check_conjugate_symmetry(b) / max(1.0, float(np.linalg.norm(b.entries))))
    x = Signal(random_complex(rng, 8))
    c = third_order_cumulant(x).entries
    shift = max(np.max(np.abs(third_order_cumulant(circular_shift(x, s)).entries - c)) for s in range(8))
    neg = max(abs(dist(z, Signal(-z.values)) - 2.0)
              for z in (generate_gaussian_spectrum(64, seed=1), Signal(random_complex(rng, 16))))
    record(8, "symmetry and invariance suite", sym <= 1e-10 and shift <= 1e-12 and neg <= 1e-10,
           f"conjugate symmetry {sym:.1e} (tol 1e-10); cumulant shift {shift:.1e} (tol 1e-12); "
           f"|dist(x,-x) - 2| = {neg:.1e} (tol 1e-10)")


@pytest.mark.slow
def test_c9_protocol_reproduction(tmp_path):
    start = time.perf_counter()
    details = []
    well_formed = True
    for name in ("fig1", "fig3"):
        spec = load_sweep(name)
        t0 = time.perf_counter()
        rows = spec.run()
        path = tmp_path / f"{name}.csv"
        write_sweep_csv(rows, path)
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = tuple(reader.fieldnames)
            parsed = list(reader)
        cells = len(spec.axis1[1]) * len(spec.axis2[1])
        ok = (header == SWEEP_COLUMNS and len(parsed) == cells and spec.base.n == 128
              and all(int(r["trials"]) == 100 for r in parsed)
              and all(0.0 <= float(r["success_rate"]) <= 1.0 for r in parsed)
              and all(math.isfinite(float(r["mean_dist_init"])) for r in parsed))
        well_formed &= ok
        details.append(f"{name}: {cells} cells x 100 trials in {time.perf_counter() - t0:.0f}s"
                       + ("" if ok else " (malformed)"))
    elapsed = time.perf_counter() - start
    record(9, "protocol reproduction", well_formed and elapsed < 1800,
           "; ".join(details) + f"; total {elapsed:.0f}s (< 1800s)")


if __name__ == "__main__":
    import tempfile

    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_c") and callable(fn):
            try:
                if name.startswith("test_c9"):
                    with tempfile.TemporaryDirectory() as tmp:
                        fn(Path(tmp))
                else:
                    fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
