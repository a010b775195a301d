from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats as sps

from khop import kernels
from khop._chains_py import count_chains as count_chains_py
from khop.simulator import (
    BATCH_SIZE,
    SampleStats,
    SimConfig,
    count_khops_bruteforce,
    count_khops_lens,
    run_simulation,
    sample_points,
    simulate_counts,
    stream,
    write_samples,
)

try:
    from khop._chains import count_chains as count_chains_cy
except ImportError:  # pragma: no cover - depends on the build
    count_chains_cy = None


class TestConfig:
    def test_tau(self):
        assert SimConfig(3, 1, Fraction(5, 2)).tau == Fraction(1, 2)

    def test_padding(self):
        assert SimConfig(3, 1, 2, [1, 2]).intensities == (1.0, 2.0, 2.0)

    @pytest.mark.parametrize("kwargs", [
        dict(k=1), dict(k=3, t=3), dict(k=3, t=1), dict(k=3, t=2, intensities=-1),
        dict(k=3, t=2, intensities=[1, 2, 3, 4]), dict(k=3, t=2, seed=-1), dict(k=3, r=0),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)


def test_streams_are_reproducible_and_distinct():
    a = stream(5, 0).random(4)
    assert np.array_equal(a, stream(5, 0).random(4))
    assert not np.array_equal(a, stream(5, 1).random(4))
    assert not np.array_equal(a, stream(6, 0).random(4))


def test_sample_points_layout():
    s = sample_points(SimConfig(4, 1, 3, 5, seed=3))
    assert len(s.cells) == 4
    for l, cell in enumerate(s.cells, start=1):
        assert np.all((cell > l - 1) & (cell <= l))
        assert np.all(np.diff(cell) >= 0)


def test_bruteforce_hand_example():
    from khop.simulator import GraphSample

    # k=3, r=1, t=2: paths 0 -> s1 -> s2 -> 2 need 1 < s2 < 2... within reach
    s = GraphSample([np.array([0.9, 0.95]), np.array([1.2])], 3, 1.0, 2.0)
    # lens regime tau = 1: both first-cell points reach 1.2 and 1.2 reaches 2
    assert count_khops_bruteforce(s, 3, 1, 2) == 2
    assert count_khops_lens(s, 3, 1, 1) == 2


@pytest.mark.parametrize("seed", range(4))
def test_lens_dp_matches_bruteforce_dense(seed):
    rng = np.random.default_rng(seed)
    for i in range(60):
        k = int(rng.integers(2, 6))
        lam_value = float(rng.uniform(1, 6))
        tau_value = Fraction(int(rng.integers(30, 100)), 100)
        cfg = SimConfig(k, 1, k - tau_value, lam_value, seed=seed)
        s = sample_points(cfg, index=i)
        assert count_khops_lens(s, k, 1, tau_value) == count_khops_bruteforce(s, k, 1, k - tau_value)


@st.composite
def batches(draw):
    n_samples = draw(st.integers(1, 6))
    m = draw(st.integers(1, 4))
    keys, offsets = [], []
    for _ in range(m):
        sizes = draw(st.lists(st.integers(0, 5), min_size=n_samples, max_size=n_samples))
        # a small key range forces ties within and across lenses
        k = draw(st.lists(st.integers(0, 6), min_size=sum(sizes), max_size=sum(sizes)))
        keys.append(np.array(k, dtype=np.int64))
        offsets.append(np.concatenate(([0], np.cumsum(sizes))).astype(np.int64))
    return keys, offsets, n_samples


def _naive(keys, offsets, n_samples):
    out = []
    for s in range(n_samples):
        groups = [sorted(k[o[s]:o[s + 1]].tolist()) for k, o in zip(keys, offsets)]
        cnt = [1] * len(groups[0])
        for j in range(1, len(groups)):
            cnt = [sum(c for x, c in zip(groups[j - 1], cnt) if x < y) for y in groups[j]]
        out.append(sum(cnt))
    return out


@given(batches())
def test_python_kernel_matches_naive(batch):
    keys, offsets, n = batch
    assert count_chains_py(keys, offsets, n).tolist() == _naive(keys, offsets, n)


@pytest.mark.skipif(count_chains_cy is None, reason="compiled kernel not built")
@given(batches())
def test_compiled_kernel_matches_python(batch):
    keys, offsets, n = batch
    assert count_chains_cy(keys, offsets, n).tolist() == count_chains_py(keys, offsets, n).tolist()


@pytest.mark.skipif(count_chains_cy is None, reason="compiled kernel not built")
def test_backends_agree_on_a_simulation():
    cfg = SimConfig(4, 1, Fraction(13, 4), 20, n_samples=3000, seed=9)
    a = simulate_counts(cfg, count_fn=count_chains_py)
    b = simulate_counts(cfg, count_fn=count_chains_cy)
    assert np.array_equal(a, b)


def test_backend_selection():
    assert kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("n", [1, BATCH_SIZE - 1, BATCH_SIZE + 5, 3 * BATCH_SIZE])
def test_thread_count_does_not_change_results(n):
    cfg = SimConfig(3, 1, Fraction(9, 4), 4, n_samples=n, seed=123)
    ref = simulate_counts(cfg, threads=1)
    assert len(ref) == n
    for threads in (2, 8):
        assert np.array_equal(simulate_counts(cfg, threads=threads), ref)


def test_prefix_property():
    # batch streams do not depend on the total, so a longer run extends a shorter one
    a = simulate_counts(SimConfig(3, 1, 2, 1, n_samples=BATCH_SIZE, seed=1))
    b = simulate_counts(SimConfig(3, 1, 2, 1, n_samples=2 * BATCH_SIZE, seed=1))
    assert np.array_equal(a, b[:BATCH_SIZE])


def test_two_hop_poisson_mean():
    cfg = SimConfig(2, 1, Fraction(3, 2), 2, n_samples=100_000, seed=7)
    counts = simulate_counts(cfg)
    # mean lambda * tau = 1, standard error 1/sqrt(n)
    assert abs(counts.mean() - 1.0) < 4 / np.sqrt(len(counts))


def test_three_hop_lens_points_against_full_sampling():
    # counts from the lens-only fast path and from full configurations
    # agree in distribution
    cfg = SimConfig(3, 1, Fraction(5, 2), 3, n_samples=4000, seed=2)
    fast = simulate_counts(cfg)
    full = [count_khops_lens(sample_points(cfg, index=i), 3, 1, cfg.tau) for i in range(4000)]
    assert sps.ks_2samp(fast, full).pvalue > 1e-3


class TestSampleStats:
    def test_exact_kstats_match_scipy(self):
        rng = np.random.default_rng(0)
        c = rng.poisson(3, size=500)
        s = SampleStats()
        s.update(c)
        for order in (1, 2, 3, 4):
            assert float(s.kstat(order)) == pytest.approx(sps.kstat(c, order), rel=1e-9)
        assert s.skewness() == pytest.approx(sps.skew(c), rel=1e-9)
        assert s.ex_kurtosis() == pytest.approx(sps.kurtosis(c), rel=1e-9)

    @given(st.lists(st.integers(0, 20), min_size=4, max_size=40), st.integers(0, 40))
    def test_merge_equals_single_update(self, values, cut):
        whole = SampleStats()
        whole.update(values)
        a, b = SampleStats(), SampleStats()
        a.update(values[:cut])
        b.update(values[cut:])
        a.merge(b)
        assert a.power_sums == whole.power_sums
        assert a.kstat(2) == whole.kstat(2)
        assert np.array_equal(a.sorted_counts, whole.sorted_counts)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            SampleStats().update([-1])

    def test_summary_keys(self):
        s = run_simulation(SimConfig(3, 1, 2, 1, n_samples=100, seed=0))
        assert set(s.summary()) == {"n", "mean", "variance", "c3", "c4", "skewness", "ex_kurtosis"}
        assert set(s.standard_errors()) == {"mean", "variance", "c3"}


def test_write_samples(tmp_path):
    cfg = SimConfig(3, 1, 2, 1, n_samples=5, seed=4)
    counts = simulate_counts(cfg)
    path = tmp_path / "s.txt"
    write_samples(path, cfg, counts)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# khop k=3 r=1 t=2 ")
    assert "seed=4 n=5" in lines[0]
    assert [int(x) for x in lines[1:]] == counts.tolist()


def test_pure_python_fallback_selected_by_environment():
    import os
    import subprocess
    import sys

    code = "import khop.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, KHOP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "python"
