import numpy as np
import pytest

from emchan import (
    DomainError,
    capacity_equal_power,
    capacity_waterfilling,
    empirical_cdf,
    ergodic_capacity,
)


def grid_search_waterfilling(lam, power, noise, levels=4_000_000):
    """Brute-force the water level on a fine grid; returns best capacity."""
    lam = np.sort(np.asarray(lam, dtype=float))[::-1]
    pos = lam[lam > 0]
    if pos.size == 0:
        return 0.0
    inv = noise / pos
    lo, hi = inv.min(), inv.max() + power
    best = -1.0
    for nu in np.linspace(lo, hi, 20001):
        p = np.clip(nu - inv, 0.0, None)
        s = p.sum()
        if s <= 0:
            continue
        p *= power / s
        best = max(best, float(np.sum(np.log2(1.0 + p * pos / noise))))
    return best


def test_identity_channel_equal_power():
    k = 4
    g = np.eye(k, dtype=complex)
    res = capacity_equal_power(g, power=float(k), noise_power=1.0)
    # P/K = 1 per mode on unit eigenvalues: K * log2(2)
    assert res.capacity == pytest.approx(k, abs=1e-12)
    assert np.allclose(res.allocation, 1.0)


def test_eigen_sum_oracle():
    rng = np.random.default_rng(0)
    for _ in range(25):
        m, n = rng.integers(1, 6, size=2)
        g = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
        p, sig = rng.uniform(0.5, 5.0, size=2)
        lam = np.sort(np.linalg.eigvalsh(g.conj().T @ g))[::-1]
        lam = np.clip(lam, 0.0, None)
        want = np.sum(np.log2(1.0 + p / (n * sig) * lam))
        got = capacity_equal_power(g, p, sig).capacity
        assert got == pytest.approx(want, abs=1e-10)


def test_rank_one_channel():
    g = np.outer([1.0, 2.0], [3.0, 0.0, 4.0]).astype(complex)
    res = capacity_waterfilling(g, power=2.0, noise_power=1.0)
    lam = 5.0 * 25.0
    assert res.eigenvalues[0] == pytest.approx(lam, rel=1e-12)
    assert np.count_nonzero(res.allocation) == 1
    assert res.allocation[0] == pytest.approx(2.0)
    assert res.capacity == pytest.approx(np.log2(1 + 2.0 * lam), rel=1e-12)


def test_equal_eigenvalues_match_equal_power():
    g = 1.7 * np.eye(3, dtype=complex)
    wf = capacity_waterfilling(g, power=6.0, noise_power=0.5)
    ep = capacity_equal_power(g, power=6.0, noise_power=0.5)
    assert wf.capacity == pytest.approx(ep.capacity, abs=1e-12)
    assert np.allclose(wf.allocation, 2.0)


def test_waterfilling_against_grid_search():
    rng = np.random.default_rng(3)
    for _ in range(10):
        m, n = rng.integers(2, 5, size=2)
        g = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
        p = rng.uniform(0.1, 10.0)
        got = capacity_waterfilling(g, p, 1.0).capacity
        want = grid_search_waterfilling(np.linalg.svd(g, compute_uv=False) ** 2, p, 1.0)
        assert got >= want - 1e-9
        assert got == pytest.approx(want, abs=1e-6)


def test_waterfilling_kkt_conditions():
    rng = np.random.default_rng(5)
    for _ in range(50):
        m, n = rng.integers(1, 7, size=2)
        g = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
        p = rng.uniform(0.01, 100.0)
        sig = rng.uniform(0.1, 3.0)
        res = capacity_waterfilling(g, p, sig)
        lam = res.eigenvalues
        alloc = res.allocation
        assert alloc.sum() == pytest.approx(p, rel=1e-9)
        assert np.all(alloc >= -1e-12)
        active = alloc > 1e-12
        if not np.any(active):
            continue
        levels = alloc[active] + sig / lam[active]
        nu = levels.mean()
        # active modes share one water level, inactive modes sit above it
        assert np.max(np.abs(levels - nu)) < 1e-9 * max(1.0, nu)
        inactive = ~active & (lam > 0)
        if np.any(inactive):
            assert np.all(sig / lam[inactive] >= nu - 1e-9)


def test_unitary_invariance():
    rng = np.random.default_rng(7)
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    u, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
    for fn in (capacity_equal_power, capacity_waterfilling):
        a = fn(g, 5.0, 1.0).capacity
        b = fn(q @ g @ u, 5.0, 1.0).capacity
        assert a == pytest.approx(b, abs=1e-10)


def test_monotone_in_power_and_wf_dominates():
    rng = np.random.default_rng(9)
    g = rng.normal(size=(3, 5)) + 1j * rng.normal(size=(3, 5))
    powers = np.linspace(0.1, 20.0, 30)
    prev_ep = prev_wf = -1.0
    for p in powers:
        ep = capacity_equal_power(g, p, 1.0).capacity
        wf = capacity_waterfilling(g, p, 1.0).capacity
        assert wf >= ep - 1e-12
        assert ep > prev_ep and wf > prev_wf
        prev_ep, prev_wf = ep, wf


def test_domain_errors():
    g = np.eye(2, dtype=complex)
    with pytest.raises(DomainError):
        capacity_equal_power(g, 1.0, 0.0)
    with pytest.raises(DomainError):
        capacity_waterfilling(g, -1.0, 1.0)
    with pytest.raises(DomainError):
        capacity_equal_power(np.array([1.0, np.inf]).reshape(1, 2), 1.0, 1.0)
    with pytest.raises(DomainError):
        capacity_waterfilling(np.zeros((2, 2, 2)), 1.0, 1.0)
    zero = capacity_waterfilling(np.zeros((2, 2)), 1.0, 1.0)
    assert zero.capacity == 0.0
    assert np.all(zero.allocation == 0.0)


def test_ergodic_determinism_and_constant_channel():
    def gen(rng):
        return rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))

    a = ergodic_capacity(gen, 64, 4.0, 1.0, master_seed=11, study_id=3)
    b = ergodic_capacity(gen, 64, 4.0, 1.0, master_seed=11, study_id=3)
    assert np.array_equal(a.capacities, b.capacities)
    c = ergodic_capacity(gen, 64, 4.0, 1.0, master_seed=12, study_id=3)
    assert not np.array_equal(a.capacities, c.capacities)

    g0 = np.diag([2.0, 1.0]).astype(complex)
    const = ergodic_capacity(lambda rng: g0, 16, 4.0, 1.0)
    want = capacity_equal_power(g0, 4.0, 1.0).capacity
    assert np.allclose(const.capacities, want)
    assert const.mean == pytest.approx(want)


def test_rayleigh_high_snr_slope():
    # 2x2 iid Rayleigh: ergodic capacity grows ~2 bits per 3 dB at high SNR
    def gen(rng):
        return (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / np.sqrt(2)

    means = []
    snrs = np.arange(20.0, 43.0, 3.0)
    for snr in snrs:
        stats = ergodic_capacity(gen, 400, 10 ** (snr / 10), 1.0, master_seed=21)
        means.append(stats.mean)
    slopes = np.diff(means)
    assert np.all(np.abs(slopes - 2.0) < 0.2)


def test_empirical_cdf_shape():
    rng = np.random.default_rng(2)
    x = rng.normal(size=500)
    levels, probs = empirical_cdf(x)
    assert np.all(np.diff(levels) >= 0)
    assert probs[0] == pytest.approx(1 / 500)
    assert probs[-1] == 1.0
    assert np.all(np.diff(probs) > 0)
