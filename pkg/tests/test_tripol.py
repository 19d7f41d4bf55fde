import numpy as np
import pytest

from emchan import (
    DomainError,
    ShapeError,
    TriPolChannel,
    benchmark_uplink_only,
    combining_reference,
    estimate_joint,
    group_ports,
    joint_estimate,
    normalize,
    quantize_feedback,
    scalar_aligned,
    simulate_tripol_channel,
    uplink_estimate,
)
from emchan.tripol import NormalizationRecord, downlink_measure


def small_channel(seed=0, rx=(2, 4, 2), tx=(8, 8, 0)):
    rng = np.random.default_rng(seed)
    return simulate_tripol_channel(rx_ports=rx, tx_ports=tx, z_gain_db=-10.0,
                                   xpr_db=8.0, rng=rng)


def test_simulated_channel_block_statistics():
    rng = np.random.default_rng(1)
    ch = simulate_tripol_channel(rx_ports=(200, 200, 200), tx_ports=(200, 200, 0),
                                 z_gain_db=-10.0, xpr_db=8.0, rng=rng)
    assert ch.matrix.shape == (600, 400)
    co = np.mean(np.abs(ch.block(0, 0)) ** 2)
    cross = np.mean(np.abs(ch.block(0, 1)) ** 2)
    z_co = np.mean(np.abs(ch.block(2, 0)) ** 2)
    # cross-polarization sits xpr dB below co-pol; z rows carry the z deficit
    assert co == pytest.approx(1.0, rel=0.05)
    assert 10 * np.log10(co / cross) == pytest.approx(8.0, abs=0.5)
    want_z = 10 ** (-10.0 / 10) * 10 ** (-8.0 / 10)
    assert z_co == pytest.approx(want_z, rel=0.1)


def test_block_indexing_and_validation():
    ch = small_channel()
    assert ch.block(0, 0).shape == (2, 8)
    assert ch.block(1, 1).shape == (4, 8)
    assert ch.block(2, 0).shape == (2, 8)
    assert np.allclose(ch.block(1, 0), ch.matrix[2:6, :8])
    with pytest.raises(DomainError):
        ch.block(3, 0)
    with pytest.raises(ShapeError):
        TriPolChannel(matrix=np.zeros((3, 4), dtype=complex), rx_ports=(2, 4, 2),
                      tx_ports=(2, 2, 0))


def test_group_ports_median_and_threshold():
    power = np.array([4.0, 4.0, 1.0, 1.0])
    g = group_ports(power, rule="median")
    assert list(g.strong) == [0, 1]
    assert list(g.weak) == [2, 3]
    g2 = group_ports(power, rule="threshold", threshold=0.5)
    assert list(g2.strong) == [0, 1]
    # all-equal powers put everything in the strong set
    ge = group_ports(np.ones(4), rule="median")
    assert list(ge.strong) == [0, 1, 2, 3]
    assert list(ge.weak) == []
    with pytest.raises(DomainError):
        group_ports(power, rule="quartile")
    with pytest.raises(DomainError):
        group_ports(power, rule="threshold", threshold=1.5)


def test_z_ports_group_weak():
    ch = small_channel(seed=3)
    row_power = np.mean(np.abs(ch.matrix) ** 2, axis=1)
    g = group_ports(row_power, rule="median")
    # the two z rows (indices 6, 7) sit 10 dB down and must land in the weak set
    assert 6 in g.weak and 7 in g.weak


def test_uplink_estimate_noiseless():
    ch = small_channel(seed=4)
    rows = np.arange(8)
    est = uplink_estimate(ch, rows, pilot_snr_db=np.inf, rng_seed=0)
    assert np.allclose(est, ch.matrix, atol=1e-15)
    sub = uplink_estimate(ch, np.array([1, 5]), pilot_snr_db=np.inf, rng_seed=0)
    assert np.allclose(sub, ch.matrix[[1, 5]], atol=1e-15)


def test_uplink_noise_variance():
    ch = small_channel(seed=5)
    rows = np.arange(8)
    snr = 7.0
    trials = 4000
    acc = 0.0
    for i in range(trials):
        est = uplink_estimate(ch, rows, pilot_snr_db=snr, rng_seed=i)
        acc += np.mean(np.abs(est - ch.matrix) ** 2)
    ref = np.mean(np.abs(ch.matrix) ** 2)
    want = ref * 10 ** (-snr / 10)
    assert acc / trials == pytest.approx(want, rel=0.05)


def test_downlink_measure_partition():
    ch = small_channel(seed=6)
    row_power = np.mean(np.abs(ch.matrix) ** 2, axis=1)
    g = group_ports(row_power, rule="median")
    strong_rows, weak_rows = downlink_measure(ch, g, pilot_snr_db=np.inf, rng_seed=0)
    assert np.allclose(strong_rows, ch.matrix[list(g.strong)], atol=1e-15)
    assert np.allclose(weak_rows, ch.matrix[list(g.weak)], atol=1e-15)


def test_normalize_and_record():
    m = np.array([[2j]])
    out, rec = normalize(m)
    assert rec.amplitude == pytest.approx(2.0)
    assert rec.phase == pytest.approx(np.pi / 2)
    assert np.allclose(out, [[1.0]])
    assert rec.factor() == pytest.approx(2j)

    rng = np.random.default_rng(7)
    m = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    out, rec = normalize(m)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)
    # leading entry is rotated onto the positive real axis
    assert abs(np.angle(out.flat[np.flatnonzero(out)[0]])) < 1e-12
    assert np.allclose(rec.factor() * out, m, atol=1e-12)
    # scale invariance: normalizing c*m gives the same normalized matrix
    out2, rec2 = normalize(5.0 * np.exp(0.3j) * m)
    assert np.allclose(out2, out, atol=1e-12)
    assert rec2.amplitude == pytest.approx(5.0 * rec.amplitude)
    with pytest.raises(DomainError):
        normalize(np.zeros((2, 2)))


def test_combining_reference():
    r1 = NormalizationRecord(amplitude=2.0, phase=np.pi / 2)
    r2 = NormalizationRecord(amplitude=1.0, phase=0.0)
    assert combining_reference(r1, r2) == pytest.approx(2j)
    assert abs(combining_reference(r1, r2)) == pytest.approx(r1.amplitude / r2.amplitude)


def test_quantize_feedback_roundtrip():
    rng = np.random.default_rng(8)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    q = quantize_feedback(m, bits=12)
    assert np.max(np.abs(q - m)) < 2e-3 * np.max(np.abs(m))
    coarse = quantize_feedback(m, bits=2)
    assert not np.allclose(coarse, m, atol=1e-6)
    with pytest.raises(DomainError):
        quantize_feedback(m, bits=0)


def test_joint_estimate_noiseless_end_to_end():
    ch = small_channel(seed=9)
    row_power = np.mean(np.abs(ch.matrix) ** 2, axis=1)
    g = group_ports(row_power, rule="median")
    est = estimate_joint(ch, g, uplink_snr_db=np.inf, downlink_snr_db=np.inf,
                         rng_seed=123)
    aligned, err = scalar_aligned(est.assembled, ch.matrix)
    assert err < 1e-10
    # the assembled estimate is the true channel up to one global scalar
    scalars = est.assembled.ravel() / ch.matrix.ravel()
    assert np.max(np.abs(scalars - scalars[0])) < 1e-10


def test_joint_estimate_empty_weak_group():
    ch = small_channel(seed=10)
    g = group_ports(np.ones(8), rule="median")
    assert list(g.weak) == []
    est = estimate_joint(ch, g, uplink_snr_db=np.inf, downlink_snr_db=np.inf,
                         rng_seed=5)
    assert est.delta == pytest.approx(1.0)
    _, err = scalar_aligned(est.assembled, ch.matrix)
    assert err < 1e-12


def test_joint_estimate_row_interleaving():
    ch = small_channel(seed=11)
    power = np.mean(np.abs(ch.matrix) ** 2, axis=1)
    g = group_ports(power, rule="median")
    h_strong = ch.matrix[list(g.strong)]
    h_weak_norm, _ = normalize(ch.matrix[list(g.weak)])
    up_norm, rec_up = normalize(h_strong)
    _, rec_weak = normalize(ch.matrix[list(g.weak)])
    delta = combining_reference(rec_weak, rec_up)
    est = joint_estimate(h_strong, delta, h_weak_norm, g)
    # rows return to their original indices
    _, err = scalar_aligned(est.assembled, ch.matrix)
    assert err < 1e-12
    for k, row in enumerate(g.strong):
        assert np.allclose(est.assembled[row], est.strong_rows[k])
    for k, row in enumerate(g.weak):
        assert np.allclose(est.assembled[row], est.weak_rows[k])


def test_scalar_aligned_properties():
    rng = np.random.default_rng(12)
    b = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    a = 0.3 * np.exp(1.1j) * b
    aligned, err = scalar_aligned(a, b)
    assert err < 1e-12
    assert np.allclose(aligned, b, atol=1e-12)
    # alignment minimizes over scalars, so the error never exceeds the raw one
    a2 = b + 0.1 * (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    _, err2 = scalar_aligned(a2, b)
    raw = np.linalg.norm(a2 - b) / np.linalg.norm(b)
    assert err2 <= raw + 1e-12


def test_estimate_scale_and_permutation_equivariance():
    ch = small_channel(seed=13)
    power = np.mean(np.abs(ch.matrix) ** 2, axis=1)
    g = group_ports(power, rule="median")
    est = estimate_joint(ch, g, np.inf, np.inf, rng_seed=77)
    scaled = TriPolChannel(matrix=3.0 * np.exp(0.4j) * ch.matrix,
                           rx_ports=ch.rx_ports, tx_ports=ch.tx_ports)
    est_s = estimate_joint(scaled, g, np.inf, np.inf, rng_seed=77)
    a1, e1 = scalar_aligned(est.assembled, ch.matrix)
    a2, e2 = scalar_aligned(est_s.assembled, scaled.matrix)
    assert e1 < 1e-10 and e2 < 1e-10
    assert np.allclose(a2, 3.0 * np.exp(0.4j) * a1, atol=1e-9)


def test_weak_rows_carry_higher_mse_at_relative_snr():
    # ports 10 dB down in pilot SNR accumulate 10x the absolute row error,
    # since the additive noise floor is shared across rows
    rng = np.random.default_rng(20)
    trials = 10_000
    n_tx = 16
    h_strong = rng.normal(size=(1, n_tx)) + 1j * rng.normal(size=(1, n_tx))
    h_strong /= np.sqrt(np.mean(np.abs(h_strong) ** 2))
    h_weak = h_strong * 10 ** (-10.0 / 20)
    ch = TriPolChannel(matrix=np.vstack([h_strong, h_weak]), rx_ports=(1, 1, 0),
                       tx_ports=(n_tx, 0, 0))
    strong_err = np.zeros(trials)
    weak_err = np.zeros(trials)
    for i in range(trials):
        est = benchmark_uplink_only(ch, per_port_snr_db=np.array([10.0, 0.0]),
                                    rng_seed=i)
        strong_err[i] = np.mean(np.abs(est[0] - ch.matrix[0]) ** 2)
        weak_err[i] = np.mean(np.abs(est[1] - ch.matrix[1]) ** 2)
    ratio = weak_err.mean() / strong_err.mean()
    assert ratio == pytest.approx(10.0, rel=0.2)


def test_joint_beats_uplink_only_when_weak_group_much_weaker():
    # weak group 10 dB below the strong one: joint feedback wins on weak rows
    wins = 0
    trials = 200
    for i in range(trials):
        ch = small_channel(seed=1000 + i)
        power = np.mean(np.abs(ch.matrix) ** 2, axis=1)
        g = group_ports(power, rule="median")
        est = estimate_joint(ch, g, uplink_snr_db=10.0, downlink_snr_db=10.0,
                             rng_seed=2 * i)
        per_port = 10.0 + 10 * np.log10(power / power.max())
        bench = benchmark_uplink_only(ch, per_port_snr_db=per_port, rng_seed=2 * i + 1)
        _, err_joint = scalar_aligned(est.assembled, ch.matrix)
        _, err_bench = scalar_aligned(bench, ch.matrix)
        wins += err_joint < err_bench
    assert wins / trials > 0.9
