"""Fingerprint estimators against independent brute-force oracles."""

import numpy as np
import pytest

from goofloc import (
    DegenerateInputError,
    FingerprintKind,
    FingerprintSample,
    SnapshotBlock,
    build_goof,
    est_covariance,
    est_flom,
    est_foc,
    est_psd,
    est_signal_subspace,
    extract_rss,
    load_goof,
    save_goof,
    vectorize,
)
from goofloc.fingerprints import KIND_ORDER, extract_group, feature_dim


def random_block(rng, m=None, length=None):
    m = m or int(rng.integers(2, 9))
    length = length or int(rng.integers(8, 257))
    return rng.standard_normal((m, length)) + 1j * rng.standard_normal((m, length))


def power_iteration_principal(r, iters=20_000, tol=1e-13):
    """Independent oracle: dominant eigenvector by plain power iteration."""
    rng = np.random.default_rng(12345)
    v = rng.standard_normal(r.shape[0]) + 1j * rng.standard_normal(r.shape[0])
    v /= np.linalg.norm(v)
    for _ in range(iters):
        w = r @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return np.abs(v)
        w /= nw
        if np.linalg.norm(np.abs(w) - np.abs(v)) < tol:
            v = w
            break
        v = w
    return np.abs(v)


def foc_quadruple_loop(y):
    """Independent oracle: entry-by-entry sample cumulants, no vectorization."""
    m, length = y.shape
    out = np.zeros((m, m), dtype=complex)
    for i in range(m):
        for k in range(m):
            e_full = np.mean(y[i] * y[k] * np.conj(y[i]) * np.conj(y[k]))
            e_ii = np.mean(y[i] * np.conj(y[i]))
            e_kk = np.mean(y[k] * np.conj(y[k]))
            e_ik = np.mean(y[i] * np.conj(y[k]))
            e_ki = np.mean(y[k] * np.conj(y[i]))
            e_prod = np.mean(y[i] * y[k])
            e_conj = np.mean(np.conj(y[i]) * np.conj(y[k]))
            out[i, k] = e_full - e_ii * e_kk - e_ik * e_ki - e_prod * e_conj
    return out


class TestCovariance:
    def test_single_snapshot_outer_product(self):
        y = np.array([[1.0], [1j]])
        r = est_covariance(y)
        assert np.allclose(r, [[1.0, -1j], [1j, 1.0]])

    def test_law_of_large_numbers(self):
        rng = np.random.default_rng(0)
        y = (rng.standard_normal((3, 100_000)) + 1j * rng.standard_normal((3, 100_000))) / np.sqrt(2)
        r = est_covariance(y)
        assert np.allclose(np.diag(r).real, 1.0, atol=0.02)
        off = r[~np.eye(3, dtype=bool)]
        assert np.abs(off).max() < 0.02

    def test_hermitian_and_psd(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            r = est_covariance(random_block(rng))
            assert np.abs(r - r.conj().T).max() < 1e-12
            eigs = np.linalg.eigvalsh(r)
            assert eigs.min() >= -1e-10 * eigs.max()

    def test_empty_block_rejected(self):
        with pytest.raises(ValueError):
            est_covariance(np.zeros((3, 0), dtype=complex))


class TestRss:
    def test_diagonal_extraction(self):
        assert np.allclose(extract_rss(np.diag([1.0, 2.0, 3.0])), [1, 2, 3])

    def test_single_snapshot_example(self):
        r = est_covariance(np.array([[1.0], [1j]]))
        assert np.allclose(extract_rss(r), [1.0, 1.0])

    def test_matches_direct_power(self):
        rng = np.random.default_rng(2)
        y = random_block(rng)
        direct = np.mean(np.abs(y) ** 2, axis=1)
        assert np.allclose(extract_rss(est_covariance(y)), direct, atol=1e-12)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            extract_rss(np.ones((2, 3)))


class TestPsd:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(3)
        psd = est_psd(random_block(rng))
        assert np.allclose(psd.sum(axis=1), 1.0, atol=1e-9)

    def test_pure_tone_is_bin_indicator(self):
        length, k0 = 64, 5
        t = np.arange(length)
        tone = np.exp(2j * np.pi * k0 * t / length)
        psd = est_psd(np.vstack([tone, 2.0 * tone]))
        expected = np.zeros(length)
        expected[k0] = 1.0
        assert np.allclose(psd, expected[None, :], atol=1e-12)

    def test_white_input_is_roughly_flat(self):
        # periodogram bins of white noise are i.i.d. exponential: the max of
        # K=4096 of them concentrates near (ln K + gamma)/K ~ 8.9/K, so a
        # flat-spectrum check must allow that much headroom
        rng = np.random.default_rng(4)
        length = 4096
        y = (rng.standard_normal((2, length)) + 1j * rng.standard_normal((2, length))) / np.sqrt(2)
        psd = est_psd(y)
        assert np.abs(psd - 1.0 / length).max() < 15.0 / length
        assert np.abs(psd.mean(axis=1) - 1.0 / length).max() < 1e-12

    def test_point_count_truncation(self):
        rng = np.random.default_rng(5)
        y = random_block(rng, m=3, length=32)
        psd = est_psd(y, 8)
        assert psd.shape == (3, 8)
        assert np.allclose(psd.sum(axis=1), 1.0, atol=1e-9)

    def test_zero_row_rejected(self):
        y = np.zeros((2, 16), dtype=complex)
        y[0] += 1.0
        with pytest.raises(DegenerateInputError):
            est_psd(y)


class TestSignalSubspace:
    def test_diagonal_matrix(self):
        assert np.allclose(est_signal_subspace(np.diag([5.0, 1.0, 1.0])), [1, 0, 0])

    def test_rank_one_steering(self):
        a = np.exp(-1j * np.pi * np.arange(4) * 0.7)
        ssf = est_signal_subspace(np.outer(a, a.conj()))
        assert np.allclose(ssf, 0.5 * np.ones(4), atol=1e-12)

    def test_matches_power_iteration_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            y = random_block(rng, m=5)
            r = est_covariance(y)
            assert np.allclose(est_signal_subspace(r), power_iteration_principal(r), atol=1e-8)

    def test_unit_norm_nonnegative(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            ssf = est_signal_subspace(est_covariance(random_block(rng)))
            assert np.linalg.norm(ssf) == pytest.approx(1.0, abs=1e-10)
            assert (ssf >= 0).all()

    def test_non_hermitian_rejected(self):
        with pytest.raises(ValueError):
            est_signal_subspace(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestFoc:
    def test_gaussian_cumulants_vanish(self):
        rng = np.random.default_rng(8)
        length = 100_000
        y = (rng.standard_normal((2, length)) + 1j * rng.standard_normal((2, length))) / np.sqrt(2)
        assert np.abs(est_foc(y)).max() < 0.05

    def test_constant_block_hand_value(self):
        y = np.ones((2, 10), dtype=complex)
        foc = est_foc(y)
        assert np.allclose(foc, -2.0 * np.ones((2, 2)), atol=1e-12)

    def test_matches_quadruple_loop_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            y = random_block(rng, m=4, length=64)
            assert np.abs(est_foc(y) - foc_quadruple_loop(y)).max() < 1e-10

    def test_qam_through_mixing_matches_oracle(self):
        rng = np.random.default_rng(10)
        symbols = rng.choice([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j], size=512) / np.sqrt(2)
        mixing = rng.standard_normal((3, 1)) + 1j * rng.standard_normal((3, 1))
        y = mixing @ symbols[None, :]
        assert np.abs(est_foc(y) - foc_quadruple_loop(y)).max() < 1e-10


class TestFlom:
    def test_p2_equals_covariance(self):
        rng = np.random.default_rng(11)
        y = random_block(rng)
        assert np.abs(est_flom(y, 2.0) - est_covariance(y)).max() < 1e-12

    def test_constant_column_closed_form(self):
        # y_k(t) = c for all t, p = 1.5: column k equals mean(y_i) * |c|^-0.5 * conj(c)
        c = 2.0 + 1.0j
        rng = np.random.default_rng(12)
        y = np.vstack([rng.standard_normal(50) + 1j * rng.standard_normal(50), np.full(50, c)])
        flom = est_flom(y, 1.5)
        expected = y[0].mean() * abs(c) ** (-0.5) * np.conj(c)
        assert np.allclose(flom[0, 1], expected, atol=1e-12)

    def test_bounded_under_heavy_tails(self):
        # alpha-stable contamination: second moments grow with L, FLOM stays put
        from goofloc.channel import sample_alpha_stable

        def contaminated(length, seed):
            rng = np.random.default_rng(seed)
            re = sample_alpha_stable(1.4, 0.0, 1.0, 0.0, (3, length), rng)
            im = sample_alpha_stable(1.4, 0.0, 1.0, 0.0, (3, length), rng)
            return re + 1j * im

        short, long = contaminated(1_000, 13), contaminated(100_000, 13)
        cov_growth = np.abs(np.diag(est_covariance(long))).max() / np.abs(
            np.diag(est_covariance(short))
        ).max()
        assert cov_growth > 2.0
        flom_short = np.abs(est_flom(short, 1.2)).max()
        flom_long = np.abs(est_flom(long, 1.2)).max()
        assert np.isfinite(flom_long)
        assert flom_long < 3.0 * flom_short

    def test_zero_samples_contribute_zero(self):
        y = np.array([[1.0 + 0j, 2.0], [0.0, 1.0]])
        flom = est_flom(y, 1.5)
        assert np.isfinite(flom).all()
        # column 2 only gets the t=2 term
        assert flom[0, 1] == pytest.approx((2.0 * 1.0) / 2)

    def test_exponent_range_enforced(self):
        y = np.ones((2, 4), dtype=complex)
        for bad in (0.5, 1.0, 2.5):
            with pytest.raises(ValueError):
                est_flom(y, bad)


class TestVectorize:
    def test_rssf_identity(self):
        assert np.allclose(vectorize(np.array([1.0, 2.0, 3.0]), FingerprintKind.RSSF), [1, 2, 3])

    def test_cmf_abs_of_reshape(self):
        r = np.array([[1.0, -1j], [1j, 1.0]])
        assert np.allclose(vectorize(r, FingerprintKind.CMF), [1, 1, 1, 1])

    def test_psdf_column_major_order(self):
        mat = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        flat = vectorize(mat, FingerprintKind.PSDF)
        assert np.allclose(flat, [1, 4, 2, 5, 3, 6])
        assert np.allclose(flat.reshape(mat.shape, order="F"), mat)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            vectorize(np.ones((2, 3)), FingerprintKind.CMF)
        with pytest.raises(ValueError):
            vectorize(np.ones(4), FingerprintKind.PSDF)

    def test_dims_match_declared_table(self):
        rng = np.random.default_rng(14)
        y = random_block(rng, m=5, length=32)
        features = extract_group(y)
        for kind in KIND_ORDER:
            assert features[kind].shape[0] == feature_dim(kind, 5, 32)
            assert np.isfinite(features[kind]).all()
            assert features[kind].dtype == float


def make_blocks(q=2, m=3, length=16, seed=0):
    rng = np.random.default_rng(seed)
    return [
        SnapshotBlock(
            data=rng.standard_normal((m, length)) + 1j * rng.standard_normal((m, length)),
            grid_label=grid,
            snr_db=10.0,
            noise_kind="gaussian",
        )
        for grid in range(1, q + 1)
    ]


class TestBuildGoof:
    def test_counts_and_labels(self):
        goof = build_goof(make_blocks(q=2, length=16), group_count=4)
        for kind in KIND_ORDER:
            labels = [s.grid_label for g in (1, 2) for s in goof.samples[kind][g]]
            assert labels == [1, 1, 1, 1, 2, 2, 2, 2]
        x, y = goof.stack(FingerprintKind.RSSF)
        assert x.shape == (8, 3)
        assert list(y) == [1, 1, 1, 1, 2, 2, 2, 2]

    def test_simulation_protocol_shape(self):
        # 3200 snapshots in 32-snapshot groups gives 100 samples per grid
        assert 3200 // 32 == 100
        goof = build_goof(make_blocks(q=1, length=3200), group_count=100)
        assert goof.snapshots_per_group == 32
        assert len(goof.samples[FingerprintKind.CMF][1]) == 100

    def test_recorded_protocol_shape(self):
        # 400 snapshots in 80 groups of 5
        goof = build_goof(make_blocks(q=1, m=4, length=400), group_count=80)
        assert goof.snapshots_per_group == 5

    def test_indivisible_group_count_rejected(self):
        with pytest.raises(ValueError):
            build_goof(make_blocks(length=16), group_count=3)

    def test_deterministic(self):
        a = build_goof(make_blocks(), group_count=4)
        b = build_goof(make_blocks(), group_count=4)
        for kind in KIND_ORDER:
            for grid in (1, 2):
                for s1, s2 in zip(a.samples[kind][grid], b.samples[kind][grid]):
                    assert np.array_equal(s1.features, s2.features)

    def test_split(self):
        goof = build_goof(make_blocks(length=32), group_count=8)
        train, test = goof.split(5, 3)
        assert train.group_count == 5 and test.group_count == 3
        joined = train.features(FingerprintKind.SSF, 1) + test.features(FingerprintKind.SSF, 1)
        for a, b in zip(joined, goof.features(FingerprintKind.SSF, 1)):
            assert np.array_equal(a, b)
        with pytest.raises(ValueError):
            goof.split(6, 3)

    def test_sample_validation(self):
        with pytest.raises(ValueError):
            FingerprintSample(FingerprintKind.RSSF, np.array([1.0, np.inf]), 1)


class TestGoofPersistence:
    def test_round_trip(self, tmp_path):
        goof = build_goof(make_blocks(q=3, length=32), group_count=4)
        save_goof(goof, tmp_path / "store")
        back = load_goof(tmp_path / "store")
        assert back.group_count == goof.group_count
        assert back.snapshots_per_group == goof.snapshots_per_group
        assert back.snr_db == goof.snr_db
        for kind in KIND_ORDER:
            for grid in (1, 2, 3):
                for s1, s2 in zip(goof.samples[kind][grid], back.samples[kind][grid]):
                    assert np.array_equal(s1.features, s2.features)
                    assert s1.grid_label == s2.grid_label

    def test_truncated_matrix_rejected(self, tmp_path):
        from goofloc import FormatError

        goof = build_goof(make_blocks(), group_count=4)
        save_goof(goof, tmp_path / "store")
        target = tmp_path / "store" / "cmf.f64"
        target.write_bytes(target.read_bytes()[:-8])
        with pytest.raises(FormatError):
            load_goof(tmp_path / "store")
