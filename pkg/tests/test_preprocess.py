import numpy as np
import pytest

import kinseg.preprocess as pp
from kinseg.ingest import Demonstration
from kinseg.preprocess import (
    AugmentedMatrix,
    FeatureMatrix,
    augment,
    build_features,
    distance_features,
    labels_at_rows,
    lowpass_filter,
    quat_to_rotmat,
    raw_features,
    resolve_subset,
    rotmat_to_quat,
    rows_to_frames,
    subsample,
    zscore,
)


def rodrigues(axis, angle):
    # Independent rotation construction for the quaternion oracle.
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    K = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)


def quat_from_axis_angle(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    return np.concatenate([[np.cos(angle / 2.0)], np.sin(angle / 2.0) * axis])


class TestRotmatToQuat:
    def test_identity(self):
        assert np.allclose(rotmat_to_quat(np.eye(3)), [1, 0, 0, 0], atol=1e-12)

    def test_pi_about_z(self):
        R = rodrigues([0, 0, 1], np.pi)
        assert np.allclose(rotmat_to_quat(R), [0, 0, 0, 1], atol=1e-9)

    def test_matches_axis_angle_quaternion(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            axis = rng.normal(size=3)
            angle = rng.uniform(0, np.pi)
            q = rotmat_to_quat(rodrigues(axis, angle))
            ref = quat_from_axis_angle(axis, angle)
            if ref[0] < 0:
                ref = -ref
            # w ~ 0 leaves the overall sign ambiguous
            err = min(np.abs(q - ref).max(), np.abs(q + ref).max())
            assert err < 1e-9

    def test_round_trip_100_rotations(self):
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(100):
            R = rodrigues(rng.normal(size=3), rng.uniform(0, np.pi))
            worst = max(worst, np.abs(quat_to_rotmat(rotmat_to_quat(R)) - R).max())
        assert worst < 1e-9

    def test_near_pi_pivot_branches(self):
        rng = np.random.default_rng(2)
        for axis in ([1, 0, 0], [0, 1, 0], [0, 0, 1], rng.normal(size=3)):
            R = rodrigues(axis, np.pi - 1e-7)
            q = rotmat_to_quat(R)
            assert abs(np.linalg.norm(q) - 1.0) < 1e-12
            assert np.abs(quat_to_rotmat(q) - R).max() < 1e-9

    def test_unit_norm_and_sign(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            q = rotmat_to_quat(rodrigues(rng.normal(size=3), rng.uniform(0, np.pi)))
            assert abs(np.linalg.norm(q) - 1.0) < 1e-12
            assert q[0] >= 0

    def test_non_orthonormal_rejected(self):
        R = np.eye(3)
        R[0, 1] = 1e-4
        with pytest.raises(ValueError, match="orthonormal"):
            rotmat_to_quat(R)

    def test_small_perturbation_tolerated(self):
        R = rodrigues([1, 1, 0], 0.7)
        R[0, 0] += 1e-8
        rotmat_to_quat(R)

    def test_reflection_rejected(self):
        with pytest.raises(ValueError, match="reflection"):
            rotmat_to_quat(np.diag([1.0, 1.0, -1.0]))

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            rotmat_to_quat(np.eye(4))


def warped_double_pass_gain(f, fc, fs):
    # Analytic magnitude of the forward-backward 2nd-order Butterworth
    # designed by bilinear transform with prewarping.
    ratio = np.tan(np.pi * f / fs) / np.tan(np.pi * fc / fs)
    return 1.0 / (1.0 + ratio**4)


def sinusoid_amplitude(y, f, fs, crop):
    # Projection onto the quadrature pair over an integer period count.
    y = y[crop : len(y) - crop]
    period = int(round(fs / f))
    n = (len(y) // period) * period
    y = y[:n]
    t = np.arange(n) / fs
    c = 2.0 / n * np.sum(y * np.cos(2 * np.pi * f * t))
    s = 2.0 / n * np.sum(y * np.sin(2 * np.pi * f * t))
    return np.hypot(c, s)


class TestLowpassFilter:
    def test_constant_unchanged(self):
        x = np.full(200, 3.7)
        y = lowpass_filter(x, 1.5, 30.0)
        assert np.abs(y - 3.7).max() < 1e-6

    def test_dc_gain(self):
        rng = np.random.default_rng(4)
        x = 5.0 + 0.0 * rng.normal(size=500)
        y = lowpass_filter(x, 1.5, 30.0)
        assert np.abs(y.mean() - 5.0) < 1e-6

    def test_5hz_attenuation_matches_analytic(self):
        fs, fc, f = 30.0, 1.5, 5.0
        t = np.arange(1800) / fs
        y = lowpass_filter(np.sin(2 * np.pi * f * t), fc, fs)
        measured = sinusoid_amplitude(y, f, fs, crop=300)
        expected = warped_double_pass_gain(f, fc, fs)
        assert abs(measured - expected) / expected < 0.10

    def test_low_frequency_passes(self):
        fs, fc, f = 30.0, 1.5, 0.1
        t = np.arange(3000) / fs
        y = lowpass_filter(np.sin(2 * np.pi * f * t), fc, fs)
        measured = sinusoid_amplitude(y, f, fs, crop=300)
        assert measured >= 0.99
        # far below warping, the analog-prototype formula applies too
        analog = 1.0 / (1.0 + (f / fc) ** 4)
        assert abs(measured - analog) < 0.01

    def test_zero_phase(self):
        # a slow gaussian bump keeps its peak position
        fs = 30.0
        t = np.arange(600) / fs
        x = np.exp(-0.5 * ((t - 10.0) / 1.0) ** 2)
        y = lowpass_filter(x, 1.5, fs)
        assert abs(int(np.argmax(y)) - int(np.argmax(x))) <= 1

    def test_length_preserved(self):
        assert lowpass_filter(np.ones(57), 1.5, 30.0).shape == (57,)

    def test_minimum_length(self):
        lowpass_filter(np.array([1.0, 2.0, 1.0, 2.0]), 1.5, 30.0)
        with pytest.raises(ValueError, match="too short"):
            lowpass_filter(np.array([1.0, 2.0, 1.0]), 1.5, 30.0)

    def test_cutoff_above_nyquist(self):
        with pytest.raises(ValueError, match="Nyquist"):
            lowpass_filter(np.ones(10), 15.0, 30.0)
        with pytest.raises(ValueError, match="Nyquist"):
            lowpass_filter(np.ones(10), 0.0, 30.0)


class TestZscore:
    def test_basic(self):
        y = zscore(np.array([1.0, 2.0, 3.0]))
        assert abs(y.mean()) < 1e-9
        assert abs(y.std() - 1.0) < 1e-9

    def test_constant_to_zeros(self):
        assert np.array_equal(zscore(np.array([5.0] * 4)), np.zeros(4))

    def test_affine_invariance(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=100)
        assert np.allclose(zscore(3.2 * x + 7.0), zscore(x), atol=1e-12)

    def test_too_short(self):
        with pytest.raises(ValueError):
            zscore(np.array([1.0]))


class TestDistanceFeatures:
    def test_coincident(self):
        p = np.ones((5, 3))
        assert np.array_equal(distance_features(p, p), np.zeros((5, 4)))

    def test_pythagorean(self):
        right = np.array([[1.0, 2.0, 2.0]])
        left = np.zeros((1, 3))
        assert np.allclose(distance_features(right, left), [[1, 2, 2, 3]])

    def test_swap_antisymmetry(self):
        rng = np.random.default_rng(6)
        a, b = rng.normal(size=(2, 20, 3))
        d1 = distance_features(a, b)
        d2 = distance_features(b, a)
        assert np.allclose(d1[:, :3], -d2[:, :3])
        assert np.allclose(d1[:, 3], d2[:, 3])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            distance_features(np.ones((3, 3)), np.ones((4, 3)))


def make_fm(T=9, p=2, rate=30.0):
    values = np.arange(T * p, dtype=float).reshape(T, p)
    return FeatureMatrix(values=values, sample_rate_hz=rate)


class TestSubsample:
    def test_stride_three(self):
        fm = subsample(make_fm(T=9), 3)
        assert fm.n_frames == 3
        assert np.array_equal(fm.values, make_fm().values[[0, 3, 6]])
        assert fm.sample_rate_hz == 10.0
        assert fm.frame_stride == 3

    def test_identity(self):
        fm = make_fm()
        assert subsample(fm, 1) is fm

    def test_label_alignment(self):
        labels = [f"L{i}" for i in range(9)]
        fm = subsample(make_fm(T=9), 3)
        assert labels_at_rows(labels, fm) == ["L0", "L3", "L6"]

    def test_bad_factor(self):
        with pytest.raises(ValueError):
            subsample(make_fm(), 0)


class TestResolveSubset:
    def test_named_sizes(self):
        for name, size in [
            ("all", 32),
            ("no-pose", 18),
            ("no-velocity", 20),
            ("no-distance", 28),
        ]:
            _, kept = resolve_subset(name)
            assert len(kept) == size

    def test_no_velocity_drops_expected(self):
        _, kept = resolve_subset("no-velocity")
        dropped = sorted(set(range(1, 33)) - {i + 1 for i in kept})
        assert dropped == [8, 9, 10, 11, 12, 13, 22, 23, 24, 25, 26, 27]

    def test_no_distance_drops_tail(self):
        _, kept = resolve_subset("no-distance")
        assert max(kept) == 27  # 0-based; channels 29-32 gone

    def test_explicit_indices(self):
        name, kept = resolve_subset("3,1,2")
        assert kept == [0, 1, 2]
        assert name == "1,2,3"

    def test_explicit_list(self):
        _, kept = resolve_subset([32])
        assert kept == [31]

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            resolve_subset("0,5")
        with pytest.raises(ValueError):
            resolve_subset("33")

    def test_unknown_name(self):
        with pytest.raises(ValueError, match="unknown"):
            resolve_subset("everything")


def make_robot_demo(T=90, seed=0):
    """Synthetic 38-channel two-arm recording with valid rotation columns."""
    rng = np.random.default_rng(seed)
    t = np.arange(T) / 30.0
    arms = []
    for arm in range(2):
        pos = np.column_stack(
            [np.sin(2 * np.pi * 0.3 * t + arm + k) for k in range(3)]
        )
        rots = []
        for ti in t:
            angle = 0.5 * np.sin(2 * np.pi * 0.2 * ti + arm)
            rots.append(rodrigues([1.0, arm + 0.5, 0.3], angle).reshape(9))
        vel = np.column_stack(
            [np.cos(2 * np.pi * 0.4 * t + arm + k) for k in range(3)]
        )
        angvel = 0.1 * rng.normal(size=(T, 3))
        grip = np.sin(2 * np.pi * 0.1 * t + arm)[:, None]
        arms.append(np.hstack([pos, np.array(rots), vel, angvel, grip]))
    return Demonstration(
        id="robot", frames=np.hstack(arms), sample_rate_hz=30.0
    )


class TestBuildFeatures:
    def test_full_shape(self):
        fm = build_features(make_robot_demo())
        assert fm.n_channels == 32
        assert fm.n_frames == 30  # 90 frames / subsample 3
        assert fm.frame_stride == 3
        assert np.all(np.isfinite(fm.values))
        assert len(fm.channel_names) == 32

    def test_subset_shapes(self):
        demo = make_robot_demo()
        assert build_features(demo, "no-pose").n_channels == 18
        assert build_features(demo, "no-velocity").n_channels == 20
        assert build_features(demo, "no-distance").n_channels == 28

    def test_wrong_channel_count(self):
        demo = Demonstration(id="d", frames=np.ones((10, 4)), sample_rate_hz=30.0)
        with pytest.raises(ValueError, match="38"):
            build_features(demo)

    def test_column_wiring(self):
        # channel 1 must be the right arm's x position run through
        # filter -> zscore -> subsample in that order
        demo = make_robot_demo()
        fm = build_features(demo)
        expected = zscore(lowpass_filter(demo.frames[:, 0], 1.5, 30.0))[::3]
        assert np.array_equal(fm.values[:, 0], expected)

    def test_distances_from_raw_positions(self):
        demo = make_robot_demo()
        fm = build_features(demo)
        raw = distance_features(demo.frames[:, 0:3], demo.frames[:, 19:22])
        for j in range(4):
            expected = zscore(lowpass_filter(raw[:, j], 1.5, 30.0))[::3]
            assert np.array_equal(fm.values[:, 28 + j], expected)

    def test_quaternion_channels(self):
        demo = make_robot_demo()
        fm = build_features(demo)
        quats = np.array(
            [rotmat_to_quat(row[3:12].reshape(3, 3)) for row in demo.frames]
        )
        expected = zscore(lowpass_filter(quats[:, 0], 1.5, 30.0))[::3]
        assert np.array_equal(fm.values[:, 3], expected)

    def test_pipeline_order_trace(self, monkeypatch):
        calls = []

        real_filter, real_zscore, real_subsample = (
            pp.lowpass_filter,
            pp.zscore,
            pp.subsample,
        )

        def traced(name, real):
            def wrapper(*args, **kwargs):
                calls.append(name)
                return real(*args, **kwargs)

            return wrapper

        monkeypatch.setattr(pp, "lowpass_filter", traced("filter", real_filter))
        monkeypatch.setattr(pp, "zscore", traced("zscore", real_zscore))
        monkeypatch.setattr(pp, "subsample", traced("subsample", real_subsample))
        build_features(make_robot_demo())
        assert calls.index("zscore") > calls.index("filter")
        assert calls[-1] == "subsample"
        assert max(i for i, c in enumerate(calls) if c == "filter") < calls.index(
            "zscore"
        )

    def test_custom_cutoff_and_factor(self):
        fm = build_features(make_robot_demo(), fc_hz=3.0, subsample_factor=1)
        assert fm.n_frames == 90
        assert fm.frame_stride == 1


class TestRawFeatures:
    def test_passthrough(self):
        demo = Demonstration(
            id="d",
            frames=np.arange(12.0).reshape(6, 2),
            sample_rate_hz=10.0,
            channel_names=["a", "b"],
        )
        fm = raw_features(demo, subsample_factor=2)
        assert np.array_equal(fm.values, demo.frames[::2])
        assert fm.channel_names == ["a", "b"]
        assert fm.sample_rate_hz == 5.0


class TestAugment:
    def test_window_zero_identity(self):
        fm = make_fm(T=5)
        X = augment(fm, 0)
        assert np.array_equal(X.values, fm.values)
        assert X.window == 0

    def test_direct_construction(self):
        fm = make_fm(T=5, p=2)
        X = augment(fm, 2)
        assert X.values.shape == (3, 6)
        v = fm.values
        assert np.array_equal(X.values[0], np.concatenate([v[0], v[1], v[2]]))
        assert np.array_equal(X.values[2], np.concatenate([v[2], v[3], v[4]]))

    def test_three_block_layout(self):
        fm = FeatureMatrix(
            values=np.random.default_rng(7).normal(size=(40, 32)),
            sample_rate_hz=10.0,
        )
        X = augment(fm, 2)
        assert X.values.shape[1] == 96
        assert X.base_channels == 32

    def test_row_count_property(self):
        for w in range(4):
            fm = make_fm(T=9)
            assert augment(fm, w).n_rows + w == fm.n_frames

    def test_too_short(self):
        with pytest.raises(ValueError):
            augment(make_fm(T=3), 3)

    def test_carries_frame_bookkeeping(self):
        fm = subsample(make_fm(T=12), 3)
        X = augment(fm, 1)
        assert X.frame_stride == 3
        assert X.frame_index(2) == 6


class TestFrameAlignment:
    def test_labels_at_rows_on_augmented(self):
        labels = [f"L{i}" for i in range(12)]
        X = augment(subsample(make_fm(T=12), 3), 1)
        assert labels_at_rows(labels, X, X.n_rows) == ["L0", "L3", "L6"]

    def test_rows_to_frames_nearest_previous(self):
        X = augment(subsample(make_fm(T=12), 3), 1)
        out = rows_to_frames(["a", "b", "c"], X, 12)
        assert out == ["a", "a", "a", "b", "b", "b", "c", "c", "c", "c", "c", "c"]

    def test_rows_to_frames_empty(self):
        X = augment(make_fm(T=5), 1)
        with pytest.raises(ValueError):
            rows_to_frames([], X, 5)
