"""Kinematic feature pipeline: quaternions, filtering, normalization,
distance signals, subsampling, and sliding-window state augmentation.

The full pipeline turns a 38-channel two-arm recording into a 32-channel
feature matrix (per arm: position, orientation quaternion, linear and
angular velocity, gripper angle; plus four inter-arm distance signals),
low-pass filtered, z-scored per channel, and subsampled. Feature rows keep
their position in the original frame grid via (frame_origin, frame_stride)
so per-frame labels can be aligned with any downstream matrix.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal as _signal

from kinseg.ingest import Demonstration

FILTER_ORDER = 2
DEFAULT_CUTOFF_HZ = 1.5
DEFAULT_SUBSAMPLE = 3

_ARM_FEATURES = (
    ["pos_x", "pos_y", "pos_z"]
    + ["quat_w", "quat_x", "quat_y", "quat_z"]
    + ["vel_x", "vel_y", "vel_z"]
    + ["angvel_x", "angvel_y", "angvel_z"]
    + ["gripper"]
)

FULL_CHANNEL_NAMES = (
    [f"right_{v}" for v in _ARM_FEATURES]
    + [f"left_{v}" for v in _ARM_FEATURES]
    + ["dist_x", "dist_y", "dist_z", "dist"]
)

# 1-based channel index groups of the full 32-channel feature vector.
POSE_INDICES = list(range(1, 8)) + list(range(15, 22))
VELOCITY_INDICES = list(range(8, 14)) + list(range(22, 28))
DISTANCE_INDICES = list(range(29, 33))

NAMED_SUBSETS = {
    "all": [],
    "no-pose": POSE_INDICES,
    "no-velocity": VELOCITY_INDICES,
    "no-distance": DISTANCE_INDICES,
}


@dataclass(frozen=True)
class FeatureMatrix:
    """Preprocessed trajectory; row i sits at original frame
    frame_origin + i * frame_stride."""

    values: np.ndarray  # T x p
    sample_rate_hz: float
    channel_names: list[str] = field(default_factory=list)
    frame_origin: int = 0
    frame_stride: int = 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a T x p matrix")
        if not np.all(np.isfinite(values)):
            raise ValueError("values contain non-finite entries")
        object.__setattr__(self, "values", values)

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    @property
    def n_channels(self) -> int:
        return self.values.shape[1]

    def frame_index(self, row: int) -> int:
        """Original-grid frame index of a feature row."""
        return self.frame_origin + row * self.frame_stride


@dataclass(frozen=True)
class AugmentedMatrix:
    """Window-augmented states: row t = [x(t), x(t+1), ..., x(t+W)]."""

    values: np.ndarray  # (T - W) x p*(W+1)
    window: int
    base_channels: int
    frame_origin: int = 0
    frame_stride: int = 1

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    def frame_index(self, row: int) -> int:
        return self.frame_origin + row * self.frame_stride


def rotmat_to_quat(R: np.ndarray) -> np.ndarray:
    """Convert a proper rotation matrix to a unit quaternion (w, x, y, z).

    Uses the largest-pivot construction for numerical robustness; the sign
    is canonicalized so w >= 0. Raises ValueError if R is not orthonormal
    with positive determinant within 1e-6.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError("R must be 3x3")
    err = np.max(np.abs(R.T @ R - np.eye(3)))
    if err > 1e-6:
        raise ValueError(f"matrix is not orthonormal (deviation {err:.2e})")
    if np.linalg.det(R) < 0:
        raise ValueError("matrix is a reflection, not a rotation")

    t = np.trace(R)
    # Candidate squared magnitudes 4*q_i^2 for (w, x, y, z).
    cand = np.array(
        [
            1.0 + t,
            1.0 + R[0, 0] - R[1, 1] - R[2, 2],
            1.0 - R[0, 0] + R[1, 1] - R[2, 2],
            1.0 - R[0, 0] - R[1, 1] + R[2, 2],
        ]
    )
    i = int(np.argmax(cand))
    s = 2.0 * np.sqrt(max(cand[i], 0.0))
    if i == 0:
        q = np.array(
            [
                s / 4.0,
                (R[2, 1] - R[1, 2]) / s,
                (R[0, 2] - R[2, 0]) / s,
                (R[1, 0] - R[0, 1]) / s,
            ]
        )
    elif i == 1:
        q = np.array(
            [
                (R[2, 1] - R[1, 2]) / s,
                s / 4.0,
                (R[0, 1] + R[1, 0]) / s,
                (R[0, 2] + R[2, 0]) / s,
            ]
        )
    elif i == 2:
        q = np.array(
            [
                (R[0, 2] - R[2, 0]) / s,
                (R[0, 1] + R[1, 0]) / s,
                s / 4.0,
                (R[1, 2] + R[2, 1]) / s,
            ]
        )
    else:
        q = np.array(
            [
                (R[1, 0] - R[0, 1]) / s,
                (R[0, 2] + R[2, 0]) / s,
                (R[1, 2] + R[2, 1]) / s,
                s / 4.0,
            ]
        )
    q /= np.linalg.norm(q)
    if q[0] < 0:
        q = -q
    return q


def quat_to_rotmat(q: np.ndarray) -> np.ndarray:
    """Rotation matrix of a quaternion (w, x, y, z); q is normalized first."""
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise ValueError("q must have 4 components")
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def lowpass_filter(signal: np.ndarray, fc_hz: float, fs_hz: float) -> np.ndarray:
    """Zero-phase low-pass: 2nd-order Butterworth applied forward-backward.

    The section is designed by bilinear transform with prewarping; the net
    magnitude response is the square of the single-pass response. Edges are
    handled by reflective padding of 3x the filter order, cropped after the
    backward pass.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1:
        raise ValueError("signal must be 1-D")
    if x.size < 4:
        raise ValueError("signal too short to filter (need length >= 4)")
    if not 0 < fc_hz < fs_hz / 2:
        raise ValueError(
            f"cutoff {fc_hz} Hz must lie in (0, Nyquist={fs_hz / 2} Hz)"
        )
    b, a = _signal.butter(FILTER_ORDER, fc_hz, btype="low", fs=fs_hz)
    padlen = min(3 * FILTER_ORDER, x.size - 1)
    return _signal.filtfilt(b, a, x, padtype="even", padlen=padlen)


def zscore(signal: np.ndarray) -> np.ndarray:
    """Normalize to zero mean, unit variance; constant input maps to zeros."""
    x = np.asarray(signal, dtype=float)
    if x.size < 2:
        raise ValueError("need at least 2 samples")
    sd = x.std()
    if sd == 0:
        return np.zeros_like(x)
    return (x - x.mean()) / sd


def distance_features(pos_right: np.ndarray, pos_left: np.ndarray) -> np.ndarray:
    """Per-frame inter-arm distances (d_x, d_y, d_z, d), right minus left."""
    pr = np.asarray(pos_right, dtype=float)
    pl = np.asarray(pos_left, dtype=float)
    if pr.shape != pl.shape or pr.ndim != 2 or pr.shape[1] != 3:
        raise ValueError("positions must be matching T x 3 matrices")
    diff = pr - pl
    d = np.linalg.norm(diff, axis=1, keepdims=True)
    return np.hstack([diff, d])


def subsample(fm: FeatureMatrix, factor: int) -> FeatureMatrix:
    """Keep rows 0, factor, 2*factor, ...; rate and stride adjust with it."""
    if factor < 1:
        raise ValueError("factor must be >= 1")
    if factor == 1:
        return fm
    return replace(
        fm,
        values=fm.values[::factor],
        sample_rate_hz=fm.sample_rate_hz / factor,
        frame_stride=fm.frame_stride * factor,
    )


def resolve_subset(subset) -> tuple[str, list[int]]:
    """Resolve a feature subset to (name, kept 0-based indices of the 32).

    Accepts a named subset ("all", "no-pose", "no-velocity", "no-distance"),
    a comma-separated string of 1-based indices to keep, or an iterable of
    1-based indices.
    """
    if isinstance(subset, str):
        name = subset.strip()
        if name in NAMED_SUBSETS:
            dropped = set(NAMED_SUBSETS[name])
            return name, [i for i in range(32) if i + 1 not in dropped]
        try:
            keep = sorted({int(tok) for tok in name.split(",")})
        except ValueError:
            raise ValueError(f"unknown feature subset {subset!r}") from None
    else:
        keep = sorted({int(i) for i in subset})
    if not keep or keep[0] < 1 or keep[-1] > 32:
        raise ValueError("explicit feature indices must lie in 1..32")
    return ",".join(str(i) for i in keep), [i - 1 for i in keep]


def _arm_features(arm: np.ndarray) -> np.ndarray:
    """19 raw per-arm channels -> 14 (rotation matrix becomes a quaternion)."""
    quats = np.array([rotmat_to_quat(row[3:12].reshape(3, 3)) for row in arm])
    return np.hstack([arm[:, 0:3], quats, arm[:, 12:19]])


def build_features(
    demo: Demonstration,
    subset="all",
    *,
    fc_hz: float = DEFAULT_CUTOFF_HZ,
    subsample_factor: int = DEFAULT_SUBSAMPLE,
) -> FeatureMatrix:
    """Run the fixed preprocessing pipeline on a 38-channel demonstration.

    Order: quaternion conversion, distance channels (from unnormalized
    positions), low-pass filter, z-score, subsample, then subset masking.
    """
    if demo.n_channels != 38:
        raise ValueError(
            f"expected the 38 patient-side channels, got {demo.n_channels}"
        )
    right, left = demo.frames[:, :19], demo.frames[:, 19:]
    values = np.hstack(
        [
            _arm_features(right),
            _arm_features(left),
            distance_features(right[:, 0:3], left[:, 0:3]),
        ]
    )
    values = np.column_stack(
        [lowpass_filter(values[:, c], fc_hz, demo.sample_rate_hz) for c in range(32)]
    )
    values = np.column_stack([zscore(values[:, c]) for c in range(32)])
    fm = FeatureMatrix(
        values=values,
        sample_rate_hz=demo.sample_rate_hz,
        channel_names=list(FULL_CHANNEL_NAMES),
    )
    fm = subsample(fm, subsample_factor)
    _, kept = resolve_subset(subset)
    if len(kept) == 32:
        return fm
    return replace(
        fm,
        values=fm.values[:, kept],
        channel_names=[fm.channel_names[i] for i in kept],
    )


def raw_features(demo: Demonstration, *, subsample_factor: int = 1) -> FeatureMatrix:
    """Use a demonstration's columns directly as features (generic data)."""
    fm = FeatureMatrix(
        values=demo.frames,
        sample_rate_hz=demo.sample_rate_hz,
        channel_names=list(demo.channel_names),
    )
    return subsample(fm, subsample_factor)


def augment(fm: FeatureMatrix, window: int) -> AugmentedMatrix:
    """Stack W+1 consecutive frames: row t = [x(t), ..., x(t+W)].

    The label of augmented row t is the label of frame t.
    """
    if window < 0:
        raise ValueError("window must be >= 0")
    T = fm.n_frames
    if T <= window:
        raise ValueError(f"need more than {window} frames, got {T}")
    blocks = [fm.values[w : T - window + w] for w in range(window + 1)]
    return AugmentedMatrix(
        values=np.hstack(blocks),
        window=window,
        base_channels=fm.n_channels,
        frame_origin=fm.frame_origin,
        frame_stride=fm.frame_stride,
    )


def labels_at_rows(frame_labels, fm: FeatureMatrix, n_rows: int | None = None) -> list:
    """Pick the original-grid labels that align with feature/augmented rows."""
    count = fm.n_frames if n_rows is None else n_rows
    return [frame_labels[fm.frame_index(i)] for i in range(count)]


def rows_to_frames(row_labels, X: AugmentedMatrix, n_frames: int) -> list:
    """Project per-row labels back onto the original frame grid.

    Nearest-previous rule: frame f takes the label of the last row whose
    anchor frame does not exceed f; frames before the first anchor take the
    first row's label.
    """
    n_rows = len(row_labels)
    if n_rows == 0:
        raise ValueError("no row labels to project")
    out = []
    for f in range(n_frames):
        i = (f - X.frame_origin) // X.frame_stride
        out.append(row_labels[min(max(i, 0), n_rows - 1)])
    return out
