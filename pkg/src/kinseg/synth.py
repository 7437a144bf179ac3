"""Synthetic ground-truth generator: switched linear dynamics.

Trajectories evolve as x(t+1) = A_k x(t) + w(t), where the regime matrix
A_k switches according to a fixed schedule and w(t) is zero-mean Gaussian
noise. Noise is drawn as L z with L the Cholesky factor of the noise
covariance and z standard normals from a seeded PCG64 generator, so runs
are reproducible within a platform; cross-platform agreement is
statistical, not bit-exact.
"""

from dataclasses import dataclass, field

import numpy as np

from kinseg.ingest import Demonstration, Segment, Transcript

SPECTRAL_RADIUS_LIMIT = 1.05
DIVERGENCE_NORM = 1e6
DEFAULT_CONTRACTION = 0.95
MIN_REGIME_DISTANCE = 0.1
RESEED_BUDGET = 100


def regime_label(index: int) -> str:
    return f"R{index}"


@dataclass(frozen=True)
class SwitchedLds:
    """Regime matrices, process noise, and a segment schedule."""

    regimes: tuple[np.ndarray, ...]
    noise_cov: np.ndarray
    schedule: tuple[tuple[int, int], ...]  # (duration_frames, regime_index)
    x0: np.ndarray
    seed: int = 0
    sample_rate_hz: float = 30.0

    def __post_init__(self):
        regimes = tuple(np.asarray(A, dtype=float) for A in self.regimes)
        if not regimes:
            raise ValueError("need at least one regime matrix")
        p = regimes[0].shape[0]
        for A in regimes:
            if A.shape != (p, p):
                raise ValueError("all regime matrices must be p x p")
            radius = np.max(np.abs(np.linalg.eigvals(A)))
            if radius > SPECTRAL_RADIUS_LIMIT:
                raise ValueError(
                    f"regime spectral radius {radius:.3f} exceeds "
                    f"{SPECTRAL_RADIUS_LIMIT}"
                )
        noise_cov = np.asarray(self.noise_cov, dtype=float)
        if noise_cov.shape != (p, p):
            raise ValueError("noise_cov must be p x p")
        x0 = np.asarray(self.x0, dtype=float)
        if x0.shape != (p,):
            raise ValueError("x0 must be a length-p vector")
        for duration, index in self.schedule:
            if duration < 1:
                raise ValueError("schedule durations must be >= 1")
            if not 0 <= index < len(regimes):
                raise ValueError(f"regime index {index} out of range")
        object.__setattr__(self, "regimes", regimes)
        object.__setattr__(self, "noise_cov", noise_cov)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(
            self, "schedule", tuple((int(d), int(i)) for d, i in self.schedule)
        )

    @property
    def dim(self) -> int:
        return self.regimes[0].shape[0]

    @property
    def n_frames(self) -> int:
        return sum(d for d, _ in self.schedule)


def generate(model: SwitchedLds, *, id: str = "synthetic") -> tuple[Demonstration, list[str]]:
    """Roll the recurrence out; returns the trajectory and per-frame labels."""
    p = model.dim
    rng = np.random.default_rng(model.seed)
    if np.any(model.noise_cov):
        chol = np.linalg.cholesky(model.noise_cov)
    else:
        chol = None

    labels = []
    for duration, index in model.schedule:
        labels.extend([regime_label(index)] * duration)
    T = len(labels)

    frames = np.empty((T, p))
    frames[0] = model.x0
    for t in range(T - 1):
        A = model.regimes[_regime_at(model.schedule, t)]
        noise = chol @ rng.standard_normal(p) if chol is not None else 0.0
        frames[t + 1] = A @ frames[t] + noise
        if np.linalg.norm(frames[t + 1]) > DIVERGENCE_NORM:
            raise FloatingPointError(
                f"trajectory diverged at frame {t + 1} (norm > {DIVERGENCE_NORM:g})"
            )
    demo = Demonstration(
        id=id,
        frames=frames,
        sample_rate_hz=model.sample_rate_hz,
        channel_names=[f"s{i}" for i in range(p)],
    )
    return demo, labels


def _regime_at(schedule, t: int) -> int:
    offset = 0
    for duration, index in schedule:
        offset += duration
        if t < offset:
            return index
    raise IndexError(f"frame {t} beyond schedule")


def schedule_transcript(schedule) -> Transcript:
    """The schedule as 1-based inclusive segments."""
    segments = []
    start = 1
    for duration, index in schedule:
        segments.append(Segment(start, start + duration - 1, regime_label(index)))
        start += duration
    return Transcript(tuple(segments))


def make_random_regimes(
    n: int,
    p: int,
    seed: int,
    contraction: float = DEFAULT_CONTRACTION,
) -> list[np.ndarray]:
    """n random p x p matrices rescaled to the given spectral radius,
    pairwise at least 0.1 apart in Frobenius norm (rejection sampled)."""
    if not 0 < contraction <= 1:
        raise ValueError("contraction must lie in (0, 1]")
    if n < 1 or p < 1:
        raise ValueError("n and p must be >= 1")
    rng = np.random.default_rng(seed)
    regimes: list[np.ndarray] = []
    for _ in range(n):
        for _ in range(RESEED_BUDGET):
            A = rng.standard_normal((p, p))
            radius = np.max(np.abs(np.linalg.eigvals(A)))
            if radius == 0:
                continue
            A = A * (contraction / radius)
            if all(
                np.linalg.norm(A - B, ord="fro") >= MIN_REGIME_DISTANCE
                for B in regimes
            ):
                regimes.append(A)
                break
        else:
            raise RuntimeError(
                f"could not draw {n} distinct regimes in {RESEED_BUDGET} tries"
            )
    return regimes


def cycling_schedule(
    n_regimes: int, n_segments: int, segment_frames: int
) -> tuple[tuple[int, int], ...]:
    """Fixed-length segments cycling through the regimes in order."""
    return tuple((segment_frames, k % n_regimes) for k in range(n_segments))
