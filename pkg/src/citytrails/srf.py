"""Stigmergic receptive field: clump -> mark -> trail -> similarity -> activation.

An SRF measures the similarity of two sample streams. Each sample is clumped
by a double sigmoid onto the Low/Medium/High plateaus, deposited as a
unit-height trapezoid mark on the stream's own trail, and both trails
evaporate by a constant delta per step; the Jaccard coefficient of the two
trails is the raw per-step similarity, sharpened by an activation sigmoid.

The stepwise object API (``SrfState`` + ``step``) is the reference
implementation. ``pair_similarity`` runs the same pipeline vectorized over
many pairs (and over candidate parameter vectors during calibration); the
test suite pins the two paths to each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .stigspace import (
    DEFAULT_CELL_COUNT,
    DEFAULT_PLATEAU_FRACTION,
    Trail1D,
    TrapezoidMark,
    deposit_1d,
    evaporate,
    jaccard,
    trapezoid_profile,
)

PARAM_KEYS = ("alpha_c1", "beta_c1", "alpha_c2", "beta_c2",
              "epsilon", "delta", "alpha_a", "beta_a")

DEFAULT_WARMUP_FRACTION = 0.1
MARK_INTENSITY = 1.0  # trail magnitude is then governed by delta alone


def logistic(z):
    # clipped far in the saturated tails to keep exp() from overflowing
    return 1.0 / (1.0 + np.exp(-np.clip(z, -60.0, 60.0)))


@dataclass(frozen=True)
class SrfParams:
    """Full parameter vector of one receptive field."""

    alpha_c1: float
    beta_c1: float
    alpha_c2: float
    beta_c2: float
    epsilon: float
    delta: float
    alpha_a: float
    beta_a: float

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.delta < 0:
            raise ValueError("delta must be non-negative")
        for key in ("alpha_c1", "alpha_c2", "alpha_a"):
            if not getattr(self, key) > 0:
                raise ValueError(f"{key} must be positive")
        for key in ("beta_c1", "beta_c2", "beta_a"):
            if not 0 <= getattr(self, key) <= 1:
                raise ValueError(f"{key} must lie in [0, 1]")

    @classmethod
    def defaults(cls) -> "SrfParams":
        return cls(alpha_c1=30.0, beta_c1=1.0 / 3.0, alpha_c2=30.0, beta_c2=2.0 / 3.0,
                   epsilon=0.2, delta=0.1, alpha_a=20.0, beta_a=0.5)

    def to_vector(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in PARAM_KEYS])

    @classmethod
    def from_vector(cls, vec) -> "SrfParams":
        return cls(**{k: float(v) for k, v in zip(PARAM_KEYS, vec)})

    def to_block(self) -> dict[str, float]:
        return {k: float(getattr(self, k)) for k in PARAM_KEYS}


def clump(x, p: SrfParams):
    """Double-sigmoid clumping onto the Low/Medium/High plateaus {0, 0.5, 1}."""
    return 0.5 * (logistic(p.alpha_c1 * (np.asarray(x, dtype=float) - p.beta_c1))
                  + logistic(p.alpha_c2 * (np.asarray(x, dtype=float) - p.beta_c2)))


def activate(raw, p: SrfParams):
    """Activation sigmoid: damps insignificant similarities, boosts relevant ones."""
    return logistic(p.alpha_a * (np.asarray(raw, dtype=float) - p.beta_a))


@dataclass(frozen=True)
class SrfState:
    """Streaming state of one receptive field: the two trails plus a step count."""

    params: SrfParams
    trail_input: Trail1D
    trail_reference: Trail1D
    steps_processed: int = 0

    def __post_init__(self) -> None:
        if not self.trail_input.same_axis(self.trail_reference):
            raise ValueError("input and reference trails must share the axis")

    @classmethod
    def fresh(cls, params: SrfParams, cell_count: int = DEFAULT_CELL_COUNT) -> "SrfState":
        return cls(params, Trail1D.empty(cell_count), Trail1D.empty(cell_count))


def step(s: SrfState, x_input: float, x_reference: float) -> tuple[SrfState, float]:
    """Advance one sample on each stream; returns the new state and raw similarity."""
    p = s.params
    t_in = deposit_1d(s.trail_input, TrapezoidMark(float(clump(x_input, p)),
                                                   MARK_INTENSITY, p.epsilon))
    t_ref = deposit_1d(s.trail_reference, TrapezoidMark(float(clump(x_reference, p)),
                                                        MARK_INTENSITY, p.epsilon))
    t_in = evaporate(t_in, p.delta)
    t_ref = evaporate(t_ref, p.delta)
    state = SrfState(p, t_in, t_ref, s.steps_processed + 1)
    return state, jaccard(t_in, t_ref)


def default_warmup(length: int) -> int:
    return max(1, int(round(DEFAULT_WARMUP_FRACTION * length)))


@dataclass(frozen=True)
class PairSimilarity:
    """Activated per-step similarities past warmup, plus their mean."""

    activated: np.ndarray
    mean: float


def _param_columns(params, n_rows: int) -> list[np.ndarray]:
    """Per-row parameter columns of shape (n_rows, 1) in PARAM_KEYS order."""
    if isinstance(params, SrfParams):
        mat = np.tile(params.to_vector(), (n_rows, 1))
    else:
        mat = np.asarray(params, dtype=float)
        if mat.ndim == 1:
            mat = np.tile(mat, (n_rows, 1))
        if mat.shape != (n_rows, len(PARAM_KEYS)):
            raise ValueError(f"expected parameter matrix of shape ({n_rows}, 8)")
    return [mat[:, j:j + 1] for j in range(len(PARAM_KEYS))]


def pair_similarity(xa, xb, params, warmup: int | None = None, *,
                    cell_count: int = DEFAULT_CELL_COUNT,
                    axis_min: float = 0.0, axis_max: float = 1.0,
                    plateau_fraction: float = DEFAULT_PLATEAU_FRACTION,
                    return_streams: bool = False):
    """Vectorized SRF over a batch of stream pairs.

    ``xa`` and ``xb`` are (P, L) sample matrices (or a single pair of 1-D
    streams). ``params`` is one SrfParams shared by every row, or a (P, 8)
    matrix in PARAM_KEYS order for per-row parameters. Returns the (P,) mean
    activated similarity, plus the (P, L - warmup) activated streams when
    ``return_streams`` is set.
    """
    xa = np.atleast_2d(np.asarray(xa, dtype=float))
    xb = np.atleast_2d(np.asarray(xb, dtype=float))
    if xa.shape != xb.shape:
        raise ValueError("paired streams must have identical shapes")
    n_rows, length = xa.shape
    if warmup is None:
        warmup = default_warmup(length)
    if not 0 <= warmup < length:
        raise ValueError("warmup must be shorter than the streams")

    ac1, bc1, ac2, bc2, eps, delta, aa, ba = _param_columns(params, n_rows)
    # Both streams share one trail tensor: rows 0..P-1 carry the first stream,
    # rows P..2P-1 the second, which halves the per-step dispatch overhead.
    stacked = np.concatenate([xa, xb], axis=0)
    ac1_s, bc1_s, ac2_s, bc2_s = (np.concatenate([v, v]) for v in (ac1, bc1, ac2, bc2))
    clumped = 0.5 * (logistic(ac1_s * (stacked - bc1_s))
                     + logistic(ac2_s * (stacked - bc2_s)))

    cell_width = (axis_max - axis_min) / cell_count
    centers = axis_min + (np.arange(cell_count) + 0.5) * cell_width
    width2 = np.concatenate([eps[:, 0], eps[:, 0]])
    delta2 = np.concatenate([delta, delta])
    trails = np.zeros((2 * n_rows, cell_count))
    raw = np.empty((n_rows, length))
    for t in range(length):
        # marks carry MARK_INTENSITY == 1, so the profile is the deposit
        trails += trapezoid_profile(clumped[:, t], centers, width2, plateau_fraction)
        np.maximum(trails - delta2, 0.0, out=trails)
        # Jaccard via sum/|difference|: min = (s - d) / 2, max = (s + d) / 2.
        total = (trails[:n_rows] + trails[n_rows:]).sum(axis=1)
        gap = np.abs(trails[:n_rows] - trails[n_rows:]).sum(axis=1)
        denominator = total + gap
        raw[:, t] = np.where(
            denominator > 0.0,
            (total - gap) / np.where(denominator > 0.0, denominator, 1.0),
            1.0)

    activated = logistic(aa * (raw[:, warmup:] - ba))
    means = activated.mean(axis=1)
    if return_streams:
        return means, activated
    return means


def similarity_series(a, b, p: SrfParams, warmup: int | None = None) -> PairSimilarity:
    """SRF similarity of one series pair: activated stream past warmup and its mean.

    Accepts raw arrays or ActivityTimeSeries-like objects exposing ``samples``.
    """
    xa = np.asarray(getattr(a, "samples", a), dtype=float)
    xb = np.asarray(getattr(b, "samples", b), dtype=float)
    if xa.shape != xb.shape:
        raise ValueError("series lengths must match")
    means, streams = pair_similarity(xa, xb, p, warmup, return_streams=True)
    return PairSimilarity(streams[0], float(means[0]))
