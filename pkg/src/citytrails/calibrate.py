"""Calibration: differential evolution, MSE fitness, two-phase field training.

All parameter search goes through one DE/rand/1/bin minimizer. Receptive
fields are trained in two phases: a global sweep narrows the evaporation
interval (the most sensitive parameter), then a local per-field DE run finds
the full parameter vector against labeled training couples. The same
minimizer also tunes the per-class anomaly-index thresholds.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass, field

import numpy as np

from .series import CLASS_LETTERS
from .srf import PARAM_KEYS, SrfParams, pair_similarity

COARSE_INTERVALS = {
    "alpha_c1": (1.0, 100.0),
    "beta_c1": (0.0, 1.0),
    "alpha_c2": (1.0, 100.0),
    "beta_c2": (0.0, 1.0),
    "epsilon": (0.01, 0.5),
    "delta": (1e-4, 1.0),
    "alpha_a": (1.0, 100.0),
    "beta_a": (0.0, 1.0),
}

# Domain constraints for the non-evaporation parameters, handed to the local
# phase: the clumping inflection points must bracket the Low/Medium/High
# boundaries (1/3 and 2/3), otherwise a field is free to collapse two levels
# it was never trained to separate; the mark width stays below the plateau
# spacing for the same reason.
DOMAIN_INTERVALS = {
    "beta_c1": (0.22, 0.45),
    "beta_c2": (0.55, 0.78),
    "epsilon": (0.01, 0.3),
}

DELTA_GRID_POINTS = 30


@dataclass(frozen=True)
class DeConfig:
    """Differential evolution hyperparameters (rand/1/bin)."""

    population_size: int = 30
    generations: int = 150
    differential_weight: float = 0.7
    crossover_rate: float = 0.9
    seed: int = 0

    def __post_init__(self) -> None:
        if self.population_size < 4:
            raise ValueError("population_size must be at least 4")
        if not 0 < self.differential_weight <= 2:
            raise ValueError("differential_weight must lie in (0, 2]")
        if not 0 <= self.crossover_rate <= 1:
            raise ValueError("crossover_rate must lie in [0, 1]")


@dataclass(frozen=True)
class ParamBounds:
    """(low, high) interval per receptive-field parameter."""

    intervals: dict[str, tuple[float, float]] = field(
        default_factory=lambda: dict(COARSE_INTERVALS))

    def __post_init__(self) -> None:
        missing = set(PARAM_KEYS) - set(self.intervals)
        if missing:
            raise ValueError(f"missing intervals for {sorted(missing)}")
        for key, (lo, hi) in self.intervals.items():
            if not lo < hi:
                raise ValueError(f"interval for {key} must satisfy low < high, "
                                 f"got ({lo}, {hi})")

    @classmethod
    def coarse(cls) -> "ParamBounds":
        return cls()

    def as_pairs(self) -> list[tuple[float, float]]:
        return [self.intervals[k] for k in PARAM_KEYS]

    def mid_params(self) -> SrfParams:
        return SrfParams(**{k: 0.5 * (lo + hi)
                            for k, (lo, hi) in self.intervals.items()})

    def with_interval(self, key: str, low: float, high: float) -> "ParamBounds":
        updated = dict(self.intervals)
        updated[key] = (float(low), float(high))
        return ParamBounds(updated)


@dataclass(frozen=True)
class TrainingPair:
    """A labeled couple: target similarity 1 for matching behavior, else 0."""

    series_a: np.ndarray
    series_b: np.ndarray
    target: float

    def __post_init__(self) -> None:
        if self.target not in (0.0, 1.0):
            raise ValueError("target similarity must be 0 or 1")
        a = np.asarray(getattr(self.series_a, "samples", self.series_a), dtype=float)
        b = np.asarray(getattr(self.series_b, "samples", self.series_b), dtype=float)
        if a.shape != b.shape:
            raise ValueError("paired series must have equal lengths")
        object.__setattr__(self, "series_a", a)
        object.__setattr__(self, "series_b", b)


def _stack_pairs(pairs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xa = np.stack([p.series_a for p in pairs])
    xb = np.stack([p.series_b for p in pairs])
    targets = np.array([p.target for p in pairs])
    return xa, xb, targets


def fitness(params: SrfParams, pairs, warmup: int | None = None) -> float:
    """Mean squared error between field similarities and pair targets."""
    if not pairs:
        raise ValueError("fitness needs at least one training pair")
    xa, xb, targets = _stack_pairs(pairs)
    sims = pair_similarity(xa, xb, params, warmup)
    return float(np.mean(np.abs(sims - targets) ** 2))


def population_fitness(param_matrix: np.ndarray, pairs,
                       warmup: int | None = None) -> np.ndarray:
    """Fitness of every candidate parameter vector, one engine pass."""
    param_matrix = np.atleast_2d(np.asarray(param_matrix, dtype=float))
    xa, xb, targets = _stack_pairs(pairs)
    n_candidates, n_pairs = param_matrix.shape[0], xa.shape[0]
    sims = pair_similarity(np.tile(xa, (n_candidates, 1)),
                           np.tile(xb, (n_candidates, 1)),
                           np.repeat(param_matrix, n_pairs, axis=0),
                           warmup)
    residuals = sims.reshape(n_candidates, n_pairs) - targets
    return np.mean(residuals ** 2, axis=1)


@dataclass(frozen=True)
class DeResult:
    best: np.ndarray
    fitness: float
    history: tuple[float, ...]  # best-so-far, entry 0 is the initial population


def de_minimize(objective, bounds, cfg: DeConfig, *, vectorized: bool = False) -> DeResult:
    """DE/rand/1/bin over a box: mutate a + F(b - c), binomial crossover with one
    forced coordinate, clamp to bounds, greedy selection.

    With ``vectorized`` the objective receives a (population, dim) matrix and
    returns a (population,) vector; both call styles produce identical runs
    for a given seed.
    """
    box = np.asarray([tuple(b) for b in bounds], dtype=float)
    if box.ndim != 2 or box.shape[1] != 2 or not np.all(box[:, 0] < box[:, 1]):
        raise ValueError("bounds must be (low, high) pairs with low < high")
    lo, hi = box[:, 0], box[:, 1]
    dim = box.shape[0]
    size = cfg.population_size
    rng = np.random.default_rng(cfg.seed)

    def evaluate(matrix: np.ndarray) -> np.ndarray:
        if vectorized:
            return np.asarray(objective(matrix), dtype=float)
        return np.array([float(objective(row)) for row in matrix])

    population = rng.uniform(lo, hi, size=(size, dim))
    energies = evaluate(population)
    history = [float(energies.min())]

    for _ in range(cfg.generations):
        trials = np.empty_like(population)
        for i in range(size):
            picks = rng.choice(size - 1, size=3, replace=False)
            picks[picks >= i] += 1
            a, b, c = population[picks]
            mutant = a + cfg.differential_weight * (b - c)
            cross = rng.random(dim) < cfg.crossover_rate
            cross[rng.integers(dim)] = True
            trials[i] = np.clip(np.where(cross, mutant, population[i]), lo, hi)
        trial_energies = evaluate(trials)
        improved = trial_energies <= energies
        population[improved] = trials[improved]
        energies[improved] = trial_energies[improved]
        history.append(float(energies.min()))

    best = int(np.argmin(energies))
    return DeResult(population[best].copy(), float(energies[best]), tuple(history))


def training_pairs_for_field(enumeration: int, sets_by_enum: dict[int, list],
                             reference: np.ndarray) -> list[TrainingPair]:
    """Labeled couples for one field: own-class signals target 1, signals from
    the enumeration neighbors target 0, balanced half and half."""
    own = sets_by_enum[enumeration]
    pairs = [TrainingPair(s, reference, 1.0) for s in own]
    neighbors = [e for e in (enumeration - 1, enumeration + 1) if e in sets_by_enum]
    budget = len(own)
    share = budget // len(neighbors)
    negatives: list = []
    for n in neighbors:
        negatives.extend(sets_by_enum[n][:share])
    for extra in sets_by_enum[neighbors[0]][share:]:
        if len(negatives) >= budget:
            break
        negatives.append(extra)
    pairs.extend(TrainingPair(s, reference, 0.0) for s in negatives)
    return pairs


def narrowest_quality_interval(values: np.ndarray, quality: np.ndarray,
                               percentile: float = 90.0) -> tuple[float, float]:
    """Narrowest interval of ``values`` covering the quality points ranking
    above the given percentile (the best decile by default)."""
    cutoff = np.quantile(quality, percentile / 100.0)
    chosen = np.asarray(values)[quality >= cutoff]
    return float(chosen.min()), float(chosen.max())


def global_training(archetypes, synthetic_sets: dict[str, list],
                    coarse_bounds: ParamBounds, cfg: DeConfig, *,
                    grid_points: int = DELTA_GRID_POINTS,
                    warmup: int | None = None) -> ParamBounds:
    """Sweep evaporation over a log grid for every field (other parameters at
    mid-bounds), pool the per-point quality, and narrow the evaporation
    interval to the best decile. Other intervals pass through unchanged."""
    lo, hi = coarse_bounds.intervals["delta"]
    deltas = np.geomspace(lo, hi, grid_points)
    mid = coarse_bounds.mid_params().to_vector()
    delta_col = PARAM_KEYS.index("delta")

    per_field = []
    for archetype in archetypes:
        pairs = training_pairs_for_field(
            archetype.enumeration,
            {a.enumeration: synthetic_sets[a.name] for a in archetypes},
            archetype.samples)
        pmat = np.tile(mid, (grid_points, 1))
        pmat[:, delta_col] = deltas
        per_field.append(population_fitness(pmat, pairs, warmup))
    # One fitness per grid point: the mean across fields, so a delta is only
    # good when every field can work with it (mirror-shaped archetypes are
    # what rules out the no-evaporation end).
    quality = -np.mean(per_field, axis=0)

    out = coarse_bounds
    for key, (lo_k, hi_k) in DOMAIN_INTERVALS.items():
        out = out.with_interval(key, lo_k, hi_k)
    if np.ptp(quality) < 1e-12:
        warnings.warn("evaporation sweep is flat; keeping the full coarse interval")
        return out
    d_lo, d_hi = narrowest_quality_interval(deltas, quality)
    if d_lo == d_hi:  # single grid point survived; widen to its neighbors
        idx = int(np.argmin(np.abs(deltas - d_lo)))
        d_lo = deltas[max(idx - 1, 0)]
        d_hi = deltas[min(idx + 1, grid_points - 1)]
    return out.with_interval("delta", d_lo, d_hi)


def local_training(sp, bounds: ParamBounds, cfg: DeConfig,
                   synthetic_sets: dict[str, list], *,
                   warmup: int | None = None):
    """Tune every field by DE against its own/adjacent training couples.

    Field runs are independent; each gets its own seed derived from the base
    seed and the field enumeration, so training order cannot matter. Returns
    the trained perceptron and the per-field best-so-far histories.
    """
    sets_by_enum = {a.enumeration: synthetic_sets[a.name] for a, _ in sp.fields}
    histories: dict[str, tuple[float, ...]] = {}
    trained = sp
    for archetype, _ in sp.fields:
        pairs = training_pairs_for_field(archetype.enumeration, sets_by_enum,
                                         archetype.samples)
        field_cfg = dataclasses.replace(cfg, seed=cfg.seed + archetype.enumeration)
        result = de_minimize(lambda m: population_fitness(m, pairs, warmup),
                             bounds.as_pairs(), field_cfg, vectorized=True)
        trained = trained.with_params(archetype.name, SrfParams.from_vector(result.best))
        histories[archetype.name] = result.history
    return trained, histories


def pattern_training_pairs(level_sets_by_class: dict[str, list]) -> list[TrainingPair]:
    """Couples over the pooled pattern set: same class targets 1, else 0.

    Level series are rescaled by 1/7 so the clumping axis matches [0, 1].
    Unordered couples including self-matches; similarity is symmetric, so the
    ordered duplicates would only repeat work.
    """
    pool = [(letter, np.asarray(s.levels, dtype=float) / 7.0)
            for letter in CLASS_LETTERS for s in level_sets_by_class[letter]]
    pairs = []
    for i, (ci, si) in enumerate(pool):
        for cj, sj in pool[i:]:
            pairs.append(TrainingPair(si, sj, 1.0 if ci == cj else 0.0))
    return pairs


def train_pattern_field(level_sets_by_class: dict[str, list], bounds: ParamBounds,
                        cfg: DeConfig, *, warmup: int | None = None):
    """Train the pattern-level field that compares whole activity-level days."""
    pairs = pattern_training_pairs(level_sets_by_class)
    result = de_minimize(lambda m: population_fitness(m, pairs, warmup),
                         bounds.as_pairs(), cfg, vectorized=True)
    return SrfParams.from_vector(result.best), result.history


@dataclass(frozen=True)
class ThresholdResult:
    thresholds: dict[str, float]
    accuracy: float
    history: tuple[float, ...]


def tune_thresholds(entries, cfg: DeConfig) -> ThresholdResult:
    """Per-class anomaly-index thresholds maximizing correct classification.

    ``entries`` holds (class_letter, anomaly_index, is_anomaly) per day; a day
    is called anomalous iff its index exceeds its class threshold.
    """
    entries = list(entries)
    class_idx = np.array([CLASS_LETTERS.index(c) for c, _, _ in entries])
    present = set(class_idx.tolist())
    missing = [CLASS_LETTERS[i] for i in range(len(CLASS_LETTERS)) if i not in present]
    if missing:
        raise ValueError(f"no example days for class(es) {missing}")
    indices = np.array([v for _, v, _ in entries], dtype=float)
    flags = np.array([bool(f) for _, _, f in entries])
    # Search the unit box scaled onto the observed index range; accuracy is
    # piecewise constant, and a gap much narrower than the box is otherwise
    # easy for the search to miss.
    scale = max(float(indices.max()), 1e-12)

    def objective(matrix: np.ndarray) -> np.ndarray:
        predicted = indices[None, :] > scale * matrix[:, class_idx]
        return 1.0 - (predicted == flags).mean(axis=1)

    result = de_minimize(objective, [(0.0, 1.0)] * len(CLASS_LETTERS), cfg,
                         vectorized=True)
    thresholds = {letter: float(scale * v)
                  for letter, v in zip(CLASS_LETTERS, result.best)}
    return ThresholdResult(thresholds, 1.0 - result.fitness, result.history)
