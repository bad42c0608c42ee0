"""Train a small perceptron and read daily behavior as activity levels.

The two-phase calibration first narrows the evaporation interval with a
coarse sweep, then tunes every field against its own and neighboring
archetypes, and the trained stack turns any normalized day into a stream of
levels between 1 (asleep) and 7 (rush hour).
"""

import time

import numpy as np

from citytrails.calibrate import (
    DeConfig,
    ParamBounds,
    global_training,
    local_training,
)
from citytrails.perceptron import StigmergicPerceptron, transform
from citytrails.series import ActivityTimeSeries, all_archetypes, perturb
from citytrails.synth import archetype_training_sets

LENGTH = 96  # 15-minute resolution keeps this demo quick

start = time.time()
archetypes = all_archetypes(LENGTH)
sets = archetype_training_sets(LENGTH, per_class=6, noise=0.05, max_shift=3, seed=11)
de = DeConfig(population_size=12, generations=25, seed=5)

bounds = global_training(archetypes, sets, ParamBounds.coarse(), de)
lo, hi = bounds.intervals["delta"]
print(f"global phase: evaporation narrowed to [{lo:.3f}, {hi:.3f}] "
      f"({time.time() - start:.0f}s)")

sp, histories = local_training(StigmergicPerceptron.untrained(LENGTH), bounds,
                               de, sets)
print(f"local phase: 7 fields tuned ({time.time() - start:.0f}s)")
for name, history in histories.items():
    print(f"  {name:10s} fitness {history[0]:.3f} -> {history[-1]:.4f}")
print()

print("== pure archetypes map near their own enumeration ==")
for archetype in archetypes:
    levels = transform(sp, ActivityTimeSeries(archetype.samples))
    print(f"  {archetype.name:10s} (enum {archetype.enumeration}): "
          f"mean level {levels.levels.mean():.2f}")
print()

print("== a noisy, shifted rush-hour day still reads as rush hour ==")
noisy = perturb(archetypes[-1], noise_amplitude=0.08, max_shift=5, seed=99)
levels = transform(sp, noisy)
print(f"  mean level {levels.levels.mean():.2f}, "
      f"level range [{levels.levels.min():.2f}, {levels.levels.max():.2f}]")
