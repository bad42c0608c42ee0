"""Marks, trails, evaporation, and the Jaccard similarity on toy data.

Walks through the core mechanics: a trapezoid mark deposited on a value axis,
the way repeated deposits beat evaporation while isolated deposits fade, and
how the overlap of two trails is scored.
"""

import numpy as np

from citytrails.stigspace import (
    ConeMark,
    Trail1D,
    Trail2D,
    TrapezoidMark,
    deposit_1d,
    deposit_2d,
    evaporate,
    jaccard,
)


def sparkline(cells, width=60):
    blocks = " .:-=+*#%@"
    step = max(1, len(cells) // width)
    peaks = [cells[i:i + step].max() for i in range(0, len(cells), step)]
    top = max(max(peaks), 1e-9)
    return "".join(blocks[min(int(9 * v / top), 9)] for v in peaks)


print("== a single mark, then pure evaporation ==")
trail = deposit_1d(Trail1D.empty(100), TrapezoidMark(center=0.5, intensity=1.0,
                                                     width=0.2))
for step in range(4):
    print(f"step {step}: |{sparkline(trail.cells)}| peak {trail.cells.max():.2f}")
    trail = evaporate(trail, 0.4)
print("the isolated mark is gone after ceil(1.0 / 0.4) = 3 steps\n")

print("== reinforcement beats evaporation ==")
trail = Trail1D.empty(100)
for step in range(12):
    trail = evaporate(deposit_1d(trail, TrapezoidMark(0.3, 1.0, 0.2)), 0.4)
print(f"after 12 reinforced steps the trail is stable: "
      f"|{sparkline(trail.cells)}| peak {trail.cells.max():.2f}\n")

print("== Jaccard similarity of two trails ==")
left = deposit_1d(Trail1D.empty(100), TrapezoidMark(0.3, 1.0, 0.25))
for center in (0.3, 0.4, 0.6, 0.9):
    other = deposit_1d(Trail1D.empty(100), TrapezoidMark(center, 1.0, 0.25))
    print(f"marks at 0.30 vs {center:.2f}: similarity {jaccard(left, other):.3f}")
print()

print("== a truncated cone on a 2-D grid ==")
grid = Trail2D.for_box(1000, 1000, cell_size=50)
grid = deposit_2d(grid, ConeMark(center=(500.0, 500.0), intensity=1.0,
                                 base_radius=150, top_radius=50))
row = grid.cells[10]
print("row through the center:", np.array2string(row, precision=2))
print(f"cells touched: {int((grid.cells > 0).sum())}, peak {grid.cells.max():.2f}")
