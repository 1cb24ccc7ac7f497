"""Seeded random BV initial states for the verification suites."""

from __future__ import annotations

import numpy as np

from .core import GridSpec, StateSnapshot

SUITE_N = 200
SUITE_STEPS = 40


def random_bv_state(seed: int, N: int = SUITE_N, max_pieces: int = 12, margin: int | None = None,
                    x_min: float = -1.0, x_max: float = 1.0) -> StateSnapshot:
    """Piecewise-constant data in [-1, 1] on the middle half of the grid.

    At most ``max_pieces`` constant pieces of width >= 3 cells, so at most
    that many extrema; zero margins of ``N // 4`` cells keep the outer cells
    quiet for roughly ``margin`` steps.
    """
    rng = np.random.default_rng(seed)
    margin = N // 4 if margin is None else margin
    inner = N - 2 * margin
    pieces = int(rng.integers(2, max_pieces + 1))
    cuts = np.sort(rng.choice(np.arange(3, inner - 2), pieces - 1, replace=False))
    edges = np.concatenate([[0], cuts, [inner]])
    # reject pieces narrower than 3 cells by merging them into the previous one
    keep = [0]
    for e in edges[1:-1]:
        if e - keep[-1] >= 3 and inner - e >= 3:
            keep.append(int(e))
    edges = np.array(keep + [inner])
    values = rng.uniform(-1.0, 1.0, len(edges) - 1)
    u = np.zeros(N)
    for a, b, val in zip(edges[:-1], edges[1:], values):
        u[margin + a : margin + b] = val
    return StateSnapshot(0, u, GridSpec.uniform(N, x_min, x_max))
