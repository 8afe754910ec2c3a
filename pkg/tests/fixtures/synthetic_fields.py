"""
Synthetic grid fields for tests.

Seeded so every test sees the same data on every run.
"""

from typing import List

import numpy as np

from spde_engine.models.grid import ScalarField, TorusGrid
from spde_engine.models.problem import InitialProfile


def random_field(grid: TorusGrid, seed: int = 0, scale: float = 1.0) -> ScalarField:
    """I.i.d. standard normal cell values."""
    rng = np.random.default_rng(seed)
    return ScalarField(grid, scale * rng.standard_normal(grid.shape))


def step_field(grid: TorusGrid, left: float = 1.0, right: float = 0.0, position: float = 0.5) -> ScalarField:
    """left on x1 < position, right elsewhere."""
    x1 = grid.coordinates()[0]
    return ScalarField(grid, np.where(x1 < position, left, right))


def sine_field(grid: TorusGrid, amplitude: float = 1.0, frequency: int = 1) -> ScalarField:
    return InitialProfile("sine", {"amplitude": amplitude, "frequency": frequency}).field(grid)


def smooth_corpus(grid: TorusGrid, size: int = 8, seed: int = 0) -> List[ScalarField]:
    """Random Fourier fields with decaying spectra, one seed per member."""
    return [
        InitialProfile("random-fourier", {"seed": seed + i, "modes": 6, "decay": 1.5}).field(grid)
        for i in range(size)
    ]


def field_pairs(grid: TorusGrid, count: int, seed: int = 0, scale: float = 1.0) -> List[tuple]:
    rng = np.random.default_rng(seed)
    return [
        (
            ScalarField(grid, scale * rng.uniform(-1.0, 1.0, grid.shape)),
            ScalarField(grid, scale * rng.uniform(-1.0, 1.0, grid.shape)),
        )
        for _ in range(count)
    ]
