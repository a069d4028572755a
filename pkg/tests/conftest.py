import numpy as np
import pytest

from flowlab import ambient
from flowlab.hypersurface import GraphState, SpatialGrid


def band_limited(grid: SpatialGrid, amp: float, kmax: int, seed: int) -> np.ndarray:
    """Reproducible band-limited torus field, normalized to peak `amp`."""
    rng = np.random.default_rng(seed)
    x = grid.coordinates()
    out = np.zeros(grid.shape)
    ranges = [range(-kmax, kmax + 1)] * grid.n
    for kvec in np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, grid.n):
        if not kvec.any():
            continue
        w = rng.normal() / (1.0 + float(kvec @ kvec))
        phase = rng.uniform(0, 2 * np.pi)
        out += w * np.cos(
            2 * np.pi * np.einsum("...k,k->...", x, kvec.astype(float)) / grid.period
            + phase
        )
    peak = np.abs(out).max()
    return amp * out / peak if peak > 0 else out


@pytest.fixture
def ds_graph_factory():
    """Band-limited admissible graphs in the contracting de Sitter chart."""
    model = ambient.de_sitter_conformal(2)

    def make(N, amp=0.02, seed=7, u0=1.0):
        grid = SpatialGrid(2, N, 2 * np.pi)
        u = u0 + band_limited(grid, amp, 2, seed)
        return model, GraphState(grid, u)

    return make
