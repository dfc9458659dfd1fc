"""Graded temporal meshes and uniform spatial partitions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GradedMesh",
    "SpatialPartition",
    "make_graded_mesh",
    "sigma_star",
    "sigma_star_star",
]


@dataclass(frozen=True)
class GradedMesh:
    """Temporal nodes ``t_j = (j / J)^sigma T``, ``j = 0, ..., J``.

    ``widths[j - 1]`` is the width of slab ``I_j = (t_{j-1}, t_j)``; slabs are
    indexed from 1 throughout the package.
    """

    T: float
    J: int
    sigma: float
    nodes: np.ndarray = field(repr=False)
    widths: np.ndarray = field(repr=False)

    @property
    def tau(self) -> float:
        """Width of the last (largest) slab."""
        return float(self.widths[-1])

    @property
    def is_uniform(self) -> bool:
        return self.sigma == 1.0

    def slab(self, j: int) -> tuple[float, float]:
        self.check_slab(j)
        return float(self.nodes[j - 1]), float(self.nodes[j])

    def width(self, j: int) -> float:
        self.check_slab(j)
        return float(self.widths[j - 1])

    def check_slab(self, j: int) -> None:
        if not (1 <= j <= self.J):
            raise IndexError(f"slab index {j} outside [1, {self.J}]")

    def locate(self, t: float) -> int:
        """Slab index containing *t*; node ``t_j`` belongs to slab ``j``."""
        if not (0.0 <= t <= self.T):
            raise ValueError(f"time {t} outside [0, {self.T}]")
        j = int(np.searchsorted(self.nodes, t, side="left"))
        return max(j, 1)


def make_graded_mesh(T: float, J: int, sigma: float = 1.0) -> GradedMesh:
    if not T > 0:
        raise ValueError(f"final time must be positive, got T={T}")
    if int(J) != J or J < 1:
        raise ValueError(f"slab count must be a positive integer, got J={J}")
    if not sigma >= 1.0:
        raise ValueError(f"grading exponent must be >= 1, got sigma={sigma}")
    J = int(J)
    T = float(T)
    sigma = float(sigma)

    nodes = (np.arange(J + 1) / J) ** sigma * T
    nodes[0] = 0.0
    nodes[-1] = T
    widths = np.diff(nodes)
    nodes.setflags(write=False)
    widths.setflags(write=False)
    return GradedMesh(T=T, J=J, sigma=sigma, nodes=nodes, widths=widths)


def _check_exponent(r: float, beta: float) -> None:
    if not 2.0 * r + 1.0 - beta > 0.0:
        raise ValueError(f"need r > (beta - 1) / 2, got r={r}, beta={beta}")


def sigma_star(m: int, r: float, beta: float) -> float:
    """Grading exponent at which the proven rate ``m + 1 - beta / 2`` is reached."""
    _check_exponent(r, beta)
    return (2.0 * m + 2.0 - beta) / (2.0 * r + 1.0 - beta)


def sigma_star_star(m: int, r: float, beta: float) -> float:
    """Grading exponent at which the optimal rate ``m + 1`` is observed."""
    _check_exponent(r, beta)
    return (2.0 * m + 2.0) / (2.0 * r + 1.0 - beta)


@dataclass(frozen=True)
class SpatialPartition:
    a: float = 0.0
    b: float = 1.0
    cells: int = 32

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValueError(f"empty domain ({self.a}, {self.b})")
        if int(self.cells) != self.cells or self.cells < 2:
            raise ValueError(f"need at least 2 cells, got {self.cells}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.cells

    @property
    def vertices(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.cells + 1)
