"""Grid bundle shared by the forward, backprojection and reconstruction operators."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .fields import BoundaryGrid, PolarGrid
from .geometry import RayQuadrature


@dataclass(frozen=True)
class Discretization:
    grid: PolarGrid = field(default_factory=PolarGrid)
    bgrid: BoundaryGrid = field(default_factory=BoundaryGrid)
    K: int = 16
    n_theta: int = 64
    quad: RayQuadrature = field(default_factory=RayQuadrature)
    P: int = 64
    N: int = 64
    interior_radius: float = 0.9

    def __post_init__(self):
        if self.K < 1:
            raise ValueError(f"Harmonic cutoff K must be positive, got {self.K}")
        if self.n_theta < 2 * self.K + 1:
            raise ValueError(f"n_theta={self.n_theta} cannot resolve K={self.K} "
                             f"(need >= {2 * self.K + 1})")
        if not 0.0 < self.interior_radius <= 1.0:
            raise ValueError(f"interior_radius must lie in (0, 1], got {self.interior_radius}")

    def refined(self, factor: int = 2) -> "Discretization":
        """Every resolution parameter scaled by factor (panel length divided by it)."""
        g, b = self.grid, self.bgrid
        return replace(
            self,
            grid=PolarGrid(g.n_rho * factor, g.n_beta * factor, g.radial_stencil),
            bgrid=BoundaryGrid(b.n_beta * factor, b.n_alpha * factor),
            K=self.K * factor,
            n_theta=self.n_theta * factor,
            quad=self.quad.refined(factor),
        )
