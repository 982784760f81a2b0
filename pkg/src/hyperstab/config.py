"""Search budgets, tolerances and analysis configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Any


@dataclass(frozen=True)
class Budget:
    x_samples: int = 64          # directions tried by the directional search
    y_starts: int = 32           # multistarts for certificate search when rank >= 3
    det_min_starts: int = 32     # multistarts for |det| minimization
    sphere_grid: int = 4096      # Riemann-sphere grid for rank-2 certificate search
    boundary_grid: int = 256     # boundary samples for grid checks
    nr_restarts: int = 32        # restarts for numerical-range intersection search
    radius_levels: int = 7       # compact exhaustion radii 2^0 .. 2^(levels-1)

    def with_x_samples(self, k: int) -> "Budget":
        return replace(self, x_samples=int(k))


@dataclass(frozen=True)
class Tolerances:
    tau_bnd: float = 1e-9
    tau_rank: float = 1e-10
    tau_det: float = 1e-10
    tol: float = 1e-10

    def __post_init__(self):
        for k, v in asdict(self).items():
            if not v > 0:
                raise ValueError(f"tolerance {k} must be positive")


@dataclass(frozen=True)
class AnalysisConfig:
    seed: int = 0
    budget: Budget = field(default_factory=Budget)
    tolerances: Tolerances = field(default_factory=Tolerances)
    pretty: bool = True

    def to_json(self) -> dict[str, Any]:
        return {"seed": self.seed, "budget": asdict(self.budget),
                "tolerances": asdict(self.tolerances)}


DEFAULT_BUDGET = Budget()
DEFAULT_TOLERANCES = Tolerances()
