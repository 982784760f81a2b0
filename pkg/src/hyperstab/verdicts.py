"""Verdict record shared by the univariate and multivariate engines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

CERTIFIED = "certified_hyperstable"
FALSIFIED = "falsified"
STABLE_ONLY = "stable_only"
NOT_STABLE = "not_stable"
UNKNOWN = "unknown"
STATUSES = (CERTIFIED, FALSIFIED, STABLE_ONLY, NOT_STABLE, UNKNOWN)

METHODS = (
    "NumericalRange", "PencilForm", "BlockTriangular",
    "Poly2(a)", "Poly2(b)", "Poly2(c)", "Poly3(a)", "Poly3(b)", "Poly3(c)",
    "HalfPlaneStructured", "DirectionalSearch", "Structured", "Polarisation",
)

EXIT_CODES = {CERTIFIED: 0, FALSIFIED: 2, NOT_STABLE: 2, STABLE_ONLY: 3, UNKNOWN: 3}


def _jsonable(v: Any) -> Any:
    if isinstance(v, (complex, np.complexfloating)):
        return [float(v.real), float(v.imag)]
    if isinstance(v, np.ndarray):
        if np.iscomplexobj(v):
            return [_jsonable(complex(t)) for t in v.ravel()] if v.ndim <= 1 else [_jsonable(r) for r in v]
        return v.tolist()
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, dict):
        return {str(k): _jsonable(w) for k, w in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(w) for w in v]
    if hasattr(v, "to_json"):
        return v.to_json()
    return v


@dataclass(frozen=True)
class HyperVerdict:
    """Outcome of a hyperstability query.

    ``x`` is the falsifying direction for ``falsified``; ``mu`` the
    eigenvalue inside the region for ``not_stable``.
    """

    status: str
    method: str | None = None
    x: np.ndarray | None = None
    mu: Any = None
    evidence: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")

    @property
    def certified(self) -> bool:
        return self.status == CERTIFIED

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"status": self.status}
        if self.method is not None:
            out["method"] = self.method
        if self.x is not None:
            out["x"] = _jsonable(np.asarray(self.x, dtype=complex))
        if self.mu is not None:
            out["mu"] = _jsonable(self.mu)
        out["evidence"] = _jsonable(self.evidence)
        return out
