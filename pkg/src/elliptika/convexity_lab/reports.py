from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


def jsonable(x):
    """Plain Python types for json; non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    return x


@dataclass(frozen=True)
class Verdict:
    satisfied: bool
    worst_value: float
    worst_location: Any
    tolerance: float

    def to_dict(self):
        return jsonable({"satisfied": self.satisfied, "worst_value": self.worst_value,
                         "worst_location": self.worst_location, "tolerance": self.tolerance})


@dataclass(frozen=True)
class ConvexityReport:
    check: str
    verdicts: dict
    details: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return all(v.satisfied for v in self.verdicts.values())

    @property
    def verdict(self) -> Verdict:
        """The single verdict when there is only one."""
        return next(iter(self.verdicts.values()))

    def to_dict(self):
        return jsonable({"check": self.check, "satisfied": self.satisfied,
                         "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()},
                         "details": self.details})


def grid_verdict(residual, grid, tol):
    residual = np.asarray(residual, dtype=float)
    i = int(np.argmin(residual))
    return Verdict(bool(residual[i] >= -tol), float(residual[i]), float(np.asarray(grid)[i]), tol)
