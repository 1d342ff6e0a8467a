"""Mechanism outputs and their JSON form."""

from dataclasses import dataclass, field
import json
import math

import numpy as np

FAIL = "FAIL"
ESTIMATE = "estimate"


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(u) for u in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(u) for k, u in v.items()}
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return v


@dataclass
class MechanismResult:
    """An estimate, or the FAIL outcome of the PTR test, plus audit data."""

    outcome: str
    estimate: np.ndarray = None
    level: int = None
    h_tilde: int = None
    params: dict = field(default_factory=dict)
    engine: str = None
    seed: int = None
    flags: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.outcome == FAIL:
            if self.estimate is not None:
                raise ValueError("a FAIL result carries no estimate")
        elif self.outcome == ESTIMATE:
            self.estimate = np.atleast_1d(np.asarray(self.estimate, dtype=float))
        else:
            raise ValueError(f"unknown outcome {self.outcome!r}")

    @property
    def failed(self):
        return self.outcome == FAIL

    def to_dict(self):
        return _jsonable({
            "outcome": self.outcome,
            "estimate": [] if self.estimate is None else self.estimate,
            "level": self.level,
            "h_tilde": self.h_tilde,
            "params": self.params,
            "engine": self.engine,
            "seed": self.seed,
            "flags": self.flags,
        })

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)
