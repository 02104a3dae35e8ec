"""Solutions (synchronized per-robot paths) and solver outcomes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .instance import canonical_json

SOLUTION_SCHEMA = "mrmp-solution/1"

OUTCOME_SOLVED = "SOLVED"
OUTCOME_TIMEOUT = "TIMEOUT"
OUTCOME_INIT_FAILURE = "INIT_FAILURE"
OUTCOME_UNSOLVABLE = "UNSOLVABLE"  # frozen-roadmap search exhausted


@dataclass
class Solution:
    """Per-robot vertex paths of common length T+1 on synchronized time."""

    instance_id: str
    solver: str
    paths: list  # N lists of (T+1) state vectors
    metrics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.paths = [[np.asarray(q, dtype=float) for q in path] for path in self.paths]

    @property
    def n_robots(self) -> int:
        return len(self.paths)

    @property
    def T(self) -> int:
        return len(self.paths[0]) - 1

    def to_json_dict(self) -> dict:
        return {
            "schema": SOLUTION_SCHEMA,
            "instance_id": self.instance_id,
            "solver": self.solver,
            "paths": [[[float(v) for v in q] for q in path] for path in self.paths],
            "T": self.T,
            "metrics": self.metrics,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: dict) -> "Solution":
        if data.get("schema") != SOLUTION_SCHEMA:
            raise ValueError(f"unsupported solution schema: {data.get('schema')!r}")
        return cls(
            instance_id=data["instance_id"],
            solver=data["solver"],
            paths=data["paths"],
            metrics=dict(data.get("metrics", {})),
        )

    @classmethod
    def load(cls, path) -> "Solution":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")


@dataclass
class SolveResult:
    outcome: str
    solution: Solution | None = None
    wall_time: float = 0.0
    stats: dict = field(default_factory=dict)
    roadmaps: list | None = None  # per-robot roadmaps (solvers that build them)

    @property
    def solved(self) -> bool:
        return self.outcome == OUTCOME_SOLVED
