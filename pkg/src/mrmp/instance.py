"""Problem instances and their JSON schema (mrmp-instance/1)."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .geometry import SphereObstacle
from .robots import RobotModel

INSTANCE_SCHEMA = "mrmp-instance/1"


@dataclass
class Instance:
    scenario: str
    models: list
    starts: list
    goals: list
    obstacles: list
    seed: int = 0
    id: str = ""

    def __post_init__(self):
        if not self.id:
            self.id = f"{self.scenario}-{self.seed}"
        self.starts = [np.asarray(q, dtype=float) for q in self.starts]
        self.goals = [np.asarray(q, dtype=float) for q in self.goals]

    @property
    def n_robots(self) -> int:
        return len(self.models)

    def to_json_dict(self) -> dict:
        robots = []
        for model, start, goal in zip(self.models, self.starts, self.goals):
            row = model.to_params()
            row["start"] = [float(v) for v in start]
            row["goal"] = [float(v) for v in goal]
            robots.append(row)
        return {
            "schema": INSTANCE_SCHEMA,
            "id": self.id,
            "scenario": self.scenario,
            "N": self.n_robots,
            "robots": robots,
            "obstacles": [
                {"center": [float(v) for v in o.center], "radius": float(o.radius)}
                for o in self.obstacles
            ],
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return canonical_json(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, data: dict) -> "Instance":
        if data.get("schema") != INSTANCE_SCHEMA:
            raise ValueError(f"unsupported instance schema: {data.get('schema')!r}")
        scenario = data["scenario"]
        models, starts, goals = [], [], []
        for row in data["robots"]:
            models.append(RobotModel.from_params(scenario, row))
            starts.append(np.asarray(row["start"], dtype=float))
            goals.append(np.asarray(row["goal"], dtype=float))
        obstacles = [
            SphereObstacle(tuple(float(v) for v in o["center"]), float(o["radius"]))
            for o in data["obstacles"]
        ]
        return cls(
            scenario=scenario,
            models=models,
            starts=starts,
            goals=goals,
            obstacles=obstacles,
            seed=int(data.get("seed", 0)),
            id=data.get("id", ""),
        )

    @classmethod
    def load(cls, path) -> "Instance":
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())
            fh.write("\n")


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, minimal separators, repr floats."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
