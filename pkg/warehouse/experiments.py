"""
Experiment documents: TOML files validated into an ExperimentSpec.
Command-line flags override document fields.
"""

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

import config


class GroupSpec(BaseModel):
    genus: int = Field(2, ge=2)
    mode: Literal["regular", "degenerate"] = "regular"
    eps: Optional[float] = Field(None, gt=0, lt=1)

    @model_validator(mode="after")
    def degenerate_needs_eps(self):
        if self.mode == "degenerate" and self.eps is None:
            raise ValueError("degenerate groups need eps")
        return self


class RepresentationSpec(BaseModel):
    system: str = "shift:k=2,W=64"
    assign: str = "a1=1"


class GridSpec(BaseModel):
    R: list[float] = Field(default_factory=lambda: [4.0, 6.0, 8.0, 10.0])
    eps: list[float] = Field(default_factory=lambda: [0.5, 0.25])
    samples: int = Field(512, ge=1)
    method: Literal["greedy", "oracle"] = "greedy"

    @field_validator("R")
    @classmethod
    def increasing(cls, value):
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("R grid must be strictly increasing")
        return value


class BudgetSpec(BaseModel):
    ball: int = Field(default_factory=lambda: config.BALL_BUDGET, ge=1)
    transformations: int = Field(100_000, ge=1)


class ExperimentSpec(BaseModel):
    group: GroupSpec = Field(default_factory=GroupSpec)
    representation: RepresentationSpec = Field(default_factory=RepresentationSpec)
    grids: GridSpec = Field(default_factory=GridSpec)
    budgets: BudgetSpec = Field(default_factory=BudgetSpec)
    seed: int = Field(default_factory=lambda: config.SEED)
    output_dir: Path = Field(default_factory=lambda: config.OUTPUT_DIR)


def load_experiment(path=None, overrides=None) -> ExperimentSpec:
    """
    Read an optional TOML document and apply dotted overrides such as
    {"grids.R": [4, 6], "seed": 7}; None values are ignored.
    """
    document = {}
    if path is not None:
        with Path(path).open("rb") as handle:
            document = tomllib.load(handle)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        node = document
        *parents, leaf = dotted.split(".")
        for name in parents:
            node = node.setdefault(name, {})
        node[leaf] = value
    return ExperimentSpec.model_validate(document)
