"""JSON config models. Set descriptors are discriminated on "type"."""
import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..core.errors import ConfigError, DimensionMismatch
from ..services.convex_sets import Box, ConvexSet, HPolytope, VPolytope
from ..services.reach_oracle import LinearSystem


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BoxSet(_Model):
    type: Literal["box"] = "box"
    lower: list[float]
    upper: list[float]

    def build(self) -> ConvexSet:
        return Box(np.array(self.lower), np.array(self.upper))


class HPolySet(_Model):
    type: Literal["hpoly"] = "hpoly"
    F: list[list[float]]
    g: list[float]

    def build(self) -> ConvexSet:
        return HPolytope(np.array(self.F), np.array(self.g))


class VPolySet(_Model):
    type: Literal["vpoly"] = "vpoly"
    vertices: list[list[float]] = Field(min_length=1)

    def build(self) -> ConvexSet:
        return VPolytope(np.array(self.vertices))


SetDescriptor = Annotated[Union[BoxSet, HPolySet, VPolySet], Field(discriminator="type")]


class SystemConfig(_Model):
    A: list[list[float]]
    B: list[list[float]]
    X: SetDescriptor
    U: SetDescriptor
    Wbar: SetDescriptor

    @model_validator(mode="after")
    def _square(self):
        n = len(self.A)
        if n == 0 or any(len(row) != n for row in self.A):
            raise ValueError(f"A must be a non-empty square matrix, got {len(self.A)} rows "
                             f"of lengths {[len(r) for r in self.A]}")
        if len(self.B) != n or len({len(row) for row in self.B}) != 1:
            raise ValueError(f"B must have {n} rows of equal length")
        return self


class JordanDeclaration(_Model):
    eig: float
    size: int = Field(ge=1)


class AttackConfig(_Model):
    alpha: Optional[float] = Field(default=None, ge=0.0)
    x0: Optional[list[float]] = None
    block: int = Field(default=1, ge=1)
    defender: str = "projected-worst-case"
    max_steps: Optional[int] = Field(default=None, ge=1)
    gain: Optional[list[list[float]]] = None
    mode: Literal["full", "scalar"] = "full"


class AnalysisConfig(_Model):
    name: str = ""
    system: SystemConfig
    jordan: Optional[list[JordanDeclaration]] = None
    k_max: int = Field(default=15, ge=1)
    alpha_tol: float = Field(default=1e-4, gt=0.0)
    alpha_hi: Optional[float] = Field(default=None, gt=0.0)
    attack: AttackConfig = Field(default_factory=AttackConfig)

    def build_system(self) -> LinearSystem:
        s = self.system
        try:
            return LinearSystem(np.array(s.A), np.array(s.B), s.X.build(), s.U.build(), s.Wbar.build())
        except ValueError as exc:
            raise DimensionMismatch(str(exc)) from exc

    def declared_structure(self) -> list[tuple[float, int]] | None:
        if self.jordan is None:
            return None
        return [(d.eig, d.size) for d in self.jordan]


def load_config(path: str | Path) -> AnalysisConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        return AnalysisConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid config {path}: {exc}") from exc
