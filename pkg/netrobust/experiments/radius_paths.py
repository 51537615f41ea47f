"""
Radiuspfade n ↦ C_n.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from ..core.errors import ParameterError


class PathKind(Enum):
    EXP_SHRINK = "exp_shrink"      # C_n = exp(−2αn)
    POLYNOMIAL = "polynomial"      # C_n = κ/n
    CONSTANT = "constant"          # C_n = c0
    LINEAR_GROW = "linear_grow"    # C_n = c1·n


_PARAM_NAMES = {
    PathKind.EXP_SHRINK: "alpha",
    PathKind.POLYNOMIAL: "kappa",
    PathKind.CONSTANT: "c0",
    PathKind.LINEAR_GROW: "c1",
}


@dataclass(frozen=True)
class RadiusPath:
    """
    Regel für den Robustheitsradius in Abhängigkeit von n.

    Für EXP_SHRINK darf der Parameter None sein; er wird dann vom Experiment
    mit J(λ) belegt (resolve).
    """

    kind: PathKind
    param: Optional[float] = None

    def __post_init__(self):
        if self.param is None:
            if self.kind is not PathKind.EXP_SHRINK:
                raise ParameterError(f"Parameter fehlt für {self.kind.value}")
        elif not self.param > 0:
            raise ParameterError(f"Pfadparameter muss positiv sein: {self.param}")

    @classmethod
    def exp_shrink(cls, alpha: Optional[float] = None) -> "RadiusPath":
        return cls(PathKind.EXP_SHRINK, alpha)

    @classmethod
    def polynomial(cls, kappa: float) -> "RadiusPath":
        return cls(PathKind.POLYNOMIAL, kappa)

    @classmethod
    def constant(cls, c0: float) -> "RadiusPath":
        return cls(PathKind.CONSTANT, c0)

    @classmethod
    def linear_grow(cls, c1: float) -> "RadiusPath":
        return cls(PathKind.LINEAR_GROW, c1)

    @classmethod
    def from_dict(cls, data: dict) -> "RadiusPath":
        try:
            kind = PathKind(data["kind"])
        except (KeyError, ValueError):
            raise ParameterError(f"Unbekannter Radiuspfad: {data}")
        return cls(kind, data.get(_PARAM_NAMES[kind]))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, _PARAM_NAMES[self.kind]: self.param}

    def resolve(self, default_alpha: float) -> "RadiusPath":
        if self.param is None:
            return RadiusPath(self.kind, default_alpha)
        return self

    @property
    def label(self) -> str:
        return f"{self.kind.value}({_PARAM_NAMES[self.kind]}={self.param:.6g})"

    def radius(self, n: int) -> float:
        if self.param is None:
            raise ParameterError("alpha nicht aufgelöst - zuerst resolve() aufrufen")
        if self.kind is PathKind.EXP_SHRINK:
            return math.exp(-2.0 * self.param * n)
        if self.kind is PathKind.POLYNOMIAL:
            return self.param / n
        if self.kind is PathKind.CONSTANT:
            return self.param
        return self.param * n
