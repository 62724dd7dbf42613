"""Module containing planar optical stack models."""

from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from emitterkit.core.domain.fit import FitResult


class Layer(BaseModel):
    """Model representing a homogeneous film (index n + ik, thickness in m)."""
    n: float = Field(gt=0)
    k: float = Field(default=0.0, ge=0)
    thickness: float = Field(ge=0)
    name: str = ""

    model_config = ConfigDict(frozen=True, extra="ignore")

    @property
    def index(self) -> complex:
        """complex: The complex refractive index."""
        return complex(self.n, self.k)


class LayerStack(BaseModel):
    """Model representing ambient / layers (top first) / substrate."""
    layers: tuple[Layer, ...] = ()
    ambient_index: float = Field(default=1.0, gt=0)
    substrate_n: float = Field(gt=0)
    substrate_k: float = Field(default=0.0, ge=0)
    wavelength: float = Field(default=522e-9, gt=0)
    stack_id: str = ""

    model_config = ConfigDict(frozen=True, extra="ignore")

    @property
    def substrate_index(self) -> complex:
        """complex: The substrate's complex index."""
        return complex(self.substrate_n, self.substrate_k)

    @property
    def lossless(self) -> bool:
        """bool: True when no layer nor the substrate absorbs."""
        return self.substrate_k == 0 and all(layer.k == 0 for layer in self.layers)

    def with_top_layer(self, layer: Layer) -> "LayerStack":
        """A method putting a film on top of the stack.

        Args:
            layer (Layer): The new top film.

        Returns:
            LayerStack: The extended stack.
        """

        return self.model_copy(update={"layers": (layer, *self.layers)})

    def with_wavelength(self, wavelength: float) -> "LayerStack":
        """A method returning the stack probed at another wavelength.

        Args:
            wavelength (float): Vacuum wavelength in meters.

        Returns:
            LayerStack: The updated stack.
        """

        return self.model_copy(update={"wavelength": wavelength})


class OplCurve(BaseModel):
    """Model representing simulated excess OPL versus flake thickness."""
    thickness_grid: list[float]
    opl_values: list[float]
    wavelength: float = Field(gt=0)
    stack_id: str = ""
    injectivity_limit: float = Field(ge=0)

    @model_validator(mode="after")
    def _check_grid(self) -> "OplCurve":
        if len(self.thickness_grid) != len(self.opl_values):
            raise ValueError("grids must have equal length")
        if np.any(np.diff(self.thickness_grid) <= 0):
            raise ValueError("thickness grid must be strictly ascending")
        return self


class ThicknessEstimate(BaseModel):
    """Model representing the outcome of an OPL inversion."""
    opl: float
    thickness: Optional[float] = None
    ambiguous: bool = False
    candidates: list[float] = Field(default_factory=list)


class IndexEstimate(BaseModel):
    """Model representing a calibrated flake refractive index."""
    n: float
    ci95: tuple[float, float]
    used_points: int
    unstable: bool = False
    fit: FitResult
