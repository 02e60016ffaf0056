"""Plugin systems and the built-in physics objects."""
from . import auxkernels, bcs, execute, functions, kernels, materials, postprocessors  # noqa: F401
from .base import (
    AuxKernel,
    BoundaryCondition,
    Function,
    IntegratedBC,
    Kernel,
    KernelGrad,
    KernelValue,
    Material,
    MooseObject,
    NodalBC,
    Postprocessor,
    VectorPostprocessor,
)
from .materials import evaluate_materials, resolve_material_order

__all__ = [
    "AuxKernel",
    "BoundaryCondition",
    "Function",
    "IntegratedBC",
    "Kernel",
    "KernelGrad",
    "KernelValue",
    "Material",
    "MooseObject",
    "NodalBC",
    "Postprocessor",
    "VectorPostprocessor",
    "evaluate_materials",
    "resolve_material_order",
]
