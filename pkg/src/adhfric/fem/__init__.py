"""Bulk finite elements: meshes, Neo-Hookean material, assembly and solve."""
from .assembly import (BulkOperator, GlobalSystem, SingularSystemError, assemble_and_solve,
                       element_force_and_stiffness)
from .material import (NEARLY_INCOMPRESSIBLE, STANDARD, ElementInversionError, Material,
                       neo_hookean_stress_and_tangent, strain_energy_density)
from .mesh import Mesh, MeshError, gauss_1d, gauss_2d, shape_functions

__all__ = [
    "BulkOperator", "GlobalSystem", "SingularSystemError", "assemble_and_solve",
    "element_force_and_stiffness", "NEARLY_INCOMPRESSIBLE", "STANDARD", "ElementInversionError",
    "Material", "neo_hookean_stress_and_tangent", "strain_energy_density", "Mesh", "MeshError",
    "gauss_1d", "gauss_2d", "shape_functions",
]
