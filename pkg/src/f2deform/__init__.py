"""Exact symbolic verification of a non-equivariant deformation of F2.

The second Hirzebruch surface F2 deforms to P1 x P1 in the family W over
``Spec C[[t]]``.  This package rebuilds the family from two charts, classifies
its global formal vector fields, computes H^0 and H^1 of the tangent sheaf of
F2, checks the Lie algebra of Aut(F2), and certifies that the action does not
lift to second order in ``t``.
"""

__version__ = "0.1.0"

from .symbolic import SparseExpr, canonical_string, parse, partial_derivative, substitute, t_valuation
from .linalg import RationalMatrix, kernel_basis, left_nullspace, rank, solve_affine
from .charts import (Chart, Transition, VectorField, load_manifest, pushforward, regularity_check,
                     verify_surface_models, verify_transition_consistency)
from .global_fields import (fiber_field_dimension, h0_dimension, h1_dimension, is_coboundary,
                            kodaira_spencer_cocycle, solve_global_fields, verify_field_shape)
from .lie import (StructureConstants, base_component, bracket, generate_fundamental_fields,
                  load_structure_constants, verify_bracket_table)
from .groebner import buchberger, certify_empty, normal_form
from .lifting import (LiftProblem, ObstructionCertificate, ParametricLift, base_component_analysis,
                      run_lift, solve_order, stock_problem)

__all__ = [name for name in dir() if not name.startswith("_")]
