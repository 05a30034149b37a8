"""Supergeometry toolkit: Grassmann-valued functions on superdomains,
supermorphisms, super Jacobians, transversality checks and constructive
preimages of subsupermanifolds."""

__version__ = "0.1.0"

from .calculus import Classification, classify, jacobian, tangent_matrix
from .charts import AdaptedChart, Submanifold, projection, projection_after_chart
from .errors import InputError, SuperTransError
from .geometry import (
    SuperDomain,
    SuperMorphism,
    compose,
    identity,
    make_morphism,
    reduced_map_eval,
)
from .grassmann import Context, Parity, SuperFunction, parse_superfunction
from .preimage import (
    codim_check,
    construct_preimage_affine,
    defining_submersion,
    overlap_consistency,
    verify_submersion_on_fiber,
)
from .scene import format_scene, parse_scene
from .symcore import Expr, parse_expr
from .transversality import (
    Grid,
    check_transversal,
    is_transversal_at,
    is_transversal_via_projection,
    scan_preimage,
)

__all__ = [
    "AdaptedChart",
    "Classification",
    "Context",
    "Expr",
    "Grid",
    "InputError",
    "Parity",
    "Submanifold",
    "SuperDomain",
    "SuperFunction",
    "SuperMorphism",
    "SuperTransError",
    "check_transversal",
    "classify",
    "codim_check",
    "compose",
    "construct_preimage_affine",
    "defining_submersion",
    "format_scene",
    "identity",
    "is_transversal_at",
    "is_transversal_via_projection",
    "jacobian",
    "make_morphism",
    "overlap_consistency",
    "parse_expr",
    "parse_scene",
    "parse_superfunction",
    "projection",
    "projection_after_chart",
    "reduced_map_eval",
    "scan_preimage",
    "tangent_matrix",
    "verify_submersion_on_fiber",
]
