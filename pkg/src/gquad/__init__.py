"""Generalised quadrangles over small finite fields.

Construction of the symplectic quadrangle and the elliptic quadric
quadrangle, Payne derivation, groups acting point-regularly on them, and
enumeration of such groups up to conjugacy.
"""

from .constructions import (
    BASE_POINT,
    DerivedModel,
    action_from_linear,
    ambient_stabiliser,
    build_derived_model,
    build_extraspecial27,
    build_gu513,
    elation_group,
    elation_matrix,
    iso_E_to_P,
    shear_group,
    shear_matrix,
    shear_power_matrix,
    split_group,
    sylow_exponent,
    unipotent_group,
    verify_conjugation_relations,
    verify_elation_commutator_rule,
    verify_elation_product_rule,
    verify_shear_power_formula,
)
from .gf import GF, GFElement, triple_image
from .groups import (
    UNKNOWN,
    FiniteGroup,
    PermGroup,
    Permutation,
    TooLargeError,
    invariant_report,
    is_conjugate_subgroup,
    is_isomorphic_small,
    is_normal,
    is_regular,
    load_group,
    report_json,
    save_group,
)
from .incidence import (
    NotRegularPointError,
    Quadrangle,
    aut_incidence,
    build_from_form,
    build_qminus5,
    build_w3,
    dual,
    gq_isomorphic,
    line_action,
    load_gq,
    payne_derive,
    save_gq,
    verify_gq,
)
from .linalg import AlternatingForm, Mat, QuadraticForm, projective_points
from .search import (
    NotCompatibleError,
    RegularClass,
    RegularClassTable,
    SearchBudget,
    classify_classes,
    describe_group,
    enumerate_regular,
    normaliser_gens,
    sylow_subgroup,
)

__version__ = "0.1.0"

__all__ = [
    "GF",
    "GFElement",
    "triple_image",
    "Mat",
    "AlternatingForm",
    "QuadraticForm",
    "projective_points",
    "Permutation",
    "PermGroup",
    "FiniteGroup",
    "TooLargeError",
    "UNKNOWN",
    "is_regular",
    "is_normal",
    "is_conjugate_subgroup",
    "is_isomorphic_small",
    "invariant_report",
    "report_json",
    "save_group",
    "load_group",
    "Quadrangle",
    "NotRegularPointError",
    "build_from_form",
    "build_w3",
    "build_qminus5",
    "verify_gq",
    "dual",
    "line_action",
    "payne_derive",
    "gq_isomorphic",
    "aut_incidence",
    "save_gq",
    "load_gq",
    "BASE_POINT",
    "DerivedModel",
    "build_derived_model",
    "action_from_linear",
    "ambient_stabiliser",
    "elation_matrix",
    "shear_matrix",
    "shear_power_matrix",
    "elation_group",
    "shear_group",
    "split_group",
    "unipotent_group",
    "iso_E_to_P",
    "build_extraspecial27",
    "build_gu513",
    "verify_elation_product_rule",
    "verify_elation_commutator_rule",
    "verify_conjugation_relations",
    "verify_shear_power_formula",
    "sylow_exponent",
    "NotCompatibleError",
    "SearchBudget",
    "RegularClass",
    "RegularClassTable",
    "normaliser_gens",
    "sylow_subgroup",
    "describe_group",
    "enumerate_regular",
    "classify_classes",
]
