"""magrobin - Surface Geometry Module"""

from magrobin.geometry.curvature import (
    CurvatureData,
    curvature_at,
    curvature_at_point,
    curvature_fields,
    forms_from_derivatives,
    weingarten_defect,
)
from magrobin.geometry.energy import (
    EffectiveBoundaryEnergy,
    EigenvaluePrediction,
    PredictionTerm,
    c0,
    c_star_bound,
    effective_energy,
    field_values,
    harmonic_constant,
    max_mean_curvature,
    min_normal_field,
    minimize_on_surface,
    normal_field,
    orthonormal_hessian,
    predict_eigenvalues,
)
from magrobin.geometry.localization import (
    Projection,
    localization_potential,
    project_to_surface,
)
from magrobin.geometry.surfaces import (
    CallbackSurface,
    Chart,
    Derivatives,
    Ellipsoid,
    ParamSurface,
    PlaneSurface,
    ReparametrizedSurface,
    Sphere,
    TabulatedSurface,
    surface_from_spec,
)

__all__ = [
    "ParamSurface",
    "Chart",
    "Derivatives",
    "Ellipsoid",
    "Sphere",
    "PlaneSurface",
    "CallbackSurface",
    "TabulatedSurface",
    "ReparametrizedSurface",
    "surface_from_spec",
    "CurvatureData",
    "curvature_at",
    "curvature_at_point",
    "curvature_fields",
    "forms_from_derivatives",
    "weingarten_defect",
    "EffectiveBoundaryEnergy",
    "EigenvaluePrediction",
    "PredictionTerm",
    "effective_energy",
    "c0",
    "c_star_bound",
    "harmonic_constant",
    "max_mean_curvature",
    "min_normal_field",
    "minimize_on_surface",
    "field_values",
    "normal_field",
    "orthonormal_hessian",
    "predict_eigenvalues",
    "Projection",
    "project_to_surface",
    "localization_potential",
]
