"""magrobin - Effective Boundary Operator Module"""

from magrobin.effective2d.chart import (
    CallbackPotential,
    ChartData,
    MagneticPotential,
    UniformField,
    build_chart,
    check_potential,
    write_chart_dump,
)
from magrobin.effective2d.coefficients import (
    EffectiveCoefficients,
    assemble_coefficients,
    with_quadratic_well,
)
from magrobin.effective2d.operator import (
    boundary_normal_field,
    doubled_pair,
    effective_matrix,
    effective_spectrum,
)
from magrobin.effective2d.trial import TrialBound, variational_upper_bound

__all__ = [
    "ChartData",
    "MagneticPotential",
    "UniformField",
    "CallbackPotential",
    "build_chart",
    "check_potential",
    "write_chart_dump",
    "EffectiveCoefficients",
    "assemble_coefficients",
    "with_quadratic_well",
    "effective_matrix",
    "doubled_pair",
    "effective_spectrum",
    "boundary_normal_field",
    "TrialBound",
    "variational_upper_bound",
]
