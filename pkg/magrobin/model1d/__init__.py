"""magrobin - One-Dimensional Model Operators"""

from magrobin.model1d.forms import (
    TransverseMode,
    WeightedForm1D,
    form_spectrum,
    transverse_ground,
)
from magrobin.model1d.oscillators import (
    DeGennesMinimum,
    ModeProfile,
    MontgomeryMinimum,
    OscillatorLevel,
    degennes_lambda,
    degennes_theta0,
    harmonic_ground,
    montgomery_ground,
    montgomery_lambda,
    montgomery_min,
)
from magrobin.model1d.robin import (
    flat_robin_discrete,
    robin_samples,
    robin_transverse_expansion,
    robin_transverse_form,
)

__all__ = [
    "WeightedForm1D",
    "TransverseMode",
    "form_spectrum",
    "transverse_ground",
    "robin_transverse_form",
    "robin_samples",
    "robin_transverse_expansion",
    "flat_robin_discrete",
    "ModeProfile",
    "MontgomeryMinimum",
    "DeGennesMinimum",
    "OscillatorLevel",
    "montgomery_ground",
    "montgomery_lambda",
    "montgomery_min",
    "harmonic_ground",
    "degennes_lambda",
    "degennes_theta0",
]
