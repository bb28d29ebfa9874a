"""magrobin - Asymptotic Fitting Module"""

from magrobin.asymfit.fitting import FitReport, fit_expansion
from magrobin.asymfit.richardson import Extrapolation, richardson

__all__ = ["FitReport", "fit_expansion", "Extrapolation", "richardson"]
