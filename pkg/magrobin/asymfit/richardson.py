"""Richardson extrapolation over nested resolutions."""

import math
from typing import NamedTuple, Sequence

from magrobin.utils.errors import ExtrapolationUnsafe


class Extrapolation(NamedTuple):
    limit: float
    observed_order: float


def richardson(values: Sequence[float], order: float = 2.0, ratio: float = 2.0) -> Extrapolation:
    """
    Extrapolate values computed at resolutions N, rN, r^2 N, ...

    The last three values give the observed order
    ``log_r(|v[-2] - v[-3]| / |v[-1] - v[-2]|)`` and the limit
    ``v[-1] + (v[-1] - v[-2]) / (r**order - 1)``. Identical values return
    themselves with an undefined (NaN) order.

    Args:
        values: Values ordered from coarse to fine.
        order: Assumed convergence order p.
        ratio: Refinement ratio r between resolutions.

    Raises:
        ExtrapolationUnsafe: Fewer than three values or the differences
            change sign or fail to shrink. ``finest`` holds the raw value.
    """
    values = [float(v) for v in values]
    if len(values) < 3:
        raise ExtrapolationUnsafe(
            "need three or more nested resolutions",
            finest=values[-1] if values else math.nan,
            details={"values": values},
        )

    finest = values[-1]
    diffs = [b - a for a, b in zip(values[:-1], values[1:])]

    if all(d == 0.0 for d in diffs):
        return Extrapolation(finest, math.nan)

    signs = {math.copysign(1.0, d) for d in diffs if d != 0.0}
    shrinking = all(abs(b) < abs(a) for a, b in zip(diffs[:-1], diffs[1:]))
    if len(signs) > 1 or not shrinking or any(d == 0.0 for d in diffs):
        raise ExtrapolationUnsafe(
            "convergence is not monotone",
            finest=finest,
            details={"values": values, "differences": diffs},
        )

    d_coarse, d_fine = diffs[-2], diffs[-1]
    observed = math.log(abs(d_coarse) / abs(d_fine)) / math.log(ratio)
    limit = finest + d_fine / (ratio**order - 1.0)
    return Extrapolation(limit, observed)
