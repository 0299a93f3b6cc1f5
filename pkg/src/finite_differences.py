"""
Central-difference stencils for pointwise PDE residuals.
Second-order (3-point) and fourth-order (5-point) variants.
"""

from dataclasses import dataclass
from typing import Callable, Dict

# 5-point first-derivative weights, applied as sum(w * f(a + k h)) / (12 h)
_FOURTH_ORDER_FIRST: Dict[int, float] = {-2: 1.0, -1: -8.0, 1: 8.0, 2: -1.0}
# 5-point second-derivative weights, applied as sum(w * f(a + k h)) / (12 h^2)
_FOURTH_ORDER_SECOND: Dict[int, float] = {-2: -1.0, -1: 16.0, 0: -30.0, 1: 16.0, 2: -1.0}

SUPPORTED_ORDERS = (2, 4)


@dataclass(frozen=True)
class Partials:
    """Value and partial derivatives of f(a, b) at one point."""
    value: float
    d1: float
    d2: float
    d11: float
    d22: float
    d12: float


def stencil_reach(order: int) -> int:
    """Number of steps the stencil extends on each side of the centre."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(f"order must be one of {SUPPORTED_ORDERS}, got {order}")
    return 1 if order == 2 else 2


def central_partials(
    fn: Callable[[float, float], float],
    a: float,
    b: float,
    ha: float,
    hb: float,
    order: int = 2,
) -> Partials:
    """
    Estimate f, f_a, f_b, f_aa, f_bb and f_ab by central differences.

    Args:
        fn: Scalar function of two variables
        a, b: Evaluation point
        ha, hb: Step sizes in each variable (must be > 0)
        order: 2 for 3-point stencils, 4 for 5-point stencils

    Returns:
        Partials at (a, b)
    """
    stencil_reach(order)
    if ha <= 0 or hb <= 0:
        raise ValueError(f"step sizes must be > 0, got ({ha}, {hb})")

    f0 = float(fn(a, b))

    if order == 2:
        fa_p, fa_m = float(fn(a + ha, b)), float(fn(a - ha, b))
        fb_p, fb_m = float(fn(a, b + hb)), float(fn(a, b - hb))
        mixed = (
            float(fn(a + ha, b + hb)) - float(fn(a + ha, b - hb))
            - float(fn(a - ha, b + hb)) + float(fn(a - ha, b - hb))
        ) / (4.0 * ha * hb)
        return Partials(
            value=f0,
            d1=(fa_p - fa_m) / (2.0 * ha),
            d2=(fb_p - fb_m) / (2.0 * hb),
            d11=(fa_p - 2.0 * f0 + fa_m) / ha ** 2,
            d22=(fb_p - 2.0 * f0 + fb_m) / hb ** 2,
            d12=mixed,
        )

    along_a = {k: (f0 if k == 0 else float(fn(a + k * ha, b))) for k in _FOURTH_ORDER_SECOND}
    along_b = {k: (f0 if k == 0 else float(fn(a, b + k * hb))) for k in _FOURTH_ORDER_SECOND}
    mixed = sum(
        wi * wj * float(fn(a + i * ha, b + j * hb))
        for i, wi in _FOURTH_ORDER_FIRST.items()
        for j, wj in _FOURTH_ORDER_FIRST.items()
    ) / (144.0 * ha * hb)
    return Partials(
        value=f0,
        d1=sum(w * along_a[k] for k, w in _FOURTH_ORDER_FIRST.items()) / (12.0 * ha),
        d2=sum(w * along_b[k] for k, w in _FOURTH_ORDER_FIRST.items()) / (12.0 * hb),
        d11=sum(w * along_a[k] for k, w in _FOURTH_ORDER_SECOND.items()) / (12.0 * ha ** 2),
        d22=sum(w * along_b[k] for k, w in _FOURTH_ORDER_SECOND.items()) / (12.0 * hb ** 2),
        d12=mixed,
    )
