"""Independent reference prices: Monte Carlo, the GBM image series, Levy quadrature."""

from .exact import black_scholes_forward_call, gbm_double_barrier_exact
from .montecarlo import MCConfig, MCResult, mc_moment_estimates, mc_price
from .quadrature import check_martingale_constant, levy_quadrature, printed_martingale_constant

__all__ = [
    "MCConfig",
    "MCResult",
    "black_scholes_forward_call",
    "check_martingale_constant",
    "gbm_double_barrier_exact",
    "levy_quadrature",
    "mc_moment_estimates",
    "mc_price",
    "printed_martingale_constant",
]
