"""Moment-LP price bounds for double-barrier contracts under polynomial jump-diffusions."""

from .contracts import (
    ContractSpec,
    PricingCase,
    cir_american_corridor,
    expvg_double_no_touch,
    gbm_double_knockout,
    payoff_to_objective,
    vg_double_knockout,
)
from .models import (
    VG,
    MomentTable,
    PolynomialModel,
    TruncatedVG,
    apply_generator,
    truncate_for_barriers,
    vg_martingale_drift,
    vg_tail_mass,
    vg_truncated_moment,
)
from .moment_lp import MeasurePiece, MomentLP, MomentObjective, SupportSet, build_lp
from .poly import AffineMap1D, BiPoly
from .pricing import compute_bounds, bounds_ladder
from .solvers import BoundsResult, solve_bounds

__version__ = "0.1.0"
