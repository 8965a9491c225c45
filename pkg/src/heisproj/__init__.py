"""Vertical projections in the Heisenberg group: geometry, fractal samples,
dimension estimates and the experiments built on them."""
from .heis import (
    DimensionMismatchError,
    HeisPoint,
    dilate,
    euclid_dist,
    group_inv,
    group_mul,
    identity,
    koranyi_dist,
    koranyi_norm,
    symplectic_form,
)
from .grassmann import (
    IsotropicPlane,
    PlaneSampler,
    canonical_plane,
    proj_horizontal,
    proj_left_coset,
    proj_right_coset,
)
from .metrics import QuotientMetricOptions, grushin_dist, quotient_dist
from .fractals import PointCloud, IfsSpec, box_product_set, cantor_vertical_line, ifs_dust, product_set
from .dimension import DimensionEstimate, MetricKind, energy_mc, estimate_dim, net_count
from .bounds import BoundCurve

__version__ = "0.1.0"
