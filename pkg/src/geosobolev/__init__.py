"""Chart-based Riemannian computation: admissible radius fields, Vitali
coverings, weighted Sobolev norms of functions and differential forms, and
numerical verification of the associated embedding and Gaffney inequalities.
"""

from .manifold import (BUILTIN_KINDS, Chart, ChartedManifold, ManifoldError, Point,
                       Window, load_manifold, make_builtin, manifold_from_spec)
from .geometry import (TensorValue, christoffel, cmt_check, pointwise_norm, ricci,
                       ricci_eigenvalues, sectional_curvature)
from .forms import (FormField, codifferential_field, codifferential_values,
                    covariant_derivative, exterior_derivative, hodge_star_at,
                    hodge_star_values)
from .admissible import (AdmissibleBall, RadiusField, admissible_radius, is_admissible,
                         make_ball, radius_field, verify_slow_variation)
from .covering import Covering, overlap_stats, vitali_cover, weight_at
from .norms import (BallRegion, BoxRegion, SobolevParams, chart_comparison,
                    holder_ball_check, inner_product, localization_check, lp_norm,
                    lp_sequence_compare, sobolev_norm)

__version__ = "0.1.0"
