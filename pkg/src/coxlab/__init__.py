"""coxlab: a workbench for hyperbolic Coxeter polygons.

Geometry kernel in the hyperboloid model, polygon constructors and
validation, Monte Carlo thin-part measurement, balanced triangulations with
dual trees and escape paths, reflection-group word balls, and short-edge
surgery, behind one CLI (`coxlab`).
"""

__version__ = "0.1.0"

from .lorentz import (
    DegenerateInput,
    DomainError,
    Geodesic,
    GeometryError,
    HPoint,
    IdealPoint,
    Isometry,
    Tolerances,
    TOL,
    distance,
    dist_point_geodesic,
    dist_point_segment,
    equidistant_jacobian,
    exp_map,
    gauss_bonnet_area,
    geodesic_through,
    heron_area,
    mink,
    reflect,
    reflection_matrix,
    side_from_angles,
    triangle_angles,
)
from .polygon import (
    CoxeterPolygon,
    GeneralPolygon,
    OutsidePointError,
    ideal_regular_polygon,
    load_polygon,
    regular_coxeter_polygon,
    right_angled_hexagon,
    triangle_polygon,
    validate_coxeter,
)
from .refgroup import (
    GroupBall,
    GroupElement,
    ball,
    bounded_factorization,
    check_gens_minlength,
    local_small_displacement,
    minimal_support,
    side_reflections,
)
from .thinpart import (
    SamplerConfig,
    ThinRatioEstimate,
    collar_inequality_check,
    group_thin_cross_check,
    sample_uniform,
    thick_fraction_decay,
    thin_fraction_lower_bound,
    thin_ratio,
    thin_ratio_multi,
)
from .triangulation import (
    DualTree,
    EscapePath,
    Triangulation,
    balanced_triangulate,
    escape_path,
    leaves_within,
    min_leaf_depth,
    radius_from_root,
)
from .surgery import (
    SurgeryConstants,
    SurgeryReport,
    min_area_triangle,
    remove_small_edges,
    short_edge_corpus,
    surgery_thin_comparison,
)
