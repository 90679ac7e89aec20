"""crystalflow: planar crystalline curvature flow via two independent routes.

Route one evolves admissible polygons by the facet ODE system; route two runs
the variational level-set (minimizing movement) scheme on top of an
anisotropic total-variation resolvent solver. A facet-calculus layer computes
signed perimeters, Cheeger-type ratios, and closed-form facet curvatures that
both routes are validated against.
"""

from .anisotropy import (
    Anisotropy,
    SpeedLaw,
    built_in,
    is_corner_preserving,
    load_anisotropy,
    named_law,
    new_crystalline,
)
from .polygons import (
    AdmissiblePolygon,
    crystalline_curvature,
    encloses,
    length_derivative,
    rectangle_polygon,
    transition_numbers,
    vertex_velocities,
    wulff_polygon,
)
from .flow import FlowOptions, Trajectory, evolve
from . import exact
from .facets import (
    FacetSpec,
    calibrability_verdict,
    cheeger_ratio,
    lambda_closed_form,
    signed_perimeter,
)
from .grid import DualField, GridField
from .tv import (
    ResolventParams,
    discrete_energy,
    estimate_min_section,
    project_wulff,
    resolvent_solve,
)
from .chambolle import (
    ChambolleOptions,
    EvolvingSet,
    Mobility,
    signed_distance,
)

__version__ = "0.1.0"
