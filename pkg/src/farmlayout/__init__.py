"""Wind-farm wake modelling, AEP evaluation and layout optimisation."""

__version__ = "0.1.0"

from .aep import EvaluationReport, capacity_plan, compute_aep, farm_power, flow_field  # noqa: E402
from .geometry import Boundary, point_in_polygon, polygon_area  # noqa: E402
from .layoutopt import (OptimizationConfig, compare_models, edge_clustering_metric,  # noqa: E402
                        latin_hypercube_layout, optimize, penalized_objective)
from .turbine import TurbineSpec, power_at, reference_turbine, shear_extrapolate  # noqa: E402
from .turbine import thrust_coefficient_at  # noqa: E402
from .wake import WakeModelConfig, bastankhah_deficit, effective_speeds, jensen_deficit  # noqa: E402
from .windrose import WindRose, bin_time_series, components_to_met  # noqa: E402
