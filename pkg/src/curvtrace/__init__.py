"""curvtrace: analytic curved-ray propagation through adaptive tet meshes.

Rays in media whose speed (or squared refractive index) varies linearly
within each cell follow closed-form circular (or parabolic) arcs.  This
package bakes analytic media profiles onto grids, resamples them into
gradient-adaptive tetrahedral meshes, traces analytic ray curves cell to
cell with exact plane intersections and specular boundary reflections,
and validates everything against piecewise-linear ray stepping.
"""

from .media import (AnalyticMedia, AtmosphericConstants, FluctuationField,
                    GridMedia, HotSpotProfile, MediaGrid, MirageProfile,
                    StratifiedProfile, WindOverHillProfile, bake_grid,
                    benchmark_profile, convert_values, density_from_gas_law,
                    fluctuation_n, hotspot_temperature, light_refractive_index,
                    sound_speed_from_temperature, stratified_n, wind_speed)
from .mesh import (AdaptiveMesh, BoundaryScene, MeshError, OutsideDomainError,
                   ResampleParams, build_adaptive_mesh, compute_spacing_field,
                   ground_scene, interpolate, link_boundary, point_locate,
                   resample_fcc, tetrahedralize)
from .gradient import (CellGradient, bake_gradients, cell_gradient,
                       green_gauss_gradient, regression_gradient)
from .curves import (DomainError, PlaneLocal, RayPlaneFrame, RaySegment,
                     arc_length, eval_r, intersect_plane, make_segment,
                     tangent, turning_point)
from .traversal import (BoundaryEvent, PropagationPath, TraceConfig,
                        fan_directions, trace, trace_fan, trace_straight)
from .stepper import (ConvergenceError, MeshMedia, StepperConfig,
                      batch_step_trace, converged_trace, step_trace)
from .analysis import (BenchReport, InterpolationErrorReport, RayErrorReport,
                       benchmark, interpolation_error, ray_error, sigma_sweep)

__version__ = "0.1.0"
