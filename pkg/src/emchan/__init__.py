"""Electromagnetic channel modeling and capacity studies.

Continuous-aperture and dense-array MIMO channels built from first
principles: free-space field kernels, wavenumber-domain statistics with
directional cluster spectra, exact spherical-wavefront array responses with
spatial non-stationarity, a grouped tri-polarized estimation protocol, and
water-filling capacity analysis, all driven by a reproducible scenario CLI.
"""

from .capacity import (CapacityResult, EnsembleStats, capacity_equal_power,
                       capacity_waterfilling, empirical_cdf, ergodic_capacity)
from .cdl import (CDL_B_SPREADS_DEG, CDL_B_XPR_DB, ClusterRow, ClusterTable, bundled_cdl_b,
                  load_cluster_table, mixture_from_clusters)
from .emcore import (FAR, RADIATING_NEAR, REACTIVE_NEAR, SPEED_OF_LIGHT, VACUUM_PERMEABILITY,
                     Aperture, PortFunction, WaveContext, assemble_em_channel, delta_aperture,
                     delta_ports, dyadic_green, em_channel_entry, field_region,
                     green_decomposition, rayleigh_distance, reactive_boundary, scalar_green)
from .errors import (DomainError, EmchanError, GeometryError, NumericalError, ShapeError,
                     SingularityError, ValidationError)
from .geometry import angles_from_vector, panel_frame, to_local_angles, unit_vector
from .nearfield import (ArrayGeometry, BounceGeometry, ClusterRay, MotionState, Tap,
                        VisibilityModel, attenuation_factor, channel_impulse_response,
                        cluster_rays, locate_bounce_scatterers, los_coefficient,
                        narrowband_channel, nlos_coefficient, planar_wave_channel,
                        spatial_correlation, visibility_probability)
from .patterns import (Pattern, PatternSet, TablePattern, dipole, load_pattern_table, patch,
                       unit_gain, vertical)
from .results import (Column, ResultTable, read_result_csv, read_result_json, result_schema,
                      write_results)
from .scenario import (DenselySpacedScenario, EmCoreValidationScenario, NearFieldScenario,
                       TriPolScenario, load_scenario, save_scenario, scenario_from_dict,
                       scenario_hash, serialize_scenario, validate_scenario)
from .seeds import STUDY_IDS, realization_rng, study_rng
from .studies import VERSION, axes_note, manifest_text, run_study
from .tripol import (NormalizationRecord, PortGrouping, TriPolChannel, TriPolEstimate,
                     benchmark_uplink_only, combining_reference, downlink_measure,
                     estimate_joint, group_ports, joint_estimate, normalize,
                     quantize_feedback, scalar_aligned, simulate_tripol_channel,
                     uplink_estimate)
from .wavenumber import (CouplingVariances, EfficiencyMatrix, PlanarArray,
                         PolarizedWavenumberChannel, VmfCluster, VmfMixture, WavenumberSupport,
                         apply_polarization, assemble_channel, cell_power_fractions,
                         coupling_variances, fourier_harmonics, hannan_efficiency,
                         isotropic_mixture, sample_wavenumber_channel, uniform_planar_array,
                         vmf_pdf, wavenumber_support, wavenumber_to_angles)

__version__ = VERSION
