"""Continuum percolation in quasi-periodic space-time environments."""

__version__ = "0.1.0"

from .connectivity import (FULL, HORIZONTAL, VERTICAL, BoundarySpec, ClusterStructure, Mask, boundary_hit,
                           build_clusters, connected, q_statistic, vertical_crossing)
from .environment import (GOLDEN, DegenerateFieldError, EnvironmentSpec, ResonanceReport, SamplingFunction,
                          TorusField, TorusPoint, bond_rate, death_rate, diophantine_certificate,
                          golden_environment, local_density, scan_resonances, shift, torus_distance,
                          uniform_environment)
from .estimation import (BoundaryHit, Complement, Connection, CorrelationEstimate, DecayFit, FitRefused,
                         FKGResult, RegularityProbe, VerticalCrossing, estimate_events, estimate_regularity,
                         estimate_two_point, fit_spatial_decay, fit_temporal_stretch, fkg_probe)
from .realization import (Realization, SpaceTimeBox, add_bond, add_death, dump_realization,
                          load_realization, sample_realization)
from .schedule import ScheduleParams, derive_K, scale_table, suggest, tau_window, theorem_bound, validate
