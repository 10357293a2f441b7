"""Bond percolation, chemical distances and rigid spin ground states on Z^2."""

from .lattice import (BondConfig, BondId, DualPoint, Window, adjacent_weak, dual_midpoint,
                      nearest_bond, sample_config)
from .clusters import (ClusterLabels, has_weak_crossing, strong_dual_clusters, threshold_scan,
                       weak_clusters)
from .distance import PathResult, chemical_distance, passage_time, snap_to_cluster
from .estimators import (Estimate, LambdaTable, PolygonalPhase, continuity_sweep, estimate_lambda,
                         estimate_phi, limit_functional)
from .channels import (ChannelReport, RectangleSpec, count_disjoint_channels,
                       count_strong_dual_channels, has_strong_dual_crossing, strong_link_percentage)
from .spin import (EnergyValue, SpinField, energy, ground_state, interface_vs_lambda,
                   rigidity_probe)

__version__ = "0.1.0"
