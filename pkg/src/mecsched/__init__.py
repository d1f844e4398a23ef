"""Task containerization and container placement for edge server fleets."""
from ._backend import BACKEND
from .model import (
    CycleError,
    Edge,
    SchedulerConfig,
    Server,
    ServerFleet,
    Task,
    WorkflowDag,
    critical_path,
    topological_order,
    total_edge_weight,
    validate,
)
from .partition import Partition, objective_f, partition_tasks, normalized_max_load
from .placement import ContainerProfile, PlacementInfeasible, PlacementMap, dp_place, ffd_place
from .baselines import kmeans_partition, spread_place
from .metrics import ScheduleMetrics, evaluate, joint_objective
from .oracle import brute_force_joint, brute_force_partition

__version__ = "0.1.0"
