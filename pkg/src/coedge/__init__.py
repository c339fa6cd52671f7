"""Energy-aware partitioning of CNN inference across heterogeneous edge devices."""

from .cost import CostBreakdown, total_costs
from .errors import (
    BadPartition,
    CoEdgeError,
    HaloSpanViolation,
    InstanceTooLarge,
    InvariantViolation,
    MissingBandwidth,
    NonPositiveInput,
    NumericalBreakdown,
    ParseError,
    PlanInvalid,
    RepairFailed,
    ShapeUnderflow,
)
from .model import LayerConfig, LayerKind, ModelDescriptor, conv, fc, load_model, propagate_shape
from .partition import (
    PLANNERS,
    PartitionPlan,
    plan_coedge,
    plan_local,
    plan_modnn,
    plan_musical_chair,
    relaxed_optimum,
    round_plan,
    run_planner,
    validate_plan,
)
from .resources import BandwidthMatrix, Cluster, DeviceProfile, load_cluster
from .scenario import Scenario, load_scenario
from .simulator import run_epochs, simulate, sweep_deadline, sweep_offloading_ratio

__version__ = "0.1.0"

__all__ = [
    "BadPartition", "CoEdgeError", "HaloSpanViolation", "InstanceTooLarge", "InvariantViolation",
    "MissingBandwidth", "NonPositiveInput", "NumericalBreakdown", "ParseError", "PlanInvalid",
    "RepairFailed", "ShapeUnderflow",
    "LayerConfig", "LayerKind", "ModelDescriptor", "conv", "fc", "load_model", "propagate_shape",
    "BandwidthMatrix", "Cluster", "DeviceProfile", "load_cluster",
    "Scenario", "load_scenario",
    "CostBreakdown", "total_costs",
    "PLANNERS", "PartitionPlan", "plan_coedge", "plan_local", "plan_modnn", "plan_musical_chair",
    "relaxed_optimum", "round_plan", "run_planner", "validate_plan",
    "run_epochs", "simulate", "sweep_deadline", "sweep_offloading_ratio",
]
