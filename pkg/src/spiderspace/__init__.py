"""Configuration spaces of symmetric planar spider linkages."""

from .cells import TopologyReport, build_complex, euler_characteristic, genus_formula
from .kinematics import solve_configuration, solve_joint
from .model import (
    ArmIndex,
    Configuration,
    MultiIndex,
    Regime,
    RegimeTag,
    SpiderParams,
    classify_regime,
    critical_radius,
)
from .morse import enumerate_critical_points, morse_euler
from .verify import classify_topology, connect_path

__all__ = [
    "ArmIndex", "Configuration", "MultiIndex", "Regime", "RegimeTag", "SpiderParams",
    "TopologyReport", "build_complex", "classify_regime", "classify_topology", "connect_path",
    "critical_radius", "enumerate_critical_points", "euler_characteristic", "genus_formula",
    "morse_euler", "solve_configuration", "solve_joint",
]
