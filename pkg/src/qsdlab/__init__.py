"""Quantum Serre duality for split convex bundles on projective space, in exact arithmetic."""
from .cohring import GeometryTriple
from .errors import QSDError, ScopeError
from .hypergeo import build_theory, local_invariants
from .qdm import FLAVORS, build
from .runner import Scenario, run_scenario
from .serre import verify_compact_qsd, verify_cone_qsd, verify_narrow_qsd

__version__ = "0.1.0"

__all__ = ["GeometryTriple", "QSDError", "ScopeError", "build_theory", "local_invariants", "FLAVORS",
           "build", "Scenario", "run_scenario", "verify_cone_qsd", "verify_compact_qsd",
           "verify_narrow_qsd"]
