"""Entanglement generated by non-uniform motion of rigid cavities, to first order in h.

Quick start::

    from movingcavity import CavityConfig, Trajectory, run_scenario_A
    cfg = CavityConfig(field_kind="scalar_massless", n_max=12)
    res = run_scenario_A(cfg, Trajectory.blocks(0.01, 2.0, 1), 0.01, (1, 2))
    res.witnesses["A1"].value   # OrderSeries in h
"""
from .bogoliubov import compile_numeric, compile_trajectory, compose, inverse, phase_map, switch_map
from .core import DIRAC, SCALAR, CavityConfig, DomainError, OrderSeries, Segment, Trajectory, block_u
from .entanglement import canonical_state, fidelity, negativity, negativity_series
from .fock import partial_trace, transform_boson_state, transform_fermion_state, transformed_vacuum
from .scenarios import RegimeError, resonance_scan, run_scenario_A, run_scenario_B

__version__ = "0.1.0"

__all__ = [
    "DIRAC", "SCALAR", "CavityConfig", "DomainError", "OrderSeries", "RegimeError", "Segment",
    "Trajectory", "block_u", "canonical_state", "compile_numeric", "compile_trajectory", "compose",
    "fidelity", "inverse", "negativity", "negativity_series", "partial_trace", "phase_map",
    "resonance_scan", "run_scenario_A", "run_scenario_B", "switch_map", "transform_boson_state",
    "transform_fermion_state", "transformed_vacuum",
]
