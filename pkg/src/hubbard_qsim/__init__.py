"""Compile, simulate and verify Fermi-Hubbard cluster circuits."""
from __future__ import annotations

__version__ = "0.1.0"

from .compiler import compile_block, compile_group, compile_quadratic, compile_term
from .estimator import HubbardGreensFunction
from .gates import Circuit, Gate
from .greens import LehmannOracle, Probe, measure_C, measure_series, nambu_from_probes, run_pipeline
from .hamiltonian import ClusterSpec, build_blocks, build_full, commutator_table, parse_geometry
from .jordan_wigner import OrbitalIndex, Spin, annihilation_op, creation_op
from .pauli import PauliSum, PauliTerm
from .resources import ResourceReport, count_resources
from .simulator import QuantumState, circuit_unitary, exact_unitary, gibbs_state, run_circuit
from .trotter import error_metric, ruth_step, sweep, ts_step

__all__ = [
    "__version__", "Circuit", "ClusterSpec", "Gate", "HubbardGreensFunction", "LehmannOracle",
    "OrbitalIndex", "PauliSum", "PauliTerm", "Probe", "QuantumState", "ResourceReport", "Spin",
    "annihilation_op", "build_blocks", "build_full", "circuit_unitary", "commutator_table",
    "compile_block", "compile_group", "compile_quadratic", "compile_term", "count_resources",
    "creation_op", "error_metric", "exact_unitary", "gibbs_state", "measure_C", "measure_series",
    "nambu_from_probes", "parse_geometry", "run_circuit", "run_pipeline", "ruth_step", "sweep", "ts_step",
]
