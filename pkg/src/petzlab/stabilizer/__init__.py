"""Stabilizer tableaux, Clifford circuits and exact stabilizer Petz fidelities."""

from .circuits import levin_wen_partition, run_clifford_mipt, toric_code_state
from .clifford import Clifford2, random_two_qubit_clifford
from .entropy import RouteMismatchError, cmi_stabilizer, petz_fidelity_stabilizer, region_entropy
from .tableau import StabilizerTableau
