"""Fermionic Gaussian states and Gaussian rotated Petz maps."""

from .core import (DegenerateGroundStateError, InvalidInputError, Region, UnphysicalStateError,
                   chiral_correlation, cmi, direct_sum, ising_cft_correlation, partial_trace,
                   schur_decompose)
from .petz import (ForbiddenOutcomeError, GaussianMap, gaussian_fidelity, measure_sites, parity_measure,
                   petz_fidelity_curve, petz_map_matrices, rotated_petz_map, rotated_petz_recover)
