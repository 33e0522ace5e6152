"""Dense statevector circuits and the Uhlmann route to rotated Petz fidelities."""

from .petz import (direct_petz_recover, fidelity_dense, twirled_petz_fidelity, twirled_petz_recover,
                   uhlmann_fidelity, uhlmann_petz_curve, uhlmann_petz_fidelity)
from .statevector import NormGuardError, cmi_dense, entropy_dense, measure_z, run_dense_mipt
