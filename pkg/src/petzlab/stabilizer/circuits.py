"""Monitored Clifford circuits and the toric-code state."""

from __future__ import annotations

import numpy as np

from ..dense.statevector import brickwork_pairs
from ..gaussian.core import InvalidInputError
from .clifford import random_two_qubit_clifford
from .tableau import StabilizerTableau


def run_clifford_mipt(L: int, p: float, T: int | None = None, seed=None,
                      rng: np.random.Generator | None = None) -> StabilizerTableau:
    """Brickwork of uniform two-qubit Cliffords (periodic) with Z measurements at rate ``p``."""
    if L < 2 or L % 2:
        raise InvalidInputError(f"need even L >= 2, got {L}")
    if not 0.0 <= p <= 1.0:
        raise InvalidInputError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed) if rng is None else rng
    T = 4 * L if T is None else T
    tab = StabilizerTableau.zero_state(L)
    for layer in range(T):
        for i, j in brickwork_pairs(L, layer):
            tab.apply_clifford2(random_two_qubit_clifford(rng), i, j)
        for site in range(L):
            if rng.random() < p:
                tab.measure_z(site, rng)
    return tab


def toric_edges(Lx: int, Ly: int):
    """Edge index maps: ``h[x, y]`` joins (x, y)-(x+1, y), ``v[x, y]`` joins (x, y)-(x, y+1)."""
    h = np.arange(Lx * Ly).reshape(Lx, Ly)
    v = Lx * Ly + np.arange(Lx * Ly).reshape(Lx, Ly)
    return h, v


def toric_code_state(Lx: int, Ly: int) -> StabilizerTableau:
    """Toric-code ground state with both logical Z loops fixed to +1."""
    if Lx < 2 or Ly < 2:
        raise InvalidInputError("torus must be at least 2x2")
    h, v = toric_edges(Lx, Ly)
    n = 2 * Lx * Ly
    xs, zs = [], []
    for x in range(Lx):
        for y in range(Ly):
            if (x, y) != (Lx - 1, Ly - 1):
                star = np.zeros(n, np.uint8)
                star[[h[x, y], h[x - 1, y], v[x, y], v[x, y - 1]]] = 1
                xs.append(star)
                zs.append(np.zeros(n, np.uint8))
                plaq = np.zeros(n, np.uint8)
                plaq[[h[x, y], h[x, (y + 1) % Ly], v[x, y], v[(x + 1) % Lx, y]]] = 1
                xs.append(np.zeros(n, np.uint8))
                zs.append(plaq)
    for loop in (h[:, 0], v[0, :]):
        zl = np.zeros(n, np.uint8)
        zl[loop] = 1
        xs.append(np.zeros(n, np.uint8))
        zs.append(zl)
    return StabilizerTableau.from_generators(np.array(xs), np.array(zs))


def _periodic_offset(a: float, c: float, size: int) -> float:
    d = (a - c) % size
    return d - size if d > size / 2 else d


def levin_wen_partition(Lx: int, Ly: int, center=(0, 0), r_in: float = 1.0, r_out: float = 1.5):
    """Annulus of edges around vertex ``center`` split into quadrant arcs.

    Edges whose midpoint lies at Chebyshev distance ``r_in <= d <= r_out`` from
    the centre form the annulus. A is the lower-left quadrant, C the
    upper-right one and B the remaining two quadrants, so A and C are opposite
    arcs separated by the two pieces of B: AB and BC are discs, B is two discs
    and ABC an annulus.

    The annulus must stay clear of the antipodal lattice lines
    (``r_out + 1/2 < min(Lx, Ly) / 2``). On a square torus it may touch them:
    its outer boundary is then the pair of lines through the antipodal vertex,
    which still bounds a disc (this is the 4x4 case with default radii).
    """
    if Lx < 4 or Ly < 4:
        raise InvalidInputError("Levin-Wen partition needs a torus of at least 4x4")
    clear = r_out + 0.5 < min(Lx, Ly) / 2
    touching = Lx == Ly and r_out < Lx / 2
    if r_in > r_out or not (clear or touching):
        raise InvalidInputError("annulus does not fit on the torus")
    h, v = toric_edges(Lx, Ly)
    A, B, C = [], [], []
    for x in range(Lx):
        for y in range(Ly):
            for e, (mx, my) in ((h[x, y], (x + 0.5, y)), (v[x, y], (x, y + 0.5))):
                dx = _periodic_offset(mx, center[0], Lx)
                dy = _periodic_offset(my, center[1], Ly)
                if not r_in <= max(abs(dx), abs(dy)) <= r_out:
                    continue
                if dx > 0 and dy >= 0:
                    C.append(int(e))
                elif dx < 0 and dy <= 0:
                    A.append(int(e))
                else:
                    B.append(int(e))
    return tuple(sorted(A)), tuple(sorted(B)), tuple(sorted(C))
