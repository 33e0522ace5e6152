"""Stabilizer-group entropies, CMI and the exact Petz fidelity of stabilizer states."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..gaussian.core import as_region
from .tableau import StabilizerTableau, gf2_echelon, gf2_rank


class RouteMismatchError(ArithmeticError):
    """The two exact fidelity routes disagree (indicates a bug)."""


@dataclass(frozen=True)
class RegionGroupRank:
    sites: tuple[int, ...]
    rank: int  # log2 |G_R|


def _sites(R) -> tuple[int, ...]:
    return tuple(as_region(R).sites)


def _restrict(tab: StabilizerTableau, sites) -> list[int]:
    """Stabilizer generators projected onto ``sites`` as bit-packed ints."""
    return tab.stabilizer_ints(order=sites)


def region_rank(tab: StabilizerTableau, R) -> RegionGroupRank:
    """``log2 |G_R|`` for the subgroup of stabilizers supported inside R."""
    sites = _sites(R)
    L = tab.num_qubits
    comp = [q for q in range(L) if q not in set(sites)]
    r = L - gf2_rank(_restrict(tab, comp)) if comp else L
    return RegionGroupRank(sites, r)


def region_entropy(tab: StabilizerTableau, R) -> int:
    """Entropy of rho_R in bits, ``|R| - log2|G_R|``."""
    sites = _sites(R)
    if not sites:
        return 0
    return len(sites) - region_rank(tab, sites).rank


def cmi_stabilizer(tab: StabilizerTableau, A, B, C) -> int:
    A, B, C = _sites(A), _sites(B), _sites(C)
    S = lambda R: region_entropy(tab, R)  # noqa: E731
    return S(A + B) + S(B + C) - S(B) - S(A + B + C)


def subgroup_basis(tab: StabilizerTableau, R) -> list[int]:
    """Explicit basis of G_R as full-system ints (bit 2q: x_q, bit 2q+1: z_q)."""
    sites = set(_sites(R))
    L = tab.num_qubits
    comp = [q for q in range(L) if q not in sites]
    inside = [q for q in range(L) if q in sites]
    order = inside + comp  # complement in the high bits
    n_in = 2 * len(inside)
    basis = [v for v in gf2_echelon(tab.stabilizer_ints(order=order)) if v >> n_in == 0]
    # back to the natural qubit order
    out = []
    for v in basis:
        w = 0
        for k, q in enumerate(order):
            w |= ((v >> (2 * k)) & 3) << (2 * q)
        out.append(w)
    return out


@dataclass(frozen=True)
class StabilizerFidelity:
    fidelity: float
    neg_log2_fidelity: float
    cmi_bits: int
    log2_recovered_group: int
    log2_group: int


def petz_fidelity_stabilizer(tab: StabilizerTableau, A, B, C) -> StabilizerFidelity:
    """Exact rotated-Petz fidelity (independent of t) of a stabilizer state.

    Route 1 builds the recovered group ``G_AB G_BC`` from explicit bases and
    uses ``F = sqrt(|G~|/|G_ABC|)``; route 2 is ``2^{-CMI/2}``.
    """
    A, B, C = _sites(A), _sites(B), _sites(C)
    g_ab = subgroup_basis(tab, A + B)
    g_bc = subgroup_basis(tab, B + C)
    log_tilde = gf2_rank(g_ab + g_bc)
    log_abc = region_rank(tab, A + B + C).rank
    nlf_1 = (log_abc - log_tilde) / 2
    cmi = cmi_stabilizer(tab, A, B, C)
    if 2 * nlf_1 != cmi:
        raise RouteMismatchError(f"rank route gives 2(-log F) = {2 * nlf_1}, CMI route {cmi}")
    return StabilizerFidelity(float(2.0 ** (-nlf_1)), nlf_1, cmi, log_tilde, log_abc)
