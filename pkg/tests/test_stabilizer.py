import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from oracles import cmi_from_rho, entropy_bits, fidelity, ghz, pauli_string, petz_recover, ptrace, stabilizer_projector
from petzlab.gaussian.core import InvalidInputError
from petzlab.stabilizer.circuits import levin_wen_partition, run_clifford_mipt, toric_code_state, toric_edges
from petzlab.stabilizer.clifford import NUM_CLIFFORD, Clifford2, random_two_qubit_clifford, symplectic_group
from petzlab.stabilizer.entropy import cmi_stabilizer, petz_fidelity_stabilizer, region_entropy, region_rank
from petzlab.stabilizer.tableau import StabilizerTableau, gf2_rank

seeds = st.integers(0, 2**32 - 1)


def ghz3_tableau():
    xs = [[1, 1, 1], [0, 0, 0], [0, 0, 0]]
    zs = [[0, 0, 0], [1, 1, 0], [0, 1, 1]]
    return StabilizerTableau.from_generators(xs, zs)


def dense_of(tab):
    """Independent dense state: the stabilizer projector applied to a fixed vector."""
    xs, zs, r = tab.stabilizers()
    P = stabilizer_projector(xs, zs, r)
    k = int(np.argmax(np.linalg.norm(P, axis=0)))
    psi = P[:, k]
    return psi / np.linalg.norm(psi)


def pauli_of_index(v):
    # bits (x1, x2, z1, z2); qubit 1 is the high tensor factor
    return pauli_string([v & 1, (v >> 1) & 1], [(v >> 2) & 1, (v >> 3) & 1])


# --- two-qubit Cliffords -----------------------------------------------------------------


def test_symplectic_group_order():
    # |Sp(4, 2)| = 2^4 (2^2 - 1)(2^4 - 1) = 720
    G = symplectic_group()
    assert len(G) == 720
    Omega = np.block([[np.zeros((2, 2)), np.eye(2)], [np.eye(2), np.zeros((2, 2))]]).astype(int)
    for S in G[::37]:
        assert np.array_equal((S.T @ Omega @ S) % 2, Omega)


def test_clifford_tables_distinct():
    tables = {tuple(np.concatenate(Clifford2.from_index(k).table())) for k in range(NUM_CLIFFORD)}
    assert len(tables) == NUM_CLIFFORD


def test_clifford_tables_match_unitaries():
    rng = np.random.default_rng(0)
    for _ in range(200):
        g = random_two_qubit_clifford(rng)
        U = g.unitary()
        assert np.abs(U.conj().T @ U - np.eye(4)).max() < 1e-12
        image, sign = g.table()
        for v in range(16):
            lhs = U @ pauli_of_index(v) @ U.conj().T
            rhs = (-1) ** int(sign[v]) * pauli_of_index(int(image[v]))
            assert np.abs(lhs - rhs).max() < 1e-12


def test_clifford_sampling_uniform():
    rng = np.random.default_rng(1)
    n = 10**6
    idx = np.array([random_two_qubit_clifford(rng).index for _ in range(n)])
    counts = np.bincount(idx, minlength=NUM_CLIFFORD)
    assert stats.chisquare(counts).pvalue > 1e-4
    ident = Clifford2.from_index(int(np.flatnonzero([np.array_equal(S, np.eye(4)) for S in symplectic_group()])[0]) * 16)
    assert abs(counts[ident.index] / n - 1 / 11520) < 5 * np.sqrt(1 / 11520 / n)


def test_clifford_determinism_and_closure():
    a = [random_two_qubit_clifford(np.random.default_rng(5)).index for _ in range(3)]
    b = [random_two_qubit_clifford(np.random.default_rng(5)).index for _ in range(3)]
    assert a == b
    tab = StabilizerTableau.zero_state(4)
    rng = np.random.default_rng(6)
    for _ in range(50):
        i, j = rng.choice(4, size=2, replace=False)
        tab.apply_clifford2(random_two_qubit_clifford(rng), int(i), int(j))
        tab.validate()


# --- measurement -----------------------------------------------------------------------


def test_measure_zero_state():
    tab = StabilizerTableau.zero_state(5)
    before = tab.copy()
    for q in range(5):
        assert tab.measure_z(q, np.random.default_rng(q)) == (0, False)
    assert np.array_equal(tab.x, before.x) and np.array_equal(tab.z, before.z)
    assert np.array_equal(tab.r, before.r)


def test_measure_plus_state_frequency():
    rng = np.random.default_rng(2)
    ones = 0
    n = 10**4
    for _ in range(n):
        tab = StabilizerTableau.from_generators([[1]], [[0]])
        bit, rand = tab.measure_z(0, rng)
        assert rand
        ones += bit
    assert abs(ones / n - 0.5) < 0.02


@settings(max_examples=30, deadline=None)
@given(seeds)
def test_measurement_puts_z_in_group(seed):
    rng = np.random.default_rng(seed)
    tab = run_clifford_mipt(6, 0.0, T=6, rng=rng)
    site = int(rng.integers(6))
    bit, _ = tab.measure_z(site, rng)
    tab.validate()
    assert tab.expectation_z(site) == 1 - 2 * bit
    xs, zs, _ = tab.stabilizers()
    ints = tab.stabilizer_ints()
    assert gf2_rank(ints + [1 << (2 * site + 1)]) == gf2_rank(ints)


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_tableau_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    L = 6
    tab = run_clifford_mipt(L, 0.2, T=8, rng=rng)
    psi = dense_of(tab)
    psi_pkg = tab.state_vector()
    assert abs(abs(np.vdot(psi, psi_pkg)) - 1) < 1e-10
    rho = np.outer(psi, psi.conj())
    for R in ([0], [1, 2], [0, 3, 4], [2, 3, 4, 5]):
        assert region_entropy(tab, R) == round(entropy_bits(ptrace(rho, R, L)))
        assert abs(region_entropy(tab, R) - entropy_bits(ptrace(rho, R, L))) < 1e-9


# --- entropies, CMI and fidelity ------------------------------------------------------------


def test_small_state_entropies():
    tab = StabilizerTableau.zero_state(4)
    assert all(region_entropy(tab, R) == 0 for R in ([0], [1, 2], [0, 1, 2, 3]))
    bell = StabilizerTableau.from_generators([[1, 1], [0, 0]], [[0, 0], [1, 1]])
    assert region_entropy(bell, [0]) == 1
    g = ghz3_tableau()
    assert region_entropy(g, [0, 1]) == 1
    assert 0 <= region_rank(g, [0, 1]).rank <= 2


def test_ghz3_against_dense_oracle():
    tab = ghz3_tableau()
    psi = ghz(3)
    assert abs(abs(np.vdot(dense_of(tab), psi)) - 1) < 1e-12
    rho = np.outer(psi, psi.conj())
    assert abs(cmi_from_rho(rho, [0], [1], [2], 3) - 1) < 1e-12
    assert cmi_stabilizer(tab, [0], [1], [2]) == 1
    F_dense = fidelity(petz_recover(rho, 2, 2, 2, 0.0), rho)
    fid = petz_fidelity_stabilizer(tab, [0], [1], [2])
    # frozen from the dense oracle: 2^{-1/2}
    assert abs(F_dense - 0.7071067811865476) < 1e-9
    assert abs(fid.fidelity - F_dense) < 1e-9
    assert fid.neg_log2_fidelity == 0.5 and fid.cmi_bits == 1


def test_markov_and_product():
    tab = StabilizerTableau.zero_state(3)
    assert cmi_stabilizer(tab, [0], [1], [2]) == 0
    assert petz_fidelity_stabilizer(tab, [0], [1], [2]).fidelity == 1.0
    # Bell pair on (0, 1) and a product qubit 2: A-B-C Markov
    bell = StabilizerTableau.from_generators([[1, 1, 0], [0, 0, 0], [0, 0, 0]], [[0, 0, 0], [1, 1, 0], [0, 0, 1]])
    assert petz_fidelity_stabilizer(bell, [0], [1], [2]).fidelity == 1.0


@pytest.mark.parametrize("L", [8, 12, 16])
def test_saturation_exact(L):
    rng = np.random.default_rng(L)
    for p in (0.05, 0.16, 0.4):
        tab = run_clifford_mipt(L, p, rng=rng)
        for _ in range(10):
            la, lb, lc = (int(v) for v in rng.integers(1, L // 3 + 1, size=3))
            s = int(rng.integers(L))
            A = [(s + k) % L for k in range(la)]
            B = [(s + la + k) % L for k in range(lb)]
            C = [(s + la + lb + k) % L for k in range(lc)]
            fid = petz_fidelity_stabilizer(tab, A, B, C)
            assert 2 * fid.neg_log2_fidelity == fid.cmi_bits
            assert fid.fidelity == 2.0 ** (-fid.cmi_bits / 2)


# --- circuits ----------------------------------------------------------------------------


def test_mipt_p1_is_product():
    tab = run_clifford_mipt(8, 1.0, seed=3)
    assert all(region_entropy(tab, [q]) == 0 for q in range(8))
    assert region_entropy(tab, range(4)) == 0


def test_mipt_volume_law():
    L = 16
    S = [region_entropy(run_clifford_mipt(L, 0.0, seed=s), range(L // 2)) for s in range(50)]
    assert abs(np.mean(S) - L / 2) < 1.5


def test_mipt_determinism_and_errors():
    a, b = run_clifford_mipt(8, 0.2, seed=9), run_clifford_mipt(8, 0.2, seed=9)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.z, b.z) and np.array_equal(a.r, b.r)
    with pytest.raises(InvalidInputError):
        run_clifford_mipt(7, 0.1)


# --- toric code ---------------------------------------------------------------------------


@pytest.mark.parametrize("Lx,Ly", [(4, 4), (6, 6), (5, 6)])
def test_toric_code_levin_wen(Lx, Ly):
    tab = toric_code_state(Lx, Ly)
    tab.validate()
    n = 2 * Lx * Ly
    h, v = toric_edges(Lx, Ly)
    ints = tab.stabilizer_ints()
    assert gf2_rank(ints) == n
    # every star and plaquette lies in the group with sign +1
    for x in range(Lx):
        for y in range(Ly):
            star = sum(1 << (2 * int(e)) for e in (h[x, y], h[x - 1, y], v[x, y], v[x, y - 1]))
            plaq = sum(1 << (2 * int(e) + 1) for e in (h[x, y], h[x, (y + 1) % Ly], v[x, y], v[(x + 1) % Lx, y]))
            assert gf2_rank(ints + [star]) == n and gf2_rank(ints + [plaq]) == n
    assert region_entropy(tab, range(n)) == 0
    A, B, C = levin_wen_partition(Lx, Ly)
    assert not (set(A) & set(B)) and not (set(B) & set(C)) and not (set(A) & set(C))
    assert cmi_stabilizer(tab, A, B, C) == 2
    assert petz_fidelity_stabilizer(tab, A, B, C).fidelity == 0.5


def test_levin_wen_too_small():
    with pytest.raises(InvalidInputError):
        levin_wen_partition(3, 4)
    with pytest.raises(InvalidInputError):
        levin_wen_partition(4, 6)
