import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grover_entanglement import fullsim as fs
from grover_entanglement.gme import lambda_max_m1
from grover_entanglement.search import SearchSpec, grover_state, k_opt, pi3_failure_probability, pi3_state


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return fs.FullState(v / np.linalg.norm(v), n)


def test_init_uniform():
    np.testing.assert_allclose(fs.init_uniform(1).amplitudes, [1 / math.sqrt(2)] * 2, atol=1e-16)
    np.testing.assert_allclose(fs.init_uniform(2).amplitudes, [0.5] * 4, atol=1e-16)
    for n in range(1, 15):
        assert fs.init_uniform(n).norm == pytest.approx(1, abs=1e-15)
    for bad in (0, 15):
        with pytest.raises(fs.ResourceGuardError):
            fs.init_uniform(bad)


def test_full_state_is_immutable():
    s = fs.init_uniform(3)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 1


def test_apply_oracle():
    s = fs.init_uniform(2)
    out = fs.apply_oracle(s, [3], math.pi)
    np.testing.assert_allclose(out.amplitudes, [0.5, 0.5, 0.5, -0.5], atol=1e-15)
    one = fs.basis_state(2, 1)
    assert fs.apply_oracle(one, [1], math.pi / 3).amplitudes[1] == pytest.approx(np.exp(1j * math.pi / 3))
    twice = fs.apply_oracle(out, [3], math.pi)
    np.testing.assert_allclose(twice.amplitudes, s.amplitudes, atol=1e-15)


def test_apply_diffusion_eigenstructure():
    psi0 = fs.init_uniform(4)
    np.testing.assert_allclose(fs.apply_diffusion(psi0, math.pi).amplitudes, psi0.amplitudes, atol=1e-15)
    v = np.zeros(16, dtype=complex)
    v[0], v[1] = 1 / math.sqrt(2), -1 / math.sqrt(2)  # orthogonal to the uniform state
    orth = fs.FullState(v, 4)
    np.testing.assert_allclose(fs.apply_diffusion(orth, math.pi).amplitudes, -v, atol=1e-15)


def test_apply_diffusion_matches_dense_operator():
    s = random_state(5, 3)
    for phase in (math.pi, math.pi / 3, -math.pi / 3):
        dense = fs.diffusion_matrix(5, phase) @ s.amplitudes
        np.testing.assert_allclose(fs.apply_diffusion(s, phase).amplitudes, dense, atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(-math.pi, math.pi))
def test_gates_preserve_norm(n, seed, phase):
    s = random_state(n, seed)
    assert fs.apply_diffusion(s, phase).norm == pytest.approx(1, abs=1e-12)
    assert fs.apply_oracle(s, [0], phase).norm == pytest.approx(1, abs=1e-12)


def test_grover_full_examples():
    spec = SearchSpec.single(5)
    np.testing.assert_allclose(fs.grover_full(spec, 0).amplitudes, fs.init_uniform(5).amplitudes)
    out = fs.grover_full(SearchSpec.single(2), 1)
    np.testing.assert_allclose(np.abs(out.amplitudes), [0, 0, 0, 1], atol=1e-15)


def test_grover_full_twelve_qubits_projection():
    spec = SearchSpec.single(12)
    eff, residual = fs.project(spec, fs.grover_full(spec, 25))
    ref = grover_state(spec, 25)
    assert abs(eff.c0 - ref.c0) < 1e-10 and abs(eff.c1 - ref.c1) < 1e-10
    assert residual < 1e-12


def test_grover_full_guards():
    spec = SearchSpec.single(4)
    with pytest.raises(fs.ResourceGuardError):
        fs.grover_full(spec, 10 * k_opt(spec) + 1)


@pytest.mark.parametrize("spec", [SearchSpec.single(6, 9), SearchSpec(7, (3, 40, 99)), SearchSpec.antipodal(8, 17)])
def test_grover_full_stays_in_plane(spec):
    for k in range(0, 3 * k_opt(spec) + 1, 2):
        eff, residual = fs.project(spec, fs.grover_full(spec, k))
        assert residual < 1e-12
        assert eff.fidelity(grover_state(spec, k)) == pytest.approx(1, abs=1e-12)


def test_pi3_sequence_structure():
    assert fs.pi3_sequence(0) == ()
    assert fs.pi3_sequence(1) == (("U", math.pi / 3), ("I", math.pi / 3))
    seq2 = fs.pi3_sequence(2)
    # A_1, U, A_1^dag (reversed, inverted), I, A_1
    assert seq2 == (("U", math.pi / 3), ("I", math.pi / 3), ("U", math.pi / 3),
                    ("I", -math.pi / 3), ("U", -math.pi / 3), ("I", math.pi / 3),
                    ("U", math.pi / 3), ("I", math.pi / 3))
    for m in range(6):
        seq = fs.pi3_sequence(m)
        assert len(seq) == 3**m - 1
        assert sum(g == "U" for g, _ in seq) == (3**m - 1) // 2


def test_pi3_full_against_dense_recursion():
    # oracle: dense 2^n x 2^n matrices and the literal recursion A_{m+1} = A I A^dag U A
    n, spec = 4, SearchSpec(4, (5,))
    w = np.exp(1j * math.pi / 3)
    U = np.eye(16, dtype=complex)
    U[5, 5] = w
    I = fs.diffusion_matrix(n, math.pi / 3)
    A = np.eye(16, dtype=complex)
    for m in range(4):
        np.testing.assert_allclose(fs.pi3_full(spec, m).amplitudes, A @ fs.init_uniform(n).amplitudes,
                                   atol=1e-12)
        A = A @ I @ A.conj().T @ U @ A


@pytest.mark.parametrize("n", [3, 6, 10])
@pytest.mark.parametrize("M", [1, 2])
def test_pi3_full_failure_cubing(n, M):
    spec = SearchSpec.single(n) if M == 1 else SearchSpec.antipodal(n)
    for m in range(5):
        state = fs.pi3_full(spec, m)
        assert 1 - state.probability(spec.solutions) == pytest.approx(pi3_failure_probability(spec, m), abs=1e-10)
        eff, residual = fs.project(spec, state)
        ref = pi3_state(spec, m)
        assert max(abs(eff.c0 - ref.c0), abs(eff.c1 - ref.c1)) < 1e-10
        assert residual < 1e-12


def test_pi3_full_guards():
    with pytest.raises(fs.ResourceGuardError):
        fs.pi3_full(SearchSpec.single(11), 1)
    with pytest.raises(fs.ResourceGuardError):
        fs.pi3_full(SearchSpec.single(4), 6)


def test_schmidt_spectrum_product_and_ghz():
    rep = fs.schmidt_spectrum(fs.init_uniform(5), [1, 3])
    np.testing.assert_allclose(rep.singular_values_squared[0], 1, atol=1e-14)
    assert rep.rank == 1
    g = fs.ghz(6)
    for part in ([0], [2, 4], [0, 1, 5]):
        rep = fs.schmidt_spectrum(g, part)
        np.testing.assert_allclose(rep.singular_values_squared[:2], [0.5, 0.5], atol=1e-14)
        assert rep.rank == 2
        assert rep.singular_values_squared.sum() == pytest.approx(1, abs=1e-10)


def test_schmidt_spectrum_bit_order():
    # |0>|1>|0>... with qubit 0 the most significant bit: index 0b010 is qubit 1 set
    psi = np.zeros(8)
    psi[0b010] = 1 / math.sqrt(2)
    psi[0b110] = 1 / math.sqrt(2)  # qubit 0 in |+>, qubits 1, 2 fixed
    s = fs.FullState(psi, 3)
    assert fs.schmidt_spectrum(s, [0]).rank == 1
    assert fs.schmidt_spectrum(s, [1]).rank == 1
    mat = fs._reshape(s.amplitudes[None, :], 3, [0])[0]
    np.testing.assert_allclose(mat[:, 0b10], [1 / math.sqrt(2)] * 2)


def test_schmidt_spectrum_rejects_bad_parts():
    s = fs.init_uniform(3)
    for part in ([], [0, 1, 2], [3], [0, 0]):
        with pytest.raises(ValueError):
            fs.schmidt_spectrum(s, part)


@pytest.mark.parametrize("n", [5, 8])
def test_schmidt_largest_matches_closed_form(n):
    spec = SearchSpec.single(n)
    for k in range(k_opt(spec) + 1):
        full = fs.grover_full(spec, k)
        for m in range(1, n):
            top = fs.schmidt_spectrum(full, list(range(m))).largest
            assert top == pytest.approx(lambda_max_m1(grover_state(spec, k), spec, m), abs=1e-10)


def test_bipartition_enumeration():
    cuts = fs.bipartitions(5)
    assert len(cuts) == 2**4 - 1
    assert len(set(cuts)) == len(cuts)
    assert fs.bipartitions(7, symmetric=True) == [(0,), (0, 1), (0, 1, 2)]


def test_schmidt_rank_examples():
    assert fs.schmidt_rank_max(fs.init_uniform(6)) == 1
    spec = SearchSpec.single(7)
    for k in range(1, k_opt(spec)):
        assert fs.schmidt_rank_max(fs.grover_full(spec, k)) == 2
    pair = SearchSpec.antipodal(7)
    for k in range(k_opt(pair) + 1):
        assert fs.schmidt_rank_max(fs.grover_full(pair, k)) <= 3
    with pytest.raises(fs.ResourceGuardError):
        fs.schmidt_rank_max(fs.init_uniform(13))
    assert fs.schmidt_rank_max(fs.init_uniform(13), symmetric=True) == 1


def test_permutation_invariance_of_symmetric_states():
    for spec in (SearchSpec.single(6), SearchSpec.antipodal(6)):
        amps = fs.grover_full(spec, 3).amplitudes.reshape((2,) * 6)
        for a, b in ((0, 1), (2, 5), (1, 4)):
            axes = list(range(6))
            axes[a], axes[b] = axes[b], axes[a]
            np.testing.assert_array_equal(np.transpose(amps, axes), amps)


def test_embed_project_roundtrip():
    spec = SearchSpec(6, (4, 9, 33))
    st_ = grover_state(spec, 2)
    eff, residual = fs.project(spec, fs.embed(spec, st_))
    assert abs(eff.c0 - st_.c0) < 1e-15 and abs(eff.c1 - st_.c1) < 1e-15 and residual < 1e-15


def test_pauli_expand_single_strings():
    x, z = fs._PAULIS[1], fs._PAULIS[3]
    c = fs.pauli_expand(np.kron(z, x))
    assert c[3, 1] == pytest.approx(1)
    assert np.count_nonzero(np.abs(c) > 1e-12) == 1
    rng = np.random.default_rng(0)
    op = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    coeffs = fs.pauli_expand(op)
    rebuilt = sum(coeffs[a, b, c] * np.kron(np.kron(fs._PAULIS[a], fs._PAULIS[b]), fs._PAULIS[c])
                  for a in range(4) for b in range(4) for c in range(4))
    np.testing.assert_allclose(rebuilt, op, atol=1e-12)


def test_pauli_closure_identity_baseline():
    for n in (2, 4):
        rep = fs.pauli_closure_check(n, conjugator=np.eye(2**n))
        assert rep == {"is_in_pauli_group": True, "nonzero_pauli_terms": 1}


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_diffusion_leaves_pauli_group(n):
    rep = fs.pauli_closure_check(n)
    assert not rep["is_in_pauli_group"]
    assert rep["nonzero_pauli_terms"] > 1


def test_two_qubit_diffusion_is_clifford():
    # -(1 - 2|++><++|) is a CZ conjugated by X and H layers, so Z x 1 maps to -Z x X
    rep = fs.pauli_closure_check(2)
    assert rep == {"is_in_pauli_group": True, "nonzero_pauli_terms": 1}
    d = fs.diffusion_matrix(2)
    z1 = np.kron(fs._PAULIS[3], np.eye(2))
    np.testing.assert_allclose(d.conj().T @ z1 @ d, -np.kron(fs._PAULIS[3], fs._PAULIS[1]), atol=1e-14)


def test_pauli_closure_guard():
    for n in (1, 7):
        with pytest.raises(fs.ResourceGuardError):
            fs.pauli_closure_check(n)
