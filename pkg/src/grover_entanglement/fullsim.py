"""Full 2^n statevector simulation, used as an independent oracle.

Bit order: qubit 0 is the most significant bit of a basis index. A
bipartition ``part`` reshapes the amplitudes into a matrix whose row index is
built from the bits of ``part`` in ascending qubit order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .search import EffectiveState, SearchSpec, k_opt

MAX_QUBITS = 14
PI3_MAX_QUBITS = 10
PI3_MAX_DEPTH = 5
PAULI_MAX_QUBITS = 6


class ResourceGuardError(ValueError):
    """Requested simulation exceeds the configured size limits."""


@dataclass(frozen=True)
class FullState:
    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n,):
            raise ValueError(f"expected {2**self.n} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probability(self, indices) -> float:
        return float(np.sum(np.abs(self.amplitudes[list(indices)]) ** 2))


@dataclass(frozen=True)
class SchmidtReport:
    bipartition: tuple[int, ...]
    singular_values_squared: np.ndarray = field(repr=False)
    rank: int

    @property
    def largest(self) -> float:
        return float(self.singular_values_squared[0])


def _check_n(n: int, limit: int = MAX_QUBITS):
    if not 1 <= n <= limit:
        raise ResourceGuardError(f"qubit count {n} outside supported range 1..{limit}")


def init_uniform(n: int) -> FullState:
    _check_n(n)
    return FullState(np.full(2**n, 2 ** (-n / 2), dtype=complex), n)


def basis_state(n: int, index: int) -> FullState:
    _check_n(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[index] = 1.0
    return FullState(amps, n)


def ghz(n: int) -> FullState:
    _check_n(n)
    amps = np.zeros(2**n, dtype=complex)
    amps[0] = amps[-1] = 1 / math.sqrt(2)
    return FullState(amps, n)


def apply_oracle(state: FullState, solutions, phase: float) -> FullState:
    """Multiply the solution amplitudes by exp(i*phase)."""
    amps = state.amplitudes.copy()
    amps[list(solutions)] *= np.exp(1j * phase)
    return FullState(amps, state.n)


def apply_diffusion(state: FullState, phase: float) -> FullState:
    """Apply -(1 - (1 - e^{i phase}) |psi0><psi0|) through the mean amplitude."""
    amps = state.amplitudes
    mean = amps.mean()
    return FullState(-(amps - (1 - np.exp(1j * phase)) * mean), state.n)


def grover_full(spec: SearchSpec, k: int) -> FullState:
    """``k`` Grover iterations G = I U applied to the uniform state."""
    _check_n(spec.n)
    if not 0 <= k <= 10 * max(k_opt(spec), 1):
        raise ResourceGuardError(f"iteration count {k} outside 0..10*k_opt")
    state = init_uniform(spec.n)
    for _ in range(k):
        state = apply_diffusion(apply_oracle(state, spec.solutions, math.pi), math.pi)
    return state


@lru_cache(maxsize=None)
def pi3_sequence(m: int) -> tuple[tuple[str, float], ...]:
    """Gates of A_m in application order, as ``("U"|"I", phase)`` pairs.

    A_{m+1} = A_m I A_m^dagger U A_m, so A_m acts first and the inverse block is
    the reversed sequence with negated phases.
    """
    if m == 0:
        return ()
    prev = pi3_sequence(m - 1)
    inverse = tuple((g, -p) for g, p in reversed(prev))
    return prev + (("U", math.pi / 3),) + inverse + (("I", math.pi / 3),) + prev


def pi3_full(spec: SearchSpec, m: int) -> FullState:
    _check_n(spec.n, PI3_MAX_QUBITS)
    if not 0 <= m <= PI3_MAX_DEPTH:
        raise ResourceGuardError(f"recursion depth {m} outside 0..{PI3_MAX_DEPTH}")
    state = init_uniform(spec.n)
    for gate, phase in pi3_sequence(m):
        if gate == "U":
            state = apply_oracle(state, spec.solutions, phase)
        else:
            state = apply_diffusion(state, phase)
    return state


def _solution_mask(spec: SearchSpec) -> np.ndarray:
    mask = np.zeros(spec.N, dtype=bool)
    mask[list(spec.solutions)] = True
    return mask


def embed(spec: SearchSpec, state: EffectiveState) -> FullState:
    """Full vector c0 |X0> + c1 |X1>."""
    _check_n(spec.n)
    mask = _solution_mask(spec)
    amps = np.full(spec.N, state.c0 / math.sqrt(spec.N - spec.M), dtype=complex)
    amps[mask] = state.c1 / math.sqrt(spec.M)
    return FullState(amps, spec.n)


def project(spec: SearchSpec, state: FullState) -> tuple[EffectiveState, float]:
    """Components on |X0>, |X1> and the norm of the remainder outside their span."""
    mask = _solution_mask(spec)
    amps = state.amplitudes
    c0 = amps[~mask].sum() / math.sqrt(spec.N - spec.M)
    c1 = amps[mask].sum() / math.sqrt(spec.M)
    eff = EffectiveState(complex(c0), complex(c1))
    residual = np.linalg.norm(amps - embed(spec, eff).amplitudes)
    return eff, float(residual)


def _reshape(amps: np.ndarray, n: int, part) -> np.ndarray:
    part = sorted(part)
    if not part or len(part) >= n or part[0] < 0 or part[-1] >= n or len(set(part)) != len(part):
        raise ValueError(f"invalid bipartition {part} for {n} qubits")
    rest = [q for q in range(n) if q not in part]
    t = amps.reshape((-1,) + (2,) * n)
    t = np.transpose(t, [0] + [q + 1 for q in part] + [q + 1 for q in rest])
    return t.reshape(amps.shape[0], 2 ** len(part), 2 ** (n - len(part)))


def schmidt_spectrum(state: FullState, part, tol: float = 1e-10) -> SchmidtReport:
    """Squared Schmidt coefficients across ``part : rest``, in descending order."""
    mat = _reshape(state.amplitudes[None, :], state.n, part)[0]
    s2 = np.linalg.svd(mat, compute_uv=False) ** 2
    return SchmidtReport(tuple(sorted(part)), s2, int(np.count_nonzero(s2 > tol)))


def bipartitions(n: int, symmetric: bool = False):
    """Every distinct cut once (parts containing qubit 0), or the first-m cuts if ``symmetric``."""
    if symmetric:
        return [tuple(range(m)) for m in range(1, n // 2 + 1)]
    cuts = []
    for size in range(1, n):
        for rest in itertools.combinations(range(1, n), size - 1):
            cuts.append((0,) + rest)
    return cuts


def batched_schmidt_values(amps: np.ndarray, n: int, part) -> np.ndarray:
    """Squared singular values for a stack of states with shape ``(batch, 2**n)``."""
    mats = _reshape(np.atleast_2d(amps), n, part)
    return np.linalg.svd(mats, compute_uv=False) ** 2


def max_schmidt_value(states, n: int | None = None, symmetric: bool = False) -> np.ndarray | float:
    """Largest squared Schmidt coefficient over all bipartitions.

    Accepts a FullState or a ``(batch, 2**n)`` amplitude array; the batched
    form returns one value per row.
    """
    if isinstance(states, FullState):
        return float(max_schmidt_value(states.amplitudes[None, :], states.n, symmetric)[0])
    amps = np.atleast_2d(states)
    best = np.zeros(amps.shape[0])
    for part in bipartitions(n, symmetric):
        best = np.maximum(best, batched_schmidt_values(amps, n, part)[:, 0])
    return best


def e2_bruteforce(state: FullState, symmetric: bool = False) -> float:
    """1 minus the largest squared Schmidt coefficient over bipartitions."""
    return 1.0 - max_schmidt_value(state, symmetric=symmetric)


def schmidt_rank_max(state: FullState, tol: float = 1e-10, symmetric: bool = False) -> int:
    """Maximal Schmidt rank over bipartitions, counting squared values above ``tol``."""
    if not symmetric and state.n > 12:
        raise ResourceGuardError("full bipartition enumeration limited to n <= 12")
    amps = state.amplitudes[None, :]
    return max(int(np.count_nonzero(batched_schmidt_values(amps, state.n, part)[0] > tol))
               for part in bipartitions(state.n, symmetric))


def diffusion_matrix(n: int, phase: float = math.pi) -> np.ndarray:
    N = 2**n
    psi0 = np.full(N, 1 / math.sqrt(N))
    return -(np.eye(N) - (1 - np.exp(1j * phase)) * np.outer(psi0, psi0))


_PAULIS = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


def pauli_expand(op: np.ndarray) -> np.ndarray:
    """Coefficients Tr(P op)/2^n over Pauli strings, as an array of shape ``(4,)*n``.

    Index 0..3 on each axis stands for 1, X, Y, Z on that qubit.
    """
    dim = op.shape[0]
    n = int(round(math.log2(dim)))
    t = op.reshape((2,) * (2 * n))
    # interleave (row_j, col_j) pairs and contract each with the Pauli basis
    order = [ax for j in range(n) for ax in (j, n + j)]
    t = np.transpose(t, order).reshape((4,) * n)
    basis = _PAULIS.transpose(0, 2, 1).reshape(4, 4) / 2  # Tr(P A) = sum P[c,r] A[r,c]
    for j in range(n):
        t = np.moveaxis(np.tensordot(basis, t, axes=([1], [j])), 0, j)
    return t


def pauli_closure_check(n: int, conjugator: np.ndarray | None = None, tol: float = 1e-10) -> dict:
    """Whether conjugating Z x 1^(n-1) by the diffusion operator stays a Pauli string."""
    if not 2 <= n <= PAULI_MAX_QUBITS:
        raise ResourceGuardError(f"Pauli expansion supported for 2 <= n <= {PAULI_MAX_QUBITS}")
    g = diffusion_matrix(n) if conjugator is None else conjugator
    z_first = np.kron(_PAULIS[3], np.eye(2 ** (n - 1)))
    coeffs = pauli_expand(g.conj().T @ z_first @ g)
    nonzero = np.abs(coeffs) > tol
    count = int(np.count_nonzero(nonzero))
    in_group = count == 1 and abs(abs(coeffs[nonzero][0]) - 1) < tol
    return {"is_in_pauli_group": bool(in_group), "nonzero_pauli_terms": count}
