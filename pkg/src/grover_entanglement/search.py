"""Two-dimensional effective dynamics of Grover search and of the pi/3 fixed-point search.

Both algorithms keep the register inside span{|X0>, |X1>}, where |X0> is the
uniform superposition of non-solutions and |X1> the uniform superposition of
solutions. States are therefore stored as an amplitude pair ``(c0, c1)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

#: Recursion depth cap for the 2x2 pi/3 path.
PI3_MAX_DEPTH = 12

_PI3_PHASE = np.exp(1j * math.pi / 3)


class SolutionClass(enum.Enum):
    SYMMETRIC_SINGLE = "SymmetricSingle"
    ANTIPODAL_PAIR = "AntipodalPair"
    GENERIC = "Generic"


@dataclass(frozen=True)
class SearchSpec:
    """A search instance: ``n`` qubits and the set of marked basis indices.

    Qubit 0 is the most significant bit of a basis index.
    """

    n: int
    solutions: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"qubit count must be a positive integer, got {self.n!r}")
        sols = tuple(sorted(int(s) for s in self.solutions))
        if not sols:
            raise ValueError("at least one solution is required")
        if len(set(sols)) != len(sols):
            raise ValueError(f"duplicate solution indices in {self.solutions!r}")
        if sols[0] < 0 or sols[-1] >= 2**self.n:
            raise ValueError(f"solution indices must lie in [0, {2**self.n})")
        if len(sols) >= 2**self.n:
            raise ValueError("need M < N: at least one basis state must be unmarked")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "solutions", sols)

    @classmethod
    def single(cls, n: int, index: int | None = None) -> "SearchSpec":
        """One solution; defaults to |1...1>."""
        return cls(n, (2**n - 1 if index is None else index,))

    @classmethod
    def antipodal(cls, n: int, index: int = 0) -> "SearchSpec":
        """Two solutions differing in every bit; defaults to {|0...0>, |1...1>}."""
        return cls(n, (index, index ^ (2**n - 1)))

    @property
    def N(self) -> int:
        return 2**self.n

    @property
    def M(self) -> int:
        return len(self.solutions)

    @property
    def ratio(self) -> float:
        return self.M / self.N

    @property
    def solution_class(self) -> SolutionClass:
        # Any single solution is a bit-flip image of |1...1>, and bit flips are
        # local unitaries, so every M=1 instance shares the symmetric entanglement.
        if self.M == 1:
            return SolutionClass.SYMMETRIC_SINGLE
        if self.M == 2 and self.solutions[0] ^ self.solutions[1] == self.N - 1:
            return SolutionClass.ANTIPODAL_PAIR
        return SolutionClass.GENERIC

    @property
    def is_canonical(self) -> bool:
        """True for the permutation-invariant representatives |1..1> and {|0..0>, |1..1>}."""
        return self == self.canonical()

    def canonical(self) -> "SearchSpec":
        """Permutation-invariant representative with the same entanglement dynamics."""
        cls_ = self.solution_class
        if cls_ is SolutionClass.SYMMETRIC_SINGLE:
            return SearchSpec.single(self.n)
        if cls_ is SolutionClass.ANTIPODAL_PAIR:
            return SearchSpec.antipodal(self.n)
        raise ValueError(f"no symmetric representative for solutions {self.solutions}")


@dataclass(frozen=True)
class EffectiveState:
    """Amplitudes on |X0> (non-solutions) and |X1> (solutions)."""

    c0: complex
    c1: complex

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.c0, self.c1], dtype=complex)

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.c0) ** 2 + abs(self.c1) ** 2)

    @property
    def success(self) -> float:
        return success_probability(self)

    def dephased(self) -> "EffectiveState":
        """Same ray with the global phase chosen so that ``c0`` is real and non-negative."""
        ref = self.c0 if abs(self.c0) > 1e-15 else self.c1
        phase = np.conj(ref) / abs(ref)
        return EffectiveState(complex(self.c0 * phase), complex(self.c1 * phase))

    def is_real_nonnegative(self, tol: float = 1e-12) -> bool:
        """Whether the dephased amplitudes are both real and >= 0 within ``tol``."""
        s = self.dephased()
        return (abs(s.c0.imag) <= tol and abs(s.c1.imag) <= tol
                and s.c0.real >= -tol and s.c1.real >= -tol)

    def fidelity(self, other: "EffectiveState") -> float:
        """|<self|other>|, which is 1 for states equal up to global phase."""
        return float(abs(np.vdot(self.vector, other.vector)))


@dataclass(frozen=True)
class GroverAngle:
    theta: float
    theta_approx: float


def grover_angle(spec: SearchSpec) -> GroverAngle:
    """Rotation angle per Grover iteration, exact and in the small M/N limit."""
    r = spec.ratio
    if not 0 < r < 1:
        raise ValueError(f"need 1 <= M < N, got M={spec.M}, N={spec.N}")
    return GroverAngle(2 * math.asin(math.sqrt(r)), 2 * math.sqrt(r))


def closest_integer(x: float) -> int:
    # half-up tie breaking
    return math.floor(x + 0.5)


def k_opt(spec: SearchSpec) -> int:
    """Optimal iteration count CI[(pi/theta - 1)/2] with the exact angle."""
    theta = grover_angle(spec).theta
    return closest_integer((math.pi / theta - 1) / 2)


def grover_state(spec: SearchSpec, k: int, exact_angle: bool = True) -> EffectiveState:
    """State after ``k`` Grover iterations, ``(cos theta_k, sin theta_k)``.

    ``exact_angle=False`` uses the small M/N angle instead; it exists for
    negative controls and is never the default.
    """
    if k < 0:
        raise ValueError(f"iteration count must be non-negative, got {k}")
    ang = grover_angle(spec)
    theta = ang.theta if exact_angle else ang.theta_approx
    theta_k = (k + 0.5) * theta
    return EffectiveState(complex(math.cos(theta_k)), complex(math.sin(theta_k)))


def theta_k(spec: SearchSpec, k: int) -> float:
    return (k + 0.5) * grover_angle(spec).theta


def success_probability(state: EffectiveState) -> float:
    return abs(state.c1) ** 2


def initial_state(spec: SearchSpec) -> EffectiveState:
    return EffectiveState(complex(math.sqrt((spec.N - spec.M) / spec.N)),
                          complex(math.sqrt(spec.M / spec.N)))


def pi3_operators(spec: SearchSpec) -> tuple[np.ndarray, np.ndarray]:
    """Effective-basis matrices of the pi/3 oracle and pi/3 inversion about the mean."""
    psi0 = initial_state(spec).vector
    u_eff = np.diag([1.0, _PI3_PHASE]).astype(complex)
    i_eff = -(np.eye(2) - (1 - _PI3_PHASE) * np.outer(psi0, psi0.conj()))
    return u_eff, i_eff


def pi3_unitary(spec: SearchSpec, m: int) -> np.ndarray:
    """Effective 2x2 matrix of the recursive sequence A_m."""
    if m < 0:
        raise ValueError(f"recursion depth must be non-negative, got {m}")
    if m > PI3_MAX_DEPTH:
        raise ValueError(f"recursion depth {m} exceeds cap {PI3_MAX_DEPTH}")
    u_eff, i_eff = pi3_operators(spec)
    a = np.eye(2, dtype=complex)
    for _ in range(m):
        a = a @ i_eff @ a.conj().T @ u_eff @ a
    return a


def pi3_state(spec: SearchSpec, m: int) -> EffectiveState:
    """State A_m |psi0> after ``m`` levels of the pi/3 recursion."""
    vec = pi3_unitary(spec, m) @ initial_state(spec).vector
    vec = vec / np.linalg.norm(vec)
    return EffectiveState(complex(vec[0]), complex(vec[1]))


def pi3_oracle_calls(m: int) -> int:
    """Oracle queries made by A_m: u(0) = 0, u(m+1) = 3 u(m) + 1."""
    if m < 0:
        raise ValueError(f"recursion depth must be non-negative, got {m}")
    return (3**m - 1) // 2


def pi3_failure_probability(spec: SearchSpec, m: int) -> float:
    """Closed-form failure probability ((N-M)/N)^(3^m)."""
    return ((spec.N - spec.M) / spec.N) ** (3**m)
