"""Geometric measure of entanglement for Grover-family states.

``E_n`` (any entanglement) is the distance to the closest fully separable
state and is found by numerical maximization over symmetric product states.
``E_2`` (genuine multipartite entanglement) uses the largest squared Schmidt
coefficient over bipartitions, available in closed form for the symmetric
one- and two-solution families.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import minimize_scalar

from .search import EffectiveState, SearchSpec, SolutionClass

ALPHA_GRID = 1024
BETA_GRID = 256
N_SEEDS = 3
MAX_REFINEMENTS = 200
OBJECTIVE_TOL = 1e-12
DISCRIMINANT_GUARD = 1e-12


class OptimizationError(RuntimeError):
    """The maximizer ran out of refinement budget before converging."""


class ConsistencyError(ArithmeticError):
    """A closed form received inputs outside its domain beyond rounding."""


@dataclass(frozen=True)
class ProductAnsatz:
    """Single-qubit state cos(alpha/2)|0> + e^{i beta} sin(alpha/2)|1>, repeated on every qubit."""

    alpha: float
    beta: float = 0.0

    @property
    def qubit(self) -> np.ndarray:
        return np.array([math.cos(self.alpha / 2),
                         np.exp(1j * self.beta) * math.sin(self.alpha / 2)])


@dataclass(frozen=True)
class OverlapMax:
    overlap_sq: float
    ansatz: ProductAnsatz

    @property
    def E(self) -> float:
        return max(0.0, 1.0 - self.overlap_sq)


def _require_symmetric(spec: SearchSpec):
    if spec.solution_class is SolutionClass.GENERIC:
        raise ValueError(f"no symmetric product ansatz for solutions {spec.solutions}")


def _overlap(c0, c1, n: int, M: int, alpha, beta):
    """Vectorized <psi|phi^(x)n> for the canonical symmetric instance."""
    c = np.cos(np.asarray(alpha) / 2)
    s = np.sin(np.asarray(alpha) / 2)
    ph = np.exp(1j * np.asarray(beta))
    total = (c + ph * s) ** n
    top = ph**n * s**n
    N = 2**n
    if M == 1:
        return np.conj(c0) / math.sqrt(N - 1) * (total - top) + np.conj(c1) * top
    bottom = c**n
    return (np.conj(c0) / math.sqrt(N - 2) * (total - bottom - top)
            + np.conj(c1) / math.sqrt(2) * (bottom + top))


def overlap_symmetric(state: EffectiveState, spec: SearchSpec, ansatz: ProductAnsatz) -> complex:
    """Overlap of the state with the product state ``ansatz`` on every qubit.

    The state is interpreted on the permutation-invariant representative of
    ``spec`` (|1...1> for one solution, {|0...0>, |1...1>} for a pair).
    """
    _require_symmetric(spec)
    return complex(_overlap(state.c0, state.c1, spec.n, spec.M, ansatz.alpha, ansatz.beta))


def _local_maxima(values: np.ndarray, periodic_last: bool) -> np.ndarray:
    """Flat indices of grid points not exceeded by any neighbour."""
    padded = values
    mask = np.ones(values.shape, dtype=bool)
    for axis in range(values.ndim):
        wrap = periodic_last and axis == values.ndim - 1
        for shift in (1, -1):
            rolled = np.roll(padded, shift, axis=axis)
            if not wrap:
                edge = [slice(None)] * values.ndim
                edge[axis] = 0 if shift == 1 else -1
                rolled[tuple(edge)] = -np.inf
            mask &= values >= rolled
    return np.flatnonzero(mask)


def _refine_1d(f, x0: float, h: float, lo: float | None, hi: float | None) -> tuple[float, float]:
    a = x0 - h if lo is None else max(lo, x0 - h)
    b = x0 + h if hi is None else min(hi, x0 + h)
    res = minimize_scalar(lambda x: -f(x), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-11, "maxiter": 500})
    x, val = float(res.x), -float(res.fun)
    if f(x0) > val:
        return x0, f(x0)
    return x, val


def maximize_overlap(state: EffectiveState, spec: SearchSpec, use_beta: bool | None = None) -> OverlapMax:
    """Multistart grid search plus coordinate refinement of |<psi|phi^(x)n>|^2.

    ``use_beta=None`` decides from the state: the phase is searched only when
    the dephased amplitudes leave the real non-negative cone.
    """
    _require_symmetric(spec)
    st = state.dephased()
    c0, c1, n, M = st.c0, st.c1, spec.n, spec.M
    if use_beta is None:
        use_beta = not st.is_real_nonnegative()

    def obj(alpha, beta):
        return np.abs(_overlap(c0, c1, n, M, alpha, beta)) ** 2

    alphas = np.linspace(0.0, math.pi, ALPHA_GRID)
    if use_beta:
        betas = np.arange(BETA_GRID) * (2 * math.pi / BETA_GRID)
        grid = obj(alphas[:, None], betas[None, :])
    else:
        betas = np.zeros(1)
        grid = obj(alphas[:, None], betas[None, :])
    peaks = _local_maxima(grid, periodic_last=use_beta)
    seeds = peaks[np.argsort(grid.ravel()[peaks])[::-1][:N_SEEDS]]

    h_alpha = math.pi / (ALPHA_GRID - 1)
    h_beta = 2 * math.pi / BETA_GRID
    best = OverlapMax(-1.0, ProductAnsatz(0.0))
    for flat in seeds:
        i, j = np.unravel_index(flat, grid.shape)
        a, b = float(alphas[i]), float(betas[j])
        val = float(grid[i, j])
        ha, hb = h_alpha, h_beta
        for _ in range(MAX_REFINEMENTS):
            prev = val
            a0, b0 = a, b
            a, val = _refine_1d(lambda x: float(obj(x, b)), a, ha, 0.0, math.pi)
            if use_beta:
                b, val = _refine_1d(lambda y: float(obj(a, y)), b, hb, None, None)
            if val - prev < OBJECTIVE_TOL:
                break
            # a step that hits the window edge means we are creeping along a ridge
            if abs(a - a0) > 0.9 * ha:
                ha = min(2 * ha, math.pi)
            if abs(b - b0) > 0.9 * hb:
                hb = min(2 * hb, math.pi)
        else:
            raise OptimizationError(
                f"overlap refinement did not converge in {MAX_REFINEMENTS} sweeps (n={n}, M={M})")
        # report the value actually attained at the returned point
        val = float(obj(a, b))
        if val > best.overlap_sq:
            best = OverlapMax(val, ProductAnsatz(a, b % (2 * math.pi)))
    return best


def E_n_symmetric(state: EffectiveState, spec: SearchSpec) -> float:
    """Geometric measure E_n via maximization over symmetric product states."""
    _require_symmetric(spec)
    if spec.M == 2 and abs(state.c0) < 1e-15:
        return 0.5  # GHZ
    return maximize_overlap(state, spec).E


def E_n_polynomial(state: EffectiveState, spec: SearchSpec) -> float:
    """E_n for one solution and real amplitudes via stationary points in t = tan(alpha/2).

    Writing the overlap as g(t) / (1 + t^2)^(n/2), stationary points solve
    (1 + t^2) g'(t) - n t g(t) = 0. Candidates are the real non-negative roots
    plus the endpoints alpha = 0 and alpha = pi.
    """
    if spec.M != 1:
        raise ValueError("polynomial path covers single-solution instances only")
    st = state.dephased()
    if not st.is_real_nonnegative():
        raise ValueError("polynomial path requires real non-negative amplitudes")
    n = spec.n
    A = st.c0.real / math.sqrt(2**n - 1)
    B = st.c1.real
    one_plus_t = Polynomial([1.0, 1.0])
    t_n = Polynomial.basis(n)
    g = A * (one_plus_t**n - t_n) + B * t_n
    stationary = Polynomial([1.0, 0.0, 1.0]) * g.deriv() - n * Polynomial([0.0, 1.0]) * g
    candidates = [0.0]
    for r in stationary.roots():
        if abs(r.imag) < 1e-9 and r.real >= 0:
            candidates.append(2 * math.atan(r.real))
    values = [abs(_overlap(st.c0, st.c1, n, 1, a, 0.0)) ** 2 for a in candidates]
    values.append(B**2)  # alpha = pi
    return max(0.0, 1.0 - max(values))


def _amplitudes(state: EffectiveState, spec: SearchSpec) -> tuple[complex, complex]:
    """Per-basis-state amplitude on non-solutions (A) and on each solution (B)."""
    N, M = spec.N, spec.M
    return state.c0 / math.sqrt(N - M), state.c1 / math.sqrt(M)


@dataclass(frozen=True)
class ReducedDensity:
    """Structured reduced state of the first ``m`` qubits.

    For one solution the 2^m x 2^m matrix is ``a`` everywhere except the last
    row/column (``b``) and last diagonal entry (``c``). For the antipodal pair
    both the first and last rows/columns carry ``b``, both corner diagonals
    ``c``, and the two off-diagonal corners ``d``. ``A`` and ``B`` are the
    amplitudes of a single non-solution and a single solution basis state.
    """

    n: int
    M: int
    m: int
    A: complex
    B: complex

    @property
    def a(self):
        return 2 ** (self.n - self.m) * abs(self.A) ** 2

    @property
    def b(self):
        return self.a - self.A * np.conj(self.A - self.B)

    @property
    def c(self):
        return self.a - abs(self.A) ** 2 + abs(self.B) ** 2

    @property
    def d(self):
        if self.M != 2:
            raise AttributeError("corner entry d exists only for the antipodal pair")
        return self.a - 2 * abs(self.A) ** 2 + 2 * np.real(self.A * np.conj(self.B))

    @property
    def trace(self) -> float:
        dim = 2**self.m
        if self.M == 1:
            return float(np.real((dim - 1) * self.a + self.c))
        return float(np.real((dim - 2) * self.a + 2 * self.c))

    def dense(self) -> np.ndarray:
        """Materialized 2^m x 2^m matrix; meant for small m only."""
        dim = 2**self.m
        rho = np.full((dim, dim), self.a, dtype=complex)
        edges = [dim - 1] if self.M == 1 else [0, dim - 1]
        for e in edges:
            rho[e, :] = np.conj(self.b)
            rho[:, e] = self.b
            rho[e, e] = self.c
        if self.M == 2:
            rho[0, dim - 1] = self.d
            rho[dim - 1, 0] = np.conj(self.d)
        return rho

    def _core(self) -> np.ndarray:
        """Amplitude matrix in orthonormal block bases of both parts.

        Basis on each side: first basis state, last basis state, and the
        normalized indicator of all remaining states (dropped when empty).
        """
        dp, dq = 2**self.m, 2 ** (self.n - self.m)
        A, B = self.A, self.B
        first = B if self.M == 2 else A
        wp, wq = math.sqrt(dp - 2), math.sqrt(dq - 2)
        core = np.array([
            [first, A, A * wq],
            [A, B, A * wq],
            [A * wp, A * wp, A * wp * wq],
        ], dtype=complex)
        keep_p = 3 if dp > 2 else 2
        keep_q = 3 if dq > 2 else 2
        return core[:keep_p, :keep_q]

    def spectrum(self) -> np.ndarray:
        """Non-zero part of the spectrum (at most 3 values), descending."""
        return np.linalg.svd(self._core(), compute_uv=False) ** 2


def reduced_density(state: EffectiveState, spec: SearchSpec, m: int) -> ReducedDensity:
    _require_symmetric(spec)
    if not 1 <= m <= spec.n - 1:
        raise ValueError(f"bipartition size {m} outside 1..{spec.n - 1}")
    A, B = _amplitudes(state.dephased(), spec)
    return ReducedDensity(spec.n, spec.M, m, complex(A), complex(B))


def max_schmidt_structured(state: EffectiveState, spec: SearchSpec) -> tuple[float, int]:
    """Largest reduced-state eigenvalue over bipartition sizes and the size attaining it."""
    best, best_m = -1.0, 0
    for m in range(1, spec.n // 2 + 1):
        lam = float(reduced_density(state, spec, m).spectrum()[0])
        if lam > best + 1e-15:
            best, best_m = lam, m
    return best, best_m


def E2_structured(state: EffectiveState, spec: SearchSpec) -> float:
    """E_2 from the structured spectra of every bipartition size; valid for complex states."""
    return max(0.0, 1.0 - max_schmidt_structured(state, spec)[0])


def _sqrt_discriminant(x: float) -> float:
    if x < 0:
        if x < -DISCRIMINANT_GUARD:
            raise ConsistencyError(f"negative discriminant {x}")
        return 0.0
    return math.sqrt(x)


def _real_amplitudes(state: EffectiveState) -> tuple[float, float]:
    st = state.dephased()
    if abs(st.c1.imag) > 1e-12:
        raise ValueError("closed forms need real amplitudes")
    return st.c0.real, st.c1.real


def lambda_max_m1(state: EffectiveState, spec: SearchSpec, m: int) -> float:
    """Largest eigenvalue of the m-qubit reduced state for one solution."""
    if spec.M != 1:
        raise ValueError("single-solution closed form")
    if not 1 <= m <= spec.n - 1:
        raise ValueError(f"bipartition size {m} outside 1..{spec.n - 1}")
    cos_k, sin_k = _real_amplitudes(state)
    n = spec.n
    A = cos_k / math.sqrt(2**n - 1)
    B = sin_k
    disc = 1 - 4 * (2**m - 1) * (2 ** (n - m) - 1) * A**2 * (A - B) ** 2
    return 0.5 + 0.5 * _sqrt_discriminant(disc)


def E2_m1(state: EffectiveState, spec: SearchSpec) -> float:
    """Closed-form E_2 for one solution."""
    if spec.M != 1:
        raise ValueError("single-solution closed form")
    cos_k, sin_k = _real_amplitudes(state)
    N = 2**spec.n
    disc = 1 - 4 * (N / 2 - 1) / (N - 1) * cos_k**2 * (cos_k / math.sqrt(N - 1) - sin_k) ** 2
    return 0.5 - 0.5 * _sqrt_discriminant(disc)


def E2_m2(state: EffectiveState, spec: SearchSpec) -> float:
    """Closed-form E_2 for the antipodal pair.

    The one-qubit marginal is [[c, d], [d, c]] with c = 1/2, so E_2 = 1 - c - |d|.
    For theta_k in [0, pi/2] the corner d is non-negative and this is
    1 - (N-4)/(N-2) cos^2 - (cos/sqrt(N-2) + sin/sqrt(2))^2. Past pi/2 (the
    last Grover step can overshoot on small registers) d turns negative and
    the sign flip is applied.
    """
    if spec.solution_class is not SolutionClass.ANTIPODAL_PAIR:
        raise ValueError("antipodal-pair closed form")
    cos_k, sin_k = _real_amplitudes(state)
    N = 2**spec.n
    value = (1 - (N - 4) / (N - 2) * cos_k**2
             - (cos_k / math.sqrt(N - 2) + sin_k / math.sqrt(2)) ** 2)
    A, B = cos_k / math.sqrt(N - 2), sin_k / math.sqrt(2)
    d = A * (N / 2 * A - 2 * A + 2 * B)
    return value + 2 * min(d, 0.0)


def E2_closed_form(state: EffectiveState, spec: SearchSpec) -> float:
    return E2_m1(state, spec) if spec.M == 1 else E2_m2(state, spec)


GHZ_CROSSOVER = math.acos(1 / math.sqrt(3))


def asymptotic_measures(theta_k: float, M: int) -> tuple[float, float]:
    """Large-n limits (E_n, E_2) as functions of the accumulated angle only."""
    s2, c2 = math.sin(theta_k) ** 2, math.cos(theta_k) ** 2
    if M == 1:
        e_n = s2 if theta_k <= math.pi / 4 else c2
        e_2 = 0.5 * (1 - math.sqrt(max(0.0, 1 - 0.5 * math.sin(2 * theta_k) ** 2)))
        return e_n, e_2
    if M == 2:
        e_n = s2 if theta_k <= GHZ_CROSSOVER else (1 + c2) / 2
        return e_n, s2 / 2
    raise ValueError(f"asymptotic forms exist for M in (1, 2), got {M}")


def E_n_bruteforce(amplitudes: np.ndarray, n: int, max_n: int = 4, starts: int = 24,
                   max_sweeps: int = 20000, tol: float = 1e-15, seed: int = 20240601) -> float:
    """E_n by alternating maximization over unconstrained product states.

    Each sweep replaces one qubit's state by the normalized contraction of the
    target with all other factors, which is the exact optimum for that factor.
    Starts: |0..0>, |1..1>, |+..+> and ``starts`` random product states.
    """
    if n > max_n:
        raise ValueError(f"brute-force product optimization limited to n <= {max_n}")
    psi = np.asarray(amplitudes, dtype=complex).reshape((2,) * n)
    rng = np.random.default_rng(seed)
    inits = [np.tile([1.0, 0.0], (n, 1)), np.tile([0.0, 1.0], (n, 1)),
             np.tile([1.0, 1.0], (n, 1)) / math.sqrt(2)]
    for _ in range(starts):
        v = rng.normal(size=(n, 2)) + 1j * rng.normal(size=(n, 2))
        inits.append(v / np.linalg.norm(v, axis=1, keepdims=True))

    best = 0.0
    for init in inits:
        factors = [np.asarray(f, dtype=complex) for f in init]
        val = -1.0
        for _ in range(max_sweeps):
            prev = val
            for j in range(n):
                t = psi.conj()
                for q in range(n - 1, -1, -1):
                    if q != j:
                        t = np.tensordot(t, factors[q], axes=([q], [0]))
                # t is now <psi| contracted with every factor except j
                vec = t.conj()
                norm = np.linalg.norm(vec)
                if norm == 0:
                    continue
                factors[j] = vec / norm
                val = norm**2
            if abs(val - prev) < tol:
                break
        else:
            raise OptimizationError(f"product-state sweeps did not converge in {max_sweeps}")
        best = max(best, val)
    return max(0.0, 1.0 - best)
