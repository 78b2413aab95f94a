"""Discrete quantum Levy processes and convolution semigroups of states.

A *-homomorphic one-step map psi on khat generates a discrete process on
khat^(x)N: the increment over steps [m, n[ places the (n-m)-fold
convolution iterate of psi on legs m..n-1 and acts as the identity
elsewhere.  Vacuum expectations

    lam_{m,n}(b) = <Omega, J_{m,n}(b) Omega>,  Omega = e0^(x)N

then form a stationary convolution family whose axioms (composition,
identity at equal times, stationarity, factorization over disjoint
intervals) are verified exactly on the materialized matrices.  This module
is deliberately brute force; it is the small-scale oracle for the
factorized walk computations.

The weak-continuity axiom has no content in discrete time and is reported
as the one-step distance for information only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .bialgebra import Bialgebra, functional_is_state, function_algebra, group_identity
from .convolution import KernelMap, conv_exp, convolve, kernel_power
from .errors import BudgetError, PreconditionError, ShapeError
from .schurmann import check_generating

TENSOR_BUDGET = 4096


@dataclass
class DiscreteLevyProcess:
    """An N-step process from a *-homomorphic one-step map.

    The increment cache is write-once per (m, n) key with idempotent fill;
    concurrent readers are safe.
    """

    algebra: Bialgebra
    psi: KernelMap
    N: int
    budget: int = TENSOR_BUDGET
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.psi.dim != self.algebra.dim:
            raise ShapeError("one-step map and algebra dimensions differ")
        if self.N < 0:
            raise PreconditionError("N must be nonnegative")
        dim_total = self.psi.target_dim ** self.N
        if dim_total > self.budget:
            raise BudgetError(
                f"full space has dimension {dim_total}, budget is {self.budget}")
        B, psi = self.algebra, self.psi
        mult = np.einsum("iab,jbc->ijac", psi.blocks, psi.blocks) \
            - np.einsum("ijk,kac->ijac", B.mult, psi.blocks)
        star = np.conj(psi.blocks.transpose(0, 2, 1)) \
            - np.einsum("ik,kab->iab", B.invol, psi.blocks)
        defect = max(float(np.max(np.abs(mult))), float(np.max(np.abs(star))))
        if defect > 1e-10:
            raise PreconditionError(
                f"one-step map is not *-homomorphic: defect {defect:.2e}")

    @property
    def leg_dim(self) -> int:
        return self.psi.target_dim

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.leg_dim ** self.N, dtype=complex)
        v[0] = 1.0
        return v

    def basis_increments(self, m: int, n: int) -> np.ndarray:
        """J_{m,n}(e_i) for all i, as matrices on the full space."""
        if not (0 <= m <= n <= self.N):
            raise PreconditionError("need 0 <= m <= n <= N")
        key = (m, n)
        if key not in self._cache:
            power = kernel_power(self.algebra, self.psi, n - m)
            pre = np.eye(self.leg_dim ** m, dtype=complex)
            post = np.eye(self.leg_dim ** (self.N - n), dtype=complex)
            placed = np.stack([np.kron(np.kron(pre, blk), post)
                               for blk in power.blocks])
            self._cache[key] = placed
        return self._cache[key]

    def increment(self, m: int, n: int, b) -> np.ndarray:
        """J_{m,n}(b) as a matrix on khat^(x)N."""
        return np.einsum("i,iab->ab", np.asarray(b, complex),
                         self.basis_increments(m, n))

    def vacuum_functional(self, m: int, n: int) -> np.ndarray:
        """lam_{m,n}: values <Omega, J_{m,n}(e_i) Omega> on the basis."""
        return self.basis_increments(m, n)[:, 0, 0].copy()


def discrete_increment(P: DiscreteLevyProcess, m: int, n: int, b) -> np.ndarray:
    return P.increment(m, n, b)


@dataclass(frozen=True)
class AxiomReport:
    residuals: dict[str, float]
    one_step_distance: float
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())


def verify_wqlp_axioms(P: DiscreteLevyProcess, tol: float = 1e-10,
                       max_pairs: int | None = None) -> AxiomReport:
    """Exact residuals of the weak Levy-process axioms on the discrete process.

    (i) increment composition, (ii) identity at equal times,
    (iii) stationarity, (iv) vacuum factorization over disjoint step
    intervals; weak continuity is reported as the one-step distance only.
    """
    B, N = P.algebra, P.N
    lam = {(m, n): P.vacuum_functional(m, n)
           for m in range(N + 1) for n in range(m, N + 1)}

    comp = 0.0
    for r in range(N + 1):
        for s in range(r, N + 1):
            for t in range(s, N + 1):
                defect = lam[(r, t)] - convolve(B, lam[(r, s)], lam[(s, t)])
                comp = max(comp, float(np.max(np.abs(defect))))
    ident = max(float(np.max(np.abs(lam[(t, t)] - B.counit)))
                for t in range(N + 1))
    stat = 0.0
    for m in range(N + 1):
        for n in range(m, N + 1):
            defect = lam[(m, n)] - lam[(0, n - m)]
            stat = max(stat, float(np.max(np.abs(defect))))

    indep = 0.0
    vac = P.vacuum()
    pairs = [((m1, n1), (m2, n2))
             for m1 in range(N + 1) for n1 in range(m1, N + 1)
             for m2 in range(N + 1) for n2 in range(m2, N + 1)
             if n1 <= m2 or n2 <= m1]
    if max_pairs is not None:
        pairs = pairs[:max_pairs]
    for (m1, n1), (m2, n2) in pairs:
        J1 = P.basis_increments(m1, n1)
        J2 = P.basis_increments(m2, n2)
        for i in range(B.dim):
            row = J1[i][0, :]
            for j in range(B.dim):
                joint = complex(row @ J2[j][:, 0])
                split = complex(lam[(m1, n1)][i] * lam[(m2, n2)][j])
                indep = max(indep, abs(joint - split))

    one_step = float(np.max(np.abs(lam[(0, min(1, N))] - B.counit))) if N else 0.0
    return AxiomReport(
        residuals={"increment_composition": comp, "identity_at_equal_times": ident,
                   "stationarity": stat, "independence": indep},
        one_step_distance=one_step, tol=tol)


# -- convolution semigroups of states ---------------------------------------


@dataclass(frozen=True)
class StateSemigroupReport:
    times: tuple[float, ...]
    unit_defects: tuple[float, ...]
    gram_min_eigs: tuple[float, ...]
    semigroup_defects: tuple[float, ...]
    tol: float

    @property
    def passed(self) -> bool:
        return (all(u <= self.tol for u in self.unit_defects)
                and all(g >= -self.tol for g in self.gram_min_eigs)
                and all(s <= self.tol for s in self.semigroup_defects))


def semigroup_of_states(B: Bialgebra, gamma, time_grid,
                        tol: float = 1e-9) -> tuple[list[np.ndarray], StateSemigroupReport]:
    """States exp_*(t gamma) on a grid, with certification.

    Requires gamma to pass the generating-functional check; certifies each
    grid functional as a state and the semigroup law on adjacent grid pairs.
    """
    gamma = np.asarray(gamma, complex)
    report = check_generating(B, gamma, tol=tol)
    if not report.passed:
        raise PreconditionError(
            f"not a generating functional: reality={report.reality_defect:.2e}, "
            f"min_eig={report.cond_pos_min_eig:.2e}, unit={report.unit_value:.2e}")
    times = [float(t) for t in time_grid]
    if any(t < 0 for t in times):
        raise PreconditionError("grid times must be nonnegative")
    states = [conv_exp(B, gamma, t) for t in times]
    unit_defects = []
    gram_eigs = []
    for lam in states:
        w = functional_is_state(B, lam, tol=tol)
        unit_defects.append(abs(w.unit_value - 1.0))
        gram_eigs.append(w.gram_min_eig)
    semi = []
    for (t0, lam0), (t1, lam1) in zip(zip(times, states), zip(times[1:], states[1:])):
        step = conv_exp(B, gamma, t1 - t0)
        semi.append(float(np.max(np.abs(convolve(B, lam0, step) - lam1))))
    return states, StateSemigroupReport(tuple(times), tuple(unit_defects),
                                        tuple(gram_eigs), tuple(semi), tol)


def classical_rate_matrix(table, gamma) -> np.ndarray:
    """Generator of the classical chain on G induced by a functional on F(G).

    Jump rates are the values on the non-identity indicators; the chain
    multiplies the current group element on the right.  Acts on functions:
    (Qf)(x) = sum_g rate(g) (f(xg) - f(x)).
    """
    t = np.asarray(table, dtype=int)
    n = t.shape[0]
    e = group_identity(t)
    gamma = np.asarray(gamma, complex)
    Q = np.zeros((n, n), dtype=float)
    for g in range(n):
        if g == e:
            continue
        rate = float(gamma[g].real)
        for x in range(n):
            Q[x, t[x, g]] += rate
            Q[x, x] -= rate
    return Q


def classical_oracle_compare(table, gamma, grid) -> float:
    """Max deviation between exp_*(t gamma) on F(G) and the classical chain.

    The classical side is the matrix exponential of the rate matrix read off
    from gamma, started at the identity; an independent validation oracle
    for the commutative sector.
    """
    t_arr = np.asarray(table, dtype=int)
    B = function_algebra(t_arr)
    gamma = np.asarray(gamma, complex)
    report = check_generating(B, gamma)
    if not report.passed:
        raise PreconditionError("functional must be generating on F(G)")
    Q = classical_rate_matrix(t_arr, gamma)
    e = group_identity(t_arr)
    dev = 0.0
    for t in grid:
        lam = conv_exp(B, gamma, float(t))
        P = scipy.linalg.expm(float(t) * Q)
        dev = max(dev, float(np.max(np.abs(lam - P[e, :]))))
    return dev


def misplaced_pair_defect(P: DiscreteLevyProcess, m1: int, n1: int,
                          m2: int, n2: int, shift: int) -> float:
    """Factorization residual when the second increment is shifted onto
    wrong legs; a positive shift onto overlapping legs must be detected
    by the independence axiom."""
    B = P.algebra
    r = n2 - m2
    power = kernel_power(B, P.psi, r)
    start = m2 + shift
    if not (0 <= start and start + r <= P.N):
        raise PreconditionError("shifted increment does not fit")
    pre = np.eye(P.leg_dim ** start, dtype=complex)
    post = np.eye(P.leg_dim ** (P.N - start - r), dtype=complex)
    J2 = np.stack([np.kron(np.kron(pre, blk), post) for blk in power.blocks])
    J1 = P.basis_increments(m1, n1)
    lam1 = P.vacuum_functional(m1, n1)
    lam2 = P.vacuum_functional(m2, n2)
    worst = 0.0
    for i, j in itertools.product(range(B.dim), repeat=2):
        joint = complex(J1[i][0, :] @ J2[j][:, 0])
        split = complex(lam1[i] * lam2[j])
        worst = max(worst, abs(joint - split))
    return worst
