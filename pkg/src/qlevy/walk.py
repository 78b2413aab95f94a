"""Quantum random walks: interaction unitaries, one-step maps, convolution
iterates and convergence against the exact cocycle.

For a *-representation pi on hbar and a vector xi with h ||xi||^2 <= 1 the
interaction unitary on C (+) hbar is

    U = [[ c,        -sqrt(h) <xi| ],
         [ sqrt(h) |xi>,  c Q + Q_perp ]],   c = sqrt(1 - h ||xi||^2),

with Q the projection onto C xi.  The one-step map is
psi(a) = V* (eps(a) (+) pi(a)) V with V = U (1 (+) D) for an isometry
D: k -> hbar (V = U when D = I).  Rescaling the defect psi - eps(.) I by
conjugation with diag(1/sqrt(h), I) reproduces the structure map of
(pi, xi) up to an O(h) correction given by an exact two-term identity,
which is verified here as a matrix identity.

Matrix elements of the n-step walk between exponential vectors never
materialize the iterated map on khat^(x)n: reading the embedded exponential
vector on the j-th step as (1, sqrt(h) f(t_j)) reduces the value to an
n-fold convolution product of scalar one-step functionals, at cost O(n d^2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bialgebra import Bialgebra
from .cocycle import (CocycleSpec, StepFunction, cocycle_matrix_element,
                      default_horizon, l2_inner)
from .convolution import KernelMap, convolve, kernel_power
from .errors import (HorizonError, NotAnIsometryError, PreconditionError,
                     ShapeError, StepTooLargeError)

ISO_TOL = 1e-12


def _check_representation(B: Bialgebra, pi: np.ndarray, tol: float = 1e-9) -> None:
    if pi.ndim != 3 or pi.shape[0] != B.dim or pi.shape[1] != pi.shape[2]:
        raise ShapeError(f"representation must have shape (d, m, m), got {pi.shape}")
    if pi.shape[1] == 0:
        return
    mult = np.einsum("iab,jbc->ijac", pi, pi) - np.einsum("ijk,kac->ijac", B.mult, pi)
    star = np.conj(pi.transpose(0, 2, 1)) - np.einsum("ik,kab->iab", B.invol, pi)
    defect = max(float(np.max(np.abs(mult))), float(np.max(np.abs(star))))
    if defect > tol:
        raise PreconditionError(f"pi is not a *-representation: defect {defect:.2e}")


def build_walk_unitary(pi: np.ndarray, xi, h: float) -> np.ndarray:
    """Interaction unitary on C (+) hbar for step size h."""
    xi = np.asarray(xi, complex).reshape(-1)
    m = xi.size
    pi = np.asarray(pi, complex)
    if pi.shape[-1] != m:
        raise ShapeError("xi must live in the representation space of pi")
    hn2 = h * float(np.vdot(xi, xi).real)
    if h <= 0:
        raise PreconditionError("step size must be positive")
    if hn2 > 1 + 1e-13:
        raise StepTooLargeError(f"h ||xi||^2 = {hn2:.6g} exceeds 1")
    c = np.sqrt(max(1.0 - hn2, 0.0))
    U = np.zeros((m + 1, m + 1), dtype=complex)
    U[0, 0] = c
    if m:
        norm = float(np.linalg.norm(xi))
        Q = np.outer(xi, np.conj(xi)) / norm ** 2 if norm > 0 else np.zeros((m, m))
        s = np.sqrt(h) * xi
        U[0, 1:] = -np.conj(s)
        U[1:, 0] = s
        U[1:, 1:] = c * Q + (np.eye(m) - Q)
    return U


def build_walk_isometry(pi: np.ndarray, xi, D: np.ndarray, h: float) -> np.ndarray:
    """V = U (1 (+) D) for an isometry D: k -> hbar; satisfies V*V = I."""
    D = np.asarray(D, complex)
    if D.ndim != 2:
        raise ShapeError("D must be a matrix")
    defect = float(np.max(np.abs(D.conj().T @ D - np.eye(D.shape[1])))) if D.size else 0.0
    if defect > ISO_TOL:
        raise NotAnIsometryError(f"D*D - I has max entry {defect:.2e}")
    U = build_walk_unitary(pi, xi, h)
    m, n = D.shape
    if m != U.shape[0] - 1:
        raise ShapeError("D must map into the representation space")
    emb = np.zeros((m + 1, n + 1), dtype=complex)
    emb[0, 0] = 1.0
    emb[1:, 1:] = D
    return U @ emb


@dataclass(frozen=True)
class WalkScheme:
    """One-step data of a quantum random walk."""

    h: float
    interaction: np.ndarray   # U (square) or V (rectangular isometry)
    psi: KernelMap            # one-step map on C (+) k
    pi: np.ndarray
    xi: np.ndarray
    D: np.ndarray


def walk_scheme(B: Bialgebra, pi: np.ndarray, xi, h: float,
                D: np.ndarray | None = None) -> WalkScheme:
    """Build psi(a) = V* (eps(a) (+) pi(a)) V; D defaults to the identity."""
    pi = np.asarray(pi, complex)
    _check_representation(B, pi)
    xi = np.asarray(xi, complex).reshape(-1)
    m = pi.shape[1]
    if D is None:
        D = np.eye(m, dtype=complex)
    V = build_walk_isometry(pi, xi, D, h)
    direct = np.zeros((B.dim, m + 1, m + 1), dtype=complex)
    direct[:, 0, 0] = B.counit
    direct[:, 1:, 1:] = pi
    blocks = np.einsum("ab,iac,cd->ibd", np.conj(V), direct, V)
    return WalkScheme(float(h), V, KernelMap(blocks), pi, xi, np.asarray(D, complex))


def walk_map(B: Bialgebra, pi: np.ndarray, xi, h: float,
             D: np.ndarray | None = None) -> KernelMap:
    """The one-step kernel map of the walk."""
    return walk_scheme(B, pi, xi, h, D).psi


def scaling_matrix(h: float, noise_dim: int) -> np.ndarray:
    S = np.eye(noise_dim + 1, dtype=complex)
    S[0, 0] = 1.0 / np.sqrt(h)
    return S


def scaled_defect(B: Bialgebra, psi: KernelMap, h: float) -> np.ndarray:
    """Blocks of Sigma_h(psi - eps(.) I), the rescaled one-step defect."""
    S = scaling_matrix(h, psi.noise_dim)
    eye = np.eye(psi.target_dim)
    defect = psi.blocks - np.einsum("i,ab->iab", B.counit, eye)
    return np.einsum("ab,ibc,cd->iad", S, defect, S)


def scaled_difference_identity(B: Bialgebra, phi: KernelMap, pi: np.ndarray,
                               xi, h: float) -> float:
    """Residual of the exact two-term error identity of the walk.

    With psi the one-step map of (pi, xi) at step h and c = sqrt(1-h||xi||^2):

        phi - Sigma_h(psi - eps(.) I)
            = h/(1+c) phi_1 - h^2/(1+c)^2 phi_2,

    phi_1 = [[0, gamma(.) <xi|], [gamma(.) |xi>, X nu(.) + nu(.) X]],
    phi_2 = gamma(.) [[0, 0], [0, X]],  X = |xi><xi|,  nu = pi - eps(.) I,
    gamma = <xi, nu(.) xi>.  Holds exactly for every admissible h; returns
    the max-norm of the difference over the basis.
    """
    pi = np.asarray(pi, complex)
    xi = np.asarray(xi, complex).reshape(-1)
    m = pi.shape[1]
    if phi.noise_dim != m:
        raise ShapeError("phi and pi act on different noise spaces")
    psi = walk_map(B, pi, xi, h)
    lhs = phi.blocks - scaled_defect(B, psi, h)

    nu = pi - np.einsum("i,ab->iab", B.counit, np.eye(m))
    gamma = np.einsum("a,iab,b->i", np.conj(xi), nu, xi)
    X = np.outer(xi, np.conj(xi))
    phi1 = np.zeros((B.dim, m + 1, m + 1), dtype=complex)
    phi1[:, 0, 1:] = np.einsum("i,a->ia", gamma, np.conj(xi))
    phi1[:, 1:, 0] = np.einsum("i,a->ia", gamma, xi)
    phi1[:, 1:, 1:] = np.einsum("ab,ibc->iac", X, nu) + np.einsum("iab,bc->iac", nu, X)
    phi2 = np.zeros_like(phi1)
    phi2[:, 1:, 1:] = np.einsum("i,ab->iab", gamma, X)

    c = np.sqrt(max(1.0 - h * float(np.vdot(xi, xi).real), 0.0))
    rhs = (h / (1 + c)) * phi1 - (h ** 2 / (1 + c) ** 2) * phi2
    return float(np.max(np.abs(lhs - rhs)))


def _hat(vec: np.ndarray) -> np.ndarray:
    return np.concatenate(([1.0 + 0j], vec))


def step_functional(psi: KernelMap, h: float, f: StepFunction, g: StepFunction,
                    j: int) -> np.ndarray:
    """q_j = <(1, sqrt(h) f(t_j)), psi(.) (1, sqrt(h) g(t_j))>, t_j = (j-1) h."""
    t_j = (j - 1) * h
    v = _hat(np.sqrt(h) * f.value_at(t_j))
    u = _hat(np.sqrt(h) * g.value_at(t_j))
    return np.einsum("a,iab,b->i", np.conj(v), psi.blocks, u)


def walk_matrix_element(B: Bialgebra, psi: KernelMap, h: float, n: int,
                        f: StepFunction, g: StepFunction, b,
                        t_max: float | None = None) -> complex:
    """<eps(f), (n-step walk)(b) eps(g)> via the factorized convolution path.

    Equals the full contraction of the n-fold convolution iterate of psi on
    khat^(x)n against the embedded exponential vectors, at cost O(n d^2).
    """
    if t_max is None:
        t_max = default_horizon(f, g, n * h)
    if n * h > t_max + 1e-12:
        raise HorizonError(f"walk horizon n h = {n * h} exceeds t_max = {t_max}")
    acc = np.asarray(B.counit, complex).copy()
    for j in range(1, n + 1):
        acc = convolve(B, acc, step_functional(psi, h, f, g, j))
    value = B.eval_functional(acc, b)
    return value * complex(np.exp(l2_inner(f, g, n * h, t_max)))


def walk_matrix_element_bruteforce(B: Bialgebra, psi: KernelMap, h: float, n: int,
                                   f: StepFunction, g: StepFunction, b,
                                   t_max: float | None = None) -> complex:
    """Oracle route: materialize the iterate on khat^(x)n and contract it."""
    if t_max is None:
        t_max = default_horizon(f, g, n * h)
    power = kernel_power(B, psi, n)
    vs = [_hat(np.sqrt(h) * f.value_at((j - 1) * h)) for j in range(1, n + 1)]
    us = [_hat(np.sqrt(h) * g.value_at((j - 1) * h)) for j in range(1, n + 1)]
    v = vs[0] if vs else np.ones(1, complex)
    u = us[0] if us else np.ones(1, complex)
    for x in vs[1:]:
        v = np.kron(v, x)
    for x in us[1:]:
        u = np.kron(u, x)
    op = power.apply(np.asarray(b, complex))
    return complex(np.vdot(v, op @ u) * np.exp(l2_inner(f, g, n * h, t_max)))


@dataclass(frozen=True)
class ConvergenceRow:
    h: float
    err: float
    ratio: float  # err relative to the previous (coarser) grid entry


def convergence_table(B: Bialgebra, phi: KernelMap, pi: np.ndarray, xi,
                      T: float, f: StepFunction, g: StepFunction,
                      elements: list, h_grid, D: np.ndarray | None = None,
                      eta=None) -> list[ConvergenceRow]:
    """Walk-vs-cocycle error sweep over a step-size grid.

    err(h) = max over grid times t = n h <= T and over the witness elements
    of |walk matrix element - cocycle matrix element|; the comparison uses a
    common tail horizon so the overlap factors cancel exactly.
    """
    spec = CocycleSpec(B, phi, eta=eta)
    t_max = max(default_horizon(f, g, T), T + 1.0)
    rows: list[ConvergenceRow] = []
    prev = None
    for h in h_grid:
        psi = walk_map(B, pi, xi, float(h), D)
        n_max = int(np.floor(T / h + 1e-9))
        err = 0.0
        acc = np.asarray(B.counit, complex).copy()
        for n in range(0, n_max + 1):
            if n > 0:
                acc = convolve(B, acc, step_functional(psi, float(h), f, g, n))
            tail = complex(np.exp(l2_inner(f, g, n * h, t_max)))
            for el in elements:
                walk_val = B.eval_functional(acc, el) * tail
                exact_val = cocycle_matrix_element(spec, f, g, n * h, el, t_max=t_max)
                err = max(err, abs(walk_val - exact_val))
        ratio = err / prev if prev not in (None, 0.0) else float("nan")
        rows.append(ConvergenceRow(float(h), err, ratio))
        prev = err
    return rows
