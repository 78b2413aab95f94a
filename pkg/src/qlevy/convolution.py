"""The convolution algebra of functionals and operator-valued kernel maps.

A functional phi is a complex vector of its values on the basis; the
convolution product is

    (phi1 * phi2)(e_i) = sum_{j,k} coprod[i, j, k] phi1(e_j) phi2(e_k),

which makes the dual a unital Banach algebra with unit the counit.  The
lift phi -> (id (x) phi) o Delta is a unital algebra morphism into d x d
matrices acting on element coefficients; slicing with the counit on the
left leg inverts it.

A KernelMap stores a linear map from the algebra into operators on
khat = C (+) C^n, blockwise per basis element:

    blocks[i] = [[ gamma(e_i), delta_dag(e_i) ],
                 [ delta(e_i), nu(e_i)        ]]

Kernel convolution tensors the operator legs with a Kronecker product and
flattens legs in row-major order, so iterated convolution powers act on
khat^(x)n with the j-th tensor factor belonging to the j-th step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .bialgebra import Bialgebra
from .errors import BudgetError, ShapeError
from .serialize import decode_complex, encode_complex

KERNEL_BUDGET = 1 << 22  # max total entries of the block tensor of a kernel convolution


def convolve(B: Bialgebra, phi1, phi2) -> np.ndarray:
    """Convolution of two functionals."""
    return np.einsum("ijk,j,k->i", B.coprod,
                     np.asarray(phi1, complex), np.asarray(phi2, complex))


def r_matrix(B: Bialgebra, phi) -> np.ndarray:
    """Matrix of (id (x) phi) o Delta acting on element coefficients.

    Turns convolution into matrix multiplication:
    r_matrix(phi1 * phi2) = r_matrix(phi1) @ r_matrix(phi2), r_matrix(counit) = I.
    """
    return np.einsum("ijk,k->ji", B.coprod, np.asarray(phi, complex))


def e_functional(B: Bialgebra, M) -> np.ndarray:
    """Counit slice of an operator on coefficients; left-inverse of r_matrix."""
    return np.asarray(B.counit, complex) @ np.asarray(M, complex)


@dataclass(frozen=True)
class KernelMap:
    """A linear map from the algebra into operators on C (+) C^n."""

    blocks: np.ndarray  # (d, 1+n, 1+n) complex

    def __post_init__(self):
        b = np.array(self.blocks, dtype=complex)
        if b.ndim != 3 or b.shape[1] != b.shape[2] or b.shape[1] < 1:
            raise ShapeError(f"kernel blocks must have shape (d, m, m), got {b.shape}")
        b.flags.writeable = False
        object.__setattr__(self, "blocks", b)

    @property
    def dim(self) -> int:
        return self.blocks.shape[0]

    @property
    def target_dim(self) -> int:
        return self.blocks.shape[1]

    @property
    def noise_dim(self) -> int:
        return self.blocks.shape[1] - 1

    def gamma(self) -> np.ndarray:
        """Vacuum corner <e0| . |e0> as a functional."""
        return self.blocks[:, 0, 0].copy()

    def delta(self) -> np.ndarray:
        """Lower-left columns, shape (d, n)."""
        return self.blocks[:, 1:, 0].copy()

    def delta_dagger(self) -> np.ndarray:
        """Upper-right rows, shape (d, n)."""
        return self.blocks[:, 0, 1:].copy()

    def nu(self) -> np.ndarray:
        """Lower-right blocks, shape (d, n, n)."""
        return self.blocks[:, 1:, 1:].copy()

    def apply(self, a) -> np.ndarray:
        """Operator value on an element with the given coefficients."""
        return np.einsum("i,iab->ab", np.asarray(a, complex), self.blocks)

    def to_dict(self) -> dict:
        return {"target_dim": self.target_dim, "blocks": encode_complex(self.blocks)}

    @staticmethod
    def from_dict(obj: dict) -> "KernelMap":
        blocks = decode_complex(obj["blocks"])
        if "target_dim" in obj and blocks.shape[1] != int(obj["target_dim"]):
            raise ShapeError("target_dim does not match block shape")
        return KernelMap(blocks)


def functional_as_kernel(phi) -> KernelMap:
    """View a functional as a kernel map with trivial noise space."""
    phi = np.asarray(phi, complex)
    return KernelMap(phi.reshape(-1, 1, 1))


def counit_kernel(B: Bialgebra) -> KernelMap:
    return functional_as_kernel(B.counit)


def hermitian_real_defect(B: Bialgebra, K: KernelMap) -> float:
    """max_i || K(e_i*) - K(e_i)^dagger ||; zero for adjoint-respecting maps."""
    starred = np.einsum("ik,kab->iab", B.invol, K.blocks)
    return float(np.max(np.abs(starred - np.conj(K.blocks.transpose(0, 2, 1)))))


def convolve_kernel(B: Bialgebra, K1: KernelMap, K2: KernelMap,
                    budget: int = KERNEL_BUDGET) -> KernelMap:
    """Convolution of kernel maps; operator legs combine by Kronecker product.

    Raises BudgetError when the resulting block tensor would exceed `budget`
    entries; iterated convolution powers grow exponentially in the number of
    factors.
    """
    m1, m2 = K1.target_dim, K2.target_dim
    d = B.dim
    if (m1 * m2) ** 2 * d > budget:
        raise BudgetError(
            f"kernel convolution needs {(m1 * m2) ** 2 * d} entries, budget is {budget}")
    out = np.einsum("ijk,jab,kcd->iacbd", B.coprod, K1.blocks, K2.blocks)
    return KernelMap(out.reshape(d, m1 * m2, m1 * m2))


def kernel_power(B: Bialgebra, K: KernelMap, n: int,
                 budget: int = KERNEL_BUDGET) -> KernelMap:
    """n-fold convolution power; the 0-th power is the counit kernel."""
    if n < 0:
        raise ValueError("power must be nonnegative")
    acc = counit_kernel(B)
    for _ in range(n):
        acc = convolve_kernel(B, acc, K, budget=budget)
    return acc


def r_lift(B: Bialgebra, K: KernelMap) -> np.ndarray:
    """Tensor of (id (x) K) o Delta: out[i, j] = sum_k coprod[i,j,k] K(e_k)."""
    return np.einsum("ijk,kab->ijab", B.coprod, K.blocks)


def e_slice(B: Bialgebra, Psi) -> KernelMap:
    """Apply the counit to the algebra leg of a map into B (x) B(khat).

    Psi has shape (d, d, m, m) with Psi[i, j] the operator coefficient of
    e_j in the image of e_i.  Left-inverse of r_lift.
    """
    Psi = np.asarray(Psi, complex)
    if Psi.ndim != 4 or Psi.shape[0] != B.dim or Psi.shape[1] != B.dim \
            or Psi.shape[2] != Psi.shape[3]:
        raise ShapeError(f"expected shape (d, d, m, m), got {Psi.shape}")
    return KernelMap(np.einsum("j,ijab->iab", B.counit, Psi))


def choi_matrix(B: Bialgebra, K: KernelMap) -> np.ndarray:
    """Block matrix [K(e_i* e_j)]_{ij}; PSD iff the map is completely positive."""
    C = np.einsum("ijk,kab->iajb", B.star_product_coeffs(), K.blocks)
    dm = B.dim * K.target_dim
    return C.reshape(dm, dm)


def choi_min_eig(B: Bialgebra, K: KernelMap) -> float:
    """Smallest eigenvalue of the Hermitian part of the Choi matrix."""
    C = choi_matrix(B, K)
    return float(np.linalg.eigvalsh((C + C.conj().T) / 2).min())


def kernel_from_choi(B: Bialgebra, C: np.ndarray, target_dim: int) -> KernelMap:
    """Least-squares inverse of choi_matrix (exact when C is consistent)."""
    d, m = B.dim, target_dim
    S = B.star_product_coeffs().reshape(d * d, d)
    vals = C.reshape(d, m, d, m).transpose(0, 2, 1, 3).reshape(d * d, m * m)
    sol, *_ = np.linalg.lstsq(S, vals, rcond=None)
    return KernelMap(sol.reshape(d, m, m))


def cb_norm_upper(B: Bialgebra, K: KernelMap) -> float:
    """Choi-derived upper bound on the completely bounded norm.

    Splits the Hermitian and anti-Hermitian parts of the Choi matrix into
    differences of PSD matrices, reads each piece back as a completely
    positive map and sums the operator norms of their unit values.  Equals
    ||K(1)|| for completely positive maps; in general only an upper bound
    (no canonical finite-dimensional CB norm is singled out here).
    """
    C = choi_matrix(B, K)
    total = 0.0
    for H in ((C + C.conj().T) / 2, (C - C.conj().T) / (2j)):
        if np.max(np.abs(H)) < 1e-300:
            continue
        w, V = np.linalg.eigh(H)
        for sign in (1.0, -1.0):
            w_part = np.where(sign * w > 0, sign * w, 0.0)
            if not np.any(w_part):
                continue
            part = (V * w_part) @ V.conj().T
            Kp = kernel_from_choi(B, part, K.target_dim)
            unit_val = Kp.apply(B.unit)
            total += float(np.linalg.norm(unit_val, 2))
    return total


# -- convolution exponentials ----------------------------------------------


def _series_order(theta: float, tol: float) -> int:
    """Smallest N with theta^(N+1)/(N+1)! * e^theta <= tol."""
    if theta == 0.0:
        return 0
    log_tol = math.log(tol)
    n = 0
    while (n + 1) * math.log(theta) - math.lgamma(n + 2) + theta > log_tol:
        n += 1
        if n > 10_000:
            break
    return n


def conv_exp(B: Bialgebra, gamma, t: float, algorithm: str = "rmap",
             tol: float = 1e-12) -> np.ndarray:
    """Convolution exponential exp_*(t gamma), the time-t semigroup functional.

    algorithm "rmap": counit slice of the dense matrix exponential of
    t * r_matrix(gamma); exact unit at t = 0.
    algorithm "series": truncated exponential series in the convolution
    algebra, with the truncation order certified from the operator norm of
    t * r_matrix(gamma) (standard exponential remainder bound).
    """
    gamma = np.asarray(gamma, complex)
    t = float(t)
    if algorithm == "rmap":
        M = r_matrix(B, gamma)
        return e_functional(B, scipy.linalg.expm(t * M))
    if algorithm == "series":
        theta = float(np.linalg.norm(t * r_matrix(B, gamma), 2))
        order = _series_order(theta, tol)
        acc = np.asarray(B.counit, complex).copy()
        term = np.asarray(B.counit, complex).copy()
        for n in range(1, order + 1):
            term = convolve(B, term, gamma) * (t / n)
            acc = acc + term
        return acc
    raise ValueError(f"unknown algorithm {algorithm!r}; use 'rmap' or 'series'")
