"""Generating functionals, GNS triples and stochastic-generator classification.

A generating functional gamma is real (gamma(a*) = conj(gamma(a))),
conditionally positive (positive on the kernel of the counit) and kills the
unit.  Quotienting by the null space of

    q(a, b) = gamma(a* b) - conj(gamma(a)) eps(b) - conj(eps(a)) gamma(b)

yields a noise space k, a column map delta with <delta(a), delta(b)> = q(a, b),
and a *-representation pi fixed by pi(a) delta(b) = delta(ab) - eps(b) delta(a).
The block map

    phi = [[gamma, delta_dag], [delta, pi - eps I]]

is the structure map generating the associated *-homomorphic cocycle: it
satisfies

    phi(a* b) = phi(a)* eps(b) + conj(eps(a)) phi(b) + phi(a)* P phi(b)

with P the projection onto the noise component of C (+) k.

Eigendecompositions use a fixed deterministic ordering (descending
eigenvalue, lexicographic tie-break, first nonzero eigenvector entry made
real positive) so concurrent or repeated runs give identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .bialgebra import Bialgebra
from .convolution import KernelMap, choi_min_eig
from .errors import ChiNotCharacterError, InconsistentPiError, PreconditionError, ShapeError

PHASE_EPS = 1e-12


def delta_qs(noise_dim: int) -> np.ndarray:
    """Projection onto the noise component of C (+) C^n."""
    P = np.zeros((noise_dim + 1, noise_dim + 1), dtype=complex)
    P[1:, 1:] = np.eye(noise_dim)
    return P


def _fix_phase(v: np.ndarray) -> np.ndarray:
    nz = np.nonzero(np.abs(v) > PHASE_EPS)[0]
    if nz.size == 0:
        return v
    return v * (np.abs(v[nz[0]]) / v[nz[0]])


def ordered_eigh(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian eigendecomposition with a reproducible ordering."""
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    cols = [_fix_phase(V[:, i]) for i in range(V.shape[1])]

    def key(i):
        v = cols[i]
        return (-round(w[i], 12), tuple(np.round(v.real, 10)), tuple(np.round(v.imag, 10)))

    order = sorted(range(len(w)), key=key)
    return w[order], np.column_stack([cols[i] for i in order]) if cols else V


# -- generating-functional analysis ---------------------------------------


@dataclass(frozen=True)
class GeneratingReport:
    reality_defect: float
    cond_pos_min_eig: float
    unit_value: complex
    kernel_dim: int
    tol: float

    @property
    def passed(self) -> bool:
        return (self.reality_defect <= self.tol
                and self.cond_pos_min_eig >= -self.tol
                and abs(self.unit_value) <= self.tol)


def check_generating(B: Bialgebra, gamma, tol: float = 1e-9) -> GeneratingReport:
    """Reality, conditional positivity and unit value of a functional."""
    gamma = np.asarray(gamma, complex)
    reality = float(np.max(np.abs(B.invol @ gamma - np.conj(gamma))))
    unit_value = complex(np.dot(gamma, B.unit))
    kernel = scipy.linalg.null_space(np.asarray(B.counit, complex).reshape(1, B.dim))
    if kernel.shape[1] == 0:
        min_eig = 0.0
    else:
        K = np.einsum("ijk,k->ij", B.star_product_coeffs(), gamma)
        G = kernel.conj().T @ K @ kernel
        min_eig = float(np.linalg.eigvalsh((G + G.conj().T) / 2).min())
    return GeneratingReport(reality, min_eig, unit_value, kernel.shape[1], tol)


# -- GNS construction -------------------------------------------------------


@dataclass(frozen=True)
class SchurmannTriple:
    """Noise space data (pi, delta, gamma) with optional implementing vector."""

    noise_dim: int
    pi: np.ndarray        # (d, r, r)
    delta: np.ndarray     # (d, r)
    gamma: np.ndarray     # (d,)
    xi: np.ndarray | None
    gram: np.ndarray      # (d, d)


def triple_defects(B: Bialgebra, T: SchurmannTriple) -> dict[str, float]:
    """Residuals of the defining relations of a triple."""
    eps = B.counit
    out: dict[str, float] = {}
    mult_defect = np.einsum("iab,jbc->ijac", T.pi, T.pi) \
        - np.einsum("ijk,kac->ijac", B.mult, T.pi)
    out["pi_multiplicative"] = float(np.max(np.abs(mult_defect))) if T.noise_dim else 0.0
    star_defect = np.conj(T.pi.transpose(0, 2, 1)) - np.einsum("ik,kab->iab", B.invol, T.pi)
    out["pi_star"] = float(np.max(np.abs(star_defect))) if T.noise_dim else 0.0
    coc = np.einsum("iab,jb->ija", T.pi, T.delta) + np.einsum("ia,j->ija", T.delta, eps) \
        - np.einsum("ijk,ka->ija", B.mult, T.delta)
    out["cocycle_relation"] = float(np.max(np.abs(coc))) if T.noise_dim else 0.0
    inner = np.einsum("ia,ja->ij", np.conj(T.delta), T.delta)
    expected = np.einsum("ijk,k->ij", B.star_product_coeffs(), T.gamma) \
        - np.outer(np.conj(T.gamma), eps) - np.outer(np.conj(eps), T.gamma)
    out["inner_product_relation"] = float(np.max(np.abs(inner - expected)))
    if T.xi is not None:
        nu = T.pi - np.einsum("i,ab->iab", eps, np.eye(T.noise_dim))
        gamma_fit = np.einsum("a,iab,b->i", np.conj(T.xi), nu, T.xi)
        out["gamma_from_xi"] = float(np.max(np.abs(gamma_fit - T.gamma)))
    return out


def gns_triple(B: Bialgebra, gamma, tol: float = 1e-10) -> SchurmannTriple:
    """Build a Schurmann triple from a generating functional.

    The Gram matrix of q is eigendecomposed; eigenvalues above
    tol * (largest eigenvalue) span the noise space.  The representation is
    solved column-by-column on the frame {delta(e_i)} by least squares; an
    unsolvable system signals a functional that is not conditionally
    positive (or a misjudged numerical rank).
    """
    gamma = np.asarray(gamma, complex)
    report = check_generating(B, gamma, tol=max(tol, 1e-9))
    if not report.passed:
        raise PreconditionError(
            f"functional is not generating: reality={report.reality_defect:.2e}, "
            f"min_eig={report.cond_pos_min_eig:.2e}, unit={report.unit_value:.2e}")
    d = B.dim
    eps = np.asarray(B.counit, complex)
    K = np.einsum("ijk,k->ij", B.star_product_coeffs(), gamma)
    Q = K - np.outer(np.conj(gamma), eps) - np.outer(np.conj(eps), gamma)
    w, V = ordered_eigh(Q)
    scale = max(float(w[0]), 0.0) if w.size else 0.0
    floor = max(tol * scale, 1e-13 * max(1.0, scale))
    keep = np.nonzero(w > floor)[0]
    r = len(keep)
    delta = np.sqrt(w[keep])[None, :] * np.conj(V[:, keep])  # (d, r)

    if r == 0:
        return SchurmannTriple(0, np.zeros((d, 0, 0), complex), np.zeros((d, 0), complex),
                               gamma, np.zeros(0, complex), Q)

    frame = delta.T  # (r, d), columns delta(e_j)
    rhs = np.einsum("ijk,ka->ija", B.mult, delta) - np.einsum("j,ia->ija", eps, delta)
    frame_pinv = np.linalg.pinv(frame, rcond=1e-13)
    pi = np.empty((d, r, r), dtype=complex)
    worst = 0.0
    for i in range(d):
        target = rhs[i].T  # (r, d): column j is pi(e_i) delta(e_j)
        pi[i] = target @ frame_pinv
        worst = max(worst, float(np.max(np.abs(pi[i] @ frame - target))))
    pi_tol = 1e-8 * max(1.0, scale)
    if worst > pi_tol:
        raise InconsistentPiError(
            f"representation equations unsolvable: residual {worst:.2e} > {pi_tol:.2e}")

    nu = pi - np.einsum("i,ab->iab", eps, np.eye(r))
    A = nu.reshape(d * r, r)
    b = delta.reshape(d * r)
    xi, *_ = np.linalg.lstsq(A, b, rcond=None)
    sys_res = float(np.max(np.abs(A @ xi - b)))
    gamma_fit = np.einsum("a,iab,b->i", np.conj(xi), nu, xi)
    gamma_res = float(np.max(np.abs(gamma_fit - gamma)))
    if max(sys_res, gamma_res) <= 10 * max(tol, 1e-9) * max(1.0, scale):
        nz = np.nonzero(np.abs(xi) > PHASE_EPS)[0]
        if nz.size:
            phase = np.abs(xi[nz[0]]) / xi[nz[0]]
            xi = xi * phase
            delta = delta * phase
    else:
        xi = None

    return SchurmannTriple(r, pi, delta, gamma, xi, Q)


# -- structure maps ---------------------------------------------------------


def assemble_structure_map(B: Bialgebra, T: SchurmannTriple) -> KernelMap:
    """Block map [[gamma, delta_dag], [delta, pi - eps I]] on C (+) k.

    When the triple carries an implementing vector the off-diagonal blocks
    are taken in the nu(.)|xi> form; otherwise the raw delta columns are
    used with delta_dag(a) = delta(a*)*.
    """
    d, r = B.dim, T.noise_dim
    eps = np.asarray(B.counit, complex)
    nu = T.pi - np.einsum("i,ab->iab", eps, np.eye(r))
    if T.xi is not None and r > 0:
        col = np.einsum("iab,b->ia", nu, T.xi)
        row = np.einsum("a,iab->ib", np.conj(T.xi), nu)
    else:
        col = T.delta
        row = np.conj(np.einsum("ik,ka->ia", B.invol, T.delta))
    blocks = np.zeros((d, r + 1, r + 1), dtype=complex)
    blocks[:, 0, 0] = T.gamma
    blocks[:, 1:, 0] = col
    blocks[:, 0, 1:] = row
    blocks[:, 1:, 1:] = nu
    return KernelMap(blocks)


def character_defect(B: Bialgebra, chi) -> float:
    """How far a functional is from being a *-character."""
    chi = np.asarray(chi, complex)
    mult = np.einsum("ijk,k->ij", B.mult, chi) - np.outer(chi, chi)
    star = B.invol @ chi - np.conj(chi)
    unit = abs(complex(np.dot(chi, B.unit)) - 1.0)
    return max(float(np.max(np.abs(mult))), float(np.max(np.abs(star))), unit)


def verify_structure_relation(B: Bialgebra, phi: KernelMap, chi=None,
                              char_tol: float = 1e-9) -> float:
    """Residual of the structure relation of phi against a character chi.

    Returns max over basis pairs of the spectral norm of

        phi(e_i* e_j) - phi(e_i)* chi(e_j) - conj(chi(e_i)) phi(e_j)
                      - phi(e_i)* P phi(e_j)

    with P the noise projection.  Raises if chi is not a character.
    """
    chi = np.asarray(B.counit if chi is None else chi, complex)
    defect = character_defect(B, chi)
    if defect > char_tol:
        raise ChiNotCharacterError(f"reference functional has character defect {defect:.2e}")
    blocks = phi.blocks
    adj = np.conj(blocks.transpose(0, 2, 1))
    P = delta_qs(phi.noise_dim)
    lhs = np.einsum("ijk,kab->ijab", B.star_product_coeffs(), blocks)
    rhs = np.einsum("iab,j->ijab", adj, chi) \
        + np.einsum("i,jab->ijab", np.conj(chi), blocks) \
        + np.einsum("iac,cd,jdb->ijab", adj, P, blocks)
    diff = lhs - rhs
    return max(float(np.linalg.norm(diff[i, j], 2))
               for i in range(B.dim) for j in range(B.dim))


@dataclass(frozen=True)
class ImplementingPair:
    pi: np.ndarray          # (d, r, r)
    xi: np.ndarray          # (r,)
    residual: float
    details: dict[str, float] = field(default_factory=dict)


def extract_implementing_pair(B: Bialgebra, phi: KernelMap) -> ImplementingPair:
    """Recover (pi, xi) from a structure map.

    pi(e_i) = nu(e_i) + eps(e_i) I; xi solves nu(e_i) xi = delta(e_i) in
    least squares over all basis elements.  The residual covers that system
    and gamma = <xi, nu(.) xi>; a large value is data, not an error.
    """
    d, r = B.dim, phi.noise_dim
    eps = np.asarray(B.counit, complex)
    nu = phi.nu()
    pi = nu + np.einsum("i,ab->iab", eps, np.eye(r))
    delta = phi.delta()
    A = nu.reshape(d * r, r)
    b = delta.reshape(d * r)
    if r == 0:
        xi = np.zeros(0, complex)
        sys_res = 0.0
    else:
        xi, *_ = np.linalg.lstsq(A, b, rcond=None)
        sys_res = float(np.max(np.abs(A @ xi - b)))
    gamma_fit = np.einsum("a,iab,b->i", np.conj(xi), nu, xi)
    gamma_res = float(np.max(np.abs(gamma_fit - phi.gamma())))
    mult_defect = np.einsum("iab,jbc->ijac", pi, pi) - np.einsum("ijk,kac->ijac", B.mult, pi)
    star_defect = np.conj(pi.transpose(0, 2, 1)) - np.einsum("ik,kab->iab", B.invol, pi)
    details = {
        "system": sys_res,
        "gamma": gamma_res,
        "pi_multiplicative": float(np.max(np.abs(mult_defect))) if r else 0.0,
        "pi_star": float(np.max(np.abs(star_defect))) if r else 0.0,
    }
    return ImplementingPair(pi, xi, max(sys_res, gamma_res), details)


# -- generator classification -----------------------------------------------

STAR_HOMOMORPHIC = "star_homomorphic"
CP_PREUNITAL = "cp_preunital"
CP_CONTRACTIVE = "cp_contractive"
UNCLASSIFIED = "unclassified"


@dataclass(frozen=True)
class Classification:
    kind: str
    certificate: dict


def _correction(zeta: np.ndarray, m: int) -> np.ndarray:
    e0 = np.zeros(m, complex)
    e0[0] = 1.0
    return delta_qs(m - 1) + np.outer(zeta, np.conj(e0)) + np.outer(e0, np.conj(zeta))


def _unit_max_eig(B: Bialgebra, phi: KernelMap) -> float:
    val = phi.apply(B.unit)
    return float(np.linalg.eigvalsh((val + val.conj().T) / 2).max())


def classify_generator(B: Bialgebra, phi: KernelMap, witnesses=None,
                       tol: float = 1e-8) -> Classification:
    """Decide which cocycle class a kernel map generates.

    Order of tests: the structure relation (star-homomorphic cocycles)
    always runs first; with witnesses (rho, D, xi) the compressed-
    representation form is checked (completely positive preunital); with
    witnesses (psi, zeta) the decomposition

        phi = psi - eps(.) (P + |zeta><e0| + |e0><zeta|)

    is checked together with complete positivity of psi and phi(1) <= 0
    (completely positive contractive).  Without witnesses a grid search over
    the real e0-component of zeta runs, with the noise component solved from
    the delta block by least squares; 'unclassified' is a legitimate outcome
    since the decomposition is not unique and no extraction rule is canonical.
    """
    m = phi.target_dim
    eps = np.asarray(B.counit, complex)

    res_c = verify_structure_relation(B, phi)
    if res_c <= tol:
        return Classification(STAR_HOMOMORPHIC, {"structure_residual": res_c})

    if witnesses is not None and len(witnesses) == 3:
        rho, D, xi = (np.asarray(x, complex) for x in witnesses)
        if rho.ndim != 3 or rho.shape[0] != B.dim or rho.shape[1] != rho.shape[2]:
            raise ShapeError(f"representation witness has shape {rho.shape}")
        K = rho.shape[1]
        if D.shape != (K, m - 1) or xi.shape != (K,):
            raise ShapeError("witness shapes inconsistent with the map")
        iso_defect = float(np.max(np.abs(D.conj().T @ D - np.eye(m - 1))))
        W = np.concatenate([xi[:, None], D], axis=1)
        nu = rho - np.einsum("i,ab->iab", eps, np.eye(K))
        cand = np.einsum("ac,icd,db->iab", W.conj().T, nu, W)
        res = float(np.max(np.abs(cand - phi.blocks)))
        if res <= tol and iso_defect <= tol:
            return Classification(CP_PREUNITAL, {"block_residual": res,
                                                 "isometry_defect": iso_defect})
        return Classification(UNCLASSIFIED, {"structure_residual": res_c,
                                             "block_residual": res,
                                             "isometry_defect": iso_defect})

    if witnesses is not None and len(witnesses) == 2:
        psi, zeta = witnesses
        if not isinstance(psi, KernelMap):
            psi = KernelMap(np.asarray(psi, complex))
        zeta = np.asarray(zeta, complex).reshape(-1)
        if psi.blocks.shape != phi.blocks.shape or zeta.shape != (m,):
            raise ShapeError("witness shapes inconsistent with the map")
        cand = phi.blocks + np.einsum("i,ab->iab", eps, _correction(zeta, m))
        res = float(np.max(np.abs(cand - psi.blocks)))
        psi_min = choi_min_eig(B, psi)
        unit_eig = _unit_max_eig(B, phi)
        if res <= tol and psi_min >= -tol and unit_eig <= tol:
            return Classification(CP_CONTRACTIVE, {"decomposition_residual": res,
                                                   "psi_choi_min_eig": psi_min,
                                                   "unit_max_eig": unit_eig})
        return Classification(UNCLASSIFIED, {"structure_residual": res_c,
                                             "decomposition_residual": res,
                                             "psi_choi_min_eig": psi_min,
                                             "unit_max_eig": unit_eig})

    # witness-free search: the correction only sees Re(zeta_0), so a real
    # grid is fully general; the noise component cancels the counit-weighted
    # part of the delta block in least squares.
    unit_eig = _unit_max_eig(B, phi)
    weight = float(np.sum(np.abs(eps) ** 2))
    z = -np.einsum("i,ia->a", np.conj(eps), phi.delta()) / weight
    scale = max(1.0, float(np.max(np.abs(phi.blocks))))

    def min_eig_at(s: float) -> float:
        zeta = np.concatenate(([s], z))
        psi = KernelMap(phi.blocks + np.einsum("i,ab->iab", eps, _correction(zeta, m)))
        return choi_min_eig(B, psi)

    grid = np.linspace(0.0, 4.0 * scale, 81)
    vals = [min_eig_at(s) for s in grid]
    best = int(np.argmax(vals))
    step = grid[1] - grid[0]
    fine = np.linspace(grid[best] - step, grid[best] + step, 21)
    fine_vals = [min_eig_at(s) for s in fine]
    best_fine = int(np.argmax(fine_vals))
    s_best, eig_best = float(fine[best_fine]), float(fine_vals[best_fine])
    if eig_best >= -tol and unit_eig <= tol:
        zeta = np.concatenate(([s_best], z))
        return Classification(CP_CONTRACTIVE, {"zeta": zeta,
                                               "psi_choi_min_eig": eig_best,
                                               "unit_max_eig": unit_eig,
                                               "structure_residual": res_c})
    return Classification(UNCLASSIFIED, {"structure_residual": res_c,
                                         "best_psi_choi_min_eig": eig_best,
                                         "unit_max_eig": unit_eig})
