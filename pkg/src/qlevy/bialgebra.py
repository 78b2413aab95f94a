"""Finite-dimensional counital *-bialgebras with a faithful block representation.

Conventions (all tensors complex128, basis e_0..e_{d-1}):

    mult[i, j, k]    e_i e_j = sum_k mult[i, j, k] e_k
    unit[k]          1 = sum_k unit[k] e_k
    invol[i, k]      (e_i)* = sum_k invol[i, k] e_k, so a general element
                     a = sum a_i e_i has star coefficients conj(a) @ invol
    coprod[i, j, k]  Delta(e_i) = sum_{j,k} coprod[i, j, k] e_j (x) e_k
    counit[i]        epsilon(e_i)
    rep_blocks       tuple of arrays; rep_blocks[b][i] is the matrix of e_i
                     in the b-th block of a faithful unital *-representation

Elements and functionals are plain complex vectors of length d: an element
holds coefficients against the basis, a functional holds its values on the
basis.  Norms and positivity are always computed in the representation,
which carries the C*-structure.

Everything here is pure and descriptors are immutable after construction,
so unrestricted concurrent reads are safe.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .errors import NotAGroupError, ParseError, ShapeError
from .serialize import decode_complex, encode_complex

DEFAULT_TOL = 1e-9


def _locked(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Bialgebra:
    dim: int
    labels: tuple[str, ...]
    mult: np.ndarray
    unit: np.ndarray
    invol: np.ndarray
    coprod: np.ndarray
    counit: np.ndarray
    rep_blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        d = self.dim
        if d <= 0:
            raise ShapeError("dim must be a positive integer")
        if len(self.labels) != d:
            raise ShapeError("labels must have length dim")
        object.__setattr__(self, "mult", _locked(self.mult))
        object.__setattr__(self, "unit", _locked(self.unit))
        object.__setattr__(self, "invol", _locked(self.invol))
        object.__setattr__(self, "coprod", _locked(self.coprod))
        object.__setattr__(self, "counit", _locked(self.counit))
        object.__setattr__(self, "rep_blocks", tuple(_locked(b) for b in self.rep_blocks))
        for name, shape in (("mult", (d, d, d)), ("unit", (d,)), ("invol", (d, d)),
                            ("coprod", (d, d, d)), ("counit", (d,))):
            if getattr(self, name).shape != shape:
                raise ShapeError(f"{name} must have shape {shape}, got {getattr(self, name).shape}")
        if not self.rep_blocks:
            raise ShapeError("at least one representation block is required")
        for b, blk in enumerate(self.rep_blocks):
            if blk.ndim != 3 or blk.shape[0] != d or blk.shape[1] != blk.shape[2]:
                raise ShapeError(f"rep block {b} must have shape (dim, n, n), got {blk.shape}")

    # -- element algebra -------------------------------------------------

    def multiply(self, a, b) -> np.ndarray:
        """Coefficients of the product of two elements."""
        return np.einsum("ijk,i,j->k", self.mult, np.asarray(a, complex), np.asarray(b, complex))

    def star(self, a) -> np.ndarray:
        """Coefficients of the adjoint of an element (conjugate-linear)."""
        return np.conj(np.asarray(a, complex)) @ self.invol

    def unit_element(self) -> np.ndarray:
        return self.unit.copy()

    def basis_element(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[i] = 1.0
        return e

    def represent(self, a) -> list[np.ndarray]:
        """Block matrices of an element in the faithful representation."""
        a = np.asarray(a, complex)
        return [np.einsum("i,iab->ab", a, blk) for blk in self.rep_blocks]

    def eval_functional(self, phi, a) -> complex:
        """Apply a functional (values on the basis) to an element."""
        return complex(np.dot(np.asarray(phi, complex), np.asarray(a, complex)))

    def star_product_coeffs(self) -> np.ndarray:
        """Tensor S[i, j, k]: coefficients of e_i* e_j against e_k."""
        return np.einsum("ip,pjk->ijk", self.invol, self.mult)

    def cocommutativity_defect(self) -> float:
        """max |coprod - flip(coprod)|; zero iff the coproduct is symmetric."""
        return float(np.max(np.abs(self.coprod - self.coprod.transpose(0, 2, 1))))


# -- positivity and states ----------------------------------------------


@dataclass(frozen=True)
class PositivityWitness:
    positive: bool
    margin: float
    hermiticity_defect: float

    def __bool__(self) -> bool:
        return self.positive


def element_positive(B: Bialgebra, a, tol: float = DEFAULT_TOL) -> PositivityWitness:
    """Check positivity of an element through the representation.

    True iff every block matrix is Hermitian and PSD; the margin is the
    smallest eigenvalue across blocks.
    """
    herm = 0.0
    margin = np.inf
    for m in B.represent(a):
        herm = max(herm, float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0)
        if m.size:
            margin = min(margin, float(np.linalg.eigvalsh((m + m.conj().T) / 2).min()))
    if not np.isfinite(margin):
        margin = 0.0
    return PositivityWitness(herm <= tol and margin >= -tol, margin, herm)


@dataclass(frozen=True)
class StateWitness:
    is_state: bool
    unit_value: complex
    gram_min_eig: float
    gram_hermiticity_defect: float

    def __bool__(self) -> bool:
        return self.is_state


def functional_is_state(B: Bialgebra, phi, tol: float = DEFAULT_TOL) -> StateWitness:
    """Certify a functional as a state: phi(1) = 1 and PSD Gram phi(e_i* e_j)."""
    phi = np.asarray(phi, complex)
    unit_value = complex(np.dot(phi, B.unit))
    gram = np.einsum("ijk,k->ij", B.star_product_coeffs(), phi)
    herm = float(np.max(np.abs(gram - gram.conj().T)))
    min_eig = float(np.linalg.eigvalsh((gram + gram.conj().T) / 2).min())
    ok = abs(unit_value - 1.0) <= tol and herm <= tol and min_eig >= -tol
    return StateWitness(ok, unit_value, min_eig, herm)


# -- axiom validation -----------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    residuals: dict[str, float]
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def worst(self) -> tuple[str, float]:
        name = max(self.residuals, key=self.residuals.get)
        return name, self.residuals[name]


def _maxabs(x) -> float:
    x = np.asarray(x)
    return float(np.max(np.abs(x))) if x.size else 0.0


def validate(B: Bialgebra, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Residual of every bialgebra axiom; passes iff all are <= tol.

    Counital *-bialgebra axioms plus faithfulness of the block
    representation.  Residuals are absolute max-norms of defect tensors.
    """
    m, u, s, D, eps = B.mult, B.unit, B.invol, B.coprod, B.counit
    r: dict[str, float] = {}

    r["associativity"] = _maxabs(np.einsum("ijp,plk->ijlk", m, m)
                                 - np.einsum("jlp,ipk->ijlk", m, m))
    ident = np.eye(B.dim)
    r["unit"] = max(_maxabs(np.einsum("i,ijk->jk", u, m) - ident),
                    _maxabs(np.einsum("j,ijk->ik", u, m) - ident))
    r["involution_involutive"] = _maxabs(np.conj(s) @ s - ident)
    r["involution_antimultiplicative"] = _maxabs(
        np.einsum("ijp,pk->ijk", np.conj(m), s)
        - np.einsum("jp,iq,pqk->ijk", s, s, m))

    # (Delta x id) Delta(e_i) and (id x Delta) Delta(e_i), coefficients at (a,b,k)
    lhs = np.einsum("ick,cab->iabk", D, D)
    rhs = np.einsum("iac,cbk->iabk", D, D)
    r["coassociativity"] = _maxabs(lhs - rhs)

    prod_in_tensor = np.einsum("iab,jcd,acr,bds->ijrs", D, D, m, m)
    r["coproduct_multiplicative"] = _maxabs(np.einsum("ijk,krs->ijrs", m, D) - prod_in_tensor)
    r["coproduct_unital"] = _maxabs(np.einsum("i,irs->rs", u, D) - np.outer(u, u))
    r["coproduct_star"] = _maxabs(np.einsum("ik,krs->irs", s, D)
                                  - np.einsum("iab,ar,bs->irs", np.conj(D), s, s))

    r["counit_character"] = max(
        _maxabs(np.einsum("ijk,k->ij", m, eps) - np.outer(eps, eps)),
        _maxabs(s @ eps - np.conj(eps)),
        abs(complex(np.dot(u, eps)) - 1.0))
    r["counital"] = max(_maxabs(np.einsum("ijk,j->ik", D, eps) - ident),
                        _maxabs(np.einsum("ijk,k->ij", D, eps) - ident))

    rep_mult = 0.0
    rep_star = 0.0
    rep_unit = 0.0
    for blk in B.rep_blocks:
        rep_mult = max(rep_mult, _maxabs(np.einsum("iab,jbc->ijac", blk, blk)
                                         - np.einsum("ijk,kac->ijac", m, blk)))
        rep_star = max(rep_star, _maxabs(np.conj(blk.transpose(0, 2, 1))
                                         - np.einsum("ik,kab->iab", s, blk)))
        n = blk.shape[1]
        rep_unit = max(rep_unit, _maxabs(np.einsum("i,iab->ab", u, blk) - np.eye(n)))
    r["representation_multiplicative"] = rep_mult
    r["representation_star"] = rep_star
    r["representation_unital"] = rep_unit

    stacked = np.concatenate([blk.reshape(B.dim, -1) for blk in B.rep_blocks], axis=1)
    sv = np.linalg.svd(stacked, compute_uv=False)
    faithful = stacked.shape[1] >= B.dim and sv.min() > 1e-9 * max(1.0, sv.max())
    r["representation_faithful"] = 0.0 if faithful else 1.0

    return ValidationReport(residuals=r, tol=tol)


# -- group-derived examples ----------------------------------------------


def check_group_table(table) -> np.ndarray:
    """Validate a Cayley table (0-based indices); returns it as an int array."""
    t = np.asarray(table, dtype=int)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise NotAGroupError("table must be square")
    n = t.shape[0]
    if t.min() < 0 or t.max() >= n:
        raise NotAGroupError("table entries must be indices 0..n-1")
    full = set(range(n))
    for i in range(n):
        if set(t[i, :]) != full or set(t[:, i]) != full:
            raise NotAGroupError("table rows and columns must be permutations")
    identity = None
    for e in range(n):
        if all(t[e, g] == g and t[g, e] == g for g in range(n)):
            identity = e
            break
    if identity is None:
        raise NotAGroupError("table has no identity element")
    for g in range(n):
        if not any(t[g, h] == identity for h in range(n)):
            raise NotAGroupError(f"element {g} has no inverse")
    for i, j, k in itertools.product(range(n), repeat=3):
        if t[t[i, j], k] != t[i, t[j, k]]:
            raise NotAGroupError(f"table is not associative at ({i},{j},{k})")
    return t


def group_identity(table) -> int:
    t = np.asarray(table, dtype=int)
    for e in range(t.shape[0]):
        if all(t[e, g] == g and t[g, e] == g for g in range(t.shape[0])):
            return e
    raise NotAGroupError("table has no identity element")


def function_algebra(table, labels: list[str] | None = None) -> Bialgebra:
    """F(G): functions on a finite group with pointwise product.

    Basis: indicator functions delta_g.  The coproduct dualizes the group
    law, the counit evaluates at the identity, and the representation is by
    diagonal matrices (multiplication operators).  Commutative; cocommutative
    iff G is abelian.
    """
    t = check_group_table(table)
    n = t.shape[0]
    e = group_identity(t)
    mult = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        mult[i, i, i] = 1.0
    unit = np.ones(n, dtype=complex)
    invol = np.eye(n, dtype=complex)
    coprod = np.zeros((n, n, n), dtype=complex)
    for h in range(n):
        for k in range(n):
            coprod[t[h, k], h, k] = 1.0
    counit = np.zeros(n, dtype=complex)
    counit[e] = 1.0
    rep = np.zeros((n, n, n), dtype=complex)
    for i in range(n):
        rep[i, i, i] = 1.0
    if labels is None:
        labels = [f"d{g}" for g in range(n)]
    return Bialgebra(n, tuple(labels), mult, unit, invol, coprod, counit, (rep,))


def group_algebra(table, labels: list[str] | None = None) -> Bialgebra:
    """C[G]: the group algebra with grouplike coproduct.

    Basis: group elements u_g with u_g u_h = u_{gh}, u_g* = u_{g^{-1}},
    Delta(u_g) = u_g (x) u_g and epsilon = 1.  Represented faithfully by the
    left regular representation.  Cocommutative.
    """
    t = check_group_table(table)
    n = t.shape[0]
    e = group_identity(t)
    inv = np.empty(n, dtype=int)
    for g in range(n):
        inv[g] = int(np.where(t[g, :] == e)[0][0])
    mult = np.zeros((n, n, n), dtype=complex)
    for g in range(n):
        for h in range(n):
            mult[g, h, t[g, h]] = 1.0
    unit = np.zeros(n, dtype=complex)
    unit[e] = 1.0
    invol = np.zeros((n, n), dtype=complex)
    for g in range(n):
        invol[g, inv[g]] = 1.0
    coprod = np.zeros((n, n, n), dtype=complex)
    for g in range(n):
        coprod[g, g, g] = 1.0
    counit = np.ones(n, dtype=complex)
    rep = np.zeros((n, n, n), dtype=complex)
    for g in range(n):
        for h in range(n):
            rep[g, t[g, h], h] = 1.0  # u_g: e_h -> e_{gh}
    if labels is None:
        labels = [f"u{g}" for g in range(n)]
    return Bialgebra(n, tuple(labels), mult, unit, invol, coprod, counit, (rep,))


# -- descriptor files -----------------------------------------------------

_KEYS = ("dim", "labels", "mult", "unit", "invol", "coproduct", "counit", "rep_blocks")


def descriptor_to_dict(B: Bialgebra) -> dict:
    return {
        "dim": B.dim,
        "labels": list(B.labels),
        "mult": encode_complex(B.mult),
        "unit": encode_complex(B.unit),
        "invol": encode_complex(B.invol),
        "coproduct": encode_complex(B.coprod),
        "counit": encode_complex(B.counit),
        "rep_blocks": [encode_complex(blk) for blk in B.rep_blocks],
    }


def descriptor_from_dict(obj: dict) -> Bialgebra:
    missing = [k for k in _KEYS if k not in obj]
    if missing:
        raise ParseError(f"descriptor is missing keys: {missing}")
    try:
        d = int(obj["dim"])
    except (TypeError, ValueError) as exc:
        raise ParseError("dim must be an integer") from exc
    labels = tuple(str(x) for x in obj["labels"])
    mult = decode_complex(obj["mult"], (d, d, d))
    unit = decode_complex(obj["unit"], (d,))
    invol = decode_complex(obj["invol"], (d, d))
    coprod = decode_complex(obj["coproduct"], (d, d, d))
    counit = decode_complex(obj["counit"], (d,))
    blocks = []
    for b, blk in enumerate(obj["rep_blocks"]):
        arr = decode_complex(blk)
        if arr.ndim != 3 or arr.shape[0] != d or arr.shape[1] != arr.shape[2]:
            raise ShapeError(f"rep block {b} has shape {arr.shape}, expected (dim, n, n)")
        blocks.append(arr)
    return Bialgebra(d, labels, mult, unit, invol, coprod, counit, tuple(blocks))


def load_descriptor(path) -> Bialgebra:
    """Load a descriptor file.  Shapes are checked; axioms are not (validate)."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError(f"{path}: descriptor must be a JSON object")
    return descriptor_from_dict(obj)


def save_descriptor(B: Bialgebra, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(descriptor_to_dict(B), fh, indent=1, sort_keys=True)
        fh.write("\n")
