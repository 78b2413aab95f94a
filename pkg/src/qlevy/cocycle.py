"""Exact solution of the coalgebraic quantum stochastic differential equation.

The stochastic generator is a kernel map phi into operators on
khat = C (+) k.  For k-vectors c, d its component functional is

    phi_comp(c, d)(b) = <(1, c), phi(b) (1, d)>        (conjugate-linear in c)

and generates the one-parameter convolution semigroup p^{c,d}_t.  For step
functions f, g the matrix-element family

    lam^{f,g}_t = eta * p^{c_0,d_0}_{dt_0} * ... * p^{c_n,d_n}_{dt_n}

(product over the constancy intervals of (f, g) inside [0, t[) is the unique
solution of  d/dt lam = lam * phi_comp(f(t), g(t)),  lam_0 = eta.

Matrix elements against exponential vectors carry the vacuum-free
normalization in lam and one overall factor from the exponential-vector
overlap: with a tail horizon T_max,

    <eps(f), l_t(b) eps(g)> = lam^{f,g}_t(b) * exp(<f, g>_{L2[0, T_max]}).

The first slot is the bra (conjugate-linear).  This matches the discrete
random-walk matrix elements, whose one-step functionals absorb the overlap
growth on [0, nh[ and carry the same tail factor on [nh, T_max].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bialgebra import Bialgebra
from .convolution import KernelMap, conv_exp, convolve
from .errors import BreakpointCollisionError, HorizonError, PreconditionError, ShapeError

TIME_SNAP = 1e-12


@dataclass(frozen=True)
class StepFunction:
    """Right-continuous piecewise-constant function on [0, oo) with values in C^k.

    values[j] is the value on [breakpoints[j-1], breakpoints[j][ (with
    breakpoints[-1] = 0 and the last value holding from the final breakpoint
    on).
    """

    breakpoints: np.ndarray  # (nb,) float, strictly increasing, nonnegative
    values: np.ndarray       # (nb + 1, k) complex

    def __post_init__(self):
        bp = np.array(self.breakpoints, dtype=float).reshape(-1)
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 2:
            raise ShapeError("values must be a (n_breakpoints + 1, k) array")
        if vals.shape[0] != bp.size + 1:
            raise ShapeError(
                f"{bp.size} breakpoints need {bp.size + 1} values, got {vals.shape[0]}")
        if bp.size and (np.any(np.diff(bp) <= 0) or bp[0] < 0):
            raise ShapeError("breakpoints must be strictly increasing and nonnegative")
        bp.flags.writeable = False
        vals.flags.writeable = False
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)

    @property
    def noise_dim(self) -> int:
        return self.values.shape[1]

    def value_at(self, t: float) -> np.ndarray:
        idx = int(np.searchsorted(self.breakpoints, t + TIME_SNAP, side="left"))
        return self.values[idx]

    def shifted(self, s: float) -> "StepFunction":
        """The time-shifted function t -> f(t + s)."""
        dropped = int(np.searchsorted(self.breakpoints, s + TIME_SNAP, side="left"))
        return StepFunction(self.breakpoints[dropped:] - s, self.values[dropped:])

    def with_extra_breakpoint(self, t: float) -> "StepFunction":
        """Insert a spurious breakpoint; the function is unchanged."""
        if t <= 0 or np.min(np.abs(self.breakpoints - t), initial=np.inf) < TIME_SNAP:
            return self
        idx = int(np.searchsorted(self.breakpoints, t))
        bp = np.insert(self.breakpoints, idx, t)
        vals = np.insert(self.values, idx, self.values[idx], axis=0)
        return StepFunction(bp, vals)

    def to_dict(self) -> dict:
        return {"breakpoints": [float(t) for t in self.breakpoints],
                "values": [[[float(z.real), float(z.imag)] for z in row]
                           for row in self.values]}

    @staticmethod
    def from_dict(obj: dict) -> "StepFunction":
        from fractions import Fraction
        bp = [float(Fraction(t)) if isinstance(t, str) else float(t)
              for t in obj["breakpoints"]]
        vals = np.asarray(obj["values"], dtype=float)
        if vals.ndim != 3 or vals.shape[-1] != 2:
            raise ShapeError("step-function values must be [re, im] pairs")
        return StepFunction(np.asarray(bp), vals[..., 0] + 1j * vals[..., 1])


def zero_step(noise_dim: int) -> StepFunction:
    return StepFunction(np.zeros(0), np.zeros((1, noise_dim), complex))


def constant_step(value) -> StepFunction:
    value = np.asarray(value, complex).reshape(1, -1)
    return StepFunction(np.zeros(0), value)


def l2_inner(f: StepFunction, g: StepFunction, a: float, b: float) -> complex:
    """<f, g> over [a, b], conjugate-linear in f."""
    if b <= a + TIME_SNAP:
        return 0.0 + 0.0j
    cuts = np.concatenate((f.breakpoints, g.breakpoints))
    cuts = np.unique(cuts[(cuts > a + TIME_SNAP) & (cuts < b - TIME_SNAP)])
    grid = np.concatenate(([a], cuts, [b]))
    total = 0.0 + 0.0j
    for lo, hi in zip(grid[:-1], grid[1:]):
        total += np.vdot(f.value_at(lo), g.value_at(lo)) * (hi - lo)
    return complex(total)


@dataclass(frozen=True)
class CocycleSpec:
    """A stochastic generator with an optional non-unit initial functional."""

    algebra: Bialgebra
    phi: KernelMap
    eta: np.ndarray | None = None

    def __post_init__(self):
        if self.phi.dim != self.algebra.dim:
            raise ShapeError("generator and algebra dimensions differ")
        if self.eta is not None:
            eta = np.array(self.eta, dtype=complex).reshape(-1)
            if eta.size != self.algebra.dim:
                raise ShapeError("initial functional has wrong length")
            eta.flags.writeable = False
            object.__setattr__(self, "eta", eta)

    @property
    def noise_dim(self) -> int:
        return self.phi.noise_dim

    def initial(self) -> np.ndarray:
        return self.algebra.counit.copy() if self.eta is None else self.eta.copy()


def phi_component(phi: KernelMap, c, d) -> np.ndarray:
    """Functional <(1,c), phi(.) (1,d)>; conjugate-linear in c, linear in d."""
    c = np.asarray(c, complex).reshape(-1)
    d = np.asarray(d, complex).reshape(-1)
    if c.size != phi.noise_dim or d.size != phi.noise_dim:
        raise ShapeError("component vectors must live in the noise space")
    chat = np.concatenate(([1.0 + 0j], c))
    dhat = np.concatenate(([1.0 + 0j], d))
    return np.einsum("a,iab,b->i", np.conj(chat), phi.blocks, dhat)


def associated_semigroup(spec: CocycleSpec, c, d, t: float,
                         algorithm: str = "rmap") -> np.ndarray:
    """The semigroup functional p^{c,d}_t; c = d = 0 is the Markov semigroup."""
    if t < 0:
        raise PreconditionError("time must be nonnegative")
    return conv_exp(spec.algebra, phi_component(spec.phi, c, d), t, algorithm=algorithm)


def _segments(f: StepFunction, g: StepFunction, t: float) -> list[tuple[float, float]]:
    cuts = np.concatenate((f.breakpoints, g.breakpoints))
    cuts = np.sort(cuts[(cuts > TIME_SNAP) & (cuts < t - TIME_SNAP)])
    if cuts.size:
        keep = np.concatenate(([True], np.diff(cuts) > TIME_SNAP))
        cuts = cuts[keep]
    grid = np.concatenate(([0.0], cuts, [t]))
    return [(float(a), float(b)) for a, b in zip(grid[:-1], grid[1:])]


def form_solution(spec: CocycleSpec, f: StepFunction, g: StepFunction, t: float,
                  algorithm: str = "rmap") -> np.ndarray:
    """lam^{f,g}_t via the semigroup splitting over constancy intervals."""
    if t < 0:
        raise PreconditionError("time must be nonnegative")
    B = spec.algebra
    lam = spec.initial()
    if t <= TIME_SNAP:
        return lam
    for a, b in _segments(f, g, t):
        comp = phi_component(spec.phi, f.value_at(a), g.value_at(a))
        lam = convolve(B, lam, conv_exp(B, comp, b - a, algorithm=algorithm))
    return lam


def default_horizon(f: StepFunction, g: StepFunction, t: float) -> float:
    last = max([t] + list(f.breakpoints) + list(g.breakpoints))
    return last + 1.0


def cocycle_matrix_element(spec: CocycleSpec, f: StepFunction, g: StepFunction,
                           t: float, b, t_max: float | None = None) -> complex:
    """<eps(f), l_t(b) eps(g)> with exponential vectors cut at t_max."""
    if t_max is None:
        t_max = default_horizon(f, g, t)
    if t > t_max + TIME_SNAP:
        raise HorizonError(f"time {t} exceeds horizon {t_max}")
    lam = form_solution(spec, f, g, t)
    value = spec.algebra.eval_functional(lam, b)
    return value * complex(np.exp(l2_inner(f, g, 0.0, t_max)))


def verify_cocycle_identity(spec: CocycleSpec, f: StepFunction, g: StepFunction,
                            s: float, t: float) -> float:
    """Residual of lam_{s+t} = lam_s * lam^{shifted}_t in dual coefficients.

    Zero (to semigroup-splitting accuracy) when the initial functional is
    the counit; a genuine defect otherwise.
    """
    if s < 0 or t < 0:
        raise PreconditionError("times must be nonnegative")
    lhs = form_solution(spec, f, g, s + t)
    rhs = convolve(spec.algebra,
                   form_solution(spec, f, g, s),
                   form_solution(spec, f.shifted(s), g.shifted(s), t))
    return float(np.max(np.abs(lhs - rhs)))


@dataclass(frozen=True)
class IntegralCheck:
    residual: float
    h_fd: float
    curvature_estimate: float  # residual / h_fd^2

    @property
    def consistent(self) -> bool:
        return np.isfinite(self.curvature_estimate)


def verify_integral_equation(spec: CocycleSpec, f: StepFunction, g: StepFunction,
                             t: float, b, h_fd: float = 1e-4) -> IntegralCheck:
    """Centered-difference check of d/dt lam_t(b) = (lam_t * phi_comp)(b).

    Requires t to sit inside a constancy interval of both step functions;
    the residual scales as O(h_fd^2).
    """
    if t - h_fd < -TIME_SNAP:
        raise BreakpointCollisionError("t - h_fd falls below zero")
    for sf in (f, g):
        if sf.breakpoints.size:
            if float(np.min(np.abs(sf.breakpoints - t))) <= h_fd + TIME_SNAP:
                raise BreakpointCollisionError(
                    f"t = {t} is within {h_fd} of a breakpoint")
    B = spec.algebra
    fd = (B.eval_functional(form_solution(spec, f, g, t + h_fd), b)
          - B.eval_functional(form_solution(spec, f, g, t - h_fd), b)) / (2 * h_fd)
    comp = phi_component(spec.phi, f.value_at(t), g.value_at(t))
    drift = B.eval_functional(convolve(B, form_solution(spec, f, g, t), comp), b)
    residual = abs(fd - drift)
    return IntegralCheck(residual, h_fd, residual / h_fd ** 2)


def cp_gram_witness(spec: CocycleSpec, t: float, fs: list[StepFunction],
                    elements: list, t_max: float | None = None) -> float:
    """Minimum eigenvalue of M_ij = <eps(f_i), l_t(a_i* a_j) eps(f_j)>.

    For a completely positive cocycle every such matrix is PSD, so a
    negative eigenvalue beyond tolerance witnesses a positivity violation.
    """
    if len(fs) != len(elements):
        raise PreconditionError("witness lists must have equal length")
    B = spec.algebra
    n = len(fs)
    if t_max is None:
        t_max = max(default_horizon(fi, fi, t) for fi in fs)
    M = np.empty((n, n), dtype=complex)
    for i in range(n):
        ai_star = B.star(elements[i])
        for j in range(n):
            prod = B.multiply(ai_star, elements[j])
            M[i, j] = cocycle_matrix_element(spec, fs[i], fs[j], t, prod, t_max=t_max)
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2).min())
