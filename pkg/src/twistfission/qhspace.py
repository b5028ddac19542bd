"""Generic twisted quasi-Hamiltonian spaces built from matrix factors, and
the numerical checks of their axioms.

A point is a tuple of matrices (one per *part*).  A tangent vector is a
tuple of Lie-algebra elements, one per part, read through the curve
``t -> expm(t xi) X`` on each part.  The symmetry group is a product of
*group factors*; each factor carries one moment component, a
:class:`~twistfission.twisted.TwistedElement` of the matching size.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .twisted import TwistedElement, twisted_conjugate

# Frozen sign conventions, calibrated on the untwisted double (see
# fusion.calibrate_signs and tests/test_fusion.py):
#   d omega = QH1_SIGN * mu^* chi
#   omega(v_X, .) = QH2_SIGN * 1/2 <mu^*(theta + theta_bar), X>
#   fused omega = omega_1 + omega_2 + FUSION_SIGN * 1/2 <mu_1^* theta ^ mu_2^* theta_bar>
QH1_SIGN = 1
QH2_SIGN = -1
FUSION_SIGN = -1

FD_STEP_NESTED = 1e-4
FD_STEP = 1e-5
COND_LIMIT = 1e6
RANK_RTOL = 1e-8

Point = tuple
Tangent = tuple


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@dataclass(frozen=True, eq=False)
class MaskAlgebra:
    """The subspace of gl_n of matrices supported on ``mask``."""

    mask: np.ndarray

    @property
    def n(self) -> int:
        return self.mask.shape[0]

    @cached_property
    def positions(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(*np.nonzero(self.mask)))

    @property
    def dim(self) -> int:
        return len(self.positions)

    def coords(self, X: np.ndarray) -> np.ndarray:
        return X[self.mask]

    def from_coords(self, v) -> np.ndarray:
        X = np.zeros((self.n, self.n), dtype=complex)
        X[self.mask] = v
        return X

    def basis(self) -> list[np.ndarray]:
        out = []
        for a, b in self.positions:
            E = np.zeros((self.n, self.n), dtype=complex)
            E[a, b] = 1.0
            out.append(E)
        return out

    def random(self, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
        return np.where(self.mask, scale * complex_normal(rng, self.mask.shape), 0)

    def random_group(self, rng: np.random.Generator) -> np.ndarray:
        """Gaussian element of the (block) group with this Lie algebra."""
        while True:
            g = self.random(rng)
            if np.linalg.cond(g) < COND_LIMIT:
                return g

    def contains(self, X: np.ndarray, tol: float = 1e-10) -> bool:
        return float(np.abs(X[~self.mask]).max(initial=0.0)) <= tol * max(1.0, float(np.abs(X).max()))


def full_algebra(n: int) -> MaskAlgebra:
    return MaskAlgebra(np.ones((n, n), dtype=bool))


class QHSpace:
    """Interface of a twisted quasi-Hamiltonian space.

    Subclasses set ``part_algebras`` and ``group_algebras`` and implement
    :meth:`random_point`, :meth:`moment`, :meth:`omega`, :meth:`act_parts`
    and :meth:`lie_act_parts`.  ``act_parts(a)`` returns one pair ``(L, R)``
    per part, the action being ``X -> L X R``.
    """

    part_algebras: list[MaskAlgebra]
    group_algebras: list[MaskAlgebra]
    name: str = "space"

    # -- to implement -----------------------------------------------------------
    def random_point(self, rng: np.random.Generator) -> Point:
        raise NotImplementedError

    def moment(self, p: Point) -> list[TwistedElement]:
        raise NotImplementedError

    def omega(self, p: Point, u: Tangent, v: Tangent) -> complex:
        raise NotImplementedError

    def act_parts(self, a: Sequence[np.ndarray]) -> list[tuple[np.ndarray, np.ndarray]]:
        raise NotImplementedError

    def lie_act_parts(self, X: Sequence[np.ndarray]) -> list[tuple[np.ndarray, np.ndarray]]:
        raise NotImplementedError

    # -- overridable with analytic versions --------------------------------------
    def d_moment(self, p: Point, u: Tangent) -> list[np.ndarray]:
        """Left-trivialized derivatives g_k^-1 dg_k of the moment components."""
        h = 1e-3
        stencil = ((-2, 1 / 12), (-1, -8 / 12), (1, 8 / 12), (2, -1 / 12))
        base = self.moment(p)
        moved = [(c, self.moment(self.flow(p, u, s * h))) for s, c in stencil]
        out = []
        for k, m in enumerate(base):
            dg = sum(c * mk[k].g for c, mk in moved) / h
            out.append(np.linalg.solve(m.g, dg))
        return out

    def omega_matrix(self, p: Point, basis: Sequence[Tangent]) -> np.ndarray:
        D = len(basis)
        W = np.zeros((D, D), dtype=complex)
        for a in range(D):
            for b in range(a + 1, D):
                W[a, b] = self.omega(p, basis[a], basis[b])
                W[b, a] = -W[a, b]
        return W

    # -- generic machinery ----------------------------------------------------------
    @property
    def dim(self) -> int:
        return sum(alg.dim for alg in self.part_algebras)

    @property
    def group_dim(self) -> int:
        return sum(alg.dim for alg in self.group_algebras)

    def act(self, a: Sequence[np.ndarray], p: Point) -> Point:
        return tuple(L @ X @ R for (L, R), X in zip(self.act_parts(a), p))

    def push(self, a: Sequence[np.ndarray], p: Point, u: Tangent) -> Tangent:
        return tuple(L @ xi @ np.linalg.inv(L) for (L, _), xi in zip(self.act_parts(a), u))

    def fundamental(self, p: Point, X: Sequence[np.ndarray]) -> Tangent:
        """Generator of t -> exp(tX) . p, as a tangent."""
        return tuple(l + Y @ r @ np.linalg.inv(Y) for (l, r), Y in zip(self.lie_act_parts(X), p))

    def flow(self, p: Point, u: Tangent, t: float) -> Point:
        return tuple(expm(t * xi) @ X for xi, X in zip(u, p))

    def tangent_bracket(self, u: Tangent, v: Tangent) -> Tangent:
        # vector fields X -> xi X are right-invariant: their bracket is -[xi, zeta]
        return tuple(-bracket(a, b) for a, b in zip(u, v))

    def zero_tangent(self) -> Tangent:
        return tuple(np.zeros((alg.n, alg.n), dtype=complex) for alg in self.part_algebras)

    def random_tangent(self, rng: np.random.Generator) -> Tangent:
        return tuple(alg.random(rng) for alg in self.part_algebras)

    def random_group_element(self, rng: np.random.Generator) -> tuple:
        return tuple(alg.random_group(rng) for alg in self.group_algebras)

    def random_lie(self, rng: np.random.Generator) -> tuple:
        return tuple(alg.random(rng) for alg in self.group_algebras)

    def tangent_basis(self) -> list[Tangent]:
        zero = self.zero_tangent()
        out = []
        for k, alg in enumerate(self.part_algebras):
            for E in alg.basis():
                t = list(zero)
                t[k] = E
                out.append(tuple(t))
        return out

    def twists(self, p: Point | None = None, rng: np.random.Generator | None = None):
        if p is None:
            p = self.random_point(rng or np.random.default_rng(0))
        return [m.phi for m in self.moment(p)]


# -- pulled-back Maurer-Cartan forms ------------------------------------------------

def theta(m: TwistedElement, lam: np.ndarray) -> np.ndarray:
    """mu^* theta for a moment component with left-trivialized derivative lam."""
    return m.phi.inverse().apply_lie(lam)


def theta_bar(m: TwistedElement, lam: np.ndarray) -> np.ndarray:
    return m.g @ lam @ np.linalg.inv(m.g)


def chi_pullback(space: QHSpace, p: Point, u: Tangent, v: Tangent, w: Tangent) -> complex:
    """mu^* chi(u, v, w) with chi = 1/12 <theta, [theta, theta]>."""
    mom = space.moment(p)
    lu, lv, lw = (space.d_moment(p, t) for t in (u, v, w))
    total = 0j
    for k, m in enumerate(mom):
        a, b, c = theta(m, lu[k]), theta(m, lv[k]), theta(m, lw[k])
        total += 0.5 * np.trace(a @ bracket(b, c))
    return complex(total)


def _derivative(f, h: float) -> complex:
    return (f(-2 * h) - 8 * f(-h) + 8 * f(h) - f(2 * h)) / (12 * h)


def d_omega(space: QHSpace, p: Point, u: Tangent, v: Tangent, w: Tangent,
            h: float = FD_STEP_NESTED) -> complex:
    """Exterior derivative of omega on the translation-extended fields."""
    om = space.omega
    br = space.tangent_bracket

    def along(x, y, z):
        return _derivative(lambda t: om(space.flow(p, x, t), y, z), h)

    return (along(u, v, w) - along(v, u, w) + along(w, u, v)
            - om(p, br(u, v), w) + om(p, br(u, w), v) - om(p, br(v, w), u))


def qh1_residual(space: QHSpace, p: Point, u: Tangent, v: Tangent, w: Tangent,
                 sign: int | None = None) -> float:
    sign = QH1_SIGN if sign is None else sign
    return abs(d_omega(space, p, u, v, w) - sign * chi_pullback(space, p, u, v, w))


def moment_one_form(space: QHSpace, p: Point, u: Tangent, X: Sequence[np.ndarray]) -> complex:
    """1/2 <mu^*(theta + theta_bar)(u), X>."""
    lam = space.d_moment(p, u)
    total = 0j
    for m, l, x in zip(space.moment(p), lam, X):
        total += 0.5 * np.trace((theta(m, l) + theta_bar(m, l)) @ x)
    return complex(total)


def qh2_residual(space: QHSpace, p: Point, X: Sequence[np.ndarray], u: Tangent,
                 sign: int | None = None) -> float:
    sign = QH2_SIGN if sign is None else sign
    vX = space.fundamental(p, X)
    return abs(space.omega(p, vX, u) - sign * moment_one_form(space, p, u, X))


@dataclass(frozen=True)
class KernelReport:
    kernel: int
    rank_omega: int
    rank_dmu: int
    dim: int


def _rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > RANK_RTOL * max(s[0], 1e-300)))


def qh3_kernel(space: QHSpace, p: Point) -> KernelReport:
    """dim(ker omega  cap  ker d mu) over the tangent space at p."""
    basis = space.tangent_basis()
    W = space.omega_matrix(p, basis)
    cols = []
    for t in basis:
        lam = space.d_moment(p, t)
        cols.append(np.concatenate([alg.coords(l) for alg, l in zip(space.group_algebras, lam)]))
    J = np.array(cols).T if cols else np.zeros((0, 0))
    # scale the blocks comparably before stacking
    Wn = W / max(np.abs(W).max(initial=0.0), 1e-300)
    Jn = J / max(np.abs(J).max(initial=0.0), 1e-300)
    rank = _rank(np.vstack([Wn, Jn]))
    return KernelReport(len(basis) - rank, _rank(W), _rank(J), len(basis))


def equivariance_residual(space: QHSpace, p: Point, a: Sequence[np.ndarray]) -> float:
    """max_k |mu_k(a.p) - a_k . mu_k(p)| relative to the moment scale."""
    lhs = space.moment(space.act(a, p))
    rhs = [twisted_conjugate(ak, m) for ak, m in zip(a, space.moment(p))]
    res = 0.0
    for x, y in zip(lhs, rhs):
        scale = max(1.0, float(np.abs(y.g).max()))
        res = max(res, float(np.abs(x.g - y.g).max()) / scale)
    return res


def invariance_residual(space: QHSpace, p: Point, a: Sequence[np.ndarray],
                        u: Tangent, v: Tangent) -> float:
    before = space.omega(p, u, v)
    after = space.omega(space.act(a, p), space.push(a, p, u), space.push(a, p, v))
    return abs(after - before) / max(1.0, abs(before))
