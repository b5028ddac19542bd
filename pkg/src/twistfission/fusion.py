"""Products, fusion and twisted doubles of quasi-Hamiltonian spaces."""
from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from . import qhspace
from .qhspace import MaskAlgebra, QHSpace, full_algebra, theta, theta_bar
from .twisted import Automorphism, TwistedElement, block_mask, compose


class FusionError(ValueError):
    """Incompatible factors for fusion."""


class ProductSpace(QHSpace):
    """M1 x M2 with the product group; no fusion term."""

    def __init__(self, spaces: Sequence[QHSpace]):
        self.spaces = list(spaces)
        self.part_algebras = [a for s in self.spaces for a in s.part_algebras]
        self.group_algebras = [a for s in self.spaces for a in s.group_algebras]
        self.name = " x ".join(s.name for s in self.spaces)
        self._parts = list(itertools.accumulate([0] + [len(s.part_algebras) for s in self.spaces]))
        self._groups = list(itertools.accumulate([0] + [len(s.group_algebras) for s in self.spaces]))

    def _split(self, x, offsets):
        return [tuple(x[offsets[i]:offsets[i + 1]]) for i in range(len(self.spaces))]

    def random_point(self, rng):
        return tuple(X for s in self.spaces for X in s.random_point(rng))

    def moment(self, p):
        return [m for s, q in zip(self.spaces, self._split(p, self._parts)) for m in s.moment(q)]

    def d_moment(self, p, u):
        return [l for s, q, t in zip(self.spaces, self._split(p, self._parts), self._split(u, self._parts))
                for l in s.d_moment(q, t)]

    def omega(self, p, u, v):
        P, U, V = (self._split(x, self._parts) for x in (p, u, v))
        return sum(s.omega(q, a, b) for s, q, a, b in zip(self.spaces, P, U, V))

    def omega_matrix(self, p, basis):
        # block diagonal over factors when the basis is the standard one
        return super().omega_matrix(p, basis)

    def act_parts(self, a):
        return [lr for s, ak in zip(self.spaces, self._split(a, self._groups)) for lr in s.act_parts(ak)]

    def lie_act_parts(self, X):
        return [lr for s, xk in zip(self.spaces, self._split(X, self._groups)) for lr in s.lie_act_parts(xk)]


class InternalFusion(QHSpace):
    """Fuse group factors i < j of ``base`` into a single diagonal factor.

    The fused moment component is ``mu_i mu_j`` and the two-form gains
    ``FUSION_SIGN * 1/2 <mu_i^* theta ^ mu_j^* theta_bar>``.
    """

    def __init__(self, base: QHSpace, i: int, j: int, sign: int | None = None):
        if i == j:
            raise FusionError("cannot fuse a factor with itself")
        i, j = min(i, j), max(i, j)
        ai, aj = base.group_algebras[i], base.group_algebras[j]
        if ai.mask.shape != aj.mask.shape or not np.array_equal(ai.mask, aj.mask):
            raise FusionError(f"factors {i} and {j} have incompatible groups "
                              f"({ai.mask.shape[0]} vs {aj.mask.shape[0]})")
        self.base, self.i, self.j = base, i, j
        self.sign = qhspace.FUSION_SIGN if sign is None else sign
        self.part_algebras = list(base.part_algebras)
        self.group_algebras = [a for k, a in enumerate(base.group_algebras) if k != j]
        self.name = f"fuse({base.name}; {i},{j})"

    def _expand(self, a):
        a = list(a)
        a.insert(self.j, a[self.i])
        return a

    def random_point(self, rng):
        return self.base.random_point(rng)

    def moment(self, p):
        mom = self.base.moment(p)
        fused = compose(mom[self.i], mom[self.j])
        return [fused if k == self.i else m for k, m in enumerate(mom) if k != self.j]

    def d_moment(self, p, u):
        mom = self.base.moment(p)
        lam = self.base.d_moment(p, u)
        mi, mj = mom[self.i], mom[self.j]
        y = mi.phi.apply(mj.g)
        fused = np.linalg.solve(y, lam[self.i] @ y) + mi.phi.apply_lie(lam[self.j])
        return [fused if k == self.i else l for k, l in enumerate(lam) if k != self.j]

    def _correction_forms(self, p, tangents):
        mom = self.base.moment(p)
        mi, mj = mom[self.i], mom[self.j]
        th, thb = [], []
        for t in tangents:
            lam = self.base.d_moment(p, t)
            th.append(theta(mi, lam[self.i]))
            thb.append(theta_bar(mj, lam[self.j]))
        return np.array(th), np.array(thb)

    def omega(self, p, u, v):
        th, thb = self._correction_forms(p, (u, v))
        corr = np.trace(th[0] @ thb[1]) - np.trace(th[1] @ thb[0])
        return self.base.omega(p, u, v) + self.sign * 0.5 * corr

    def omega_matrix(self, p, basis):
        W = self.base.omega_matrix(p, basis)
        th, thb = self._correction_forms(p, basis)
        M = np.einsum("aij,bji->ab", th, thb)
        return W + self.sign * 0.5 * (M - M.T)

    def act_parts(self, a):
        return self.base.act_parts(self._expand(a))

    def lie_act_parts(self, X):
        return self.base.lie_act_parts(self._expand(X))


class SplitFactor(QHSpace):
    """Split a block-diagonal group factor into its diagonal blocks.

    Only valid when the factor's moment twist preserves each block.
    """

    def __init__(self, base: QHSpace, k: int, blocks: Sequence[int]):
        alg = base.group_algebras[k]
        if not np.array_equal(alg.mask, block_mask(blocks)):
            raise FusionError("factor is not block diagonal with the given blocks")
        self.base, self.k, self.blocks = base, k, list(blocks)
        self.offsets = list(itertools.accumulate([0] + self.blocks))
        self.part_algebras = list(base.part_algebras)
        new = [full_algebra(b) for b in self.blocks]
        self.group_algebras = base.group_algebras[:k] + new + base.group_algebras[k + 1:]
        self.name = f"split({base.name}; {k})"

    def _sl(self, i):
        return slice(self.offsets[i], self.offsets[i + 1])

    def _join(self, a):
        a = list(a)
        nb = len(self.blocks)
        pieces = a[self.k:self.k + nb]
        n = self.offsets[-1]
        M = np.zeros((n, n), dtype=complex)
        for i, x in enumerate(pieces):
            M[self._sl(i), self._sl(i)] = x
        return a[:self.k] + [M] + a[self.k + nb:]

    def _split_auto(self, phi: Automorphism) -> list[Automorphism]:
        if phi.A is None:
            return [Automorphism(None, phi.outer, phi.kind) for _ in self.blocks]
        out = []
        for i in range(len(self.blocks)):
            A = phi.A[self._sl(i), self._sl(i)]
            if not np.allclose(np.delete(phi.A[self._sl(i)], np.arange(self.offsets[i], self.offsets[i + 1]),
                                         axis=1), 0):
                raise FusionError("moment twist mixes the blocks; cannot split")
            out.append(Automorphism(A, phi.outer, phi.kind))
        return out

    def random_point(self, rng):
        return self.base.random_point(rng)

    def moment(self, p):
        mom = self.base.moment(p)
        m = mom[self.k]
        parts = [TwistedElement(m.g[self._sl(i), self._sl(i)], phi)
                 for i, phi in enumerate(self._split_auto(m.phi))]
        return mom[:self.k] + parts + mom[self.k + 1:]

    def d_moment(self, p, u):
        lam = self.base.d_moment(p, u)
        parts = [lam[self.k][self._sl(i), self._sl(i)] for i in range(len(self.blocks))]
        return lam[:self.k] + parts + lam[self.k + 1:]

    def omega(self, p, u, v):
        return self.base.omega(p, u, v)

    def omega_matrix(self, p, basis):
        return self.base.omega_matrix(p, basis)

    def act_parts(self, a):
        return self.base.act_parts(self._join(a))

    def lie_act_parts(self, X):
        return self.base.lie_act_parts(self._join(X))


class TrivialSpace(QHSpace):
    """A point with moment 1 in G(id); the unit for fusion."""

    def __init__(self, n: int):
        self.n = n
        self.part_algebras = []
        self.group_algebras = [full_algebra(n)]
        self.name = "point"

    def random_point(self, rng):
        return ()

    def moment(self, p):
        return [TwistedElement(np.eye(self.n, dtype=complex))]

    def d_moment(self, p, u):
        return [np.zeros((self.n, self.n), dtype=complex)]

    def omega(self, p, u, v):
        return 0j

    def act_parts(self, a):
        return []

    def lie_act_parts(self, X):
        return []


def swap_twist(phi: Automorphism, n: int) -> Automorphism:
    """chi_phi(g1, g2) = (phi(g2), phi^-1(g1)) as an automorphism of GL_2n
    restricted to the block-diagonal subgroup."""
    inv = phi.inverse()
    B = np.eye(n, dtype=complex) if phi.A is None else phi.A
    Bp = np.eye(n, dtype=complex) if inv.A is None else inv.A
    A = np.zeros((2 * n, 2 * n), dtype=complex)
    A[:n, n:] = B
    A[n:, :n] = Bp
    return Automorphism(A, phi.outer, "composite")


class TwistedGroupSpace(QHSpace):
    """G(phi) as a space for H = G x G: x -> a x phi(b)^-1, omega = 0,
    moment ((x, phi^-1(x^-1)), chi_phi)."""

    def __init__(self, n: int, phi: Automorphism | None = None):
        self.n = n
        self.phi = phi or Automorphism.identity()
        self.part_algebras = [full_algebra(n)]
        self.group_algebras = [MaskAlgebra(block_mask([n, n]))]
        self.chi = swap_twist(self.phi, n)
        self.name = f"G({self.phi.tag()})"

    def random_point(self, rng):
        return (full_algebra(self.n).random_group(rng),)

    def moment(self, p):
        (x,) = p
        n = self.n
        g = np.zeros((2 * n, 2 * n), dtype=complex)
        g[:n, :n] = x
        g[n:, n:] = self.phi.inverse().apply(np.linalg.inv(x))
        return [TwistedElement(g, self.chi)]

    def d_moment(self, p, u):
        (x,), (xi,) = p, u
        n = self.n
        lam = np.zeros((2 * n, 2 * n), dtype=complex)
        lam[:n, :n] = np.linalg.solve(x, xi @ x)
        lam[n:, n:] = -self.phi.inverse().apply_lie(xi)
        return [lam]

    def omega(self, p, u, v):
        return 0j

    def omega_matrix(self, p, basis):
        return np.zeros((len(basis), len(basis)), dtype=complex)

    def act_parts(self, a):
        (ab,) = a
        n = self.n
        return [(ab[:n, :n], np.linalg.inv(self.phi.apply(ab[n:, n:])))]

    def lie_act_parts(self, X):
        (xb,) = X
        n = self.n
        return [(xb[:n, :n], -self.phi.apply_lie(xb[n:, n:]))]


def fuse(m1: QHSpace, m2: QHSpace, i1: int = 0, i2: int = 0, sign: int | None = None) -> QHSpace:
    """m1 (*) m2 over group factor i1 of m1 and i2 of m2; moment mu1 mu2."""
    prod = ProductSpace([m1, m2])
    fused = InternalFusion(prod, i1, len(m1.group_algebras) + i2, sign=sign)
    fused.name = f"({m1.name} * {m2.name})"
    return fused


def twisted_double(n: int, phi: Automorphism | None = None, psi: Automorphism | None = None,
                   sign: int | None = None) -> QHSpace:
    """D(phi, psi) = G(phi) (*) G(psi^-1), a space for H = G x G."""
    phi = phi or Automorphism.identity()
    psi = psi or Automorphism.identity()
    space = fuse(TwistedGroupSpace(n, phi), TwistedGroupSpace(n, psi.inverse()), sign=sign)
    space.name = f"D({phi.tag()},{psi.tag()})"
    return space


def internally_fused_double(n: int, phi: Automorphism | None = None, psi: Automorphism | None = None,
                            sign: int | None = None) -> QHSpace:
    """The G-space obtained by fusing the two G factors of D(phi, psi);
    its moment lands in G(phi psi phi^-1 psi^-1)."""
    split = SplitFactor(twisted_double(n, phi, psi, sign=sign), 0, [n, n])
    space = InternalFusion(split, 0, 1, sign=sign)
    space.name = f"DD({(phi or Automorphism.identity()).tag()},{(psi or Automorphism.identity()).tag()})"
    return space


def calibrate_signs(n: int = 2, seeds: int = 5, tol: float = 1e-6) -> list[tuple[int, int, int]]:
    """All (QH1, QH2, fusion) sign triples under which the untwisted double
    D(id, id) passes QH1 and QH2 on the given seeds."""
    passing = []
    for fsign in (1, -1):
        space = twisted_double(n, sign=fsign)
        for s1, s2 in itertools.product((1, -1), repeat=2):
            ok = True
            for seed in range(seeds):
                rng = np.random.default_rng(seed)
                p = space.random_point(rng)
                u, v, w = (space.random_tangent(rng) for _ in range(3))
                X = space.random_lie(rng)
                if (qhspace.qh1_residual(space, p, u, v, w, sign=s1) > tol
                        or qhspace.qh2_residual(space, p, X, u, sign=s2) > tol):
                    ok = False
                    break
            if ok:
                passing.append((s1, s2, fsign))
    return passing
