"""The fission space A(Q) = G x H(d) x prod_d Sto_d as an explicit matrix
manifold with its action, group-valued moment map and two-form."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .qhspace import MaskAlgebra, QHSpace, full_algebra
from .stokes import FormalGroup, IrregularClass, StokesStructure, formal_group, root_sequence, singular_directions
from .twisted import Automorphism, TwistedElement, in_twist_coset


class ModelError(ValueError):
    """Invalid fission model or point."""


def nilpotent_exp(X: np.ndarray) -> np.ndarray:
    n = X.shape[0]
    out = np.eye(n, dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        term = term @ X / k
        if not term.any():
            break
        out = out + term
    return out


def unipotent_log(S: np.ndarray) -> np.ndarray:
    n = S.shape[0]
    Y = S - np.eye(n)
    out = np.zeros((n, n), dtype=complex)
    term = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        term = term @ Y
        if not term.any():
            break
        out = out + ((-1) ** (k + 1) / k) * term
    return out


def _mask_nilpotent(mask: np.ndarray) -> bool:
    A = mask.astype(int)
    M = A.copy()
    for _ in range(mask.shape[0]):
        if not M.any():
            return True
        M = np.minimum(M @ A, 1)
    return not M.any()


@dataclass(frozen=True, eq=False)
class FissionModel:
    """Combinatorial data of A(Q): Levi blocks, coset matrix P and the
    block supports of the Stokes algebras s_d."""

    structure: StokesStructure
    label: str = ""

    @classmethod
    def from_class(cls, Q: IrregularClass, label: str = "") -> "FissionModel":
        return cls(singular_directions(Q), label)

    @cached_property
    def formal(self) -> FormalGroup:
        return formal_group(self.structure)

    @property
    def N(self) -> int:
        return self.structure.rank

    @property
    def s(self) -> int:
        return len(self.structure.directions)

    @property
    def levi_blocks(self) -> list[int]:
        return self.structure.levi_blocks

    @cached_property
    def P(self) -> np.ndarray:
        return self.formal.permutation_matrix()

    @cached_property
    def levi(self) -> MaskAlgebra:
        return MaskAlgebra(self.formal.levi_mask())

    @cached_property
    def stokes_algebras(self) -> list[MaskAlgebra]:
        fg = self.formal
        out = []
        for d in self.structure.directions:
            mask = np.zeros((self.N, self.N), dtype=bool)
            for i, j in d.roots:
                mask[fg.block_slice(i), fg.block_slice(j)] = True
            if not _mask_nilpotent(mask):
                raise ModelError(f"Stokes algebra at {d.direction.turns} is not nilpotent")
            out.append(MaskAlgebra(mask))
        return out

    @property
    def stokes_basis(self) -> list[tuple[tuple[int, int], ...]]:
        return [alg.positions for alg in self.stokes_algebras]

    @property
    def dim(self) -> int:
        return self.N ** 2 + self.levi.dim + sum(a.dim for a in self.stokes_algebras)

    def descriptor(self) -> dict:
        return {"label": self.label, "stokes": self.structure.to_json()}

    def descriptor_hash(self) -> str:
        blob = json.dumps(self.descriptor(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    # -- points ---------------------------------------------------------------
    def random_point(self, rng: np.random.Generator) -> "FissionPoint":
        C = full_algebra(self.N).random_group(rng)
        h = self.levi.random_group(rng) @ self.P
        S = tuple(nilpotent_exp(alg.random(rng)) for alg in self.stokes_algebras)
        return FissionPoint(C, h, S)

    def validate(self, p: "FissionPoint", tol: float = 1e-10) -> None:
        if len(p.S) != self.s:
            raise ModelError(f"expected {self.s} Stokes factors, got {len(p.S)}")
        if not in_twist_coset(p.h, self.formal.levi_mask(), self.P, tol):
            raise ModelError("h is not in the coset H P")
        for d, (S, alg) in enumerate(zip(p.S, self.stokes_algebras)):
            if not alg.contains(unipotent_log(S), tol):
                raise ModelError(f"S[{d}] is not in its Stokes group")
        if abs(np.linalg.det(p.C)) < 1e-300:
            raise ModelError("C is singular")


@dataclass(frozen=True, eq=False)
class FissionPoint:
    C: np.ndarray
    h: np.ndarray
    S: tuple[np.ndarray, ...]

    def as_tuple(self) -> tuple:
        return (self.C, self.h, *self.S)

    @classmethod
    def from_tuple(cls, p: Sequence[np.ndarray]) -> "FissionPoint":
        return cls(p[0], p[1], tuple(p[2:]))


@dataclass(frozen=True, eq=False)
class Tangent:
    """(c, eta, sigma_1..sigma_s) with curves t -> exp(t xi) X."""

    c: np.ndarray
    eta: np.ndarray
    sigma: tuple[np.ndarray, ...]

    def as_tuple(self) -> tuple:
        return (self.c, self.eta, *self.sigma)


def _alternating(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Matrix of <alpha ^ beta> over a basis, from stacks alpha_a, beta_b."""
    M = np.einsum("aij,bji->ab", A, B)
    return M - M.T


class FissionSpace(QHSpace):
    """A(Q) as a quasi-Hamiltonian G x H space.

    Parts are (C, h, S_1, ..., S_s); group factors are G = GL_N and the
    Levi H.  ``corrupt=True`` flips the sign of the <gamma_bar ^ beta_bar>
    term, a negative control for the axiom checks.
    """

    def __init__(self, model: FissionModel, corrupt: bool = False):
        self.model = model
        self.corrupt = corrupt
        N = model.N
        self.part_algebras = [full_algebra(N), model.levi, *model.stokes_algebras]
        self.group_algebras = [full_algebra(N), model.levi]
        self.name = f"A({model.label or 'Q'})"
        self._P = model.P
        self._Pinv = np.linalg.inv(model.P)
        self._h_twist = Automorphism.inner(self._Pinv)

    def random_point(self, rng):
        return self.model.random_point(rng).as_tuple()

    def _unpack(self, p):
        return p[0], p[1], p[2:]

    def _b(self, h, S):
        B = np.eye(self.model.N, dtype=complex)
        for Sd in S:
            B = Sd @ B
        return h @ B

    def moment(self, p):
        C, h, S = self._unpack(p)
        b = self._b(h, S)
        mu_G = np.linalg.solve(C, b @ C)
        mu_H = np.linalg.solve(h, self._P)
        return [TwistedElement(mu_G), TwistedElement(mu_H, self._h_twist)]

    # -- pulled-back one-forms, vectorized over a list of tangents --------------
    def _forms(self, p, tangents):
        C, h, S = self._unpack(p)
        T = len(tangents)
        c = np.array([t[0] for t in tangents])
        eta = np.array([t[1] for t in tangents])
        sig = [np.array([t[2 + d] for t in tangents]) for d in range(len(S))]
        gbar = [c]
        delta = np.zeros_like(c)
        for d, Sd in enumerate(S):
            Sinv = np.linalg.inv(Sd)
            gbar.append(Sd @ gbar[-1] @ Sinv + sig[d])
            delta = Sd @ delta @ Sinv + sig[d]
        hinv = np.linalg.inv(h)
        beta_bar = eta + h @ delta @ hinv
        eta_hat = hinv @ eta @ h
        Ci = C
        gam = [np.linalg.solve(Ci, gbar[0] @ Ci) if T else gbar[0]]
        for d, Sd in enumerate(S):
            Ci = Sd @ Ci
            gam.append(np.linalg.solve(Ci, gbar[d + 1] @ Ci))
        return dict(C=C, h=h, S=S, b=self._b(h, S), c=c, gbar=gbar, gam=gam,
                    beta_bar=beta_bar, eta=eta, eta_hat=eta_hat)

    def omega_matrix(self, p, basis):
        if not basis:
            return np.zeros((0, 0), dtype=complex)
        f = self._forms(p, basis)
        b, binv = f["b"], np.linalg.inv(f["b"])
        gb0 = f["gbar"][0]
        total = _alternating(gb0, b @ gb0 @ binv)
        total = total + (-1 if self.corrupt else 1) * _alternating(gb0, f["beta_bar"])
        total = total + _alternating(f["gbar"][-1], f["eta_hat"])
        gam = f["gam"]
        for i in range(1, len(gam)):
            total = total - _alternating(gam[i], gam[i - 1])
        return 0.5 * total

    def omega(self, p, u, v):
        return complex(self.omega_matrix(p, [u, v])[0, 1])

    def d_moment(self, p, u):
        f = self._forms(p, [u])
        C, b = f["C"], f["b"]
        c, bb, eta = f["c"][0], f["beta_bar"][0], f["eta"][0]
        inner = -np.linalg.solve(b, c @ b) + np.linalg.solve(b, bb @ b) + c
        lam_G = np.linalg.solve(C, inner @ C)
        lam_H = -self._Pinv @ eta @ self._P
        return [lam_G, lam_H]

    def act_parts(self, a):
        g, k = a
        kinv = np.linalg.inv(k)
        return [(k, np.linalg.inv(g)), (k, kinv)] + [(k, kinv)] * self.model.s

    def lie_act_parts(self, X):
        x, y = X
        return [(y, -x), (y, -y)] + [(y, -y)] * self.model.s

    # -- typed conveniences -------------------------------------------------------
    def action(self, g, k, p: FissionPoint) -> FissionPoint:
        if not self.model.levi.contains(k):
            raise ModelError("k is not block diagonal in the Levi")
        return FissionPoint.from_tuple(self.act((g, k), p.as_tuple()))

    def moment_map(self, p: FissionPoint) -> tuple[TwistedElement, TwistedElement]:
        mG, mH = self.moment(p.as_tuple())
        return mG, mH

    def two_form(self, p: FissionPoint, u: Tangent, v: Tangent) -> complex:
        return self.omega(p.as_tuple(), u.as_tuple(), v.as_tuple())


# -- one-level structure ----------------------------------------------------------

@dataclass(frozen=True)
class SpanReport:
    ok: bool
    l: int | None
    period_ok: bool
    half_dim: int
    details: tuple[str, ...] = ()


def _is_parabolic(roots: frozenset, n_branches: int) -> bool:
    for a in range(n_branches):
        for b in range(a + 1, n_branches):
            if ((a, b) in roots) == ((b, a) in roots):
                return False
    return True


def parabolic_span_check(model: FissionModel | StokesStructure) -> SpanReport:
    """Check that every l consecutive Stokes algebras span the nilradical of
    a parabolic, and that the root data repeat with period 2l."""
    S = model.structure if isinstance(model, FissionModel) else model
    levels = S.levels
    if len(levels) > 1:
        raise ModelError(f"model has {len(levels)} levels; the span check needs exactly one")
    s = len(S.directions)
    if s == 0:
        raise ModelError("model has no singular directions")
    bs = S.branch_system
    nb = len(bs.blocks)
    N = bs.rank
    half = (N * N - sum(b * b for b in bs.blocks)) // 2

    def dim_of(roots):
        return sum(bs.blocks[i] * bs.blocks[j] for i, j in roots)

    max_l = s * math.lcm(1, *(len(set(o)) for o in _sigma_orbits(bs.sigma))) * 2
    seq = root_sequence(S, s + 3 * max_l)
    for l in range(1, max_l + 1):
        good = True
        for j in range(s):
            window = seq[j:j + l]
            union = frozenset().union(*window)
            if sum(len(w) for w in window) != len(union):
                good = False
                break
            if dim_of(union) != half or not _is_parabolic(union, nb):
                good = False
                break
        if good:
            period_ok = all(seq[j + 2 * l] == seq[j] for j in range(s))
            return SpanReport(period_ok, l, period_ok, half)
    return SpanReport(False, None, False, half, ("no window length gives a parabolic span",))


def _sigma_orbits(sigma: Sequence[int]) -> list[list[int]]:
    seen, out = set(), []
    for i in range(len(sigma)):
        if i in seen:
            continue
        orbit, j = [], i
        while j not in seen:
            seen.add(j)
            orbit.append(j)
            j = sigma[j]
        out.append(orbit)
    return out
