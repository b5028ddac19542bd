"""Twisted groups G(phi) inside G x| Aut(G), for G = GL_N.

Every automorphism used here is stored in the normal form
``g -> A tau^o(g) A^-1`` with ``tau(g) = g^-T`` and ``o`` in {0, 1}, which
makes composition, inversion and equality exact bookkeeping.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

COSET_TOL = 1e-10


def _tau(g: np.ndarray) -> np.ndarray:
    return np.linalg.inv(g).T


@dataclass(frozen=True, eq=False)
class Automorphism:
    """``g -> A tau^outer(g) A^-1``; ``A = None`` means the identity matrix."""

    A: np.ndarray | None = None
    outer: bool = False
    kind: str = "identity"

    @classmethod
    def identity(cls) -> "Automorphism":
        return cls()

    @classmethod
    def inner(cls, P) -> "Automorphism":
        return cls(np.asarray(P, dtype=complex), False, "inner")

    @classmethod
    def outer_auto(cls, J=None, N: int | None = None) -> "Automorphism":
        """``g -> J g^-T J^-1`` (J defaults to the identity of size N)."""
        if J is None:
            if N is None:
                return cls(None, True, "outer")
            J = np.eye(N)
        return cls(np.asarray(J, dtype=complex), True, "outer")

    @classmethod
    def composite(cls, parts: Sequence["Automorphism"]) -> "Automorphism":
        """parts[0] o parts[1] o ... (rightmost applied first)."""
        out = cls.identity()
        for p in parts:
            out = out @ p
        return Automorphism(out.A, out.outer, "composite" if len(parts) > 1 else out.kind)

    # -- action ---------------------------------------------------------------
    def apply(self, g: np.ndarray) -> np.ndarray:
        x = _tau(g) if self.outer else g
        if self.A is None:
            return x
        return self.A @ x @ np.linalg.inv(self.A)

    def apply_lie(self, X: np.ndarray) -> np.ndarray:
        x = -X.T if self.outer else X
        if self.A is None:
            return x
        return self.A @ x @ np.linalg.inv(self.A)

    __call__ = apply

    def inverse(self) -> "Automorphism":
        if self.A is None:
            return Automorphism(None, self.outer, self.kind)
        Ainv = np.linalg.inv(self.A)
        return Automorphism(_tau(Ainv) if self.outer else Ainv, self.outer, self.kind)

    def __matmul__(self, other: "Automorphism") -> "Automorphism":
        """Composition self o other."""
        if other.A is None:
            A2 = None
        else:
            A2 = _tau(other.A) if self.outer else other.A
        if self.A is None:
            A = A2
        elif A2 is None:
            A = self.A
        else:
            A = self.A @ A2
        outer = self.outer != other.outer
        kind = "identity" if A is None and not outer else "composite"
        return Automorphism(A, outer, kind)

    def is_identity(self, tol: float = 1e-12) -> bool:
        return self.same_as(Automorphism.identity(), tol)

    def same_as(self, other: "Automorphism", tol: float = 1e-12) -> bool:
        """Equality as automorphisms: A determined up to a nonzero scalar."""
        if self.outer != other.outer:
            return False
        A, B = self.A, other.A
        if A is None and B is None:
            return True
        n = (A if A is not None else B).shape[0]
        A = np.eye(n) if A is None else A
        B = np.eye(n) if B is None else B
        k = np.unravel_index(np.argmax(np.abs(A)), A.shape)
        if abs(B[k]) < tol:
            return False
        return np.allclose(A / A[k], B / B[k], atol=tol, rtol=0)

    def power(self, k: int) -> "Automorphism":
        base = self if k >= 0 else self.inverse()
        out = Automorphism.identity()
        for _ in range(abs(k)):
            out = out @ base
        return out

    def tag(self) -> str:
        if self.is_identity():
            return "id"
        return ("outer" if self.outer else "inner") if self.kind != "composite" else "composite"


@dataclass(frozen=True, eq=False)
class TwistedElement:
    """(g, phi) in G(phi), acting on the trivial torsor by p -> g phi(p)."""

    g: np.ndarray
    phi: Automorphism = field(default_factory=Automorphism.identity)

    def act(self, p: np.ndarray) -> np.ndarray:
        return self.g @ self.phi.apply(p)

    def __matmul__(self, other: "TwistedElement") -> "TwistedElement":
        return compose(self, other)

    def inverse(self) -> "TwistedElement":
        pinv = self.phi.inverse()
        return TwistedElement(pinv.apply(np.linalg.inv(self.g)), pinv)

    def power(self, k: int) -> "TwistedElement":
        out = TwistedElement(np.eye(self.g.shape[0], dtype=complex), Automorphism.identity())
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            out = compose(out, base)
        return out

    def to_json(self) -> dict:
        return {"g": matrix_to_json(self.g), "twist": self.phi.tag()}


def compose(a: TwistedElement, b: TwistedElement) -> TwistedElement:
    """(g1, phi1)(g2, phi2) = (g1 phi1(g2), phi1 phi2)."""
    if a.g.shape != b.g.shape:
        raise ValueError(f"size mismatch: {a.g.shape} vs {b.g.shape}")
    return TwistedElement(a.g @ a.phi.apply(b.g), a.phi @ b.phi)


def twisted_conjugate(h: np.ndarray, x: TwistedElement) -> TwistedElement:
    """h . (g, phi) = (h g phi(h)^-1, phi)."""
    h = np.asarray(h)
    if h.shape != x.g.shape:
        raise ValueError(f"size mismatch: {h.shape} vs {x.g.shape}")
    return TwistedElement(h @ x.g @ x.phi.apply(np.linalg.inv(h)), x.phi)


def block_mask(blocks: Sequence[int]) -> np.ndarray:
    n = sum(blocks)
    mask = np.zeros((n, n), dtype=bool)
    off = 0
    for b in blocks:
        mask[off:off + b, off:off + b] = True
        off += b
    return mask


def in_twist_coset(M: np.ndarray, levi_blocks: Sequence[int] | np.ndarray, P: np.ndarray,
                   tol: float = COSET_TOL) -> bool:
    """True iff M P^-1 is an invertible element of the block-diagonal Levi."""
    mask = levi_blocks if isinstance(levi_blocks, np.ndarray) and levi_blocks.dtype == bool \
        else block_mask(list(levi_blocks))
    X = M @ np.linalg.inv(P)
    scale = max(1.0, float(np.abs(X).max()))
    if np.abs(X[~mask]).max(initial=0.0) > tol * scale:
        return False
    return np.linalg.cond(np.where(mask, X, 0)) < 1e12


def matrix_to_json(g: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(g, dtype=complex)]


def matrix_from_json(data) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in data], dtype=complex)
