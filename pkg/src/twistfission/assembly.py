"""Global assembly: surfaces with boundary data, the fused space of Stokes
representations, representation checks and dimension counts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .fission import FissionModel, FissionSpace, unipotent_log
from .fusion import FusionError, fuse, internally_fused_double
from .qhspace import QHSpace
from .stokes import ClassError, IrregularClass
from .twisted import Automorphism, TwistedElement, compose, in_twist_coset, matrix_from_json, twisted_conjugate

GENERIC_FLAG = "generic count: assumes a free action, not valid at non-generic strata"


class SurfaceError(ValueError):
    """Malformed surface or representation data."""


def automorphism_from_tag(tag, n: int) -> Automorphism:
    if tag in (None, "id", "identity"):
        return Automorphism.identity()
    if tag == "outer":
        return Automorphism.outer_auto(N=n)
    if isinstance(tag, Mapping):
        kind = tag.get("kind")
        M = matrix_from_json(tag["matrix"]) if "matrix" in tag else None
        if kind == "inner" and M is not None:
            return Automorphism.inner(M)
        if kind == "outer":
            return Automorphism.outer_auto(M, N=n)
    raise SurfaceError(f"unknown automorphism tag {tag!r}")


@dataclass(frozen=True, eq=False)
class SurfaceData:
    """Genus, one irregular class per boundary circle, and the twists of the
    handle generators (alpha_1, beta_1, ..., alpha_g, beta_g)."""

    genus: int
    boundary: tuple[IrregularClass, ...]
    twists: tuple[Automorphism, ...] = ()

    def __post_init__(self):
        if self.genus < 0:
            raise SurfaceError("genus must be nonnegative")
        if not self.boundary:
            raise SurfaceError("at least one boundary circle is required")
        ranks = {Q.rank for Q in self.boundary}
        if len(ranks) != 1:
            raise SurfaceError(f"boundary classes have different ranks {sorted(ranks)}")
        if not self.twists:
            object.__setattr__(self, "twists", (Automorphism.identity(),) * (2 * self.genus))
        if len(self.twists) != 2 * self.genus:
            raise SurfaceError(f"expected {2 * self.genus} handle twists, got {len(self.twists)}")

    @property
    def N(self) -> int:
        return self.boundary[0].rank

    @classmethod
    def from_json(cls, data: Mapping) -> "SurfaceData":
        try:
            g = int(data.get("genus", 0))
            boundary = []
            for k, b in enumerate(data.get("boundary", [])):
                try:
                    boundary.append(IrregularClass.from_json(b))
                except ClassError as exc:
                    raise SurfaceError(f"boundary[{k}]: {exc}") from exc
            n = boundary[0].rank if boundary else 0
            twists = tuple(automorphism_from_tag(t, n) for t in data.get("twists", []))
        except (TypeError, KeyError) as exc:
            raise SurfaceError(f"malformed surface data: {exc}") from exc
        return cls(g, tuple(boundary), twists)

    def handle_twists(self) -> list[tuple[Automorphism, Automorphism]]:
        t = self.twists
        return [(t[2 * i], t[2 * i + 1]) for i in range(self.genus)]

    def total_twist(self) -> Automorphism:
        """Twist of the relation: product of [phi_i, psi_i] over handles."""
        out = Automorphism.identity()
        for phi, psi in self.handle_twists():
            out = out @ (phi @ psi @ phi.inverse() @ psi.inverse())
        return out


@dataclass(eq=False)
class AssembledSpace:
    """Unreduced fused space A(Q_1) * ... * A(Q_m) * DD_1 * ... * DD_g.

    Group factor 0 is the diagonal G; factors 1..m are the Levis H_i.  The
    reduction by G is represented only by :meth:`on_constraint`.
    """

    surface: SurfaceData
    space: QHSpace
    pieces: list[QHSpace]
    models: list[FissionModel]

    def g_moment(self, p) -> TwistedElement:
        return self.space.moment(p)[0]

    def constraint_residual(self, p) -> float:
        g = self.g_moment(p).g
        return float(np.abs(g - np.eye(g.shape[0])).max())

    def on_constraint(self, p, tol: float = 1e-9) -> bool:
        return self.constraint_residual(p) < tol

    def moment_twist(self) -> Automorphism:
        return self.space.twists()[0]

    def split_point(self, p) -> list[tuple]:
        out, k = [], 0
        for piece in self.pieces:
            n = len(piece.part_algebras)
            out.append(tuple(p[k:k + n]))
            k += n
        return out


def assemble(S: SurfaceData) -> AssembledSpace:
    models = [FissionModel.from_class(Q, f"boundary {i}") for i, Q in enumerate(S.boundary)]
    pieces: list[QHSpace] = [FissionSpace(m) for m in models]
    pieces += [internally_fused_double(S.N, phi, psi) for phi, psi in S.handle_twists()]
    space = pieces[0]
    for piece in pieces[1:]:
        if piece.group_algebras[0].n != space.group_algebras[0].n:
            raise FusionError("incompatible ranks")
        space = fuse(space, piece, 0, 0)
    return AssembledSpace(S, space, pieces, models)


# -- representations ---------------------------------------------------------------

@dataclass(eq=False)
class StokesRepresentation:
    """Values of rho on generators.

    ``paths[i]`` is the matrix C_i attached to the path from the surface
    basepoint to the i-th halo; ``boundary[i]`` is rho of the i-th boundary
    loop (a matrix in H(d_i)); ``stokes[i][d]`` is rho of the d-th Stokes
    loop there; ``handles`` lists (rho(alpha_j), rho(beta_j)).
    """

    paths: list[np.ndarray]
    boundary: list[np.ndarray]
    stokes: list[list[np.ndarray]]
    handles: list[tuple[TwistedElement, TwistedElement]] = field(default_factory=list)

    def act(self, g: np.ndarray, ks: Sequence[np.ndarray]) -> "StokesRepresentation":
        """The (G x H)-action: C_i -> k_i C_i g^-1, loops at halo i conjugated by k_i."""
        ginv = np.linalg.inv(g)
        paths = [k @ C @ ginv for k, C in zip(ks, self.paths)]
        boundary = [k @ h @ np.linalg.inv(k) for k, h in zip(ks, self.boundary)]
        stokes = [[k @ Sd @ np.linalg.inv(k) for Sd in Si] for k, Si in zip(ks, self.stokes)]
        handles = [(twisted_conjugate(g, a), twisted_conjugate(g, b)) for a, b in self.handles]
        return StokesRepresentation(paths, boundary, stokes, handles)


@dataclass(frozen=True)
class RepresentationReport:
    boundary_ok: tuple[bool, ...]
    stokes_ok: tuple[tuple[bool, ...], ...]
    relation_residual: float

    @property
    def condition1(self) -> bool:
        return all(self.boundary_ok)

    @property
    def condition2(self) -> bool:
        return all(all(x) for x in self.stokes_ok)

    @property
    def passed(self) -> bool:
        """Conditions 1 and 2; the relation residual is reported separately."""
        return self.condition1 and self.condition2

    def to_json(self) -> dict:
        return {"condition1": self.condition1, "condition2": self.condition2,
                "boundary": list(self.boundary_ok), "stokes": [list(s) for s in self.stokes_ok],
                "relation_residual": self.relation_residual}


def handle_twisted_commutator(a: TwistedElement, b: TwistedElement) -> TwistedElement:
    return compose(compose(a, b), compose(a.inverse(), b.inverse()))


def relation_element(rho: StokesRepresentation) -> TwistedElement:
    """Product of the boundary moments and handle commutators."""
    n = rho.paths[0].shape[0]
    out = TwistedElement(np.eye(n, dtype=complex))
    for C, h, S in zip(rho.paths, rho.boundary, rho.stokes):
        b = h.copy()
        for Sd in reversed(S):
            b = b @ Sd
        out = compose(out, TwistedElement(np.linalg.solve(C, b @ C)))
    for a, bb in rho.handles:
        out = compose(out, handle_twisted_commutator(a, bb))
    return out


def check_representation(rho: StokesRepresentation, S: SurfaceData,
                         tol: float = 1e-9) -> RepresentationReport:
    models = [FissionModel.from_class(Q) for Q in S.boundary]
    if not (len(rho.paths) == len(rho.boundary) == len(rho.stokes) == len(models)):
        raise SurfaceError("one path, boundary loop and Stokes list per boundary circle is required")
    if len(rho.handles) != S.genus:
        raise SurfaceError(f"expected {S.genus} handle pairs, got {len(rho.handles)}")
    b_ok, s_ok = [], []
    for m, h, Ss in zip(models, rho.boundary, rho.stokes):
        if len(Ss) != m.s:
            raise SurfaceError(f"expected {m.s} Stokes loops, got {len(Ss)}")
        b_ok.append(bool(in_twist_coset(h, m.formal.levi_mask(), m.P, tol)))
        row = []
        for alg, Sd in zip(m.stokes_algebras, Ss):
            L = unipotent_log(Sd)
            unip = np.allclose(np.linalg.matrix_power(Sd - np.eye(m.N), m.N), 0, atol=tol)
            row.append(bool(unip and alg.contains(L, tol)))
        s_ok.append(tuple(row))
    rel = relation_element(rho)
    residual = float(np.abs(rel.g - np.eye(rel.g.shape[0])).max())
    return RepresentationReport(tuple(b_ok), tuple(s_ok), residual)


def representation_from_point(assembled: AssembledSpace, p) -> StokesRepresentation:
    """Read rho off a point of the unreduced assembled space."""
    pieces = assembled.split_point(p)
    m = len(assembled.models)
    paths, boundary, stokes = [], [], []
    for q in pieces[:m]:
        paths.append(q[0])
        boundary.append(q[1])
        stokes.append(list(q[2:]))
    handles = []
    for (phi, psi), q in zip(assembled.surface.handle_twists(), pieces[m:]):
        x, y = q
        # the fused double's moment is the twisted commutator of these
        handles.append((TwistedElement(x, phi), TwistedElement(psi.apply(np.linalg.inv(y)), psi)))
    return StokesRepresentation(paths, boundary, stokes, handles)


def boundary_invariant(rho: StokesRepresentation, S: SurfaceData, i: int) -> np.ndarray:
    """Spectrum of the r-th twisted power of rho(d_i), r = order of the twist."""
    m = FissionModel.from_class(S.boundary[i])
    P = m.P
    r = 1
    while not np.allclose(np.linalg.matrix_power(P, r), np.eye(m.N)):
        r += 1
    x = TwistedElement(rho.boundary[i] @ np.linalg.inv(P), Automorphism.inner(P))
    return np.sort_complex(np.linalg.eigvals(x.power(r).g))


# -- dimensions ----------------------------------------------------------------------

@dataclass(frozen=True)
class LeafDimension:
    dim_homs: int
    dim_H: int
    heuristic: int
    flags: tuple[str, ...]

    def to_json(self) -> dict:
        return {"dim_HomS": self.dim_homs, "dim_H": self.dim_H,
                "heuristic_leaf_dim": self.heuristic, "flags": list(self.flags)}


def leaf_dimension(S: SurfaceData, class_dims: Sequence[int] = ()) -> LeafDimension:
    models = [FissionModel.from_class(Q) for Q in S.boundary]
    dim_g = S.N ** 2
    dim_homs = sum(m.dim for m in models) + 2 * S.genus * dim_g - 2 * dim_g
    dim_h = sum(m.levi.dim for m in models)
    heuristic = dim_homs - 2 * dim_h + sum(class_dims)
    flags = [GENERIC_FLAG]
    if heuristic <= 0:
        flags.append("non-positive count: the generic leaf is empty or rigid")
    return LeafDimension(dim_homs, dim_h, heuristic, tuple(flags))
