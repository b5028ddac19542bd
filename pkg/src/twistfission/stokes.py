"""Stokes combinatorics of GL_N irregular classes.

From a multiset of circles <q> this module builds the list of branches with
their monodromy permutation, the graded pieces of End(V), the singular
directions with their Stokes root sets, the Levi subgroup H with the coset
H(d) of formal monodromies, and the pull-back ("untwisting") to an
unramified class on an r-fold cover.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .cyclo import Cyclo
from .exponents import (
    CircleClass,
    Direction,
    Exponent,
    arg_turns,
    branch,
    decay_turns,
    difference,
    normalize,
    ramification,
    root_of_unity,
    same_circle,
)


class ClassError(ValueError):
    """Invalid irregular class data."""


@dataclass(frozen=True, eq=False)
class IrregularClass:
    entries: tuple[tuple[CircleClass, int], ...]
    twist: str = "id"

    def __post_init__(self):
        entries = tuple((c if isinstance(c, CircleClass) else CircleClass(c), int(m))
                        for c, m in self.entries)
        object.__setattr__(self, "entries", entries)
        for c, m in entries:
            if m <= 0:
                raise ClassError(f"multiplicity of {c!r} must be positive, got {m}")
        for a in range(len(entries)):
            for b in range(a):
                if entries[a][0] == entries[b][0]:
                    raise ClassError(f"circle {entries[a][0]!r} listed twice")
        if self.twist != "id":
            raise ClassError("GL_N irregular classes carry the identity twist")

    @property
    def rank(self) -> int:
        return sum(m * c.ram for c, m in self.entries)

    @property
    def numeric(self) -> bool:
        return any(c.numeric for c, _ in self.entries)

    def to_json(self) -> dict:
        return {"entries": [{"circle": c.representative.to_json(), "mult": m} for c, m in self.entries],
                "twist": self.twist}

    @classmethod
    def from_json(cls, data: Mapping) -> "IrregularClass":
        if not isinstance(data, Mapping) or not isinstance(data.get("entries"), list):
            raise ClassError("entries: expected a list of {circle, mult} objects")
        entries = []
        for k, item in enumerate(data["entries"]):
            try:
                entries.append((CircleClass(Exponent.from_json(item["circle"])), int(item["mult"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise ClassError(f"entries[{k}]: {exc}") from exc
        return cls(tuple(entries), data.get("twist", "id"))


def irregular_class(*entries: tuple[Exponent, int]) -> IrregularClass:
    return IrregularClass(tuple((CircleClass(q), m) for q, m in entries))


# -- branches -------------------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    exponent: Exponent
    block: int
    circle: int
    sheet: int


@dataclass(frozen=True, eq=False)
class BranchSystem:
    branches: tuple[Branch, ...]
    sigma: tuple[int, ...]

    @property
    def blocks(self) -> list[int]:
        return [b.block for b in self.branches]

    @property
    def offsets(self) -> list[int]:
        return [0, *np.cumsum(self.blocks).tolist()]

    @property
    def rank(self) -> int:
        return sum(self.blocks)

    def __len__(self) -> int:
        return len(self.branches)

    def block_slice(self, i: int) -> slice:
        off = self.offsets
        return slice(off[i], off[i + 1])


def branches(Q: IrregularClass) -> BranchSystem:
    """Concatenate the Galois orbits; sigma sends sheet j to sheet j+1."""
    out: list[Branch] = []
    sigma: list[int] = []
    for ci, (circle, mult) in enumerate(Q.entries):
        r = circle.ram
        start = len(out)
        for j in range(r):
            out.append(Branch(branch(circle.representative, j, r), mult, ci, j))
            sigma.append(start + (j + 1) % r)
    return BranchSystem(tuple(out), tuple(sigma))


def adjoint_cover(Q: IrregularClass | BranchSystem) -> list[tuple[CircleClass, int]]:
    """Circles grading End(V), with multiplicities (dimension per point)."""
    bs = Q if isinstance(Q, BranchSystem) else branches(Q)
    groups: list[list] = []  # [circle, summed block products]
    for a, ba in enumerate(bs.branches):
        for b, bb in enumerate(bs.branches):
            d = difference(ba.exponent, bb.exponent)
            for g in groups:
                if same_circle(g[0].representative, d):
                    g[1] += ba.block * bb.block
                    break
            else:
                groups.append([CircleClass(d), ba.block * bb.block])
    out = []
    for circle, total in groups:
        assert total % circle.ram == 0
        out.append((circle, total // circle.ram))
    return out


# -- singular directions ----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StokesDirection:
    direction: Direction
    roots: tuple[tuple[int, int], ...]
    root_levels: tuple[Fraction, ...]
    dim: int

    @property
    def levels(self) -> list[Fraction]:
        return sorted(set(self.root_levels))

    @property
    def turns(self):
        return self.direction.turns


@dataclass(frozen=True, eq=False)
class StokesStructure:
    branch_system: BranchSystem
    directions: tuple[StokesDirection, ...]

    @property
    def levi_blocks(self) -> list[int]:
        return self.branch_system.blocks

    @property
    def sigma(self) -> tuple[int, ...]:
        return self.branch_system.sigma

    @property
    def rank(self) -> int:
        return self.branch_system.rank

    @property
    def levels(self) -> list[Fraction]:
        return sorted({lv for d in self.directions for lv in d.root_levels})

    def __len__(self) -> int:
        return len(self.directions)

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "levi_blocks": self.levi_blocks,
            "sigma": list(self.sigma),
            "directions": [
                {"angle_turns": d.direction.turns_json(),
                 "dim": d.dim,
                 "levels": [str(lv) for lv in d.levels],
                 "roots": [list(r) for r in d.roots]}
                for d in self.directions
            ],
        }


def _root_directions(bs: BranchSystem, span: int = 1):
    for i, bi in enumerate(bs.branches):
        for j, bj in enumerate(bs.branches):
            if i == j:
                continue
            d = difference(bi.exponent, bj.exponent)
            if d.is_zero():
                continue
            e, c = d.leading
            for t, exact in decay_turns(c, e, span):
                yield Direction(t, exact), (i, j), e


def _merge(bs: BranchSystem, records) -> tuple[StokesDirection, ...]:
    buckets: list[list] = []
    for direction, root, lev in records:
        for bucket in buckets:
            if bucket[0].same_base(direction):
                if direction.exact and not bucket[0].exact:
                    bucket[0] = direction
                bucket[1].append((root, lev))
                break
        else:
            buckets.append([direction, [(root, lev)]])
    out = []
    for direction, items in sorted(buckets, key=lambda b: float(b[0].turns)):
        items.sort()
        roots = tuple(r for r, _ in items)
        dim = sum(bs.branches[i].block * bs.branches[j].block for i, j in roots)
        out.append(StokesDirection(direction, roots, tuple(lv for _, lv in items), dim))
    return tuple(out)


def singular_directions(Q: IrregularClass | BranchSystem) -> StokesStructure:
    """Singular directions in [0, 1) turns from the basepoint, with root data.

    A root (i, j) (block position row i, column j) sits over d when the
    leading term of q_i - q_j, continued from the basepoint to d, is real
    and negative there.  Directions hit by several roots are merged.
    """
    bs = Q if isinstance(Q, BranchSystem) else branches(Q)
    return StokesStructure(bs, _merge(bs, _root_directions(bs)))


def level_filtration(S: StokesStructure, d: int | Direction) -> list[tuple[Fraction, tuple]]:
    if isinstance(d, Direction):
        matches = [k for k, sd in enumerate(S.directions) if sd.direction.same_base(d)]
        if not matches:
            raise KeyError(f"{d} is not a singular direction")
        d = matches[0]
    if not 0 <= d < len(S.directions):
        raise KeyError(f"no singular direction with index {d}")
    sd = S.directions[d]
    out = []
    for lv in sd.levels:
        out.append((lv, tuple(r for r, l in zip(sd.roots, sd.root_levels) if l == lv)))
    return out


# -- formal monodromy -------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FormalGroup:
    """Levi H = prod GL(block) over branches and the coset H(d) = H P."""

    blocks: tuple[int, ...]
    sigma: tuple[int, ...]

    @property
    def rank(self) -> int:
        return sum(self.blocks)

    @property
    def offsets(self) -> list[int]:
        return [0, *np.cumsum(self.blocks).tolist()]

    def block_slice(self, i: int) -> slice:
        off = self.offsets
        return slice(off[i], off[i + 1])

    @property
    def dim_levi(self) -> int:
        return sum(b * b for b in self.blocks)

    def levi_mask(self) -> np.ndarray:
        mask = np.zeros((self.rank, self.rank), dtype=bool)
        for i in range(len(self.blocks)):
            s = self.block_slice(i)
            mask[s, s] = True
        return mask

    def coset_mask(self) -> np.ndarray:
        """Support of H P: blocks at (sigma(i), i)."""
        mask = np.zeros((self.rank, self.rank), dtype=bool)
        for i, si in enumerate(self.sigma):
            mask[self.block_slice(si), self.block_slice(i)] = True
        return mask

    def permutation_matrix(self) -> np.ndarray:
        P = np.zeros((self.rank, self.rank), dtype=complex)
        for i, si in enumerate(self.sigma):
            rows, cols = self.block_slice(si), self.block_slice(i)
            P[rows, cols] = np.eye(self.blocks[i])
        return P


def formal_group(Q: IrregularClass | BranchSystem | StokesStructure) -> FormalGroup:
    if isinstance(Q, StokesStructure):
        Q = Q.branch_system
    bs = Q if isinstance(Q, BranchSystem) else branches(Q)
    return FormalGroup(tuple(bs.blocks), tuple(bs.sigma))


# -- untwisting -------------------------------------------------------------------

def lift_exponent(q: Exponent, r: int) -> Exponent:
    """q'(w) = q(w^r) as an (unramified) exponent in w."""
    terms = []
    for e, c in q.terms:
        k = e * r
        if k.denominator != 1:
            raise ClassError(f"z = w^{r} does not untwist {q!r}")
        terms.append((Fraction(k), c))
    return Exponent(tuple(terms))


def rotate_exponent(q: Exponent, r: int) -> Exponent:
    """q(zeta_r w) for an unramified exponent q in w."""
    numeric = q.numeric
    out = []
    for e, c in q.terms:
        z = root_of_unity(r, -int(e), numeric)
        out.append((e, c * z))
    return Exponent(tuple(out))


@dataclass(frozen=True, eq=False)
class UntwistReport:
    r: int
    lifted_class: IrregularClass
    base: StokesStructure
    lifted: StokesStructure
    first_sheet_matches: tuple[tuple[Direction, int, bool], ...]
    covers_preimage: bool

    @property
    def base_directions(self) -> list[Direction]:
        return [d.direction for d in self.base.directions]

    @property
    def lifted_directions(self) -> list[Direction]:
        return [d.direction for d in self.lifted.directions]

    @property
    def ok(self) -> bool:
        return (self.covers_preimage
                and len(self.lifted.directions) == self.r * len(self.base.directions)
                and len(self.first_sheet_matches) == len(self.base.directions)
                and all(m for _, _, m in self.first_sheet_matches))

    def to_json(self) -> dict:
        return {"r": self.r, "base_count": len(self.base.directions),
                "lifted_count": len(self.lifted.directions), "preimage": self.covers_preimage,
                "first_sheet": [{"angle_turns": d.turns_json(), "dim": dim, "match": m}
                                for d, dim, m in self.first_sheet_matches],
                "ok": self.ok}


def _project(d: Direction, r: int) -> Direction:
    t = d.turns * r
    t = t - math.floor(t)
    return Direction(t, d.exact)


def untwist(Q: IrregularClass) -> UntwistReport:
    """Pull back along z = w^r (r = lcm of ramifications) and compare Stokes data."""
    bs = branches(Q)
    base = singular_directions(bs)
    r = math.lcm(1, *(c.ram for c, _ in Q.entries))
    lifted_class = IrregularClass(tuple((CircleClass(lift_exponent(b.exponent, r)), b.block)
                                        for b in bs.branches))
    lifted = singular_directions(lifted_class)
    assert all(c.ram == 1 for c, _ in lifted_class.entries)

    preimage = True
    for ld in lifted.directions:
        proj = _project(ld.direction, r)
        if not any(bd.direction.same_base(proj) for bd in base.directions):
            preimage = False

    matches = []
    for ld in lifted.directions:
        t = ld.direction.turns * r
        if not (t < 1 if ld.direction.exact else t < 1 - 1e-12):
            continue
        proj = _project(ld.direction, r)
        hits = [bd for bd in base.directions if bd.direction.same_base(proj)]
        ok = len(hits) == 1 and hits[0].dim == ld.dim and set(hits[0].roots) == set(ld.roots)
        matches.append((proj, ld.dim, ok))
    return UntwistReport(r, lifted_class, base, lifted, tuple(matches), preimage)


def check_descent(Q: IrregularClass, sigma: Sequence[int] | None = None) -> bool:
    """Check Q'(zeta w) = M Q'(w) M^-1 for the lifted diagonal exponent Q'.

    M is the clutching matrix, the inverse of the monodromy P (blocks at
    (sigma(i), i)); entrywise the condition reads q'_i(zeta w) = q'_sigma(i)(w).
    """
    bs = branches(Q)
    sigma = bs.sigma if sigma is None else tuple(sigma)
    r = math.lcm(1, *(c.ram for c, _ in Q.entries))
    lifts = [lift_exponent(b.exponent, r) for b in bs.branches]
    blocks = bs.blocks
    if sorted(sigma) != list(range(len(lifts))):
        return False
    for i, s in enumerate(sigma):
        if blocks[i] != blocks[s]:
            return False
        if not rotate_exponent(lifts[i], r) == lifts[s]:
            return False
    return True


# -- periodic root data -------------------------------------------------------------

def root_sequence(S: StokesStructure, count: int, start: int = 0) -> list[frozenset]:
    """Root sets R_j for j = start .. start+count-1, extended periodically.

    Crossing the basepoint once continues every branch to its sigma-image,
    so R_{j+s} = {(a, b) : (sigma a, sigma b) in R_j}.
    """
    s = len(S.directions)
    sigma = S.sigma
    inv = [0] * len(sigma)
    for i, si in enumerate(sigma):
        inv[si] = i
    base = [frozenset(d.roots) for d in S.directions]
    out = []
    for j in range(start, start + count):
        turns, k = divmod(j, s)
        roots = base[k]
        perm = inv if turns >= 0 else list(sigma)
        for _ in range(abs(turns)):
            roots = frozenset((perm[a], perm[b]) for a, b in roots)
        out.append(roots)
    return out


# -- random classes -------------------------------------------------------------------

def random_class(rng: np.random.Generator, max_ram: int = 4, max_rank: int = 6,
                 max_circles: int = 3) -> IrregularClass:
    """A random exact-mode irregular class, for property tests."""
    while True:
        entries: list[tuple[CircleClass, int]] = []
        rank = 0
        for _ in range(int(rng.integers(1, max_circles + 1))):
            r = int(rng.integers(1, max_ram + 1))
            nterms = int(rng.integers(1, 3))
            terms = []
            for _ in range(nterms):
                k = int(rng.integers(1, 2 * r + 1))
                coeff = Cyclo.rational(int(rng.integers(1, 4)) * int(rng.choice([-1, 1])))
                coeff = coeff * Cyclo.root_of_unity(int(rng.choice([1, 3, 4, 6])), int(rng.integers(0, 12)))
                if rng.random() < 0.25:
                    coeff = coeff + Cyclo.rational(int(rng.integers(1, 3)))
                terms.append((Fraction(k, r), coeff))
            q = normalize(terms)
            if q.is_zero() and any(c.is_zero() for c, _ in entries):
                continue
            circle = CircleClass(q)
            if any(circle == c for c, _ in entries):
                continue
            mult = int(rng.integers(1, 3))
            if rank + mult * circle.ram > max_rank:
                continue
            entries.append((circle, mult))
            rank += mult * circle.ram
        if entries and sum(c.ram for c, _ in entries) >= 2:
            return IrregularClass(tuple(entries))
