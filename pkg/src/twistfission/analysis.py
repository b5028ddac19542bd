"""JSON reports on the combinatorics of an irregular class."""
from __future__ import annotations

from .exponents import apples
from .stokes import IrregularClass, adjoint_cover, branches, check_descent, formal_group, singular_directions, untwist


def _frac(x) -> str:
    return str(x)


def _circle_json(circle, mult: int) -> dict:
    return {"exponent": circle.representative.to_json(), "mult": mult, "ram": circle.ram,
            "deg": circle.deg, "level": _frac(circle.level)}


def analyze(Q: IrregularClass, label: str = "") -> dict:
    bs = branches(Q)
    S = singular_directions(bs)
    cover = adjoint_cover(bs)
    fg = formal_group(bs)
    cover_json = []
    n_apples = 0
    for circle, mult in cover:
        entry = _circle_json(circle, mult)
        if not circle.is_zero():
            ap = apples(circle)
            n_apples += len(ap)
            entry["apples"] = [{"turns": a.turns_json(), "sheet": a.sheet} for a in ap]
        else:
            entry["apples"] = []
        cover_json.append(entry)
    rep = untwist(Q)
    return {
        "label": label,
        "rank": Q.rank,
        "exact": not Q.numeric,
        "circles": [_circle_json(c, m) for c, m in Q.entries],
        "adjoint_cover": {
            "circles": cover_json,
            # number of distinct covering circles counted with their ramification
            "degree": sum(c.ram for c, _ in cover),
            "sheets": sum(c.ram * m for c, m in cover),
            "apples": n_apples,
        },
        "singular_directions": S.to_json()["directions"],
        "levels": [_frac(lv) for lv in S.levels],
        "formal_group": {
            "levi_blocks": list(fg.blocks),
            "dim_H": fg.dim_levi,
            "sigma": list(fg.sigma),
            "coset_blocks": [[s, i] for i, s in enumerate(fg.sigma)],
        },
        "untwist": {**rep.to_json(), "descent": check_descent(Q)},
    }
