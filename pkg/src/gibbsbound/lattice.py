"""Lattice geometry: sites, boxes, boundaries and the lexicographic half-space.

Sites are plain tuples of ints.  Site sets are kept as sorted tuples so that
iteration order is always the lexicographic order on coordinates, which the
rest of the package relies on for deterministic enumeration and tie-breaking.
"""

from dataclasses import dataclass
from itertools import product

Site = tuple

__all__ = [
    "Site",
    "site_set",
    "neighbors",
    "boundary",
    "lex_precedes",
    "after_origin",
    "centered_box",
    "SpecialSets",
    "special_sets",
    "axis_edges",
]


class EmptySiteSetError(ValueError):
    """Raised when an operation needs at least one site."""


def site_set(sites) -> tuple:
    """Normalise an iterable of sites into a duplicate-free, lex-sorted tuple."""
    return tuple(sorted(set(map(tuple, sites))))


def neighbors(site: Site) -> tuple:
    """The 2d nearest neighbours of a site, in lexicographic order."""
    out = []
    for i in range(len(site)):
        for step in (-1, 1):
            out.append(site[:i] + (site[i] + step,) + site[i + 1:])
    return tuple(sorted(out))


def boundary(sites) -> tuple:
    """Outer boundary: sites not in the set adjacent to at least one member."""
    inner = set(map(tuple, sites))
    if not inner:
        raise EmptySiteSetError("boundary of an empty site set is undefined")
    out = set()
    for v in inner:
        for w in neighbors(v):
            if w not in inner:
                out.add(w)
    return tuple(sorted(out))


def lex_precedes(x: Site, y: Site) -> bool:
    """Strict lexicographic order: first differing coordinate decides."""
    return tuple(x) < tuple(y)


def after_origin(site: Site) -> bool:
    """True when the site is the origin or lexicographically after it."""
    origin = (0,) * len(site)
    return not lex_precedes(site, origin)


def centered_box(radius: int, dim: int) -> tuple:
    """All sites with every coordinate in [-radius, radius]."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    rng = range(-radius, radius + 1)
    return tuple(product(rng, repeat=dim))


@dataclass(frozen=True)
class SpecialSets:
    """The site sets controlling the two-sided conditional-entropy bracket.

    box             the centred box of the given radius
    future          box sites at or after the origin lexicographically
    past_rim        box sites in the past that touch the future half-space
    future_boundary outer boundary of ``future`` (may leave the box)
    far_rim         future_boundary minus past_rim
    """

    box: tuple
    future: tuple
    past_rim: tuple
    future_boundary: tuple
    far_rim: tuple


def special_sets(radius: int, dim: int) -> SpecialSets:
    """Compute the box, its future part and the associated rims."""
    box = centered_box(radius, dim)
    future = tuple(v for v in box if after_origin(v))
    # past sites adjacent to the future half-space (not merely to `future`)
    past_rim = tuple(
        v for v in box
        if not after_origin(v) and any(after_origin(w) for w in neighbors(v))
    )
    fb = boundary(future)
    far = tuple(v for v in fb if v not in set(past_rim))
    return SpecialSets(box=box, future=future, past_rim=past_rim,
                       future_boundary=fb, far_rim=far)


def axis_edges(sites, axis: int):
    """Directed nearest-neighbour pairs (v, v + e_axis) inside the site set."""
    inner = set(map(tuple, sites))
    out = []
    for v in sorted(inner):
        w = v[:axis] + (v[axis] + 1,) + v[axis + 1:]
        if w in inner:
            out.append((v, w))
    return tuple(out)
