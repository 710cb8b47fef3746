import math

import pytest

from gibbsbound.errors import EnumerationCapError
from gibbsbound.lattice import boundary, centered_box
from gibbsbound.model import Configuration
from gibbsbound.oracle import (
    oracle_admissible_rings,
    oracle_conditional_entropy,
    oracle_partition,
    oracle_strip_entropy,
)

IID_H = math.log(3.0) - (2.0 / 3.0) * math.log(2.0)


def square(n):
    return tuple((x, y) for x in range(n) for y in range(n))


def test_free_partition_counts(uniform_binary, hard_squares, weighted_iid):
    assert math.isclose(oracle_partition(uniform_binary, square(2)),
                        math.log(16.0))
    # independent sets of the 2x2 grid: empty, four singles, two diagonals
    assert math.isclose(oracle_partition(hard_squares, square(2)),
                        math.log(7.0))
    assert math.isclose(oracle_partition(weighted_iid, ((0, 0),)),
                        math.log(3.0))


def test_partition_with_pins(hard_squares):
    pin = Configuration.from_dict({(0, 0): "1"})
    V = tuple(s for s in square(2) if s != (0, 0))
    # neighbors of the pinned site are forced empty; the far corner is free
    assert math.isclose(oracle_partition(hard_squares, V, pinned=pin),
                        math.log(2.0))
    contradiction = Configuration.from_dict({(0, 0): "1", (1, 0): "1"})
    V2 = tuple(s for s in square(2) if s not in contradiction.sites)
    assert oracle_partition(hard_squares, V2, pinned=contradiction) \
        == -math.inf


def test_conditional_entropy_closed_forms(uniform_binary, weighted_iid):
    box = centered_box(1, 2)
    ring = boundary(box)
    delta = Configuration.from_dict({s: ring_sym for s in ring
                                     for ring_sym in ["0"]})
    K = tuple(s for s in box if s != (0, 0))
    h = oracle_conditional_entropy(uniform_binary, box, K, delta)
    assert math.isclose(h, math.log(2.0), rel_tol=1e-12)

    delta_iid = Configuration.from_dict({s: "a" for s in ring})
    h = oracle_conditional_entropy(weighted_iid, box, K, delta_iid)
    assert math.isclose(h, IID_H, rel_tol=1e-12)


def test_conditional_entropy_less_informative_window_is_larger(hard_squares):
    box = centered_box(1, 2)
    ring = boundary(box)
    delta = Configuration.from_dict({s: "0" for s in ring})
    full = tuple(s for s in box if s != (0, 0))
    thin = ((-1, 0), (0, -1))
    h_full = oracle_conditional_entropy(hard_squares, box, full, delta)
    h_thin = oracle_conditional_entropy(hard_squares, box, thin, delta)
    assert h_full <= h_thin + 1e-12


def test_admissible_ring_counts(hard_squares, agreement, uniform_binary):
    box = centered_box(1, 2)
    ring = boundary(box)
    assert sum(1 for _ in oracle_admissible_rings(hard_squares, box, ring)) \
        == 625
    assert sum(1 for _ in oracle_admissible_rings(uniform_binary, box, ring)) \
        == 4096
    rings = list(oracle_admissible_rings(agreement, box, ring))
    assert len(rings) == 2
    for r in rings:
        assert len({s for _, s in r.items()}) == 1


def test_rings_come_out_in_lexicographic_order(hard_squares):
    box = centered_box(1, 2)
    ring = boundary(box)
    seen = [tuple(r.symbols) for r in
            oracle_admissible_rings(hard_squares, box, ring)]
    assert seen == sorted(seen)
    assert seen[0] == ("0",) * 12


def test_site_cap_refusal(uniform_binary):
    V = tuple((x, y) for x in range(5) for y in range(5))
    with pytest.raises(EnumerationCapError):
        oracle_partition(uniform_binary, V)


def test_strip_entropy_closed_forms(uniform_binary, weighted_iid):
    assert math.isclose(oracle_strip_entropy(uniform_binary),
                        math.log(2.0), rel_tol=1e-12)
    assert math.isclose(oracle_strip_entropy(weighted_iid),
                        IID_H, rel_tol=1e-9)


def test_strip_entropy_hard_squares_reference(hard_squares):
    w10 = oracle_strip_entropy(hard_squares, width=10)
    w12 = oracle_strip_entropy(hard_squares, width=12)
    assert abs(w10 - w12) < 1e-3
    ladder = oracle_strip_entropy(hard_squares)
    assert abs(ladder - 0.4074951) < 1e-6
