"""Strip partition sums against the brute-force oracle.

The full randomized equivalence sweep lives in test_acceptance; here a
seeded slice of it plus the structural properties that make the sweep
meaningful (direction independence, admissibility filtering, exact
conditionals on the separating window).
"""

import math

import numpy as np
import pytest

from gibbsbound.lattice import boundary, centered_box, special_sets
from gibbsbound.model import Configuration
from gibbsbound.oracle import oracle_conditional_entropy, oracle_partition
from gibbsbound.transfer import (
    admissible_boundaries,
    column_states,
    exact_conditional_full_boundary,
    pinned_volume_logsum,
    spec_marginals_all,
    strip_partition,
)

from conftest import random_sparse_model


def rel_gap(a, b):
    """Relative error of two log-scale partition values, linear scale."""
    if a == -math.inf and b == -math.inf:
        return 0.0
    if a == -math.inf or b == -math.inf:
        return math.inf
    return abs(math.expm1(a - b))


def pin_union(w, delta):
    merged = dict(delta.items())
    merged.update(dict(w.items()))
    return Configuration.from_dict(merged)


def test_column_states_hard_squares_are_fibonacci(hard_squares):
    # independent sets on a path of h sites: F(h+2) of them
    counts = [len(column_states(hard_squares, h)[0]) for h in (1, 3, 5, 7, 9)]
    assert counts == [2, 5, 13, 34, 89]


def test_strip_matches_oracle_on_seeded_models():
    rng = np.random.default_rng(k20 := 20)
    box = centered_box(1, 2)
    for trial in range(12):
        q = 2 if trial % 2 == 0 else 3
        model = random_sparse_model(rng, q)
        deltas = list(admissible_boundaries(model, 1, 0))
        assert deltas, "symbol 0 keeps every model alive"
        idx = rng.choice(len(deltas), size=min(6, len(deltas)), replace=False)
        for i in idx:
            delta = deltas[int(i)]
            for K, w in (
                ((), Configuration.from_dict({})),
                (((0, 0),), Configuration.from_dict({(0, 0): "0"})),
            ):
                got = strip_partition(model, 1, 0, K, w, delta)
                V = tuple(s for s in box if s not in K)
                want = oracle_partition(model, V, pinned=pin_union(w, delta))
                assert rel_gap(got, want) <= 1e-9, (
                    f"trial {trial}: strip {got} vs oracle {want}")


def test_strip_direction_independence(hard_squares):
    deltas = list(admissible_boundaries(hard_squares, 1, 1))
    K = ((0, 0), (0, 1))
    w = Configuration.from_dict({(0, 0): "1", (0, 1): "0"})
    for delta in deltas[:40]:
        fwd = strip_partition(hard_squares, 1, 1, K, w, delta, "forward")
        bwd = strip_partition(hard_squares, 1, 1, K, w, delta, "backward")
        assert rel_gap(fwd, bwd) <= 1e-12


def test_admissible_boundaries_hard_squares_count(hard_squares):
    # ring of B_1 splits into four independent 3-chains; 5 fillings each
    assert len(list(admissible_boundaries(hard_squares, 1, 0))) == 625


def test_admissible_boundaries_filters_dead_rings(agreement):
    deltas = list(admissible_boundaries(agreement, 1, 0))
    # agreement admits only the two constant rings
    assert len(deltas) == 2
    for delta in deltas:
        symbols = {s for _, s in delta.items()}
        assert len(symbols) == 1


def test_spec_marginals_sum_to_one_and_match_oracle(hard_squares):
    K = ((0, 0), (1, 0))
    deltas = list(admissible_boundaries(hard_squares, 1, 0))
    rng = np.random.default_rng(7)
    box = centered_box(1, 2)
    for i in rng.choice(len(deltas), size=8, replace=False):
        delta = deltas[int(i)]
        marg = spec_marginals_all(hard_squares, 1, 0, K, delta)
        total = sum(marg.values())
        assert math.isclose(total, 1.0, rel_tol=1e-12)
        logz = oracle_partition(hard_squares, box, pinned=delta)
        # degenerate pins never enter: compare each pattern weight directly
        for w, p in marg.items():
            num = oracle_partition(
                hard_squares,
                tuple(s for s in box if s not in K),
                pinned=pin_union(w, delta))
            want = 0.0 if num == -math.inf else math.exp(num - logz)
            assert abs(p - want) <= 1e-12


def test_exact_conditional_on_separating_window(hard_squares, weighted_iid):
    K = boundary(special_sets(0, 2).future)
    empty = Configuration.from_dict({s: "0" for s in K})
    dist = exact_conditional_full_boundary(hard_squares, 1, empty)
    assert math.isclose(dist["0"], 0.5) and math.isclose(dist["1"], 0.5)

    blocked = Configuration.from_dict(
        {**{s: "0" for s in list(K)[:-1]}, list(K)[-1]: "1"})
    dist = exact_conditional_full_boundary(hard_squares, 1, blocked)
    assert dist["0"] == 1.0

    # iid: conditional equals the site activity law under any window
    Kw = boundary(special_sets(0, 2).future)
    anyw = Configuration.from_dict({s: "b" for s in Kw})
    dist = exact_conditional_full_boundary(weighted_iid, 1, anyw)
    assert math.isclose(dist["a"], 1.0 / 3.0)
    assert math.isclose(dist["b"], 2.0 / 3.0)


def test_exact_conditional_rejects_other_windows(hard_squares):
    from gibbsbound.errors import ShapeError
    w = Configuration.from_dict({(0, 0): "0"})
    with pytest.raises(ShapeError):
        exact_conditional_full_boundary(hard_squares, 1, w)


def test_exact_conditional_none_for_impossible_window(agreement):
    K = boundary(special_sets(0, 2).future)
    mixed = Configuration.from_dict(
        {**{s: "0" for s in list(K)[:-1]}, list(K)[-1]: "1"})
    assert exact_conditional_full_boundary(agreement, 1, mixed) is None


def test_pinned_volume_logsum_agrees_with_oracle(hard_squares):
    box = centered_box(1, 2)
    ring = boundary(box)
    delta = Configuration.from_dict({s: "0" for s in ring})
    got = pinned_volume_logsum(hard_squares, box, delta)
    want = oracle_partition(hard_squares, box, pinned=delta)
    assert rel_gap(got, want) <= 1e-12
