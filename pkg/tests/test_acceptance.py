"""Acceptance gate: the eight release criteria, one test per criterion.

Every test pins its own tolerances and runtime budget.  Reference
numbers are closed forms or are recomputed here through the brute-force
oracles, never through the code under test.  Criteria 4 and 6 state
goals the current estimator does not reach on this hardware; those
tests fail with the measured numbers instead of weakening the target.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest

from gibbsbound import cli
from gibbsbound.bounds import marginal_bounds
from gibbsbound.estimator import (
    FUTURE_BOUNDARY,
    INV_E,
    PAST_RIM,
    EntropyContext,
    conditional_entropy_bounds,
    entropy_rate_bracket,
    f_bracket,
)
from gibbsbound.lattice import boundary, centered_box, special_sets
from gibbsbound.model import Configuration, InteractionModel
from gibbsbound.oracle import (
    oracle_admissible_rings,
    oracle_conditional_entropy,
    oracle_partition,
    oracle_strip_entropy,
)
from gibbsbound.transfer import admissible_boundaries, strip_partition

from conftest import random_sparse_model

DEMOS = Path(__file__).resolve().parent.parent / "demos"
UNIFORM_PATH = str(DEMOS / "uniform_binary.json")
IID_PATH = str(DEMOS / "weighted_iid.json")
HS_PATH = str(DEMOS / "hard_squares.json")

LN2 = math.log(2.0)
LN3 = math.log(3.0)
IID_H = LN3 - (2.0 / 3.0) * LN2
HS_ENTROPY_REF = 0.407495
PC_DEFAULT = 0.592746
ORIGIN = ((0, 0),)


def rel_gap(a, b):
    if a == -math.inf and b == -math.inf:
        return 0.0
    if a == -math.inf or b == -math.inf:
        return math.inf
    return abs(math.expm1(a - b))


def pin_union(w, delta):
    merged = dict(delta.items())
    merged.update(dict(w.items()))
    return Configuration.from_dict(merged)


@pytest.fixture(scope="module")
def hard_square_runs():
    """Criterion 4 entropy runs at threads=1, shared with criterion 8."""
    runs = {}
    for n in (2, 3):
        t0 = time.monotonic()
        payload, code = cli.cmd_entropy(HS_PATH, n, threads=1)
        runs[n] = (payload, code, time.monotonic() - t0)
    return runs


def test_criterion_1_closed_form_iid_targets():
    t0 = time.monotonic()
    payload, code = cli.cmd_entropy(UNIFORM_PATH, 2)
    t_uniform = time.monotonic() - t0
    assert code == 0
    assert abs(payload["lower"] - LN2) <= 1e-9, (
        f"uniform binary entropy lower end {payload['lower']}")
    assert abs(payload["upper"] - LN2) <= 1e-9

    t0 = time.monotonic()
    payload, code = cli.cmd_entropy(IID_PATH, 2)
    t_entropy = time.monotonic() - t0
    assert code == 0
    assert abs(payload["lower"] - IID_H) <= 1e-6, (
        f"weighted iid entropy lower end {payload['lower']} vs {IID_H}")
    assert abs(payload["upper"] - IID_H) <= 1e-6

    t0 = time.monotonic()
    payload, code = cli.cmd_pressure(IID_PATH, 2)
    t_pressure = time.monotonic() - t0
    assert code == 0
    assert abs(payload["lower"] - LN3) <= 1e-6
    assert abs(payload["upper"] - LN3) <= 1e-6

    for label, spent in (("uniform entropy", t_uniform),
                         ("iid entropy", t_entropy),
                         ("iid pressure", t_pressure)):
        assert spent < 10.0, f"{label} took {spent:.1f} s, budget is 10 s"


def test_criterion_2_strip_partition_matches_oracle():
    # in two dimensions the only box with at most 12 sites reachable as
    # B_{n+m} (n >= 1) is B_1 with 9 sites, so every check runs there
    assert [N for N in range(1, 4) if (2 * N + 1) ** 2 <= 12] == [1]
    t0 = time.monotonic()
    rng = np.random.default_rng(202)
    box = centered_box(1, 2)
    origin_zero = Configuration.from_dict({(0, 0): "0"})
    empty = Configuration.from_dict({})
    compared = 0
    for trial in range(200):
        q = 2 if trial % 2 == 0 else 3
        model = random_sparse_model(rng, q)
        deltas = list(admissible_boundaries(model, 1, 0))
        assert deltas, f"trial {trial}: no admissible ring survived"
        take = rng.choice(len(deltas), size=min(4, len(deltas)),
                          replace=False)
        for i in take:
            delta = deltas[int(i)]
            for K, w in (((), empty), (ORIGIN, origin_zero)):
                got = strip_partition(model, 1, 0, K, w, delta)
                V = tuple(s for s in box if s not in K)
                want = oracle_partition(model, V, pinned=pin_union(w, delta))
                assert rel_gap(got, want) <= 1e-9, (
                    f"trial {trial}: strip {got} vs oracle {want}")
                compared += 1
    spent = time.monotonic() - t0
    assert compared >= 1500
    assert spent < 300.0, f"sweep took {spent:.0f} s, budget is 5 min"


def _sampled_rings(model, V, ring, rng, want):
    """Admissibility-checked random ring samples, all-zero ring first."""
    symbols = model.alphabet.symbols
    zero = Configuration.from_dict({s: symbols[0] for s in ring})
    seen = {tuple(zero.symbols)}
    picks = [zero]
    for _ in range(300):
        if len(picks) >= want:
            break
        syms = [symbols[k]
                for k in rng.integers(0, len(symbols), len(ring))]
        key = tuple(syms)
        if key in seen:
            continue
        seen.add(key)
        delta = Configuration.from_dict(dict(zip(ring, syms)))
        if oracle_partition(model, V, pinned=delta) > -math.inf:
            picks.append(delta)
    return picks


def test_criterion_3_sandwich_soundness(hard_squares, uniform_binary,
                                        weighted_iid, agreement):
    rng = np.random.default_rng(33)
    violations = []

    # oracle-only inequality: conditioning on the full boundary of S_1
    # can only lower the origin entropy relative to the thinner slice
    sets1 = special_sets(1, 2)
    S1 = tuple(sets1.future)
    dS1 = tuple(boundary(S1))
    U1 = tuple(sets1.past_rim)
    V = tuple(sorted(set(S1) | set(dS1)))
    ringV = tuple(boundary(V))
    for name, model in (("hard squares", hard_squares),
                        ("weighted iid", weighted_iid),
                        ("sparse q=2", random_sparse_model(rng, 2))):
        for delta in _sampled_rings(model, V, ringV, rng, 12):
            h_full = oracle_conditional_entropy(model, V, dS1, delta)
            h_slice = oracle_conditional_entropy(model, V, U1, delta)
            if h_full > h_slice + 1e-12:
                violations.append(
                    f"{name}: H(0|dS_1)={h_full} > H(0|U_1)={h_slice}")

    # artifact brackets must contain the oracle entropy under every
    # admissible far ring; enumerable only for two-symbol alphabets
    box = centered_box(1, 2)
    ringB = tuple(boundary(box))
    for name, model in (("hard squares", hard_squares),
                        ("uniform", uniform_binary),
                        ("agreement", agreement),
                        ("sparse q=2 a", random_sparse_model(rng, 2)),
                        ("sparse q=2 b", random_sparse_model(rng, 2))):
        rings = list(oracle_admissible_rings(model, box, ringB))
        for kind in (FUTURE_BOUNDARY, PAST_RIM):
            ctx = EntropyContext(model, kind)
            K = tuple(ctx.sites_for(1))
            bp = conditional_entropy_bounds(ctx, 1, 0)
            for delta in rings:
                h = oracle_conditional_entropy(model, box, K, delta)
                if not (bp.lo - 1e-9 <= h <= bp.hi + 1e-9):
                    violations.append(
                        f"{name}/{kind}: H={h} outside "
                        f"[{bp.lo}, {bp.hi}]")
    assert not violations, (
        f"{len(violations)} violations, first: {violations[0]}")


def test_criterion_4_hard_squares(hard_squares, hard_square_runs):
    payload, code = cli.cmd_ssm_check(HS_PATH)
    assert code == 0
    assert payload["q_value"] == 0.5, f"q came out {payload['q_value']}"
    assert payload["certified"] is True
    assert payload["p_c"] == PC_DEFAULT

    # the reference itself must be stable across strip widths
    w10 = oracle_strip_entropy(hard_squares, width=10)
    w12 = oracle_strip_entropy(hard_squares, width=12)
    assert abs(w10 - w12) < 1e-3, f"strip ladder unstable: {w10} vs {w12}"

    report2, _, spent2 = hard_square_runs[2]
    report3, _, spent3 = hard_square_runs[3]
    for n, rep in ((2, report2), (3, report3)):
        assert rep["lower"] - 1e-12 <= HS_ENTROPY_REF <= rep["upper"] + 1e-12, (
            f"n={n} bracket [{rep['lower']}, {rep['upper']}] misses "
            f"{HS_ENTROPY_REF}")
    assert spent2 < 60.0, f"n=2 took {spent2:.0f} s, budget is 1 min"
    assert spent3 < 1800.0, f"n=3 took {spent3:.0f} s, budget is 30 min"

    nested = ((report3["lower"] >= report2["lower"] - 1e-12
               and report3["upper"] <= report2["upper"] + 1e-12)
              or (report2["lower"] >= report3["lower"] - 1e-12
                  and report2["upper"] <= report3["upper"] + 1e-12))
    assert nested, (
        f"brackets are not nested: n=2 [{report2['lower']}, "
        f"{report2['upper']}] vs n=3 [{report3['lower']}, {report3['upper']}]")

    gap2 = report2["gap"]
    gap3 = report3["gap"]
    assert gap3 < gap2, (
        f"gap should shrink with n but n=3 gives {gap3:.6f} vs n=2 "
        f"{gap2:.6f}: the n=3 inner window needs a 13-column transfer "
        f"basis (377 states) that only fits under the relaxed floor-tier "
        f"caps, and the merge slack it buys swallows the refinement")


def test_criterion_5_width_decays_in_m(hard_squares):
    t0 = time.monotonic()
    widths = []
    for m in (1, 2, 3):
        tables = marginal_bounds(hard_squares, 1, m, ORIGIN)
        widths.append(max(bp.hi - bp.lo for bp in tables.values()))
    spent = time.monotonic() - t0
    assert widths[0] > widths[1] > widths[2], f"widths not decreasing: {widths}"
    slope = np.polyfit([1, 2, 3], np.log(widths), 1)[0]
    assert slope < 0.0, f"log-width slope {slope} is not negative"
    assert spent < 120.0, f"decay sweep took {spent:.0f} s, budget is 2 min"


def test_criterion_6_adaptive_loop(hard_squares, agreement):
    problems = []

    report = entropy_rate_bracket(hard_squares, 2, 1e-2, max_j=6)
    assert report.j_final <= 6
    if not report.converged:
        notes = "; ".join(report.diagnostics) or "no diagnostic recorded"
        problems.append(
            f"hard squares n=2 at tol 1e-2 stops unconverged at "
            f"j={report.j_final} with gap {report.gap:.4f} ({notes}); no "
            f"enumerable window at this radius reaches a 0.01 gap")

    report = entropy_rate_bracket(agreement, 2, 1e-2, max_j=6)
    if report.converged:
        problems.append(
            f"agreement model converges at j={report.j_final} with gap "
            f"{report.gap:.1e} instead of exiting unconverged at the cap: "
            f"its hard constraints force the origin symbol, so the very "
            f"first window already certifies entropy zero and there is "
            f"nothing left to stall on")

    assert not problems, " | ".join(problems)


def test_criterion_7_f_bracket_sweep():
    rng = np.random.default_rng(77)
    violations = 0
    for _ in range(100):
        a = rng.random(1000)
        b = rng.random(1000)
        lo = np.minimum(a, b)
        hi = np.maximum(a, b)
        t = rng.random((1000, 1000))
        for i in range(1000):
            f_lo, f_hi = f_bracket((float(lo[i]), float(hi[i])))
            x = lo[i] + t[i] * (hi[i] - lo[i])
            xs = np.where(x > 0.0, x, 1.0)
            phi = np.where(x > 0.0, -xs * np.log(xs), 0.0)
            violations += int(np.count_nonzero(
                (phi < f_lo - 1e-15) | (phi > f_hi + 1e-15)))
    assert violations == 0, f"{violations} enclosure violations"
    # intervals straddling the maximizer report exactly the peak value
    assert f_bracket((0.2, 0.5))[1] == INV_E
    assert f_bracket((0.0, 1.0))[1] == INV_E


def _numeric_fields(payload):
    trimmed = {k: v for k, v in payload.items()
               if k not in ("wall_time_ms", "diagnostics")}
    return cli._render(trimmed, "json")


def test_criterion_8_thread_determinism(hard_square_runs):
    ssm_a, _ = cli.cmd_ssm_check(HS_PATH)
    ssm_b, _ = cli.cmd_ssm_check(HS_PATH)
    assert _numeric_fields(ssm_a) == _numeric_fields(ssm_b)

    for n in (2, 3):
        base = _numeric_fields(hard_square_runs[n][0])
        payload, _ = cli.cmd_entropy(HS_PATH, n, threads=2)
        assert _numeric_fields(payload) == base, (
            f"n={n}: thread count changed a report field")
