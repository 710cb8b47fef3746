"""Certified entropy and pressure brackets with adaptive window growth.

For a stationary nearest-neighbour Gibbs measure in two dimensions, the
entropy rate equals the conditional entropy of the origin symbol given the
lexicographic past.  Conditioning on the full boundary of the future part
of a centered box can only lower that quantity, conditioning on the past
rim alone can only raise it, and under strong spatial mixing both windows
squeeze onto the entropy rate as the certification distance grows.  This
module turns the certified marginal and conditional intervals produced by
the window extremizer into entropy and pressure brackets, growing the
far-boundary distance until a tolerance or a budget is reached.

All values are in nats; front ends convert for display.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

from . import lattice
from .bounds import BoundPair, marginal_bounds, window_tables
from .errors import EnumerationCapError, ShapeError
from .model import InteractionModel
from .transfer import column_states, exact_conditional_full_boundary

__all__ = [
    "FUTURE_BOUNDARY", "PAST_RIM", "EntropyContext", "BracketReport",
    "f_bracket", "conditional_entropy_bounds", "adaptive_entropy_bracket",
    "entropy_rate_bracket", "pressure_bracket",
]

INV_E = 1.0 / math.e

FUTURE_BOUNDARY = "future_boundary"
PAST_RIM = "past_rim"

# Column-state count thresholds for default sweep caps.  Small state spaces
# run exactly; large ones trade witness exactness for bounded work, which
# keeps deep windows finishing at the price of wide (still sound) intervals.
_CAP_TIERS = ((150, 24_000, 96_000), (400, 1_500, 6_000))
_CAP_FLOOR = (150, 600)


def _f(x: float) -> float:
    """x * ln(1/x), continuously extended by 0 at x = 0."""
    if x <= 0.0:
        return 0.0
    return (-x * math.log(x)) + 0.0


def f_bracket(interval) -> tuple:
    """Enclose x * ln(1/x) over a probability interval.

    The map increases on [0, 1/e] and decreases on [1/e, 1], so the minimum
    over an interval sits at an endpoint, and the maximum is exactly 1/e
    when the interval straddles the critical point.  Accepts a BoundPair or
    any (lo, hi) pair.
    """
    try:
        lo, hi = float(interval.lo), float(interval.hi)
    except AttributeError:
        lo, hi = (float(v) for v in interval)
    if not (0.0 <= lo <= hi <= 1.0):
        raise ShapeError(f"not a probability interval: [{lo}, {hi}]")
    f_lo = min(_f(lo), _f(hi))
    if lo <= INV_E <= hi:
        return f_lo, INV_E
    return f_lo, max(_f(lo), _f(hi))


@dataclass(frozen=True)
class EntropyContext:
    """Which window the origin is conditioned on, and how.

    ``window`` is "future_boundary" (the boundary of the future part of the
    radius n-1 box, which separates the origin and yields the lower end of
    the sandwich), "past_rim" (the past sites of the radius-n box touching
    the future half-space, yielding the upper end), or an explicit tuple of
    sites.  ``exact_conditionals`` controls whether origin conditionals are
    computed exactly per window pattern; that shortcut is only valid for
    the separating future-boundary window, where the conditional does not
    depend on the far ring.  None means "exact when valid".
    """

    model: InteractionModel
    window: object = FUTURE_BOUNDARY
    exact_conditionals: bool | None = None

    def sites_for(self, n: int) -> tuple:
        d = self.model.dim
        if self.window == FUTURE_BOUNDARY:
            if n < 1:
                raise ShapeError("future-boundary window needs n >= 1")
            return lattice.boundary(lattice.special_sets(n - 1, d).future)
        if self.window == PAST_RIM:
            return lattice.special_sets(n, d).past_rim
        sites = lattice.site_set(self.window)
        if (0,) * d in sites:
            raise ShapeError("conditioning window must not contain the origin")
        return sites

    def uses_exact_conditionals(self) -> bool:
        if self.exact_conditionals is None:
            return self.window == FUTURE_BOUNDARY
        if self.exact_conditionals and self.window != FUTURE_BOUNDARY:
            raise ShapeError(
                "exact conditionals need the separating future-boundary window")
        return bool(self.exact_conditionals)


@dataclass
class BracketReport:
    """Outcome of one adaptive bracketing run.

    ``stage_times`` lists (label, seconds) per completed stage so slow runs
    can be attributed; ``diagnostics`` collects human-readable notes such as
    budget stops or zero-weight warnings.  Unconverged reports are still
    sound: the interval always contains the target quantity.
    """

    quantity: str
    n: int
    m_n: int
    j_final: int
    lower: float
    upper: float
    gap: float
    tolerance_target: float
    wall_time: float
    converged: bool
    stage_times: tuple = ()
    diagnostics: tuple = ()
    units: str = "nats"


def _auto_caps(model: InteractionModel, height: int) -> tuple:
    states, _ = column_states(model, height)
    ns = len(states)
    for limit, vcap, ccap in _CAP_TIERS:
        if ns <= limit:
            return vcap, ccap
    return _CAP_FLOOR


def _resolve_caps(model, n, mn, vertex_cap, cand_cap):
    if vertex_cap is not None and cand_cap is not None:
        return vertex_cap, cand_cap
    auto_v, auto_c = _auto_caps(model, 2 * (n + mn) + 1)
    return (auto_v if vertex_cap is None else vertex_cap,
            auto_c if cand_cap is None else cand_cap)


def conditional_entropy_bounds(ctx: EntropyContext, n: int, mn: int, *,
                               threads: int = 1, exact=None,
                               vertex_cap=None, cand_cap=None) -> BoundPair:
    """Certified interval for the origin entropy given the context window.

    Lower end: sum over window patterns of the pattern's minimal probability
    times the minimal per-symbol entropy terms.  Upper end: maximal pattern
    probability times maximal terms.  Both are valid for the conditional
    entropy under any admissible far ring, hence for the infinite-volume
    measure whenever the finite marginals converge to it.
    """
    model = ctx.model
    K = ctx.sites_for(n)
    vertex_cap, cand_cap = _resolve_caps(model, n, mn, vertex_cap, cand_cap)
    if ctx.uses_exact_conditionals():
        tables = window_tables(model, n, mn, K, include_conditionals=False,
                               exact=exact, vertex_cap=vertex_cap,
                               cand_cap=cand_cap, threads=threads)
        lo = hi = 0.0
        for w, bp in tables.marginals.items():
            if bp.hi <= 0.0:
                continue
            dist = exact_conditional_full_boundary(model, n, w)
            if dist is None:
                # positive mass forces a positive filling, so this cannot
                # happen; fail loudly rather than return an unsound bound
                raise ShapeError(
                    "window pattern with positive mass admits no filling")
            h_w = sum(_f(p) for p in dist.values())
            lo += bp.lo * h_w
            hi += bp.hi * h_w
        return BoundPair(lo, hi)

    tables = window_tables(model, n, mn, K, include_conditionals=True,
                           exact=exact, vertex_cap=vertex_cap,
                           cand_cap=cand_cap, threads=threads)
    lo = hi = 0.0
    for w, bp in tables.marginals.items():
        if bp.hi <= 0.0:
            continue
        flo_sum = fhi_sum = 0.0
        for a in model.alphabet:
            cb = tables.conditionals.get((a, w))
            if cb is None:
                continue        # symbol never occurs given w; term is 0
            f_lo, f_hi = f_bracket(cb)
            flo_sum += f_lo
            fhi_sum += f_hi
        lo += bp.lo * flo_sum
        hi += bp.hi * fhi_sum
    return BoundPair(lo, hi)


def _growth_estimate(model, h_now: int, h_next: int) -> float:
    """Predicted cost ratio of the next ring distance vs the last one."""
    try:
        now = len(column_states(model, h_now)[0])
        nxt = len(column_states(model, h_next)[0])
    except EnumerationCapError:
        return math.inf
    return max(4.0, (nxt / max(now, 1)) ** 2)


def _budget_stop_note(j: int, est: float, max_seconds: float) -> str:
    if math.isinf(est):
        return (f"stopping before j={j + 1}: next column basis exceeds "
                "enumeration caps")
    return (f"stopping before j={j + 1}: projected {est:.0f} s exceeds "
            f"the {max_seconds:.0f} s budget")


def adaptive_entropy_bracket(ctx: EntropyContext, n: int, target_tol=None, *,
                             max_j: int = 6, max_seconds: float = 900.0,
                             threads: int = 1, exact=None,
                             vertex_cap=None, cand_cap=None) -> BracketReport:
    """Grow the far ring until the window's entropy interval is tight.

    The ring distance is m = j * n^(d-1) for j = 1, 2, ...; successive
    intervals are intersected, which is sound because each is certified on
    its own.  Stops when the gap reaches the tolerance (default e^(-n^(d-1)))
    or when a cap, the iteration limit, or the time budget intervenes; the
    unconverged flag is set in the latter cases.
    """
    model = ctx.model
    d = model.dim
    if n < 1:
        raise ShapeError("adaptive bracketing needs n >= 1")
    step = n ** (d - 1)
    tol = math.exp(-step) if target_tol is None else float(target_tol)
    q = len(model.alphabet)
    lo, hi = 0.0, math.log(q)   # certified a priori
    stages, diags = [], []
    converged = False
    j_final = m_final = 0
    t0 = time.monotonic()
    for j in range(1, max_j + 1):
        mn = j * step
        t1 = time.monotonic()
        try:
            bp = conditional_entropy_bounds(ctx, n, mn, threads=threads,
                                            exact=exact, vertex_cap=vertex_cap,
                                            cand_cap=cand_cap)
        except EnumerationCapError as err:
            diags.append(f"j={j}: {err}")
            break
        dt = time.monotonic() - t1
        stages.append((f"j={j}", dt))
        lo, hi = max(lo, bp.lo), min(hi, bp.hi)
        j_final, m_final = j, mn
        if hi - lo <= tol and lo <= hi:
            converged = True
            break
        elapsed = time.monotonic() - t0
        if elapsed >= max_seconds:
            diags.append(f"time budget exhausted after j={j}")
            break
        est = dt * _growth_estimate(model, 2 * (n + mn) + 1,
                                    2 * (n + mn + step) + 1)
        if elapsed + est > max_seconds:
            diags.append(_budget_stop_note(j, est, max_seconds))
            break
    return BracketReport(
        quantity="conditional-entropy", n=n, m_n=m_final, j_final=j_final,
        lower=lo, upper=hi, gap=hi - lo, tolerance_target=tol,
        wall_time=time.monotonic() - t0, converged=converged,
        stage_times=tuple(stages), diagnostics=tuple(diags))


def _integral_bracket(model, n, mn, threads, vertex_cap, cand_cap):
    """Certified interval for the mean of the local interaction energy.

    The mean of log-activity plus per-axis log-edge-weight terms under the
    stationary measure, bounded via single-site and adjacent-pair marginal
    intervals.  A zero-weight pattern whose certified mass is not zero
    forces the lower end to -infinity (the measure may charge it); a
    diagnostic records which pattern did it.
    """
    d = model.dim
    idx = model.alphabet.index
    lo = hi = 0.0
    diags = []

    def absorb(bp, coeff, what):
        nonlocal lo, hi
        if coeff == -math.inf:
            if bp.hi > 0.0:
                lo = -math.inf
                diags.append(
                    f"{what} has zero weight but certified mass up to "
                    f"{bp.hi:.3g}; lower pressure bound is -inf")
            return
        if coeff >= 0.0:
            lo += bp.lo * coeff
            hi += bp.hi * coeff
        else:
            lo += bp.hi * coeff
            hi += bp.lo * coeff

    origin = (0,) * d
    site = marginal_bounds(model, n, mn, (origin,), threads=threads,
                           vertex_cap=vertex_cap, cand_cap=cand_cap)
    for cfg, bp in site.items():
        a = cfg.symbols[0]
        absorb(bp, float(model.log_gamma[idx(a)]), f"symbol {a!r}")
    for axis in range(d):
        shift = tuple(1 if k == axis else 0 for k in range(d))
        tabs = marginal_bounds(model, n, mn, (origin, shift), threads=threads,
                               vertex_cap=vertex_cap, cand_cap=cand_cap)
        for cfg, bp in tabs.items():
            a, b = cfg.get(origin), cfg.get(shift)
            absorb(bp, float(model.log_beta[axis, idx(a), idx(b)]),
                   f"adjacent pair {a!r}->{b!r} on axis {axis}")
    return lo, hi, diags


def _sandwich_loop(model, n, target_tol, fixed_m, max_j, max_seconds,
                   threads, exact_conditionals, vertex_cap, cand_cap,
                   with_integral, exact=None):
    d = model.dim
    if n < 1:
        raise ShapeError("bracketing needs n >= 1")
    step = n ** (d - 1)
    tol = math.exp(-step) if target_tol is None else float(target_tol)
    ctx_lo = EntropyContext(model, FUTURE_BOUNDARY, exact_conditionals)
    ctx_hi = EntropyContext(model, PAST_RIM)
    q = len(model.alphabet)
    if with_integral:
        lo, hi = -math.inf, math.inf
    else:
        lo, hi = 0.0, math.log(q)
    stages, diags = [], []
    converged = False
    j_final = m_final = 0
    t0 = time.monotonic()
    plan = ((0, fixed_m),) if fixed_m is not None else tuple(
        (j, j * step) for j in range(1, max_j + 1))
    for j, mn in plan:
        label = f"m={mn}" if fixed_m is not None else f"j={j}"
        t_iter = time.monotonic()
        try:
            t1 = time.monotonic()
            bp_lo = conditional_entropy_bounds(
                ctx_lo, n, mn, threads=threads, exact=exact,
                vertex_cap=vertex_cap, cand_cap=cand_cap)
            stages.append((f"{label} future-boundary", time.monotonic() - t1))
            t1 = time.monotonic()
            bp_hi = conditional_entropy_bounds(
                ctx_hi, n, mn, threads=threads, exact=exact,
                vertex_cap=vertex_cap, cand_cap=cand_cap)
            stages.append((f"{label} past-rim", time.monotonic() - t1))
            if with_integral:
                t1 = time.monotonic()
                vcap, ccap = _resolve_caps(model, n, mn, vertex_cap, cand_cap)
                int_lo, int_hi, int_diags = _integral_bracket(
                    model, n, mn, threads, vcap, ccap)
                stages.append((f"{label} energy-mean", time.monotonic() - t1))
                diags.extend(int_diags)
                cand = (bp_lo.lo + int_lo, bp_hi.hi + int_hi)
            else:
                cand = (bp_lo.lo, bp_hi.hi)
        except EnumerationCapError as err:
            diags.append(f"{label}: {err}")
            break
        lo, hi = max(lo, cand[0]), min(hi, cand[1])
        j_final, m_final = j, mn
        if hi - lo <= tol and lo <= hi:
            converged = True
            break
        if fixed_m is not None:
            break
        elapsed = time.monotonic() - t0
        if elapsed >= max_seconds:
            diags.append(f"time budget exhausted after {label}")
            break
        dt = time.monotonic() - t_iter
        est = dt * _growth_estimate(model, 2 * (n + mn) + 1,
                                    2 * (n + mn + step) + 1)
        if elapsed + est > max_seconds:
            diags.append(_budget_stop_note(j, est, max_seconds))
            break
    return (lo, hi, tol, converged, j_final, m_final,
            tuple(stages), tuple(diags), time.monotonic() - t0)


def entropy_rate_bracket(model: InteractionModel, n: int, target_tol=None, *,
                         fixed_m=None, max_j: int = 6,
                         max_seconds: float = 900.0, threads: int = 1,
                         exact_conditionals=None, exact=None,
                         vertex_cap=None, cand_cap=None) -> BracketReport:
    """Certified bracket for the entropy rate of the stationary measure.

    The lower end conditions the origin on the boundary of the future part
    (radius n-1), the upper end on the past rim of the radius-n box; the
    two windows share the ring distance m, which grows adaptively unless
    ``fixed_m`` pins it.
    """
    (lo, hi, tol, converged, j_final, m_final, stages, diags,
     wall) = _sandwich_loop(model, n, target_tol, fixed_m, max_j,
                            max_seconds, threads, exact_conditionals,
                            vertex_cap, cand_cap, with_integral=False,
                            exact=exact)
    return BracketReport(
        quantity="entropy", n=n, m_n=m_final, j_final=j_final, lower=lo,
        upper=hi, gap=hi - lo, tolerance_target=tol, wall_time=wall,
        converged=converged, stage_times=stages, diagnostics=diags)


def pressure_bracket(model: InteractionModel, n: int, target_tol=None, *,
                     fixed_m=None, max_j: int = 6,
                     max_seconds: float = 900.0, threads: int = 1,
                     exact_conditionals=None, exact=None,
                     vertex_cap=None, cand_cap=None) -> BracketReport:
    """Certified bracket for the pressure of the interaction.

    Pressure decomposes as entropy rate plus the stationary mean of the
    local energy (log activities plus per-axis log edge weights), and the
    second term is bracketed through single-site and adjacent-pair marginal
    intervals at the same ring distance.
    """
    (lo, hi, tol, converged, j_final, m_final, stages, diags,
     wall) = _sandwich_loop(model, n, target_tol, fixed_m, max_j,
                            max_seconds, threads, exact_conditionals,
                            vertex_cap, cand_cap, with_integral=True,
                            exact=exact)
    return BracketReport(
        quantity="pressure", n=n, m_n=m_final, j_final=j_final, lower=lo,
        upper=hi, gap=hi - lo, tolerance_target=tol, wall_time=wall,
        converged=converged, stage_times=stages, diagnostics=diags)
