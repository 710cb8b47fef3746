"""Column transfer engine for two-dimensional boxes and strips.

A centred box of radius N is swept column by column (columns indexed by the
first coordinate, rows by the second).  Each column of height 2N+1 carries a
state drawn from the symbol alphabet; only states whose internal weight
(activities plus vertical edge factors) is positive are kept, which for
hard-constraint models shrinks the state space dramatically.  A sweep
multiplies per-column weight vectors and the horizontal edge matrix, with
per-step renormalisation accumulated in log scale so long strips neither
underflow nor overflow.

The module provides the per-boundary reference path: partition sums and
conditional tables for one fixed boundary ring at a time.  The extremization
over boundary rings lives in `bounds` and reuses the builders exported here.
"""

from dataclasses import dataclass
from itertools import product

import numpy as np

from . import lattice
from .errors import (
    EnumerationCapError,
    NotAdmissibleError,
    ShapeError,
    UnsupportedDimensionError,
)
from .model import LOG_ZERO, Configuration, InteractionModel, weight

__all__ = [
    "ColumnState",
    "TransferStage",
    "strip_partition",
    "spec_marginals_all",
    "admissible_boundaries",
    "exact_conditional_full_boundary",
    "pinned_volume_logsum",
]

STATE_CAP = 4_000_000      # cap on q^height full column enumerations
DENSE_CAP = 6_000          # cap on the restricted state count (hor is dense)
SIDE_CAP = 1_000_000       # cap on admissible side-chain enumerations


@dataclass(frozen=True)
class ColumnState:
    """Symbols along one vertical line of the box, bottom row first."""

    symbols: tuple
    alphabet_size: int

    def __post_init__(self):
        if not all(0 <= s < self.alphabet_size for s in self.symbols):
            raise ShapeError("column state symbols out of range")

    @property
    def index(self) -> int:
        """Mixed-radix rank of the state in [0, q^height)."""
        r = 0
        for s in self.symbols:
            r = r * self.alphabet_size + int(s)
        return r

    def __len__(self):
        return len(self.symbols)


@dataclass(frozen=True)
class TransferStage:
    """One column's log-scale transfer matrix together with its pin mask.

    Rows index the current column state, columns the next column's state.
    Rows whose state contradicts a pinned symbol are -inf throughout.
    """

    column_index: int
    log_matrix: np.ndarray
    pinned_rows: tuple


def _require_d2(model):
    if model.dim != 2:
        raise UnsupportedDimensionError("column sweeps are implemented for d=2 only")


def column_states(model: InteractionModel, height: int,
                  cap: int = STATE_CAP, dense_cap: int = DENSE_CAP):
    """Admissible column states (positive internal weight), lex order.

    Returns (states, internal) where states is int8 of shape [ns, height]
    and internal[i] is the product of activities and vertical edge factors.
    """
    q = len(model.alphabet)
    total = q ** height
    if total > cap:
        raise EnumerationCapError(
            f"column state space {q}^{height} exceeds cap {cap}")
    ranks = np.arange(total)
    states = np.empty((total, height), dtype=np.int8)
    for r in range(height - 1, -1, -1):
        states[:, r] = ranks % q
        ranks //= q
    w = model.gamma[states.astype(np.int64)].prod(axis=1)
    vert = model.beta[1]
    for r in range(height - 1):
        w = w * vert[states[:, r].astype(np.int64), states[:, r + 1].astype(np.int64)]
    keep = w > 0
    states = states[keep]
    if len(states) > dense_cap:
        raise EnumerationCapError(
            f"{len(states)} admissible column states exceed dense cap {dense_cap}")
    if len(states) == 0:
        raise NotAdmissibleError("no column state has positive internal weight")
    return states, w[keep]


def horizontal_matrix(model: InteractionModel, states: np.ndarray) -> np.ndarray:
    """Edge factors between consecutive columns: H[a, b] = prod over rows."""
    s64 = states.astype(np.int64)
    edge = model.beta[0]
    out = np.ones((len(states), len(states)))
    for r in range(states.shape[1]):
        out *= edge[s64[:, r][:, None], s64[None, :, r]]
    return out


def column_weight(model: InteractionModel, states: np.ndarray, internal: np.ndarray,
                  bottom: int, top: int) -> np.ndarray:
    """Internal weights times the edge factors to the ring row below and above."""
    s64 = states.astype(np.int64)
    vert = model.beta[1]
    return internal * vert[bottom, s64[:, 0]] * vert[s64[:, -1], top]


def side_chains(model: InteractionModel, height: int, cap: int = SIDE_CAP) -> np.ndarray:
    """Vertical boundary chains with positive internal edge product, lex order."""
    vert = model.beta[1]
    q = len(model.alphabet)
    chains = []
    stack = [(s,) for s in range(q - 1, -1, -1)]
    while stack:
        c = stack.pop()
        if len(c) == height:
            chains.append(c)
            if len(chains) > cap:
                raise EnumerationCapError(
                    f"more than {cap} admissible side chains at height {height}")
            continue
        for s in range(q - 1, -1, -1):
            if vert[c[-1], s] > 0:
                stack.append(c + (s,))
    return np.array(chains, dtype=np.int8)


def side_edge_matrix(model: InteractionModel, chains: np.ndarray,
                     states: np.ndarray, incoming: bool) -> np.ndarray:
    """Row i = edge factors from side chain i into each column state.

    `incoming` chooses the edge direction: True for a chain on the smaller
    first coordinate (chain feeds the column), False for the far side.
    """
    edge = model.beta[0]
    c64 = chains.astype(np.int64)
    s64 = states.astype(np.int64)
    out = np.ones((len(chains), len(states)))
    for r in range(states.shape[1]):
        if incoming:
            out *= edge[c64[:, r][:, None], s64[None, :, r]]
        else:
            out *= edge[s64[None, :, r], c64[:, r][:, None]]
    return out


def transfer_stage(model: InteractionModel, states: np.ndarray, internal: np.ndarray,
                   hor: np.ndarray, column_index: int, bottom: int, top: int,
                   pins=None) -> TransferStage:
    """Materialise one column's stage matrix (reference path; sweeps use vectors)."""
    colw = column_weight(model, states, internal, bottom, top)
    mask = np.ones(len(states), dtype=bool)
    pinned = tuple(sorted((pins or {}).items()))
    for row, sym in pinned:
        mask &= states[:, row] == sym
    lin = np.where(mask, colw, 0.0)[:, None] * hor
    with np.errstate(divide="ignore"):
        return TransferStage(column_index, np.log(lin), pinned)


# -- boundary ring handling -------------------------------------------------


def _ring_parts(delta: Configuration, N: int, model: InteractionModel):
    """Split a ring configuration into (left, right, bottom, top) index arrays."""
    box = lattice.centered_box(N, 2)
    expected = lattice.boundary(box)
    if tuple(delta.sites) != expected:
        raise ShapeError("boundary configuration must cover the box ring exactly")
    look = {v: model.alphabet.index(s) for v, s in delta.items()}
    rows = range(-N, N + 1)
    left = np.array([look[(-N - 1, y)] for y in rows], dtype=np.int64)
    right = np.array([look[(N + 1, y)] for y in rows], dtype=np.int64)
    bottom = np.array([look[(x, -N - 1)] for x in rows], dtype=np.int64)
    top = np.array([look[(x, N + 1)] for x in rows], dtype=np.int64)
    return left, right, bottom, top


def _ring_internal_log(model: InteractionModel, left, right, bottom, top) -> float:
    """Log of the ring's own factors: activities plus within-ring edges."""
    lg, lb = model.log_gamma, model.log_beta
    total = lg[left].sum() + lg[right].sum() + lg[bottom].sum() + lg[top].sum()
    total += lb[1, left[:-1], left[1:]].sum() + lb[1, right[:-1], right[1:]].sum()
    total += lb[0, bottom[:-1], bottom[1:]].sum() + lb[0, top[:-1], top[1:]].sum()
    return float(total)


def _pin_table(model: InteractionModel, config: Configuration, N: int):
    """Map column -> {row: symbol index} for sites of a configuration in the box."""
    pins = {}
    for v, s in config.items():
        x, y = v
        if abs(x) > N or abs(y) > N:
            raise ShapeError(f"pinned site {v} lies outside the box of radius {N}")
        pins.setdefault(x, {})[y + N] = model.alphabet.index(s)
    return pins


def _apply_pins(states: np.ndarray, vec: np.ndarray, pins) -> np.ndarray:
    """Zero out the entries of `vec` whose state contradicts the pins."""
    if not pins:
        return vec
    mask = np.ones(len(states), dtype=bool)
    for row, sym in pins.items():
        mask &= states[:, row] == sym
    return np.where(mask, vec, 0.0)


def strip_partition(model: InteractionModel, n: int, mn: int, K, w: Configuration,
                    delta: Configuration, direction: str = "forward") -> float:
    """Log of the pinned box sum: all fillings of the box outside K, weighted.

    The returned value includes the ring's own factors, so it equals the log
    of the brute-force sum of full-configuration weights over fillings of
    box-minus-K.  `direction` selects the sweep orientation; both give the
    same value up to rounding and exist for exactly that cross-check.
    """
    _require_d2(model)
    if mn < 0 or n < 0:
        raise ShapeError("n and mn must be non-negative")
    N = n + mn
    K = lattice.site_set(K)
    box = set(lattice.centered_box(N, 2))
    if not set(K) <= set(lattice.centered_box(n, 2)):
        raise ShapeError("K must sit inside the inner box")
    if tuple(w.sites) != K:
        raise ShapeError("w must assign exactly the sites of K")
    left, right, bottom, top = _ring_parts(delta, N, model)
    ring_log = _ring_internal_log(model, left, right, bottom, top)
    if ring_log == LOG_ZERO:
        return LOG_ZERO
    H = 2 * N + 1
    states, internal = column_states(model, H)
    hor = horizontal_matrix(model, states)
    pins = _pin_table(model, w, N)
    edge = model.beta[0]
    s64 = states.astype(np.int64)

    def x_vector(chain):
        out = np.ones(len(states))
        for r in range(H):
            out *= edge[chain[r], s64[:, r]]
        return out

    def y_vector(chain):
        out = np.ones(len(states))
        for r in range(H):
            out *= edge[s64[:, r], chain[r]]
        return out

    if direction == "forward":
        vec = x_vector(left)
        order = range(-N, N + 1)
        mat = hor
        closing = y_vector(right)
    elif direction == "backward":
        vec = y_vector(right)
        order = range(N, -N - 1, -1)
        mat = hor.T
        closing = x_vector(left)
    else:
        raise ValueError("direction must be 'forward' or 'backward'")

    acc = ring_log
    for i, x in enumerate(order):
        colw = column_weight(model, states, internal, int(bottom[x + N]), int(top[x + N]))
        vec = _apply_pins(states, vec * colw, pins.get(x, {}))
        peak = vec.max()
        if peak <= 0.0:
            return LOG_ZERO
        vec = vec / peak
        acc += float(np.log(peak))
        if i < H - 1:
            vec = vec @ mat
    final = float(vec @ closing)
    if final <= 0.0:
        return LOG_ZERO
    return acc + float(np.log(final))


def spec_marginals_all(model: InteractionModel, n: int, mn: int, K,
                       delta: Configuration, cap: int = 1_000_000):
    """Conditional probabilities of every assignment on K given the ring.

    One forward and one backward pass are shared across all q^|K| patterns;
    the result agrees with per-pattern strip sums and sums to one.
    """
    _require_d2(model)
    N = n + mn
    K = lattice.site_set(K)
    if not K:
        raise ShapeError("K must be non-empty")
    if not set(K) <= set(lattice.centered_box(n, 2)):
        raise ShapeError("K must sit inside the inner box")
    q = len(model.alphabet)
    if q ** len(K) > cap:
        raise EnumerationCapError(f"{q}^{len(K)} patterns on K exceed cap {cap}")
    left, right, bottom, top = _ring_parts(delta, N, model)
    H = 2 * N + 1
    states, internal = column_states(model, H)
    hor = horizontal_matrix(model, states)
    edge = model.beta[0]
    s64 = states.astype(np.int64)
    kcols = sorted({v[0] for v in K})
    span_lo, span_hi = kcols[0], kcols[-1]
    rows_of = {}
    for (x, y) in K:
        rows_of.setdefault(x, []).append(y + N)

    fwd = np.ones(len(states))
    for r in range(H):
        fwd *= edge[left[r], s64[:, r]]
    for x in range(-N, span_lo):
        colw = column_weight(model, states, internal, int(bottom[x + N]), int(top[x + N]))
        fwd = (fwd * colw) @ hor
        peak = fwd.max()
        if peak > 0:
            fwd = fwd / peak

    bwd = np.ones(len(states))
    for r in range(H):
        bwd *= edge[s64[:, r], right[r]]
    for x in range(N, span_hi, -1):
        colw = column_weight(model, states, internal, int(bottom[x + N]), int(top[x + N]))
        bwd = (bwd * colw) @ hor.T
        peak = bwd.max()
        if peak > 0:
            bwd = bwd / peak

    # branch over the pinned rows of each span column, left to right
    branches = fwd[None, :]
    assigned = [()]
    for x in range(span_lo, span_hi + 1):
        colw = column_weight(model, states, internal, int(bottom[x + N]), int(top[x + N]))
        weighted = branches * colw[None, :]
        rows = sorted(rows_of.get(x, []))
        if rows:
            pieces, labels = [], []
            for combo in product(range(q), repeat=len(rows)):
                mask = np.ones(len(states), dtype=bool)
                for row, sym in zip(rows, combo):
                    mask &= states[:, row] == sym
                pieces.append(np.where(mask[None, :], weighted, 0.0))
                labels.append(combo)
            weighted = np.concatenate(pieces, axis=0)
            assigned = [a + (x, lab) for lab in labels for a in assigned]
        if x < span_hi:
            weighted = weighted @ hor
        peak = weighted.max()
        if peak > 0:
            weighted = weighted / peak
        branches = weighted
    vals = branches @ bwd
    total = vals.sum()
    if total <= 0:
        raise NotAdmissibleError("ring admits no positive-weight filling")
    out = {}
    for label, v in zip(assigned, vals):
        picks = {}
        it = iter(label)
        for x, combo in zip(it, it):
            for row, sym in zip(sorted(rows_of[x]), combo):
                picks[(x, row - N)] = model.alphabet.symbols[sym]
        cfg = Configuration.from_dict(picks)
        out[cfg] = float(v / total)
    return out


def admissible_boundaries(model: InteractionModel, n: int, mn: int):
    """Ring configurations admitting a positive filling, in lex site order.

    Symbols are chosen site by site in lexicographic order of the ring sites
    (left column, then per-column bottom/top pairs, then right column), with
    reachability pruning after each choice, so the stream is both complete
    and deterministic.
    """
    _require_d2(model)
    N = n + mn
    H = 2 * N + 1
    q = len(model.alphabet)
    states, internal = column_states(model, H)
    hor_pos = horizontal_matrix(model, states) > 0
    edge = model.beta[0]
    vert = model.beta[1]
    s64 = states.astype(np.int64)
    syms = model.alphabet.symbols
    rows = range(-N, N + 1)

    def emit(left, pairs, right):
        picks = {}
        for y, s in zip(rows, left):
            picks[(-N - 1, y)] = syms[s]
        for x, (b, t) in zip(rows, pairs):
            picks[(x, -N - 1)] = syms[b]
            picks[(x, N + 1)] = syms[t]
        for y, s in zip(rows, right):
            picks[(N + 1, y)] = syms[s]
        return Configuration.from_dict(picks)

    def right_side(x_reach, right, r):
        if r == H:
            yield tuple(right)
            return
        for s in range(q):
            if right and vert[right[-1], s] <= 0:
                continue
            nxt = x_reach * edge[s64[:, r], s]
            if not nxt.any():
                continue
            right.append(s)
            yield from right_side(nxt, right, r + 1)
            right.pop()

    def columns(reach, pairs, x):
        if x == N + 1:
            for right in right_side(reach, [], 0):
                yield tuple(pairs), right
            return
        for b in range(q):
            if pairs and edge[pairs[-1][0], b] <= 0:
                continue
            for t in range(q):
                if pairs and edge[pairs[-1][1], t] <= 0:
                    continue
                colw = column_weight(model, states, internal, b, t)
                stepped = reach & (colw > 0)
                if x < N:
                    stepped = stepped @ hor_pos
                if not stepped.any():
                    continue
                pairs.append((b, t))
                yield from columns(stepped, pairs, x + 1)
                pairs.pop()

    def left_side(partial, left, r):
        if r == H:
            for pairs, right in columns(partial, [], -N):
                yield emit(tuple(left), pairs, right)
            return
        for s in range(q):
            if left and vert[left[-1], s] <= 0:
                continue
            nxt = partial & (edge[s, s64[:, r]] > 0)
            if not nxt.any():
                continue
            left.append(s)
            yield from left_side(nxt, left, r + 1)
            left.pop()

    yield from left_side(np.ones(len(states), dtype=bool), [], 0)


def exact_conditional_full_boundary(model: InteractionModel, n: int,
                                    w: Configuration):
    """Exact origin distribution given the full boundary of the future part.

    The conditioning set separates the origin from everything else, so the
    answer is a finite-volume computation on the future part of the radius
    n-1 box.  Returns symbol -> probability, or None when `w` admits no
    positive filling.
    """
    _require_d2(model)
    if n < 1:
        raise ShapeError("needs n >= 1")
    inner = lattice.special_sets(n - 1, 2).future
    expected = lattice.boundary(inner)
    if tuple(w.sites) != expected:
        raise ShapeError("w must cover exactly the boundary of the future part")
    if weight(model, w) == LOG_ZERO:
        return None
    logs = {}
    for sym in model.alphabet.symbols:
        lz = pinned_volume_logsum(model, inner, w, pins={(0,) * 2: sym})
        if lz > LOG_ZERO:
            logs[sym] = lz
    if not logs:
        return None
    peak = max(logs.values())
    lin = {s: np.exp(v - peak) for s, v in logs.items()}
    total = sum(lin.values())
    out = {s: 0.0 for s in model.alphabet.symbols}
    out.update({s: float(v / total) for s, v in lin.items()})
    return out


def pinned_volume_logsum(model: InteractionModel, sites, field: Configuration,
                         pins=None, cap: int = 250_000) -> float:
    """Log sum of weights over fillings of an arbitrary finite d=2 volume.

    Counts the activities of the volume sites, the edges inside the volume,
    and the edges from the volume to fixed sites of `field`; the field's own
    internal factors are excluded (they cancel in every conditional ratio).
    `pins` optionally forces symbols at volume sites.  Returns -inf when no
    filling has positive weight.
    """
    _require_d2(model)
    sites = lattice.site_set(sites)
    if not sites:
        raise ShapeError("volume must be non-empty")
    site_set = set(sites)
    fixed = {tuple(v): model.alphabet.index(s) for v, s in field.items()}
    if site_set & fixed.keys():
        raise ShapeError("volume and field overlap")
    pins = {tuple(v): model.alphabet.index(s) for v, s in (pins or {}).items()}
    q = len(model.alphabet)
    gamma = model.gamma
    edge, vert = model.beta[0], model.beta[1]
    by_col = {}
    for (x, y) in sites:
        by_col.setdefault(x, []).append(y)
    xs = sorted(by_col)
    acc = 0.0
    prev = None  # (rows, states array, vector)
    for x in xs:
        rows = sorted(by_col[x])
        if q ** len(rows) > cap:
            raise EnumerationCapError(
                f"column at x={x} has {q}^{len(rows)} states, over cap {cap}")
        st = np.array(list(product(range(q), repeat=len(rows))), dtype=np.int64)
        wcol = gamma[st].prod(axis=1)
        for i in range(len(rows) - 1):
            if rows[i + 1] == rows[i] + 1:
                wcol = wcol * vert[st[:, i], st[:, i + 1]]
        for i, y in enumerate(rows):
            here = (x, y)
            if here in pins:
                wcol = np.where(st[:, i] == pins[here], wcol, 0.0)
            for nb, table, flip in (((x, y - 1), vert, True), ((x, y + 1), vert, False),
                                    ((x - 1, y), edge, True), ((x + 1, y), edge, False)):
                if nb in fixed and nb not in site_set:
                    f = fixed[nb]
                    wcol = wcol * (table[f, st[:, i]] if flip else table[st[:, i], f])
        if prev is None:
            vec = wcol
        else:
            prows, pst, pvec = prev
            if x == prev_x + 1:
                shared = [(prows.index(y), rows.index(y)) for y in set(prows) & set(rows)]
                hk = np.ones((len(pst), len(st)))
                for pi, ci in shared:
                    hk *= edge[pst[:, pi][:, None], st[None, :, ci]]
                vec = (pvec @ hk) * wcol
            else:
                vec = pvec.sum() * wcol
        peak = vec.max()
        if peak <= 0.0:
            return LOG_ZERO
        vec = vec / peak
        acc += float(np.log(peak))
        prev = (rows, st, vec)
        prev_x = x
    total = float(prev[2].sum())
    if total <= 0.0:
        return LOG_ZERO
    return acc + float(np.log(total))
