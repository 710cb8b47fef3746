"""Certified extremes of window probabilities over all boundary rings.

For a window K inside the radius-n box, the conditional probability of a
pattern on K given a ring on the radius n+m box depends on the ring only
through three factors: the product of column maps left of the window span,
the product right of it, and the ring symbols alongside the span itself.
Left and right products are enumerated as sets of nonnegative vectors, one
per reachable boundary prefix, deduplicated projectively because every
probability below is a ratio of linear functionals.  The span is then
evaluated per tag chain and pin pattern against both vertex sets, and
running extremes over all combinations give certified lower and upper
bounds together with the rings that attain them.

When a vertex set outgrows its cap the engine merges vectors that are
within eps of each other in the Hilbert projective metric and charges the
merge radius to a slack term; final bounds are widened by exp(slack), so
they remain certified, only wider.  Exact mode (zero slack) also reports
lexicographically-first witness rings.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import lattice
from .errors import DegenerateModelError, EnumerationCapError, ShapeError
from .model import Configuration, InteractionModel
from .transfer import (
    column_states,
    column_weight,
    horizontal_matrix,
    side_chains,
    side_edge_matrix,
)

__all__ = ["BoundPair", "WindowTables", "window_tables",
           "marginal_bounds", "conditional_bounds"]

EPS_FP = 1e-12          # final multiplicative widening for rounding
EPS_SEED = 0.02         # first merge radius when a cap forces relaxation
EPS_MAX = 32.0          # beyond this, merging certifies nothing; refuse
VERTEX_CAP = 24_000     # vertices kept per side before eps escalation
CAND_CAP = 60_000       # candidate rows materialized per column step
PRE_NET_FLOOR = 4_096   # never net before expansion below this many rows
SLACK_CAP = 14.0        # accumulated slack beyond e^14 is vacuous; refuse
NEG = -1.0e300          # stand-in for log 0 in Hilbert distances


@dataclass(frozen=True)
class BoundPair:
    """Certified interval for one nonnegative quantity, usually a probability.

    Entropy brackets reuse the type, so only 0 <= lo <= hi is enforced;
    probability-specific clamping to [0, 1] happens where bounds are made.
    """

    lo: float
    hi: float
    witness_lo: Configuration | None = None
    witness_hi: Configuration | None = None

    def __post_init__(self):
        if not (0.0 <= self.lo <= self.hi):
            raise ShapeError(f"invalid bound pair [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


@dataclass
class WindowTables:
    """Joint result of one extremization pass over a window."""

    marginals: dict
    conditionals: dict
    slack: float
    mode: str
    forward_count: int
    backward_count: int
    chain_count: int
    wall_time: float
    eps_used: float = 0.0
    merge_charges: tuple = ()


def _safe_log(V: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        L = np.log(V)
    L[np.isneginf(L)] = NEG
    return L


def _dedup_exact(V: np.ndarray):
    """Indices of the first row of every exact duplicate group, in order."""
    seen = set()
    keep = []
    for i in range(len(V)):
        key = V[i].tobytes()
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return keep


def _net_rows(V: np.ndarray, eps: float):
    """Greedy eps-net in the Hilbert projective metric, first row wins.

    Returns kept indices (scan order) and the worst merge distance, which
    is what a certified bound must absorb.
    """
    L = _safe_log(V)
    nk = 0
    buf = np.empty_like(L)
    keep = []
    charge = 0.0
    for i in range(len(L)):
        if nk:
            d = np.ptp(buf[:nk] - L[i][None, :], axis=1)
            dmin = float(d.min())
            if dmin <= eps:
                charge = max(charge, dmin)
                continue
        buf[nk] = L[i]
        nk += 1
        keep.append(i)
    return keep, charge


def _pair_tables(model: InteractionModel, states, internal):
    """Per (bottom, top) ring pair: normalized column weights and a chain mask.

    allowed[p, p2] says ring pair p may sit immediately left of p2; the
    extra sentinel row stands for "no column absorbed yet" and allows all.
    """
    q = len(model.alphabet)
    colw = np.zeros((q * q, len(states)))
    alive = np.zeros(q * q, dtype=bool)
    for b in range(q):
        for t in range(q):
            w = column_weight(model, states, internal, b, t)
            peak = w.max()
            if peak > 0:
                colw[b * q + t] = w / peak
                alive[b * q + t] = True
    edge = model.beta[0]
    allowed = np.zeros((q * q + 1, q * q), dtype=bool)
    for b, t in product(range(q), range(q)):
        for b2, t2 in product(range(q), range(q)):
            allowed[b * q + t, b2 * q + t2] = edge[b, b2] > 0 and edge[t, t2] > 0
    allowed[q * q, :] = True
    allowed &= alive[None, :]
    return colw, alive, allowed


@dataclass
class _Sweep:
    vectors: np.ndarray
    tags: np.ndarray
    steps: list              # provenance: (parents, choices) per column
    init_choice: np.ndarray  # side chain index per initial vertex
    charges: list
    eps_used: float


def _run_sweep(init_rows, sentinel, columns_to_absorb, colw, allowed, mat,
               forward, exact_requested, vertex_cap, cand_cap):
    """Absorb ring columns one at a time, one vector per projective class.

    Candidates are generated in lexicographic prefix order (parent-major for
    the left sweep, pair-major for the right sweep), so first-wins
    deduplication leaves the lexicographically smallest witness for each
    surviving class.  Returns None when nothing stays reachable.
    """
    peaks = init_rows.max(axis=1)
    live = np.nonzero(peaks > 0)[0]
    V = init_rows[live] / peaks[live][:, None]
    init_choice = live.astype(np.int64)
    keep = _dedup_exact(V)
    V, init_choice = V[keep], init_choice[keep]
    tags = np.full(len(V), sentinel, dtype=np.int64)
    steps = []
    charges = []
    eps = 0.0
    npairs = colw.shape[0]

    def shrink(keep_idx):
        nonlocal V, tags, init_choice
        V, tags = V[keep_idx], tags[keep_idx]
        if steps:
            p, c = steps[-1]
            steps[-1] = (p[keep_idx], c[keep_idx])
        else:
            init_choice = init_choice[keep_idx]

    def escalate(why):
        nonlocal eps
        if exact_requested:
            raise EnumerationCapError(why)
        eps = EPS_SEED if eps == 0.0 else eps * 2
        if eps > EPS_MAX:
            # rows left to merge sit in different projective support
            # classes; merging those certifies nothing, so refuse
            raise EnumerationCapError(
                f"merge radius blew past {EPS_MAX} while enforcing caps; "
                "raise vertex_cap or shrink the window")

    for _ in columns_to_absorb:
        col_charge = 0.0
        # initial rows may have genuinely disjoint supports (side chains
        # constrain differently); deferring the net one absorb step lets
        # supports unify, so only net early under real memory pressure
        while len(V) * npairs > max(cand_cap, PRE_NET_FLOOR):
            escalate(f"exact sweep would build {len(V) * npairs} "
                     f"candidates, cap is {cand_cap}")
            keep, ch = _net_rows(V, eps)
            col_charge += ch
            shrink(np.asarray(keep))
        blocks, parents, choices = [], [], []
        for p in range(npairs):
            sel = np.nonzero(allowed[tags, p])[0]
            if len(sel) == 0:
                continue
            W = V[sel] * colw[p][None, :]
            row_alive = W.max(axis=1) > 0
            sel, W = sel[row_alive], W[row_alive]
            if len(sel) == 0:
                continue
            G = W @ mat
            gpeak = G.max(axis=1)
            g_alive = gpeak > 0
            sel, G, gpeak = sel[g_alive], G[g_alive], gpeak[g_alive]
            if len(sel) == 0:
                continue
            blocks.append(G / gpeak[:, None])
            parents.append(sel)
            choices.append(np.full(len(sel), p, dtype=np.int64))
        if not blocks:
            return None
        cand = np.concatenate(blocks, axis=0)
        par = np.concatenate(parents)
        cho = np.concatenate(choices)
        if forward:
            order = np.lexsort((cho, par))
            cand, par, cho = cand[order], par[order], cho[order]
        keep = _dedup_exact(cand)
        V, par, cho = cand[keep], par[keep], cho[keep]
        while len(V) > vertex_cap:
            escalate(f"exact sweep needs {len(V)} vertices, "
                     f"cap is {vertex_cap}")
            keep, ch = _net_rows(V, eps)
            col_charge += ch
            V, par, cho = V[keep], par[keep], cho[keep]
        tags = cho.copy()
        steps.append((par, cho))
        charges.append(col_charge)
    return _Sweep(V, tags, steps, init_choice, charges, eps)


def _trace_back(sweep: _Sweep, idx: int):
    """Recover (side chain index, pair codes in absorb order) for one vertex."""
    pairs = []
    for par, cho in reversed(sweep.steps):
        pairs.append(int(cho[idx]))
        idx = int(par[idx])
    return int(sweep.init_choice[idx]), pairs[::-1]


class _Extremes:
    """Running min/max with lexicographic tie-breaking on the attaining ring."""

    __slots__ = ("lo", "hi", "lo_key", "hi_key")

    def __init__(self):
        self.lo = None
        self.hi = None
        self.lo_key = None
        self.hi_key = None

    def offer_lo(self, val, key):
        if self.lo is None or val < self.lo or (val == self.lo and key < self.lo_key):
            self.lo, self.lo_key = val, key

    def offer_hi(self, val, key):
        if self.hi is None or val > self.hi or (val == self.hi and key < self.hi_key):
            self.hi, self.hi_key = val, key


def _extreme_of(block, mask, fidx, crank, bidx, ext: _Extremes):
    """Feed the masked entries of one [F-chunk x B] ratio block into `ext`."""
    if not mask.any():
        return
    nb = block.shape[1]
    lo_f = int(np.argmin(np.where(mask, block, np.inf)))
    hi_f = int(np.argmax(np.where(mask, block, -np.inf)))
    ext.offer_lo(float(block.flat[lo_f]),
                 (int(fidx[lo_f // nb]), crank, int(bidx[lo_f % nb])))
    ext.offer_hi(float(block.flat[hi_f]),
                 (int(fidx[hi_f // nb]), crank, int(bidx[hi_f % nb])))


def _merge(table: dict, key, found: _Extremes):
    """Fold one chunk-local extreme record into the shared table."""
    ext = table.get(key)
    if ext is None:
        table[key] = found
        return
    if found.lo is not None:
        ext.offer_lo(found.lo, found.lo_key)
    if found.hi is not None:
        ext.offer_hi(found.hi, found.hi_key)


def window_tables(model: InteractionModel, n: int, mn: int, K, *,
                  include_conditionals: bool = True, exact: bool | None = None,
                  vertex_cap: int = VERTEX_CAP, cand_cap: int = CAND_CAP,
                  threads: int = 1, f_chunk: int = 512,
                  mem_budget: int = 1_200_000_000,
                  eps_fp: float = EPS_FP) -> WindowTables:
    """Extremize pattern probabilities on K over every admissible ring.

    Returns marginal bounds for every pattern on K and, when requested,
    conditional bounds for the origin symbol given each pattern.  `exact`
    True forbids merging (caps raise instead), None merges only when caps
    force it; merging trades witness exactness for bounded work.
    """
    t0 = time.monotonic()
    if model.dim != 2:
        raise ShapeError("window extremization is implemented for d=2 only")
    K = lattice.site_set(K)
    origin = (0, 0)
    if include_conditionals and origin in K:
        raise ShapeError("window must not contain the origin")
    if not set(K) <= set(lattice.centered_box(n, 2)):
        raise ShapeError("window must sit inside the inner box")
    N = n + mn
    H = 2 * N + 1
    q = len(model.alphabet)
    states, internal = column_states(model, H)
    ns = len(states)
    hor = horizontal_matrix(model, states)
    hpeak = hor.max()
    if hpeak <= 0:
        raise DegenerateModelError("no positive edge between any column states")
    hor = hor / hpeak
    colw, alive_pairs, allowed = _pair_tables(model, states, internal)
    q2 = q * q
    sentinel = q2

    rows_of = {}
    for (x, y) in K:
        rows_of.setdefault(x, []).append(y + N)
    span_cols = sorted(set(rows_of) | ({0} if include_conditionals else set()))
    c_lo, c_hi = span_cols[0], span_cols[-1]
    span_cols = list(range(c_lo, c_hi + 1))

    chains = side_chains(model, H)
    X = side_edge_matrix(model, chains, states, incoming=True)
    Y = side_edge_matrix(model, chains, states, incoming=False)
    exact_req = bool(exact)

    # right-to-left compat: rev[t, p] answers "may p sit left of tag t"
    allowed_rev = np.vstack([allowed[:q2].T, allowed[sentinel][None, :]])

    fwd = _run_sweep(X, sentinel, range(-N, c_lo), colw, allowed, hor,
                     True, exact_req, vertex_cap, cand_cap)
    bwd = _run_sweep(Y, sentinel, range(N, c_hi, -1), colw, allowed_rev, hor.T,
                     False, exact_req, vertex_cap, cand_cap)
    if fwd is None or bwd is None:
        raise DegenerateModelError("no boundary ring admits a positive filling")

    slack = float(sum(fwd.charges) + sum(bwd.charges))
    if slack > SLACK_CAP:
        # exp(slack) would stretch every interval past [0, 1]; the caps
        # were too tight for this window and the result certifies nothing
        raise EnumerationCapError(
            f"accumulated merge slack {slack:.3g} exceeds {SLACK_CAP}; "
            "raise vertex_cap or shrink the window")
    mode = "exact" if slack == 0.0 else "relaxed"

    f_tags_ok = np.zeros((q2, len(fwd.vectors)), dtype=bool)
    b_tags_ok = np.zeros((q2, len(bwd.vectors)), dtype=bool)
    for p in range(q2):
        f_tags_ok[p] = allowed[fwd.tags, p]
        b_tags_ok[p] = allowed_rev[bwd.tags, p]

    tag_chains = []

    def chain_rec(prefix):
        if prefix and not f_tags_ok[prefix[0]].any():
            return
        if len(prefix) == len(span_cols):
            if b_tags_ok[prefix[-1]].any():
                tag_chains.append(tuple(prefix))
            return
        for p in range(q2):
            if not alive_pairs[p]:
                continue
            if prefix and not allowed[prefix[-1], p]:
                continue
            chain_rec(prefix + [p])

    chain_rec([])
    if not tag_chains:
        raise DegenerateModelError("no boundary ring admits a positive filling")

    pins_at = {c: sorted(rows_of.get(c, [])) for c in span_cols}
    origin_row = N
    syms = model.alphabet.symbols
    marg_ext = {}
    cond_ext = {}
    any_ring = False

    def pin_vector(pcode, rows, combo):
        d = colw[pcode]
        ok = np.ones(ns, dtype=bool)
        for row, sym in zip(rows, combo):
            ok &= states[:, row] == sym
        return np.where(ok, d, 0.0)

    def scan_chain(crank, chain):
        nonlocal any_ring
        fm = np.nonzero(f_tags_ok[chain[0]])[0]
        bm = np.nonzero(b_tags_ok[chain[-1]])[0]
        if len(fm) == 0 or len(bm) == 0:
            return
        B_sel = bwd.vectors[bm]
        nb = len(bm)

        # unpinned product along the span, for the denominators; it must stay
        # on the same scale as the pinned leaf products below
        Mden = None
        for ci, p in enumerate(chain):
            step = colw[p][:, None] * hor if ci + 1 < len(chain) else np.diag(colw[p])
            Mden = step if Mden is None else Mden @ step
        if Mden.max() <= 0:
            return

        # every leaf reduces to scalar extremes before the next one runs, so
        # the chunk size only has to cover the DFS stack and one leaf block,
        # not a table of all reachable patterns
        leaf_rows = q if include_conditionals else 1
        row_bytes = (ns * len(span_cols) * leaf_rows + nb * (leaf_rows + 1)) * 8
        chunk = max(8, min(f_chunk, mem_budget // max(1, row_bytes)))
        spans = [(i, min(i + chunk, len(fm))) for i in range(0, len(fm), chunk)]

        def run_chunk(bounds_):
            lo_i, hi_i = bounds_
            fsel = fm[lo_i:hi_i]
            rows_here = hi_i - lo_i
            Fc = fwd.vectors[fsel]
            den = (Fc @ Mden) @ B_sel.T
            pos = den > 0
            local_marg = {}
            local_cond = {}

            def fold_leaf(picks, alive, val):
                w_key = tuple(sorted(picks.items()))
                if include_conditionals:
                    blocks = val.reshape(len(alive), rows_here, nb)
                    wsum = blocks[0]
                    for extra in blocks[1:]:
                        wsum = wsum + extra
                else:
                    wsum = val
                marg = np.where(pos, wsum / np.where(pos, den, 1.0), np.inf)
                ext = local_marg.get(w_key)
                if ext is None:
                    ext = local_marg[w_key] = _Extremes()
                _extreme_of(np.where(pos, marg, np.inf), pos, fsel, crank, bm, ext)
                if include_conditionals:
                    wpos = wsum > 0
                    if not wpos.any():
                        return
                    for i, x0 in enumerate(alive):
                        cr = np.where(wpos, blocks[i] / np.where(wpos, wsum, 1.0), 0.0)
                        cext = local_cond.get((w_key, x0))
                        if cext is None:
                            cext = local_cond[(w_key, x0)] = _Extremes()
                        _extreme_of(cr, wpos, fsel, crank, bm, cext)

            def walk(ci, FP, picks, alive):
                c = span_cols[ci]
                pcode = chain[ci]
                rows = pins_at[c]
                last = ci + 1 == len(span_cols)
                for combo in product(range(q), repeat=len(rows)):
                    if include_conditionals and c == 0:
                        # stack the origin symbols as row blocks; the deeper
                        # columns are then walked once and each leaf arrives
                        # with its full conditional split attached
                        ds = [(x0, pin_vector(pcode, rows + [origin_row],
                                              combo + (x0,)))
                              for x0 in range(q)]
                        ds = [(x0, d) for x0, d in ds if d.any()]
                        if not ds:
                            continue
                        here = [x0 for x0, _ in ds]
                        FPd = np.vstack([FP * d[None, :] for _, d in ds])
                    else:
                        d = pin_vector(pcode, rows, combo)
                        if not d.any():
                            continue
                        here = alive
                        FPd = FP * d[None, :]
                    new_picks = picks if not rows else picks + [
                        (c, row - N, sym) for row, sym in zip(rows, combo)]
                    if last:
                        fold_leaf({(cc, rr): ss for cc, rr, ss in new_picks},
                                  here, FPd @ B_sel.T)
                    else:
                        walk(ci + 1, FPd @ hor, new_picks, here)

            walk(0, Fc, [], None)
            return pos.any(), local_marg, local_cond

        # chunk outputs are dicts of scalar extremes, so holding all of them
        # costs nothing; the merge is order-independent because offers break
        # ties lexicographically on the attaining ring
        if threads > 1 and len(spans) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                outs = list(pool.map(run_chunk, spans))
        else:
            outs = [run_chunk(sp) for sp in spans]
        for seen, local_marg, local_cond in outs:
            if seen:
                any_ring = True
            for w_key, found in local_marg.items():
                _merge(marg_ext, w_key, found)
            for cond_key, found in local_cond.items():
                _merge(cond_ext, cond_key, found)

    for crank, chain in enumerate(tag_chains):
        scan_chain(crank, chain)
    if not any_ring:
        raise DegenerateModelError("no boundary ring admits a positive filling")

    def ring_config(key):
        if key is None or mode != "exact":
            return None
        fidx, crank, bidx = key
        chain = tag_chains[crank]
        lchain, lpairs = _trace_back(fwd, fidx)
        rchain, rpairs = _trace_back(bwd, bidx)
        pairs = lpairs + list(chain) + rpairs[::-1]
        picks = {}
        for y, s in zip(range(-N, N + 1), chains[lchain]):
            picks[(-N - 1, y)] = syms[s]
        for y, s in zip(range(-N, N + 1), chains[rchain]):
            picks[(N + 1, y)] = syms[s]
        for x, p in zip(range(-N, N + 1), pairs):
            picks[(x, -N - 1)] = syms[p // q]
            picks[(x, N + 1)] = syms[p % q]
        return Configuration.from_dict(picks)

    def widen(lo, hi):
        if hi <= 0.0:
            return 0.0, 0.0
        lo = max(0.0, lo * (1.0 - eps_fp) * float(np.exp(-slack)))
        hi = min(1.0, hi * (1.0 + eps_fp) * float(np.exp(slack)))
        return lo, hi

    def w_config(w_key):
        return Configuration.from_dict(
            {(c, r): syms[s] for (c, r), s in w_key})

    marginals = {}
    seen = set()
    for w_key, ext in sorted(marg_ext.items()):
        if ext.lo is None:
            continue
        lo, hi = widen(ext.lo, ext.hi)
        marginals[w_config(w_key)] = BoundPair(
            lo, hi, ring_config(ext.lo_key), ring_config(ext.hi_key))
        seen.add(w_key)
    for combo in product(range(q), repeat=len(K)):
        w_key = tuple(sorted(((x, y), s) for (x, y), s in zip(K, combo)))
        if w_key not in seen:
            marginals[w_config(w_key)] = BoundPair(0.0, 0.0)

    conditionals = {}
    for (w_key, x0), ext in sorted(cond_ext.items()):
        if ext.lo is None:
            continue
        lo, hi = widen(ext.lo, ext.hi)
        conditionals[(syms[x0], w_config(w_key))] = BoundPair(
            lo, hi, ring_config(ext.lo_key), ring_config(ext.hi_key))

    return WindowTables(
        marginals=marginals,
        conditionals=conditionals,
        slack=slack,
        mode=mode,
        forward_count=len(fwd.vectors),
        backward_count=len(bwd.vectors),
        chain_count=len(tag_chains),
        wall_time=time.monotonic() - t0,
        eps_used=max(fwd.eps_used, bwd.eps_used),
        merge_charges=tuple(fwd.charges) + tuple(bwd.charges),
    )


def marginal_bounds(model: InteractionModel, n: int, mn: int, K,
                    **kw) -> dict:
    """Certified [min, max] over admissible rings of each pattern probability."""
    return window_tables(model, n, mn, K,
                         include_conditionals=False, **kw).marginals


def conditional_bounds(model: InteractionModel, n: int, mn: int, K,
                       **kw) -> dict:
    """Certified bounds on origin-symbol probabilities given window patterns.

    Keys are (symbol, pattern); patterns no admissible ring can produce are
    omitted rather than reported as errors.
    """
    return window_tables(model, n, mn, K,
                         include_conditionals=True, **kw).conditionals
