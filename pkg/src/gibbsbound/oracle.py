"""Brute-force reference implementations, independent of the fast path.

Everything here enumerates configurations outright and shares only the
model type with the transfer-matrix machinery, so agreement between the
two is evidence rather than tautology.  Guarded caps refuse inputs too
large to enumerate instead of approximating silently.

The strip-entropy estimate is the one exception to "enumerate outright":
it diagonalizes the column chain of a width-W strip, which is still
independent of the windowed sweeps used by the certified path.
"""

from __future__ import annotations

import math
from itertools import product

import numpy as np

from .errors import EnumerationCapError
from .lattice import site_set
from .model import Configuration, InteractionModel

__all__ = ["oracle_partition", "oracle_conditional_entropy",
           "oracle_admissible_rings", "oracle_strip_entropy"]

SITE_CAP = 18          # free sites enumerated at most (q^18 knocks politely)
STRIP_STATE_CAP = 4096  # dense column-chain size for the strip estimate


def _axis_of(a, b):
    for k in range(len(a)):
        if a[k] != b[k]:
            return k, b[k] - a[k]
    raise ValueError("identical sites")


def _log_weights(model, free, fixed):
    """Log-weight of every filling of `free`, with `fixed` as environment.

    Counts activities of free and fixed sites, and every edge with at least
    one endpoint in the union, exactly once.  Returns (fillings, logw) with
    fillings an integer array [q^k, k].
    """
    q = len(model.alphabet)
    k = len(free)
    if k > SITE_CAP:
        raise EnumerationCapError(f"{k} free sites exceed the oracle cap")
    lg = model.log_gamma
    lb = model.log_beta
    pos = {v: i for i, v in enumerate(free)}
    fills = np.indices((q,) * k).reshape(k, -1).T if k else np.zeros((1, 0), int)
    logw = np.zeros(len(fills))
    const = 0.0
    for v, s in fixed.items():
        const += lg[s]
    for i, v in enumerate(free):
        logw = logw + lg[fills[:, i]]
    seen = set()
    union = list(free) + list(fixed)
    for v in union:
        for axis in range(model.dim):
            for sign in (-1, 1):
                u = tuple(v[c] + (sign if c == axis else 0)
                          for c in range(model.dim))
                if u not in pos and u not in fixed:
                    continue
                edge = (v, u) if v < u else (u, v)
                if edge in seen:
                    continue
                seen.add(edge)
                a, b = edge
                ax, _ = _axis_of(a, b)
                if a in pos and b in pos:
                    logw = logw + lb[ax][fills[:, pos[a]], fills[:, pos[b]]]
                elif a in pos:
                    logw = logw + lb[ax][fills[:, pos[a]], fixed[b]]
                elif b in pos:
                    logw = logw + lb[ax][fixed[a], fills[:, pos[b]]]
                else:
                    const += lb[ax][fixed[a], fixed[b]]
    return fills, logw + const


def _fixed_map(model, *configs):
    out = {}
    for cfg in configs:
        if cfg is None:
            continue
        for v, s in cfg.items():
            out[tuple(v)] = model.alphabet.index(s)
    return out


def _logsumexp(values):
    top = np.max(values)
    if top == -math.inf:
        return -math.inf
    return float(top + np.log(np.exp(values - top).sum()))


def oracle_partition(model: InteractionModel, V, pinned=None, delta=None,
                     ) -> float:
    """Log of the summed weight over all fillings of V, enumerated directly.

    ``pinned`` fixes sites inside V, ``delta`` is the surrounding boundary;
    factors internal to pinned and delta are included, matching the fast
    path's convention.  Returns -inf when nothing fills positively.
    """
    V = site_set(V)
    fixed = _fixed_map(model, pinned, delta)
    free = tuple(v for v in V if v not in fixed)
    _, logw = _log_weights(model, free, fixed)
    return _logsumexp(logw)


def oracle_conditional_entropy(model: InteractionModel, V, K, delta,
                               ) -> float:
    """Exact entropy of the origin given the pattern on K, under delta.

    Enumerates every filling of V, groups probability mass by the joint
    (pattern on K, origin symbol), and evaluates the conditional entropy
    of the origin directly.
    """
    V = site_set(V)
    K = site_set(K)
    d = model.dim
    origin = (0,) * d
    if origin in K or origin not in V or not set(K) <= set(V):
        raise ValueError("need origin in V, K in V, origin not in K")
    fixed = _fixed_map(model, delta)
    free = tuple(v for v in V if v not in fixed)
    fills, logw = _log_weights(model, free, fixed)
    pos = {v: i for i, v in enumerate(free)}
    q = len(model.alphabet)

    w_code = np.zeros(len(fills), dtype=np.int64)
    for v in K:
        if v in pos:
            w_code = w_code * q + fills[:, pos[v]]
        else:
            w_code = w_code * q + fixed[v]
    x_code = fills[:, pos[origin]]

    top = logw.max()
    if top == -math.inf:
        raise ValueError("boundary admits no filling")
    mass = np.exp(logw - top)
    mass /= mass.sum()
    joint = {}
    for wc, xc, p in zip(w_code, x_code, mass):
        if p > 0.0:
            key = int(wc)
            row = joint.setdefault(key, np.zeros(q))
            row[xc] += p
    h = 0.0
    for row in joint.values():
        pw = row.sum()
        for pxw in row / pw:
            if pxw > 0.0:
                h -= pw * pxw * math.log(pxw)
    return h


def oracle_admissible_rings(model: InteractionModel, V, ring_sites):
    """Yield every assignment to ring_sites admitting a positive filling of V.

    Lexicographic in (site order, symbol order); quadratic-ish and happily
    so, this is test plumbing.
    """
    ring_sites = site_set(ring_sites)
    syms = model.alphabet.symbols
    q = len(syms)
    for combo in product(range(q), repeat=len(ring_sites)):
        cfg = Configuration(ring_sites, tuple(syms[s] for s in combo))
        if oracle_partition(model, V, None, cfg) > -math.inf:
            yield cfg


def _strip_entropy_at(model, width):
    """Per-site entropy added when a width-(W) strip grows from width W-1.

    The column sequence of a nearest-neighbour strip is a stationary Markov
    chain; its per-column entropy rate is log(lambda) minus the mean log
    kernel entry under the stationary pair law, both obtained from the
    dominant eigenpair.  Differencing consecutive widths isolates one row.
    """
    return _column_chain_entropy(model, width) - \
        _column_chain_entropy(model, width - 1)


def _column_chain_entropy(model, width):
    q = len(model.alphabet)
    if q ** width > STRIP_STATE_CAP:
        raise EnumerationCapError(
            f"width {width} needs {q ** width} column states")
    cols = np.indices((q,) * width).reshape(width, -1).T
    g = model.gamma
    b0, b1 = model.beta[0], model.beta[1]
    cw = np.ones(len(cols))
    for r in range(width):
        cw *= g[cols[:, r]]
        if r + 1 < width:
            cw *= b1[cols[:, r], cols[:, r + 1]]
    hor = np.ones((len(cols), len(cols)))
    for r in range(width):
        hor *= b0[np.ix_(cols[:, r], cols[:, r])]
    M = hor * cw[None, :]

    # dominant eigenpair by power iteration; the kernel is nonnegative and
    # the chain may be reducible, in which case any dominant fixed vector
    # still yields a stationary pair law supported on recurrent states
    def dominant(A):
        v = np.ones(A.shape[0]) / A.shape[0]
        lam = 1.0
        for _ in range(20000):
            w = A @ v
            lam_new = w.max()
            if lam_new <= 0.0:
                raise EnumerationCapError("strip chain has no positive cycle")
            w /= lam_new
            if np.abs(w - v).max() < 1e-14 and abs(lam_new - lam) < 1e-14:
                return lam_new, w
            v, lam = w, lam_new
        return lam, v

    lam, rvec = dominant(M)
    _, lvec = dominant(M.T)
    joint = (lvec[:, None] * M * rvec[None, :])
    joint /= joint.sum()
    with np.errstate(divide="ignore"):
        logM = np.where(M > 0.0, np.log(np.maximum(M, 1e-300)), 0.0)
    return math.log(lam) - float((joint * logM).sum())


def oracle_strip_entropy(model: InteractionModel, width=None) -> float:
    """Entropy-rate estimate from strips of increasing width.

    With ``width`` given, returns the single consecutive-width difference
    at that width.  Otherwise climbs to the widest strip the dense cap
    allows and accelerates the last three differences (falling back to the
    widest difference when the acceleration is ill-conditioned).
    """
    if width is not None:
        return _strip_entropy_at(model, width)
    q = len(model.alphabet)
    w_max = 2
    while q ** (w_max + 1) <= STRIP_STATE_CAP:
        w_max += 1
    estimates = [_strip_entropy_at(model, w)
                 for w in range(max(2, w_max - 2), w_max + 1)]
    if len(estimates) >= 3:
        e0, e1, e2 = estimates[-3:]
        denom = (e2 - e1) - (e1 - e0)
        if abs(denom) > 1e-13:
            accel = e2 - (e2 - e1) ** 2 / denom
            if min(e0, e1, e2) - 0.1 <= accel <= max(e0, e1, e2) + 0.1:
                return accel
    return estimates[-1]
