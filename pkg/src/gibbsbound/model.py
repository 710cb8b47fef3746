"""Interaction models, configurations and log-scale weights.

A model assigns every symbol a positive site activity and every directed
nearest-neighbour pair (per axis) a non-negative edge weight.  The weight of
a finite configuration is the product of its site activities and of the edge
weights over all lattice edges inside its shape; everything is handled in
log scale, with ``-inf`` playing the role of weight zero.
"""

import hashlib
import json
import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from . import lattice
from .errors import (
    DegenerateModelError,
    EnumerationCapError,
    ModelFormatError,
    NotAdmissibleError,
    OverlapError,
    ShapeError,
)

LOG_ZERO = float("-inf")

__all__ = [
    "LOG_ZERO",
    "Alphabet",
    "Configuration",
    "InteractionModel",
    "weight",
    "concat",
    "is_admissible",
    "spec_distribution",
]


class Alphabet:
    """An ordered finite alphabet of at least two symbols."""

    def __init__(self, symbols):
        syms = tuple(str(s) for s in symbols)
        if len(syms) < 2:
            raise ModelFormatError("alphabet needs at least two symbols")
        if len(set(syms)) != len(syms):
            raise ModelFormatError("alphabet symbols must be distinct")
        self.symbols = syms
        self._index = {s: i for i, s in enumerate(syms)}

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __eq__(self, other):
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def index(self, symbol) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise ModelFormatError(f"symbol {symbol!r} not in alphabet") from None

    def __repr__(self):
        return f"Alphabet({list(self.symbols)!r})"


@dataclass(frozen=True)
class Configuration:
    """A symbol assignment on a finite set of sites.

    ``sites`` is lex-sorted and ``symbols`` is aligned with it, so equal
    assignments compare and hash equal regardless of construction order.
    """

    sites: tuple
    symbols: tuple

    @staticmethod
    def from_dict(assignment) -> "Configuration":
        items = sorted((tuple(v), str(s)) for v, s in assignment.items())
        if len(set(v for v, _ in items)) != len(items):
            raise ShapeError("duplicate sites in configuration")
        return Configuration(tuple(v for v, _ in items), tuple(s for _, s in items))

    def __post_init__(self):
        if len(self.sites) != len(self.symbols):
            raise ShapeError("sites and symbols must have equal length")

    def __len__(self):
        return len(self.sites)

    def items(self):
        return zip(self.sites, self.symbols)

    def get(self, site):
        try:
            return self.symbols[self.sites.index(tuple(site))]
        except ValueError:
            raise KeyError(site) from None

    def restrict(self, sites) -> "Configuration":
        wanted = set(map(tuple, sites))
        pairs = [(v, s) for v, s in self.items() if v in wanted]
        if len(pairs) != len(wanted):
            raise ShapeError("restriction asks for sites outside the shape")
        return Configuration(tuple(v for v, _ in pairs), tuple(s for _, s in pairs))

    def as_dict(self):
        return dict(self.items())


def concat(first: Configuration, second: Configuration) -> Configuration:
    """Join two configurations with disjoint shapes."""
    overlap = set(first.sites) & set(second.sites)
    if overlap:
        raise OverlapError(f"shapes overlap on {sorted(overlap)[:4]}")
    merged = dict(first.items())
    merged.update(second.items())
    return Configuration.from_dict(merged)


class InteractionModel:
    """Site activities plus per-axis directed edge weights on Z^d.

    gamma[a] > 0 for every symbol; beta[i][a, b] >= 0 weights the directed
    edge (v, v + e_i) carrying symbols (a, b).  Every axis must allow at
    least one positive pair, otherwise no configuration spanning that axis
    could have positive weight.
    """

    def __init__(self, alphabet, gamma, beta, dim=None):
        self.alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        q = len(self.alphabet)
        if isinstance(gamma, dict):
            gamma = [gamma[s] for s in self.alphabet.symbols]
        g = np.asarray(gamma, dtype=float)
        if g.shape != (q,):
            raise ModelFormatError(f"gamma must assign all {q} symbols")
        if not np.all(g > 0) or not np.all(np.isfinite(g)):
            raise ModelFormatError("gamma entries must be positive and finite")
        b = np.asarray(beta, dtype=float)
        if b.ndim == 2:
            b = b[None, :, :]
        if dim is None:
            dim = b.shape[0]
        if b.shape != (dim, q, q):
            raise ModelFormatError(
                f"beta must be {dim} matrices of shape {q}x{q}, got {b.shape}")
        if not np.all(b >= 0) or not np.all(np.isfinite(b)):
            raise ModelFormatError("beta entries must be non-negative and finite")
        for i in range(dim):
            if not np.any(b[i] > 0):
                raise ModelFormatError(f"beta axis {i} has no positive pair")
        self.dim = int(dim)
        self.gamma = g
        self.beta = b
        # log-scale tables; log(0) = -inf is the intended bottom element
        with np.errstate(divide="ignore"):
            self.log_gamma = np.log(g)
            self.log_beta = np.log(b)

    def __repr__(self):
        return (f"InteractionModel(dim={self.dim}, q={len(self.alphabet)}, "
                f"alphabet={list(self.alphabet.symbols)!r})")

    def indices(self, config: Configuration) -> np.ndarray:
        return np.array([self.alphabet.index(s) for s in config.symbols], dtype=np.int64)

    # -- serialisation ----------------------------------------------------

    def to_payload(self) -> dict:
        return {
            "dimension": self.dim,
            "alphabet": list(self.alphabet.symbols),
            "gamma": {s: self.gamma[i] for i, s in enumerate(self.alphabet.symbols)},
            "beta": [m.tolist() for m in self.beta],
        }

    @staticmethod
    def from_payload(payload: dict) -> "InteractionModel":
        for key in ("dimension", "alphabet", "gamma", "beta"):
            if key not in payload:
                raise ModelFormatError(f"missing field {key!r}")
        dim = payload["dimension"]
        if not isinstance(dim, int) or dim < 1:
            raise ModelFormatError("field 'dimension' must be a positive integer")
        alphabet = Alphabet(payload["alphabet"])
        gamma_map = payload["gamma"]
        if not isinstance(gamma_map, dict):
            raise ModelFormatError("field 'gamma' must map symbols to positive numbers")
        missing = [s for s in alphabet.symbols if s not in gamma_map]
        if missing:
            raise ModelFormatError(f"field 'gamma' missing symbols {missing}")
        beta = payload["beta"]
        if not isinstance(beta, list) or len(beta) != dim:
            raise ModelFormatError("field 'beta' must list one matrix per axis")
        q = len(alphabet)
        mats = []
        for axis, entry in enumerate(beta):
            try:
                mat = np.asarray(entry, dtype=float)
            except (TypeError, ValueError) as exc:
                raise ModelFormatError(
                    f"beta axis {axis} is not a numeric matrix: {exc}") from exc
            if mat.shape != (q, q):
                raise ModelFormatError(
                    f"beta axis {axis} must be {q}x{q} (row = source symbol), "
                    f"got shape {mat.shape}")
            mats.append(mat)
        try:
            return InteractionModel(alphabet,
                                    [float(gamma_map[s]) for s in alphabet.symbols],
                                    mats, dim=dim)
        except (TypeError, ValueError) as exc:
            raise ModelFormatError(f"bad numeric entry in model file: {exc}") from exc

    @staticmethod
    def from_file(path) -> "InteractionModel":
        with open(path) as fh:
            try:
                payload = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ModelFormatError(
                    f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return InteractionModel.from_payload(payload)

    def digest(self) -> str:
        canon = json.dumps(self.to_payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def weight(model: InteractionModel, config: Configuration) -> float:
    """Log weight of a configuration: activities plus all in-shape edge terms."""
    idx = {v: model.alphabet.index(s) for v, s in config.items()}
    total = 0.0
    for v, a in idx.items():
        total += model.log_gamma[a]
    for axis in range(model.dim):
        for v, w in lattice.axis_edges(idx.keys(), axis):
            term = model.log_beta[axis, idx[v], idx[w]]
            if term == LOG_ZERO:
                return LOG_ZERO
            total += term
    return total


def _fillings(model, sites):
    """All symbol assignments on `sites`, lexicographic in symbol indices."""
    for combo in product(model.alphabet.symbols, repeat=len(sites)):
        yield Configuration(tuple(sites), combo)


def is_admissible(model: InteractionModel, sites, boundary_config: Configuration,
                  cap: int = 4_000_000) -> bool:
    """Whether some filling of `sites` has positive weight jointly with the boundary.

    The boundary configuration may sit on any shape disjoint from `sites`
    (typically the outer boundary).  Small site sets are checked by direct
    enumeration; d=2 requests beyond the cap use the column-sweep engine.
    """
    sites = lattice.site_set(sites)
    if set(sites) & set(boundary_config.sites):
        raise OverlapError("interior and boundary shapes overlap")
    if weight(model, boundary_config) == LOG_ZERO:
        return False
    q = len(model.alphabet)
    if q ** len(sites) > cap:
        if model.dim == 2:
            from .transfer import pinned_volume_logsum
            return pinned_volume_logsum(model, sites, boundary_config) > LOG_ZERO
        raise EnumerationCapError(
            f"admissibility check over {q}^{len(sites)} fillings exceeds cap")
    for fill in _fillings(model, sites):
        if weight(model, concat(fill, boundary_config)) > LOG_ZERO:
            return True
    return False


def spec_distribution(model: InteractionModel, sites, boundary_config: Configuration,
                      cap: int = 4_000_000):
    """Exact finite-volume conditional distribution given the full boundary.

    Reference implementation by direct enumeration.  Returns a dict mapping
    each positive-probability filling of `sites` to its probability.
    """
    sites = lattice.site_set(sites)
    expected = lattice.boundary(sites)
    if tuple(boundary_config.sites) != expected:
        raise ShapeError("boundary configuration must cover exactly the outer boundary")
    q = len(model.alphabet)
    if q ** len(sites) > cap:
        raise EnumerationCapError(
            f"distribution over {q}^{len(sites)} fillings exceeds cap")
    logs = []
    fills = []
    for fill in _fillings(model, sites):
        lw = weight(model, concat(fill, boundary_config))
        if lw > LOG_ZERO:
            logs.append(lw)
            fills.append(fill)
    if not fills:
        raise NotAdmissibleError("boundary admits no positive-weight filling")
    arr = np.array(logs)
    arr -= arr.max()
    probs = np.exp(arr)
    probs /= probs.sum()
    return {fill: float(p) for fill, p in zip(fills, probs)}
