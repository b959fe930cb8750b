"""Configuration-model graphs with one weight per edge direction.

Adjacency is kept in CSR form: the arcs leaving vertex ``u`` occupy
``offsets[u]:offsets[u+1]`` of ``neighbors``/``out_weight``/``in_weight``,
sorted by neighbour id.  ``out_weight[e]`` for arc u->v is W_(u,v) and
``in_weight[e]`` is W_(v,u).
"""

from __future__ import annotations

import csv
import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .degree_dist import DegreeDist, empirical, sample_degrees
from .errors import ParameterError
from .weights import DegreeDependent, sample_weights

__all__ = [
    "WeightedGraph",
    "generate",
    "from_edges",
    "empirical_degree_dist",
    "save_binary",
    "load_binary",
    "to_bytes",
    "from_bytes",
    "edge_csv",
]

_MAGIC = b"WEPIGRF1"
_ARC_DTYPE = np.dtype([("nbr", "<u4"), ("w", "<f8")])


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    n: int
    offsets: np.ndarray
    neighbors: np.ndarray
    out_weight: np.ndarray
    in_weight: np.ndarray
    half_edges: np.ndarray | None = None
    seed: int | None = None
    degree_spec: str = ""
    weight_spec: str = ""
    erased_loops: int = 0
    merged_edges: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def degree(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def n_edges(self) -> int:
        return self.neighbors.size // 2

    @property
    def sources(self) -> np.ndarray:
        """Source vertex of every arc, aligned with ``neighbors``."""
        if "src" not in self._cache:
            self._cache["src"] = np.repeat(np.arange(self.n, dtype=np.int64), self.degree)
        return self._cache["src"]

    def neighbors_of(self, u: int) -> np.ndarray:
        return self.neighbors[self.offsets[u] : self.offsets[u + 1]]

    def out_weights_of(self, u: int) -> np.ndarray:
        return self.out_weight[self.offsets[u] : self.offsets[u + 1]]

    def reverse_arc(self) -> np.ndarray:
        """Index of arc v->u for every arc u->v."""
        if "rev" not in self._cache:
            key = self.sources * self.n + self.neighbors
            self._cache["rev"] = np.searchsorted(key, self.neighbors * self.n + self.sources)
        return self._cache["rev"]

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, edges={self.n_edges}, seed={self.seed})"


def _build_csr(n, lo, hi, w_lohi, w_hilo):
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    wout = np.concatenate([w_lohi, w_hilo])
    win = np.concatenate([w_hilo, w_lohi])
    order = np.lexsort((dst, src))
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=offsets[1:])
    return offsets, dst[order].astype(np.int64), wout[order], win[order]


def generate(n: int, d: DegreeDist, w, seed: int | None = None) -> WeightedGraph:
    """Configuration-model graph on ``n`` vertices with degrees from ``d``.

    Half-edges are matched by a seeded shuffle.  An odd total gets one extra
    half-edge at a uniformly chosen vertex.  Self-loops are erased and
    parallel edges merged, keeping the weights of the earliest pairing.
    Degree-dependent weights use the half-edge count before erasure.
    """
    if n < 2:
        raise ParameterError(f"need at least two vertices, got n={n}")
    rng = np.random.default_rng(seed)
    stubs_per_vertex = sample_degrees(d, n, rng)
    if stubs_per_vertex.sum() % 2 == 1:
        stubs_per_vertex[rng.integers(n)] += 1
    stubs = np.repeat(np.arange(n, dtype=np.int64), stubs_per_vertex)
    rng.shuffle(stubs)
    a, b = stubs[0::2], stubs[1::2]
    loop = a == b
    a, b = a[~loop], b[~loop]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    _, first = np.unique(lo * n + hi, return_index=True)
    keep = np.sort(first)
    lo, hi = lo[keep], hi[keep]

    if isinstance(w, DegreeDependent):
        w_lohi = np.asarray(w.g(stubs_per_vertex[lo]), dtype=float)
        w_hilo = np.asarray(w.g(stubs_per_vertex[hi]), dtype=float)
    else:
        draws = sample_weights(w, rng, 2 * lo.size)
        w_lohi, w_hilo = draws[0::2], draws[1::2]

    offsets, nbr, wout, win = _build_csr(n, lo, hi, w_lohi, w_hilo)
    return WeightedGraph(
        n=n,
        offsets=offsets,
        neighbors=nbr,
        out_weight=wout,
        in_weight=win,
        half_edges=stubs_per_vertex,
        seed=seed,
        degree_spec=d.label,
        weight_spec=str(w),
        erased_loops=int(loop.sum()),
        merged_edges=int(a.size - keep.size),
    )


def from_edges(n: int, edges, weights=None, **meta) -> WeightedGraph:
    """Graph from explicit undirected edges ``(u, v)`` and optional ``(w_uv, w_vu)``."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if weights is None:
        weights = np.ones((edges.shape[0], 2))
    weights = np.asarray(weights, dtype=float).reshape(-1, 2)
    u, v = edges[:, 0], edges[:, 1]
    if np.any(u == v):
        raise ParameterError("self-loops are not allowed")
    swap = u > v
    lo, hi = np.where(swap, v, u), np.where(swap, u, v)
    w_lohi = np.where(swap, weights[:, 1], weights[:, 0])
    w_hilo = np.where(swap, weights[:, 0], weights[:, 1])
    if np.unique(lo * n + hi).size != lo.size:
        raise ParameterError("parallel edges are not allowed")
    offsets, nbr, wout, win = _build_csr(n, lo, hi, w_lohi, w_hilo)
    return WeightedGraph(n=n, offsets=offsets, neighbors=nbr, out_weight=wout, in_weight=win, **meta)


def empirical_degree_dist(g: WeightedGraph) -> DegreeDist:
    counts = np.bincount(g.degree, minlength=1)
    return empirical(((k, float(c)) for k, c in enumerate(counts) if c), label=f"empirical(n={g.n})")


def to_bytes(g: WeightedGraph) -> bytes:
    meta = json.dumps({"degree": g.degree_spec, "weight": g.weight_spec}, sort_keys=True).encode()
    seed = -1 if g.seed is None else int(g.seed)
    out = io.BytesIO()
    out.write(_MAGIC)
    out.write(struct.pack("<qqI", g.n, seed, len(meta)))
    out.write(meta)
    out.write(g.degree.astype("<u4").tobytes())
    arcs = np.empty(g.neighbors.size, dtype=_ARC_DTYPE)
    arcs["nbr"] = g.neighbors
    arcs["w"] = g.out_weight
    out.write(arcs.tobytes())
    return out.getvalue()


def from_bytes(blob: bytes) -> WeightedGraph:
    if blob[: len(_MAGIC)] != _MAGIC:
        raise ParameterError("not a weighted-graph file")
    pos = len(_MAGIC)
    n, seed, mlen = struct.unpack_from("<qqI", blob, pos)
    pos += struct.calcsize("<qqI")
    meta = json.loads(blob[pos : pos + mlen].decode())
    pos += mlen
    deg = np.frombuffer(blob, dtype="<u4", count=n, offset=pos).astype(np.int64)
    pos += 4 * n
    m = int(deg.sum())
    arcs = np.frombuffer(blob, dtype=_ARC_DTYPE, count=m, offset=pos)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=offsets[1:])
    g = WeightedGraph(
        n=int(n),
        offsets=offsets,
        neighbors=arcs["nbr"].astype(np.int64),
        out_weight=arcs["w"].astype(float),
        in_weight=np.empty(m),
        seed=None if seed < 0 else int(seed),
        degree_spec=meta["degree"],
        weight_spec=meta["weight"],
    )
    # in-weights by symmetry
    g.in_weight[:] = g.out_weight[g.reverse_arc()]
    return g


def save_binary(g: WeightedGraph, path: str | Path) -> None:
    Path(path).write_bytes(to_bytes(g))


def load_binary(path: str | Path) -> WeightedGraph:
    return from_bytes(Path(path).read_bytes())


def edge_csv(g: WeightedGraph) -> str:
    """Edge list ``u,v,w_uv,w_vu`` with u < v."""
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["u", "v", "w_uv", "w_vu"])
    src = g.sources
    sel = src < g.neighbors
    for u, v, wuv, wvu in zip(src[sel], g.neighbors[sel], g.out_weight[sel], g.in_weight[sel]):
        wr.writerow([int(u), int(v), repr(float(wuv)), repr(float(wvu))])
    return buf.getvalue()
