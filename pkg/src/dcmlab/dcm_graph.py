"""The pairing model: uniform stub matching and compact digraph storage.

Adjacency is stored in compressed sparse rows for both directions; the
reverse adjacency is built eagerly because in-component exploration needs
it as often as the forward one.  Graphs are immutable after construction.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .degree_sequences import BiDegreeSequence
from .errors import NodeOutOfRange
from .rng import substream

_DCMG_MAGIC = b"DCMG"
_DCMG_VERSION = 1


@dataclass(frozen=True)
class Digraph:
    n: int
    out_offsets: np.ndarray  # length n+1
    out_targets: np.ndarray  # length m
    in_offsets: np.ndarray
    in_sources: np.ndarray
    is_multigraph: bool = True

    def __post_init__(self):
        for name in ("out_offsets", "out_targets", "in_offsets", "in_sources"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.int64)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.out_targets.size

    @cached_property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.out_offsets)

    @cached_property
    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_offsets)

    def out_neighbors(self, v: int) -> np.ndarray:
        if not 0 <= v < self.n:
            raise NodeOutOfRange(f"node {v} not in 0..{self.n - 1}")
        return self.out_targets[self.out_offsets[v]:self.out_offsets[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        if not 0 <= v < self.n:
            raise NodeOutOfRange(f"node {v} not in 0..{self.n - 1}")
        return self.in_sources[self.in_offsets[v]:self.in_offsets[v + 1]]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """(src, dst) arrays in forward CSR order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), self.out_degrees)
        return src, self.out_targets.copy()


@dataclass(frozen=True)
class GraphStats:
    self_loops: int
    multi_edge_excess: int  # edges minus distinct ordered pairs
    max_in_degree: int
    max_out_degree: int


def _csr_from_edges(n: int, src: np.ndarray, dst: np.ndarray,
                    is_multigraph: bool) -> Digraph:
    out_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=out_offsets[1:])
    order = np.argsort(src, kind="stable")
    out_targets = dst[order]
    in_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(dst, minlength=n), out=in_offsets[1:])
    order = np.argsort(dst, kind="stable")
    in_sources = src[order]
    return Digraph(n, out_offsets, out_targets, in_offsets, in_sources,
                   is_multigraph=is_multigraph)


def pair_stubs(seq: BiDegreeSequence, seed: int) -> Digraph:
    """Uniform random matching of out-stubs to in-stubs.

    The in-stub ownership array is permuted uniformly (Fisher-Yates) and
    matched positionally against the out-stubs, so every one of the L_n!
    matchings is equally likely.  Degrees are preserved exactly.
    """
    rng = substream(seed, "pair-stubs")
    n = seq.n
    src = np.repeat(np.arange(n, dtype=np.int64), seq.d_plus)
    in_owner = np.repeat(np.arange(n, dtype=np.int64), seq.d_minus)
    dst = in_owner[rng.permutation(seq.L_n)]
    out_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(seq.d_plus, out=out_offsets[1:])
    in_offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(seq.d_minus, out=in_offsets[1:])
    order = np.argsort(dst, kind="stable")
    return Digraph(n, out_offsets, dst, in_offsets, src[order], is_multigraph=True)


def erase(g: Digraph) -> Digraph:
    """Simple digraph: self-loops removed, parallel edges merged."""
    src, dst = g.edges()
    keep = src != dst
    src, dst = src[keep], dst[keep]
    key = np.unique(src * np.int64(g.n) + dst)
    src = key // g.n
    dst = key % g.n
    return _csr_from_edges(g.n, src, dst, is_multigraph=False)


def graph_stats(g: Digraph) -> GraphStats:
    src, dst = g.edges()
    self_loops = int((src == dst).sum())
    distinct = np.unique(src * np.int64(g.n) + dst).size if g.m else 0
    return GraphStats(
        self_loops=self_loops,
        multi_edge_excess=int(g.m - distinct),
        max_in_degree=int(g.in_degrees.max()) if g.n else 0,
        max_out_degree=int(g.out_degrees.max()) if g.n else 0,
    )


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def save_graph(g: Digraph, path: str | Path) -> None:
    """Binary format: magic "DCMG", version u32, n u64, m u64, then m
    little-endian (u32 src, u32 dst) pairs in forward CSR order."""
    with open(path, "wb") as fh:
        fh.write(_DCMG_MAGIC)
        fh.write(struct.pack("<IQQ", _DCMG_VERSION, g.n, g.m))
        src, dst = g.edges()
        pairs = np.empty((g.m, 2), dtype="<u4")
        pairs[:, 0] = src
        pairs[:, 1] = dst
        fh.write(pairs.tobytes())


def load_graph(path: str | Path, is_multigraph: bool = True) -> Digraph:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _DCMG_MAGIC:
            raise ValueError(f"not a DCMG file: magic {magic!r}")
        version, n, m = struct.unpack("<IQQ", fh.read(20))
        if version != _DCMG_VERSION:
            raise ValueError(f"unsupported DCMG version {version}")
        pairs = np.frombuffer(fh.read(8 * m), dtype="<u4").reshape(m, 2)
    return _csr_from_edges(int(n), pairs[:, 0].astype(np.int64),
                           pairs[:, 1].astype(np.int64), is_multigraph)


def save_edge_list(g: Digraph, path: str | Path) -> None:
    src, dst = g.edges()
    np.savetxt(path, np.column_stack([src, dst]), fmt="%d %d")


def load_edge_list(path: str | Path, n: int | None = None,
                   is_multigraph: bool = True) -> Digraph:
    data = np.loadtxt(path, dtype=np.int64, ndmin=2)
    if data.size == 0:
        data = data.reshape(0, 2)
    if n is None:
        n = int(data.max()) + 1 if data.size else 0
    return _csr_from_edges(n, data[:, 0], data[:, 1], is_multigraph)
