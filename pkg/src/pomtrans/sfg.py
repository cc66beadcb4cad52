"""Signal-flow-graph solver for linear input-output networks.

A :class:`SignalFlowGraph` encodes a set of node-balance equations
``x_v = sum_u gain(u -> v, omega) * x_u`` with frequency-dependent complex
edge gains.  Any source-to-node transfer function can be evaluated two ways:

* :func:`mason_gain` -- path/loop enumeration and the graph determinant
  (inclusion-exclusion over non-touching loop sets), and
* :func:`linear_solve_gain` -- a direct dense solve of the node-balance
  system with unit injection at the source.

The two routes share no code and serve as mutual oracles.  Graphs are
immutable after construction; every solver operation is a pure function and
safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import EdgeGainError, SingularityError, UnknownNodeError

GainFunction = Callable[[float], complex]

#: threshold scale for the determinant zero test, relative to loop-gain size
_SINGULARITY_RTOL = 1e-14

NODE_KINDS = ("source", "internal", "sink")


@dataclass(frozen=True)
class SfgNode:
    """Graph node with a unique symbolic id.

    ``kind`` is one of ``source`` (no incoming edges), ``sink`` (no outgoing
    edges) or ``internal``.
    """

    id: str
    kind: str = "internal"

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ValueError(f"node kind must be one of {NODE_KINDS}, got {self.kind!r}")


@dataclass(frozen=True)
class SfgEdge:
    """Directed edge with a complex gain as a function of angular frequency."""

    src: str
    dst: str
    gain: GainFunction
    label: str = ""

    def evaluate(self, omega: float) -> complex:
        try:
            return complex(self.gain(omega))
        except Exception as exc:  # noqa: BLE001 - re-raised with edge identity
            raise EdgeGainError(self.src, self.dst, exc) from exc


class SignalFlowGraph:
    """Immutable directed graph with at most one edge per ordered node pair."""

    def __init__(self, nodes: Iterable[SfgNode], edges: Iterable[SfgEdge]):
        node_list = list(nodes)
        ids = [n.id for n in node_list]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise ValueError(f"duplicate node ids: {dupes}")
        self._nodes: dict[str, SfgNode] = {n.id: n for n in node_list}

        self._edges: dict[tuple[str, str], SfgEdge] = {}
        for e in edges:
            for endpoint in (e.src, e.dst):
                if endpoint not in self._nodes:
                    raise UnknownNodeError(endpoint)
            key = (e.src, e.dst)
            if key in self._edges:
                raise ValueError(f"multiple edges for pair {key}")
            self._edges[key] = e

        self._succ: dict[str, tuple[str, ...]] = {nid: () for nid in self._nodes}
        self._pred: dict[str, tuple[str, ...]] = {nid: () for nid in self._nodes}
        succ: dict[str, list[str]] = {nid: [] for nid in self._nodes}
        pred: dict[str, list[str]] = {nid: [] for nid in self._nodes}
        for (u, v) in self._edges:
            succ[u].append(v)
            pred[v].append(u)
        for nid in self._nodes:
            self._succ[nid] = tuple(sorted(succ[nid]))
            self._pred[nid] = tuple(sorted(pred[nid]))

        for n in node_list:
            if n.kind == "source" and self._pred[n.id]:
                raise ValueError(f"source node {n.id!r} has incoming edges")
            if n.kind == "sink" and self._succ[n.id]:
                raise ValueError(f"sink node {n.id!r} has outgoing edges")

        self._loops: tuple[tuple[str, ...], ...] | None = None
        self._node_order = tuple(sorted(self._nodes))

    @classmethod
    def from_edges(cls, edges: Iterable[SfgEdge]) -> "SignalFlowGraph":
        """Build a graph from edges alone, inferring node kinds from degrees."""
        edges = list(edges)
        ids = sorted({e.src for e in edges} | {e.dst for e in edges})
        has_in = {e.dst for e in edges}
        has_out = {e.src for e in edges}
        nodes = []
        for nid in ids:
            if nid not in has_in:
                kind = "source"
            elif nid not in has_out:
                kind = "sink"
            else:
                kind = "internal"
            nodes.append(SfgNode(nid, kind))
        return cls(nodes, edges)

    @property
    def nodes(self) -> Mapping[str, SfgNode]:
        return dict(self._nodes)

    @property
    def edges(self) -> tuple[SfgEdge, ...]:
        return tuple(self._edges[k] for k in sorted(self._edges))

    def edge(self, src: str, dst: str) -> SfgEdge:
        return self._edges[(src, dst)]

    def source_ids(self) -> tuple[str, ...]:
        return tuple(nid for nid in self._node_order if self._nodes[nid].kind == "source")

    def successors(self, node_id: str) -> tuple[str, ...]:
        self._require(node_id)
        return self._succ[node_id]

    def _require(self, node_id: str):
        if node_id not in self._nodes:
            raise UnknownNodeError(node_id)

    def dump_adjacency(self) -> str:
        """Plain-text edge listing, one ``from -> to : label`` line per edge."""
        lines = []
        for key in sorted(self._edges):
            e = self._edges[key]
            lines.append(f"{e.src} -> {e.dst} : {e.label or '(unlabelled)'}")
        return "\n".join(lines)


def enumerate_paths(g: SignalFlowGraph, src: str, dst: str) -> list[tuple[str, ...]]:
    """All simple paths from ``src`` to ``dst`` in lexicographic order."""
    g._require(src)
    g._require(dst)
    paths: list[tuple[str, ...]] = []
    stack: list[str] = [src]
    on_stack = {src}

    def walk(node: str):
        if node == dst:
            paths.append(tuple(stack))
            return
        for nxt in g.successors(node):
            if nxt in on_stack:
                continue
            stack.append(nxt)
            on_stack.add(nxt)
            walk(nxt)
            stack.pop()
            on_stack.discard(nxt)

    walk(src)
    return paths


def enumerate_loops(g: SignalFlowGraph) -> list[tuple[str, ...]]:
    """All simple cycles, each rotated to start at its smallest node id.

    Cycles are discovered rooted at their lexicographically smallest node,
    which makes the canonical form automatic and the output order
    deterministic.
    """
    loops: list[tuple[str, ...]] = []
    order = g._node_order
    for root in order:
        if (root, root) in g._edges:
            loops.append((root,))
        stack = [root]
        on_stack = {root}

        def walk(node: str):
            for nxt in g.successors(node):
                if nxt == root and len(stack) > 1:
                    loops.append(tuple(stack))
                elif nxt > root and nxt not in on_stack:
                    stack.append(nxt)
                    on_stack.add(nxt)
                    walk(nxt)
                    stack.pop()
                    on_stack.discard(nxt)

        walk(root)
    loops.sort()
    return loops


def _loop_gain(g: SignalFlowGraph, loop: Sequence[str], omega: float) -> complex:
    gain = 1 + 0j
    n = len(loop)
    for i in range(n):
        gain *= g.edge(loop[i], loop[(i + 1) % n]).evaluate(omega)
    return gain


def _path_gain(g: SignalFlowGraph, path: Sequence[str], omega: float) -> complex:
    gain = 1 + 0j
    for u, v in zip(path, path[1:]):
        gain *= g.edge(u, v).evaluate(omega)
    return gain


def _cached_loops(g: SignalFlowGraph) -> tuple[tuple[str, ...], ...]:
    if g._loops is None:
        g._loops = tuple(enumerate_loops(g))
    return g._loops


def _delta(loop_gains: Sequence[complex], loop_masks: Sequence[int]) -> complex:
    """Inclusion-exclusion sum over sets of pairwise non-touching loops."""
    n = len(loop_gains)

    def rec(i: int, used: int) -> complex:
        if i == n:
            return 1 + 0j
        total = rec(i + 1, used)
        if not (loop_masks[i] & used):
            total -= loop_gains[i] * rec(i + 1, used | loop_masks[i])
        return total

    return rec(0, 0)


def _loop_data(g: SignalFlowGraph, omega: float):
    loops = _cached_loops(g)
    index = {nid: k for k, nid in enumerate(g._node_order)}
    gains = [_loop_gain(g, loop, omega) for loop in loops]
    masks = []
    for loop in loops:
        m = 0
        for nid in loop:
            m |= 1 << index[nid]
        masks.append(m)
    return loops, gains, masks, index


def graph_determinant(g: SignalFlowGraph, omega: float) -> complex:
    """Graph determinant: 1 - sum(loop gains) + sum(non-touching pair products) - ..."""
    _, gains, masks, _ = _loop_data(g, omega)
    return _delta(gains, masks)


def mason_gain(g: SignalFlowGraph, src: str, dst: str, omega: float) -> complex:
    """Transfer gain from ``src`` to ``dst`` at ``omega`` by Mason's rule.

    Returns 0 when ``dst`` is unreachable from ``src``.  Raises
    :class:`SingularityError` when the graph determinant vanishes (scale-aware
    zero test against the total loop-gain magnitude).
    """
    paths = enumerate_paths(g, src, dst)
    _, gains, masks, index = _loop_data(g, omega)
    delta = _delta(gains, masks)
    scale = 1.0 + sum(abs(x) for x in gains)
    if abs(delta) < _SINGULARITY_RTOL * scale:
        raise SingularityError(omega, "graph determinant vanished")
    if not paths:
        return 0j

    total = 0j
    for path in paths:
        pmask = 0
        for nid in path:
            pmask |= 1 << index[nid]
        sub_gains = [x for x, m in zip(gains, masks) if not (m & pmask)]
        sub_masks = [m for m in masks if not (m & pmask)]
        total += _path_gain(g, path, omega) * _delta(sub_gains, sub_masks)
    return total / delta


def linear_solve_gain(g: SignalFlowGraph, src: str, dst: str, omega: float) -> complex:
    """Direct-solve oracle for :func:`mason_gain`.

    Solves the node-balance system ``x_v - sum_u gain(u->v) x_u = delta_{v,src}``
    and returns ``x_dst``.  Algorithmically independent of the path/loop route.
    """
    g._require(src)
    g._require(dst)
    order = g._node_order
    index = {nid: k for k, nid in enumerate(order)}
    n = len(order)
    mat = np.eye(n, dtype=complex)
    for (u, v), e in g._edges.items():
        mat[index[v], index[u]] -= e.evaluate(omega)
    rhs = np.zeros(n, dtype=complex)
    rhs[index[src]] = 1.0
    try:
        sol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularityError(omega, str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularityError(omega, "non-finite solution")
    return complex(sol[index[dst]])


@dataclass(frozen=True)
class SourceGains:
    """Per-source transfer gains into one node, with the total power diagnostic."""

    gains: dict[str, complex] = field(default_factory=dict)
    power_sum: float = 0.0


def all_source_gains(g: SignalFlowGraph, dst: str, omega: float) -> SourceGains:
    """Gain from every source node into ``dst``; also reports sum |G|^2.

    The power sum is a diagnostic only: networks whose loss ports are not all
    represented as explicit sources sum to less than one.
    """
    g._require(dst)
    gains = {s: mason_gain(g, s, dst, omega) for s in g.source_ids()}
    power = math.fsum(abs(v) ** 2 for v in gains.values())
    return SourceGains(gains=gains, power_sum=power)
