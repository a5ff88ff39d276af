"""Directed weighted graphs from coefficient matrices.

Entry ``A[i, j] > 0`` becomes the edge ``j -> i``: feature ``j`` at the
previous instant helps predict feature ``i``. Diagonal entries are kept
apart as self-loops.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Edge:
    source: str
    target: str
    weight: float


@dataclass
class EdgeList:
    edges: list[Edge] = field(default_factory=list)
    self_loops: list[tuple[str, float]] = field(default_factory=list)
    nodes: list[str] = field(default_factory=list)
    threshold: float = 0.0


def _labels(A: np.ndarray, labels: Sequence[str] | None) -> list[str]:
    N = A.shape[0]
    if labels is None:
        return [str(i + 1) for i in range(N)]
    labels = [str(x) for x in labels]
    if len(labels) != N:
        raise ValueError(f"{len(labels)} labels for a {N}x{N} matrix")
    return labels


def to_edges(A, labels: Sequence[str] | None = None, threshold: float = 0.0) -> EdgeList:
    A = np.asarray(A, dtype=float)
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    names = _labels(A, labels)
    edges = [Edge(names[j], names[i], float(A[i, j]))
             for i in range(A.shape[0]) for j in range(A.shape[1])
             if i != j and A[i, j] > threshold]
    loops = [(names[i], float(A[i, i])) for i in range(A.shape[0]) if A[i, i] > threshold]
    return EdgeList(edges, loops, names, float(threshold))


def top_k(A, labels: Sequence[str] | None = None, k: int = 5) -> list[Edge]:
    """The ``k`` heaviest off-diagonal edges, heaviest first; ties by (row, column)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    A = np.asarray(A, dtype=float)
    names = _labels(A, labels)
    cells = [(-A[i, j], i, j) for i in range(A.shape[0]) for j in range(A.shape[1])
             if i != j and A[i, j] > 0]
    cells.sort()
    return [Edge(names[j], names[i], float(-w)) for w, i, j in cells[:k]]


def _q(name: str) -> str:
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(el: EdgeList, penwidth_scale: float = 10.0) -> str:
    lines = ["digraph {", f'  graph [threshold="{el.threshold:.6f}"];']
    loops = dict(el.self_loops)
    for n in el.nodes:
        if n in loops:
            lines.append(f'  {_q(n)} [selfloop="{loops[n]:.6f}"];')
        else:
            lines.append(f"  {_q(n)};")
    for e in el.edges:
        lines.append(f'  {_q(e.source)} -> {_q(e.target)} '
                     f'[weight="{e.weight:.6f}", penwidth="{penwidth_scale * e.weight:.6f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(el: EdgeList) -> str:
    return json.dumps({
        "nodes": el.nodes,
        "threshold": el.threshold,
        "edges": [{"from": e.source, "to": e.target, "weight": e.weight} for e in el.edges],
        "self_loops": [{"node": n, "weight": w} for n, w in el.self_loops],
    }, indent=2)


def parse_json(text: str) -> EdgeList:
    d = json.loads(text)
    return EdgeList(
        edges=[Edge(e["from"], e["to"], float(e["weight"])) for e in d["edges"]],
        self_loops=[(s["node"], float(s["weight"])) for s in d["self_loops"]],
        nodes=list(d.get("nodes", [])),
        threshold=float(d.get("threshold", 0.0)),
    )


def export_csv(edges: Sequence[Edge]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["from", "to", "weight"])
    for e in edges:
        w.writerow([e.source, e.target, repr(e.weight)])
    return buf.getvalue()
