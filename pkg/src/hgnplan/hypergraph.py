"""Delete-relaxation hypergraphs and per-state input features.

Each proposition is a vertex; each action is a directed hyperedge whose
senders are its preconditions and whose receivers are its add effects.
Delete effects never influence the structure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .grounding import GroundedTask, State


class StructureMismatchError(Exception):
    """Two hypergraphs built over different structures were combined."""


@dataclass(frozen=True)
class HypergraphStructure:
    n_vertices: int
    receivers: tuple[tuple[int, ...], ...]  # add effects per hyperedge
    senders: tuple[tuple[int, ...], ...]    # preconditions per hyperedge
    vertex_names: tuple[str, ...]

    @property
    def n_edges(self) -> int:
        return len(self.receivers)


@dataclass(frozen=True)
class Hypergraph:
    """Feature triple (global, per-vertex, per-hyperedge) over a structure."""

    structure: HypergraphStructure
    global_features: np.ndarray  # (u_width,), possibly width 0
    vertex_features: np.ndarray  # (n_vertices, v_width)
    edge_features: np.ndarray    # (n_edges, e_width)

    def __post_init__(self):
        if self.vertex_features.shape[0] != self.structure.n_vertices:
            raise ValueError("vertex feature count does not match structure")
        if self.edge_features.shape[0] != self.structure.n_edges:
            raise ValueError("edge feature count does not match structure")


def build_structure(task: GroundedTask) -> HypergraphStructure:
    """Hypergraph of the delete relaxation: one hyperedge per action."""
    return HypergraphStructure(
        n_vertices=task.n_props,
        receivers=tuple(a.add_effects for a in task.actions),
        senders=tuple(a.preconditions for a in task.actions),
        vertex_names=task.props,
    )


def encode_features(structure: HypergraphStructure, task: GroundedTask,
                    state: State) -> Hypergraph:
    """Input features for one state.

    Vertex i carries [in-state, in-goal] indicators; hyperedge k carries
    [action cost, add-effect count, precondition count].
    """
    n = structure.n_vertices
    vertices = np.zeros((n, 2), dtype=np.float64)
    for i in range(n):
        if state >> i & 1:
            vertices[i, 0] = 1.0
    for i in task.goal:
        vertices[i, 1] = 1.0
    edges = np.array(
        [[a.cost, len(a.add_effects), len(a.preconditions)] for a in task.actions],
        dtype=np.float64,
    ).reshape(structure.n_edges, 3)
    return Hypergraph(structure, np.zeros(0, dtype=np.float64), vertices, edges)


def concat_features(a: Hypergraph, b: Hypergraph) -> Hypergraph:
    """Concatenate per-vertex and per-hyperedge features of two hypergraphs.

    Both inputs must share the same structure; global features are taken
    from the first argument (they are not concatenated).
    """
    if a.structure is not b.structure and a.structure != b.structure:
        raise StructureMismatchError("hypergraphs have different structures")
    return Hypergraph(
        a.structure,
        a.global_features,
        np.hstack([a.vertex_features, b.vertex_features]),
        np.hstack([a.edge_features, b.edge_features]),
    )


def hypergraph_to_json(g: Hypergraph) -> str:
    doc = {
        "n_vertices": g.structure.n_vertices,
        "vertex_names": list(g.structure.vertex_names),
        "receivers": [list(r) for r in g.structure.receivers],
        "senders": [list(s) for s in g.structure.senders],
        "global_features": g.global_features.tolist(),
        "vertex_features": g.vertex_features.tolist(),
        "edge_features": g.edge_features.tolist(),
    }
    return json.dumps(doc)


def hypergraph_from_json(text: str) -> Hypergraph:
    doc = json.loads(text)
    structure = HypergraphStructure(
        n_vertices=doc["n_vertices"],
        receivers=tuple(tuple(r) for r in doc["receivers"]),
        senders=tuple(tuple(s) for s in doc["senders"]),
        vertex_names=tuple(doc["vertex_names"]),
    )

    def rows(raw, count):
        arr = np.asarray(raw, dtype=np.float64)
        return arr.reshape(count, 0) if arr.size == 0 else arr.reshape(count, -1)

    return Hypergraph(
        structure,
        np.asarray(doc["global_features"], dtype=np.float64).reshape(-1),
        rows(doc["vertex_features"], structure.n_vertices),
        rows(doc["edge_features"], structure.n_edges),
    )


__all__ = [
    "StructureMismatchError",
    "HypergraphStructure",
    "Hypergraph",
    "build_structure",
    "encode_features",
    "concat_features",
    "hypergraph_to_json",
    "hypergraph_from_json",
]
