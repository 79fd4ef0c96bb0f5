"""Hypergraph network block: per-hyperedge, per-vertex and global updates
with permutation-invariant aggregation.

Hyperedges connect many senders to many receivers, so the edge update sees
its endpoint features as fixed-width vectors: endpoint rows are stacked in
alphabetical order of the vertex names and zero-padded up to the arity
bounds. Updates run edges first, then vertices (aggregating the updated
edges each vertex receives from), then the global slot. Absent update
functions pass features through unchanged; the structure itself is never
modified.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hypergraph import Hypergraph, HypergraphStructure
from .nn import MlpParams, mlp_backward, mlp_forward
from .pddl import DomainDef

EDGE_INPUTS = ("edge", "receivers", "senders", "globals")
VERTEX_INPUTS = ("agg_edges", "vertex", "globals")
GLOBAL_INPUTS = ("agg_edges", "agg_vertices", "globals")
AGGREGATORS = ("sum", "mean")


class ArityOverflowError(Exception):
    """A hyperedge exceeds the configured sender/receiver bounds."""


@dataclass(frozen=True)
class ArityBounds:
    max_senders: int
    max_receivers: int

    def __post_init__(self):
        if self.max_senders < 1 or self.max_receivers < 1:
            raise ValueError("arity bounds must be at least 1")


def compute_arity_bounds(domains: list[DomainDef]) -> ArityBounds:
    """Max precondition / add-effect counts over all action schemas."""
    if not domains:
        raise ValueError("need at least one domain")
    max_pre = max((len(s.preconditions) for d in domains for s in d.schemas), default=1)
    max_add = max((len(s.add_effects) for d in domains for s in d.schemas), default=1)
    return ArityBounds(max(1, max_pre), max(1, max_add))


def aggregate_sum(vectors, width: int | None = None) -> np.ndarray:
    """Element-wise sum of equal-width vectors; the empty set sums to zeros."""
    vecs = [np.asarray(v, dtype=np.float64) for v in vectors]
    if not vecs:
        if width is None:
            raise ValueError("empty aggregation needs an explicit width")
        return np.zeros(width, dtype=np.float64)
    shape = vecs[0].shape
    if any(v.shape != shape for v in vecs):
        raise ValueError("aggregated vectors must share one width")
    return np.sum(vecs, axis=0)


def pad_and_stack(features: np.ndarray, ids, names, n_max: int) -> np.ndarray:
    """Stack the rows ``features[i]`` for i in ids, ordered by ``names[i]``,
    zero-padded to n_max rows, flattened to one vector."""
    ids = list(ids)
    if len(ids) > n_max:
        raise ArityOverflowError(f"{len(ids)} vertices exceed the bound {n_max}")
    width = features.shape[1]
    out = np.zeros(n_max * width, dtype=np.float64)
    for slot, i in enumerate(sorted(ids, key=lambda i: names[i])):
        out[slot * width:(slot + 1) * width] = features[i]
    return out


@dataclass(frozen=True)
class HgnBlockConfig:
    """Which update functions exist and what inputs each consumes.

    ``None`` means the update function is absent and features pass through.
    Input tuples must be subsequences of the canonical orders above.
    """

    edge_inputs: tuple[str, ...] | None
    vertex_inputs: tuple[str, ...] | None
    global_inputs: tuple[str, ...] | None
    aggregator: str = "sum"

    def __post_init__(self):
        for inputs, canonical, label in (
            (self.edge_inputs, EDGE_INPUTS, "edge"),
            (self.vertex_inputs, VERTEX_INPUTS, "vertex"),
            (self.global_inputs, GLOBAL_INPUTS, "global"),
        ):
            if inputs is None:
                continue
            order = [canonical.index(name) for name in inputs if name in canonical]
            if len(order) != len(inputs) or order != sorted(order) or len(set(inputs)) != len(inputs):
                raise ValueError(
                    f"{label} inputs {inputs} must be an ordered subset of {canonical}"
                )
        if self.aggregator not in AGGREGATORS:
            raise ValueError(f"aggregator must be one of {AGGREGATORS}")


@dataclass
class HgnBlockParams:
    edge_mlp: MlpParams | None = None
    vertex_mlp: MlpParams | None = None
    global_mlp: MlpParams | None = None


@dataclass
class HgnBlockGrads:
    edge_mlp: tuple[list, list] | None = None
    vertex_mlp: tuple[list, list] | None = None
    global_mlp: tuple[list, list] | None = None


@dataclass
class GraphGrads:
    """Gradients w.r.t. one hypergraph's feature arrays."""

    global_features: np.ndarray
    vertex_features: np.ndarray
    edge_features: np.ndarray

    @classmethod
    def zeros_like(cls, g: Hypergraph) -> "GraphGrads":
        return cls(np.zeros_like(g.global_features),
                   np.zeros_like(g.vertex_features),
                   np.zeros_like(g.edge_features))


class PreparedStructure:
    """Gather indices and incidence matrices for one hypergraph structure.

    Building this once per task and reusing it across states keeps repeated
    forward passes cheap; endpoint slots are ordered by vertex name so the
    outputs are invariant to vertex storage order.
    """

    def __init__(self, structure: HypergraphStructure, arity: ArityBounds):
        self.structure = structure
        self.arity = arity
        n_e = structure.n_edges
        n_v = structure.n_vertices
        names = structure.vertex_names

        def slots(groups, bound, label):
            # empty slots point at a zero row appended behind the real vertices
            idx = np.full((n_e, bound), n_v, dtype=np.intp)
            for k, ids in enumerate(groups):
                if len(ids) > bound:
                    raise ArityOverflowError(
                        f"hyperedge {k} has {len(ids)} {label}, bound is {bound}"
                    )
                for slot, i in enumerate(sorted(ids, key=lambda i: names[i])):
                    idx[k, slot] = i
            return idx

        self.recv_idx = slots(structure.receivers, arity.max_receivers, "receivers")
        self.send_idx = slots(structure.senders, arity.max_senders, "senders")
        incidence = np.zeros((n_v, n_e), dtype=np.float64)
        for k, ids in enumerate(structure.receivers):
            for i in ids:
                incidence[i, k] = 1.0
        self.recv_incidence = incidence
        self.recv_counts = np.maximum(incidence.sum(axis=1), 1.0)


def prepare_structure(structure: HypergraphStructure, arity: ArityBounds) -> PreparedStructure:
    return PreparedStructure(structure, arity)


def _pad_rows(features: np.ndarray) -> np.ndarray:
    # one extra all-zero row for the empty endpoint slots to gather from
    padded = np.empty((features.shape[0] + 1, features.shape[1]))
    padded[:-1] = features
    padded[-1] = 0.0
    return padded


def _gather_stack(padded: np.ndarray, idx: np.ndarray) -> np.ndarray:
    n_e, slots = idx.shape
    return padded[idx].reshape(n_e, slots * padded.shape[1])


def _scatter_stack(grad: np.ndarray, idx: np.ndarray, out: np.ndarray) -> None:
    n_e, slots = idx.shape
    width = out.shape[1]
    scattered = np.zeros((out.shape[0] + 1, width))
    np.add.at(scattered, idx.ravel(), grad.reshape(n_e * slots, width))
    out += scattered[:-1]  # the dummy row collects the empty slots' gradients


def block_forward(cfg: HgnBlockConfig, params: HgnBlockParams, graph: Hypergraph,
                  prepared: PreparedStructure | None = None):
    """One block application; returns (output hypergraph, cache)."""
    structure = graph.structure
    u, v, e = graph.global_features, graph.vertex_features, graph.edge_features
    n_v, n_e = structure.n_vertices, structure.n_edges
    mean = cfg.aggregator == "mean"
    cache: dict = {"graph": graph, "prepared": prepared}

    # hyperedge update
    if cfg.edge_inputs is not None:
        if prepared is None and ("receivers" in cfg.edge_inputs or "senders" in cfg.edge_inputs):
            raise ValueError("edge update over endpoints needs a prepared structure")
        v_padded = None
        parts, segments = [], []
        for name in cfg.edge_inputs:
            if name == "edge":
                part = e
            elif name in ("receivers", "senders"):
                if v_padded is None:
                    v_padded = _pad_rows(v)
                idx = prepared.recv_idx if name == "receivers" else prepared.send_idx
                part = _gather_stack(v_padded, idx)
            else:  # globals
                part = np.broadcast_to(u, (n_e, u.shape[0]))
            parts.append(part)
            segments.append((name, part.shape[1]))
        e_out, mlp_cache = mlp_forward(params.edge_mlp, np.hstack(parts))
        cache["edge"] = (mlp_cache, segments)
    else:
        e_out = e

    # vertex update
    if cfg.vertex_inputs is not None:
        if prepared is None and "agg_edges" in cfg.vertex_inputs:
            raise ValueError("vertex update over edge aggregates needs a prepared structure")
        parts, segments = [], []
        for name in cfg.vertex_inputs:
            if name == "agg_edges":
                part = prepared.recv_incidence @ e_out
                if mean:
                    part = part / prepared.recv_counts[:, None]
            elif name == "vertex":
                part = v
            else:
                part = np.broadcast_to(u, (n_v, u.shape[0]))
            parts.append(part)
            segments.append((name, part.shape[1]))
        v_out, mlp_cache = mlp_forward(params.vertex_mlp, np.hstack(parts))
        cache["vertex"] = (mlp_cache, segments)
    else:
        v_out = v

    # global update
    if cfg.global_inputs is not None:
        denom_e = n_e if (mean and n_e) else 1
        denom_v = n_v if (mean and n_v) else 1
        parts, segments = [], []
        for name in cfg.global_inputs:
            if name == "agg_edges":
                part = e_out.sum(axis=0) / denom_e
            elif name == "agg_vertices":
                part = v_out.sum(axis=0) / denom_v
            else:
                part = u
            parts.append(part)
            segments.append((name, part.shape[0]))
        u_out, mlp_cache = mlp_forward(params.global_mlp,
                                       np.concatenate(parts)[None, :])
        u_out = u_out[0]
        cache["global"] = (mlp_cache, segments, denom_e, denom_v)
    else:
        u_out = u

    return Hypergraph(structure, u_out, v_out, e_out), cache


def block_backward(cfg: HgnBlockConfig, params: HgnBlockParams, cache,
                   grad_out: GraphGrads):
    """Adjoint of :func:`block_forward`.

    Returns (HgnBlockGrads, GraphGrads w.r.t. the input hypergraph).
    """
    graph: Hypergraph = cache["graph"]
    prepared: PreparedStructure | None = cache["prepared"]
    n_v = graph.structure.n_vertices
    n_e = graph.structure.n_edges
    grads = HgnBlockGrads()
    d_in = GraphGrads.zeros_like(graph)

    du_out = grad_out.global_features
    dv_out = grad_out.vertex_features.copy()
    de_out = grad_out.edge_features.copy()

    # global update (consumed updated edge/vertex aggregates)
    if cfg.global_inputs is not None:
        mlp_cache, segments, denom_e, denom_v = cache["global"]
        dweights, dbiases, dx = mlp_backward(params.global_mlp, mlp_cache, du_out[None, :])
        grads.global_mlp = (dweights, dbiases)
        offset = 0
        for name, width in segments:
            piece = dx[0, offset:offset + width]
            if name == "agg_edges":
                de_out += piece[None, :] / denom_e
            elif name == "agg_vertices":
                dv_out += piece[None, :] / denom_v
            else:
                d_in.global_features += piece
            offset += width
    else:
        d_in.global_features += du_out

    # vertex update (consumed aggregated updated edges and input vertices)
    if cfg.vertex_inputs is not None:
        mlp_cache, segments = cache["vertex"]
        dweights, dbiases, dx = mlp_backward(params.vertex_mlp, mlp_cache, dv_out)
        grads.vertex_mlp = (dweights, dbiases)
        offset = 0
        for name, width in segments:
            piece = dx[:, offset:offset + width]
            if name == "agg_edges":
                incidence = prepared.recv_incidence
                if cfg.aggregator == "mean":
                    incidence = incidence / prepared.recv_counts[:, None]
                de_out += incidence.T @ piece
            elif name == "vertex":
                d_in.vertex_features += piece
            else:
                d_in.global_features += piece.sum(axis=0)
            offset += width
    else:
        d_in.vertex_features += dv_out

    # hyperedge update (consumed input edge, endpoint and global features)
    if cfg.edge_inputs is not None:
        mlp_cache, segments = cache["edge"]
        dweights, dbiases, dx = mlp_backward(params.edge_mlp, mlp_cache, de_out)
        grads.edge_mlp = (dweights, dbiases)
        offset = 0
        for name, width in segments:
            piece = dx[:, offset:offset + width]
            if name == "edge":
                d_in.edge_features += piece
            elif name == "receivers":
                _scatter_stack(piece, prepared.recv_idx, d_in.vertex_features)
            elif name == "senders":
                _scatter_stack(piece, prepared.send_idx, d_in.vertex_features)
            else:
                d_in.global_features += piece.sum(axis=0)
            offset += width
    else:
        d_in.edge_features += de_out

    return grads, d_in


__all__ = [
    "EDGE_INPUTS",
    "VERTEX_INPUTS",
    "GLOBAL_INPUTS",
    "AGGREGATORS",
    "ArityOverflowError",
    "ArityBounds",
    "compute_arity_bounds",
    "aggregate_sum",
    "pad_and_stack",
    "HgnBlockConfig",
    "HgnBlockParams",
    "HgnBlockGrads",
    "GraphGrads",
    "PreparedStructure",
    "prepare_structure",
    "block_forward",
    "block_backward",
]
