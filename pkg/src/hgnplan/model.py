"""Recurrent encode-process-decode network producing one heuristic value per
message-passing step.

The encoder lifts vertex and hyperedge inputs to latent space independently.
The core block is applied M times; its input at every step is the encoded
hypergraph concatenated feature-wise with the previous core output (with
itself at the first step). The decoder turns each step's global features
into a scalar, so training can supervise all M intermediate estimates while
evaluation uses the last one, clamped to be nonnegative.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .grounding import GroundedTask, State
from .hgn import (
    ArityBounds,
    GraphGrads,
    HgnBlockConfig,
    HgnBlockParams,
    PreparedStructure,
    block_backward,
    block_forward,
    prepare_structure,
)
from .hypergraph import Hypergraph, build_structure, concat_features, encode_features
from .nn import MlpParams, init_params

MODEL_FORMAT_VERSION = 1

DEFAULT_MESSAGE_STEPS = 10
DEFAULT_LATENT_WIDTH = 32

ENCODER_CONFIG = HgnBlockConfig(edge_inputs=("edge",), vertex_inputs=("vertex",),
                                global_inputs=None)
CORE_CONFIG = HgnBlockConfig(edge_inputs=("edge", "receivers", "senders"),
                             vertex_inputs=("agg_edges", "vertex"),
                             global_inputs=("agg_edges", "agg_vertices"))
DECODER_CONFIG = HgnBlockConfig(edge_inputs=None, vertex_inputs=None,
                                global_inputs=("globals",))

_BLOCK_NAMES = ("encoder", "core", "decoder")
_MLP_NAMES = ("edge_mlp", "vertex_mlp", "global_mlp")


class ModelFileError(Exception):
    """Unreadable or structurally invalid model file."""


class ModelVersionError(ModelFileError):
    """Model file written by an unknown format version."""


@dataclass(frozen=True)
class ModelHyperparams:
    message_steps: int = DEFAULT_MESSAGE_STEPS
    latent_width: int = DEFAULT_LATENT_WIDTH
    activation_slope: float = 0.01
    vertex_input_width: int = 2
    edge_input_width: int = 3
    aggregator: str = "sum"

    def __post_init__(self):
        if self.message_steps < 1:
            raise ValueError("need at least one message-passing step")
        if self.latent_width < 1:
            raise ValueError("latent width must be positive")


@dataclass
class StripsHgnModel:
    hp: ModelHyperparams
    arity: ArityBounds
    encoder: HgnBlockParams
    core: HgnBlockParams
    decoder: HgnBlockParams
    provenance: dict = field(default_factory=dict)

    @property
    def core_config(self) -> HgnBlockConfig:
        if self.hp.aggregator == CORE_CONFIG.aggregator:
            return CORE_CONFIG
        return HgnBlockConfig(CORE_CONFIG.edge_inputs, CORE_CONFIG.vertex_inputs,
                              CORE_CONFIG.global_inputs, self.hp.aggregator)


def _mlp_dims(hp: ModelHyperparams, arity: ArityBounds) -> dict[str, list[int]]:
    lat = hp.latent_width
    concat = 2 * lat  # encoded features concatenated with the previous step's
    return {
        "encoder.vertex_mlp": [hp.vertex_input_width, lat, lat],
        "encoder.edge_mlp": [hp.edge_input_width, lat, lat],
        "core.edge_mlp": [concat + arity.max_receivers * concat
                          + arity.max_senders * concat, lat, lat],
        "core.vertex_mlp": [lat + concat, lat, lat],
        "core.global_mlp": [lat + lat, lat, lat],
        "decoder.global_mlp": [lat, lat, lat, 1],  # extra width-1 output layer
    }


def init_model(hp: ModelHyperparams, arity: ArityBounds, seed: int) -> StripsHgnModel:
    """Fresh model with Glorot-uniform weights from a seeded generator."""
    dims = _mlp_dims(hp, arity)
    children = np.random.SeedSequence(seed).spawn(len(dims))
    mlps = {
        name: init_params(d, child, slope=hp.activation_slope,
                          final_linear=name.startswith("decoder"))
        for (name, d), child in zip(dims.items(), children)
    }
    return StripsHgnModel(
        hp=hp,
        arity=arity,
        encoder=HgnBlockParams(edge_mlp=mlps["encoder.edge_mlp"],
                               vertex_mlp=mlps["encoder.vertex_mlp"]),
        core=HgnBlockParams(edge_mlp=mlps["core.edge_mlp"],
                            vertex_mlp=mlps["core.vertex_mlp"],
                            global_mlp=mlps["core.global_mlp"]),
        decoder=HgnBlockParams(global_mlp=mlps["decoder.global_mlp"]),
        provenance={"seed": seed},
    )


def zero_model(hp: ModelHyperparams, arity: ArityBounds) -> StripsHgnModel:
    model = init_model(hp, arity, seed=0)
    for p in model_parameters(model):
        p[:] = 0.0
    return model


def model_parameters(model: StripsHgnModel) -> list[np.ndarray]:
    """All parameter arrays in a fixed, documented order."""
    out: list[np.ndarray] = []
    for block_name in _BLOCK_NAMES:
        block: HgnBlockParams = getattr(model, block_name)
        for mlp_name in _MLP_NAMES:
            mlp: MlpParams | None = getattr(block, mlp_name)
            if mlp is None:
                continue
            for w, b in zip(mlp.weights, mlp.biases):
                out.append(w)
                out.append(b)
    return out


def copy_parameters(model: StripsHgnModel) -> list[np.ndarray]:
    return [p.copy() for p in model_parameters(model)]


def set_parameters(model: StripsHgnModel, values: list[np.ndarray]) -> None:
    params = model_parameters(model)
    if len(params) != len(values):
        raise ValueError("parameter list length mismatch")
    for p, v in zip(params, values):
        p[:] = v


# ---------------------------------------------------------------------------
# forward / backward


def forward(model: StripsHgnModel, graph: Hypergraph,
            prepared: PreparedStructure | None = None):
    """Per-step heuristic outputs [h_1 .. h_M] plus a cache for backward."""
    hp = model.hp
    if graph.vertex_features.shape[1] != hp.vertex_input_width:
        raise ValueError("vertex feature width does not match the model")
    if graph.edge_features.shape[1] != hp.edge_input_width:
        raise ValueError("edge feature width does not match the model")
    if prepared is None:
        prepared = prepare_structure(graph.structure, model.arity)

    core_cfg = model.core_config
    encoded, enc_cache = block_forward(ENCODER_CONFIG, model.encoder, graph)
    outputs: list[float] = []
    steps = []
    prev = encoded
    for _ in range(hp.message_steps):
        core_in = concat_features(encoded, prev)
        hidden, core_cache = block_forward(core_cfg, model.core, core_in, prepared)
        decoded, dec_cache = block_forward(DECODER_CONFIG, model.decoder, hidden)
        outputs.append(float(decoded.global_features[0]))
        steps.append((hidden, core_cache, dec_cache))
        prev = hidden
    return outputs, (encoded, enc_cache, steps, prepared)


def heuristic_value(model: StripsHgnModel, task: GroundedTask, state: State) -> float:
    """Learned heuristic for one state: last-step output clamped to >= 0."""
    structure = build_structure(task)
    graph = encode_features(structure, task, state)
    outputs, _ = forward(model, graph)
    return max(outputs[-1], 0.0)


def loss(model: StripsHgnModel, batch) -> float:
    """Mean over the batch of the step-averaged squared error.

    ``batch`` is a nonempty iterable of (input hypergraph, target) pairs;
    raw per-step outputs enter the loss unclamped.
    """
    items = list(batch)
    if not items:
        raise ValueError("empty batch")
    total = 0.0
    for graph, target in items:
        outputs, _ = forward(model, graph)
        total += sum((h - target) ** 2 for h in outputs) / len(outputs)
    return total / len(items)


def _accumulate_mlp(acc: dict, key: str, new) -> None:
    got = acc.get(key)
    if got is None:
        acc[key] = new
    else:
        for a, b in zip(got[0], new[0]):
            a += b
        for a, b in zip(got[1], new[1]):
            a += b


def _add_graph_grads(a: GraphGrads, b: GraphGrads) -> None:
    a.global_features += b.global_features
    a.vertex_features += b.vertex_features
    a.edge_features += b.edge_features


def loss_gradients(model: StripsHgnModel, graph: Hypergraph, target: float,
                   prepared: PreparedStructure | None = None):
    """Exact gradient of the per-sample loss w.r.t. every parameter.

    Backpropagates through all message-passing steps; the shared core
    weights accumulate contributions from every step. Returns (gradient
    list aligned with :func:`model_parameters`, loss value).
    """
    hp = model.hp
    outputs, (encoded, enc_cache, steps, prepared) = forward(model, graph, prepared)
    m_steps = hp.message_steps
    loss_value = sum((h - target) ** 2 for h in outputs) / m_steps

    acc: dict[str, tuple[list, list]] = {}
    core_cfg = model.core_config
    lat = hp.latent_width
    d_encoded = GraphGrads.zeros_like(encoded)
    d_next: GraphGrads | None = None  # gradient w.r.t. step t's hidden output

    for t in range(m_steps - 1, -1, -1):
        hidden, core_cache, dec_cache = steps[t]
        dh = 2.0 * (outputs[t] - target) / m_steps
        dec_out = GraphGrads(np.array([dh]),
                             np.zeros_like(hidden.vertex_features),
                             np.zeros_like(hidden.edge_features))
        dec_grads, d_hidden = block_backward(DECODER_CONFIG, model.decoder,
                                             dec_cache, dec_out)
        _accumulate_mlp(acc, "decoder.global_mlp", dec_grads.global_mlp)
        if d_next is not None:
            _add_graph_grads(d_hidden, d_next)

        core_grads, d_core_in = block_backward(core_cfg, model.core,
                                               core_cache, d_hidden)
        _accumulate_mlp(acc, "core.edge_mlp", core_grads.edge_mlp)
        _accumulate_mlp(acc, "core.vertex_mlp", core_grads.vertex_mlp)
        _accumulate_mlp(acc, "core.global_mlp", core_grads.global_mlp)

        # core input was concat(encoded, previous); split the halves
        d_encoded.vertex_features += d_core_in.vertex_features[:, :lat]
        d_encoded.edge_features += d_core_in.edge_features[:, :lat]
        prev_v = d_core_in.vertex_features[:, lat:]
        prev_e = d_core_in.edge_features[:, lat:]
        if t == 0:  # the first step concatenated the encoding with itself
            d_encoded.vertex_features += prev_v
            d_encoded.edge_features += prev_e
            d_next = None
        else:
            # the previous hidden graph's globals were dropped by the concat
            prev_hidden = steps[t - 1][0]
            d_next = GraphGrads(np.zeros_like(prev_hidden.global_features),
                                prev_v.copy(), prev_e.copy())

    enc_grads, _ = block_backward(ENCODER_CONFIG, model.encoder, enc_cache, d_encoded)
    _accumulate_mlp(acc, "encoder.edge_mlp", enc_grads.edge_mlp)
    _accumulate_mlp(acc, "encoder.vertex_mlp", enc_grads.vertex_mlp)

    grads: list[np.ndarray] = []
    for block_name in _BLOCK_NAMES:
        block: HgnBlockParams = getattr(model, block_name)
        for mlp_name in _MLP_NAMES:
            if getattr(block, mlp_name) is None:
                continue
            dweights, dbiases = acc[f"{block_name}.{mlp_name}"]
            for dw, db in zip(dweights, dbiases):
                grads.append(dw)
                grads.append(db)
    return grads, loss_value


# ---------------------------------------------------------------------------
# per-task evaluator


class HgnHeuristic:
    """Callable heuristic over one task; validates arity bounds up front."""

    def __init__(self, model: StripsHgnModel, task: GroundedTask):
        self._model = model
        self._task = task
        self._structure = build_structure(task)
        self._prepared = prepare_structure(self._structure, model.arity)

    def __call__(self, state: State) -> float:
        graph = encode_features(self._structure, self._task, state)
        outputs, _ = forward(self._model, graph, prepared=self._prepared)
        return max(outputs[-1], 0.0)


# ---------------------------------------------------------------------------
# model files


def _mlp_to_doc(mlp: MlpParams) -> dict:
    return {"weights": [w.tolist() for w in mlp.weights],
            "biases": [b.tolist() for b in mlp.biases]}


def _mlp_from_doc(doc: dict, slope: float, final_linear: bool) -> MlpParams:
    weights = [np.asarray(w, dtype=np.float64) for w in doc["weights"]]
    biases = [np.asarray(b, dtype=np.float64) for b in doc["biases"]]
    return MlpParams(weights, biases, slope, final_linear)


def save_model(model: StripsHgnModel, path: str) -> None:
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "hyperparameters": {
            "message_steps": model.hp.message_steps,
            "latent_width": model.hp.latent_width,
            "activation_slope": model.hp.activation_slope,
            "vertex_input_width": model.hp.vertex_input_width,
            "edge_input_width": model.hp.edge_input_width,
            "aggregator": model.hp.aggregator,
            "max_senders": model.arity.max_senders,
            "max_receivers": model.arity.max_receivers,
        },
        "provenance": model.provenance,
        "weights": {},
    }
    for block_name in _BLOCK_NAMES:
        block = getattr(model, block_name)
        doc["weights"][block_name] = {
            mlp_name: _mlp_to_doc(mlp)
            for mlp_name in _MLP_NAMES
            if (mlp := getattr(block, mlp_name)) is not None
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path: str) -> StripsHgnModel:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc}") from exc
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelVersionError(f"unknown model format version {version!r}")
    try:
        h = doc["hyperparameters"]
        hp = ModelHyperparams(
            message_steps=h["message_steps"],
            latent_width=h["latent_width"],
            activation_slope=h["activation_slope"],
            vertex_input_width=h["vertex_input_width"],
            edge_input_width=h["edge_input_width"],
            aggregator=h["aggregator"],
        )
        arity = ArityBounds(h["max_senders"], h["max_receivers"])
        blocks = {}
        for block_name in _BLOCK_NAMES:
            mlps = {
                mlp_name: _mlp_from_doc(mlp_doc, hp.activation_slope,
                                        block_name == "decoder")
                for mlp_name, mlp_doc in doc["weights"][block_name].items()
            }
            blocks[block_name] = HgnBlockParams(**mlps)
        return StripsHgnModel(hp=hp, arity=arity, encoder=blocks["encoder"],
                              core=blocks["core"], decoder=blocks["decoder"],
                              provenance=doc.get("provenance", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelFileError(f"corrupt model file {path}: {exc}") from exc


__all__ = [
    "MODEL_FORMAT_VERSION",
    "DEFAULT_MESSAGE_STEPS",
    "DEFAULT_LATENT_WIDTH",
    "ENCODER_CONFIG",
    "CORE_CONFIG",
    "DECODER_CONFIG",
    "ModelFileError",
    "ModelVersionError",
    "ModelHyperparams",
    "StripsHgnModel",
    "init_model",
    "zero_model",
    "model_parameters",
    "copy_parameters",
    "set_parameters",
    "forward",
    "heuristic_value",
    "loss",
    "loss_gradients",
    "HgnHeuristic",
    "save_model",
    "load_model",
]
