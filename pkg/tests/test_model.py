import json

import numpy as np
import pytest

from hgnplan.hgn import ArityBounds, ArityOverflowError, HgnBlockParams
from hgnplan.hypergraph import Hypergraph, HypergraphStructure, build_structure, encode_features
from hgnplan.model import (
    CORE_CONFIG,
    DECODER_CONFIG,
    ENCODER_CONFIG,
    HgnHeuristic,
    ModelFileError,
    ModelHyperparams,
    ModelVersionError,
    StripsHgnModel,
    forward,
    heuristic_value,
    init_model,
    load_model,
    loss,
    loss_gradients,
    model_parameters,
    save_model,
    zero_model,
)
from hgnplan.nn import MlpParams

from oracles import central_difference, gradient_close


def _ones(shape):
    return np.ones(shape, dtype=np.float64)


def _ones_linear_model(message_steps: int) -> StripsHgnModel:
    """Latent width 1, all-ones weights: every unit just sums its inputs,
    and all intermediate values stay nonnegative, so LeakyReLU is exact
    identity and the whole network is hand-checkable arithmetic."""
    hp = ModelHyperparams(message_steps=message_steps, latent_width=1)
    arity = ArityBounds(1, 1)

    def mlp(dims, final_linear=False):
        return MlpParams([_ones((o, i)) for i, o in zip(dims[:-1], dims[1:])],
                         [np.zeros(o) for o in dims[1:]], final_linear=final_linear)

    return StripsHgnModel(
        hp=hp, arity=arity,
        encoder=HgnBlockParams(edge_mlp=mlp([3, 1, 1]), vertex_mlp=mlp([2, 1, 1])),
        core=HgnBlockParams(edge_mlp=mlp([6, 1, 1]), vertex_mlp=mlp([3, 1, 1]),
                            global_mlp=mlp([2, 1, 1])),
        decoder=HgnBlockParams(global_mlp=mlp([1, 1, 1, 1], final_linear=True)),
    )


def _chain3_graph(chain3):
    structure = build_structure(chain3)
    return encode_features(structure, chain3, chain3.initial_state())


def test_block_configs_match_design():
    assert ENCODER_CONFIG.edge_inputs == ("edge",)
    assert ENCODER_CONFIG.vertex_inputs == ("vertex",)
    assert ENCODER_CONFIG.global_inputs is None
    assert CORE_CONFIG.edge_inputs == ("edge", "receivers", "senders")
    assert CORE_CONFIG.vertex_inputs == ("agg_edges", "vertex")
    assert CORE_CONFIG.global_inputs == ("agg_edges", "agg_vertices")
    assert DECODER_CONFIG.edge_inputs is None and DECODER_CONFIG.vertex_inputs is None
    assert DECODER_CONFIG.global_inputs == ("globals",)


def test_zero_model_outputs_zero(chain3):
    model = zero_model(ModelHyperparams(message_steps=4, latent_width=8),
                       ArityBounds(1, 1))
    outputs, _ = forward(model, _chain3_graph(chain3))
    assert outputs == [0.0, 0.0, 0.0, 0.0]
    assert heuristic_value(model, chain3, chain3.initial_state()) == 0.0


def test_hand_computed_linear_chain(chain3):
    # encoder: v = x_s + x_g -> [1, 0, 1]; e = 1+1+1 = 3 for both edges.
    # step 1 (concat with itself): each edge sums [3,3, recv, recv, send, send];
    # o1 = 3+3+0+0+1+1 = 8, o2 = 3+3+1+1+0+0 = 8;
    # vertices: a = 0+1+1 = 2, b = 8+0+0 = 8, g = 8+1+1 = 10; u = 16+20 = 36.
    # step 2 (concat enc with step 1): o1 = 3+8+0+8+1+2 = 22,
    # o2 = 3+8+1+10+0+8 = 30; a = 3, b = 30, g = 41; u = 52+74 = 126.
    model = _ones_linear_model(message_steps=2)
    outputs, _ = forward(model, _chain3_graph(chain3))
    assert outputs == [36.0, 126.0]


def test_single_step_is_loop_prefix(chain3):
    one = _ones_linear_model(message_steps=1)
    two = _ones_linear_model(message_steps=2)
    g = _chain3_graph(chain3)
    outputs_one, _ = forward(one, g)
    outputs_two, _ = forward(two, g)
    assert outputs_one == outputs_two[:1]


def test_heuristic_value_clamps_negative(chain3):
    model = _ones_linear_model(message_steps=2)
    final = model.decoder.global_mlp.weights[-1]
    final *= -1.0  # raw output becomes -126
    outputs, _ = forward(model, _chain3_graph(chain3))
    assert outputs[-1] < 0
    assert heuristic_value(model, chain3, chain3.initial_state()) == 0.0


def test_heuristic_value_deterministic(chain3):
    model = init_model(ModelHyperparams(message_steps=3, latent_width=8),
                       ArityBounds(1, 1), seed=7)
    a = heuristic_value(model, chain3, chain3.initial_state())
    b = heuristic_value(model, chain3, chain3.initial_state())
    assert a == b  # bit-exact


def test_forward_rejects_wrong_widths(chain3):
    model = init_model(ModelHyperparams(message_steps=1, latent_width=4),
                       ArityBounds(1, 1), seed=0)
    g = _chain3_graph(chain3)
    bad = Hypergraph(g.structure, g.global_features,
                     np.hstack([g.vertex_features, g.vertex_features]),
                     g.edge_features)
    with pytest.raises(ValueError):
        forward(model, bad)


def test_arity_overflow_reported_at_load(fork):
    model = init_model(ModelHyperparams(message_steps=1, latent_width=4),
                       ArityBounds(1, 1), seed=0)
    with pytest.raises(ArityOverflowError):
        HgnHeuristic(model, fork)  # fork's o3 has two preconditions


def test_loss_formula(chain3, fork):
    g = _chain3_graph(chain3)
    zero = zero_model(ModelHyperparams(message_steps=2, latent_width=4),
                      ArityBounds(1, 1))
    # all outputs 0: loss = mean over steps of target^2
    assert loss(zero, [(g, 4.0)]) == 16.0
    assert loss(zero, [(g, 4.0), (g, 2.0)]) == (16.0 + 4.0) / 2
    # doubling a batch by repetition leaves the mean unchanged
    assert loss(zero, [(g, 4.0), (g, 2.0), (g, 4.0), (g, 2.0)]) == (16.0 + 4.0) / 2

    model = init_model(ModelHyperparams(message_steps=3, latent_width=4),
                       ArityBounds(1, 1), seed=3)
    outputs, _ = forward(model, g)
    by_hand = sum((h - 1.5) ** 2 for h in outputs) / 3
    assert loss(model, [(g, 1.5)]) == pytest.approx(by_hand, rel=1e-12)
    with pytest.raises(ValueError):
        loss(model, [])


def test_zero_loss_zero_gradients(chain3):
    zero = zero_model(ModelHyperparams(message_steps=2, latent_width=4),
                      ArityBounds(1, 1))
    grads, value = loss_gradients(zero, _chain3_graph(chain3), 0.0)
    assert value == 0.0
    assert all(np.all(g == 0) for g in grads)


def test_gradients_cover_exactly_the_parameters(chain3):
    model = init_model(ModelHyperparams(message_steps=2, latent_width=4),
                       ArityBounds(1, 1), seed=1)
    grads, _ = loss_gradients(model, _chain3_graph(chain3), 2.0)
    params = model_parameters(model)
    assert len(grads) == len(params)
    assert all(g.shape == p.shape for g, p in zip(grads, params))
    # no decoder vertex/edge pathways exist at all
    assert model.decoder.edge_mlp is None and model.decoder.vertex_mlp is None


def test_loss_gradients_match_finite_differences(chain3):
    rng = np.random.default_rng(8)
    model = init_model(ModelHyperparams(message_steps=3, latent_width=4),
                       ArityBounds(1, 1), seed=5)
    for p in model_parameters(model):
        p += rng.normal(scale=0.3, size=p.shape)  # off the activation kinks
    g = _chain3_graph(chain3)
    target = 2.0
    grads, _ = loss_gradients(model, g, target)

    def objective():
        return loss(model, [(g, target)])

    for p, grad in zip(model_parameters(model), grads):
        flat, gflat = p.reshape(-1), grad.reshape(-1)
        idx = rng.choice(flat.size, size=min(4, flat.size), replace=False)
        for j in idx:
            fd = central_difference(objective, flat, j)
            assert gradient_close(gflat[j], fd), (p.shape, j, gflat[j], fd)


def test_receptive_field_bounded_by_steps():
    # chain v0 -> v1 -> ... -> v6; influence travels one hyperedge per step
    n = 7
    names = tuple(f"v{i}" for i in range(n))
    structure = HypergraphStructure(
        n_vertices=n,
        receivers=tuple((i + 1,) for i in range(n - 1)),
        senders=tuple((i,) for i in range(n - 1)),
        vertex_names=names,
    )
    steps = 2
    model = init_model(ModelHyperparams(message_steps=steps, latent_width=4),
                       ArityBounds(1, 1), seed=11)
    rng = np.random.default_rng(0)
    base_v = rng.normal(size=(n, 2))
    base_e = rng.normal(size=(n - 1, 3))

    def hidden_vertices(v):
        g = Hypergraph(structure, np.zeros(0), v, base_e)
        _, (_, _, step_caches, _) = forward(model, g)
        return step_caches[-1][0].vertex_features

    base = hidden_vertices(base_v)
    bumped = base_v.copy()
    bumped[0] += 1.0  # perturb the chain's source vertex
    after = hidden_vertices(bumped)
    changed = [bool(np.abs(after[i] - base[i]).max() > 1e-12) for i in range(n)]
    assert changed[: steps + 1] == [True] * (steps + 1)
    assert changed[steps + 1:] == [False] * (n - steps - 1)


def test_model_level_permutation_invariance(fork):
    arity = ArityBounds(2, 1)
    model = init_model(ModelHyperparams(message_steps=3, latent_width=8),
                       arity, seed=13)
    structure = build_structure(fork)
    g = encode_features(structure, fork, fork.initial_state())
    base, _ = forward(model, g)

    perm = [3, 1, 0, 2]  # new id of old vertex i
    inv = np.argsort(perm)
    permuted = HypergraphStructure(
        n_vertices=structure.n_vertices,
        receivers=tuple(tuple(perm[i] for i in r) for r in structure.receivers),
        senders=tuple(tuple(perm[i] for i in s) for s in structure.senders),
        vertex_names=tuple(structure.vertex_names[i] for i in inv),
    )
    gp = Hypergraph(permuted, g.global_features, g.vertex_features[inv],
                    g.edge_features)
    outputs, _ = forward(model, gp)
    for a, b in zip(base, outputs):
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))

    eperm = [1, 0]
    ge = Hypergraph(
        HypergraphStructure(structure.n_vertices,
                            tuple(structure.receivers[k] for k in [1, 0, 2]),
                            tuple(structure.senders[k] for k in [1, 0, 2]),
                            structure.vertex_names),
        g.global_features, g.vertex_features, g.edge_features[[1, 0, 2]])
    outputs_e, _ = forward(model, ge)
    for a, b in zip(base, outputs_e):
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_save_load_round_trip(tmp_path, chain3):
    model = init_model(ModelHyperparams(message_steps=2, latent_width=8),
                       ArityBounds(2, 2), seed=21)
    model.provenance["training_config_digest"] = "cafe"
    path = tmp_path / "model.json"
    save_model(model, str(path))
    loaded = load_model(str(path))
    assert loaded.hp == model.hp
    assert loaded.arity == model.arity
    assert loaded.provenance["training_config_digest"] == "cafe"
    for a, b in zip(model_parameters(model), model_parameters(loaded)):
        assert np.array_equal(a, b)
    g = _chain3_graph(chain3)
    assert forward(model, g)[0] == forward(loaded, g)[0]  # bit-exact


def test_unknown_version_rejected(tmp_path):
    model = init_model(ModelHyperparams(message_steps=1, latent_width=2),
                       ArityBounds(1, 1), seed=0)
    path = tmp_path / "model.json"
    save_model(model, str(path))
    doc = json.loads(path.read_text())
    doc["format_version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelVersionError):
        load_model(str(path))


def test_truncated_file_rejected(tmp_path):
    model = init_model(ModelHyperparams(message_steps=1, latent_width=2),
                       ArityBounds(1, 1), seed=0)
    path = tmp_path / "model.json"
    save_model(model, str(path))
    text = path.read_text()
    path.write_text(text[: len(text) // 2])
    with pytest.raises(ModelFileError):
        load_model(str(path))
