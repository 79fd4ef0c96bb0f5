"""Overfit the model on two tiny tasks to verify it can learn cost-to-go.

Run: python3 demos/05_train_overfit_tiny.py   (about half a minute)
"""

import numpy as np

from hgnplan import make_task
from hgnplan.hgn import ArityBounds
from hgnplan.model import ModelHyperparams, forward, init_model, loss, loss_gradients, model_parameters
from hgnplan.nn import AdamState, adam_step
from hgnplan.training import TaskSource, generate_training_data

chain3 = make_task(
    ["a", "b", "g"],
    [("o1", ["a"], ["b"], [], 1), ("o2", ["b"], ["g"], [], 1)],
    ["a"], ["g"])
fork = make_task(
    ["a", "b", "c", "g"],
    [("o1", ["a"], ["b"], [], 1), ("o2", ["a"], ["c"], [], 1),
     ("o3", ["b", "c"], ["g"], [], 1)],
    ["a"], ["g"])

samples = generate_training_data([TaskSource("demo", "chain3", chain3),
                                  TaskSource("demo", "fork", fork)])
print(f"{len(samples)} samples; targets:", [s.target for s in samples])

model = init_model(ModelHyperparams(message_steps=5, latent_width=16),
                   ArityBounds(2, 1), seed=3)
params = model_parameters(model)
adam = AdamState.for_params(params)
rng = np.random.default_rng(3)

batch = [(s.graph, s.target) for s in samples]
for epoch in range(1, 201):
    for i in rng.permutation(len(samples)):
        grads, _ = loss_gradients(model, samples[i].graph, samples[i].target)
        adam_step(params, grads, adam, lr=0.001, weight_decay=0.00025)
    if epoch % 25 == 0 or epoch == 1:
        print(f"epoch {epoch:>3}: training loss {loss(model, batch):.4f}")

print("\nlearned estimates vs targets (last message step):")
for s in samples:
    outputs, _ = forward(model, s.graph)
    print(f"  {str(sorted(s.state_names)):<24} target {s.target}  "
          f"predicted {outputs[-1]:+.3f}")
