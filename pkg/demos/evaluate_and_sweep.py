"""
AUROC, accuracy and the temperature sweep
=========================================

Score a labelled mock batch, write the prediction CSV, evaluate it, then
see what temperature does (and does not) change.
"""

import io
import random

import numpy as np

from memescreen.backends import mock_backends
from memescreen.core import MemeInput
from memescreen.evalharness import auroc_scores, evaluate, join_labels, sweep_table, temperature_sweep
from memescreen.pipeline import predictions_csv, score_batch

rng = random.Random(0)
harmful = ["you are lazy and useless", "go back home you vermin", "disgusting dirty people", "stupid and inferior"]
benign = ["have a nice day", "my cat at the beach", "lunch with friends", "stupid cat", "lazy sunday"]

memes, script, labels = [], {}, {}
for i in range(40):
    px = np.full((24, 24, 3), (i * 6) % 256, dtype=np.uint8)
    m = MemeInput(f"m{i:02d}", px)
    bad = rng.random() < 0.4
    script[m.id] = (rng.choice(harmful if bad else benign), 0.95)
    labels[m.id] = int(bad)
    memes.append(m)

report = score_batch(memes, mock_backends(primary=script), parallelism=4)
csv_text = predictions_csv(report.results)
print(csv_text.splitlines()[:4])

probs = {r.meme_id: r.score.probability for r in report.results}
rep = evaluate(join_labels(probs, labels))
print(rep.table())

# AUROC counts ordered positive/negative pairs, ties count half
print(auroc_scores([0.9, 0.4, 0.6, 0.2], [1, 1, 0, 0]))
print(auroc_scores([0.5, 0.5], [1, 0]))

# temperature is a monotone rescaling, so AUROC stays put. At threshold
# 0.5 the label is just the sign of the logit margin, so accuracy cannot
# move either; at any other threshold it can
pairs = [(r.score.logit_yes, r.score.logit_no) for r in report.results]
ys = [labels[r.meme_id] for r in report.results]
grid = [0.25, 0.5, 1, 2, 4]
print(sweep_table(temperature_sweep(pairs, ys, grid)))
print(sweep_table(temperature_sweep(pairs, ys, grid, threshold=0.3)))
