"""Full query over the explorer pages, then the benefit of linking tables."""

from dataclasses import replace

from tablequery.answer import f1_error
from tablequery.fixtures import EXPLORER_COLUMNS, collective_fixture, explorer_tables
from tablequery.index import build_index
from tablequery.infer import infer
from tablequery.model import ModelWeights, build_model
from tablequery.pipeline import features_for, run_query

weights = ModelWeights(w1=0.5, w2=1.0, w3=0.25, w4=0.25, w5=-0.15, w_e=1.0)
index = build_index(explorer_tables())
result = run_query(index, EXPLORER_COLUMNS, weights)
print(result.labeling)
print(result.answer.to_csv())
print({k: f"{v * 1000:.1f} ms" for k, v in result.timings.items()})

# Eight tables; three have no header and only edges can rescue them.
columns, tables, gold = collective_fixture()
index = build_index(tables)
fs = features_for(index, columns, tables, ModelWeights())
for w_e in (0.5, 2.0):
    w = replace(ModelWeights(), w4=0.25, w_e=w_e)
    model = build_model(fs, w)
    for algo in ("independent", "table-centric"):
        print(f"w_e={w_e} {algo:14s} F1 error {f1_error(infer(model, algo), gold):.3f}")
