"""Answer multi-column keyword queries over harvested web tables."""

from .answer import AnswerTable, consolidate, f1_error, rank_rows
from .harvest import RawDocument, WebTable, extract_tables
from .index import Index, build_index
from .infer import infer
from .labels import NA, NR
from .model import Model, ModelWeights, build_model, compute_features
from .pipeline import run_query

__version__ = "0.1.0"
