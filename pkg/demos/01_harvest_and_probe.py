"""Pull tables out of HTML pages and look them up by keyword."""

from tablequery.fixtures import explorer_documents
from tablequery.harvest import RawDocument, extract_tables
from tablequery.index import build_index
from tablequery.text import tokenize

# A tiny page: a bold header row, three data rows and a paragraph nearby.
html = """
<html><body>
<h2>Famous rivers</h2>
<p>The longest rivers of Europe, by length in km.</p>
<table>
  <tr><td><b>River</b></td><td><b>Length</b></td></tr>
  <tr><td>Volga</td><td>3530</td></tr>
  <tr><td>Danube</td><td>2850</td></tr>
  <tr><td>Ural</td><td>2428</td></tr>
</table>
</body></html>
"""
(t,) = extract_tables(RawDocument("rivers", html))
print("header rows:", t.header)
print("body:", t.body)
for snip in t.context:
    print(f"context {snip.score:.2f}: {snip.text}")

# The explorer pages shipped with the package.
tables = [t for doc in explorer_documents() for t in extract_tables(doc)]
for tab in tables:
    print(tab.id, "cols", tab.n_t, "rows", len(tab.body), "header", tab.header)

index = build_index(tables)

# Header hits count double, context 1.5x, body text once.
for word in ["explorer", "nationality", "caribbean"]:
    kw = tokenize(word)
    print(word, "->", [(tid, round(index.score(kw, tid), 3)) for tid in index.probe(kw)])
