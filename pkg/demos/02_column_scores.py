"""How a query column is scored against each column of a table."""

from tablequery.harvest import ContextSnippet, WebTable
from tablequery.score import TableParts, cover, seg_sim, table_relevance


def flat(_word):
    # every word equally informative, to keep the numbers readable
    return 1.0


laureates = WebTable(
    "nobel", "demo", [], [[["winner"], ["year"]]],
    [["Curie", "1903"], ["Bohr", "1922"], ["Fermi", "1938"]],
    [ContextSnippet("List of Nobel prize laureates", 1.0)],
)
parts = TableParts.from_table(laureates)
query = ["nobel", "prize", "winner"]

# Column 1 ("year") shares no header word with the query, so the context alone
# cannot make it match.
# "winner" sits in the header; "nobel prize" is only in the text around the table.
# The segmented score blends the header part with the discounted context part.
for c in range(laureates.n_t):
    print("column", c, "seg", round(seg_sim(query, parts, c, flat), 4), "cover", round(cover(query, parts, c, flat), 4))

# Table relevance keeps only the query columns that are well covered.
print(table_relevance([1.0, 0.5, 0.2]))
print(table_relevance([0.6, 0.6]))
