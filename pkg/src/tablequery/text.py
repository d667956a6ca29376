"""Tokenization and value normalization shared by every stage."""

import re
import unicodedata

_TOKEN = re.compile(r"[^\W_]+")
_PUNCT_SPACE = re.compile(r"[\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumerics. No stemming, stopwords kept."""
    return _TOKEN.findall(text.lower())


def normalize_value(text: str) -> str:
    """Case-, whitespace- and punctuation-insensitive form of a cell value."""
    text = unicodedata.normalize("NFKC", text).casefold()
    return _PUNCT_SPACE.sub(" ", text).strip()


def is_numeric(text: str) -> bool:
    s = text.strip().replace(",", "").replace("%", "").lstrip("$€£+-")
    if not s:
        return False
    try:
        float(s)
    except ValueError:
        return False
    return True
