"""Raw post text normalization.

Forum markup is collapsed into the four literal tokens URL, CITE, QUOTE and
CODE before any character stripping, so the markup itself can never be
mangled by the cleanup pass. The result is plain lowercase-friendly text:
word characters, basic punctuation (. , ! ? ' -) and single spaces.
"""

import re

# Attributed quotes ([quote=someone]...) cite a specific post; bare quote
# blocks are generic quotations. The attributed form must match first.
_CODE_RE = re.compile(r"\[code\].*?\[/code\]|```.*?```", re.IGNORECASE | re.DOTALL)
_CITE_RE = re.compile(r"\[quote=[^\]]*\].*?\[/quote\]", re.IGNORECASE | re.DOTALL)
_QUOTE_RE = re.compile(r"\[quote\].*?\[/quote\]", re.IGNORECASE | re.DOTALL)
_URL_RE = re.compile(r"(?:https?|ftp)://\S+|www\.\S+", re.IGNORECASE)
# Everything outside word chars, whitespace and the retained punctuation set;
# underscore is not alphanumeric so it goes too.
_SPECIAL_RE = re.compile(r"[^\w\s.,!?'-]|_")
_WS_RE = re.compile(r"\s+")


def preprocess_text(raw: str) -> str:
    """Normalize one raw post body or title. Total and idempotent."""
    text = _CODE_RE.sub(" CODE ", raw)
    text = _CITE_RE.sub(" CITE ", text)
    text = _QUOTE_RE.sub(" QUOTE ", text)
    text = _URL_RE.sub(" URL ", text)
    # Specials become spaces (never the empty string) so that stripping can
    # never splice two fragments into a new token or URL.
    text = _SPECIAL_RE.sub(" ", text)
    return _WS_RE.sub(" ", text).strip()


def tokenize(text: str) -> list[str]:
    """Counting tokenizer for topic weights: lowercase whitespace tokens with
    trailing punctuation stripped; empty leftovers dropped."""
    out = []
    for tok in text.lower().split():
        tok = tok.rstrip(".,!?'-")
        if tok:
            out.append(tok)
    return out


def contains_url(text: str) -> bool:
    return _URL_RE.search(text) is not None
