"""Script-based language tagging for OCR text.

Only the Tamil decision drives routing (Tamil text is translated before
prompting). The other tags are informational: CJK-dominant text is tagged
CHINESE, Latin text is split between ENGLISH and MALAY by stopword hits.
"""

from __future__ import annotations

import re
import unicodedata

from ..core import Language, LanguageTag

DEFAULT_TAMIL_THRESHOLD = 0.30

TAMIL_BLOCK = (0x0B80, 0x0BFF)
CJK_RANGES = (
    (0x3400, 0x4DBF),
    (0x4E00, 0x9FFF),
    (0xF900, 0xFAFF),
    (0x20000, 0x2FA1F),
)

_MALAY_WORDS = frozenset(
    "yang dan di ini itu tidak tak saya aku untuk dengan ada ke dari kita kami mereka akan "
    "bila sudah lagi boleh apa dia nak hari baru belum dalam pagi esok jangan tapi terus "
    "masuk juga sangat sini sana mahu hendak kerana macam orang semua".split()
)
_ENGLISH_WORDS = frozenset(
    "the and is are was were you your to of a an in my me i when it that this for on with "
    "not what be at but so just one all have has do does nobody here there how why who".split()
)
_WORD = re.compile(r"[^\W\d_]+", re.UNICODE)


def _is_letter(ch: str) -> bool:
    # Tamil vowel signs and the virama are combining marks, so marks count
    return unicodedata.category(ch)[0] in ("L", "M")


def _in(cp: int, lo_hi) -> bool:
    return lo_hi[0] <= cp <= lo_hi[1]


def _is_latin(cp: int) -> bool:
    return cp < 0x0250 or 0x1E00 <= cp <= 0x1EFF


def script_counts(text: str) -> dict[str, int]:
    counts = {"letters": 0, "tamil": 0, "cjk": 0, "latin": 0}
    for ch in text:
        if not _is_letter(ch):
            continue
        cp = ord(ch)
        counts["letters"] += 1
        if _in(cp, TAMIL_BLOCK):
            counts["tamil"] += 1
        elif any(_in(cp, r) for r in CJK_RANGES):
            counts["cjk"] += 1
        elif _is_latin(cp):
            counts["latin"] += 1
    return counts


def _latin_language(text: str) -> Language:
    words = [w.lower() for w in _WORD.findall(text)]
    malay = sum(w in _MALAY_WORDS for w in words)
    english = sum(w in _ENGLISH_WORDS for w in words)
    return Language.MALAY if malay > english else Language.ENGLISH


def detect_language(text: str, tamil_threshold: float = DEFAULT_TAMIL_THRESHOLD) -> LanguageTag:
    """Tag ``text`` as TAMIL iff Tamil-block letters make up at least
    ``tamil_threshold`` of all letters (combining marks included)."""
    if not 0.0 < tamil_threshold <= 1.0:
        raise ValueError(f"tamil_threshold must be in (0, 1], got {tamil_threshold}")
    c = script_counts(text)
    if c["letters"] == 0:
        return LanguageTag(Language.UNKNOWN, 0.0)
    fraction = c["tamil"] / c["letters"]
    if fraction >= tamil_threshold:
        return LanguageTag(Language.TAMIL, fraction)
    if c["cjk"] and c["cjk"] >= c["latin"]:
        return LanguageTag(Language.CHINESE, fraction)
    if c["latin"]:
        return LanguageTag(_latin_language(text), fraction)
    return LanguageTag(Language.UNKNOWN, fraction)
