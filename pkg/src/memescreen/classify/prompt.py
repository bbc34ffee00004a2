"""The bias-taxonomy prompt and placeholder substitution.

The default template ships as ``data/prompt_template.txt`` and is loaded
byte for byte; substitution touches nothing but the two placeholders.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple, Union

from ..errors import PlaceholderMissing

CAPTION = "{caption}"
TEXT = "{text}"

TAXONOMY = (
    "Racial Disparities",
    "Religious Beliefs and Practices",
    "Sexual Orientation",
    "Nationalistic Sentiments and Xenophobia",
    "Socio-Economic Divides",
    "Age-Related Biases",
    "Gender Discrimination",
    "Discrimination Based on Illnesses and Disabilities",
)


def _parse_taxonomy(body: str) -> Tuple[str, ...]:
    names = []
    for line in body.split("\n"):
        if CAPTION in line or TEXT in line:
            break
        name, sep, definition = line.partition(": ")
        if sep and name and definition:
            names.append(name)
    return tuple(names)


@dataclass(frozen=True)
class PromptTemplate:
    body: str
    taxonomy: Tuple[str, ...]

    def __post_init__(self):
        for ph in (CAPTION, TEXT):
            n = self.body.count(ph)
            if n != 1:
                raise PlaceholderMissing(f"template must contain {ph} exactly once, found {n}")

    @classmethod
    def from_text(cls, body: str) -> "PromptTemplate":
        return cls(body=body, taxonomy=_parse_taxonomy(body))

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "PromptTemplate":
        # newline="" keeps the bytes as written, CRLF included
        with open(path, encoding="utf-8", newline="") as fh:
            return cls.from_text(fh.read())

    @classmethod
    def default(cls) -> "PromptTemplate":
        return _DEFAULT


def _load_default() -> PromptTemplate:
    raw = resources.files("memescreen").joinpath("data/prompt_template.txt").read_bytes()
    tpl = PromptTemplate.from_text(raw.decode("utf-8"))
    if tpl.taxonomy != TAXONOMY:
        raise RuntimeError(f"bundled template taxonomy is out of order: {tpl.taxonomy}")
    return tpl


_DEFAULT = _load_default()


def load_template(path: Optional[Union[str, Path]] = None) -> PromptTemplate:
    return PromptTemplate.default() if path is None else PromptTemplate.from_file(path)


def build_prompt(caption: str, text: str, template: Optional[PromptTemplate] = None) -> str:
    """Substitute ``caption`` and ``text`` into the template.

    Substitution is positional, so braces or placeholder look-alikes inside
    the inserted strings are never expanded.
    """
    tpl = template if template is not None else _DEFAULT
    body = tpl.body
    if body.count(CAPTION) != 1 or body.count(TEXT) != 1:
        raise PlaceholderMissing("template must contain {caption} and {text} exactly once")
    slots = sorted([(body.index(CAPTION), CAPTION, caption), (body.index(TEXT), TEXT, text)])
    out, pos = [], 0
    for idx, ph, value in slots:
        out.append(body[pos:idx])
        out.append(value)
        pos = idx + len(ph)
    out.append(body[pos:])
    return "".join(out)
