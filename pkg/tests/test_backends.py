import threading

import pytest

from conftest import solid_meme
from memescreen.backends import (
    DEFAULT_TRIGGER_WORDS,
    MockAnnotator,
    MockCaptioner,
    MockChatLLM,
    MockOcrEngine,
    MockTranslator,
)
from memescreen.backends.base import AnnotatorVerdict, NextTokenLogits
from memescreen.classify.prompt import PromptTemplate, build_prompt
from memescreen.core import Engine, Language, LanguageTag
from memescreen.errors import BackendUnavailable, InvalidCandidates, MalformedVerdict, PromptTooLong, UnsupportedSource

TAMIL = LanguageTag(Language.TAMIL, 1.0)


def test_mock_caption_deterministic(meme):
    cap = MockCaptioner()
    assert cap.caption(meme) == cap.caption(meme)
    assert MockCaptioner().caption(meme).text == cap.caption(meme).text


def test_mock_caption_table_by_hash(meme):
    cap = MockCaptioner({meme.content_hash: "a photo of a cat"})
    assert cap.caption(meme).text == "a photo of a cat"
    assert cap.caption(solid_meme("other")).text == "a photo of a cat"


def test_mock_caption_table_by_id(meme):
    cap = MockCaptioner({"m1": "by id"})
    assert cap.caption(meme).text == "by id"


def test_mock_caption_scripted_failure(meme):
    cap = MockCaptioner(errors={"m1": BackendUnavailable("down")})
    with pytest.raises(BackendUnavailable):
        cap.caption(meme)


def test_mock_ocr_scripted(meme):
    ocr = MockOcrEngine({"m1": ("HELLO", 0.95)})
    out = ocr.recognize(meme, Engine.PRIMARY)
    assert (out.text, out.confidence, out.engine) == ("HELLO", 0.95, Engine.PRIMARY)


def test_mock_ocr_unscripted_is_empty(meme):
    out = MockOcrEngine().recognize(meme, Engine.FALLBACK)
    assert (out.text, out.confidence, out.engine) == ("", 0.0, Engine.FALLBACK)


def test_mock_ocr_fallback_tamil(meme):
    out = MockOcrEngine({"m1": ("வணக்கம்", 0.7)}).recognize(meme, Engine.FALLBACK)
    assert (out.text, out.confidence, out.engine) == ("வணக்கம்", 0.7, Engine.FALLBACK)


def test_mock_ocr_span_entries(meme):
    ocr = MockOcrEngine(
        {"m1": {"spans": [{"text": "b", "conf": 0.6, "box": [0, 6, 4, 4]}, {"text": "a", "conf": 0.9, "box": [0, 0, 4, 4]}]}}
    )
    out = ocr.recognize(meme, Engine.PRIMARY)
    assert out.text == "a b" and out.confidence == 0.6


def test_mock_translate():
    tr = MockTranslator({"வணக்கம்": "hello"})
    assert tr.translate("வணக்கம்", TAMIL) == "hello"
    assert tr.translate("", TAMIL) == ""
    with pytest.raises(UnsupportedSource):
        tr.translate("hi", LanguageTag(Language.ENGLISH, 0.0))


def test_mock_translate_default_mapping_is_reversible():
    tr = MockTranslator()
    for text in ("நாளை சந்திப்போம்", "mixed வணக்கம் \\u0bb5 text"):
        out = tr.translate(text, TAMIL)
        assert out.isascii()
        assert MockTranslator.reverse(out) == text


def test_mock_logits_scripted():
    llm = MockChatLLM(scripted={"Yes": 2.0, "No": 0.0})
    assert llm.next_token_logits("anything", ["Yes", "No"]).candidates == {"Yes": 2.0, "No": 0.0}


def test_mock_logits_rejects_duplicate_candidates():
    with pytest.raises(InvalidCandidates):
        MockChatLLM().next_token_logits("p", ["Yes", "Yes"])
    with pytest.raises(InvalidCandidates):
        MockChatLLM().next_token_logits("p", [])


def test_mock_logits_exact_keys():
    llm = MockChatLLM(scripted={"Yes": 1.0, "No": 0.0, "Maybe": 3.0})
    out = llm.next_token_logits("p", ["No", "Yes"])
    assert set(out.candidates) == {"Yes", "No"}
    other = llm.next_token_logits("p", ["A", "B", "Yes"])
    assert set(other.candidates) == {"A", "B", "Yes"}


def test_default_rule_trigger_fraction():
    llm = MockChatLLM()
    base = build_prompt("a photo", "have a nice day")
    out = llm.next_token_logits(base, ["Yes", "No"])
    assert out["Yes"] == -2.0 and out["No"] == 2.0
    two = build_prompt("a photo", "you are lazy and stupid")
    out = llm.next_token_logits(two, ["Yes", "No"])
    f = 2 / len(DEFAULT_TRIGGER_WORDS)
    assert out["Yes"] == pytest.approx(4 * f - 2) and out["No"] == pytest.approx(-(4 * f - 2))


def test_trigger_words_absent_from_template():
    body = PromptTemplate.default().body.lower()
    assert MockChatLLM().trigger_fraction(body) == 0.0
    for w in DEFAULT_TRIGGER_WORDS:
        assert w not in body.split()


def test_other_candidates_seeded():
    a = MockChatLLM(seed=1).next_token_logits("p", ["x", "y"])
    b = MockChatLLM(seed=1).next_token_logits("p", ["x", "y"])
    c = MockChatLLM(seed=2).next_token_logits("p", ["x", "y"])
    assert a == b and a != c
    assert all(-2 <= v <= 2 for v in a.candidates.values())


def test_prompt_too_long():
    with pytest.raises(PromptTooLong):
        MockChatLLM(max_prompt_chars=10).next_token_logits("x" * 11, ["Yes", "No"])


def test_next_token_logits_must_be_finite():
    with pytest.raises(ValueError):
        NextTokenLogits({"Yes": float("nan")})


def test_mocks_pure_across_threads(meme):
    llm = MockChatLLM()
    cap = MockCaptioner()
    prompts = [build_prompt(f"cap {i}", "lazy text" if i % 2 else "fine") for i in range(20)]
    expected = [llm.next_token_logits(p, ["Yes", "No"]) for p in prompts]
    results = {}

    def work(k):
        results[k] = ([llm.next_token_logits(p, ["Yes", "No"]) for p in prompts], cap.caption(meme))

    threads = [threading.Thread(target=work, args=(k,)) for k in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    for logits, caption in results.values():
        assert logits == expected
        assert caption == cap.caption(meme)
    assert llm.calls == 20 + 8 * 20


def test_annotator():
    m = solid_meme("a1")
    ann = MockAnnotator({"a1": ("Yes", "It mocks a religion.")})
    assert ann.annotate(m) == AnnotatorVerdict("Yes", "It mocks a religion.")
    assert ann.annotate(solid_meme("zz", color=(1, 1, 1))).verdict == "No"
    with pytest.raises(MalformedVerdict):
        AnnotatorVerdict("Maybe")
