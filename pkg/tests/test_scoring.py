import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import eq1_mp

from memescreen.backends import MockChatLLM, MockTranslator
from memescreen.backends.base import NextTokenLogits
from memescreen.classify import ClassifyConfig, classify_meme, harm_probability
from memescreen.core import CaptionResult, Engine, Language, OcrOutcome, OcrSpan, Stage, yes_probability
from memescreen.errors import BackendUnavailable, MissingCandidate, NonpositiveTemperature, StageFailure

# exp(2)/(exp(2)+1) and exp(1)/(exp(1)+1), evaluated at 60 digits
P_2_0_T1 = 0.88079707797788244
P_2_0_T2 = 0.73105857863000488


def _logits(y, n):
    return NextTokenLogits({"Yes": y, "No": n})


def test_frozen_values():
    assert harm_probability(_logits(2.0, 0.0), 1.0).probability == pytest.approx(P_2_0_T1, abs=1e-15)
    assert harm_probability(_logits(2.0, 0.0), 2.0).probability == pytest.approx(P_2_0_T2, abs=1e-15)
    assert harm_probability(_logits(1.0, 1.0), 1.0).probability == 0.5


def test_oracle_agrees_with_frozen_values():
    assert eq1_mp(2, 0, 1) == pytest.approx(P_2_0_T1, abs=1e-16)
    assert eq1_mp(2, 0, 2) == pytest.approx(P_2_0_T2, abs=1e-16)


def test_no_overflow_at_extremes():
    assert harm_probability(_logits(1e4, -1e4), 1e-6).probability == 1.0
    assert harm_probability(_logits(-1e4, 1e4), 1e-6).probability == 0.0
    assert harm_probability(_logits(1e4, 1e4 - 1), 1.0).probability == pytest.approx(eq1_mp(1e4, 1e4 - 1, 1.0))


def test_errors():
    with pytest.raises(MissingCandidate):
        harm_probability(NextTokenLogits({"Yes": 1.0}))
    with pytest.raises(NonpositiveTemperature):
        harm_probability(_logits(1.0, 0.0), 0.0)
    with pytest.raises(NonpositiveTemperature):
        harm_probability(_logits(1.0, 0.0), -1.0)


logit = st.floats(-1e4, 1e4)
temp = st.floats(1e-6, 1e6)


@settings(max_examples=300, deadline=None)
@given(logit, logit, temp)
def test_matches_oracle(y, n, t):
    assert abs(yes_probability(y, n, t) - eq1_mp(y, n, t)) <= 1e-9


@settings(max_examples=300, deadline=None)
@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(0.1, 100), st.floats(-1e3, 1e3))
def test_shift_invariance(y, n, t, c):
    a = yes_probability(y, n, t)
    b = yes_probability(y + c, n + c, t)
    # the shifted inputs are themselves rounded; compare to the exact shifted oracle
    assert abs(b - eq1_mp(y + c, n + c, t)) <= 1e-12
    assert abs(a - b) <= 1e-12 + abs((y + c - (n + c)) - (y - n)) / t


@settings(max_examples=300, deadline=None)
@given(st.floats(-30, 30), st.floats(-30, 30), st.floats(0.5, 10))
def test_monotone_in_margin(y, n, t):
    d = 0.5
    assert yes_probability(y + d, n, t) > yes_probability(y, n, t) or yes_probability(y, n, t) == 1.0
    assert yes_probability(y + d, n, t) >= yes_probability(y, n, t)


@settings(max_examples=200, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_temperature_limits(y, n):
    hot = yes_probability(y, n, 1e6)
    assert abs(hot - 0.5) < 1e-4
    cold = yes_probability(y, n, 1e-6)
    if y - n > 1e-3:
        assert cold == pytest.approx(1.0)
    elif n - y > 1e-3:
        assert cold == pytest.approx(0.0)


def _ocr(text, conf=0.95):
    spans = (OcrSpan(text, (0, 0, 1, 1), conf),) if text else ()
    return OcrOutcome(text, conf if text else 0.0, Engine.PRIMARY, spans)


CAP = CaptionResult("a photo of a man", "mock")


def test_tamil_routing_translates_once():
    tr = MockTranslator({"நீ ஒரு முட்டாள்": "you are an idiot"})
    llm = MockChatLLM()
    cls = classify_meme(CAP, _ocr("நீ ஒரு முட்டாள்"), tr, llm)
    assert tr.calls == 1
    assert cls.language.value is Language.TAMIL
    assert cls.translated_text == "you are an idiot"
    assert '"you are an idiot"' in cls.prompt


def test_english_passes_through():
    tr = MockTranslator()
    cls = classify_meme(CAP, _ocr("Hello there"), tr, MockChatLLM())
    assert tr.calls == 0
    assert cls.translated_text is None
    assert '"Hello there"' in cls.prompt


def test_chinese_passes_through():
    tr = MockTranslator()
    cls = classify_meme(CAP, _ocr("今天天气很好"), tr, MockChatLLM())
    assert tr.calls == 0 and cls.language.value is Language.CHINESE


def test_symmetric_logits_full_path():
    cls = classify_meme(CAP, _ocr("x"), MockTranslator(), MockChatLLM(scripted={"Yes": 0.0, "No": 0.0}))
    assert cls.score.probability == 0.5


def test_temperature_from_config():
    cfg = ClassifyConfig(temperature=2.0)
    cls = classify_meme(CAP, _ocr("x"), MockTranslator(), MockChatLLM(scripted={"Yes": 2.0, "No": 0.0}), cfg)
    assert cls.score.probability == pytest.approx(P_2_0_T2, abs=1e-15)
    assert cls.score.temperature == 2.0


def test_stage_attribution():
    bad_tr = MockTranslator(errors={"*": BackendUnavailable("down")})
    with pytest.raises(StageFailure) as exc:
        classify_meme(CAP, _ocr("வணக்கம்"), bad_tr, MockChatLLM())
    assert exc.value.stage is Stage.TRANSLATE
    bad_llm = MockChatLLM(errors={"*": BackendUnavailable("down")})
    with pytest.raises(StageFailure) as exc:
        classify_meme(CAP, _ocr("hi"), MockTranslator(), bad_llm)
    assert exc.value.stage is Stage.SCORE and exc.value.cause_code == "BACKEND_UNAVAILABLE"


def test_missing_candidate_is_score_failure():
    llm = MockChatLLM(table={})
    llm_bad = type("L", (), {"next_token_logits": lambda self, p, c: NextTokenLogits({"Yes": 1.0}), "ping": lambda self: True})()
    with pytest.raises(StageFailure) as exc:
        classify_meme(CAP, _ocr("hi"), MockTranslator(), llm_bad)
    assert exc.value.cause_code == "MISSING_CANDIDATE"
    assert llm.calls == 0


def test_logistic_form_is_exact_softmax():
    for y, n, t in [(0.3, -0.2, 0.7), (5.0, 4.0, 3.0), (-2.0, 1.0, 0.25)]:
        a, b = math.exp(y / t), math.exp(n / t)
        assert yes_probability(y, n, t) == pytest.approx(a / (a + b), rel=1e-14)
