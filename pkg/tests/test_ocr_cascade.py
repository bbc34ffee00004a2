import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import solid_meme
from memescreen.backends import MockOcrEngine
from memescreen.core import Engine
from memescreen.errors import BackendTimeout, BackendUnavailable
from memescreen.ocr_cascade import CascadeConfig, cascade_recognize, needs_fallback


def _engines(primary, fallback=("fb", 0.7), **kw):
    p = MockOcrEngine({"m1": primary}, name="p", **kw.get("p", {}))
    f = MockOcrEngine({"m1": fallback} if fallback else None, name="f", **kw.get("f", {}))
    return p, f


def test_high_confidence_keeps_primary(meme):
    p, f = _engines(("HELLO", 0.95))
    out = cascade_recognize(meme, p, f)
    assert (out.text, out.engine) == ("HELLO", Engine.PRIMARY)
    assert (p.calls, f.calls) == (1, 0)


def test_low_confidence_uses_fallback(meme):
    p, f = _engines(("HELL0", 0.85), ("HELLO", 0.70))
    out = cascade_recognize(meme, p, f)
    assert (out.text, out.confidence, out.engine) == ("HELLO", 0.70, Engine.FALLBACK)
    assert (p.calls, f.calls) == (1, 1)


def test_boundary_is_strict(meme):
    p, f = _engines(("x", 0.90))
    assert cascade_recognize(meme, p, f).engine is Engine.FALLBACK
    assert f.calls == 1


def test_fallback_result_used_even_if_worse(meme):
    p, f = _engines(("x", 0.5), ("", 0.0))
    out = cascade_recognize(meme, p, f)
    assert (out.text, out.engine) == ("", Engine.FALLBACK)


def test_blank_image_consults_fallback():
    m = solid_meme("blank", color=(255, 255, 255))
    p, f = MockOcrEngine(), MockOcrEngine()
    out = cascade_recognize(m, p, f)
    assert (out.text, out.confidence, out.engine) == ("", 0.0, Engine.FALLBACK)
    assert (p.calls, f.calls) == (1, 1)


def test_threshold_extremes(meme):
    p, f = _engines(("x", 0.01))
    assert cascade_recognize(meme, p, f, CascadeConfig(0.0)).engine is Engine.PRIMARY
    p, f = _engines(("x", 0.0))
    assert cascade_recognize(meme, p, f, CascadeConfig(0.0)).engine is Engine.FALLBACK
    p, f = _engines(("x", 1.0))
    assert cascade_recognize(meme, p, f, CascadeConfig(1.0)).engine is Engine.FALLBACK


def test_primary_failure_propagates(meme):
    p, f = _engines(("x", 0.5), p={"errors": {"*": BackendUnavailable("down")}})
    with pytest.raises(BackendUnavailable):
        cascade_recognize(meme, p, f)
    assert f.calls == 0


def test_fallback_failure_degrades_when_primary_has_text(meme):
    p, f = _engines(("partial", 0.4), f={"errors": {"*": BackendTimeout("slow")}})
    out = cascade_recognize(meme, p, f)
    assert (out.text, out.engine, out.degraded) == ("partial", Engine.PRIMARY, True)


def test_fallback_failure_propagates_without_primary_text(meme):
    p, f = _engines(("", 0.0), f={"errors": {"*": BackendUnavailable("down")}})
    with pytest.raises(BackendUnavailable):
        cascade_recognize(meme, p, f)


def test_config_bounds():
    with pytest.raises(ValueError):
        CascadeConfig(1.5)


@settings(max_examples=300, deadline=None)
@given(conf=st.floats(0, 1), thr=st.floats(0, 1))
def test_routing_property(conf, thr):
    meme = solid_meme("m1")
    p, f = _engines(("t", conf))
    out = cascade_recognize(meme, p, f, CascadeConfig(thr))
    assert f.calls == (1 if conf <= thr else 0)
    assert p.calls == 1
    assert out.engine is (Engine.FALLBACK if conf <= thr else Engine.PRIMARY)
    assert needs_fallback(conf, thr) == (conf <= thr)


def test_routing_on_discrete_grid():
    rng = random.Random(3)
    meme = solid_meme("m1")
    for _ in range(200):
        thr = rng.choice([0.0, 0.5, 0.9, 1.0])
        conf = rng.choice([0.0, thr, 0.5, 0.9, 1.0])
        p, f = _engines(("t", conf))
        cascade_recognize(meme, p, f, CascadeConfig(thr))
        assert p.calls + f.calls in (1, 2)
        assert f.calls == int(conf <= thr)
