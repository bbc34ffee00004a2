import httpx
import pytest

from conftest import solid_meme
from memescreen.backends import HttpCaptioner, MockCaptioner
from memescreen.config import AppConfig, apply_env, build_backends, env_keys, load_config, parse_config
from memescreen.core import Language, LanguageTag
from memescreen.errors import BackendUnavailable, ConfigError
from memescreen.pipeline import score_one


def test_empty_config_is_all_mock():
    cfg = load_config(None, environ={})
    assert cfg.scorer.temperature == 1.0
    assert cfg.ocr.confidence_threshold == 0.9
    assert cfg.language.tamil_threshold == 0.30
    assert cfg.scorer.decision_threshold == 0.5
    b = cfg.build_backends()
    assert isinstance(b.captioner, MockCaptioner)
    assert 0.0 <= score_one(solid_meme("x"), b, cfg.pipeline_config()).score.probability <= 1.0


def test_yaml_round_trip(tmp_path):
    cfg = parse_config("scorer: {temperature: 2.5}\nocr: {confidence_threshold: 0.8}\nparallelism: 6\n")
    path = tmp_path / "c.yaml"
    path.write_text(cfg.to_yaml())
    again = load_config(path, environ={})
    assert again == cfg
    assert again.scorer.temperature == 2.5 and again.parallelism == 6


def test_env_override(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("scorer: {temperature: 2.0}\n")
    env = {"OSPC_SCORER_TEMPERATURE": "0.5", "OSPC_PARALLELISM": "3"}
    cfg = load_config(path, environ=env)
    assert cfg.scorer.temperature == 0.5 and cfg.parallelism == 3


def test_env_backend_override():
    env = {"OSPC_BACKENDS_CAPTIONER_KIND": "http", "OSPC_BACKENDS_CAPTIONER_ENDPOINT": "http://x.test/c"}
    cfg = load_config(None, environ=env)
    assert cfg.backends["captioner"].kind == "http"
    assert isinstance(cfg.build_backends().captioner, HttpCaptioner)


def test_env_keys_cover_sections():
    keys = env_keys()
    assert "OSPC_OCR_CONFIDENCE_THRESHOLD" in keys
    assert "OSPC_LANGUAGE_TAMIL_THRESHOLD" in keys
    assert apply_env({"a": 1}, {}) == {"a": 1}


@pytest.mark.parametrize(
    "text",
    [
        "bogus: 1\n",
        "scorer: {temp: 1}\n",
        "scorer: {temperature: 0}\n",
        "scorer: {temperature: abc}\n",
        "ocr: {confidence_threshold: 1.5}\n",
        "language: {tamil_threshold: 0}\n",
        "parallelism: 0\n",
        "backends: {captioner: {kind: http}}\n",
        "backends: {captioner: {kind: grpc}}\n",
        "backends: {painter: {kind: mock}}\n",
        "prompt: {template_path: /nonexistent/t.txt}\n",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_bad_template_file(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("no placeholders")
    with pytest.raises(ConfigError):
        parse_config(f"prompt: {{template_path: {p}}}\n")


def test_custom_template_used(tmp_path):
    p = tmp_path / "t.txt"
    p.write_text("C={caption} T={text}")
    cfg = parse_config(f"prompt: {{template_path: {p}}}\n")
    assert cfg.template().body == "C={caption} T={text}"


def test_mock_options():
    cfg = parse_config(
        """
backends:
  captioner: {kind: mock, options: {table: {m1: a photo of a cat}}}
  ocr_primary: {kind: mock, options: {script: {m1: [HELLO, 0.95]}}}
  chat_llm: {kind: mock, options: {scripted: {"Yes": 2.0, "No": 0.0}}}
  translator: {kind: mock, options: {fail: BACKEND_UNAVAILABLE}}
"""
    )
    b = cfg.build_backends()
    r = score_one(solid_meme("m1"), b, cfg.pipeline_config())
    assert r.caption.text == "a photo of a cat" and r.ocr.text == "HELLO"
    assert r.score.probability == pytest.approx(0.880797, abs=1e-6)
    with pytest.raises(BackendUnavailable):
        b.translator.translate("வணக்கம்", LanguageTag(Language.TAMIL, 1.0))


def test_http_backends_use_transport():
    cfg = parse_config("backends: {captioner: {kind: http, endpoint: 'http://c.test/x', retries: 2}}\n")
    calls = []

    def reply(req):
        calls.append(req)
        return httpx.Response(200, json={"caption": "hi"})

    b = build_backends(cfg, transport=httpx.MockTransport(reply))
    assert b.captioner.caption(solid_meme("q")).text == "hi"
    assert b.captioner.descriptor.timeout == cfg.timeouts.caption


def test_annotator_must_be_mock():
    cfg = parse_config("backends: {vision_annotator: {kind: http, endpoint: 'http://a.test'}}\n")
    with pytest.raises(ConfigError):
        cfg.build_backends()


def test_defaults_object():
    assert AppConfig().validate().parallelism == 4
