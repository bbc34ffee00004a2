import json

import pytest
from PIL import Image

from memescreen.cli import main


def _img(path, color=(10, 20, 30)):
    Image.new("RGB", (16, 16), color).save(path)
    return path


def _cfg(tmp_path, body):
    p = tmp_path / "cfg.yaml"
    p.write_text(body)
    return str(p)


def test_score(tmp_path, capsys):
    img = _img(tmp_path / "meme.png")
    cfg = _cfg(tmp_path, 'backends: {chat_llm: {kind: mock, options: {scripted: {"Yes": 2.0, "No": 0.0}}}}\n')
    assert main(["score", "--image", str(img), "--config", cfg]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["id"] == "meme" and out["label"] == 1
    assert out["probability"] == pytest.approx(0.880797, abs=1e-6)
    assert set(out) == {"id", "probability", "label", "caption", "text", "language", "translated_text"}


def test_usage_errors(capsys):
    assert main([]) == 1
    assert main(["score"]) == 1
    assert main(["frobnicate"]) == 1


def test_undecodable_is_runtime_error(tmp_path, capsys):
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"")
    assert main(["score", "--image", str(bad)]) == 2
    assert "UNDECODABLE_IMAGE" in capsys.readouterr().err


def test_batch_and_eval(tmp_path, capsys):
    d = tmp_path / "imgs"
    d.mkdir()
    for i in range(4):
        _img(d / f"m{i}.png", (i * 40, 0, 0))
    out = tmp_path / "p.csv"
    assert main(["batch", "--images", str(d), "--out", str(out), "--parallelism", "2"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "id,probability,label" and len(lines) == 5
    labels = tmp_path / "l.csv"
    labels.write_text("id,label\nm0,1\nm1,0\nm2,1\nm3,0\n")
    capsys.readouterr()
    assert main(["eval", "--preds", str(out), "--labels", str(labels), "--json", str(tmp_path / "r.json")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert 0.0 <= report["auroc"] <= 1.0 and report["n_pos"] == 2
    assert json.loads((tmp_path / "r.json").read_text()) == report


def test_batch_failure_exit_code(tmp_path, capsys):
    d = tmp_path / "imgs"
    d.mkdir()
    _img(d / "ok.png")
    _img(d / "bad.png", (1, 1, 1))
    cfg = _cfg(tmp_path, "backends: {captioner: {kind: mock, options: {fail_on: {bad: BACKEND_UNAVAILABLE}}}}\n")
    fails = tmp_path / "f.jsonl"
    out = tmp_path / "p.csv"
    assert main(["batch", "--images", str(d), "--out", str(out), "--failures", str(fails), "--config", cfg]) == 2
    assert len(out.read_text().splitlines()) == 2
    rec = json.loads(fails.read_text())
    assert rec["id"] == "bad" and rec["stage"] == "CAPTION"


def test_eval_degenerate(tmp_path, capsys):
    p = tmp_path / "p.csv"
    p.write_text("id,probability,label\na,0.9,1\nb,0.8,1\n")
    l = tmp_path / "l.csv"
    l.write_text("id,label\na,1\nb,1\n")
    assert main(["eval", "--preds", str(p), "--labels", str(l)]) == 2
    assert "DEGENERATE_LABELS" in capsys.readouterr().err


def test_sweep(tmp_path, capsys):
    lg = tmp_path / "lg.csv"
    lg.write_text("id,logit_yes,logit_no\na,2,0\nb,0,2\n")
    l = tmp_path / "l.csv"
    l.write_text("id,label\na,1\nb,0\n")
    assert main(["sweep-temp", "--logits", str(lg), "--labels", str(l), "--grid", "0.5,1,2"]) == 0
    rows = json.loads(capsys.readouterr().out)
    assert [r["t"] for r in rows] == [0.5, 1.0, 2.0]
    assert all(r["auroc"] == 1.0 and r["accuracy"] == 1.0 for r in rows)
    assert main(["sweep-temp", "--logits", str(lg), "--labels", str(l), "--grid", "a,b"]) == 1


def test_gen_ocr_data(tmp_path, capsys):
    corpus = tmp_path / "en.txt"
    corpus.write_text("hello world\n")
    cfg = _cfg(tmp_path, "datagen: {image_width: 128, image_height: 64}\n")
    out = tmp_path / "ds"
    args = ["gen-ocr-data", "--out", str(out), "--n", "2", "--corpus", f"english={corpus}", "--config", cfg]
    assert main(args) == 0
    assert json.loads(capsys.readouterr().out)["samples"] == 2
    assert len((out / "manifest.jsonl").read_text().splitlines()) == 2
    assert main(["gen-ocr-data", "--out", str(out), "--n", "1", "--corpus", "klingon=x"]) == 1


def test_gen_distill_data(tmp_path, capsys):
    d = tmp_path / "imgs"
    d.mkdir()
    _img(d / "a.png")
    _img(d / "b.png", (90, 90, 90))
    v = tmp_path / "v.jsonl"
    v.write_text('{"id": "a", "verdict": "Yes", "rationale": "r"}\n{"id": "b", "verdict": "No"}\n')
    out = tmp_path / "chat.jsonl"
    assert main(["gen-distill-data", "--images", str(d), "--verdicts", str(v), "--out", str(out)]) == 0
    recs = [json.loads(x) for x in out.read_text().splitlines()]
    assert [r["messages"][1]["content"] for r in recs] == ["Yes\nr", "No"]
    v.write_text('{"id": "a", "verdict": "Perhaps"}\n{"id": "b", "verdict": "No"}\n')
    assert main(["gen-distill-data", "--images", str(d), "--verdicts", str(v), "--out", str(out)]) == 2
    assert "MALFORMED_VERDICT" in capsys.readouterr().err


def test_bad_config(tmp_path, capsys):
    img = _img(tmp_path / "m.png")
    cfg = _cfg(tmp_path, "scorer: {temperature: -1}\n")
    assert main(["score", "--image", str(img), "--config", cfg]) == 2
