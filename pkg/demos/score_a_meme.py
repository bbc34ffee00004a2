"""
Scoring a meme end to end
=========================

Caption, OCR, optional translation and the Yes/No logit score, all on the
offline mock backends.
"""

from PIL import Image, ImageDraw

import memescreen as ms
from memescreen.backends import mock_backends

# draw a small meme: white text on a dark band
img = Image.new("RGB", (320, 200), (40, 90, 160))
ImageDraw.Draw(img).rectangle((0, 150, 320, 200), fill=(20, 20, 20))
meme = ms.MemeInput.from_pil(img, "demo-1")
print(meme.id, meme.width, meme.height, meme.content_hash[:12])

# the mocks are scripted per meme id: what the captioner "sees" and what
# the OCR engines "read"
backends = mock_backends(
    captions={"demo-1": "a photo of a man at a market"},
    primary={"demo-1": ("go back home you lazy dirty useless vermin, stupid and disgusting", 0.97)},
)
result = ms.score_one(meme, backends)
print(result.caption.text)
print(result.ocr.text, result.ocr.engine.value, result.ocr.confidence)
print("P(harmful) = %.4f  label = %d" % (result.score.probability, result.label))

# the same meme with Tamil text goes through the translator first
tamil = mock_backends(
    primary={"demo-1": ("நீ ஒரு சோம்பேறி", 0.95)},
    translations={"நீ ஒரு சோம்பேறி": "you are lazy"},
)
r2 = ms.score_one(meme, tamil)
print(r2.language.value, "->", r2.translated_text, "%.4f" % r2.score.probability)
print("translator calls:", tamil.translator.calls)

# the prompt the LLM actually saw
from memescreen.classify import build_prompt
print(build_prompt(r2.caption.text, r2.translated_text)[-160:])

# temperature flattens the score toward 0.5
from memescreen.core import yes_probability

for t in (0.5, 1.0, 2.0, 8.0):
    print(t, yes_probability(2.0, 0.0, t))
