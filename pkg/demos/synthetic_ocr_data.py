"""
Rendering a synthetic OCR dataset
=================================

Corpus lines stamped onto backgrounds in four scripts, with a JSON-lines
manifest of what was drawn where.
"""

import json
import tempfile
from pathlib import Path

from PIL import Image

from memescreen.core import Language
from memescreen.datagen import ProceduralProvider, build_ocr_dataset, bundled_corpora, stamp_text
from memescreen.datagen.stamp import ink_box, luminance, region_mean

# one sample by hand
bg = ProceduralProvider((400, 160)).background(0, seed=1).image
s = stamp_text(bg, "நாளை சந்திப்போம்", Language.TAMIL, seed=11)
p = s.placement
print(p.font_id, p.size_pt, p.color_rgb, p.box)
print("ink", ink_box(bg, s.image))
print("contrast", abs(luminance(p.color_rgb) - luminance(region_mean(bg, p.box))))

# a small dataset from the bundled corpora
out = Path(tempfile.mkdtemp(prefix="ocr-demo-"))
manifest = build_ocr_dataset(bundled_corpora(), 5, out, seed=7, provider=ProceduralProvider((384, 256)))
print(len(manifest), "samples in", out)
for row in manifest.rows[::5]:
    print(json.dumps(row, ensure_ascii=False))

# same seed, same bytes
again = build_ocr_dataset(bundled_corpora(), 5, out / "again", seed=7, provider=ProceduralProvider((384, 256)))
print(all((out / r["image"]).read_bytes() == (out / "again" / r["image"]).read_bytes() for r in again.rows))

# a contact sheet of the first sample per language
thumbs = [Image.open(out / manifest.rows[i]["image"]).resize((192, 128)) for i in (0, 5, 10, 15)]
sheet = Image.new("RGB", (192 * 4, 128))
for k, t in enumerate(thumbs):
    sheet.paste(t, (192 * k, 0))
sheet.save(out / "sheet.png")
print(out / "sheet.png")
