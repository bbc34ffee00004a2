from .backgrounds import Background, HttpBackgroundProvider, ProceduralProvider, generate_backgrounds
from .distill import (
    ChatExample,
    annotate_memes,
    build_distill_dataset,
    format_answer,
    read_verdicts,
    write_chat_jsonl,
)
from .fonts import SYNTH_LANGUAGES, FontRegistry, FontSpec, default_registry
from .ocr_dataset import MANIFEST_NAME, Manifest, build_ocr_dataset, read_corpus, read_manifest, sample_seed
from .stamp import MIN_CONTRAST, Placement, SynthSample, ink_box, luminance, region_mean, stamp_text


def bundled_corpora() -> dict:
    """Small sample corpora shipped with the package, one per language."""
    from importlib import resources
    from pathlib import Path

    base = Path(str(resources.files("memescreen").joinpath("data/corpora")))
    return {lang: base / f"{lang.value.lower()}.txt" for lang in SYNTH_LANGUAGES}
