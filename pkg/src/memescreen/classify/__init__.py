from .language import DEFAULT_TAMIL_THRESHOLD, detect_language, script_counts
from .prompt import TAXONOMY, PromptTemplate, build_prompt, load_template
from .scoring import (
    DEFAULT_TEMPERATURE,
    Classification,
    ClassifyConfig,
    classify_meme,
    harm_probability,
)
