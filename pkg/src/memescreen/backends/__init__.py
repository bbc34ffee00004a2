from .base import (
    AnnotatorVerdict,
    BackendDescriptor,
    BackendSet,
    Captioner,
    ChatLLM,
    NextTokenLogits,
    OcrEngine,
    Role,
    Translator,
    VisionAnnotator,
    check_candidates,
)
from .http import HttpCaptioner, HttpChatLLM, HttpOcrEngine, HttpTranslator
from .mock import (
    DEFAULT_TRIGGER_WORDS,
    MockAnnotator,
    MockCaptioner,
    MockChatLLM,
    MockOcrEngine,
    MockTranslator,
    mock_backends,
)
