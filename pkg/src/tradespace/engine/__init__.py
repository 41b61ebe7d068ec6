from .engine import CorrectionExample, EngineConfig, IdeationEngine
from .parsing import (
    DimensionPairsSchema,
    DraftListSchema,
    DraftSchema,
    EvaluationSchema,
    IdeaDraft,
    extract_payload,
    parse_response,
)
from .providers import HttpProvider, Provider, ProviderRequest, ProviderResponse, StubProvider, build_provider
from .templates import TEMPLATE_NAMES, PromptTemplate, TemplateStore, default_prompt_dir

__all__ = [
    "CorrectionExample",
    "EngineConfig",
    "IdeationEngine",
    "DimensionPairsSchema",
    "DraftListSchema",
    "DraftSchema",
    "EvaluationSchema",
    "IdeaDraft",
    "extract_payload",
    "parse_response",
    "HttpProvider",
    "Provider",
    "ProviderRequest",
    "ProviderResponse",
    "StubProvider",
    "build_provider",
    "TEMPLATE_NAMES",
    "PromptTemplate",
    "TemplateStore",
    "default_prompt_dir",
]
