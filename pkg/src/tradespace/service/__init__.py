"""HTTP service: configuration, durable session store, FastAPI app."""

from .app import create_app
from .config import AppConfig, PersistenceConfig, ProviderConfig, ServerConfig, load_config
from .store import SessionStore

__all__ = [
    "AppConfig",
    "PersistenceConfig",
    "ProviderConfig",
    "ServerConfig",
    "SessionStore",
    "create_app",
    "load_config",
]
