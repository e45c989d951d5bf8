from .app import AppState, create_app
from .config import ServiceConfig

__all__ = ["AppState", "ServiceConfig", "create_app"]
