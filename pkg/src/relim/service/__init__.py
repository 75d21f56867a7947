from .app import create_app
from .sessions import SessionManager

__all__ = ["create_app", "SessionManager"]
