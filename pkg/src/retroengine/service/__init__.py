from .app import SessionRegistry, create_app, create_app_from_files

__all__ = ["SessionRegistry", "create_app", "create_app_from_files"]
