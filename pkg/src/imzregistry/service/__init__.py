from .app import build_central_from_config, create_app

__all__ = ["create_app", "build_central_from_config"]
