from .config import config, validate_config
