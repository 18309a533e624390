#!/usr/bin/env python3
"""
Application factory for shearlet-spaces.
Provides a create_app() function that loads the environment, configures
logging and returns a validated RunConfig.
"""
import os
import logging
from typing import Optional

from dotenv import load_dotenv

from app.config import RunConfig, from_env, load_config_file

logger = logging.getLogger(__name__)

# Third-party loggers that are too chatty at INFO
NOISY_LOGGERS = ('matplotlib', 'numexpr', 'urllib3')


def create_app(overrides: Optional[dict] = None, config_path: Optional[str] = None,
               log_level: Optional[str] = None) -> RunConfig:
    """
    Application factory: environment, then flags, then the config file.

    Args:
        overrides: Config fields given on the command line (None values are ignored)
        config_path: Optional JSON config file; its keys override the flags
        log_level: Overrides LOG_LEVEL

    Returns:
        RunConfig: validated configuration

    Raises:
        ValueError: If the configuration is invalid
        OSError: If the config file cannot be read
    """
    # Load environment variables from .env file (for local development)
    load_dotenv()
    configure_logging(log_level)

    config = from_env(RunConfig())
    config = config.updated(**(overrides or {}))
    if config_path:
        config = load_config_file(config_path, config)

    is_valid, error = config.validate()
    if not is_valid:
        logger.error(f"Invalid configuration: {error}")
        raise ValueError(error)

    logger.debug(f"Configuration: {config.to_dict()}")
    return config


def configure_logging(level: Optional[str] = None):
    """
    Configure structured logging for the application.

    Args:
        level: Log level name; defaults to LOG_LEVEL or INFO
    """
    log_level = (level or os.environ.get('LOG_LEVEL', 'INFO')).upper()

    logging.basicConfig(
        level=getattr(logging, log_level, logging.INFO),
        format='%(asctime)s [%(levelname)s] %(name)s: %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    )
    logging.getLogger().setLevel(getattr(logging, log_level, logging.INFO))

    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)


# The CLI is only imported when first accessed, so `import app` stays light
def __getattr__(name):
    """
    Module-level __getattr__ for lazy access to the command-line runner.
    This allows 'from app import run' without importing the checks eagerly.
    """
    if name == 'run':
        from app.cli import run
        return run
    raise AttributeError(f"module '{__name__}' has no attribute '{name}'")
