"""A module configuring the toolkit's loggers."""

import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str = "INFO") -> logging.Logger:
    """A function attaching a single stream handler to the package logger.

    Calling it repeatedly only updates the level.

    Args:
        level (str): The logging level name.

    Returns:
        logging.Logger: The `emitterkit` logger.
    """

    logger = logging.getLogger("emitterkit")
    logger.setLevel(level.upper())

    if not any(getattr(h, "_emitterkit", False) for h in logger.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._emitterkit = True  # type: ignore[attr-defined]
        logger.addHandler(handler)

    return logger
