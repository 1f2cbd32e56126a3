import logging
from pathlib import Path
from typing import Optional

from rich.logging import RichHandler

logger = logging.getLogger("redps")

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"


def configure(log_level: str = "INFO", log_file: Optional[Path] = None):
    """
    Attach a rich console handler (and optionally a file handler) to the redps logger.

    Calling it again replaces the handlers, so repeated CLI invocations in one process
    do not duplicate output. The root logger is left alone.
    """
    log_level_value = getattr(logging, log_level.upper(), logging.INFO)

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    console = RichHandler(rich_tracebacks=True, show_path=False)
    console.setFormatter(logging.Formatter("%(message)s", datefmt="[%X]"))
    logger.addHandler(console)
    logger.setLevel(log_level_value)
    logger.propagate = False

    if log_file:
        log_file = Path(log_file)
        log_file.parent.mkdir(parents=True, exist_ok=True)

        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(file_handler)

    logger.debug(f"Logger set up with log level: {log_level_value}({log_level})")
    if log_file:
        logger.debug(f"Log file: {log_file}")
