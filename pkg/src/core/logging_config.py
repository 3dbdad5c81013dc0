import logging
from datetime import datetime
from typing import Optional

import coloredlogs

from .config import LOG_DIR, LOG_FORMAT, LOG_LEVEL

LEVEL_STYLES = {
    "info": {"color": "magenta"},
    "debug": {"color": "green"},
    "warning": {"color": "yellow"},
    "error": {"color": "red"},
    "critical": {"color": "red", "bold": True},
}


def setup_logging(level: Optional[str] = None, log_to_file: bool = True) -> Optional[str]:
    """Configures logging, avoiding redundant configuration on repeated calls.

    Args:
        level: Log level name. Defaults to ``LME_LOG_LEVEL`` or INFO.
        log_to_file: Also write to ``logs/lme_run_<timestamp>.log``.

    Returns:
        The log file path, or None when file logging is off.
    """
    level = (level or LOG_LEVEL).upper()
    root_logger = logging.getLogger()
    formatter = logging.Formatter(LOG_FORMAT)

    existing_files = [h for h in root_logger.handlers if isinstance(h, logging.FileHandler)]
    if root_logger.hasHandlers() and getattr(root_logger, "_lme_configured", False):
        root_logger.setLevel(level)
        if log_to_file and not existing_files:
            log_file = _new_log_file()
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)
            logging.info(f"Added missing FileHandler for {log_file}")
            return str(log_file)
        return existing_files[0].baseFilename if existing_files else None

    coloredlogs.install(level=level, logger=root_logger, fmt=LOG_FORMAT, level_styles=LEVEL_STYLES)
    log_file = None
    if log_to_file:
        log_file = _new_log_file()
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    root_logger._lme_configured = True
    logging.info("Logging configured.")
    return str(log_file) if log_file else None


def _new_log_file():
    LOG_DIR.mkdir(parents=True, exist_ok=True)
    return LOG_DIR / f"lme_run_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
