"""
Logging-Konfiguration für Einstiegspunkte.
"""

import logging
import os

from ..config.settings import LOG_LEVEL, LOG_FILE

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: str = None, log_file: str = None):
    """
    Konfiguriert Datei- und Konsolen-Logging.

    Args:
        level: Log-Level (optional, nutzt settings.LOG_LEVEL)
        log_file: Pfad der Log-Datei (optional, nutzt settings.LOG_FILE)
    """
    level = getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO)
    log_file = log_file or LOG_FILE

    try:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        logging.basicConfig(
            level=level,
            format=LOG_FORMAT,
            handlers=[
                logging.FileHandler(log_file),
                logging.StreamHandler()
            ],
            force=True
        )
    except (PermissionError, OSError):
        # Fallback: Nur Konsolen-Logging wenn Datei gesperrt oder nicht beschreibbar
        logging.basicConfig(
            level=level,
            format=LOG_FORMAT,
            handlers=[
                logging.StreamHandler()
            ],
            force=True
        )
        logging.getLogger(__name__).warning("[WARNUNG] Log-Datei gesperrt - verwende nur Konsolen-Logging")
