import logging
import os
from typing import Optional

from soliton_surfaces import config

_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def get_logger(
    name: str = "soliton_surfaces",
    log_level: Optional[str] = None,
    log_file: Optional[str] = None,
) -> logging.Logger:
    """Crée et retourne un logger prêt à l'emploi pour tout le projet.

    La sortie console va sur stderr ; un fichier sous ``logs/`` n'est ajouté que
    si ``log_file`` (ou ``SOLITON_LOG_FILE``) est fourni.
    """
    logger = logging.getLogger(f"soliton_surfaces.{name}")
    if not logger.handlers:
        level = getattr(logging, (log_level or config.LOG_LEVEL).upper(), logging.WARNING)
        logger.setLevel(level)
        logger.propagate = False
        formatter = logging.Formatter(_FORMAT)
        # Console handler
        ch = logging.StreamHandler()
        ch.setLevel(level)
        ch.setFormatter(formatter)
        logger.addHandler(ch)
        # File handler
        log_file = log_file or config.LOG_FILE
        if log_file:
            try:
                os.makedirs(config.LOG_DIR, exist_ok=True)
                fh = logging.FileHandler(
                    os.path.join(config.LOG_DIR, log_file), encoding="utf-8"
                )
                fh.setLevel(level)
                fh.setFormatter(formatter)
                logger.addHandler(fh)
            except OSError:
                pass  # Si le dossier logs n'est pas accessible, on garde la sortie console
    return logger


def set_level(log_level: str) -> None:
    """Applique un niveau à tous les loggers déjà créés du paquet."""
    level = getattr(logging, log_level.upper(), logging.WARNING)
    for name, logger in logging.Logger.manager.loggerDict.items():
        if name.startswith("soliton_surfaces.") and isinstance(logger, logging.Logger):
            logger.setLevel(level)
            for handler in logger.handlers:
                handler.setLevel(level)
