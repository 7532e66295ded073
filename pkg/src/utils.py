from enum import Enum
import logging
from typing import Optional
import os


# Custom Logger formater
# from https://github.com/openai/preparedness/blob/main/project/paperbench/paperbench/utils.py
class CustomFormatter(logging.Formatter):
    def format(self, record):
        levelname = record.levelname
        message = record.getMessage()

        level_colors = {
            "DEBUG": "\033[38;5;39m",
            "INFO": "\033[38;5;15m",
            "WARNING": "\033[38;5;214m",
            "ERROR": "\033[38;5;203m",
            "CRITICAL": "\033[1;38;5;231;48;5;197m",
        }

        level_color = level_colors.get(levelname, "\033[0m")
        record.levelname = f"{level_color}{levelname:<8}\033[0m"
        record.asctime = f"\033[38;5;240m{self.formatTime(record, self.datefmt)}\033[0m"
        record.custom_location = (
            f"\033[38;5;240m{record.name}.{record.funcName}:{record.lineno}\033[0m"
        )
        record.msg = f"{level_color}{message}\033[0m"
        record.args = ()

        return super().format(record)


class PlainFormatter(logging.Formatter):
    def format(self, record):
        record.custom_location = f"{record.name}.{record.funcName}:{record.lineno}"
        return super().format(record)


class MatrixKind(Enum):
    INPUT_MAJOR_P = "P"
    OUTPUT_MAJOR_PPRIME = "Pprime"
    CENTERED_M = "M"


class ConditionId(Enum):
    THM1 = "thm1"
    THM2 = "thm2"
    INEQ2 = "ineq2"
    INEQ4 = "ineq4"
    CORR_NORM = "corr-norm"
    CORR_EPPING = "corr-epping"
    THM8 = "thm8"
    INEQ15 = "ineq15"


class ViolationKind(Enum):
    NEGATIVITY = "negativity"
    NORMALIZATION = "normalization"
    SIGNALING_A = "signaling_a"
    SIGNALING_B = "signaling_b"


LOG_LEVEL_ENV = "BELLCONE_LOG_LEVEL"


# from https://github.com/openai/preparedness/blob/main/project/paperbench/paperbench/utils.py
def get_logger(name: Optional[str] = None, level: Optional[str] = None):
    logger = logging.getLogger(name)
    logger.setLevel(level or os.environ.get(LOG_LEVEL_ENV, "INFO").upper())

    logger.propagate = False
    if not logger.hasHandlers():
        # stderr, stdout carries command output
        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.DEBUG)
        fmt = "%(asctime)s | %(levelname)s | %(custom_location)s - %(message)s"
        datefmt = "%Y-%m-%d %H:%M:%S"
        formatter = CustomFormatter(fmt=fmt, datefmt=datefmt)

        if os.environ.get("DISABLE_COLORED_LOGGING") == "1":
            formatter = PlainFormatter(fmt=fmt, datefmt=datefmt)

        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    return logger


def set_log_level(level: str):
    """Apply `level` to every bellcone logger created so far."""
    os.environ[LOG_LEVEL_ENV] = level.upper()
    for name, logger in logging.Logger.manager.loggerDict.items():
        if isinstance(logger, logging.Logger) and name.startswith(("src", "main")):
            logger.setLevel(level.upper())


def format_float(value: float, digits: int = 17) -> str:
    """Fixed-width significant-digit formatting used by every CSV writer."""
    value = float(value)
    if value == 0.0:
        # drop the sign of -0.0 so outputs stay byte-identical
        value = 0.0
    return format(value, f".{digits}g")
