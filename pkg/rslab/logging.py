from enum import Enum
import logging


class LoggingLevel(Enum):
    DEFAULT = 0
    INFO = 1
    DEBUG = 2


class ColourFormatter(logging.Formatter):
    COLOURS = {
        "DEBUG": "\033[36m",  # Cyan
        "INFO": "\033[32m",  # Green
        "WARNING": "\033[33m",  # Yellow
        "ERROR": "\033[31m",  # Red
        "CRITICAL": "\033[1;31m",  # Bold Red
    }
    RESET = "\033[0m"

    def __init__(self, fmt: str, colour: bool = True):
        super().__init__(fmt)
        self._colour = colour

    def format(self, record):
        message = super().format(record)
        if not self._colour:
            return message
        colour = self.COLOURS.get(record.levelname, self.RESET)
        return f"{colour}{message}{self.RESET}"


_FORMATS = {
    LoggingLevel.DEFAULT: "[%(levelname)s]: %(message)s",
    LoggingLevel.INFO: "[%(levelname)s] %(name)s: %(message)s",
    LoggingLevel.DEBUG: "[%(levelname)s] (%(filename)s:%(lineno)d): %(message)s",
}
_LEVELS = {
    LoggingLevel.DEFAULT: logging.WARNING,
    LoggingLevel.INFO: logging.INFO,
    LoggingLevel.DEBUG: logging.DEBUG,
}


def set_log_level(level: LoggingLevel):
    logger.setLevel(_LEVELS[level])
    handler.setLevel(_LEVELS[level])
    handler.setFormatter(ColourFormatter(_FORMATS[level], colour=handler.stream.isatty()))


def set_verbosity(verbose: int) -> None:
    """Maps the CLI ``-v`` value onto a :class:`LoggingLevel`.

    :raises ValueError: for anything other than 0, 1 or 2
    """
    try:
        level = LoggingLevel(verbose)
    except ValueError:
        raise ValueError(f"Invalid verbose level. Got: {verbose}. Expecting: 0, 1, 2") from None
    set_log_level(level)


# stderr only; stdout carries emitted data
logger = logging.getLogger(__package__)
logger.setLevel(logging.WARNING)
handler = logging.StreamHandler()
handler.setLevel(logging.WARNING)
handler.setFormatter(ColourFormatter(_FORMATS[LoggingLevel.DEFAULT], colour=handler.stream.isatty()))

if not logger.hasHandlers():
    logger.addHandler(handler)
