# -*- coding: utf-8 -*-
# @Date    : 2026-10-19
# @Desc    : Colored console logger with optional file output

import os
from datetime import datetime
from enum import Enum
from typing import Optional, TextIO, Union


class Colors:
    """Terminal color codes for different log levels"""
    BLUE = '\033[34m'
    GREEN = '\033[32m'
    YELLOW = '\033[33m'
    RED = '\033[31m'
    MAGENTA = '\033[35m'
    RESET = '\033[0m'
    BOLD = '\033[1m'


class LogLevel(Enum):
    """Log levels with corresponding colors"""
    DEBUG = (10, Colors.BLUE)
    INFO = (20, Colors.GREEN)
    WARNING = (30, Colors.YELLOW)
    ERROR = (40, Colors.RED)
    CRITICAL = (50, Colors.MAGENTA)

    @classmethod
    def parse(cls, value: Union[str, int, "LogLevel"]) -> int:
        """Accept a LogLevel, its name ("info", "DEBUG") or a numeric level"""
        if isinstance(value, LogLevel):
            return value.value[0]
        if isinstance(value, int):
            return value
        try:
            return cls[str(value).strip().upper()].value[0]
        except KeyError:
            raise ValueError(f"Unknown log level: {value}") from None


class SimpleLogger:
    """Logger with colored terminal output and append-only file logging"""

    def __init__(
        self,
        name: str = "trajfp",
        log_level: Union[int, str, LogLevel] = LogLevel.INFO,
        log_file: Optional[str] = None,
        log_dir: Optional[str] = "logs",
        console_output: bool = True
    ):
        """
        Args:
            name: Logger name, also the default log file prefix
            log_level: Minimum level to emit
            log_file: Log file name (defaults to name_YYYY-MM-DD.log)
            log_dir: Directory for log files; None disables file output
            console_output: Whether to print to the console
        """
        self.name = name
        self.log_level = LogLevel.parse(log_level)
        self.console_output = console_output
        self.file_output: Optional[TextIO] = None
        self._open_file(log_dir, log_file)

    def _open_file(self, log_dir: Optional[str], log_file: Optional[str]) -> None:
        if self.file_output:
            self.file_output.close()
            self.file_output = None
        if not log_dir:
            return
        os.makedirs(log_dir, exist_ok=True)
        if log_file is None:
            log_file = f"{self.name}_{datetime.now().strftime('%Y-%m-%d')}.log"
        self.file_output = open(os.path.join(log_dir, log_file), 'a', encoding='utf-8')

    def configure(
        self,
        level: Union[int, str, LogLevel, None] = None,
        log_dir: Optional[str] = None,
        log_file: Optional[str] = None,
        console_output: Optional[bool] = None,
    ) -> None:
        """Reconfigure the logger in place (used by the CLI after reading config)"""
        if level is not None:
            self.log_level = LogLevel.parse(level)
        if console_output is not None:
            self.console_output = console_output
        if log_dir is not None or log_file is not None:
            self._open_file(log_dir or "logs", log_file)

    def _log(self, level: LogLevel, message: str) -> None:
        if level.value[0] < self.log_level:
            return

        timestamp = datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        formatted_msg = f"{timestamp} - {self.name} - {level.name} - {message}"

        if self.console_output:
            color = level.value[1]
            if level == LogLevel.CRITICAL:
                print(f"{Colors.BOLD}{color}{formatted_msg}{Colors.RESET}")
            else:
                print(f"{color}{formatted_msg}{Colors.RESET}")

        if self.file_output:
            self.file_output.write(formatted_msg + "\n")
            self.file_output.flush()

    def debug(self, message: str) -> None:
        self._log(LogLevel.DEBUG, message)

    def info(self, message: str) -> None:
        self._log(LogLevel.INFO, message)

    def warning(self, message: str) -> None:
        self._log(LogLevel.WARNING, message)

    def error(self, message: str) -> None:
        self._log(LogLevel.ERROR, message)

    def critical(self, message: str) -> None:
        self._log(LogLevel.CRITICAL, message)

    def __del__(self):
        if getattr(self, "file_output", None):
            self.file_output.close()


# Singleton used across the package
logger = SimpleLogger(
    log_level=os.environ.get("TRAJFP_LOG_LEVEL", "INFO"),
    log_dir=os.environ.get("TRAJFP_LOG_DIR", "logs"),
)
