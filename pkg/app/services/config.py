import logging
import os
from dataclasses import dataclass

from dotenv import find_dotenv, load_dotenv

load_dotenv(find_dotenv())

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class NetPcaConfig:
    """
    Runtime settings read from the environment (or a .env file).
    Command-line flags override these per invocation.
    """

    threads: int
    log_level: str
    default_seed: int
    partition_attempts: int
    dense_limit: int


def _read_int(name: str, default: int, minimum: int) -> int:
    """Read an integer environment variable, rejecting junk and values below minimum."""
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw.strip())
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def get_log_level() -> str:
    """
    Read NETPCA_LOG_LEVEL and return it upper-cased.

    Returns:
        str: one of the standard logging level names
    """
    level = (os.getenv("NETPCA_LOG_LEVEL") or "INFO").strip().upper()
    if level not in LOG_LEVELS:
        raise ValueError(
            f"NETPCA_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}, got {level!r}"
        )
    return level


def get_runtime_config() -> NetPcaConfig:
    """
    Load the runtime configuration from the environment.

    Raises ValueError when a variable is present but unusable, so a bad
    deployment fails before any graph is read.
    """
    return NetPcaConfig(
        threads=_read_int("NETPCA_THREADS", 4, 1),
        log_level=get_log_level(),
        default_seed=_read_int("NETPCA_SEED", 0, 0),
        partition_attempts=_read_int("NETPCA_PARTITION_ATTEMPTS", 1000, 1),
        dense_limit=_read_int("NETPCA_DENSE_LIMIT", 2048, 1),
    )


CONFIG = get_runtime_config()

if __name__ == "__main__":
    try:
        config = get_runtime_config()
        print("Successfully loaded runtime configuration!")
        print(config)
        print(f"Effective log level: {logging.getLevelName(config.log_level)}")

    except ValueError as e:
        print(f"Error: {e}")
