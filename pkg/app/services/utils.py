import logging
from concurrent.futures import ThreadPoolExecutor
from functools import wraps
from time import perf_counter
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np

from app.services.config import CONFIG

logging.basicConfig(
    level=CONFIG.log_level,
    format="%(asctime)s - %(levelname)s - %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def sub_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    """Independent RNG stream for item `index` under `master_seed`.

    Streams only depend on the pair, so growing a sample never perturbs
    the streams of items already in it.
    """
    return np.random.SeedSequence([int(master_seed), int(index)])


def make_rng(seed) -> np.random.Generator:
    """Accept an int, a SeedSequence or a Generator and return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ordered_map(
    func: Callable[[T], R], items: Sequence[T], max_workers: Optional[int] = None
) -> List[R]:
    """
    Apply func to every item on a thread pool and return results in item order.

    Args:
        func: pure function of one item
        items: inputs, consumed in order
        max_workers: pool size; defaults to CONFIG.threads

    Returns:
        List of results aligned with items, independent of scheduling.
    """
    workers = max_workers or CONFIG.threads
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(func, items))


def timed(label: Optional[str] = None):
    """Decorator returning (result, elapsed_seconds) and logging the elapsed time."""

    def decorator(func):
        name = label or func.__name__

        @wraps(func)
        def wrapper(*args, **kwargs):
            start = perf_counter()
            result = func(*args, **kwargs)
            elapsed = perf_counter() - start
            logger.debug(f"{name} finished in {elapsed:.3f}s")
            return result, elapsed

        return wrapper

    return decorator


def format_float(value: float) -> str:
    """17 significant digits: enough to round-trip any double."""
    return format(float(value), ".17g")


def chunked(total: int, size: int) -> Iterable[range]:
    """Yield consecutive index ranges of at most `size` covering 0..total-1."""
    for start in range(0, total, size):
        yield range(start, min(start + size, total))
