from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np
from multiprocess import Pool, cpu_count  # type: ignore

T = TypeVar("T")


def chunk_generator(seed: int, chunk_index: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator owning chunk `chunk_index` of stream `stream` for a run seeded with `seed`."""
    sequence = np.random.SeedSequence(seed, spawn_key=(stream, chunk_index))
    return np.random.Generator(np.random.Philox(sequence))


def chunk_sizes(n: int, chunk_size: int) -> List[int]:
    if n < 1 or chunk_size < 1:
        raise ValueError("n and chunk_size must be positive")
    full, rest = divmod(n, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def replication_seeds(seed: int, count: int) -> List[int]:
    """Independent 64-bit seeds for `count` replications derived from one seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


def get_number_of_workers(workers: Optional[int] = None) -> int:
    if workers is None or workers == 0:
        return 1
    if workers == -1:
        return cpu_count()
    return workers


def ordered_map(func: Callable[..., T], items: Sequence, workers: Optional[int] = 1) -> List[T]:
    """Map func over items, in a process pool when workers > 1; results keep submission order."""
    workers = get_number_of_workers(workers)
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with Pool(min(workers, len(items))) as pool:
        return pool.map(func, items)
