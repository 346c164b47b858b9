"""
LabelMap - Deterministic Parallel Reduction
Split a pair set into fixed contiguous blocks, evaluate them on a thread
pool, and combine partial results in block order.
"""

import concurrent.futures

import numpy as np


def partition(n_items, workers):
    """Contiguous, near-equal slices covering range(n_items); depends only on the inputs."""
    workers = max(1, min(int(workers), max(n_items, 1)))
    bounds = np.linspace(0, n_items, workers + 1).astype(np.int64)
    return [slice(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]


def ordered_map_reduce(func, n_items, workers=1):
    """
    Apply func to each block of range(n_items) and sum the results in block order.

    Args:
        func: callable taking a slice and returning a float or array
        n_items: number of items to partition
        workers: number of blocks / threads

    Returns:
        Sum of partial results, accumulated left to right
    """
    blocks = partition(n_items, workers)
    if len(blocks) == 1:
        return func(blocks[0])

    with concurrent.futures.ThreadPoolExecutor(max_workers=len(blocks)) as executor:
        partials = list(executor.map(func, blocks))

    total = partials[0]
    for part in partials[1:]:
        total = total + part
    return total
