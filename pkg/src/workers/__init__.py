"""
Free Gibbs Transport - Workers Layer

Thread pool fan-out for chains, path batches and samples.
"""

from .pool import chunks, parallel_map, thread_count, tree_reduce

__all__ = ["chunks", "parallel_map", "thread_count", "tree_reduce"]
