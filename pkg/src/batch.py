"""Batch evaluation of pure functions over ordered point lists."""

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Optional, Sequence

from tqdm import tqdm

from src.config import MAX_RETRIES, RETRY_DELAY, logger


class BatchEvaluator:
    """Maps a pure function over items, in order, with retries and statistics.

    ``threads=1`` evaluates inline; any thread count gives the same output
    because results are collected by input position.
    """

    def __init__(self, threads: int = 1, progress: bool = True):
        self.threads = max(1, int(threads))
        self.progress = progress
        self._request_count = 0
        self._success_count = 0
        self._failure_count = 0
        self._retry_count = 0
        self._failed: List[int] = []
        self._lock = threading.Lock()

    def _run_one(self, fn: Callable[[Any], Any], index: int, item: Any) -> Any:
        """Evaluate one item with retries."""
        for attempt in range(MAX_RETRIES):
            try:
                result = fn(item)
                with self._lock:
                    self._success_count += 1
                return result
            except (ArithmeticError, RuntimeError) as e:
                with self._lock:
                    self._retry_count += 1
                if attempt < MAX_RETRIES - 1:
                    logger.warning(f"Evaluation of item {index} failed, retrying in {RETRY_DELAY} seconds: {e}")
                    time.sleep(RETRY_DELAY)
                else:
                    logger.error(f"Evaluation of item {index} failed after {MAX_RETRIES} attempts: {e}")
                    with self._lock:
                        self._failure_count += 1
                        self._failed.append(index)
                    raise

    def map(self, fn: Callable[[Any], Any], items: Sequence[Any], desc: Optional[str] = None) -> List[Any]:
        """Ordered results of fn over items."""
        items = list(items)
        self._request_count += len(items)
        results: List[Any] = [None] * len(items)
        bar = tqdm(total=len(items), desc=desc or "Evaluating", unit="pts", disable=not self.progress, leave=False)
        try:
            if self.threads == 1:
                for i, item in enumerate(items):
                    results[i] = self._run_one(fn, i, item)
                    bar.update(1)
            else:
                with ThreadPoolExecutor(max_workers=self.threads) as pool:
                    futures = [pool.submit(self._run_one, fn, i, item) for i, item in enumerate(items)]
                    for i, future in enumerate(futures):
                        results[i] = future.result()
                        bar.update(1)
        finally:
            bar.close()
        return results

    def get_failed_items(self) -> List[int]:
        """Indices of items that failed after all retries."""
        return list(self._failed)

    def get_statistics(self) -> Dict[str, int]:
        """Get evaluation statistics."""
        return {
            'total_requests': self._request_count,
            'successful_requests': self._success_count,
            'failed_requests': self._failure_count,
            'retry_count': self._retry_count,
        }

    def log_statistics(self) -> None:
        success_rate = (self._success_count / self._request_count * 100) if self._request_count > 0 else 0
        logger.info(
            f"Batch evaluation completed: {self._success_count}/{self._request_count} successful "
            f"({success_rate:.1f}%), {self._failure_count} failed, {self._retry_count} retries"
        )
