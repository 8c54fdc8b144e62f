import logging
import unittest
from unittest.mock import Mock, patch

from src.batch import BatchEvaluator
from src.config import LOGGER_NAME, MAX_RETRIES


class TestBatchEvaluator(unittest.TestCase):
    def setUp(self):
        """Set up test fixtures."""
        logging.getLogger(LOGGER_NAME).setLevel(logging.CRITICAL)

    def tearDown(self):
        logging.getLogger(LOGGER_NAME).setLevel(logging.INFO)

    def test_map_preserves_order(self):
        items = list(range(20))
        for threads in (1, 4):
            evaluator = BatchEvaluator(threads, progress=False)
            self.assertEqual(evaluator.map(lambda v: v * v, items), [v * v for v in items])

    def test_statistics(self):
        evaluator = BatchEvaluator(progress=False)
        evaluator.map(lambda v: v + 1, [1, 2, 3])
        stats = evaluator.get_statistics()
        self.assertEqual(stats['total_requests'], 3)
        self.assertEqual(stats['successful_requests'], 3)
        self.assertEqual(stats['failed_requests'], 0)
        self.assertEqual(stats['retry_count'], 0)

    @patch('src.batch.time.sleep')
    def test_retries_then_succeeds(self, mock_sleep):
        fn = Mock(side_effect=[FloatingPointError('overflow'), 42])
        evaluator = BatchEvaluator(progress=False)
        self.assertEqual(evaluator.map(fn, ['item']), [42])
        self.assertEqual(evaluator.get_statistics()['retry_count'], 1)
        mock_sleep.assert_called_once()

    @patch('src.batch.time.sleep')
    def test_gives_up_after_retries(self, _):
        fn = Mock(side_effect=RuntimeError('no convergence'))
        evaluator = BatchEvaluator(progress=False)
        with self.assertRaises(RuntimeError):
            evaluator.map(fn, ['a'])
        self.assertEqual(fn.call_count, MAX_RETRIES)
        self.assertEqual(evaluator.get_failed_items(), [0])
        self.assertEqual(evaluator.get_statistics()['failed_requests'], 1)

    def test_other_errors_are_not_retried(self):
        fn = Mock(side_effect=KeyError('x'))
        evaluator = BatchEvaluator(progress=False)
        with self.assertRaises(KeyError):
            evaluator.map(fn, ['a'])
        self.assertEqual(fn.call_count, 1)

    def test_thread_count_floor(self):
        self.assertEqual(BatchEvaluator(0, progress=False).threads, 1)


if __name__ == '__main__':
    unittest.main()
