import logging
import os
import tempfile
import unittest
from unittest.mock import patch

from shortlaw.lib.colargulog import BraceFormatStyleFormatter, ColorizedArgsFormatter, is_brace_format_style
from shortlaw.lib.utils import (LOG_FORMAT, _init_config, args, atomic_write_text, default_seed, init_logging,
                                shortlaw_config, temporary_directory)

TEST_CONFIG = os.path.join(os.path.dirname(__file__), 'shortlaw.yaml')


class TestConfig(unittest.TestCase):
    @patch('shortlaw.lib.utils._init_config')
    def test_shortlaw_config(self, mock_init_config):
        mock_init_config.return_value = TEST_CONFIG
        config = shortlaw_config()
        self.assertEqual(config['pipeline']['c1'], 2)
        self.assertEqual(config['verify']['sample_pairs'], 20000)
        self.assertEqual(config['rfgrowth']['normal_budget'], 12)
        self.assertFalse(config['certificate']['timestamps'])

    def test_partial_user_config(self):
        """Keys missing from the user file come from the bundled defaults"""
        with temporary_directory() as tmpdir:
            path = os.path.join(tmpdir, 'shortlaw.yaml')
            with open(path, 'w') as f:
                f.write('pipeline:\n  c1: 3\n')
            with patch('shortlaw.lib.utils._init_config', return_value=path):
                config = shortlaw_config()
        self.assertEqual(config['pipeline']['c1'], 3)
        self.assertEqual(config['pipeline']['c4'], 4)
        self.assertEqual(config['verify']['workers'], 1)

    def test_empty_user_config(self):
        with temporary_directory() as tmpdir:
            path = os.path.join(tmpdir, 'shortlaw.yaml')
            open(path, 'w').close()
            with patch('shortlaw.lib.utils._init_config', return_value=path):
                config = shortlaw_config()
        self.assertEqual(config['pipeline']['c1'], 8)

    def test_init_config_creates_user_file(self):
        with temporary_directory() as tmpdir:
            with patch.dict(os.environ, {'XDG_CONFIG_HOME': tmpdir}):
                result = _init_config()
                self.assertEqual(result, os.path.join(tmpdir, 'shortlaw', 'shortlaw.yaml'))
                self.assertTrue(os.path.exists(result))
                # a second call keeps the existing file
                with open(result, 'w') as f:
                    f.write('pipeline:\n  c1: 5\n')
                _init_config()
                with open(result) as f:
                    self.assertIn('c1: 5', f.read())


class TestSeed(unittest.TestCase):
    @patch.dict(os.environ, {'SHORTLAW_SEED': '42'})
    def test_seed_from_environment(self):
        self.assertEqual(default_seed(), 42)

    @patch.dict(os.environ, {}, clear=True)
    def test_default_seed(self):
        self.assertEqual(default_seed(), 0)

    @patch.dict(os.environ, {'SHORTLAW_SEED': '-1'})
    def test_invalid_seed(self):
        with self.assertRaises(ValueError):
            default_seed()


class TestFiles(unittest.TestCase):
    def test_atomic_write_text(self):
        with temporary_directory() as tmpdir:
            path = os.path.join(tmpdir, 'sub', 'report.csv')
            atomic_write_text(path, 'a\n')
            atomic_write_text(path, 'b\n')
            with open(path) as f:
                self.assertEqual(f.read(), 'b\n')
            self.assertEqual(os.listdir(os.path.dirname(path)), ['report.csv'])

    def test_temporary_directory(self):
        with temporary_directory() as tmpdir:
            self.assertTrue(os.path.isdir(tmpdir))
        self.assertFalse(os.path.exists(tmpdir))

    def test_atomic_write_keeps_old_content_on_failure(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, 'kept.txt')
            atomic_write_text(path, 'old')
            with self.assertRaises(TypeError):
                atomic_write_text(path, 12)
            with open(path) as f:
                self.assertEqual(f.read(), 'old')
            self.assertEqual(os.listdir(tmpdir), ['kept.txt'])


class TestLogging(unittest.TestCase):
    def test_init_logging(self):
        root_logger = logging.getLogger()
        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)

        init_logging('warning')

        self.assertEqual(root_logger.level, logging.DEBUG)
        self.assertEqual(len(root_logger.handlers), 1)
        self.assertEqual(root_logger.handlers[0].level, logging.WARNING)
        self.assertIsInstance(root_logger.handlers[0].formatter, BraceFormatStyleFormatter)

    def test_brace_formatting(self):
        record = logging.LogRecord('shortlaw', logging.ERROR, __file__, 1, '{} failed: {}', ('verify', 'boom'), None)
        self.assertTrue(is_brace_format_style(record))
        formatted = BraceFormatStyleFormatter('%(message)s').format(record)
        self.assertEqual(formatted, 'verify failed: boom')
        # the record is restored for other handlers
        self.assertEqual(record.msg, '{} failed: {}')

    def test_colorized_formatting(self):
        record = logging.LogRecord('shortlaw', logging.INFO, __file__, 1, 'checked {} pairs', (36,), None)
        formatted = ColorizedArgsFormatter(LOG_FORMAT).format(record)
        self.assertIn('36', formatted)
        self.assertIn('checked', formatted)

    def test_percent_style_untouched(self):
        record = logging.LogRecord('shortlaw', logging.INFO, __file__, 1, '%d pairs', (36,), None)
        self.assertFalse(is_brace_format_style(record))
        self.assertEqual(BraceFormatStyleFormatter('%(message)s').format(record), '36 pairs')


class TestArgs(unittest.TestCase):
    @patch('shortlaw.lib.utils.init_logging')
    def test_construct_arguments(self, mock_init_logging):
        vargs = args(['construct', '--n', '60'])
        mock_init_logging.assert_called_once_with('info')
        self.assertEqual(vargs.command, 'construct')
        self.assertEqual(vargs.n, 60)
        self.assertEqual(vargs.target, 'all')
        self.assertIsNone(vargs.seed)

    @patch('shortlaw.lib.utils.init_logging')
    def test_verify_arguments(self, mock_init_logging):
        vargs = args(['-v', 'debug', 'verify', 'x^6', '--group', 'Sym:3', '--mode', 'sampled', '--samples', '10'])
        mock_init_logging.assert_called_once_with('debug')
        self.assertEqual((vargs.word, vargs.group, vargs.mode, vargs.samples), ('x^6', 'Sym:3', 'sampled', 10))
        self.assertIsNone(vargs.all_upto)

    @patch('shortlaw.lib.utils.init_logging')
    def test_exclusive_scopes(self, mock_init_logging):
        with self.assertRaises(SystemExit):
            args(['verify', 'x', '--group', 'Sym:3', '--all-upto', '5'])
        with self.assertRaises(SystemExit):
            args(['verify', 'x'])
        with self.assertRaises(SystemExit):
            args([])
        mock_init_logging.assert_not_called()


if __name__ == '__main__':
    unittest.main()
