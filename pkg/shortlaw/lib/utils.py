import argparse
import contextlib
import logging
import os
import shutil
import sys
import tempfile

import yaml
from pkg_resources import resource_filename

from shortlaw.lib.colargulog import BraceFormatStyleFormatter, ColorizedArgsFormatter

DEFAULT_CONFIG_YAML = resource_filename('shortlaw', "conf/shortlaw.yaml")
CATALOG_DATA = resource_filename('shortlaw', "conf/catalog.txt")
UNIX_DIR_VAR = 'XDG_CONFIG_HOME'
UNIX_DIR_FALLBACK = '~/.config'
SEED_ENV_VAR = 'SHORTLAW_SEED'

LOG_FORMAT = "%(asctime)s - %(levelname)-8s:L%(lineno)s - %(name)-5s - %(message)s"


def init_logging(level="info"):
    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(stream=sys.stdout)
    console_handler.setLevel(level.upper() if isinstance(level, str) else level)

    if sys.stdout.isatty():
        console_handler.setFormatter(ColorizedArgsFormatter(LOG_FORMAT))
    else:
        console_handler.setFormatter(BraceFormatStyleFormatter(LOG_FORMAT))
    root_logger.addHandler(console_handler)


def _init_config():
    if UNIX_DIR_VAR in os.environ:
        user_path = os.path.join(os.environ[UNIX_DIR_VAR], 'shortlaw')
    else:
        user_path = os.path.join(os.path.expanduser(UNIX_DIR_FALLBACK), 'shortlaw')
    user_config_path = os.path.join(user_path, 'shortlaw.yaml')

    if not os.path.exists(user_path):
        os.makedirs(user_path)
    if not os.path.exists(user_config_path):
        shutil.copy(DEFAULT_CONFIG_YAML, user_config_path)
    return user_config_path


def shortlaw_config():
    """
    Parse shortlaw configuration, user file first, bundled defaults for missing keys
    Returns: dictionary containing configuration

    """
    with open(DEFAULT_CONFIG_YAML) as f:
        config = yaml.safe_load(f)

    with open(_init_config()) as f:
        user_config = yaml.safe_load(f) or {}

    for section, values in user_config.items():
        if isinstance(values, dict) and isinstance(config.get(section), dict):
            config[section].update(values)
        else:
            config[section] = values
    return config


def default_seed():
    """Master seed: SHORTLAW_SEED if set, else 0."""
    value = os.environ.get(SEED_ENV_VAR)
    if value is None:
        return 0
    seed = int(value)
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f'{SEED_ENV_VAR}={value} is not a 64-bit unsigned seed')
    return seed


def atomic_write_text(path, text):
    """Write text to path through a temporary file in the same directory and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.shortlaw-')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


@contextlib.contextmanager
def temporary_directory(*args, **kwargs):
    d = tempfile.mkdtemp(*args, **kwargs)
    try:
        yield d
    finally:
        shutil.rmtree(d)


def args(argv=None):
    """
    Returns the script arguments

        Parameters:
            argv (list): arguments to parse, sys.argv[1:] when None

        Returns:
            vargs (obj): input arguments
    """
    parser = argparse.ArgumentParser(prog='shortlaw',
                                     description='Short laws for finite groups: construction, verification, '
                                                 'residual finiteness')
    parser.add_argument('-v', '--verbose', default='info', help='Provide logging level. default=info')
    commands = parser.add_subparsers(dest='command', required=True)

    construct = commands.add_parser('construct', help='build a law and write its certificate')
    construct.add_argument('--n', type=int, required=True, help='order bound')
    construct.add_argument('--target', choices=['all', 'simple', 'psl2', 'psl3', 'non-special'], default='all')
    construct.add_argument('--seed', type=int, default=None, help=f'master seed, default ${SEED_ENV_VAR} or 0')
    construct.add_argument('--c1', type=float, default=None, help='walk length constant')
    construct.add_argument('--c4', type=float, default=None, help='walk pair count constant')
    construct.add_argument('--bad-primes', dest='bad_primes', type=int, nargs='*', default=None,
                           help='primes handled by order laws instead of walks')
    construct.add_argument('--out', type=str, default=None, help='certificate path')
    construct.add_argument('--workers', type=int, default=None)

    verify = commands.add_parser('verify', help='check a word on a group or on all groups up to an order')
    verify.add_argument('word', help='word in run-length form, or a file holding one (certificates included)')
    scope = verify.add_mutually_exclusive_group(required=True)
    scope.add_argument('--group', type=str, help='group spec such as Sym:3, PSL2:7 or Perm:M11')
    scope.add_argument('--all-upto', dest='all_upto', type=int, help='every group of order <= N')
    verify.add_argument('--mode', choices=['auto', 'exhaustive', 'sampled'], default='auto')
    verify.add_argument('--samples', type=int, default=None, help='pairs drawn in sampled mode')
    verify.add_argument('--seed', type=int, default=None)
    verify.add_argument('--workers', type=int, default=None)

    search = commands.add_parser('search', help='shortest law of a group')
    search.add_argument('--group', type=str, required=True)
    search.add_argument('--max-len', dest='max_len', type=int, required=True)

    rf = commands.add_parser('rf', help='residual finiteness growth F(n) of F2')
    rf.add_argument('--n', type=int, required=True, help='largest word length')
    rf.add_argument('--max-order', dest='max_order', type=int, required=True, help='largest quotient order')
    rf.add_argument('--cache-dir', dest='cache_dir', type=str, default=None, help='normal quotient cache')
    rf.add_argument('--out', type=str, default=None, help='csv report path')
    rf.add_argument('--subgroups', action='store_true',
                    help='count subgroups of F2 of each index <= max-order against the Hall recursion')

    mixing = commands.add_parser('mixing', help='random walk diagnostics')
    mixing.add_argument('--experiment', choices=['hitting', 'kesten', 'commuting'], default='hitting')
    mixing.add_argument('--group', type=str, default='PSL2:7')
    mixing.add_argument('--set', dest='target_set', choices=['all', 'none', 'identity', 'borel'], default='borel')
    mixing.add_argument('--lengths', type=int, nargs='*', default=None,
                        help='walk lengths; hitting defaults to a grid of multiples of log|G|')
    mixing.add_argument('--trials', type=int, default=10000)
    mixing.add_argument('--seed', type=int, default=None)
    mixing.add_argument('--workers', type=int, default=None)
    mixing.add_argument('--out', type=str, default=None, help='csv report path')

    catalog = commands.add_parser('catalog', help='nonabelian simple groups up to an order')
    catalog.add_argument('--n', type=int, required=True)
    catalog.add_argument('--divisor-report', dest='divisor_report', action='store_true',
                         help='check the PSL3/PSU3 order divisors against exact order sets')

    reconstruct = commands.add_parser('reconstruct', help='rebuild the word of a certificate and compare')
    reconstruct.add_argument('certificate', type=str)

    vargs = parser.parse_args(argv)

    init_logging(vargs.verbose)

    logging.debug('Logging now setup.')

    return vargs
