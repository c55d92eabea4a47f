#!/usr/bin/env python3
import logging
import os
from collections import Counter

import pandas as pd
from termcolor import colored

from shortlaw.lib.catalog import catalog_table
from shortlaw.lib.certificate import (HEADER, build_certificate, parse_certificate, pipeline_params,
                                      read_certificate, write_certificate)
from shortlaw.lib.errors import CeilingExceeded, ShortLawError
from shortlaw.lib.evaluation import shortest_law, verify
from shortlaw.lib.finitegroups import parse_spec
from shortlaw.lib.freeword import Word, format_word, parse_word
from shortlaw.lib.lawcomb import divisor_claim_report
from shortlaw.lib.pipeline import PipelineParams, construct, psl2_branch_counts, psl3_family_scope, target_specs
from shortlaw.lib.rfgrowth import cached_normal_quotients, certify_law, hall_counts, low_index_subgroups, rf_table
from shortlaw.lib.stochastics import (MIXING_GRID, commuting_rate, hitting_probability, kesten_decay,
                                      mixing_threshold, write_report)
from shortlaw.lib.utils import args, default_seed, shortlaw_config

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _status(passed: bool) -> str:
    return colored('PASS', 'green', attrs=['bold']) if passed else colored('FAIL', 'red', attrs=['bold'])


def _log_record(record):
    logger = logging.getLogger(__name__)
    line = f'{colored(record.group, "cyan")}: {_status(record.passed)} {record.mode}, {record.pairs} checked'
    if not record.passed:
        line += f', {record.violations} violations, witness {record.witness_text or record.witness}'
    logger.info(line)


def _read_word(text: str) -> Word:
    if not os.path.isfile(text):
        return parse_word(text)
    with open(text, encoding='utf-8') as f:
        content = f.read()
    if content.startswith(f'{HEADER}:'):
        return parse_certificate(content).word()
    return parse_word(content)


def verify_target(target: str, params: PipelineParams, word: Word, trace, config, workers: int):
    """Verification records of a constructed law over its target groups, and the specs left unchecked."""
    logger = logging.getLogger(__name__)
    verify_conf = config['verify']
    groups_conf = config['groups']
    normal_budget = config['rfgrowth']['normal_budget']
    records, unverified = [], []
    if target == 'all':
        if params.n <= normal_budget:
            records.append(certify_law(word, params.n, normal_budget))
        else:
            logger.warning(f'groups of order <= {params.n} exceed the quotient oracle budget {normal_budget}')
            unverified.append(f'order<={params.n}')
    for spec in target_specs(target, params):
        try:
            records.append(verify(trace, spec, verify_conf['exhaustive_pair_budget'], verify_conf['sample_pairs'],
                                  verify_conf['batch_size'], workers, params.seed, groups_conf['table_ceiling'],
                                  groups_conf['enumeration_ceiling']))
        except CeilingExceeded as e:
            logger.warning(f'{spec} not verified: {e}')
            unverified.append(str(spec))
    return records, unverified


def log_branch_counts(trace, params: PipelineParams, config):
    """Which part of a PSL2 family law kills sampled pairs of each PSL2(q) in scope."""
    logger = logging.getLogger(__name__)
    sample = config['pipeline'].get('branch_sample', 256)
    for spec in target_specs('psl2', params):
        try:
            counts = psl2_branch_counts(trace, spec.parameter, sample, params.seed,
                                        config['groups']['enumeration_ceiling'])
        except CeilingExceeded as e:
            logger.warning(f'{spec} branch counts skipped: {e}')
            continue
        branches = ', '.join(f'{name} {count}' for name, count in counts.items())
        logger.info(f'{colored(str(spec), "cyan")}: {sample} sampled pairs by branch: {branches}')


def cmd_construct(vargs, config) -> int:
    logger = logging.getLogger(__name__)
    seed = default_seed() if vargs.seed is None else vargs.seed
    params = PipelineParams.from_config(vargs.n, config, seed=seed, c1=vargs.c1, c4=vargs.c4,
                                        bad_primes=vargs.bad_primes)
    workers = vargs.workers or config['verify']['workers']

    word, trace = construct(vargs.target, params)
    logger.info(f'{vargs.target} law for order <= {params.n}: {len(word)} letters ({trace.scope})')
    records, unverified = verify_target(vargs.target, params, word, trace, config, workers)
    for record in records:
        _log_record(record)
    if vargs.target == 'psl2' and trace.kind != 'degenerate':
        log_branch_counts(trace, params, config)

    cert_conf = config['certificate']
    cert = build_certificate(vargs.target, params, word, trace, records, unverified,
                             inline_word_limit=cert_conf.get('inline_word_limit', 1_000_000),
                             timestamps=bool(cert_conf.get('timestamps', False)))
    out = vargs.out or f'shortlaw-{vargs.target}-{params.n}.cert'
    write_certificate(cert, out)
    logger.info(f'{_status(cert.passed)} certificate written to {out}')
    return EXIT_PASS if cert.passed else EXIT_FAIL


def cmd_verify(vargs, config) -> int:
    word = _read_word(vargs.word)
    if vargs.all_upto is not None:
        record = certify_law(word, vargs.all_upto, config['rfgrowth']['normal_budget'])
    else:
        verify_conf = config['verify']
        groups_conf = config['groups']
        pair_budget = verify_conf['exhaustive_pair_budget']
        if vargs.mode == 'exhaustive':
            pair_budget = float('inf')
        elif vargs.mode == 'sampled':
            pair_budget = 0
        record = verify(word, parse_spec(vargs.group), pair_budget, vargs.samples or verify_conf['sample_pairs'],
                        verify_conf['batch_size'], vargs.workers or verify_conf['workers'],
                        default_seed() if vargs.seed is None else vargs.seed, groups_conf['table_ceiling'],
                        groups_conf['enumeration_ceiling'])
    _log_record(record)
    return EXIT_PASS if record.passed else EXIT_FAIL


def cmd_search(vargs, config) -> int:
    logger = logging.getLogger(__name__)
    spec = parse_spec(vargs.group)
    law = shortest_law(spec, vargs.max_len, config['search']['pair_word_budget'], config['groups']['table_ceiling'],
                       config['groups']['enumeration_ceiling'])
    if law is None:
        logger.info(f'{colored(str(spec), "cyan")}: no law of length <= {vargs.max_len}')
        return EXIT_FAIL
    logger.info(f'{colored(str(spec), "cyan")}: shortest law {format_word(law)} of length {len(law)}')
    return EXIT_PASS


def cmd_rf(vargs, config) -> int:
    logger = logging.getLogger(__name__)
    rf_conf = config['rfgrowth']
    if vargs.cache_dir:
        quotients = cached_normal_quotients(vargs.max_order, vargs.cache_dir, rf_conf['normal_budget'])
        logger.info(f'{len(quotients)} normal quotients of order <= {vargs.max_order} cached in {vargs.cache_dir}')
    table = rf_table(range(1, vargs.n + 1), vargs.max_order, rf_conf['word_budget'], rf_conf['normal_budget'])
    for row in table.itertuples(index=False):
        relation = '=' if row.exact else '>='
        logger.info(f'F({row.n}) {relation} {colored(str(row.F), "yellow")} (witness {row.witness})')
    if vargs.out:
        write_report(table, vargs.out)
    if not vargs.subgroups:
        return EXIT_PASS

    found = Counter(t.index for t in low_index_subgroups(vargs.max_order, rf_conf['subgroup_budget']))
    agree = True
    for index, expected in enumerate(hall_counts(vargs.max_order), 1):
        agree &= found[index] == expected
        logger.info(f'index {index}: {found[index]} subgroups (Hall recursion {expected})')
    logger.info(f'{_status(agree)} low index enumeration')
    return EXIT_PASS if agree else EXIT_FAIL


def cmd_mixing(vargs, config) -> int:
    logger = logging.getLogger(__name__)
    conf = config['stochastics']
    seed = default_seed() if vargs.seed is None else vargs.seed
    workers = vargs.workers or config['verify']['workers']
    confidence = conf['confidence']
    block_size = conf['block_size']
    if vargs.experiment == 'hitting':
        spec = parse_spec(vargs.group)
        if vargs.lengths:
            rows = []
            for length in vargs.lengths:
                estimate = hitting_probability(spec, None, vargs.target_set, length, vargs.trials, seed,
                                               confidence, block_size, workers,
                                               config['groups']['enumeration_ceiling'])
                rows.append({'l': length, 'frequency': estimate.frequency, 'low': estimate.low,
                             'high': estimate.high, 'bound': estimate.bound, 'holds': estimate.holds})
            table = pd.DataFrame(rows, columns=['l', 'frequency', 'low', 'high', 'bound', 'holds'])
        else:
            curve = mixing_threshold(spec, vargs.target_set, None, MIXING_GRID, vargs.trials, seed, confidence,
                                     block_size, workers, config['groups']['enumeration_ceiling'])
            table = curve.table
            if curve.length is not None:
                logger.info(f'{spec}: hitting bound reached at l = {curve.length} ({curve.multiple} log|G|)')
    else:
        lengths = vargs.lengths or [4, 8, 16, 32]
        fit = kesten_decay(lengths, vargs.trials, seed, confidence=confidence, block_size=block_size)
        if vargs.experiment == 'kesten':
            table = fit.table
            logger.info(f'fitted decay rate {fit.alpha:.4f}')
        else:
            table = commuting_rate(lengths, vargs.trials, seed, fit=fit, confidence=confidence,
                                   block_size=block_size)
    print(table.to_string(index=False))
    if vargs.out:
        write_report(table, vargs.out)
    return EXIT_PASS


def cmd_catalog(vargs, config) -> int:
    ceiling = config['groups']['catalog_ceiling']
    print(catalog_table(vargs.n, ceiling).to_string(index=False))
    if vargs.divisor_report:
        report = divisor_claim_report(psl3_family_scope(vargs.n), config['groups']['enumeration_ceiling'])
        print(report.to_string(index=False))
    return EXIT_PASS


def cmd_reconstruct(vargs, config) -> int:
    logger = logging.getLogger(__name__)
    cert = read_certificate(vargs.certificate)
    word, _ = construct(cert.target, pipeline_params(cert))
    if cert.matches(word):
        logger.info(f'{_status(True)} reconstruction of {vargs.certificate} matches ({len(word)} letters)')
        return EXIT_PASS
    logger.error(f'{_status(False)} reconstruction of {vargs.certificate} differs from the certified word')
    return EXIT_FAIL


COMMANDS = {
    'construct': cmd_construct,
    'verify': cmd_verify,
    'search': cmd_search,
    'rf': cmd_rf,
    'mixing': cmd_mixing,
    'catalog': cmd_catalog,
    'reconstruct': cmd_reconstruct,
}


def main(argv=None) -> int:
    vargs = args(argv)
    logger = logging.getLogger(__name__)
    config = shortlaw_config()

    try:
        return COMMANDS[vargs.command](vargs, config)
    except (ShortLawError, ValueError, OSError) as e:
        logger.error(f"{vargs.command} failed: {e}")
        return EXIT_USAGE
