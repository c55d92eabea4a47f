import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from shortlaw.lib.catalog import DEFAULT_CATALOG_CEILING, simple_catalog
from shortlaw.lib.errors import BudgetExceeded, CeilingExceeded, RetryLimitExceeded, ShortLawError
from shortlaw.lib.evaluation import BackendArithmetic, evaluate_word
from shortlaw.lib.fields import is_prime_power, prime_power
from shortlaw.lib.finitegroups import (DEFAULT_ENUMERATION_CEILING, GroupSpec, enumerate_elements, generates,
                                       group_of, order_set, projective_points)
from shortlaw.lib.freeword import (WalkParams, Word, X_WORD, Y_WORD, commutator, commutes,
                                   random_walk, stream_generator, substitute)
from shortlaw.lib.lawcomb import (MAX_WORD_LENGTH, LawTrace, atom, degenerate_trace, extension_trace,
                                  metabelian_trace, order_divisor_trace, power_trace, psl2_order_trace,
                                  psl3_psu3_order_trace, solvable_trace, union_trace)
from shortlaw.lib.rfgrowth import k_of

logger = logging.getLogger(__name__)

DICKSON_EXPONENT = 60


@dataclass
class PipelineParams:
    n: int
    c1: float = 8
    c4: float = 4
    seed: int = 0
    bad_primes: Tuple[int, ...] = ()
    retry_limit: int = 64
    schedule_min_growth: float = 1.1
    include_abelian_simple: bool = False
    enumeration_ceiling: int = DEFAULT_ENUMERATION_CEILING
    catalog_ceiling: int = DEFAULT_CATALOG_CEILING
    max_word_length: int = MAX_WORD_LENGTH

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f'order bound must be >= 1, got {self.n}')
        self.bad_primes = tuple(sorted(set(int(p) for p in self.bad_primes)))

    @classmethod
    def from_config(cls, n: int, config: Dict, **overrides) -> 'PipelineParams':
        section = config.get('pipeline', {})
        groups = config.get('groups', {})
        values = dict(n=n, c1=section.get('c1', 8), c4=section.get('c4', 4),
                      bad_primes=tuple(section.get('bad_primes') or ()),
                      retry_limit=section.get('retry_limit', 64),
                      schedule_min_growth=section.get('schedule_min_growth', 1.1),
                      include_abelian_simple=bool(section.get('include_abelian_simple', False)),
                      enumeration_ceiling=groups.get('enumeration_ceiling', DEFAULT_ENUMERATION_CEILING),
                      catalog_ceiling=groups.get('catalog_ceiling', DEFAULT_CATALOG_CEILING),
                      max_word_length=section.get('max_word_length', MAX_WORD_LENGTH))
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


def walk_parameters(params: PipelineParams) -> Tuple[int, int]:
    """(walk length l, pair count m) = (ceil(C1 ln n), ceil(C4 n^(1/3) ln n)), both at least 1."""
    log_n = math.log(params.n)
    l = max(1, math.ceil(params.c1 * log_n))
    m = max(1, math.ceil(params.c4 * params.n ** (1 / 3) * log_n))
    return l, m


class CommutingPair(ShortLawError):
    pass


def sample_pair(params: PipelineParams, index: int, length: int) -> Tuple[Word, Word, int]:
    """Lazy walk pair number index, resampled while the two words commute; returns the retries used."""
    try:
        for attempt in Retrying(stop=stop_after_attempt(params.retry_limit),
                                retry=retry_if_exception_type(CommutingPair), reraise=True):
            with attempt:
                k = attempt.retry_state.attempt_number - 1
                stream = (index * params.retry_limit + k) * 2
                u = random_walk(WalkParams(length, 'lazy', params.seed, stream))
                v = random_walk(WalkParams(length, 'lazy', params.seed, stream + 1))
                if commutes(u, v):
                    raise CommutingPair(f'pair {index} attempt {k} commutes')
                return u, v, k
    except CommutingPair:
        raise RetryLimitExceeded(f'walk pair {index} still commutes after {params.retry_limit} draws')


def psl2_scope(n: int, bad_primes: Sequence[int] = ()) -> Dict[str, List[int]]:
    """Field sizes q >= 4 with |PSL2(q)| <= n, split into walk-covered primes and order-law cases."""
    generic, special = [], []
    q = 4
    while q * (q * q - 1) // 2 <= n:
        if is_prime_power(q) and GroupSpec('PSL2', q).order <= n:
            _, e = prime_power(q)
            (special if e > 1 or q in bad_primes else generic).append(q)
        q += 1
    return {'generic': generic, 'order_law': special}


def psl2_family_law(params: PipelineParams) -> Tuple[Word, LawTrace]:
    """
    Randomized law for every PSL2(q) of order <= n: substitutions of the metabelian word into m
    non-commuting walk pairs (w_gen), the Dickson fallback (w_sub) and order laws for proper prime
    powers and bad primes (w_bad).
    """
    scope = psl2_scope(params.n, params.bad_primes)
    if not scope['generic'] and not scope['order_law']:
        trace = degenerate_trace('no PSL2(q) of order <= n')
        return trace.word, trace

    l, m = walk_parameters(params)
    logger.info(f'PSL2 family up to {params.n}: {m} walk pairs of length {l}')
    template = metabelian_trace()
    substitutions = []
    retries = 0
    for i in range(m):
        u, v, k = sample_pair(params, i, l)
        retries += k
        substitutions.append(LawTrace('substitution', substitute(template.word, u, v), '',
                                      [template, atom(u, 'walk'), atom(v, 'walk')], {'pair': str(i)}))
    if retries:
        logger.info(f'resampled {retries} commuting walk pairs')
    w_gen = union_trace(substitutions, 'generating pairs in a common Borel', params.max_word_length)
    w_gen.params.update({'walk_length': str(l), 'pairs': str(m), 'resampled': str(retries)})
    w_sub = union_trace([metabelian_trace(), power_trace(DICKSON_EXPONENT)], 'proper subgroups (Dickson)',
                        params.max_word_length)

    components = [w_gen, w_sub]
    if scope['order_law']:
        bad = [psl2_order_trace(q) for q in scope['order_law']]
        components.append(union_trace(bad, 'prime powers and bad primes', params.max_word_length))
    trace = union_trace(components, f'PSL2(q) of order <= {params.n}', params.max_word_length)
    trace.params['q'] = ' '.join(map(str, scope['generic'] + scope['order_law']))
    trace.params['order_law'] = ' '.join(map(str, scope['order_law']))
    return trace.word, trace


def walk_pairs(trace: LawTrace) -> List[Tuple[Word, Word]]:
    return [(node.children[1].word, node.children[2].word)
            for node in trace.nodes() if node.kind == 'substitution']


def _common_fixed_point(group, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    gf = group.field
    points = projective_points(gf)
    px, py = points[:, 0][None, :], points[:, 1][None, :]

    def fixes(m):
        m = m.reshape(-1, 4)
        ix = gf.add(gf.mul(m[:, 0:1], px), gf.mul(m[:, 1:2], py))
        iy = gf.add(gf.mul(m[:, 2:3], px), gf.mul(m[:, 3:4], py))
        return gf.sub(gf.mul(px, iy), gf.mul(py, ix)) == 0

    return np.any(fixes(a) & fixes(b), axis=1)


def psl2_branch_counts(trace: LawTrace, q: int, sample: int = 256, seed: int = 0,
                       ceiling: int = DEFAULT_ENUMERATION_CEILING) -> Dict[str, int]:
    """
    Classify sampled pairs of PSL2(q) by the part of the law that kills them: 'order_law' when q is
    handled by an order law, 'dickson' for non-generating pairs, 'borel' when some walk pair lands in
    a common Borel subgroup, 'other' otherwise.
    """
    group = group_of(GroupSpec('PSL2', q))
    elements = enumerate_elements(group, ceiling)
    rng = stream_generator(seed, q)
    idx = rng.integers(0, len(elements), size=(sample, 2))
    g, h = elements[idx[:, 0]], elements[idx[:, 1]]
    counts = {'borel': 0, 'dickson': 0, 'order_law': 0, 'other': 0}
    if str(q) in trace.params.get('order_law', '').split():
        counts['order_law'] = sample
        return counts
    arith = BackendArithmetic(group)
    hit = np.zeros(sample, dtype=bool)
    for u, v in walk_pairs(trace):
        hit |= _common_fixed_point(group, evaluate_word(arith, u, g, h), evaluate_word(arith, v, g, h))
    for k in range(sample):
        if not generates(group, g[k], h[k], ceiling):
            counts['dickson'] += 1
        elif hit[k]:
            counts['borel'] += 1
        else:
            counts['other'] += 1
    return counts


def simple_non_special_law(n: int, ceiling: int = DEFAULT_CATALOG_CEILING,
                           enumeration_ceiling: int = DEFAULT_ENUMERATION_CEILING) -> Tuple[Word, LawTrace]:
    """Order-divisor law over the exact order sets of the catalog groups outside PSL2, PSL3, PSU3."""
    entries = [e for e in simple_catalog(n, ceiling) if not e.special]
    if not entries:
        trace = degenerate_trace('no non-special simple group of order <= n')
        return trace.word, trace
    orders = set()
    for entry in entries:
        orders |= order_set(entry.spec, enumeration_ceiling)
    trace = order_divisor_trace(orders, ' '.join(e.name for e in entries))
    return trace.word, trace


def psl3_family_scope(n: int) -> List[GroupSpec]:
    specs = []
    q = 2
    while q ** 3 * (q ** 3 - 1) * (q * q - 1) // 3 <= n:
        if is_prime_power(q) and GroupSpec('PSL3', q).order <= n:
            specs.append(GroupSpec('PSL3', q))
        q += 1
    q = 3
    while q ** 3 * (q ** 3 + 1) * (q * q - 1) // 3 <= n:
        if is_prime_power(q) and GroupSpec('PSU3', q).order <= n:
            specs.append(GroupSpec('PSU3', q))
        q += 1
    return specs


def psl3_family_law(n: int, ceiling: int = DEFAULT_ENUMERATION_CEILING,
                    max_length: int = MAX_WORD_LENGTH) -> Tuple[Word, LawTrace]:
    specs = psl3_family_scope(n)
    if not specs:
        trace = degenerate_trace('no PSL3(q) or PSU3(q) of order <= n')
        return trace.word, trace
    parts = [psl3_psu3_order_trace(s.parameter, s.family == 'PSU3', ceiling) for s in specs]
    trace = union_trace(parts, ' '.join(map(str, specs)), max_length)
    return trace.word, trace


def all_simple_law(params: PipelineParams) -> Tuple[Word, LawTrace]:
    """Union of the non-special, PSL3/PSU3 and PSL2 family laws."""
    n = params.n
    if n > params.catalog_ceiling:
        raise CeilingExceeded(f'simple groups up to {n} exceed the catalog ceiling {params.catalog_ceiling}')
    components = []
    _, non_special = simple_non_special_law(n, params.catalog_ceiling, params.enumeration_ceiling)
    _, psl3 = psl3_family_law(n, params.enumeration_ceiling, params.max_word_length)
    components += [t for t in (non_special, psl3) if t.kind != 'degenerate']
    if n >= 60:
        _, psl2 = psl2_family_law(params)
        if psl2.kind != 'degenerate':
            components.append(psl2)
    if params.include_abelian_simple:
        components.append(atom(commutator(X_WORD, Y_WORD), 'word', 'abelian groups'))
    if not components:
        trace = degenerate_trace('no simple group of order <= n')
        return trace.word, trace
    trace = union_trace(components, f'simple groups of order <= {n}', params.max_word_length)
    return trace.word, trace


def layer_schedule(n: int, min_growth: float = 1.1) -> List[float]:
    """a_1 = 1, a_{k+1} = max(exp(a_k^(4/27)), min_growth a_k), up to the first value above n."""
    if min_growth <= 1:
        raise ValueError(f'schedule growth floor must exceed 1, got {min_growth}')
    points = [1.0]
    while points[-1] <= n:
        a = points[-1]
        points.append(max(math.exp(a ** (4 / 27)), min_growth * a))
    return points


def derived_length_bound(m: float) -> int:
    return int(math.floor(math.log2(max(m, 1)))) + 1


def solvable_part(m: float, max_length: int = MAX_WORD_LENGTH) -> LawTrace:
    return solvable_trace(derived_length_bound(m), max_length)


def semisimple_part(m: float, params: PipelineParams) -> LawTrace:
    """Simple law, then an outer solvable layer of derived length 3, then Sym(floor(log2 m))."""
    bound = int(math.floor(m))
    if bound < 60:
        return degenerate_trace('no semisimple group of order <= m')
    simple = all_simple_law(PipelineParams(**{**params.__dict__, 'n': bound}))[1]
    outer = extension_trace(simple, solvable_trace(3, params.max_word_length), max_length=params.max_word_length)
    degree = int(math.floor(math.log2(bound)))
    wrap = order_divisor_trace(order_set(GroupSpec('Sym', degree)), f'Sym:{degree}')
    if wrap.kind == 'degenerate':
        return outer
    return extension_trace(outer, wrap, f'semisimple groups of order <= {bound}', params.max_word_length)


def layered_law(params: PipelineParams) -> LawTrace:
    n = params.n
    schedule = layer_schedule(n, params.schedule_min_growth)
    layers = []
    best_solvable = None
    for j in range(len(schedule) - 1):
        normal = solvable_part(min(schedule[j + 1], n), params.max_word_length)
        quotient = semisimple_part(n / schedule[j], params)
        if quotient.kind == 'degenerate':
            if best_solvable is None or int(normal.params['d']) > int(best_solvable.params['d']):
                best_solvable = normal
            continue
        layer = extension_trace(normal, quotient, f'layer {j + 1}', params.max_word_length)
        if all(layer.word != other.word for other in layers):
            layers.append(layer)
    if best_solvable is not None:
        layers.append(best_solvable)
    trace = union_trace(layers, f'groups of order <= {n}', params.max_word_length)
    trace.params['layers'] = str(len(schedule) - 1)
    return trace


def all_groups_law(params: PipelineParams) -> Tuple[Word, LawTrace]:
    """The shorter of the layered construction and x^lcm(1..n)."""
    n = params.n
    candidates = []
    try:
        candidates.append(layered_law(params))
    except BudgetExceeded as e:
        logger.warning(f'layered law for n = {n} not built: {e}')
    obvious = math.lcm(*range(1, n + 1))
    if obvious <= params.max_word_length:
        candidates.append(power_trace(obvious, f'groups of order <= {n}'))
    if not candidates:
        raise BudgetExceeded(f'no law for all groups of order <= {n} within {params.max_word_length} letters')
    trace = min(candidates, key=lambda t: t.length)
    trace.scope = f'groups of order <= {n}'
    return trace.word, trace


def rf_lower_bound_report(n_values: Sequence[int], params: Optional[PipelineParams] = None,
                          oracle_budget: int = 24) -> pd.DataFrame:
    """For each n: the length L(n) of the all-groups law and the implied F(L(n)) >= n + 1."""
    rows = []
    for n in n_values:
        local = PipelineParams(**{**(params.__dict__ if params else {}), 'n': n})
        word, trace = all_groups_law(local)
        row = {'n': n, 'length': len(word), 'bound': f'F({len(word)}) >= {n + 1}', 'oracle_k': '', 'certified': ''}
        if n + 1 <= oracle_budget:
            k = k_of(word, n + 1)
            row['oracle_k'] = '>' + str(n + 1) if k is None else str(k)
            row['certified'] = k is None or k > n
        rows.append(row)
    return pd.DataFrame(rows, columns=['n', 'length', 'bound', 'oracle_k', 'certified'])


TARGETS = ('all', 'simple', 'psl2', 'psl3', 'non-special')


def construct(target: str, params: PipelineParams) -> Tuple[Word, LawTrace]:
    """The law of a construction target for order bound params.n; inner words are released."""
    if target == 'all':
        word, trace = all_groups_law(params)
    elif target == 'simple':
        word, trace = all_simple_law(params)
    elif target == 'psl2':
        word, trace = psl2_family_law(params)
    elif target == 'psl3':
        word, trace = psl3_family_law(params.n, params.enumeration_ceiling, params.max_word_length)
    elif target == 'non-special':
        word, trace = simple_non_special_law(params.n, params.catalog_ceiling, params.enumeration_ceiling)
    else:
        raise ValueError(f'unknown construction target {target!r}, expected one of {", ".join(TARGETS)}')
    trace.release_words()
    return word, trace


def target_specs(target: str, params: PipelineParams) -> List[GroupSpec]:
    """Groups a target's law is checked on one by one; 'all' is left to the quotient oracle."""
    n = params.n
    if target == 'psl2':
        scope = psl2_scope(n, params.bad_primes)
        return [GroupSpec('PSL2', q) for q in sorted(scope['generic'] + scope['order_law'])]
    if target == 'psl3':
        return psl3_family_scope(n)
    if target == 'non-special':
        return [e.spec for e in simple_catalog(n, params.catalog_ceiling) if not e.special]
    if target == 'simple':
        return [e.spec for e in simple_catalog(n, params.catalog_ceiling)]
    if target == 'all':
        return []
    raise ValueError(f'unknown construction target {target!r}, expected one of {", ".join(TARGETS)}')
