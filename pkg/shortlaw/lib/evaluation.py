import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from shortlaw.lib.errors import BudgetExceeded, ConstructionError, GroupSpecError
from shortlaw.lib.finitegroups import (DEFAULT_ENUMERATION_CEILING, DEFAULT_TABLE_CEILING, FiniteGroup,
                                       GroupSpec, PermGroup, as_group, cayley_table, enumerate_elements)
from shortlaw.lib.freeword import (Word, canonical_form, is_cyclically_reduced, reduced_words, run_lengths,
                                   stream_generator)
from shortlaw.lib.lawcomb import LawTrace, parse_conjugators, parse_pair

logger = logging.getLogger(__name__)

DEFAULT_PAIR_BUDGET = 1_500_000
DEFAULT_SAMPLE_PAIRS = 1_000_000
DEFAULT_BATCH_SIZE = 262_144
DEFAULT_SEARCH_BUDGET = 500_000_000


class TableArithmetic:
    """Elements are indices into a Cayley table."""

    def __init__(self, table: np.ndarray, identity: int):
        self.table = table
        self.identity = identity
        rows, cols = np.nonzero(table == identity)
        self.inverse = np.empty(len(table), dtype=table.dtype)
        self.inverse[rows] = cols

    def one(self, like: np.ndarray) -> np.ndarray:
        return np.full(like.shape[:1], self.identity, dtype=self.table.dtype)

    def mul(self, a, b):
        return self.table[a, b]

    def inv(self, a):
        return self.inverse[a]

    def is_identity(self, a):
        return a == self.identity


class BackendArithmetic:
    """Elements are representation rows of a FiniteGroup."""

    def __init__(self, group: FiniteGroup):
        self.group = group

    def one(self, like: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.group.identity, (like.shape[0], self.group.width)).copy()

    def mul(self, a, b):
        return self.group.mul(a, b)

    def inv(self, a):
        return self.group.inv(a)

    def is_identity(self, a):
        return self.group.is_identity(a)


Arithmetic = Union[TableArithmetic, BackendArithmetic]


def _power(arith: Arithmetic, a, k: int):
    result = None
    base = a
    while k:
        if k & 1:
            result = base if result is None else arith.mul(result, base)
        k >>= 1
        if k:
            base = arith.mul(base, base)
    return arith.one(a) if result is None else result


def evaluate_word(arith: Arithmetic, w: Word, g, h):
    """w(g, h) on batches of elements."""
    letters = [g, arith.inv(g), h, arith.inv(h)]
    result = None
    for letter, k in run_lengths(w):
        chunk = _power(arith, letters[letter], k)
        result = chunk if result is None else arith.mul(result, chunk)
    return arith.one(g) if result is None else result


@dataclass(frozen=True)
class WordPlan:
    word: Word


@dataclass(frozen=True)
class ComposePlan:
    """outer(first(g, h), second(g, h))"""
    outer: 'Plan'
    first: 'Plan'
    second: 'Plan'


@dataclass(frozen=True)
class CommutatorPlan:
    """[left^c1, right^c2]"""
    left: 'Plan'
    right: 'Plan'
    c1: Word
    c2: Word


@dataclass(frozen=True)
class SolvablePlan:
    d: int


Plan = Union[WordPlan, ComposePlan, CommutatorPlan, SolvablePlan]


def _union_plan(children: List[Plan], conjugators: List[Tuple[Word, Word]]) -> Plan:
    items = list(children)
    pending = iter(conjugators)
    while len(items) > 1:
        combined = []
        for i in range(0, len(items) - 1, 2):
            c1, c2 = next(pending)
            combined.append(CommutatorPlan(items[i], items[i + 1], c1, c2))
        if len(items) % 2:
            combined.append(items[-1])
        items = combined
    return items[0]


def compile_plan(trace: LawTrace) -> Plan:
    """Straight-line evaluation plan of a construction trace."""
    kind = trace.kind
    if kind in ('union', 'divisor') and trace.children:
        children = [compile_plan(c) for c in trace.children]
        return _union_plan(children, parse_conjugators(trace.params.get('conjugators', '')))
    if kind == 'extension':
        normal, quotient = (compile_plan(c) for c in trace.children)
        p1, p2 = parse_pair(trace.params['second_pair'])
        second = ComposePlan(quotient, WordPlan(p1), WordPlan(p2))
        return ComposePlan(normal, quotient, second)
    if kind == 'substitution':
        template, u, v = (compile_plan(c) for c in trace.children)
        return ComposePlan(template, u, v)
    if kind == 'solvable' and 'padding' not in trace.params:
        return SolvablePlan(int(trace.params['d']))
    if trace.word is None:
        raise ConstructionError(f'{kind} node has neither a word nor a structure to evaluate')
    return WordPlan(trace.word)


def _conj(arith, a, c: Word, g, h):
    if c.is_trivial():
        return a
    cv = evaluate_word(arith, c, g, h)
    return arith.mul(arith.mul(arith.inv(cv), a), cv)


def _commutator(arith, a, b):
    return arith.mul(arith.mul(arith.inv(a), arith.inv(b)), arith.mul(a, b))


def _solvable(arith, d: int, a, b):
    if d == 1:
        return _commutator(arith, a, b)
    return _commutator(arith, _solvable(arith, d - 1, a, b), _solvable(arith, d - 1, b, arith.inv(a)))


def evaluate_plan(arith: Arithmetic, plan: Plan, g, h):
    if isinstance(plan, WordPlan):
        return evaluate_word(arith, plan.word, g, h)
    if isinstance(plan, ComposePlan):
        first = evaluate_plan(arith, plan.first, g, h)
        second = evaluate_plan(arith, plan.second, g, h)
        return evaluate_plan(arith, plan.outer, first, second)
    if isinstance(plan, CommutatorPlan):
        left = _conj(arith, evaluate_plan(arith, plan.left, g, h), plan.c1, g, h)
        right = _conj(arith, evaluate_plan(arith, plan.right, g, h), plan.c2, g, h)
        return _commutator(arith, left, right)
    return _solvable(arith, plan.d, g, h)


def as_plan(law: Union[Word, LawTrace, Plan]) -> Plan:
    if isinstance(law, Word):
        return WordPlan(law)
    if isinstance(law, LawTrace):
        return compile_plan(law)
    return law


def evaluate(w: Word, g, h, group) -> np.ndarray:
    """w(g, h) for single elements g, h of the group."""
    group = as_group(group)
    g = np.atleast_2d(group.check(g))
    h = np.atleast_2d(group.check(h))
    if g.shape != h.shape:
        raise GroupSpecError(f'elements of different shapes for {group.spec}')
    result = evaluate_word(BackendArithmetic(group), w, g, h)
    return group.canonical(result)[0]


def format_element(group, a) -> str:
    group = as_group(group)
    a = np.asarray(a).reshape(-1)
    if isinstance(group, PermGroup):
        from shortlaw.lib.catalog import format_cycles
        return format_cycles(a.tolist())
    d = group.d
    return '[' + ','.join('[' + ','.join(str(int(v)) for v in a[i * d:(i + 1) * d]) + ']' for i in range(d)) + ']'


@dataclass
class VerificationRecord:
    group: str
    mode: str
    pairs: int
    violations: int
    witness: Optional[Tuple[int, int]] = None
    witness_text: str = ''
    seed: Optional[int] = None

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class _Job:
    spec: GroupSpec
    plan: Plan
    start: int
    stop: int
    exhaustive: bool
    seed: int
    chunk: int
    table_ceiling: int
    ceiling: int


def _arithmetic(group: FiniteGroup, table_ceiling: int, ceiling: int):
    if group.order <= table_ceiling:
        elements, table = cayley_table(group, table_ceiling)
        identity = int(np.flatnonzero(group.is_identity(elements))[0])
        return TableArithmetic(table, identity), None
    return BackendArithmetic(group), enumerate_elements(group, ceiling)


def _run_job(job: _Job) -> Tuple[int, Optional[int], Optional[Tuple[int, int]]]:
    """(violations, first violating position, its pair of element indices)."""
    group = as_group(job.spec)
    arith, elements = _arithmetic(group, job.table_ceiling, job.ceiling)
    n = group.order
    count = job.stop - job.start
    if job.exhaustive:
        positions = np.arange(job.start, job.stop, dtype=np.int64)
        i, j = positions // n, positions % n
    else:
        rng = stream_generator(job.seed, job.chunk)
        i = rng.integers(0, n, size=count)
        j = rng.integers(0, n, size=count)
    if elements is None:
        g, h = i, j
    else:
        g, h = elements[i], elements[j]
    bad = ~arith.is_identity(evaluate_plan(arith, job.plan, g, h))
    violations = int(bad.sum())
    if not violations:
        return 0, None, None
    first = int(np.flatnonzero(bad)[0])
    return violations, job.start + first, (int(i[first]), int(j[first]))


def verify(law: Union[Word, LawTrace, Plan], spec, pair_budget: int = DEFAULT_PAIR_BUDGET,
           sample_pairs: int = DEFAULT_SAMPLE_PAIRS, batch_size: int = DEFAULT_BATCH_SIZE, workers: int = 1,
           seed: int = 0, table_ceiling: int = DEFAULT_TABLE_CEILING,
           ceiling: int = DEFAULT_ENUMERATION_CEILING) -> VerificationRecord:
    """
    Check that the law vanishes on group x group: every pair when |G|^2 fits the pair budget,
    otherwise sample_pairs uniform pairs from streams keyed by (seed, batch number).
    Counts and the reported witness do not depend on the number of workers.
    """
    group = as_group(spec)
    plan = as_plan(law)
    n = group.order
    exhaustive = n * n <= pair_budget
    total = n * n if exhaustive else sample_pairs
    jobs = [_Job(group.spec, plan, start, min(start + batch_size, total), exhaustive, seed, k,
                 table_ceiling, ceiling)
            for k, start in enumerate(range(0, total, batch_size))]
    logger.debug(f'verifying on {group.spec}: {total} pairs in {len(jobs)} batches')

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(_run_job, jobs))
    else:
        results = [_run_job(job) for job in jobs]

    violations = sum(r[0] for r in results)
    witness = None
    witness_text = ''
    firsts = [r for r in results if r[1] is not None]
    if firsts:
        _, _, witness = min(firsts, key=lambda r: r[1])
        elements = enumerate_elements(group, ceiling)
        witness_text = f'({format_element(group, elements[witness[0]])}, {format_element(group, elements[witness[1]])})'
    mode = 'exhaustive' if exhaustive else f'sampled:{sample_pairs}'
    return VerificationRecord(str(group.spec), mode, total, violations, witness, witness_text,
                              None if exhaustive else seed)


def is_law(law: Union[Word, LawTrace, Plan], spec, **kwargs) -> bool:
    return verify(law, spec, **kwargs).passed


def vanishing_mask(law: Union[Word, LawTrace, Plan], spec, table_ceiling: int = DEFAULT_TABLE_CEILING) -> np.ndarray:
    """Boolean |G| x |G| matrix of the vanishing set Z(G, w), indexed by element position."""
    group = as_group(spec)
    elements, table = cayley_table(group, table_ceiling)
    identity = int(np.flatnonzero(group.is_identity(elements))[0])
    arith = TableArithmetic(table, identity)
    n = len(elements)
    i, j = np.divmod(np.arange(n * n, dtype=np.int64), n)
    return arith.is_identity(evaluate_plan(arith, as_plan(law), i, j)).reshape(n, n)


def shortest_law(spec, max_length: int, budget: int = DEFAULT_SEARCH_BUDGET,
                 table_ceiling: int = DEFAULT_TABLE_CEILING,
                 ceiling: int = DEFAULT_ENUMERATION_CEILING) -> Optional[Word]:
    """
    A law of minimal length <= max_length for the group, or None. Candidates are cyclically reduced
    words, one per class under rotation, inversion and the signed generator permutations; each class
    is checked on all |G|^2 pairs and the class representative is returned.
    """
    group = as_group(spec)
    words = sum(4 * 3 ** (k - 1) for k in range(1, max_length + 1))
    if group.order ** 2 * words > budget:
        raise BudgetExceeded(f'law search on {group.spec} to length {max_length} needs '
                             f'{group.order ** 2 * words} evaluations, budget {budget}')
    arith, elements = _arithmetic(group, table_ceiling, ceiling)
    n = group.order
    i, j = np.divmod(np.arange(n * n, dtype=np.int64), n)
    g, h = (i, j) if elements is None else (elements[i], elements[j])
    seen = set()
    for length in range(1, max_length + 1):
        for w in reduced_words(length):
            if not is_cyclically_reduced(w):
                continue
            key = canonical_form(w, cyclic=True)
            if key in seen:
                continue
            seen.add(key)
            if arith.is_identity(evaluate_word(arith, key, g, h)).all():
                logger.debug(f'{group.spec}: law of length {length} after {len(seen)} classes')
                return key
    return None
