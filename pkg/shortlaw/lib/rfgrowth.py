"""
Residual finiteness oracle for F2.

A subgroup of index m is a complete coset table: the right actions of x, X, y, Y on the cosets
0..m-1, coset 0 being the subgroup itself. Tables are kept in standard form, cosets numbered in
the order a row-major scan first reaches them, so every subgroup has exactly one table.
Normal subgroups are the tables whose action is regular. They are enumerated directly, the
regularity constraint pruning partial tables, and a word w is detected by a quotient exactly when
its trace from coset 0 does not come back to 0.
"""
import functools
import logging
import math
import os
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy.combinatorics import Permutation, PermutationGroup

from shortlaw.lib.catalog import format_cycles, parse_cycles
from shortlaw.lib.errors import BudgetExceeded, GroupSpecError, TrivialWordError
from shortlaw.lib.evaluation import VerificationRecord
from shortlaw.lib.freeword import Word, canonical_form, format_word, is_cyclically_reduced, reduced_words, run_lengths
from shortlaw.lib.utils import atomic_write_text

logger = logging.getLogger(__name__)

DEFAULT_SUBGROUP_BUDGET = 14
DEFAULT_NORMAL_BUDGET = 24
DEFAULT_WORD_BUDGET = 8
CACHE_HEADER = '# shortlaw normal quotients of F2'


@dataclass(frozen=True)
class CosetTable:
    """Complete standard coset table; rows[i] = (i.x, i.X, i.y, i.Y)."""
    rows: Tuple[Tuple[int, int, int, int], ...]

    @property
    def index(self) -> int:
        return len(self.rows)

    @property
    def x(self) -> Tuple[int, ...]:
        return tuple(row[0] for row in self.rows)

    @property
    def y(self) -> Tuple[int, ...]:
        return tuple(row[2] for row in self.rows)

    def trace(self, w: Word, start: int = 0) -> int:
        point = start
        for letter, k in run_lengths(w):
            for _ in range(k):
                point = self.rows[point][letter]
        return point

    def contains(self, w: Word) -> bool:
        return self.trace(w) == 0

    def is_normal(self) -> bool:
        return _regular(self.rows)


@dataclass(frozen=True)
class NormalQuotient:
    """Regular action of x and y on index points; the quotient F2/N in its right regular representation."""
    index: int
    x: Tuple[int, ...]
    y: Tuple[int, ...]

    @property
    def key(self) -> str:
        return ','.join(map(str, self.x)) + '/' + ','.join(map(str, self.y))

    def table(self) -> CosetTable:
        x_inv = np.argsort(self.x)
        y_inv = np.argsort(self.y)
        return CosetTable(tuple((self.x[i], int(x_inv[i]), self.y[i], int(y_inv[i])) for i in range(self.index)))

    def order(self) -> int:
        """Order of the permutation group generated by the two images."""
        return int(PermutationGroup([Permutation(list(self.x)), Permutation(list(self.y))]).order())

    def describe(self) -> str:
        return f'order {self.index}: x -> {format_cycles(self.x)}, y -> {format_cycles(self.y)}'


def _regular(table) -> bool:
    """
    True when, seen from every coset c, the defined part of the table agrees with the view from
    coset 0, i.e. the partial map 0 -> c extends along defined edges to an injective map without
    conflicts. On a complete table this is exactly regularity of the action.
    """
    m = len(table)
    for c in range(1, m):
        image = [-1] * m
        used = [False] * m
        image[0] = c
        used[c] = True
        queue = [0]
        for i in queue:
            source = table[i]
            target = table[image[i]]
            for col in range(4):
                j = source[col]
                k = target[col]
                if j < 0 or k < 0:
                    continue
                if image[j] < 0:
                    if used[k]:
                        return False
                    image[j] = k
                    used[k] = True
                    queue.append(j)
                elif image[j] != k:
                    return False
    return True


def _standard_tables(max_index: int, regular: bool) -> Iterator[Tuple[Tuple[int, ...], ...]]:
    table = [[-1, -1, -1, -1]]

    def extend(pos):
        while pos < 4 * len(table) and table[pos >> 2][pos & 3] >= 0:
            pos += 1
        if pos == 4 * len(table):
            yield tuple(tuple(row) for row in table)
            return
        row, col = divmod(pos, 4)
        back = col ^ 1
        for target in range(len(table)):
            if table[target][back] >= 0:
                continue
            table[row][col] = target
            table[target][back] = row
            if not regular or _regular(table):
                yield from extend(pos + 1)
            table[row][col] = -1
            table[target][back] = -1
        if len(table) < max_index:
            table.append([-1, -1, -1, -1])
            table[row][col] = len(table) - 1
            table[-1][back] = row
            if not regular or _regular(table):
                yield from extend(pos + 1)
            table.pop()
            table[row][col] = -1

    yield from extend(0)


def low_index_subgroups(max_index: int, budget: int = DEFAULT_SUBGROUP_BUDGET) -> Iterator[CosetTable]:
    """One standard coset table per subgroup of F2 of index <= max_index."""
    if max_index > budget:
        raise BudgetExceeded(f'low index sweep to index {max_index} exceeds the budget {budget}')
    if max_index < 1:
        return
    for rows in _standard_tables(max_index, regular=False):
        yield CosetTable(rows)


def hall_counts(max_index: int) -> List[int]:
    """Number of subgroups of F2 of each index 1..max_index, by Hall's recursion."""
    counts = []
    for m in range(1, max_index + 1):
        a = m * math.factorial(m) - sum(math.factorial(m - k) * counts[k - 1] for k in range(1, m))
        counts.append(a)
    return counts


@functools.lru_cache(maxsize=8)
def _normal_quotients(max_order: int) -> Tuple[NormalQuotient, ...]:
    quotients = [NormalQuotient(len(rows), tuple(r[0] for r in rows), tuple(r[2] for r in rows))
                 for rows in _standard_tables(max_order, regular=True)]
    quotients.sort(key=lambda q: (q.index, q.x, q.y))
    logger.debug(f'{len(quotients)} normal subgroups of index <= {max_order}')
    return tuple(quotients)


def normal_quotients(max_order: int, budget: int = DEFAULT_NORMAL_BUDGET) -> Tuple[NormalQuotient, ...]:
    """Every normal subgroup of F2 of index <= max_order, as its regular quotient action, by (index, key)."""
    if max_order > budget:
        raise BudgetExceeded(f'normal quotient sweep to order {max_order} exceeds the budget {budget}')
    if max_order < 1:
        return ()
    return _normal_quotients(max_order)


@functools.lru_cache(maxsize=8)
def _letter_actions(max_order: int) -> List[Tuple[int, np.ndarray]]:
    """[(index, actions of shape (count, 4, index))] grouped by index, in increasing order."""
    quotients = _normal_quotients(max_order)
    groups: Dict[int, List[np.ndarray]] = {}
    for q in quotients:
        x = np.asarray(q.x, dtype=np.intp)
        y = np.asarray(q.y, dtype=np.intp)
        groups.setdefault(q.index, []).append(np.stack([x, np.argsort(x), y, np.argsort(y)]))
    return [(m, np.stack(actions)) for m, actions in sorted(groups.items())]


def _perm_power(perms: np.ndarray, k: int) -> np.ndarray:
    result = np.broadcast_to(np.arange(perms.shape[-1]), perms.shape).copy()
    base = perms
    while k:
        if k & 1:
            result = np.take_along_axis(base, result, axis=-1)
        k >>= 1
        if k:
            base = np.take_along_axis(base, base, axis=-1)
    return result


def _moves_base(runs: Sequence[Tuple[int, int]], actions: np.ndarray) -> np.ndarray:
    """Per quotient: does the trace of the word from point 0 end away from 0."""
    count, _, m = actions.shape
    points = np.zeros(count, dtype=np.intp)
    rows = np.arange(count)
    period = math.lcm(*range(1, m + 1))
    for letter, k in runs:
        k %= period
        if k:
            points = _perm_power(actions[:, letter, :], k)[rows, points]
    return points != 0


def _detections(w: Word, max_order: int) -> List[NormalQuotient]:
    quotients = _normal_quotients(max_order)
    runs = run_lengths(w)
    found = []
    offset = 0
    for m, actions in _letter_actions(max_order):
        hits = np.flatnonzero(_moves_base(runs, actions))
        found.extend(quotients[offset + i] for i in hits)
        offset += len(actions)
    return found


def k_of(w: Word, max_order: int, budget: int = DEFAULT_NORMAL_BUDGET) -> Optional[int]:
    """
    Smallest order of a finite quotient of F2 in which w survives, or None when every quotient of
    order <= max_order kills w, that is, when w is a law in every group of order <= max_order.
    """
    if w.is_trivial():
        raise TrivialWordError('k is undefined on the empty word')
    if not normal_quotients(max_order, budget):
        return None
    runs = run_lengths(w)
    for m, actions in _letter_actions(max_order):
        if _moves_base(runs, actions).any():
            return m
    return None


@dataclass(frozen=True)
class GrowthValue:
    n: int
    value: int
    exact: bool
    witness: Word

    def __str__(self):
        relation = '=' if self.exact else '>='
        return f'F({self.n}) {relation} {self.value}'


def rf_growth(n: int, max_order: int, word_budget: int = DEFAULT_WORD_BUDGET,
              budget: int = DEFAULT_NORMAL_BUDGET) -> GrowthValue:
    """
    Residual finiteness growth F(n) of F2 in the basis x, y. Only cyclically reduced words are
    visited, one per orbit of rotation, inversion and the signed generator permutations; all of
    these preserve k, and every other word is conjugate to a shorter one.
    """
    if n < 1:
        raise TrivialWordError(f'F({n}) ranges over no non-trivial words')
    if n > word_budget:
        raise BudgetExceeded(f'word enumeration to length {n} exceeds the budget {word_budget}')
    quotients = normal_quotients(max_order, budget)
    best, best_word = 0, None
    visited = 0
    seen = set()
    for length in range(1, n + 1):
        for w in reduced_words(length):
            if not is_cyclically_reduced(w):
                continue
            key = canonical_form(w, cyclic=True)
            if key in seen:
                continue
            seen.add(key)
            visited += 1
            k = k_of(w, max_order, budget)
            if k is None:
                logger.info(f'{format_word(w)} is a law for every group of order <= {max_order}')
                return GrowthValue(n, max_order + 1, False, w)
            if k > best:
                best, best_word = k, w
    logger.debug(f'F({n}): {visited} word classes against {len(quotients)} quotients')
    return GrowthValue(n, best, True, best_word)


def certify_law(w: Word, n: int, budget: int = DEFAULT_NORMAL_BUDGET) -> VerificationRecord:
    """
    Complete check that w is a law in every group of order <= n: every 2-generated group of order
    <= n is one of the normal quotients swept here. A FAIL carries the smallest detecting quotient.
    """
    if w.is_trivial():
        raise TrivialWordError('the empty word is not a law')
    quotients = normal_quotients(n, budget)
    detecting = _detections(w, n) if quotients else []
    witness_text = detecting[0].describe() if detecting else ''
    return VerificationRecord(f'order<={n}', 'oracle', len(quotients), len(detecting), None, witness_text)


def quotient_export(quotients: Sequence[NormalQuotient], path: str, max_order: int):
    lines = [CACHE_HEADER, f'max_order: {max_order}']
    lines += [f'{q.index} {format_cycles(q.x)} {format_cycles(q.y)} {q.key}' for q in quotients]
    atomic_write_text(path, '\n'.join(lines) + '\n')


def quotient_import(path: str) -> Tuple[int, Tuple[NormalQuotient, ...]]:
    max_order = None
    quotients = []
    with open(path, encoding='utf-8') as f:
        for number, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            if line.startswith('max_order:'):
                max_order = int(line.split(':', 1)[1])
                continue
            try:
                index, x_text, y_text, key = line.split()
                index = int(index)
                q = NormalQuotient(index, parse_cycles(x_text, index), parse_cycles(y_text, index))
            except ValueError as e:
                raise GroupSpecError(f'{path}:{number}: unreadable quotient line {line!r}') from e
            if q.key != key:
                raise GroupSpecError(f'{path}:{number}: key {key} does not match the permutations')
            quotients.append(q)
    if max_order is None:
        raise GroupSpecError(f'{path} has no max_order line')
    return max_order, tuple(quotients)


def cache_path(cache_dir: str, max_order: int) -> str:
    return os.path.join(cache_dir, f'normal-quotients-{max_order}.txt')


def cached_normal_quotients(max_order: int, cache_dir: str,
                            budget: int = DEFAULT_NORMAL_BUDGET) -> Tuple[NormalQuotient, ...]:
    """normal_quotients(max_order) read from, or written to, the cache directory."""
    path = cache_path(cache_dir, max_order)
    if os.path.exists(path):
        stored_order, quotients = quotient_import(path)
        if stored_order == max_order:
            logger.debug(f'read {len(quotients)} quotients from {path}')
            return quotients
        logger.warning(f'{path} holds quotients to order {stored_order}, rebuilding')
    quotients = normal_quotients(max_order, budget)
    quotient_export(quotients, path, max_order)
    return quotients


def rf_table(n_values: Sequence[int], max_order: int, word_budget: int = DEFAULT_WORD_BUDGET,
             budget: int = DEFAULT_NORMAL_BUDGET) -> pd.DataFrame:
    rows = []
    for n in n_values:
        value = rf_growth(n, max_order, word_budget, budget)
        rows.append({'n': n, 'F': value.value, 'exact': value.exact, 'witness': format_word(value.witness)})
    return pd.DataFrame(rows, columns=['n', 'F', 'exact', 'witness'])
