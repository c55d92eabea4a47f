import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import pandas as pd

from shortlaw.lib.errors import BudgetExceeded, ConstructionError, TrivialWordError
from shortlaw.lib.fields import prime_power
from shortlaw.lib.finitegroups import (DEFAULT_ENUMERATION_CEILING, GroupSpec, order_set)
from shortlaw.lib.freeword import (METABELIAN_TEMPLATE, X_WORD, Y_WORD, Word, commutator,
                                   conjugate, format_word, inverse, parse_word, power,
                                   reduced_words, substitute)

MAX_WORD_LENGTH = 400_000_000
# traces keep inline words up to this length; longer nodes keep only their length
TRACE_WORD_LIMIT = 4096

logger = logging.getLogger(__name__)


def _conjugator_candidates() -> List[Word]:
    words = []
    for length in range(3):
        words.extend(reduced_words(length))
    return words


CONJUGATORS = _conjugator_candidates()


@dataclass
class LawTrace:
    kind: str
    word: Optional[Word]
    scope: str = ''
    children: List['LawTrace'] = field(default_factory=list)
    params: Dict[str, str] = field(default_factory=dict)
    length: int = 0

    def __post_init__(self):
        if self.word is not None:
            self.length = len(self.word)
            if self.word.is_trivial():
                raise ConstructionError(f'{self.kind} node produced the empty word')

    def nodes(self) -> Iterator['LawTrace']:
        yield self
        for child in self.children:
            yield from child.nodes()

    def release_words(self, limit: int = TRACE_WORD_LIMIT):
        """Drop inline words longer than limit below the root; evaluation uses the structure."""
        for child in self.children:
            for node in child.nodes():
                if node.word is not None and node.length > limit and node.children:
                    node.word = None

    def to_lines(self, indent: int = 0, limit: int = TRACE_WORD_LIMIT) -> List[str]:
        pad = '  ' * indent
        lines = [f'{pad}- kind: {self.kind}']
        if self.scope:
            lines.append(f'{pad}  scope: {self.scope}')
        for key in sorted(self.params):
            lines.append(f'{pad}  {key}: {self.params[key]}')
        lines.append(f'{pad}  length: {self.length}')
        if self.word is not None and self.length <= limit:
            lines.append(f'{pad}  word: {format_word(self.word)}')
        for child in self.children:
            lines.extend(child.to_lines(indent + 1, limit))
        return lines


def _check_nontrivial(words: Sequence[Word]):
    for w in words:
        if w.is_trivial():
            raise TrivialWordError('combinators need non-trivial input words')


def atom(word: Word, kind: str = 'word', scope: str = '', **params) -> LawTrace:
    return LawTrace(kind, word, scope, params={k: str(v) for k, v in params.items()})


def degenerate_trace(scope: str = 'trivial group') -> LawTrace:
    return LawTrace('degenerate', X_WORD, scope)


def power_law(e: int) -> Word:
    """x^e: a law for every group whose exponent divides e."""
    if e < 1:
        raise TrivialWordError(f'power law needs e >= 1, got {e}')
    return power(X_WORD, e)


def power_trace(e: int, scope: str = '') -> LawTrace:
    return atom(power_law(e), 'power', scope or f'exponent divides {e}', exponent=e)


def _merge(u: Word, v: Word, max_length: int) -> Tuple[Word, Word, Word]:
    """[u^c1, v^c2] for the first conjugator pair giving a non-trivial word."""
    if 2 * (len(u) + len(v)) > max_length:
        raise BudgetExceeded(f'union of words of lengths {len(u)} and {len(v)} exceeds {max_length} letters')
    for c1 in CONJUGATORS:
        uc = conjugate(u, c1)
        for c2 in CONJUGATORS:
            w = commutator(uc, conjugate(v, c2))
            if not w.is_trivial():
                return w, c1, c2
    raise ConstructionError(f'no conjugator pair separates words of lengths {len(u)} and {len(v)}')


def _union(words: Sequence[Word], max_length: int) -> Tuple[Word, List[Tuple[Word, Word]]]:
    """Balanced pairwise combination; merges listed in the order they are made."""
    items = list(words)
    merges = []
    while len(items) > 1:
        combined = []
        for i in range(0, len(items) - 1, 2):
            w, c1, c2 = _merge(items[i], items[i + 1], max_length)
            merges.append((c1, c2))
            combined.append(w)
        if len(items) % 2:
            combined.append(items[-1])
        items = combined
    return items[0], merges


def union_law(ws: Sequence[Word], max_length: int = MAX_WORD_LENGTH) -> Word:
    return union_trace([atom(w) for w in ws], max_length=max_length).word


def union_trace(children: Sequence[LawTrace], scope: str = '', max_length: int = MAX_WORD_LENGTH) -> LawTrace:
    """Union combinator: the vanishing set of the result contains those of all inputs."""
    if not children:
        raise ConstructionError('union of zero words has no scope')
    words = [c.word for c in children]
    _check_nontrivial(words)
    if len(children) == 1:
        return children[0]
    w, merges = _union(words, max_length)
    m = len(words)
    bound = 16 * m * m * max(len(x) for x in words)
    if len(w) > bound:
        raise ConstructionError(f'union of {m} words has length {len(w)} above {bound}')
    conjugators = ' '.join(f'{format_word(c1)},{format_word(c2)}' for c1, c2 in merges)
    return LawTrace('union', w, scope, list(children), {'m': str(m), 'conjugators': conjugators})


def _second_pairs() -> Iterator[Tuple[Word, Word]]:
    x, y, X, Y = X_WORD, Y_WORD, inverse(X_WORD), inverse(Y_WORD)
    yield from ((y, x), (Y, x), (y, X), (Y, X), (X, y), (x, Y), (X, Y))
    short = [w for length in (1, 2) for w in reduced_words(length)]
    for a in short:
        for b in short:
            if len(a) + len(b) > 2:
                yield a, b


def extension_law(w_N: Word, w_Q: Word, max_length: int = MAX_WORD_LENGTH) -> Word:
    return extension_trace(atom(w_N), atom(w_Q), max_length=max_length).word


def extension_trace(normal: LawTrace, quotient: LawTrace, scope: str = '',
                    max_length: int = MAX_WORD_LENGTH) -> LawTrace:
    """
    w_N(w_Q(x, y), w_Q(p1, p2)): both substituted words lie in N whenever w_Q is a law for the
    quotient, so the result is a law for the extension.
    """
    w_N, w_Q = normal.word, quotient.word
    _check_nontrivial([w_N, w_Q])
    bound = len(w_N) * len(w_Q)
    if bound > max_length:
        raise BudgetExceeded(f'extension of lengths {len(w_N)} x {len(w_Q)} exceeds {max_length} letters')
    first = w_Q
    for p1, p2 in _second_pairs():
        second = substitute(w_Q, p1, p2)
        w = substitute(w_N, first, second)
        if not w.is_trivial() and len(w) <= bound:
            params = {'second_pair': f'{format_word(p1)},{format_word(p2)}'}
            return LawTrace('extension', w, scope, [normal, quotient], params)
    raise ConstructionError(f'no second pair gives a non-trivial extension word (lengths {len(w_N)}, {len(w_Q)})')


def metabelian_law() -> Word:
    """[[x, y], [y, x^-1]], length 14."""
    return METABELIAN_TEMPLATE


def metabelian_trace() -> LawTrace:
    return atom(metabelian_law(), 'metabelian', 'metabelian groups')


def _solvable_step(s: Word) -> Tuple[Word, Optional[Word]]:
    w = commutator(s, substitute(s, Y_WORD, inverse(X_WORD)))
    if not w.is_trivial():
        return w, None
    for c in CONJUGATORS[1:]:
        w = commutator(s, conjugate(substitute(s, Y_WORD, inverse(X_WORD)), c))
        if not w.is_trivial():
            return w, c
    raise ConstructionError('derived series recursion collapsed')


def solvable_law(d: int, max_length: int = MAX_WORD_LENGTH) -> Word:
    return solvable_trace(d, max_length=max_length).word


def solvable_trace(d: int, max_length: int = MAX_WORD_LENGTH) -> LawTrace:
    """s_1 = [x, y], s_{k+1} = [s_k(x, y), s_k(y, x^-1)]: a law for derived length <= d."""
    if d < 1:
        raise TrivialWordError(f'derived length must be >= 1, got {d}')
    s = commutator(X_WORD, Y_WORD)
    padding = []
    for level in range(2, d + 1):
        if 4 * len(s) > max_length:
            raise BudgetExceeded(f'solvable law of derived length {d} exceeds {max_length} letters')
        s, c = _solvable_step(s)
        if c is not None:
            logger.warning(f'derived series level {level} needed conjugator {format_word(c)}')
            padding.append(f'{level}:{format_word(c)}')
        if len(s) > 4 * 6 ** (level - 1):
            raise ConstructionError(f'solvable law of level {level} has length {len(s)}')
    params = {'d': str(d)}
    if padding:
        params['padding'] = ' '.join(padding)
    return LawTrace('solvable', s, f'solvable of derived length <= {d}', params=params)


def prune_divisors(orders: Iterable[int]) -> List[int]:
    """Keep the orders that divide no other listed order."""
    values = sorted(set(orders))
    if not values or values[0] < 1:
        raise ConstructionError(f'order set must be non-empty and positive, got {values}')
    return [o for o in values if not any(o != other and other % o == 0 for other in values)]


def order_divisor_law(orders: Iterable[int], max_length: int = MAX_WORD_LENGTH) -> Word:
    return order_divisor_trace(orders, max_length=max_length).word


def order_divisor_trace(orders: Iterable[int], scope: str = '', max_length: int = MAX_WORD_LENGTH) -> LawTrace:
    """Union of x^o over the pruned orders; vanishes at (g, h) when the order of g divides one of them."""
    kept = prune_divisors(orders)
    if kept == [1]:
        return degenerate_trace(scope or 'trivial group')
    trace = union_trace([power_trace(o) for o in kept], scope, max_length)
    if trace.kind != 'union':
        trace = LawTrace('divisor', trace.word, scope, [trace], {'orders': ' '.join(map(str, kept))})
    else:
        trace.kind = 'divisor'
        trace.params['orders'] = ' '.join(map(str, kept))
    if scope:
        trace.scope = scope
    return trace


def psl2_orders(q: int) -> List[int]:
    p, _ = prime_power(q)
    g = math.gcd(2, q - 1)
    return [p, (q - 1) // g, (q + 1) // g]


def psl2_order_law(q: int) -> Word:
    return psl2_order_trace(q).word


def psl2_order_trace(q: int) -> LawTrace:
    """Every element of PSL2(q) is unipotent or semisimple with order dividing (q -+ 1)/gcd(2, q - 1)."""
    return order_divisor_trace(psl2_orders(q), f'PSL2:{q}')


def psl3_psu3_divisors(q: int) -> List[int]:
    p, _ = prime_power(q)
    values = [q * q - q, q * q + q, q * q - 1, q * q + q + 1, q * q - q + 1]
    if p == 2:
        values.append(4)
    return values


def psl3_psu3_order_law(q: int, unitary: bool, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> Word:
    return psl3_psu3_order_trace(q, unitary, ceiling).word


def psl3_psu3_order_trace(q: int, unitary: bool, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> LawTrace:
    """Exact order set when the group can be enumerated, divisor values otherwise."""
    spec = GroupSpec('PSU3' if unitary else 'PSL3', q)
    if spec.order <= ceiling:
        orders = order_set(spec, ceiling)
        source = 'exact'
    else:
        orders = psl3_psu3_divisors(q)
        source = 'divisors'
    trace = order_divisor_trace(orders, str(spec))
    trace.params['order_source'] = source
    return trace


def divisor_claim_report(specs: Iterable[GroupSpec], ceiling: int = DEFAULT_ENUMERATION_CEILING) -> pd.DataFrame:
    """Element orders of PSL3/PSU3 groups that divide none of q^2-q, q^2+q, q^2-1, q^2+q+1, q^2-q+1."""
    rows = []
    for spec in specs:
        q = spec.parameter
        values = [q * q - q, q * q + q, q * q - 1, q * q + q + 1, q * q - q + 1]
        orders = sorted(order_set(spec, ceiling))
        exceptions = [o for o in orders if not any(v % o == 0 for v in values)]
        rows.append({'group': str(spec), 'orders': ' '.join(map(str, orders)),
                     'exceptions': ' '.join(map(str, exceptions)), 'holds': not exceptions})
    return pd.DataFrame(rows, columns=['group', 'orders', 'exceptions', 'holds'])


def parse_conjugators(text: str) -> List[Tuple[Word, Word]]:
    """Inverse of the 'conjugators' trace parameter."""
    pairs = []
    for item in text.split():
        c1, c2 = item.split(',')
        pairs.append((parse_word(c1), parse_word(c2)))
    return pairs


def parse_pair(text: str) -> Tuple[Word, Word]:
    p1, p2 = text.split(',')
    return parse_word(p1), parse_word(p2)
