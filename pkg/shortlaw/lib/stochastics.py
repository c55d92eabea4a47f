"""Block k of every trial loop reads the random stream keyed by (seed, k), independent of workers."""
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.stats import norm

from shortlaw.lib.errors import BudgetExceeded, CeilingExceeded, GroupSpecError, NonGeneratingSet
from shortlaw.lib.finitegroups import (DEFAULT_ENUMERATION_CEILING, FiniteGroup, GroupSpec, as_group, closure,
                                       enumerate_elements, generating_pair, in_borel, index_of)
from shortlaw.lib.freeword import LETTERS, Word, commutes, reduce, stream_generator, walk_steps
from shortlaw.lib.utils import atomic_write_text

logger = logging.getLogger(__name__)

DEFAULT_CONFIDENCE = 0.99
DEFAULT_BLOCK_SIZE = 4096
SPECTRAL_CEILING = 2048
EXACT_WALK_BUDGET = 5
MIXING_GRID = (0.5, 1, 2, 4, 8, 16)
REPORT_COLUMNS = ['l', 'frequency', 'low', 'high']

Target = Union[str, Callable[[FiniteGroup, np.ndarray], np.ndarray], np.ndarray]

TARGETS = {
    'all': lambda group, elements: np.ones(len(elements), dtype=bool),
    'none': lambda group, elements: np.zeros(len(elements), dtype=bool),
    'identity': lambda group, elements: group.is_identity(elements),
    'borel': in_borel,
}


def wilson_interval(hits: int, trials: int, confidence: float = DEFAULT_CONFIDENCE) -> Tuple[float, float]:
    if trials < 1:
        raise ValueError('a Wilson interval needs at least one trial')
    z = float(norm.ppf(1 - (1 - confidence) / 2))
    p = hits / trials
    denominator = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denominator
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denominator
    return max(0.0, center - half), min(1.0, center + half)


def walk_set(spec, generators=None) -> np.ndarray:
    """Symmetric walk set: the generators (default: the generating pair) and their inverses, without repeats."""
    group = as_group(spec)
    gens = generating_pair(group) if generators is None else group.check(np.atleast_2d(generators))
    both = group.canonical(np.concatenate([gens, group.inv(gens)]))
    _, first = np.unique(group.keys(both), return_index=True)
    return both[np.sort(first)]


def _step_table(group: FiniteGroup, generators: np.ndarray, ceiling: int) -> Tuple[np.ndarray, np.ndarray]:
    """(elements, steps) with steps[s, i] the position of elements[i] * generators[s]."""
    generators = group.canonical(group.check(np.atleast_2d(generators)))
    keys = group.keys(generators)
    if not np.isin(group.keys(group.canonical(group.inv(generators))), keys).all():
        raise GroupSpecError(f'walk set on {group.spec} is not closed under inverses')
    elements = enumerate_elements(group, ceiling)
    if len(closure(group, generators, limit=ceiling)) != group.order:
        raise NonGeneratingSet(f'walk set does not generate {group.spec}')
    steps = np.stack([index_of(group, elements, group.mul(elements, s)) for s in generators])
    return elements, steps


@dataclass
class WalkSample:
    spec: GroupSpec
    generators: np.ndarray
    length: int
    trials: int
    seed: int
    # endpoint position in the element list -> frequency
    counts: Dict[int, int]

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError('a walk sample needs at least one trial')
        if sum(self.counts.values()) != self.trials:
            raise ValueError('walk sample frequencies do not sum to the number of trials')

    def distribution(self, order: int) -> np.ndarray:
        p = np.zeros(order)
        for position, count in self.counts.items():
            p[position] = count
        return p / self.trials


@dataclass(frozen=True)
class _Block:
    steps: np.ndarray
    start: int
    length: int
    seed: int
    block: int
    count: int


def _walk_block(block: _Block) -> np.ndarray:
    k = len(block.steps)
    moves = stream_generator(block.seed, block.block).integers(0, 2 * k, size=(block.count, block.length))
    position = np.full(block.count, block.start, dtype=np.intp)
    for t in range(block.length):
        move = moves[:, t]
        # moves k..2k-1 hold in place
        stepping = move < k
        position = np.where(stepping, block.steps[np.minimum(move, k - 1), position], position)
    return position


def _walk_endpoints(steps: np.ndarray, start: int, length: int, trials: int, seed: int, block_size: int,
                    workers: int) -> np.ndarray:
    blocks = [_Block(steps, start, length, seed, k, min(block_size, trials - offset))
              for k, offset in enumerate(range(0, trials, block_size))]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            return np.concatenate(list(executor.map(_walk_block, blocks)))
    return np.concatenate([_walk_block(b) for b in blocks])


def _target_mask(group: FiniteGroup, elements: np.ndarray, target: Target) -> np.ndarray:
    if callable(target):
        mask = np.asarray(target(group, elements), dtype=bool)
    else:
        mask = np.asarray(target, dtype=bool)
    if mask.shape != (len(elements),):
        raise GroupSpecError(f'target set for {group.spec} must cover its {len(elements)} elements')
    return mask


def sample_walks(spec, generators=None, length: int = 0, trials: int = 1, seed: int = 0,
                 block_size: int = DEFAULT_BLOCK_SIZE, workers: int = 1,
                 ceiling: int = DEFAULT_ENUMERATION_CEILING) -> Tuple[WalkSample, np.ndarray]:
    """trials lazy walks of the given length from the identity; (sample, endpoint positions)."""
    group = as_group(spec)
    generators = walk_set(group, generators)
    elements, steps = _step_table(group, generators, ceiling)
    start = int(index_of(group, elements, group.identity)[0])
    endpoints = _walk_endpoints(steps, start, length, trials, seed, block_size, workers)
    positions, counts = np.unique(endpoints, return_counts=True)
    sample = WalkSample(group.spec, generators, length, trials, seed,
                        {int(p): int(c) for p, c in zip(positions, counts)})
    return sample, endpoints


@dataclass
class HittingEstimate:
    sample: WalkSample
    hits: int
    target_size: int
    group_order: int
    low: float
    high: float

    @property
    def frequency(self) -> float:
        return self.hits / self.sample.trials

    @property
    def bound(self) -> float:
        """|E| / 2|G|, the hitting probability guaranteed once the walk has mixed."""
        return self.target_size / (2 * self.group_order)

    @property
    def holds(self) -> bool:
        return self.low >= self.bound


def hitting_probability(spec, generators, target: Target, length: int, trials: int, seed: int = 0,
                        confidence: float = DEFAULT_CONFIDENCE, block_size: int = DEFAULT_BLOCK_SIZE,
                        workers: int = 1, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> HittingEstimate:
    """
    Frequency of lazy walks of the given length ending in the target set, with its Wilson interval.
    target is a predicate (group, elements) -> mask, a mask over enumerate_elements, or a TARGETS name.
    """
    group = as_group(spec)
    if isinstance(target, str):
        target = TARGETS[target]
    sample, endpoints = sample_walks(group, generators, length, trials, seed, block_size, workers, ceiling)
    mask = _target_mask(group, enumerate_elements(group, ceiling), target)
    hits = int(mask[endpoints].sum())
    low, high = wilson_interval(hits, trials, confidence)
    logger.debug(f'{group.spec}: {hits}/{trials} walks of length {length} hit a set of size {int(mask.sum())}')
    return HittingEstimate(sample, hits, int(mask.sum()), group.order, low, high)


def walk_distribution(spec, generators=None, length: int = 0, lazy: bool = True,
                      ceiling: int = DEFAULT_ENUMERATION_CEILING) -> np.ndarray:
    """Exact law of the walk endpoint over enumerate_elements, by iterating the walk operator."""
    group = as_group(spec)
    elements, steps = _step_table(group, walk_set(group, generators), ceiling)
    p = np.zeros(len(elements))
    p[int(index_of(group, elements, group.identity)[0])] = 1.0
    for _ in range(length):
        moved = np.zeros_like(p)
        for s in steps:
            moved[s] += p
        moved /= len(steps)
        p = (p + moved) / 2 if lazy else moved
    return p


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


def spectral_gap(spec, generators=None, ceiling: int = SPECTRAL_CEILING) -> float:
    """1 - second largest eigenvalue of the simple walk operator on a tiny Cayley graph."""
    group = as_group(spec)
    if group.order > ceiling:
        raise CeilingExceeded(f'spectral gap of {group.spec} needs a {group.order}-square operator, ceiling {ceiling}')
    _, steps = _step_table(group, walk_set(group, generators), ceiling)
    n = steps.shape[1]
    operator = np.zeros((n, n))
    rows = np.arange(n)
    for s in steps:
        operator[rows, s] += 1.0 / len(steps)
    eigenvalues = np.linalg.eigvalsh(operator)
    return 1.0 - float(eigenvalues[-2]) if n > 1 else 1.0


@dataclass
class MixingCurve:
    table: pd.DataFrame
    multiple: Optional[float]
    length: Optional[int]


def mixing_threshold(spec, target: Target, generators=None, grid: Sequence[float] = MIXING_GRID,
                     trials: int = 10_000, seed: int = 0, confidence: float = DEFAULT_CONFIDENCE,
                     block_size: int = DEFAULT_BLOCK_SIZE, workers: int = 1,
                     ceiling: int = DEFAULT_ENUMERATION_CEILING) -> MixingCurve:
    """
    Hitting frequencies at l = ceil(c log|G|) for c in grid. The threshold is the first grid point
    whose Wilson interval lies above |E| / 2|G|.
    """
    group = as_group(spec)
    rows = []
    threshold = None
    for c in grid:
        length = max(1, math.ceil(c * math.log(group.order)))
        estimate = hitting_probability(group, generators, target, length, trials, seed, confidence,
                                       block_size, workers, ceiling)
        rows.append({'multiple': c, 'l': length, 'frequency': estimate.frequency, 'low': estimate.low,
                     'high': estimate.high, 'bound': estimate.bound, 'holds': estimate.holds})
        if threshold is None and estimate.holds:
            threshold = (c, length)
    table = pd.DataFrame(rows, columns=['multiple', 'l', 'frequency', 'low', 'high', 'bound', 'holds'])
    if threshold is None:
        logger.warning(f'{group.spec}: hitting bound not reached on the grid {list(grid)}')
        return MixingCurve(table, None, None)
    return MixingCurve(table, *threshold)


def _reduced_lengths(steps: np.ndarray) -> np.ndarray:
    """Length of the freely reduced word of each row of step codes, by a vectorised reduction stack."""
    count, length = steps.shape
    stack = np.zeros((count, max(length, 1)), dtype=np.uint8)
    top = np.zeros(count, dtype=np.intp)
    rows = np.arange(count)
    for t in range(length):
        letter = steps[:, t]
        active = letter < 4
        last = stack[rows, np.maximum(top - 1, 0)]
        cancel = active & (top > 0) & (last == (letter ^ 1))
        push = active & ~cancel
        stack[rows[push], top[push]] = letter[push]
        top = top - cancel + push
    return top


def _walk_words(steps: np.ndarray):
    codes = np.frombuffer(LETTERS, dtype=np.uint8)
    for row in steps:
        yield reduce(codes[row[row < 4]].tobytes())


def _stream(length: int, block: int) -> int:
    return (length << 32) | block


def _blocks(trials: int, block_size: int):
    return [(k, min(block_size, trials - offset)) for k, offset in enumerate(range(0, trials, block_size))]


@dataclass
class KestenFit:
    table: pd.DataFrame
    alpha: float
    scale: float

    def envelope(self, length: int) -> float:
        """scale * l * exp(-alpha l), the decay bound for commuting pairs."""
        return self.scale * length * math.exp(-self.alpha * length)


def kesten_decay(l_values: Sequence[int], trials: int, seed: int = 0, mode: str = 'simple',
                 confidence: float = DEFAULT_CONFIDENCE, block_size: int = DEFAULT_BLOCK_SIZE) -> KestenFit:
    """
    Frequency of walks in F2 reducing to the empty word, per length, with an exponential rate fitted
    by least squares on the logarithms of the non-zero frequencies.
    """
    rows = []
    for length in l_values:
        hits = 0
        for block, count in _blocks(trials, block_size):
            steps = walk_steps(stream_generator(seed, _stream(length, block)), length, mode, size=count)
            hits += int((_reduced_lengths(steps) == 0).sum())
        low, high = wilson_interval(hits, trials, confidence)
        rows.append({'l': length, 'frequency': hits / trials, 'low': low, 'high': high})
    table = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    fitted = table[table['frequency'] > 0]
    if len(fitted) < 2:
        logger.warning('fewer than two non-zero return frequencies, no decay rate fitted')
        return KestenFit(table, float('nan'), float('nan'))
    slope, intercept = np.polyfit(fitted['l'].to_numpy(float), np.log(fitted['frequency'].to_numpy()), 1)
    return KestenFit(table, float(-slope), float(math.exp(intercept)))


def exact_return_probability(length: int) -> Fraction:
    """P[simple walk of the given length reduces to the empty word], by the chain on reduced lengths."""
    p = {0: Fraction(1)}
    for _ in range(length):
        nxt: Dict[int, Fraction] = {}
        for r, mass in p.items():
            if r == 0:
                nxt[1] = nxt.get(1, 0) + mass
            else:
                nxt[r - 1] = nxt.get(r - 1, 0) + mass / 4
                nxt[r + 1] = nxt.get(r + 1, 0) + mass * 3 / 4
        p = nxt
    return p.get(0, Fraction(0))


def commuting_rate(l_values: Sequence[int], trials: int, seed: int = 0, mode: str = 'simple',
                   fit: Optional[KestenFit] = None, confidence: float = DEFAULT_CONFIDENCE,
                   block_size: int = DEFAULT_BLOCK_SIZE) -> pd.DataFrame:
    """Frequency of independent walk pairs (u_l, v_l) that commute in F2, per length."""
    rows = []
    for length in l_values:
        hits = 0
        for block, count in _blocks(trials, block_size):
            u = walk_steps(stream_generator(seed, _stream(length, 2 * block)), length, mode, size=count)
            v = walk_steps(stream_generator(seed, _stream(length, 2 * block + 1)), length, mode, size=count)
            hits += sum(commutes(a, b) for a, b in zip(_walk_words(u), _walk_words(v)))
        low, high = wilson_interval(hits, trials, confidence)
        envelope = fit.envelope(length) if fit is not None else float('nan')
        rows.append({'l': length, 'frequency': hits / trials, 'low': low, 'high': high, 'envelope': envelope})
    return pd.DataFrame(rows, columns=REPORT_COLUMNS + ['envelope'])


def exact_walk_rates(length: int, mode: str = 'simple', budget: int = EXACT_WALK_BUDGET) -> Dict[str, Fraction]:
    """Return and commuting probabilities of walks of the given length, over every step path."""
    if length > budget:
        raise BudgetExceeded(f'exact walk enumeration at length {length} exceeds the budget {budget}')
    alphabet = 8 if mode == 'lazy' else 4
    words: Counter = Counter({Word(): 1})
    if length:
        paths = np.indices((alphabet,) * length).reshape(length, -1).T.astype(np.uint8)
        words = Counter(_walk_words(paths))
    total = alphabet ** length
    returning = Fraction(words[Word()], total)
    commuting = sum(mu * mv for u, mu in words.items() for v, mv in words.items() if commutes(u, v))
    return {'return': returning, 'commuting': Fraction(commuting, total * total)}


def write_report(table: pd.DataFrame, path: str):
    atomic_write_text(path, table.to_csv(index=False))
