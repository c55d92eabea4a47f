"""Elements are int64 rows: a permutation is its row of images, a matrix its entries in row-major
order. g*h means apply g, then h.
"""
import functools
import logging
import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional, Sequence, Set, Tuple

import numpy as np
from sympy.combinatorics import Permutation, PermutationGroup

from shortlaw.lib.errors import CeilingExceeded, FieldError, GroupSpecError
from shortlaw.lib.fields import GF, field, prime_power

DEFAULT_ENUMERATION_CEILING = 2_000_000
DEFAULT_TABLE_CEILING = 4096

FAMILIES = ('Sym', 'Alt', 'Cyclic', 'Dihedral', 'SL2', 'PSL2', 'PSL3', 'PSU3', 'Perm')
MATRIX_FAMILIES = ('SL2', 'PSL2', 'PSL3', 'PSU3')
_SPEC_TEXT = re.compile(r'(?P<family>[A-Za-z][A-Za-z0-9]*)\s*:\s*(?P<parameter>\S+)')

_HASH_WEIGHTS = np.random.default_rng(0x5107_1A3D).integers(1, 2 ** 63, size=256, dtype=np.int64) | 1

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroupSpec:
    """A finite group by family and parameter: degree for Sym/Alt, order for Cyclic/Dihedral,
    q for the matrix families. Perm entries carry their generators (0-based images)."""
    family: str
    parameter: int
    name: str = ''
    generators: Tuple[Tuple[int, ...], ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise GroupSpecError(f'unknown group family {self.family!r}')
        if self.parameter < 1:
            raise GroupSpecError(f'{self.family} needs a positive parameter, got {self.parameter}')
        if self.family in MATRIX_FAMILIES:
            try:
                prime_power(self.parameter)
            except FieldError:
                raise GroupSpecError(f'{self.family}:{self.parameter} needs a prime power')
        if self.family == 'Dihedral' and self.parameter % 2:
            raise GroupSpecError(f'dihedral groups have even order, got {self.parameter}')
        if self.family == 'Perm' and not self.name:
            raise GroupSpecError('Perm groups need a name')

    def __str__(self):
        if self.family == 'Perm':
            return f'Perm:{self.name}'
        return f'{self.family}:{self.parameter}'

    @property
    def order(self) -> int:
        return group_order(self)

    @property
    def is_projective(self) -> bool:
        return self.family in ('PSL2', 'PSL3', 'PSU3')


def parse_spec(text: str) -> GroupSpec:
    """Parse 'family:parameter', e.g. PSL2:7, Sym:5, Perm:M11."""
    match = _SPEC_TEXT.fullmatch(text.strip())
    if not match:
        raise GroupSpecError(f'{text!r} is not of the form family:parameter')
    family, parameter = match.group('family'), match.group('parameter')
    if family == 'Perm':
        from shortlaw.lib.catalog import perm_spec
        return perm_spec(parameter)
    if not parameter.isdigit():
        raise GroupSpecError(f'{text!r}: parameter must be a natural number')
    return GroupSpec(family, int(parameter))


@functools.lru_cache(maxsize=None)
def group_order(spec: GroupSpec) -> int:
    k = spec.parameter
    if spec.family == 'Sym':
        return math.factorial(k)
    if spec.family == 'Alt':
        return max(1, math.factorial(k) // 2)
    if spec.family in ('Cyclic', 'Dihedral'):
        return k
    if spec.family == 'SL2':
        return k * (k * k - 1)
    if spec.family == 'PSL2':
        return k * (k * k - 1) // math.gcd(2, k - 1)
    if spec.family == 'PSL3':
        return k ** 3 * (k ** 3 - 1) * (k * k - 1) // math.gcd(3, k - 1)
    if spec.family == 'PSU3':
        return k ** 3 * (k ** 3 + 1) * (k * k - 1) // math.gcd(3, k + 1)
    generators = [Permutation(list(g)) for g in spec.generators]
    return int(PermutationGroup(generators).order()) if generators else 1


class FiniteGroup(ABC):
    """Batched element arithmetic for one GroupSpec."""

    def __init__(self, spec: GroupSpec, width: int):
        self.spec = spec
        self.width = width
        self.logger = logging.getLogger(__name__)

    def __repr__(self):
        return f'{type(self).__name__}({self.spec})'

    @property
    def order(self) -> int:
        return self.spec.order

    @property
    @abstractmethod
    def identity(self) -> np.ndarray:
        ...

    @abstractmethod
    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def inv(self, a: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def is_identity(self, a: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def standard_generators(self) -> np.ndarray:
        ...

    def canonical(self, a: np.ndarray) -> np.ndarray:
        return a

    def _base(self) -> int:
        return self.width

    def keys(self, a: np.ndarray) -> np.ndarray:
        """int64 key per canonical row: exact positional encoding when it fits, hashed otherwise."""
        a = np.atleast_2d(a)
        base = self._base()
        if self.width * math.log2(max(base, 2)) < 62:
            key = np.zeros(a.shape[0], dtype=np.int64)
            for column in range(self.width):
                key = key * base + a[:, column]
            return key
        with np.errstate(over='ignore'):
            return (a * _HASH_WEIGHTS[:self.width]).sum(axis=1) ^ (a[:, 0] << 40)

    def check(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if a.shape[-1] != self.width:
            raise GroupSpecError(f'element of width {a.shape[-1]} does not belong to {self.spec}')
        return a

    def power(self, a: np.ndarray, k: int) -> np.ndarray:
        a = np.atleast_2d(a)
        if k < 0:
            a, k = self.inv(a), -k
        result = np.broadcast_to(self.identity, a.shape).copy()
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            k >>= 1
            if k:
                base = self.mul(base, base)
        return result

    def equal(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.is_identity(self.mul(a, self.inv(b)))


class PermGroup(FiniteGroup):
    """Subgroup of Sym(degree) generated by the given image rows."""

    def __init__(self, spec: GroupSpec, degree: int, generators: Sequence[Sequence[int]]):
        super().__init__(spec, degree)
        self.degree = degree
        self._generators = np.array(generators, dtype=np.int64).reshape(-1, degree)
        self._identity = np.arange(degree, dtype=np.int64)

    @property
    def identity(self):
        return self._identity

    def mul(self, a, b):
        a, b = np.broadcast_arrays(np.atleast_2d(a), np.atleast_2d(b))
        return np.take_along_axis(b, a, axis=1)

    def inv(self, a):
        a = np.atleast_2d(a)
        out = np.empty_like(a)
        np.put_along_axis(out, a, np.broadcast_to(self._identity, a.shape), axis=1)
        return out

    def is_identity(self, a):
        return np.all(np.atleast_2d(a) == self._identity, axis=1)

    def standard_generators(self):
        return self._generators if len(self._generators) else self._identity[None, :]


class MatrixGroup(FiniteGroup):
    """SL_d(q) or SU_3(q) modulo the given central scalars (empty center list means linear)."""

    def __init__(self, spec: GroupSpec, d: int, gf: GF, center: Sequence[int], unitary: bool = False):
        super().__init__(spec, d * d)
        self.d = d
        self.field = gf
        self.unitary = unitary
        self.q = spec.parameter
        self.center = [int(c) for c in center] or [1]
        self.projective = len(self.center) > 1 or spec.is_projective
        eye = np.zeros((d, d), dtype=np.int64)
        np.fill_diagonal(eye, 1)
        self._identity = eye.reshape(-1)
        self._generators = None

    def _base(self):
        return self.field.q

    @property
    def identity(self):
        return self._identity

    def matrix(self, rows) -> np.ndarray:
        return np.asarray(rows, dtype=np.int64).reshape(self.width) % self.field.q

    def mul(self, a, b):
        a, b = np.broadcast_arrays(np.atleast_2d(a), np.atleast_2d(b))
        d = self.d
        a3 = a.reshape(-1, d, d)
        b3 = b.reshape(-1, d, d)
        gf = self.field
        if gf.e == 1:
            return (np.matmul(a3, b3) % gf.p).reshape(-1, self.width)
        out = np.empty_like(a3)
        for i in range(d):
            for j in range(d):
                acc = gf.mul_table[a3[:, i, 0], b3[:, 0, j]]
                for k in range(1, d):
                    acc = gf.add_table[acc, gf.mul_table[a3[:, i, k], b3[:, k, j]]]
                out[:, i, j] = acc
        return out.reshape(-1, self.width)

    def inv(self, a):
        # det = 1, so the inverse is the adjugate
        a3 = np.atleast_2d(a).reshape(-1, self.d, self.d)
        gf = self.field
        if self.d == 2:
            out = np.stack([a3[:, 1, 1], gf.neg(a3[:, 0, 1]), gf.neg(a3[:, 1, 0]), a3[:, 0, 0]], axis=1)
            return out
        out = np.empty_like(a3)
        for i in range(3):
            for j in range(3):
                j1, j2, i1, i2 = (j + 1) % 3, (j + 2) % 3, (i + 1) % 3, (i + 2) % 3
                out[:, i, j] = gf.sub(gf.mul(a3[:, j1, i1], a3[:, j2, i2]), gf.mul(a3[:, j1, i2], a3[:, j2, i1]))
        return out.reshape(-1, self.width)

    def is_identity(self, a):
        a3 = np.atleast_2d(a).reshape(-1, self.d, self.d)
        diagonal = np.einsum('nii->ni', a3)
        off = a3.copy()
        for i in range(self.d):
            off[:, i, i] = 0
        off_zero = ~np.any(off.reshape(len(a3), -1), axis=1)
        if self.projective:
            return off_zero & np.all(diagonal == diagonal[:, :1], axis=1)
        return off_zero & np.all(diagonal == 1, axis=1)

    def canonical(self, a):
        """Least-key representative of each coset modulo the central scalars."""
        a = np.atleast_2d(a)
        if len(self.center) == 1:
            return a
        candidates = np.stack([self.field.mul(c, a) for c in self.center])
        keys = np.stack([self.keys(c) for c in candidates])
        best = np.argmin(keys, axis=0)
        return candidates[best, np.arange(a.shape[0])]

    def trace(self, a):
        a3 = np.atleast_2d(a).reshape(-1, self.d, self.d)
        total = a3[:, 0, 0]
        for i in range(1, self.d):
            total = self.field.add(total, a3[:, i, i])
        return total

    def conj(self, a):
        """Field involution a -> a^q of GF(q^2)."""
        return self.field.power(a, self.q)

    def standard_generators(self):
        if self._generators is None:
            self._generators = _matrix_generators(self)
        return self._generators


def _matrix_generators(group: MatrixGroup) -> np.ndarray:
    gf = group.field
    minus_one = (-gf.elem(1)).value
    primitive = gf.elem(gf.generator)
    omega, omega_inv = primitive.value, primitive.inverse().value
    if group.d == 2:
        gens = [group.matrix([[1, 1], [0, 1]]), group.matrix([[0, minus_one], [1, 0]])]
        if gf.e > 1:
            gens.append(group.matrix([[omega, 0], [0, omega_inv]]))
        return np.array(gens)
    if not group.unitary:
        gens = []
        for i in range(3):
            for j in range(3):
                if i != j:
                    m = np.eye(3, dtype=np.int64)
                    m[i, j] = 1
                    gens.append(group.matrix(m))
        if gf.e > 1:
            gens.append(group.matrix([[omega, 0, 0], [0, omega_inv, 0], [0, 0, 1]]))
        return np.array(gens)
    return _unitary_generators(group)


def _unitary_generators(group: MatrixGroup) -> np.ndarray:
    """Upper unitriangular elements of SU_3(q) (antidiagonal form) and their transposes by J."""
    gf = group.field
    unipotents = []
    for a in range(gf.q):
        norm = int(gf.mul(a, group.conj(a)))
        for b in range(gf.q):
            if int(gf.add(gf.add(b, group.conj(b)), norm)) == 0:
                unipotents.append(group.matrix([[1, a, b], [0, 1, int(gf.neg(group.conj(a)))], [0, 0, 1]]))
    chosen = []
    for u in unipotents[1:]:
        if not chosen or not _contains(group, np.array(chosen), u):
            chosen.append(u)
    upper = np.array(chosen)
    # J u J reverses rows and columns
    lower = upper.reshape(-1, 3, 3)[:, ::-1, ::-1].reshape(-1, 9)
    return np.concatenate([upper, lower])


def _contains(group: FiniteGroup, generators: np.ndarray, element: np.ndarray) -> bool:
    elements = closure(group, generators)
    key = group.keys(group.canonical(element[None]))[0]
    return bool(np.isin(key, group.keys(elements)))


def _cycle(points: Sequence[int], degree: int) -> List[int]:
    images = list(range(degree))
    for i, p in enumerate(points):
        images[p] = points[(i + 1) % len(points)]
    return images


def _perm_generators(spec: GroupSpec) -> Tuple[int, List[List[int]]]:
    k = spec.parameter
    if spec.family == 'Sym':
        return k, [_cycle([0, 1], k), _cycle(list(range(k)), k)] if k > 1 else []
    if spec.family == 'Alt':
        if k < 3:
            return k, []
        long_cycle = list(range(k)) if k % 2 else list(range(1, k))
        return k, [_cycle([0, 1, 2], k), _cycle(long_cycle, k)]
    if spec.family == 'Cyclic':
        return k, [_cycle(list(range(k)), k)] if k > 1 else []
    if spec.family == 'Dihedral':
        if k == 2:
            return 2, [[1, 0]]
        if k == 4:
            return 4, [[1, 0, 3, 2], [2, 3, 0, 1]]
        m = k // 2
        return m, [_cycle(list(range(m)), m), [(-i) % m for i in range(m)]]
    generators = [list(g) for g in spec.generators]
    return len(generators[0]) if generators else 1, generators


def _center(gf: GF, d: int, unitary: bool, q: int) -> List[int]:
    scalars = []
    for c in map(gf.elem, range(1, gf.q)):
        if c ** d == 1 and (not unitary or c ** (q + 1) == 1):
            scalars.append(c.value)
    return scalars


@functools.lru_cache(maxsize=None)
def group_of(spec: GroupSpec) -> FiniteGroup:
    """Arithmetic backend for a spec."""
    if spec.family in ('SL2', 'PSL2'):
        gf = field(spec.parameter)
        center = _center(gf, 2, False, spec.parameter) if spec.family == 'PSL2' else [1]
        return MatrixGroup(spec, 2, gf, center)
    if spec.family == 'PSL3':
        gf = field(spec.parameter)
        return MatrixGroup(spec, 3, gf, _center(gf, 3, False, spec.parameter))
    if spec.family == 'PSU3':
        q = spec.parameter
        gf = field(q * q)
        return MatrixGroup(spec, 3, gf, _center(gf, 3, True, q), unitary=True)
    degree, generators = _perm_generators(spec)
    return PermGroup(spec, degree, generators)


def as_group(group) -> FiniteGroup:
    if isinstance(group, FiniteGroup):
        return group
    if isinstance(group, str):
        group = parse_spec(group)
    return group_of(group)


def standard_generators(spec) -> np.ndarray:
    return as_group(spec).standard_generators()


def closure(group, generators, limit: Optional[int] = None, stop_above: Optional[int] = None) -> np.ndarray:
    """
    Breadth-first closure of the generators under right multiplication.

    Returns the canonical elements sorted by key. Raises CeilingExceeded past limit; stops early
    (returning the partial set) once more than stop_above elements are found.
    """
    group = as_group(group)
    generators = group.canonical(group.check(np.atleast_2d(generators)))
    frontier = group.canonical(group.identity[None, :])
    seen = group.keys(frontier)
    layers = [frontier]
    total = 1
    while len(frontier):
        products = group.canonical(np.concatenate([group.mul(frontier, g) for g in generators]))
        keys, first = np.unique(group.keys(products), return_index=True)
        fresh = ~np.isin(keys, seen, assume_unique=True)
        frontier = products[first[fresh]]
        seen = np.union1d(seen, keys[fresh])
        layers.append(frontier)
        total += len(frontier)
        if limit is not None and total > limit:
            raise CeilingExceeded(f'closure in {group.spec} exceeds {limit} elements')
        if stop_above is not None and total > stop_above:
            break
    elements = np.concatenate(layers)
    return elements[np.argsort(group.keys(elements), kind='stable')]


def _ceiling_check(group: FiniteGroup, ceiling: int):
    if group.order > ceiling:
        raise CeilingExceeded(f'{group.spec} has order {group.order} above the ceiling {ceiling}')


@functools.lru_cache(maxsize=32)
def _elements(spec: GroupSpec) -> np.ndarray:
    group = group_of(spec)
    elements = closure(group, group.standard_generators())
    if len(elements) != group.order:
        raise GroupSpecError(f'{spec}: closure has {len(elements)} elements, expected {group.order}')
    elements.setflags(write=False)
    return elements


def enumerate_elements(group, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> np.ndarray:
    """All elements of the group, each once, sorted by key."""
    group = as_group(group)
    _ceiling_check(group, ceiling)
    return _elements(group.spec)


def index_of(group, elements: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Positions of the rows of a in a key-sorted element array."""
    group = as_group(group)
    canonical = group.canonical(np.atleast_2d(a))
    idx = np.searchsorted(group.keys(elements), group.keys(canonical))
    idx = np.minimum(idx, len(elements) - 1)
    if not np.array_equal(elements[idx], canonical):
        raise GroupSpecError(f'elements outside of {group.spec} or key collision')
    return idx


@functools.lru_cache(maxsize=8)
def _cayley(spec: GroupSpec) -> np.ndarray:
    group = group_of(spec)
    elements = _elements(spec)
    n = len(elements)
    table = np.empty((n, n), dtype=np.int32)
    rows = max(1, 2 ** 20 // n)
    for start in range(0, n, rows):
        block = elements[start:start + rows]
        left = np.repeat(block, n, axis=0)
        right = np.tile(elements, (len(block), 1))
        table[start:start + len(block)] = index_of(group, elements, group.mul(left, right)).reshape(len(block), n)
    table.setflags(write=False)
    return table


def cayley_table(group, ceiling: int = DEFAULT_TABLE_CEILING) -> Tuple[np.ndarray, np.ndarray]:
    """(elements, table) with table[i, j] the index of elements[i] * elements[j]."""
    group = as_group(group)
    _ceiling_check(group, ceiling)
    return _elements(group.spec), _cayley(group.spec)


def element_orders(group, a: np.ndarray) -> np.ndarray:
    group = as_group(group)
    a = np.atleast_2d(group.check(a))
    orders = np.zeros(len(a), dtype=np.int64)
    current = a
    k = 1
    while True:
        done = group.is_identity(current) & (orders == 0)
        orders[done] = k
        pending = orders == 0
        if not pending.any():
            return orders
        k += 1
        current = np.where(pending[:, None], group.mul(current, a), current)


def element_order(group, g) -> int:
    return int(element_orders(group, np.atleast_2d(g))[0])


@functools.lru_cache(maxsize=None)
def _order_set(spec: GroupSpec) -> frozenset:
    elements = _elements(spec)
    return frozenset(int(o) for o in np.unique(element_orders(group_of(spec), elements)))


def order_set(group, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> Set[int]:
    group = as_group(group)
    _ceiling_check(group, ceiling)
    return set(_order_set(group.spec))


def exponent(group, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> int:
    return math.lcm(*order_set(group, ceiling))


def generates(group, g, h, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> bool:
    """True iff g, h generate the whole group. A subgroup with more than |G|/2 elements is G."""
    group = as_group(group)
    _ceiling_check(group, ceiling)
    pair = np.stack([group.check(g).reshape(-1), group.check(h).reshape(-1)])
    found = closure(group, pair, stop_above=group.order // 2)
    return len(found) > group.order // 2


def generating_pair(group, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> np.ndarray:
    """A deterministic generating pair: the standard pair if it generates, else the first
    (standard generator, element) pair in key order that does."""
    group = as_group(group)
    gens = group.standard_generators()
    if len(gens) >= 2 and generates(group, gens[0], gens[1], ceiling):
        return gens[:2]
    if len(gens) == 1 or group.order == 1:
        return np.stack([gens[0], gens[0]])
    for first in gens:
        for candidate in enumerate_elements(group, ceiling):
            if generates(group, first, candidate, ceiling):
                return np.stack([first, candidate])
    raise GroupSpecError(f'{group.spec} is not 2-generated by its standard generators')


def _psl2(group) -> MatrixGroup:
    group = as_group(group)
    if not isinstance(group, MatrixGroup) or group.d != 2:
        raise GroupSpecError(f'{group.spec} is not SL2 or PSL2')
    return group


def lift_trace(group, g) -> np.ndarray:
    """Trace of a determinant-one lift; defined up to sign in PSL2."""
    return _psl2(group).trace(g)


def in_borel(group, g) -> np.ndarray:
    """
    True where the element fixes a point of the projective line over GF(q).

    Odd q: t^2 - 4 is a square. Even q: the characteristic polynomial x^2 + t x + 1 has a root
    iff t = 0 or the absolute trace of 1/t^2 vanishes.
    """
    group = _psl2(group)
    gf = group.field
    t = np.atleast_1d(group.trace(np.atleast_2d(g)))
    if gf.p != 2:
        result = gf.is_square(gf.sub(gf.mul(t, t), gf.from_int(4)))
        return np.atleast_1d(result)
    result = t == 0
    nonzero = ~result
    if nonzero.any():
        ts = t[nonzero]
        result[nonzero] = gf.absolute_trace(gf.inv(gf.mul(ts, ts))) == 0
    return result


def projective_points(gf: GF) -> np.ndarray:
    """The q + 1 points of the projective line as normalized vectors (a, b)."""
    return np.concatenate([[[1, 0]], np.stack([gf.elements(), np.ones(gf.q, dtype=np.int64)], axis=1)])


def fixed_points(group, g) -> np.ndarray:
    group = _psl2(group)
    gf = group.field
    m = group.check(g).reshape(2, 2)
    points = projective_points(gf)
    a, b = points[:, 0], points[:, 1]
    image_a = gf.add(gf.mul(m[0, 0], a), gf.mul(m[0, 1], b))
    image_b = gf.add(gf.mul(m[1, 0], a), gf.mul(m[1, 1], b))
    fixed = gf.sub(gf.mul(a, image_b), gf.mul(b, image_a)) == 0
    return points[fixed]


def common_borel(group, g, h) -> bool:
    """True iff g and h fix a common point of the projective line."""
    group = _psl2(group)
    gf = group.field
    m = group.check(h).reshape(2, 2)
    points = fixed_points(group, g)
    if not len(points):
        return False
    a, b = points[:, 0], points[:, 1]
    image_a = gf.add(gf.mul(m[0, 0], a), gf.mul(m[0, 1], b))
    image_b = gf.add(gf.mul(m[1, 0], a), gf.mul(m[1, 1], b))
    return bool(np.any(gf.sub(gf.mul(a, image_b), gf.mul(b, image_a)) == 0))


def commutator_trace(group, g, h) -> int:
    group = _psl2(group)
    g, h = np.atleast_2d(g), np.atleast_2d(h)
    c = group.mul(group.mul(group.inv(g), group.inv(h)), group.mul(g, h))
    return int(group.trace(c)[0])


def borel_fraction(q: int, ceiling: int = DEFAULT_ENUMERATION_CEILING) -> float:
    """Share of PSL2(q) lying in some Borel subgroup."""
    group = group_of(GroupSpec('PSL2', q))
    elements = enumerate_elements(group, ceiling)
    return float(np.mean(in_borel(group, elements)))
