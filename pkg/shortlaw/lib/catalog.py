"""Nonabelian finite simple groups up to the catalog ceiling."""
import functools
import logging
import math
import re
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy.combinatorics import Permutation

from shortlaw.lib.errors import CeilingExceeded, GroupSpecError
from shortlaw.lib.fields import field, is_prime_power
from shortlaw.lib.finitegroups import GroupSpec
from shortlaw.lib.utils import CATALOG_DATA

DEFAULT_CATALOG_CEILING = 100_000
_CYCLE = re.compile(r'\(([0-9,\s]*)\)')

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CatalogEntry:
    spec: GroupSpec
    order: int
    # isomorphic to some PSL2(q), PSL3(q) or PSU3(q)
    special: bool
    aliases: Tuple[str, ...] = dataclass_field(default=())

    @property
    def name(self) -> str:
        return str(self.spec)


def parse_cycles(text: str, degree: int) -> Tuple[int, ...]:
    """Image tuple (0-based) of a 1-based product of cycles such as (1,2,3)(4,5)."""
    stripped = text.strip()
    if stripped in ('()', ''):
        return tuple(range(degree))
    if _CYCLE.sub('', stripped):
        raise GroupSpecError(f'{text!r} is not in cycle notation')
    cycles = []
    for body in _CYCLE.findall(stripped):
        points = [int(p) - 1 for p in body.split(',') if p.strip()]
        if any(not 0 <= p < degree for p in points):
            raise GroupSpecError(f'{text!r} moves points outside 1..{degree}')
        if points:
            cycles.append(points)
    return tuple(Permutation(cycles, size=degree).array_form)


def format_cycles(images: Sequence[int]) -> str:
    """1-based cycle notation, '()' for the identity."""
    cycles = Permutation(list(images)).cyclic_form
    if not cycles:
        return '()'
    return ''.join('(' + ','.join(str(p + 1) for p in cycle) + ')' for cycle in cycles)


def load_catalog_data(path: str = CATALOG_DATA) -> Dict[str, GroupSpec]:
    specs = {}
    with open(path, encoding='utf-8') as f:
        for line in f:
            line = line.split('#', 1)[0].strip()
            if not line:
                continue
            name, degree, *generators = line.split()
            degree = int(degree)
            images = tuple(parse_cycles(g, degree) for g in generators)
            specs[name] = GroupSpec('Perm', degree, name=name, generators=images)
    return specs


def _orbit_action(matrices: List[np.ndarray], start: Tuple[int, ...], gf) -> List[Tuple[int, ...]]:
    """Generator permutations on the projective orbit of start under v -> v M."""

    def normalize(v):
        lead = next(x for x in v if x)
        scale = gf.inv(lead)
        return tuple(int(x) for x in gf.mul(scale, np.asarray(v)))

    def act(v, m):
        d = len(v)
        out = []
        for j in range(d):
            acc = 0
            for i in range(d):
                acc = gf.add(acc, gf.mul(v[i], m[i, j]))
            out.append(int(acc))
        return normalize(out)

    points = [normalize(start)]
    index = {points[0]: 0}
    position = 0
    while position < len(points):
        for m in matrices:
            image = act(points[position], m)
            if image not in index:
                index[image] = len(points)
                points.append(image)
        position += 1
    return [tuple(index[act(p, m)] for p in points) for m in matrices]


@functools.lru_cache(maxsize=None)
def suzuki_8() -> GroupSpec:
    gf = field(8)
    omega = gf.generator

    def pw(a, k):
        return int(gf.power(a, k))

    def s(a, b):
        # theta: t -> t^4 squares to the Frobenius of GF(8)
        bottom = gf.add(gf.add(pw(a, 6), gf.mul(a, b)), pw(b, 4))
        return np.array([[1, 0, 0, 0],
                         [a, 1, 0, 0],
                         [b, pw(a, 4), 1, 0],
                         [bottom, gf.add(pw(a, 5), b), a, 1]], dtype=np.int64)

    basis = [1, omega, pw(omega, 2)]
    matrices = [s(a, 0) for a in basis] + [s(0, b) for b in basis]
    matrices.append(np.diag([pw(omega, 3), pw(omega, 2), pw(omega, -2), pw(omega, -3)]).astype(np.int64))
    matrices.append(np.eye(4, dtype=np.int64)[::-1].copy())
    generators = _orbit_action(matrices, (1, 0, 0, 0), gf)
    if len(generators[0]) != 65:
        raise GroupSpecError(f'Suzuki ovoid orbit has {len(generators[0])} points, expected 65')
    return GroupSpec('Perm', 65, name='Sz8', generators=tuple(generators))


E6_EDGES = ((0, 2), (2, 3), (3, 4), (4, 5), (1, 3))


@functools.lru_cache(maxsize=None)
def psu4_2() -> GroupSpec:
    cartan = 2 * np.eye(6, dtype=np.int64)
    for i, j in E6_EDGES:
        cartan[i, j] = cartan[j, i] = -1

    def reflect(root, i):
        image = list(root)
        image[i] -= int(np.dot(root, cartan[:, i]))
        return tuple(image)

    roots = [tuple(int(i == j) for j in range(6)) for i in range(6)]
    index = {r: k for k, r in enumerate(roots)}
    position = 0
    while position < len(roots):
        for i in range(6):
            image = reflect(roots[position], i)
            if image not in index:
                index[image] = len(roots)
                roots.append(image)
        position += 1
    if len(roots) != 72:
        raise GroupSpecError(f'E6 root system has {len(roots)} roots, expected 72')
    reflections = [Permutation([index[reflect(r, i)] for r in roots]) for i in range(6)]
    # products of two reflections generate the derived subgroup
    rotations = [tuple((reflections[0] * reflections[i]).array_form) for i in range(1, 6)]
    return GroupSpec('Perm', 72, name='PSU4_2', generators=tuple(rotations))


@functools.lru_cache(maxsize=None)
def named_specs() -> Dict[str, GroupSpec]:
    specs = load_catalog_data()
    specs['Sz8'] = suzuki_8()
    specs['PSU4_2'] = psu4_2()
    return specs


def perm_spec(name: str) -> GroupSpec:
    try:
        return named_specs()[name]
    except KeyError:
        raise GroupSpecError(f'unknown catalog group {name!r}, known: {", ".join(sorted(named_specs()))}')


PERM_ORDERS = {'M11': 7920, 'M12': 95040, 'PSU4_2': 25920, 'Sz8': 29120}
# coincidences: PSL2(4) = PSL2(5) = Alt(5), PSL2(9) = Alt(6), PSL3(2) = PSL2(7)
_ALIASES = {
    'Alt:5': ('PSL2:4', 'PSL2:5'),
    'Alt:6': ('PSL2:9',),
    'PSL2:7': ('PSL3:2',),
    'Alt:8': ('PSL4:2',),
    'Perm:PSU4_2': ('PSp4:3',),
}


def _formula_entries(n: int) -> List[CatalogEntry]:
    entries = []
    k = 5
    while math.factorial(k) // 2 <= n:
        entries.append(GroupSpec('Alt', k))
        k += 1
    q = 7
    while q * (q * q - 1) // 2 <= n:
        if is_prime_power(q) and q != 9:
            entries.append(GroupSpec('PSL2', q))
        q += 1
    q = 3
    while q ** 3 * (q ** 3 - 1) * (q * q - 1) // 3 <= n:
        if is_prime_power(q):
            entries.append(GroupSpec('PSL3', q))
        q += 1
    q = 3
    while q ** 3 * (q ** 3 + 1) * (q * q - 1) // 3 <= n:
        if is_prime_power(q):
            entries.append(GroupSpec('PSU3', q))
        q += 1
    entries = [spec for spec in entries if spec.order <= n]
    return [CatalogEntry(spec, spec.order, spec.family != 'Alt' or spec.parameter in (5, 6),
                         _ALIASES.get(str(spec), ())) for spec in entries]


def simple_catalog(n: int, ceiling: int = DEFAULT_CATALOG_CEILING) -> List[CatalogEntry]:
    """All nonabelian finite simple groups of order <= n, one per isomorphism type."""
    if n > ceiling:
        raise CeilingExceeded(f'catalog requested up to {n}, ceiling is {ceiling}')
    entries = _formula_entries(n)
    for name, order in PERM_ORDERS.items():
        if order <= n:
            spec = perm_spec(name)
            entries.append(CatalogEntry(spec, order, False, _ALIASES.get(str(spec), ())))
    return sorted(entries, key=lambda e: (e.order, e.name))


def catalog_table(n: int, ceiling: int = DEFAULT_CATALOG_CEILING):
    """The catalog as a pandas DataFrame (group, order, special, aliases)."""
    rows = [{'group': e.name, 'order': e.order, 'special': e.special, 'aliases': ' '.join(e.aliases)}
            for e in simple_catalog(n, ceiling)]
    return pd.DataFrame(rows, columns=['group', 'order', 'special', 'aliases'])
