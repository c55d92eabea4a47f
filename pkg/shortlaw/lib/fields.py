"""Finite fields GF(q) as lookup tables. An element is an int in [0, q) holding the base-p digits
of its coefficients, constant term first, so the prime subfield is 0..p-1.
"""
import functools
import logging
from itertools import product
from typing import List, Tuple

import numpy as np
from sympy import factorint, primitive_root

from shortlaw.lib.errors import FieldError

# Conway polynomials, coefficients from the constant term up, monic
CONWAY_MODULI = {
    (2, 2): [1, 1, 1],
    (2, 3): [1, 1, 0, 1],
    (2, 4): [1, 1, 0, 0, 1],
    (2, 5): [1, 0, 1, 0, 0, 1],
    (2, 6): [1, 1, 0, 1, 1, 0, 1],
    (3, 2): [2, 2, 1],
    (3, 3): [1, 2, 0, 1],
    (3, 4): [2, 0, 0, 2, 1],
    (5, 2): [2, 4, 1],
    (5, 3): [3, 3, 0, 1],
    (7, 2): [3, 6, 1],
    (11, 2): [2, 7, 1],
    (13, 2): [2, 12, 1],
}


def prime_power(q: int) -> Tuple[int, int]:
    """(p, e) with q = p^e, or FieldError."""
    if q < 2:
        raise FieldError(f'{q} is not a prime power')
    factors = factorint(q)
    if len(factors) != 1:
        raise FieldError(f'{q} is not a prime power')
    (p, e), = factors.items()
    return int(p), int(e)


def is_prime_power(q: int) -> bool:
    try:
        prime_power(q)
    except FieldError:
        return False
    return True


def _times_x(a: int, p: int, modulus: List[int]) -> int:
    e = len(modulus) - 1
    digits = [(a // p ** i) % p for i in range(e)]
    top = digits[-1]
    shifted = [0] + digits[:-1]
    value = 0
    for i in range(e - 1, -1, -1):
        value = value * p + (shifted[i] - top * modulus[i]) % p
    return value


def _power_cycle(p: int, modulus: List[int]) -> List[int]:
    """Successive powers of x modulo the polynomial, up to the return to 1."""
    q = p ** (len(modulus) - 1)
    powers = [1]
    current = _times_x(1, p, modulus)
    while current != 1 and len(powers) < q:
        powers.append(current)
        current = _times_x(current, p, modulus)
    return powers


class GF:
    """GF(q) with exp/log tables over a primitive element."""

    def __init__(self, q: int):
        self.logger = logging.getLogger(__name__)
        self.p, self.e = prime_power(q)
        self.q = q

        if self.e == 1:
            g = int(primitive_root(self.p))
            exp = [pow(g, i, self.p) for i in range(q - 1)]
            self.modulus = None
        else:
            self.modulus = CONWAY_MODULI.get((self.p, self.e))
            exp = _power_cycle(self.p, self.modulus) if self.modulus else []
            if len(exp) != q - 1:
                self.modulus, exp = self._search_primitive_modulus()
                self.logger.warning(f'No tabulated primitive modulus for GF({q}), using {self.modulus}')

        self.exp = np.array(exp + exp, dtype=np.int64)
        self.log = np.zeros(q, dtype=np.int64)
        self.log[self.exp[:q - 1]] = np.arange(q - 1)
        self.generator = int(self.exp[1]) if q > 2 else 1

        digits = np.array([[(a // self.p ** i) % self.p for i in range(self.e)] for a in range(q)],
                          dtype=np.int64)
        place = self.p ** np.arange(self.e, dtype=np.int64)
        self.add_table = ((digits[:, None, :] + digits[None, :, :]) % self.p) @ place
        self.neg_table = ((-digits) % self.p) @ place

        logs = self.log
        mul = self.exp[(logs[:, None] + logs[None, :]) % (q - 1)]
        mul[0, :] = 0
        mul[:, 0] = 0
        self.mul_table = mul
        self.inv_table = np.zeros(q, dtype=np.int64)
        self.inv_table[1:] = self.exp[(-logs[1:]) % (q - 1)]

    def _search_primitive_modulus(self):
        for tail in product(range(self.p), repeat=self.e):
            modulus = list(tail) + [1]
            if modulus[0] == 0:
                continue
            exp = _power_cycle(self.p, modulus)
            if len(exp) == self.q - 1:
                return modulus, exp
        raise FieldError(f'no primitive polynomial of degree {self.e} over GF({self.p})')

    def __repr__(self):
        return f'GF({self.q})'

    def __eq__(self, other):
        return isinstance(other, GF) and other.q == self.q

    def __hash__(self):
        return hash(self.q)

    @property
    def zero(self) -> int:
        return 0

    @property
    def one(self) -> int:
        return 1

    def elements(self) -> np.ndarray:
        return np.arange(self.q, dtype=np.int64)

    def add(self, a, b):
        return self.add_table[a, b]

    def sub(self, a, b):
        return self.add_table[a, self.neg_table[b]]

    def neg(self, a):
        return self.neg_table[a]

    def mul(self, a, b):
        return self.mul_table[a, b]

    def inv(self, a):
        if np.any(np.asarray(a) == 0):
            raise FieldError(f'inversion of zero in {self!r}')
        return self.inv_table[a]

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def power(self, a, k: int):
        a = np.asarray(a, dtype=np.int64)
        if k == 0:
            return np.ones_like(a)[()] if a.ndim else 1
        result = self.exp[(self.log[a] * (k % (self.q - 1))) % (self.q - 1)]
        if k < 0 and np.any(a == 0):
            raise FieldError(f'inversion of zero in {self!r}')
        result = np.where(a == 0, 0, result)
        return result[()] if result.ndim == 0 else result

    def frobenius(self, a, times: int = 1):
        return self.power(a, self.p ** times)

    def is_square(self, a):
        """Squares of GF(q), zero included; every element is a square in characteristic 2."""
        a = np.asarray(a)
        if self.p == 2:
            result = np.ones(a.shape, dtype=bool)
        else:
            result = (a == 0) | (self.log[a] % 2 == 0)
        return bool(result) if result.ndim == 0 else result

    def absolute_trace(self, a):
        """Tr_{GF(q)/GF(p)}(a) = a + a^p + ... + a^(p^(e-1))."""
        total = np.zeros_like(np.asarray(a, dtype=np.int64))
        for i in range(self.e):
            total = self.add(total, self.frobenius(a, i))
        return total[()] if np.ndim(total) == 0 else total

    def from_int(self, n: int) -> int:
        """Image of the integer n in the prime subfield."""
        return n % self.p

    def elem(self, value: int) -> 'FieldElem':
        return FieldElem(self, value)


@functools.lru_cache(maxsize=None)
def field(q: int) -> GF:
    return GF(q)


class FieldElem:
    """Scalar convenience wrapper; bulk arithmetic goes through the GF tables directly."""
    __slots__ = ('field', 'value')

    def __init__(self, gf: GF, value: int):
        if not 0 <= value < gf.q:
            raise FieldError(f'{value} is not an element encoding of {gf!r}')
        self.field = gf
        self.value = int(value)

    def _other(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.field != self.field:
                raise FieldError(f'{other.field!r} and {self.field!r} do not match')
            return other.value
        return self.field.from_int(other)

    def __eq__(self, other):
        if isinstance(other, FieldElem):
            return self.field == other.field and self.value == other.value
        return isinstance(other, int) and self.value == self.field.from_int(other)

    def __hash__(self):
        return hash((self.field.q, self.value))

    def __repr__(self):
        return f'GF({self.field.q})({self.value})'

    def __add__(self, other):
        return FieldElem(self.field, int(self.field.add(self.value, self._other(other))))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElem(self.field, int(self.field.sub(self.value, self._other(other))))

    def __neg__(self):
        return FieldElem(self.field, int(self.field.neg(self.value)))

    def __mul__(self, other):
        return FieldElem(self.field, int(self.field.mul(self.value, self._other(other))))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return FieldElem(self.field, int(self.field.div(self.value, self._other(other))))

    def __pow__(self, k: int):
        return FieldElem(self.field, int(self.field.power(self.value, k)))

    def inverse(self) -> 'FieldElem':
        return FieldElem(self.field, int(self.field.inv(self.value)))

    def frobenius(self) -> 'FieldElem':
        return FieldElem(self.field, int(self.field.frobenius(self.value)))

    def is_square(self) -> bool:
        return self.field.is_square(self.value)
