import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, List, Tuple, Union

import numpy as np

from shortlaw.lib.errors import TrivialWordError, WordParseError

LETTERS = b'xXyY'
_CASE_BIT = 0x20
_LETTER_CODES = np.frombuffer(LETTERS, dtype=np.uint8)
_RUN = re.compile(rb'x{2,}|X{2,}|y{2,}|Y{2,}')
_RUNS = re.compile(rb'x+|X+|y+|Y+')
_POWER = re.compile(rb'([xXyY])\^(\d+)')
_TEXT = re.compile(r'(?:[xXyY](?:\^[1-9][0-9]*)?)+')
_TEMPLATE_ALPHABET = str.maketrans('aAbB', 'xXyY')
_TEMPLATE_BACK = str.maketrans('xXyY', 'aAbB')
MASK64 = (1 << 64) - 1


class Letter(enum.Enum):
    x = 'x'
    X = 'X'
    y = 'y'
    Y = 'Y'

    @property
    def generator(self) -> int:
        return 0 if self.value in 'xX' else 1

    @property
    def sign(self) -> int:
        return 1 if self.value.islower() else -1

    @property
    def inverse(self) -> 'Letter':
        return Letter(self.value.swapcase())

    @classmethod
    def of(cls, generator: int, sign: int) -> 'Letter':
        name = 'xy'[generator]
        return cls(name if sign > 0 else name.upper())


class Word:
    """An element of F2 as a freely reduced word. Build through reduce() or parse_word()."""
    __slots__ = ('_letters',)

    def __init__(self, letters: bytes = b''):
        object.__setattr__(self, '_letters', bytes(letters))

    def __setattr__(self, key, value):
        raise AttributeError('Word is immutable')

    @property
    def letters(self) -> bytes:
        return self._letters

    @property
    def length(self) -> int:
        return len(self._letters)

    def __len__(self):
        return len(self._letters)

    def is_trivial(self) -> bool:
        return not self._letters

    def __iter__(self) -> Iterator[Letter]:
        return (Letter(chr(c)) for c in self._letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self._letters == other._letters

    def __hash__(self):
        return hash(self._letters)

    # shortlex
    def __lt__(self, other: 'Word') -> bool:
        return (len(self), self._letters) < (len(other), other._letters)

    def __mul__(self, other: 'Word') -> 'Word':
        return concat(self, other)

    def __invert__(self) -> 'Word':
        return inverse(self)

    def __pow__(self, k: int) -> 'Word':
        return power(self, k)

    def __str__(self):
        return format_word(self)

    def __repr__(self):
        return f"Word('{format_word(self)}')"

    def __reduce__(self):
        return Word, (self._letters,)


EMPTY = Word()
X_WORD = Word(b'x')
Y_WORD = Word(b'y')


def _is_reduced(raw: bytes) -> bool:
    if len(raw) < 2:
        return True
    codes = np.frombuffer(raw, dtype=np.uint8)
    return not np.any((codes[:-1] ^ codes[1:]) == _CASE_BIT)


def _append(buf: bytearray, chunk: bytes):
    """Append a reduced chunk to a reduced buffer, cancelling across the seam."""
    i = 0
    n = len(chunk)
    while i < n and buf and buf[-1] ^ chunk[i] == _CASE_BIT:
        buf.pop()
        i += 1
    buf += memoryview(chunk)[i:]


def _reduce_bytes(raw: bytes) -> bytes:
    if _is_reduced(raw):
        return bytes(raw)
    stack = bytearray()
    for c in raw:
        if stack and stack[-1] ^ c == _CASE_BIT:
            stack.pop()
        else:
            stack.append(c)
    return bytes(stack)


def _letter_bytes(raw: Iterable[Union[Letter, str]]) -> bytes:
    out = bytearray()
    for letter in raw:
        value = letter.value if isinstance(letter, Letter) else letter
        if value not in ('x', 'X', 'y', 'Y'):
            raise WordParseError(f'{value!r} is not a letter of F2')
        out += value.encode('ascii')
    return bytes(out)


def reduce(raw: Union[bytes, str, Iterable[Letter]]) -> Word:
    """Freely reduce a letter sequence."""
    if isinstance(raw, bytes):
        data = raw
    elif isinstance(raw, str):
        data = _letter_bytes(raw)
    else:
        data = _letter_bytes(raw)
    return Word(_reduce_bytes(data))


def concat(u: Word, v: Word) -> Word:
    if not u._letters:
        return v
    if not v._letters:
        return u
    buf = bytearray(u._letters)
    _append(buf, v._letters)
    return Word(buf)


def product(*words: Word) -> Word:
    buf = bytearray()
    for w in words:
        _append(buf, w._letters)
    return Word(buf)


def inverse(w: Word) -> Word:
    return Word(w._letters[::-1].swapcase())


def cyclic_reduce(w: Word) -> Tuple[Word, Word]:
    """Split w = c * core * c^-1 with core cyclically reduced; returns (c, core)."""
    s = w._letters
    n = len(s)
    i = 0
    while 2 * i + 1 < n and s[i] ^ s[n - 1 - i] == _CASE_BIT:
        i += 1
    return Word(s[:i]), Word(s[i:n - i])


def is_cyclically_reduced(w: Word) -> bool:
    s = w._letters
    return len(s) < 2 or s[0] ^ s[-1] != _CASE_BIT


def power(w: Word, k: int) -> Word:
    if k == 0 or not w._letters:
        return EMPTY
    if k < 0:
        return power(inverse(w), -k)
    if k == 1:
        return w
    c, core = cyclic_reduce(w)
    return Word(c._letters + core._letters * k + c._letters[::-1].swapcase())


def conjugate(w: Word, c: Word) -> Word:
    """w^c = c^-1 w c."""
    return product(inverse(c), w, c)


def commutator(u: Word, v: Word) -> Word:
    """[u, v] = u^-1 v^-1 u v."""
    return product(inverse(u), inverse(v), u, v)


def substitute(template: Word, u: Word, v: Word) -> Word:
    """Image of template under the endomorphism x -> u, y -> v (templates read a, b as x, y)."""
    images = {
        ord('x'): u,
        ord('X'): inverse(u),
        ord('y'): v,
        ord('Y'): inverse(v),
    }
    buf = bytearray()
    for run in _RUNS.finditer(template._letters):
        chunk = run.group(0)
        _append(buf, power(images[chunk[0]], len(chunk))._letters)
    return Word(buf)


def commutes(u: Word, v: Word) -> bool:
    if not u._letters or not v._letters:
        return True
    return commutator(u, v).is_trivial()


def _smallest_period(s: bytes) -> int:
    n = len(s)
    fail = [0] * n
    k = 0
    for i in range(1, n):
        while k and s[i] != s[k]:
            k = fail[k - 1]
        if s[i] == s[k]:
            k += 1
        fail[i] = k
    p = n - fail[-1]
    return p if n % p == 0 else n


def maximal_root(w: Word) -> Tuple[Word, int]:
    """(r, k) with w = r^k and k maximal."""
    if not w._letters:
        raise TrivialWordError('the empty word has no primitive root')
    c, core = cyclic_reduce(w)
    p = _smallest_period(core._letters)
    root = Word(c._letters + core._letters[:p] + c._letters[::-1].swapcase())
    return root, len(core) // p


# signed permutations of the generators, each an automorphism of F2
AUTOMORPHISMS = [bytes.maketrans(LETTERS, image) for image in
                 (b'xXyY', b'XxyY', b'xXYy', b'XxYy', b'yYxX', b'YyxX', b'yYXx', b'YyXx')]


def automorphic_images(w: Word) -> List[Word]:
    return [Word(w._letters.translate(table)) for table in AUTOMORPHISMS]


def canonical_form(w: Word, cyclic: bool = False) -> Word:
    """Least representative of w under inversion, the signed generator permutations and,
    when cyclic, rotation of a cyclically reduced word."""
    candidates = [w, inverse(w)]
    if cyclic and len(w) > 1:
        s = w._letters
        rotations = [Word(s[i:] + s[:i]) for i in range(1, len(s))]
        candidates += rotations + [inverse(r) for r in rotations]
    best = None
    for candidate in candidates:
        for image in automorphic_images(candidate):
            if best is None or image < best:
                best = image
    return best


def reduced_words(length: int) -> Iterator[Word]:
    """All reduced words of the given length, shortlex order over x < X < y < Y."""
    if length == 0:
        yield EMPTY
        return
    frontier = [bytes([c]) for c in LETTERS]
    for _ in range(length - 1):
        frontier = [s + bytes([c]) for s in frontier for c in LETTERS if s[-1] ^ c != _CASE_BIT]
    for s in frontier:
        yield Word(s)


def format_word(w: Word, template: bool = False) -> str:
    """Run-length text form; the empty word is '1'."""
    if not w._letters:
        return '1'
    text = _RUN.sub(lambda m: m.group(0)[:1] + b'^' + str(len(m.group(0))).encode('ascii'),
                    w._letters).decode('ascii')
    if template:
        text = text.translate(_TEMPLATE_BACK)
    return text


def parse_word(text: str, template: bool = False) -> Word:
    """Parse the run-length text form; whitespace is ignored and the result is reduced."""
    compact = re.sub(r'\s+', '', text)
    if template:
        if re.search(r'[xXyY]', compact):
            raise WordParseError(f'template {text!r} must use the letters a, A, b, B')
        compact = compact.translate(_TEMPLATE_ALPHABET)
    if compact == '1':
        return EMPTY
    if not compact or not _TEXT.fullmatch(compact):
        raise WordParseError(f'{text!r} is not a word over x, X, y, Y')
    raw = _POWER.sub(lambda m: m.group(1) * int(m.group(2)), compact.encode('ascii'))
    return Word(_reduce_bytes(raw))


def run_lengths(w: Word) -> List[Tuple[int, int]]:
    """[(letter index into LETTERS, run length), ...]."""
    return [(LETTERS.index(m.group(0)[0]), len(m.group(0))) for m in _RUNS.finditer(w._letters)]


@dataclass(frozen=True)
class WalkParams:
    length: int
    mode: str = 'lazy'
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if self.length < 0:
            raise ValueError(f'walk length {self.length} is negative')
        if self.mode not in ('lazy', 'simple'):
            raise ValueError(f'unknown walk mode {self.mode!r}')


def stream_generator(seed: int, stream: int) -> np.random.Generator:
    """Counter-based generator keyed by (master seed, stream index)."""
    key = ((stream & MASK64) << 64) | (seed & MASK64)
    return np.random.Generator(np.random.Philox(key=key))


def walk_steps(rng: np.random.Generator, length: int, mode: str, size=None) -> np.ndarray:
    """Step codes: 0..3 index LETTERS, 4..7 (lazy only) hold in place."""
    shape = length if size is None else (size, length)
    return rng.integers(0, 8 if mode == 'lazy' else 4, size=shape, dtype=np.uint8)


def random_walk(params: WalkParams) -> Word:
    steps = walk_steps(stream_generator(params.seed, params.stream), params.length, params.mode)
    raw = _LETTER_CODES[steps[steps < 4]].tobytes()
    return Word(_reduce_bytes(raw))


def random_walks(params: WalkParams, count: int) -> List[Word]:
    """count walks on consecutive streams starting at params.stream."""
    return [random_walk(WalkParams(params.length, params.mode, params.seed, params.stream + i))
            for i in range(count)]


METABELIAN_TEMPLATE = commutator(commutator(X_WORD, Y_WORD), commutator(Y_WORD, inverse(X_WORD)))
