import datetime
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from shortlaw.lib.errors import CertificateError
from shortlaw.lib.evaluation import VerificationRecord
from shortlaw.lib.freeword import Word, format_word, parse_word
from shortlaw.lib.lawcomb import LawTrace
from shortlaw.lib.pipeline import PipelineParams
from shortlaw.lib.utils import atomic_write_text

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
HEADER = 'shortlaw-certificate'
DEFAULT_INLINE_WORD_LIMIT = 1_000_000


def word_digest(w: Word) -> str:
    return hashlib.sha256(format_word(w).encode('ascii')).hexdigest()


@dataclass
class LawCertificate:
    seed: int
    target: str
    n: int
    bad_primes: Tuple[int, ...]
    word_length: int
    # run-length text of the word, or None when only its digest is kept
    word_text: Optional[str]
    word_sha256: str
    scope: str = ''
    parameters: Dict[str, str] = field(default_factory=dict)
    trace_lines: List[str] = field(default_factory=list)
    records: List[VerificationRecord] = field(default_factory=list)
    unverified: List[str] = field(default_factory=list)
    timestamps: Dict[str, str] = field(default_factory=dict)
    version: int = FORMAT_VERSION

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def status(self) -> str:
        return 'PASS' if self.passed else 'FAIL'

    def matches(self, w: Word) -> bool:
        """True when w is the certified word, compared by text when inline and by digest otherwise."""
        if len(w) != self.word_length:
            return False
        if self.word_text is not None:
            return format_word(w) == self.word_text
        return word_digest(w) == self.word_sha256

    def word(self) -> Word:
        if self.word_text is None:
            raise CertificateError(f'certificate keeps only the digest of its {self.word_length}-letter word')
        return parse_word(self.word_text)


def build_certificate(target: str, params: PipelineParams, word: Word, trace: LawTrace,
                      records: List[VerificationRecord], unverified: List[str] = (), parameters: Optional[Dict] = None,
                      inline_word_limit: int = DEFAULT_INLINE_WORD_LIMIT,
                      timestamps: bool = False) -> LawCertificate:
    """Certificate of a construction run with the parameters the word was built from."""
    values = {'c1': params.c1, 'c4': params.c4, 'retry_limit': params.retry_limit,
              'schedule_min_growth': params.schedule_min_growth,
              'include_abelian_simple': params.include_abelian_simple,
              'enumeration_ceiling': params.enumeration_ceiling, 'catalog_ceiling': params.catalog_ceiling,
              'max_word_length': params.max_word_length}
    values.update(parameters or {})
    inline = len(word) <= inline_word_limit
    stamps = {}
    if timestamps:
        stamps['created'] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')
    return LawCertificate(seed=params.seed, target=target, n=params.n, bad_primes=tuple(params.bad_primes),
                          word_length=len(word), word_text=format_word(word) if inline else None,
                          word_sha256=word_digest(word), scope=trace.scope,
                          parameters={k: _value_text(v) for k, v in values.items()},
                          trace_lines=trace.to_lines(1), records=list(records), unverified=list(unverified),
                          timestamps=stamps)


def _value_text(value) -> str:
    if isinstance(value, bool):
        return 'yes' if value else 'no'
    return str(value)


def _record_lines(record: VerificationRecord) -> List[str]:
    lines = [f'  - group: {record.group}',
             f'    mode: {record.mode}',
             f'    pairs: {record.pairs}',
             f'    violations: {record.violations}']
    if record.seed is not None:
        lines.append(f'    seed: {record.seed}')
    if record.witness is not None:
        lines.append(f'    witness: {record.witness[0]} {record.witness[1]}')
    if record.witness_text:
        lines.append(f'    witness_elements: {record.witness_text}')
    return lines


def format_certificate(cert: LawCertificate) -> str:
    lines = [f'{HEADER}: {cert.version}',
             f'seed: {cert.seed}',
             f'target: {cert.target}',
             f'n: {cert.n}',
             f'bad_primes: {" ".join(map(str, cert.bad_primes))}'.rstrip(),
             f'scope: {cert.scope}'.rstrip(),
             'parameters:']
    lines += [f'  {key}: {value}' for key, value in sorted(cert.parameters.items())]
    lines.append(f'word_length: {cert.word_length}')
    if cert.word_text is not None:
        lines.append(f'word: {cert.word_text}')
    lines.append(f'word_sha256: {cert.word_sha256}')
    lines.append('trace:')
    lines += cert.trace_lines
    lines.append('verification:')
    for record in cert.records:
        lines += _record_lines(record)
    if cert.unverified:
        lines.append(f'unverified: {" ".join(cert.unverified)}')
    for key, value in sorted(cert.timestamps.items()):
        lines.append(f'{key}: {value}')
    lines.append(f'status: {cert.status}')
    return '\n'.join(lines) + '\n'


def write_certificate(cert: LawCertificate, path: str):
    atomic_write_text(path, format_certificate(cert))
    logger.debug(f'certificate written to {path}')


def _blocks(lines: List[str]) -> Tuple[Dict[str, str], Dict[str, List[str]]]:
    """Top-level `key: value` pairs and the indented lines under each block key."""
    values: Dict[str, str] = {}
    blocks: Dict[str, List[str]] = {}
    current = None
    for number, line in enumerate(lines, 1):
        if not line.strip():
            continue
        if line.startswith(' '):
            if current is None:
                raise CertificateError(f'line {number}: indented line outside of a block')
            blocks[current].append(line)
            continue
        key, sep, value = line.partition(':')
        if not sep:
            raise CertificateError(f'line {number}: expected key: value, got {line!r}')
        value = value.strip()
        if value:
            values[key] = value
            current = None
        else:
            current = key
            blocks[key] = []
            values.setdefault(key, '')
    return values, blocks


def _parse_records(lines: List[str]) -> List[VerificationRecord]:
    items: List[Dict[str, str]] = []
    for line in lines:
        stripped = line.strip()
        if stripped.startswith('- '):
            items.append({})
            stripped = stripped[2:]
        if not items:
            raise CertificateError(f'verification entry without a leading dash: {line!r}')
        key, _, value = stripped.partition(':')
        items[-1][key.strip()] = value.strip()
    records = []
    for item in items:
        witness = None
        if 'witness' in item:
            i, j = item['witness'].split()
            witness = (int(i), int(j))
        records.append(VerificationRecord(item['group'], item['mode'], int(item['pairs']), int(item['violations']),
                                          witness, item.get('witness_elements', ''),
                                          int(item['seed']) if 'seed' in item else None))
    return records


def parse_certificate(text: str) -> LawCertificate:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(f'{HEADER}:'):
        raise CertificateError('not a shortlaw certificate')
    values, blocks = _blocks(lines)
    try:
        version = int(values[HEADER])
        if version != FORMAT_VERSION:
            raise CertificateError(f'certificate format {version} is not supported')
        parameters = {}
        for line in blocks.get('parameters', []):
            key, _, value = line.strip().partition(':')
            parameters[key] = value.strip()
        timestamps = {k: values[k] for k in ('created', 'finished') if k in values}
        return LawCertificate(seed=int(values['seed']), target=values['target'], n=int(values['n']),
                              bad_primes=tuple(int(p) for p in values.get('bad_primes', '').split()),
                              word_length=int(values['word_length']), word_text=values.get('word'),
                              word_sha256=values['word_sha256'], scope=values.get('scope', ''),
                              parameters=parameters, trace_lines=blocks.get('trace', []),
                              records=_parse_records(blocks.get('verification', [])),
                              unverified=values.get('unverified', '').split(), timestamps=timestamps,
                              version=version)
    except KeyError as e:
        raise CertificateError(f'certificate lacks the {e.args[0]!r} field') from e


def read_certificate(path: str) -> LawCertificate:
    with open(path, encoding='utf-8') as f:
        return parse_certificate(f.read())


def pipeline_params(cert: LawCertificate) -> PipelineParams:
    """The construction parameters recorded in a certificate."""
    p = cert.parameters
    try:
        return PipelineParams(n=cert.n, seed=cert.seed, bad_primes=cert.bad_primes, c1=float(p['c1']),
                              c4=float(p['c4']), retry_limit=int(p['retry_limit']),
                              schedule_min_growth=float(p['schedule_min_growth']),
                              include_abelian_simple=p['include_abelian_simple'] == 'yes',
                              enumeration_ceiling=int(p['enumeration_ceiling']),
                              catalog_ceiling=int(p['catalog_ceiling']),
                              max_word_length=int(p['max_word_length']))
    except KeyError as e:
        raise CertificateError(f'certificate parameters lack {e.args[0]!r}') from e
