"""Run configuration: echoed into every output header and readable back."""
from dataclasses import asdict, dataclass, fields, replace

from randomset.errors import InputError

COMMANDS = ('score', 'adjust', 'simulate', 'power', 'correlate')
# Destinations are not part of what a run computes
NOT_ECHOED = ('out', 'dump_null')


def _parse_bool(text):
    if text not in ('true', 'false'):
        raise InputError(f'expected true/false, got {text!r}')
    return text == 'true'


def _parse_floats(text):
    return tuple(float(v) for v in text.split(',')) if text else ()


def _format(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ','.join(repr(float(v)) for v in value)
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    command: str
    scores: str = None
    sets: str = None
    probe_map: str = None
    expression: str = None
    covariate: str = None
    # Unset fields stay out of the header; each command sets only its own
    universe: str = None
    min_size: int = None
    method: str = None
    select: str = None
    fdr: float = None
    threshold: float = None
    top: int = None
    storey_lambda: float = None
    negate: bool = None
    sort: str = None
    alpha: float = None
    B: int = None
    seed: int = None
    m: int = None
    pi: float = None
    enrichment: tuple = None
    delta: tuple = None
    out: str = None
    dump_null: str = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InputError(f'unknown command {self.command!r}')

    def evolve(self, **changes):
        return replace(self, **changes)

    def header_lines(self, **extra):
        lines = [f'# randomset {self.command}']
        for key, value in asdict(self).items():
            if key in NOT_ECHOED or key == 'command' or value is None:
                continue
            lines.append(f'# {key}={_format(value)}')
        for key, value in extra.items():
            lines.append(f'# {key}={_format(value)}')
        return lines

    @classmethod
    def from_header(cls, path):
        """Rebuild the config of the run that wrote ``path``."""
        types = {f.name: f.type for f in fields(cls)}
        values, command = {}, None
        try:
            with open(path, 'r') as handle:
                for line in handle:
                    if not line.startswith('#'):
                        break
                    text = line[1:].strip()
                    if text.startswith('randomset '):
                        command = text.split(' ', 1)[1]
                        continue
                    key, sep, raw = text.partition('=')
                    if not sep or key not in types:
                        continue
                    values[key] = _convert(types[key], raw)
        except OSError as err:
            raise InputError(f'cannot read {path}: {err}') from err
        if command is None:
            raise InputError(f'{path} has no randomset header')
        return cls(command=command, **values)


def _convert(kind, raw):
    try:
        if kind in (int, 'int'):
            return int(raw)
        if kind in (float, 'float'):
            return float(raw)
        if kind in (bool, 'bool'):
            return _parse_bool(raw)
        if kind in (tuple, 'tuple'):
            return _parse_floats(raw)
    except ValueError as err:
        raise InputError(f'bad header value {raw!r}: {err}') from err
    return raw
