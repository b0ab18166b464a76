"""Input parsers and output writers.

Inputs are plain tab-separated text; every parse error names its line.
Outputs carry a ``#`` header and print floats with 17 significant digits.
"""
import math

import click
import pandas as pd

from randomset.errors import InputError
from randomset.models import Category, CategoryCatalog, GeneScoreTable, ProbeGeneMap

FLOAT_FORMAT = '%.17g'
SCORES_HEADER = ('gene_id', 'score')
COVARIATE_HEADER = ('sample', 'value')


def _lines(path):
    try:
        with open(path, 'r') as handle:
            for number, line in enumerate(handle, start=1):
                line = line.rstrip('\r\n')
                if line.strip() and not line.startswith('#'):
                    yield number, line
    except OSError as err:
        raise InputError(f'cannot read {path}: {err}') from err


def _two_columns(path, number, line):
    fields = line.split('\t')
    if len(fields) != 2:
        raise InputError(f'{path}:{number}: expected 2 tab-separated columns, got {len(fields)}')
    return fields[0].strip(), fields[1].strip()


def _is_header(position, fields, names):
    return position == 0 and tuple(f.lower() for f in fields) == names


def parse_scores(path):
    ids, scores, first_seen = [], [], {}
    for position, (number, line) in enumerate(_lines(path)):
        gene_id, raw = _two_columns(path, number, line)
        if _is_header(position, (gene_id, raw), SCORES_HEADER):
            continue
        try:
            score = float(raw)
        except ValueError:
            raise InputError(f'{path}:{number}: score {raw!r} is not a number')
        if not math.isfinite(score):
            raise InputError(f'{path}:{number}: score {raw!r} is not finite')
        if gene_id in first_seen:
            raise InputError(
                f'{path}:{number}: duplicate gene id {gene_id} (first on line {first_seen[gene_id]})'
            )
        first_seen[gene_id] = number
        ids.append(gene_id)
        scores.append(score)
    if not ids:
        raise InputError(f'{path}: no scores')
    return GeneScoreTable(ids=ids, scores=scores)


def parse_gmt(path, min_size=10):
    """One category per line: id, description, then members."""
    categories, first_seen = [], {}
    for number, line in _lines(path):
        fields = line.split('\t')
        if len(fields) < 3:
            raise InputError(f'{path}:{number}: expected id, description and members')
        set_id, description = fields[0].strip(), fields[1].strip()
        if not set_id:
            raise InputError(f'{path}:{number}: empty set id')
        members = [g.strip() for g in fields[2:] if g.strip()]
        if not members:
            raise InputError(f'{path}:{number}: set {set_id} has no members')
        if len(set(members)) != len(members):
            dupes = sorted({g for g in members if members.count(g) > 1})
            raise InputError(f'{path}:{number}: set {set_id} repeats members {", ".join(dupes)}')
        if set_id in first_seen:
            raise InputError(
                f'{path}:{number}: duplicate set id {set_id} (first on line {first_seen[set_id]})'
            )
        first_seen[set_id] = number
        categories.append(Category(id=set_id, description=description, members=frozenset(members)))
    if not categories:
        raise InputError(f'{path}: no gene sets')
    return CategoryCatalog(categories=categories, min_size=min_size)


def parse_probe_map(path):
    pairs, first_seen = {}, {}
    for number, line in _lines(path):
        probe_id, gene_id = _two_columns(path, number, line)
        if not pairs and (probe_id.lower(), gene_id.lower()) == ('probe_id', 'gene_id'):
            continue
        if not probe_id or not gene_id:
            raise InputError(f'{path}:{number}: empty probe or gene id')
        if probe_id in pairs:
            raise InputError(
                f'{path}:{number}: probe {probe_id} mapped twice (first on line {first_seen[probe_id]})'
            )
        first_seen[probe_id] = number
        pairs[probe_id] = gene_id
    if not pairs:
        raise InputError(f'{path}: probe map is empty')
    return ProbeGeneMap(pairs=pairs)


def parse_expression(path):
    """Genes x samples matrix with a header row of sample names."""
    try:
        frame = pd.read_csv(path, sep='\t', index_col=0)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise InputError(f'cannot read expression matrix {path}: {err}') from err
    frame.index = frame.index.astype(str)
    dupes = frame.index[frame.index.duplicated()].unique()
    if len(dupes):
        raise InputError(f'{path}: duplicate gene ids {", ".join(dupes[:10])}')
    bad = [c for c in frame.columns if not pd.api.types.is_numeric_dtype(frame[c])]
    if bad:
        raise InputError(f'{path}: non-numeric values in samples {", ".join(map(str, bad))}')
    return frame


def parse_covariate(path):
    values = {}
    for position, (number, line) in enumerate(_lines(path)):
        sample, raw = _two_columns(path, number, line)
        if _is_header(position, (sample, raw), COVARIATE_HEADER):
            continue
        if sample in values:
            raise InputError(f'{path}:{number}: duplicate sample {sample}')
        try:
            values[sample] = float(raw)
        except ValueError:
            raise InputError(f'{path}:{number}: value {raw!r} is not a number')
        if not math.isfinite(values[sample]):
            raise InputError(f'{path}:{number}: value {raw!r} is not finite')
    if not values:
        raise InputError(f'{path}: no covariate values')
    return pd.Series(values, dtype=float)


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------

def render(frame, header_lines=(), sep='\t'):
    body = frame.to_csv(sep=sep, index=False, float_format=FLOAT_FORMAT,
                        na_rep='', lineterminator='\n')
    return ''.join(f'{line}\n' for line in header_lines) + body


def write_output(text, path=None):
    if path is None:
        click.echo(text, nl=False)
        return
    try:
        with open(path, 'w', newline='\n') as handle:
            handle.write(text)
    except OSError as err:
        raise InputError(f'cannot write {path}: {err}') from err


def write_null_sample(values, path):
    write_output(''.join(f'{v:.17g}\n' for v in values), path)
