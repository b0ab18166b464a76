import numpy as np
import pytest

from randomset import create_cli
from randomset.catalog import bind
from randomset.models import Category, CategoryCatalog, GeneScoreTable


def make_table(scores, prefix='g'):
    return GeneScoreTable(ids=[f'{prefix}{i}' for i in range(len(scores))], scores=scores)


def make_catalog(table, sets, min_size=1, universe_mode='all'):
    """Bind ``{set_id: member ids}`` to ``table``."""
    categories = [Category(id=cid, description=f'{cid} set', members=members)
                  for cid, members in sets.items()]
    return bind(CategoryCatalog(categories=categories, min_size=min_size), table, universe_mode)


def write_scores(path, table, header=True):
    lines = ['gene_id\tscore'] if header else []
    lines += [f'{g}\t{s!r}' for g, s in zip(table.ids, table.scores.tolist())]
    path.write_text('\n'.join(lines) + '\n')
    return path


def write_gmt(path, sets):
    path.write_text(''.join(
        f'{cid}\t{cid} set\t' + '\t'.join(members) + '\n' for cid, members in sets.items()
    ))
    return path


@pytest.fixture
def toy_table():
    # Scores 1..5; small enough to enumerate every subset
    return GeneScoreTable(ids=['a', 'b', 'c', 'd', 'e'], scores=[1.0, 2.0, 3.0, 4.0, 5.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cli():
    return create_cli('testing')


@pytest.fixture
def synthetic_study(tmp_path):
    """200 genes, eight overlapping categories, the first shifted upwards."""
    rng = np.random.default_rng(7)
    scores = rng.standard_normal(200)
    scores[:20] += 2.0
    table = make_table(scores)
    sets = {'SET_A': [f'g{i}' for i in range(20)]}
    for j in range(1, 8):
        start = 15 * j
        sets[f'SET_{chr(65 + j)}'] = [f'g{i}' for i in range(start, start + 25)]
    return {
        'table': table,
        'sets': sets,
        'scores': write_scores(tmp_path / 'scores.tsv', table),
        'gmt': write_gmt(tmp_path / 'sets.gmt', sets),
    }
