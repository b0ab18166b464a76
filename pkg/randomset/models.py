from dataclasses import dataclass, field, replace
from functools import cached_property
from types import MappingProxyType

import math
import numpy as np
import pandas as pd

from randomset.errors import InputError


def _readonly(values, dtype=float):
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


# ---------------------------------------------------------------------------
# Gene universe and categories
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GeneScoreTable:
    ids: tuple
    scores: np.ndarray

    def __post_init__(self):
        ids = self.ids
        if not (isinstance(ids, tuple) and all(isinstance(i, str) for i in ids)):
            ids = tuple(str(i) for i in ids)
        scores = _readonly(self.scores)
        if scores.ndim != 1 or len(ids) != scores.size:
            raise InputError(f'{len(ids)} ids but {scores.size} scores')
        if len(ids) < 2:
            raise InputError('a score table needs at least 2 genes')
        if len(set(ids)) != len(ids):
            seen, dupes = set(), []
            for gene_id in ids:
                if gene_id in seen:
                    dupes.append(gene_id)
                seen.add(gene_id)
            raise InputError(f'duplicate gene ids: {", ".join(sorted(set(dupes)))}')
        if not np.all(np.isfinite(scores)):
            bad = [ids[i] for i in np.flatnonzero(~np.isfinite(scores))]
            raise InputError(f'non-finite scores for: {", ".join(bad[:10])}')
        object.__setattr__(self, 'ids', ids)
        object.__setattr__(self, 'scores', scores)

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        return cls(ids=[p[0] for p in pairs], scores=[p[1] for p in pairs])

    @property
    def universe_size(self):
        return len(self.ids)

    @cached_property
    def index(self):
        return MappingProxyType({gene_id: i for i, gene_id in enumerate(self.ids)})

    @property
    def is_binary(self):
        return bool(np.all((self.scores == 0.0) | (self.scores == 1.0)))

    def same_universe(self, other):
        if other is None:
            return False
        return other is self or other.ids is self.ids or other.ids == self.ids

    def restrict(self, keep):
        """Sub-table over the ids in ``keep``, in this table's order."""
        keep = set(keep)
        positions = [i for i, gene_id in enumerate(self.ids) if gene_id in keep]
        return GeneScoreTable(
            ids=[self.ids[i] for i in positions],
            scores=self.scores[positions],
        )

    def with_scores(self, scores):
        return GeneScoreTable(ids=self.ids, scores=scores)

    def negated(self):
        return self.with_scores(-self.scores)

    def to_frame(self):
        return pd.DataFrame({'gene_id': self.ids, 'score': self.scores})

    def __repr__(self):
        return f'<GeneScoreTable G={self.universe_size}>'


@dataclass(frozen=True, eq=False)
class Category:
    id: str
    description: str
    members: frozenset
    # Set by catalog.bind: sorted positions in the bound table
    indices: np.ndarray = None
    universe: GeneScoreTable = None

    def __post_init__(self):
        object.__setattr__(self, 'members', frozenset(str(g) for g in self.members))
        if not self.members:
            raise InputError(f'category {self.id} has no members')
        if self.indices is not None:
            object.__setattr__(self, 'indices', _readonly(self.indices, dtype=np.int64))

    @property
    def size(self):
        return len(self.members)

    @property
    def bound(self):
        return self.universe is not None

    def __repr__(self):
        return f'<Category {self.id} m={self.size}>'


@dataclass(frozen=True, eq=False)
class CategoryCatalog:
    categories: tuple
    min_size: int = 10
    table: GeneScoreTable = None
    universe_mode: str = None
    # The table passed to bind (differs from `table` in annotated mode)
    source: GeneScoreTable = None

    def __post_init__(self):
        categories = tuple(self.categories)
        seen = set()
        for category in categories:
            if category.id in seen:
                raise InputError(f'duplicate category id: {category.id}')
            seen.add(category.id)
        if self.min_size < 1:
            raise InputError(f'min_size must be >= 1, got {self.min_size}')
        object.__setattr__(self, 'categories', categories)

    @property
    def bound(self):
        return self.table is not None

    @property
    def ids(self):
        return [c.id for c in self.categories]

    @property
    def sizes(self):
        return np.array([c.size for c in self.categories], dtype=np.int64)

    @cached_property
    def by_id(self):
        return MappingProxyType({c.id: c for c in self.categories})

    def __len__(self):
        return len(self.categories)

    def __iter__(self):
        return iter(self.categories)

    def __repr__(self):
        state = f'bound G={self.table.universe_size}' if self.bound else 'unbound'
        return f'<CategoryCatalog k={len(self)} {state}>'


@dataclass(frozen=True, eq=False)
class ProbeGeneMap:
    pairs: MappingProxyType

    def __post_init__(self):
        if not self.pairs:
            raise InputError('probe map is empty')
        object.__setattr__(self, 'pairs', MappingProxyType(dict(self.pairs)))

    def gene_of(self, probe_id):
        return self.pairs[probe_id]

    def unmapped(self, probe_ids):
        return [p for p in probe_ids if p not in self.pairs]

    @property
    def genes(self):
        return sorted(set(self.pairs.values()))

    def __len__(self):
        return len(self.pairs)


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomSetMoments:
    mu: float
    sigma2: float
    m: int
    G: int

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class EnrichmentResult:
    category_id: str
    description: str
    m: int
    xbar: float
    mu: float
    sigma: float
    z: float
    t: float
    p_nominal: float
    z_adjusted: float = None

    def with_adjusted(self, z_adjusted):
        return replace(self, z_adjusted=z_adjusted)


SELECTION_KINDS = ('fdr_bh', 'fdr_storey_fixed_lambda', 'score_threshold', 'top_n')


@dataclass(frozen=True)
class SelectionRule:
    kind: str
    level: float = None
    threshold: float = None
    n: int = None
    storey_lambda: float = 0.5

    def __post_init__(self):
        if self.kind not in SELECTION_KINDS:
            raise InputError(f'unknown selection rule: {self.kind}')
        if self.kind.startswith('fdr'):
            if self.level is None or not (0.0 < self.level < 1.0):
                raise InputError(f'FDR level must lie in (0, 1), got {self.level!r}')
            if not (0.0 < self.storey_lambda < 1.0):
                raise InputError(f'lambda must lie in (0, 1), got {self.storey_lambda!r}')
        elif self.kind == 'score_threshold':
            if self.threshold is None or not math.isfinite(self.threshold):
                raise InputError('score_threshold needs a finite threshold')
        elif self.n is None or self.n < 0:
            raise InputError('top_n needs a nonnegative n')


# ---------------------------------------------------------------------------
# Joint inference across categories
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class NullJointModel:
    category_ids: tuple
    sizes: np.ndarray
    universe_size: int
    correlation: np.ndarray
    factor: np.ndarray

    @property
    def k(self):
        return len(self.category_ids)

    @property
    def rank(self):
        return self.factor.shape[1]

    def __repr__(self):
        return f'<NullJointModel k={self.k} rank={self.rank} G={self.universe_size}>'


@dataclass(frozen=True, eq=False)
class MaxTResult:
    threshold: float
    category_ids: tuple
    t_values: np.ndarray
    decisions: np.ndarray
    p_adjusted: np.ndarray
    B: int
    seed: int
    alpha: float
    null_max: np.ndarray = field(repr=False, default=None)

    @property
    def significant(self):
        return [cid for cid, hit in zip(self.category_ids, self.decisions) if hit]


# ---------------------------------------------------------------------------
# Power analysis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PowerModel:
    pi: float = 0.2
    pi_c: float = 0.2
    delta: float = 1.0
    m: int = 20
    alpha: float = 0.05
    fdr_alpha: float = 0.05

    def __post_init__(self):
        if not (0.0 < self.pi < 1.0):
            raise InputError(f'pi must lie in (0, 1), got {self.pi!r}')
        if not (0.0 <= self.pi_c <= 1.0):
            raise InputError(f'pi_c must lie in [0, 1], got {self.pi_c!r}')
        if not (self.delta > 0.0 and math.isfinite(self.delta)):
            raise InputError(f'delta must be positive, got {self.delta!r}')
        if self.m < 1:
            raise InputError(f'category size must be >= 1, got {self.m!r}')
        for name in ('alpha', 'fdr_alpha'):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise InputError(f'{name} must lie in (0, 1), got {value!r}')

    @property
    def enrichment(self):
        return self.pi_c - self.pi

    def evolve(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True)
class SelectionCalibration:
    kappa: float
    delta: float
    k: float
    mu0: float
    mu1: float
    # Complements and log(mu1), kept exact for the deep tails
    nu0: float = None
    nu1: float = None
    log_mu1: float = None
