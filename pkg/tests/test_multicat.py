import math

import numpy as np
import pytest

from randomset.catalog import overlap
from randomset.errors import DegenerateNullError, InputError
from randomset.multicat import (
    build_null_model, max_t, overlap_correlation, permutation_joint_oracle, simulate_null,
)
from randomset.scoring import score_catalog

from conftest import make_catalog, make_table

EPS = np.finfo(float).eps


def test_overlap_correlation_values():
    assert overlap_correlation(7, 7, 7, 30) == 1.0
    assert overlap_correlation(2, 2, 0, 10) == -0.25
    assert overlap_correlation(100, 100, 50, 10 ** 6) == pytest.approx(0.5, abs=1e-3)


@pytest.mark.parametrize('args', [(3, 4, 5, 20), (3, 20, 1, 20), (0, 4, 0, 20), (2.5, 4, 1, 20)])
def test_overlap_correlation_preconditions(args):
    with pytest.raises(InputError):
        overlap_correlation(*args)


@pytest.fixture
def chain():
    """Three categories on G = 20 overlapping like links of a chain."""
    table = make_table(np.linspace(-1.0, 1.0, 20))
    return make_catalog(table, {
        'C1': [f'g{i}' for i in range(0, 6)],
        'C2': [f'g{i}' for i in range(4, 11)],
        'C3': [f'g{i}' for i in range(9, 14)],
    })


def test_chain_model_matches_pairwise_formula(chain):
    model = build_null_model(chain)
    G = chain.table.universe_size
    for i, a in enumerate(chain):
        for j, b in enumerate(chain):
            expected = overlap_correlation(a.size, b.size, overlap(a, b), G)
            # float arithmetic against a correctly rounded root: a few ulps apart
            assert abs(model.correlation[i, j] - expected) <= 4 * EPS * abs(expected)
    assert np.all(np.diag(model.correlation) == 1.0)
    assert np.abs(model.factor @ model.factor.T - model.correlation).max() <= 1e-8


def test_disjoint_categories_in_large_universe_are_nearly_independent():
    table = make_table(np.arange(20000, dtype=float))
    catalog = make_catalog(table, {'A': ['g0', 'g1', 'g2'], 'B': ['g3', 'g4', 'g5']})
    R = build_null_model(catalog).correlation
    assert abs(R[0, 1]) < 1e-3


def test_duplicate_categories_share_a_factor_row():
    table = make_table(np.arange(30, dtype=float))
    members = [f'g{i}' for i in range(8)]
    catalog = make_catalog(table, {
        'DUP1': members, 'DUP2': members, 'OTHER': [f'g{i}' for i in range(5, 15)],
    })
    model = build_null_model(catalog)
    assert model.correlation[0, 1] == 1.0
    assert model.rank == 2
    for block in simulate_null(model, 500, seed=3):
        assert np.array_equal(block[:, 0], block[:, 1])


def test_whole_universe_category_is_degenerate():
    table = make_table(np.arange(6, dtype=float))
    catalog = make_catalog(table, {'ALL': table.ids, 'S': ['g0', 'g1']})
    with pytest.raises(DegenerateNullError):
        build_null_model(catalog)


def test_single_category_draws_are_standard_normal():
    table = make_table(np.arange(50, dtype=float))
    model = build_null_model(make_catalog(table, {'S': ['g1', 'g2', 'g3']}))
    B = 100_000
    z = np.concatenate(list(simulate_null(model, B, seed=11)))[:, 0]
    assert z.size == B
    assert abs(z.mean()) <= 4 / math.sqrt(B)
    assert z.var() == pytest.approx(1.0, rel=0.05)


def test_simulated_correlations_converge(chain):
    model = build_null_model(chain)
    z = np.concatenate(list(simulate_null(model, 100_000, seed=5)))
    assert np.abs(np.corrcoef(z, rowvar=False) - model.correlation).max() <= 0.02


def test_simulation_is_fixed_by_seed(chain):
    model = build_null_model(chain)
    first = np.concatenate(list(simulate_null(model, 2500, seed=9)))
    again = np.concatenate(list(simulate_null(model, 2500, seed=9)))
    other = np.concatenate(list(simulate_null(model, 2500, seed=10)))
    assert np.array_equal(first, again)
    assert not np.array_equal(first, other)


def test_max_t_threshold_for_one_unit_category():
    table = make_table(np.random.default_rng(1).standard_normal(100))
    catalog = make_catalog(table, {'ONE': ['g0']})
    results = score_catalog(catalog, table)
    outcome = max_t(results, build_null_model(catalog), alpha=0.05, B=100_000, seed=2)
    assert outcome.threshold == pytest.approx(1.6449, abs=0.02)
    assert outcome.decisions.tolist() == [results[0].t > outcome.threshold]


def test_max_t_alpha_one_rejects_every_category(chain):
    results = score_catalog(chain, chain.table)
    outcome = max_t(results, build_null_model(chain), alpha=1.0, B=1000, seed=0)
    assert outcome.threshold == -math.inf
    assert outcome.decisions.all()


def test_max_t_decisions_and_adjusted_p(chain):
    results = score_catalog(chain, chain.table)
    model = build_null_model(chain)
    outcome = max_t(results, model, alpha=0.1, B=2000, seed=4)
    t = np.array([r.t for r in results])
    assert outcome.decisions.tolist() == (t > outcome.threshold).tolist()
    for value, p in zip(t, outcome.p_adjusted):
        assert p == (np.count_nonzero(outcome.null_max >= value) + 1) / 2001
    assert outcome.significant == [r.category_id for r in results if r.t > outcome.threshold]


def test_max_t_preconditions(chain):
    results = score_catalog(chain, chain.table)
    model = build_null_model(chain)
    with pytest.raises(InputError):
        max_t(results, model, alpha=0.05, B=99, seed=0)
    with pytest.raises(InputError):
        max_t(results[::-1], model, alpha=0.05, B=1000, seed=0)
    with pytest.raises(InputError):
        max_t(results, model, alpha=0.05, B=1000, seed=-1)


def test_max_t_independent_of_worker_count(chain):
    results = score_catalog(chain, chain.table)
    model = build_null_model(chain)
    serial = max_t(results, model, alpha=0.05, B=5000, seed=8)
    threaded = max_t(results, model, alpha=0.05, B=5000, seed=8, workers=4)
    assert serial.threshold == threaded.threshold
    assert np.array_equal(serial.null_max, threaded.null_max)


def test_max_t_threshold_ignores_catalog_order():
    table = make_table(np.random.default_rng(3).standard_normal(40))
    sets = {
        'A': [f'g{i}' for i in range(0, 10)],
        'B': [f'g{i}' for i in range(5, 15)],
        'C': [f'g{i}' for i in range(12, 24)],
    }
    forward = make_catalog(table, sets)
    backward = make_catalog(table, dict(reversed(list(sets.items()))))
    thresholds = []
    for catalog in (forward, backward):
        model = build_null_model(catalog)
        by_id = {r.category_id: r for r in score_catalog(catalog, table)}
        results = [by_id[cid] for cid in model.category_ids]
        thresholds.append(max_t(results, model, alpha=0.05, B=3000, seed=6).threshold)
    assert thresholds[0] == pytest.approx(thresholds[1], abs=1e-12)


def test_permutation_oracle_matches_exact_correlation_exhaustively():
    table = make_table([0.3, -1.2, 4.0, 0.0, 2.2, -0.7])
    catalog = make_catalog(table, {'A': ['g0', 'g1', 'g2'], 'B': ['g2', 'g3']})
    draws = permutation_joint_oracle(table, catalog, B=0, seed=0, exhaustive=True)
    assert draws.shape == (720, 2)
    assert np.abs(draws.mean(axis=0)).max() <= 1e-10
    assert draws.var(axis=0) == pytest.approx([1.0, 1.0], abs=1e-10)
    empirical = np.corrcoef(draws, rowvar=False)[0, 1]
    assert empirical == pytest.approx(overlap_correlation(3, 2, 1, 6), abs=1e-10)


def test_permutation_oracle_matches_exact_correlation_heavy_tailed():
    rng = np.random.default_rng(12)
    G = 200
    for _ in range(5):
        table = make_table(rng.standard_t(2, size=G))
        first = rng.choice(G, size=int(rng.integers(10, 40)), replace=False)
        shared = rng.choice(first, size=int(rng.integers(1, first.size)), replace=False)
        rest = rng.choice(np.setdiff1d(np.arange(G), first), size=15, replace=False)
        catalog = make_catalog(table, {
            'A': [f'g{i}' for i in first],
            'B': [f'g{i}' for i in np.concatenate([shared, rest])],
        })
        a, b = catalog.categories
        draws = permutation_joint_oracle(table, catalog, B=100_000, seed=1)
        expected = overlap_correlation(a.size, b.size, overlap(a, b), G)
        assert np.corrcoef(draws, rowvar=False)[0, 1] == pytest.approx(expected, abs=0.015)


def test_sampled_oracle_draws_are_standardized():
    rng = np.random.default_rng(17)
    B = 20_000
    table = make_table(rng.standard_t(5, size=300))
    catalog = make_catalog(table, {
        'A': [f'g{i}' for i in range(0, 12)],
        'B': [f'g{i}' for i in range(6, 36)],
        'C': [f'g{i}' for i in range(100, 180)],
    })
    draws = permutation_joint_oracle(table, catalog, B=B, seed=9)
    assert draws.shape == (B, 3)
    assert np.abs(draws.mean(axis=0)).max() <= 4 / math.sqrt(B)
    assert draws.var(axis=0) == pytest.approx([1.0, 1.0, 1.0], rel=0.05)


def test_exhaustive_oracle_is_limited_to_small_universes():
    table = make_table(np.arange(9, dtype=float))
    catalog = make_catalog(table, {'A': ['g0', 'g1']})
    with pytest.raises(InputError):
        permutation_joint_oracle(table, catalog, B=0, seed=0, exhaustive=True)


def test_max_t_controls_family_wise_error_under_the_null():
    rng = np.random.default_rng(2024)
    G, k = 2000, 50
    genes = [f'g{i}' for i in range(G)]
    sets = {}
    for j in range(k):
        start = int(rng.integers(0, G - 120))
        sets[f'S{j:02d}'] = genes[start:start + int(rng.integers(10, 120))]
    base = make_table(rng.standard_normal(G))
    catalog = make_catalog(base, sets)
    model = build_null_model(catalog)

    errors, replicates = 0, 1000
    for replicate in range(replicates):
        table = base.with_scores(rng.permutation(base.scores))
        by_id = {r.category_id: r for r in score_catalog(catalog, table)}
        results = [by_id[cid] for cid in model.category_ids]
        outcome = max_t(results, model, alpha=0.05, B=1000, seed=replicate)
        errors += bool(outcome.decisions.any())
    assert 0.03 <= errors / replicates <= 0.07
