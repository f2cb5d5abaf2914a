import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dmelodies import metrics


def brute_mi(x, y):
    n = len(x)
    total = 0.0
    for a in set(x):
        for b in set(y):
            pab = sum(1 for u, v in zip(x, y) if u == a and v == b) / n
            if pab:
                pa = sum(1 for u in x if u == a) / n
                pb = sum(1 for v in y if v == b) / n
                total += pab * math.log(pab / (pa * pb))
    return total


def brute_entropy(y):
    n = len(y)
    return -sum((y.count(v) / n) * math.log(y.count(v) / n) for v in set(y))


def test_discretize_examples():
    z = np.array([[0.0, 3.0], [1.0, 3.0]])
    d = metrics.discretize(z, 2)
    assert d[:, 0].tolist() == [0, 1]
    assert d[:, 1].tolist() == [0, 0]


def test_discretize_affine_invariant(rng):
    z = rng.normal(size=(500, 4))
    d = metrics.discretize(z, 20)
    assert np.array_equal(d, metrics.discretize(3.0 * z + 7.0, 20))
    assert d.min() == 0 and d.max() == 19


def test_discretize_nonlinear_moves_bins(rng):
    z = rng.normal(size=(500, 1))
    assert not np.array_equal(metrics.discretize(z, 20), metrics.discretize(np.exp(z), 20))


def test_discretize_errors():
    with pytest.raises(ValueError):
        metrics.discretize(np.array([[np.nan, 1.0]]), 5)
    with pytest.raises(ValueError):
        metrics.discretize(np.zeros((3, 2)), 1)


def test_mi_examples():
    x = np.repeat(np.arange(4), 25)
    assert metrics.mutual_info(x, x) == pytest.approx(math.log(4), abs=1e-12)
    a = np.repeat([0, 1], 4)
    b = np.tile([0, 1, 2, 3], 2)
    assert metrics.mutual_info(a, b) == pytest.approx(0.0, abs=1e-15)


small_tables = st.tuples(st.integers(1, 8), st.integers(1, 8)).filter(lambda s: s[0] * s[1] <= 8).flatmap(
    lambda s: st.lists(st.tuples(st.integers(0, s[0] - 1), st.integers(0, s[1] - 1)), min_size=2, max_size=40))


@settings(max_examples=200)
@given(small_tables)
def test_mi_matches_brute_force(pairs):
    x, y = [list(c) for c in zip(*pairs)]
    assert metrics.mutual_info(x, y) == pytest.approx(brute_mi(x, y), abs=1e-12)


def test_mi_small_tables_exact(rng):
    # every joint table shape with at most 8 cells
    for nx, ny in [(a, b) for a in range(1, 9) for b in range(1, 9) if a * b <= 8]:
        x = rng.integers(0, nx, 50).tolist()
        y = rng.integers(0, ny, 50).tolist()
        assert abs(metrics.mutual_info(x, y) - brute_mi(x, y)) <= 1e-12


def test_mi_length_mismatch():
    with pytest.raises(ValueError):
        metrics.mutual_info([0, 1], [0, 1, 1])


def test_entropy():
    assert metrics.entropy(np.repeat(np.arange(12), 3)) == pytest.approx(math.log(12), abs=1e-12)
    assert metrics.entropy([5, 5, 5]) == 0.0
    y = [0, 0, 1, 2, 2, 2, 3]
    assert metrics.entropy(y) == pytest.approx(brute_entropy(y), abs=1e-12)


def _perfect(n, k_sizes, rng, extra=0):
    v = np.column_stack([rng.integers(0, s, n) for s in k_sizes])
    z = v + rng.normal(0, 0.01, v.shape)
    if extra:
        z = np.column_stack([z, rng.normal(size=(n, extra))])
    return z, v


def test_mig_perfect(rng):
    z, v = _perfect(10_000, (12, 3, 2), rng, extra=2)
    per, mean = metrics.mig(z, v)
    assert np.all(per > 0.95)
    assert mean == pytest.approx(per.mean())


def test_mig_independent(rng):
    v = np.column_stack([rng.integers(0, s, 10_000) for s in (12, 3, 2)])
    z = rng.normal(size=(10_000, 5))
    _, mean = metrics.mig(z, v)
    # permutation baseline: same codes with factor rows shuffled
    _, shuffled = metrics.mig(z, v[rng.permutation(len(v))])
    assert mean < 0.05 and shuffled < 0.05


def test_mig_duplicated_dimension(rng):
    v = rng.integers(0, 4, (2000, 1))
    z = np.column_stack([v[:, 0], v[:, 0], rng.normal(size=2000)])
    per, _ = metrics.mig(z, v)
    assert per[0] == pytest.approx(0.0, abs=1e-12)


def test_mig_zero_entropy_factor(rng):
    with pytest.raises(ValueError):
        metrics.mig(rng.normal(size=(10, 2)), np.zeros((10, 1), int))


def test_modularity_examples():
    m = np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.0]])
    assert metrics.modularity_from_mi(m).tolist() == [1.0, 1.0]
    assert metrics.modularity_from_mi(np.full((1, 4), 0.3)).tolist() == pytest.approx([0.0])
    assert metrics.modularity_from_mi(np.zeros((1, 3))).tolist() == [0.0]


def test_modularity_matches_direct_formula(rng):
    z = rng.normal(size=(400, 3))
    v = np.column_stack([rng.integers(0, 3, 400), (z[:, 0] > 0).astype(int), rng.integers(0, 2, 400)])
    per, mean = metrics.modularity(z, v, bins=6)
    d = metrics.discretize(z, 6)
    k = v.shape[1]
    for i in range(3):
        mi = [brute_mi(d[:, i].tolist(), v[:, j].tolist()) for j in range(k)]
        peak = max(mi)
        others = sorted(mi)[:-1]
        expected = 1 - sum(m * m for m in others) / (peak ** 2 * (k - 1))
        assert per[i] == pytest.approx(expected, abs=1e-12)
    assert mean == pytest.approx(per.mean())


def test_modularity_one_factor_each(rng):
    v = np.column_stack([rng.integers(0, 4, 3000), rng.integers(0, 3, 3000)])
    # dimension i is a deterministic function of factor i only, each factor tracked once
    z = v.astype(float)
    per, _ = metrics.modularity(z, v)
    assert np.all(per > 0.99)


def test_sap_perfect(rng):
    z, v = _perfect(5000, (4, 2), rng, extra=2)
    s = metrics.sap_score_matrix(z, v, seed=0)
    assert s[0, 0] == 1.0 and s[1, 1] == 1.0
    per, _ = metrics.sap(z, v, seed=0)
    chance_next = np.sort(s, axis=0)[-2]
    assert per == pytest.approx(1.0 - chance_next)
    assert per[0] > 0.6


def test_sap_independent(rng):
    v = np.column_stack([rng.integers(0, s, 10_000) for s in (12, 2)])
    _, mean = metrics.sap(rng.normal(size=(10_000, 6)), v)
    assert mean < 0.05


def test_sap_tied_dims(rng):
    v = rng.integers(0, 3, (3000, 1))
    z = np.column_stack([v[:, 0] * 5.0, v[:, 0] * 5.0, rng.normal(size=3000)])
    per, _ = metrics.sap(z, v)
    assert per[0] == pytest.approx(0.0, abs=1e-12)


def test_sap_missing_class():
    z = np.column_stack([np.arange(10.0), np.arange(10.0)])
    v = np.zeros((10, 1), int)
    v[3] = 1  # a second class with a single sample
    seed = next(s for s in range(100) if 3 not in metrics.split_indices(10, 0.2, s)[0])
    with pytest.raises(ValueError, match="absent"):
        metrics.sap(z, v, 0.2, seed)


def test_sap_bad_split(rng):
    with pytest.raises(ValueError):
        metrics.sap(rng.normal(size=(10, 2)), rng.integers(0, 2, (10, 1)), split=1.0)


def _case(rng):
    v = np.column_stack([rng.integers(0, s, 1500) for s in (5, 3, 2)])
    z = np.column_stack([v[:, 0] + rng.normal(0, 0.5, 1500), rng.normal(size=1500), v[:, 2] * 0.3 + v[:, 1],
                         rng.normal(size=1500)])
    return z, v


def test_scores_in_unit_interval(rng):
    for _ in range(3):
        z, v = _case(rng)
        r = metrics.evaluate(z, v)
        for value in [r.mig, r.modularity, r.sap] + r.mig_per_factor + r.modularity_per_dim + r.sap_per_factor:
            assert 0.0 <= value <= 1.0
        assert r.mig == pytest.approx(np.mean(r.mig_per_factor))
        assert r.sap == pytest.approx(np.mean(r.sap_per_factor))
        assert r.config == {"bins": 20, "split": 0.2, "seed": 0, "n": 1500, "latent_dim": 4, "num_factors": 3}


def test_dimension_permutation_invariance(rng):
    z, v = _case(rng)
    base = metrics.evaluate(z, v)
    perm = rng.permutation(z.shape[1])
    other = metrics.evaluate(z[:, perm], v)
    assert other.mig == pytest.approx(base.mig, abs=1e-12)
    assert other.modularity == pytest.approx(base.modularity, abs=1e-12)
    assert other.sap == pytest.approx(base.sap, abs=1e-12)


def test_row_permutation_invariance(rng):
    z, v = _case(rng)
    base = metrics.evaluate(z, v, seed=3)
    perm = rng.permutation(len(z))
    other = metrics.evaluate(z[perm], v[perm], seed=11)
    assert other.mig == pytest.approx(base.mig, abs=1e-12)
    assert other.modularity == pytest.approx(base.modularity, abs=1e-12)
    assert abs(other.sap - base.sap) <= 0.02


def test_affine_transform_invariance(rng):
    z, v = _case(rng)
    a = metrics.evaluate(z, v)
    b = metrics.evaluate(z * np.array([2.0, 0.5, 10.0, 3.0]) - 4.0, v)
    assert b.mig == pytest.approx(a.mig, abs=1e-12)
    assert b.modularity == pytest.approx(a.modularity, abs=1e-12)


def test_misaligned_inputs(rng):
    with pytest.raises(ValueError):
        metrics.evaluate(rng.normal(size=(10, 3)), rng.integers(0, 2, (9, 2)))
