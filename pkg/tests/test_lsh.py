import math

import numpy as np
import pytest

from reusesim import DimensionMismatch, FeatureVector, LshIndex, LshParams


def collision_rate(theta, bits, builds, tables, d=8, seed0=0):
    """Per-table key collision frequency for two unit vectors at a given angle.

    Each table within a build has independent hyperplanes, so a build with
    ``tables`` tables contributes that many trials.
    """
    u = np.zeros(d)
    u[0] = 1.0
    w = np.zeros(d)
    w[0] = math.cos(theta)
    w[1] = math.sin(theta)
    hits = 0
    for b in range(builds):
        idx = LshIndex(
            LshParams(num_tables=tables, bits_per_table=bits, dimension=d, seed=seed0 + b)
        )
        ku = idx.signature(u).per_table_keys
        kw = idx.signature(w).per_table_keys
        hits += sum(a == b2 for a, b2 in zip(ku, kw))
    return hits / (builds * tables)


def test_build_deterministic():
    p = LshParams(num_tables=4, bits_per_table=6, dimension=16, seed=99)
    a, b = LshIndex(p), LshIndex(p)
    assert np.array_equal(a.hyperplanes, b.hyperplanes)


def test_build_seed_sensitivity():
    a = LshIndex(LshParams(num_tables=4, bits_per_table=6, dimension=16, seed=1))
    b = LshIndex(LshParams(num_tables=4, bits_per_table=6, dimension=16, seed=2))
    assert not np.array_equal(a.hyperplanes, b.hyperplanes)


def test_build_minimal_shape():
    idx = LshIndex(LshParams(num_tables=1, bits_per_table=1, dimension=2, seed=0))
    assert idx.hyperplanes.shape == (1, 1, 2)
    assert np.linalg.norm(idx.hyperplanes[0, 0]) == pytest.approx(1.0)


def test_params_validation():
    with pytest.raises(ValueError):
        LshParams(num_tables=0)
    with pytest.raises(ValueError):
        LshParams(bits_per_table=63)
    with pytest.raises(ValueError):
        LshParams(dimension=0)


def test_signature_deterministic():
    idx = LshIndex(LshParams(num_tables=3, bits_per_table=5, dimension=8, seed=7))
    rng = np.random.default_rng(0)
    for _ in range(20):
        v = rng.standard_normal(8)
        assert idx.signature(v) == idx.signature(v)


def test_signature_sign_symmetry():
    idx = LshIndex(LshParams(num_tables=1, bits_per_table=1, dimension=4, seed=3))
    h = idx.hyperplanes[0, 0]
    rng = np.random.default_rng(1)
    for _ in range(20):
        v = rng.standard_normal(4)
        if abs(float(h @ v)) < 1e-12:
            continue
        assert idx.signature(v) != idx.signature(-v)


def test_signature_dimension_mismatch():
    idx = LshIndex(LshParams(dimension=8))
    with pytest.raises(DimensionMismatch):
        idx.signature(FeatureVector((1.0, 2.0)))


def test_collision_probability_matches_law():
    # (1 - 0.1/pi)^8 = 0.772; >= 1e5 seeded per-table trials
    rate = collision_rate(0.1, bits=8, builds=100, tables=1000, seed0=500)
    assert rate == pytest.approx((1 - 0.1 / math.pi) ** 8, abs=0.02)


def test_collision_rate_monotone_in_angle():
    angles = [0.05, 0.2, 0.5, 1.0]
    rates = [collision_rate(a, bits=6, builds=20, tables=500, seed0=80) for a in angles]
    assert all(r1 >= r2 for r1, r2 in zip(rates, rates[1:]))


def _filled_index(n=50, d=16, seed=5):
    idx = LshIndex(LshParams(num_tables=4, bits_per_table=6, dimension=d, seed=seed))
    rng = np.random.default_rng(seed)
    vectors = rng.standard_normal((n, d))
    for i in range(n):
        idx.insert(i, vectors[i])
    return idx, vectors


def test_insert_then_query_self():
    idx, vectors = _filled_index()
    for i in (0, 17, 42):
        results = idx.query(vectors[i], max_candidates=4)
        assert results[0] == (i, 0.0)


def test_insert_counts_bucket_references():
    idx, _ = _filled_index(n=50)
    assert sum(idx.bucket_sizes()) == 4 * 50
    assert len(idx) == 50


def test_identical_vectors_share_buckets():
    idx = LshIndex(LshParams(num_tables=6, bits_per_table=8, dimension=8, seed=11))
    v = np.arange(8, dtype=float)
    idx.insert(1, v)
    idx.insert(2, v.copy())
    assert idx.candidate_ids(v) == frozenset({1, 2})


def test_insert_duplicate_id_rejected():
    idx = LshIndex(LshParams(dimension=4))
    idx.insert(0, [1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ValueError):
        idx.insert(0, [0.0, 1.0, 0.0, 0.0])


def test_query_empty_index():
    idx = LshIndex(LshParams(dimension=4))
    assert idx.query([1.0, 0.0, 0.0, 0.0]) == []


def test_query_near_duplicates_rank_first():
    # 1000 random vectors plus 10 near-duplicates of the query; a brute-force
    # scan is the oracle for the expected front of the ranking.
    d, sigma = 32, 0.01
    rng = np.random.default_rng(123)
    idx = LshIndex(LshParams(num_tables=8, bits_per_table=8, dimension=d, seed=321))
    g = rng.standard_normal((1000, d))
    randoms = 10.0 * g / np.linalg.norm(g, axis=1, keepdims=True)
    q = 10.0 * rng.standard_normal(d)
    q /= np.linalg.norm(q) / 10.0
    near = q + sigma * rng.standard_normal((10, d))
    for i in range(1000):
        idx.insert(i, randoms[i])
    for j in range(10):
        idx.insert(1000 + j, near[j])
    results = idx.query(q, max_candidates=16)
    got_first = [i for i, _ in results[:10]]
    dists = [(float(np.linalg.norm(randoms[i] - q)), i) for i in range(1000)]
    dists += [(float(np.linalg.norm(near[j] - q)), 1000 + j) for j in range(10)]
    expect_first = [i for _, i in sorted(dists)[:10]]
    assert got_first == expect_first
    assert set(got_first) == set(range(1000, 1010))


def test_query_orders_by_distance_then_id():
    idx = LshIndex(LshParams(num_tables=2, bits_per_table=2, dimension=2, seed=9))
    idx.insert(5, [1.0, 1.0])
    idx.insert(3, [1.0, 1.0])
    results = idx.query([1.0, 1.0], max_candidates=10)
    assert results == [(3, 0.0), (5, 0.0)]


def test_remove():
    idx, vectors = _filled_index(n=10)
    idx.remove(3)
    assert 3 not in idx
    assert all(3 not in {i for i, _ in idx.query(vectors[k], 10)} for k in range(10))
    for i in range(10):
        if i != 3:
            idx.remove(i)
    assert len(idx) == 0
    assert sum(idx.bucket_sizes()) == 0


def test_remove_unknown_id():
    idx = LshIndex(LshParams(dimension=4))
    with pytest.raises(KeyError):
        idx.remove(12)


def test_candidate_set_is_exact_bucket_union():
    # exhaustive recall oracle on <= 500 entries: every entry sharing at
    # least one per-table key with the query is a candidate, nothing else.
    d = 12
    idx = LshIndex(LshParams(num_tables=5, bits_per_table=4, dimension=d, seed=77))
    rng = np.random.default_rng(77)
    vectors = rng.standard_normal((500, d))
    for i in range(500):
        idx.insert(i, vectors[i])
    for qi in range(0, 500, 50):
        q = vectors[qi]
        kq = idx.signature(q).per_table_keys
        expected = {
            i
            for i in range(500)
            if any(a == b for a, b in zip(idx.signature(vectors[i]).per_table_keys, kq))
        }
        assert idx.candidate_ids(q) == expected


def test_candidate_scan_scaling_reported():
    # report the measured growth exponent of candidate-scan work on clustered
    # data (many small clusters); no fixed bound is asserted.
    d = 16
    rng = np.random.default_rng(2024)
    sizes = [500, 2000, 8000]
    means = []
    for n in sizes:
        idx = LshIndex(
            LshParams(num_tables=8, bits_per_table=12, dimension=d, seed=2024)
        )
        n_clusters = n // 10
        g = rng.standard_normal((n_clusters, d))
        bases = 10.0 * g / np.linalg.norm(g, axis=1, keepdims=True)
        members = rng.integers(0, n_clusters, size=n)
        pts = bases[members] + 0.05 * rng.standard_normal((n, d))
        for i in range(n):
            idx.insert(i, pts[i])
        probes = bases[rng.integers(0, n_clusters, size=100)]
        means.append(
            sum(len(idx.candidate_ids(p)) for p in probes) / 100.0
        )
    exponent = math.log(means[-1] / means[0]) / math.log(sizes[-1] / sizes[0])
    print(f"candidate-scan scaling exponent ~= {exponent:.3f} (means {means})")
    assert math.isfinite(exponent)
