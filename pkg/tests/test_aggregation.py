import itertools

import numpy as np
import pytest

from cesim.aggregation import (
    CE,
    CWTM,
    AggregationOutcome,
    Mean,
    MultiKrum,
    aggregate,
    ce_filter,
    cwtm,
    mean_rule,
    multi_krum,
)
from cesim.errors import ConfigurationError


def _reports(vectors):
    return [(i, np.asarray(v, dtype=np.float64)) for i, v in enumerate(vectors)]


# ---------------------------------------------------------------- CE filter


def test_ce_one_dim_worked_example():
    x_bar = np.array([0.0])
    out = ce_filter(x_bar, _reports([[1.0], [2.0], [-1.0], [10.0]]), f=1)
    assert out.eliminated_ids == [3]
    assert out.kept_ids == [0, 1, 2]
    assert out.next_model[0] == pytest.approx(2.0 / 3.0)


def test_ce_f_zero_is_mean(rng):
    reports = _reports(rng.standard_normal((5, 3)))
    out = ce_filter(np.zeros(3), reports, f=0)
    assert np.allclose(out.next_model, np.mean([v for _, v in reports], axis=0))
    assert out.eliminated_ids == []


def test_ce_identical_reports_drop_largest_ids():
    reports = _reports([[1.0, 2.0]] * 6)
    out = ce_filter(np.zeros(2), reports, f=2)
    assert out.eliminated_ids == [4, 5]
    assert np.allclose(out.next_model, [1.0, 2.0])


def test_ce_keeps_exactly_n_minus_f(rng):
    for f in range(4):
        reports = _reports(rng.standard_normal((9, 4)))
        out = ce_filter(rng.standard_normal(4), reports, f)
        assert len(out.kept_ids) == 9 - f
        assert len(out.eliminated_ids) == f
        assert sorted(out.kept_ids + out.eliminated_ids) == list(range(9))


def test_ce_translation_equivariance(rng):
    reports = _reports(rng.standard_normal((7, 3)))
    x_bar = rng.standard_normal(3)
    shift = rng.standard_normal(3)
    out = ce_filter(x_bar, reports, 2)
    shifted = ce_filter(x_bar + shift, [(i, v + shift) for i, v in reports], 2)
    assert np.allclose(shifted.next_model, out.next_model + shift, atol=1e-12)
    assert shifted.kept_ids == out.kept_ids


def test_ce_permutation_invariant(rng):
    vecs = rng.standard_normal((6, 2))
    x_bar = rng.standard_normal(2)
    reports = [(i, vecs[i]) for i in range(6)]
    out = ce_filter(x_bar, reports, 2)
    shuffled = ce_filter(x_bar, reports[::-1], 2)
    assert shuffled.kept_ids == out.kept_ids
    assert np.array_equal(shuffled.next_model, out.next_model)


def test_ce_output_in_kept_hull_one_dim(rng):
    for _ in range(20):
        vals = rng.standard_normal(6)
        out = ce_filter(np.zeros(1), _reports(vals.reshape(-1, 1)), 2)
        kept_vals = vals[out.kept_ids]
        assert kept_vals.min() - 1e-12 <= out.next_model[0] <= kept_vals.max() + 1e-12


def test_ce_requires_reports_beyond_f():
    with pytest.raises(ConfigurationError):
        ce_filter(np.zeros(1), _reports([[1.0], [2.0]]), f=2)


def brute_force_ce(x_bar, reports, f):
    """Keep the N-f reports whose distance profile is smallest, preferring
    low ids on exact ties, by exhaustive subset search."""
    n = len(reports)
    dists = {i: float(np.linalg.norm(v - x_bar)) for i, v in reports}
    best = min(
        itertools.combinations(sorted(dists), n - f),
        key=lambda kept: (sum(dists[i] for i in kept), kept),
    )
    return sorted(best)


# -------------------------------------------------------------- multi-KRUM


def brute_force_krum_scores(vectors, f):
    n = len(vectors)
    scores = []
    for j in range(n):
        d = sorted(
            float(np.sum((vectors[j] - vectors[k]) ** 2)) for k in range(n) if k != j
        )
        scores.append(sum(d[: n - f - 2]))
    return scores


def test_krum_one_dim_exhaustive_scores():
    vals = [0.0, 0.1, 0.2, 0.3, 5.0]
    reports = _reports([[v] for v in vals])
    out = multi_krum(reports, f=1, m_select=1)
    scores = brute_force_krum_scores([np.array([v]) for v in vals], f=1)
    assert out.kept_ids == [int(np.argmin(scores))]


def test_krum_identical_reports_keep_lowest_ids():
    out = multi_krum(_reports([[3.0]] * 7, ), f=2, m_select=3)
    assert out.kept_ids == [0, 1, 2]


def test_krum_translation_invariant_selection(rng):
    vecs = rng.standard_normal((8, 3))
    shift = rng.standard_normal(3)
    a = multi_krum(_reports(vecs), f=2, m_select=4)
    b = multi_krum(_reports(vecs + shift), f=2, m_select=4)
    assert a.kept_ids == b.kept_ids


def test_krum_excludes_far_outlier(rng):
    for _ in range(50):
        vecs = list(rng.standard_normal((6, 2)))
        vecs.append(np.full(2, 1e6))
        out = multi_krum(_reports(vecs), f=1, m_select=5)
        assert 6 not in out.kept_ids


def test_krum_preconditions():
    reports = _reports(np.zeros((6, 1)))
    with pytest.raises(ConfigurationError):
        multi_krum(reports, f=2, m_select=1)  # needs N >= 2f+3
    with pytest.raises(ConfigurationError):
        multi_krum(reports, f=1, m_select=6)  # m_select > N-f


# -------------------------------------------------------------------- CWTM


def test_cwtm_one_dim_worked_example():
    out = cwtm(_reports([[1.0], [2.0], [3.0], [100.0]]), f=1)
    assert out.next_model[0] == pytest.approx(2.5)
    assert out.eliminated_ids == []


def test_cwtm_identical_reports():
    out = cwtm(_reports([[4.0, -1.0]] * 5), f=2)
    assert np.allclose(out.next_model, [4.0, -1.0])


def test_cwtm_f_zero_is_mean(rng):
    vecs = rng.standard_normal((5, 3))
    out = cwtm(_reports(vecs), f=0)
    assert np.allclose(out.next_model, vecs.mean(axis=0))


def brute_force_cwtm(vectors, f):
    arr = np.stack(vectors)
    cols = []
    for c in range(arr.shape[1]):
        vals = sorted(arr[:, c])
        cols.append(np.mean(vals[f : len(vals) - f]))
    return np.array(cols)


def test_cwtm_matches_per_coordinate_oracle(rng):
    for _ in range(30):
        vecs = list(rng.standard_normal((7, 4)))
        out = cwtm(_reports(vecs), f=2)
        assert np.allclose(out.next_model, brute_force_cwtm(vecs, 2), atol=1e-12)


def test_cwtm_precondition():
    with pytest.raises(ConfigurationError):
        cwtm(_reports([[1.0], [2.0]]), f=1)


# ------------------------------------------------------- mean and dispatch


def test_mean_rule(rng):
    vecs = rng.standard_normal((4, 3))
    out = mean_rule(_reports(vecs))
    assert np.allclose(out.next_model, vecs.mean(axis=0))
    assert out.kept_ids == [0, 1, 2, 3] and out.eliminated_ids == []


def test_aggregate_dispatch(rng):
    vecs = rng.standard_normal((7, 2))
    reports = _reports(vecs)
    x_bar = rng.standard_normal(2)
    assert np.array_equal(
        aggregate(CE(2), x_bar, reports).next_model, ce_filter(x_bar, reports, 2).next_model
    )
    assert np.array_equal(
        aggregate(MultiKrum(1, 5), x_bar, reports).next_model,
        multi_krum(reports, 1, 5).next_model,
    )
    assert np.array_equal(
        aggregate(CWTM(2), x_bar, reports).next_model, cwtm(reports, 2).next_model
    )
    assert np.array_equal(
        aggregate(Mean(), x_bar, reports).next_model, mean_rule(reports).next_model
    )


def test_randomized_oracle_equivalence(rng):
    """CE, CWTM and multi-KRUM agree with their brute-force oracles."""
    for _ in range(100):
        n = int(rng.integers(5, 9))
        f = int(rng.integers(0, 3))
        vecs = list(rng.standard_normal((n, 3)))
        reports = _reports(vecs)
        x_bar = rng.standard_normal(3)

        out = ce_filter(x_bar, reports, f)
        assert out.kept_ids == brute_force_ce(x_bar, reports, f)

        if n > 2 * f:
            assert np.allclose(
                cwtm(reports, f).next_model, brute_force_cwtm(vecs, f), atol=1e-12
            )

        if n >= 2 * f + 3:
            scores = brute_force_krum_scores(vecs, f)
            m = n - f
            expected = sorted(sorted(range(n), key=lambda j: (scores[j], j))[:m])
            assert multi_krum(reports, f, m).kept_ids == expected
