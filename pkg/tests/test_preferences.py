import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from electsim import InvalidParameterError
from electsim.population import CommunityShares, Electorate, assign_communities, assign_districts
from electsim.preferences import (
    AffinityMatrix,
    ValuationMatrix,
    apply_local_influence,
    district_means,
    good_mass,
    rank_from_valuations,
    sample_affinity_matrix,
    sample_kappa,
    sample_party_variances,
    sample_valuations,
    write_valuations_csv,
)

from oracles import accepted_column_marginals

THETA = CommunityShares([0.5, 0.3, 0.2])
PHI = AffinityMatrix([[1, 0, -1], [0, 0, 0], [-1, 0, 1]])


def rng(seed=0):
    return np.random.default_rng(seed)


def electorate(n=60, s=6, c=3, alpha=0.5, seed=0):
    g = rng(seed)
    comm = g.integers(0, c, n)
    return Electorate(s, comm, assign_districts(comm, s, alpha, g), c)


class TestAffinity:
    def test_first_column_of_fixed_setting_accepted(self):
        assert good_mass([1, 0, -1], THETA) == pytest.approx(0.5)
        assert PHI.satisfies_mass_limit(THETA)

    def test_heavy_column_rejected(self):
        assert good_mass([1, 1, 0], THETA) == pytest.approx(0.8)
        assert not AffinityMatrix([[1], [1], [0]]).satisfies_mass_limit(THETA)

    def test_marginals_match_enumeration(self):
        shares = CommunityShares([0.3, 0.25, 0.2, 0.12, 0.08, 0.05])
        oracle, n_ok = accepted_column_marginals(shares.shares.tolist())
        assert 0 < n_ok < 729
        g = rng(8)
        cols = np.concatenate([sample_affinity_matrix(6, 4, shares, g).phi for _ in range(2500)], axis=1)
        assert cols.shape == (6, 10_000)
        for c in range(6):
            for v in (-1, 0, 1):
                assert np.mean(cols[c] == v) == pytest.approx(oracle[c][v], abs=0.02)

    @given(st.integers(1, 10), st.integers(1, 6), st.integers(0, 2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_constraint_always_holds(self, c, k, seed):
        g = rng(seed)
        shares = CommunityShares(g.dirichlet(np.ones(c)))
        phi = sample_affinity_matrix(c, k, shares, g)
        assert phi.phi.shape == (c, k)
        assert phi.satisfies_mass_limit(shares)

    def test_rejects_bad_entries(self):
        with pytest.raises(InvalidParameterError):
            AffinityMatrix([[2, 0]])

    def test_cap_raises(self, monkeypatch):
        import electsim.preferences as pm

        monkeypatch.setattr(pm, "GOOD_MASS_LIMIT", -1.0)
        with pytest.raises(RuntimeError):
            sample_affinity_matrix(2, 1, CommunityShares([0.5, 0.5]), rng())


class TestVariances:
    def test_fixed_override(self):
        assert sample_party_variances(3, 2.0, 1.0, rng(), fixed=[2, 1, 2]).tolist() == [2.0, 1.0, 2.0]

    def test_exponential_mean(self):
        g = rng(1)
        draws = np.concatenate([sample_party_variances(1, 1.0, 1.0, g) for _ in range(100_000)])
        assert draws.mean() == pytest.approx(1.0, abs=0.02)

    def test_deterministic(self):
        assert sample_party_variances(4, 2, 1, rng(5)).tolist() == sample_party_variances(4, 2, 1, rng(5)).tolist()

    @pytest.mark.parametrize("shape,scale", [(0, 1), (1, -1)])
    def test_rejects(self, shape, scale):
        with pytest.raises(InvalidParameterError):
            sample_party_variances(2, shape, scale, rng())


class TestValuations:
    def test_degenerate_spread(self):
        e = electorate()
        lam = sample_valuations(e, PHI, [1e-9] * 3, rng()).values
        np.testing.assert_allclose(lam, PHI.phi[e.community_of], atol=1e-6)

    def test_column_means(self):
        n = 100_000
        e = Electorate(1, np.zeros(n, dtype=int), np.zeros(n, dtype=int), 1)
        lam = sample_valuations(e, AffinityMatrix([[1, -1]]), [1, 1], rng(2)).values
        np.testing.assert_allclose(lam.mean(axis=0), [1, -1], atol=0.01)
        # spread is a standard deviation
        np.testing.assert_allclose(lam.std(axis=0), [1, 1], atol=0.01)

    def test_fixed_setting_ordering(self):
        gap = []
        for seed in range(10):
            g = rng(seed)
            comm = assign_communities(THETA, 10_000, g)
            e = Electorate(10, comm, assign_districts(comm, 10, 0.9, g), 3)
            lam = sample_valuations(e, PHI, [2, 1, 2], g).values
            top = lam[comm == 2].argmax(axis=1)
            gap.append(np.mean(top == 2) - np.mean(top == 0))
        assert np.mean(gap) > 0

    def test_shape_mismatch(self):
        with pytest.raises(InvalidParameterError):
            sample_valuations(electorate(), PHI, [1, 1], rng())


class TestInfluence:
    def test_kappa_one_identity(self):
        e = electorate()
        v = sample_valuations(e, PHI, [1, 1, 1], rng())
        out = apply_local_influence(v, e, 1.0)
        assert out.kind == "influenced"
        assert out.values.tobytes() == v.values.tobytes()

    def test_kappa_zero_district_mean(self):
        e = electorate()
        v = sample_valuations(e, PHI, [1, 1, 1], rng())
        out = apply_local_influence(v, e, 0.0).values
        means = district_means(v.values, e)
        np.testing.assert_allclose(out, means[e.district_of], atol=1e-12)

    def test_hand_arithmetic(self):
        e = Electorate(1, [0, 0], [0, 0], 1)
        v = ValuationMatrix([[0.0], [2.0]])
        assert apply_local_influence(v, e, 0.5).values.ravel().tolist() == [0.5, 1.5]

    @given(st.floats(0, 1), st.integers(0, 2**32 - 1))
    @settings(max_examples=50, deadline=None)
    def test_preserves_district_means(self, kappa, seed):
        e = electorate(seed=seed % 1000)
        v = sample_valuations(e, PHI, [1, 2, 3], rng(seed))
        out = apply_local_influence(v, e, kappa)
        np.testing.assert_allclose(district_means(out.values, e), district_means(v.values, e), atol=1e-9)

    def test_per_elector_kappa(self):
        e = electorate()
        v = sample_valuations(e, PHI, [1, 1, 1], rng())
        kap = sample_kappa(2, 2, rng(3), size=e.n_electors)
        out = apply_local_influence(v, e, kap).values
        mean = district_means(v.values, e)[e.district_of]
        np.testing.assert_allclose(out, kap[:, None] * v.values + (1 - kap[:, None]) * mean)

    def test_rejects_out_of_range(self):
        e = electorate()
        v = sample_valuations(e, PHI, [1, 1, 1], rng())
        with pytest.raises(InvalidParameterError):
            apply_local_influence(v, e, 1.5)


class TestKappa:
    def test_uniform_mean(self):
        assert sample_kappa(1, 1, rng(4), size=100_000).mean() == pytest.approx(0.5, abs=0.005)

    def test_concentrated(self):
        assert sample_kappa(1e6, 1, rng()) == pytest.approx(1.0, abs=1e-3)

    def test_deterministic(self):
        assert sample_kappa(2, 3, rng(9)) == sample_kappa(2, 3, rng(9))

    def test_rejects(self):
        with pytest.raises(InvalidParameterError):
            sample_kappa(0, 1, rng())


class TestRanking:
    def test_sort(self):
        assert rank_from_valuations([0.2, 0.9, -1.0]).tolist() == [1, 0, 2]

    def test_tie_to_lower_index(self):
        assert rank_from_valuations([0.5, 0.5, 0.1]).tolist() == [0, 1, 2]

    def test_random_matrix_non_increasing(self):
        lam = rng(6).normal(size=(1000, 5))
        order = rank_from_valuations(lam)
        along = np.take_along_axis(lam, order, axis=1)
        assert (np.diff(along, axis=1) <= 0).all()

    @given(arrays(np.float64, (20, 4), elements=st.sampled_from([-1.0, 0.0, 0.5, 1.0])))
    def test_permutation_with_ties(self, lam):
        order = rank_from_valuations(lam)
        assert (np.sort(order, axis=1) == np.arange(4)).all()
        along = np.take_along_axis(lam, order, axis=1)
        assert (np.diff(along, axis=1) <= 0).all()
        # equal values keep ascending party index
        same = np.diff(along, axis=1) == 0
        assert (np.diff(order, axis=1)[same] > 0).all()


def test_valuations_csv(tmp_path):
    path = tmp_path / "v.csv"
    write_valuations_csv(ValuationMatrix([[0.1, -2.0]]), path)
    assert path.read_text().splitlines() == ["elector_id,party_0,party_1", "0,0.1,-2.0"]
