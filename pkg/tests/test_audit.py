import numpy as np
import pytest

from nngraph.audit import BoundAuditor
from nngraph.bounds import BoundState, ConfidencePolicy
from nngraph.generators import generate_circle_clusters, generate_separated_clusters
from nngraph.learners import RunConfig, anneasy, anntri
from nngraph.oracles import GaussianOracle

from conftest import line_dataset, random_dataset


@pytest.mark.parametrize("learner", [anntri, anneasy])
@pytest.mark.parametrize("n", [5, 12, 30, 50])
def test_noiseless_runs_are_clean(learner, n):
    for seed in range(4):
        ds = random_dataset(n, 1000 + 10 * n + seed)
        aud = BoundAuditor(ds.d, noiseless=True)
        learner(GaussianOracle(ds, 0.0, seed=seed), RunConfig(learner.__name__, policy_sigma=0.1), auditor=aud)
        assert aud.clean, (dict(aud.violations), aud.first)
        assert aud.checks["rounds"] == n


def test_noiseless_clustered_runs_are_clean():
    ds = generate_circle_clusters(4, 6, 0.1, seed=2, radius=10)
    aud = BoundAuditor(ds.d, noiseless=True)
    anntri(GaussianOracle(ds, 0.0), RunConfig("anntri"), auditor=aud)
    assert aud.clean


def test_noisy_hoeffding_bounds_hold():
    pol = ConfidencePolicy("hoeffding", 0.1, 12)
    ds = generate_separated_clusters(3, 4, 1.1, pol, seed=0)
    bad = 0
    for seed in range(20):
        aud = BoundAuditor(ds.d)
        anntri(GaussianOracle(ds, 1.0, seed=seed), RunConfig("anntri"), auditor=aud)
        bad += not aud.good_event
        assert aud.violations["ci_width"] == 0
        if aud.good_event:
            assert aud.violations["triangle"] == 0 and aud.violations["tri_elim"] == 0
    assert bad <= 2


def _state(n=3):
    return BoundState(n, ConfidencePolicy("hoeffding", 0.1, n))


def test_planted_concentration_violation_is_flagged():
    ds = line_dataset([0, 1, 3])
    st = _state()
    aud = BoundAuditor(ds.d, paths=True)
    # a sample of 50 lands far outside the one-sample radius around d = 1
    aud.samples(0, np.array([1]), np.array([50.0]), np.zeros(3, dtype=int), np.zeros(3), st)
    assert aud.violations["concentration"] == 1 and not aud.good_event
    assert aud.first["concentration"] == (1, 0, 1)


def test_strict_mode_raises():
    ds = line_dataset([0, 1, 3])
    aud = BoundAuditor(ds.d, strict=True)
    with pytest.raises(AssertionError, match="concentration"):
        aud.samples(0, np.array([1]), np.array([50.0]), np.zeros(3, dtype=int), np.zeros(3), _state())


def test_paths_off_skips_replay():
    ds = line_dataset([0, 1, 3])
    aud = BoundAuditor(ds.d, paths=False)
    aud.samples(0, np.array([1]), np.array([50.0]), np.zeros(3, dtype=int), np.zeros(3), _state())
    assert aud.clean and aud.checks["samples"] == 1


def test_planted_triangle_violation_is_flagged():
    ds = line_dataset([0, 1, 3])
    st = _state()
    st.Utri.set(0, 2, 2.0)  # true distance is 3
    aud = BoundAuditor(ds.d, noiseless=True)
    aud.round_start(1, st, np.array([0, 2]), "tri")
    assert aud.violations["triangle"] == 1


def test_planted_easy_elimination_miss_is_flagged():
    ds = line_dataset([0, 1, 3])
    st = _state()
    for (i, j, v) in [(0, 1, 1.0), (0, 2, 3.0)]:
        st.U.set(i, j, v)
        st.L.set(i, j, v)
        st.T.set(i, j, 1)
    # U[0,1] = 1 and L[0,2] = 3 exclude 2 from round 1; leaving it active is a miss
    aud = BoundAuditor(ds.d, noiseless=True)
    aud.round_start(1, st, np.array([0, 2]), "easy")
    assert aud.violations["easy_elim"] == 1


def test_planted_closest_miss_is_flagged():
    ds = line_dataset([0, 1, 3, 7])
    aud = BoundAuditor(ds.d, noiseless=True)
    aud.round_start(1, _state(4), np.array([0, 3]), "tri")
    assert aud.violations["closest"] == 1
    aud2 = BoundAuditor(ds.d, noiseless=True)
    aud2.round_start(1, _state(4), np.array([0, 2, 3]), "tri")
    assert aud2.clean
