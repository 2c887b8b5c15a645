import math

import numpy as np
import pytest

from jamlab import sim
from jamlab.annihilation import build_rsa_model, rsa_mean_prediction
from jamlab.lattice import ConfigType, Model, Region, blocks, builtin_model
from jamlab.rng import RngSpec
from jamlab.theory import harmonic_float

from oracles import segment_split_means

# mean jamming time of dimer RSA on a free 400-site path, from the
# segment-splitting ODE in tests/oracles.py (DOP853, rtol 1e-11)
FREE_DIMER_400_MEAN = 4.595199626405078


def _check_realisation(model, res):
    inst = model.instances
    N = len(inst)
    t = res.arrival_times
    order = np.argsort(t, kind="stable")
    rank = np.empty(N, dtype=int)
    rank[order] = np.arange(N)
    succ = np.flatnonzero(res.success)
    assert res.success_count + res.blocked_count == N
    assert res.success_count >= 1
    assert 0 <= res.trailing_blocked < N
    last_rank = max(rank[succ])
    assert res.trailing_blocked == N - 1 - last_rank
    assert res.duration == t[order[last_rank]]
    for c in range(N):
        earlier = [b for b in succ if rank[b] < rank[c] and blocks(inst[b], inst[c])]
        if res.success[c]:
            assert not earlier
        else:
            assert earlier
    occ = np.zeros(model.n, dtype=bool)
    for c in succ:
        occ[list(inst[c].occupancy)] = True
    assert np.array_equal(occ, res.jammed)
    assert sum(res.per_type_successes) == res.success_count


@pytest.mark.parametrize("model", [
    builtin_model("dimer-1d", 12),
    builtin_model("dimer-1d", 9, "free"),
    builtin_model("monomer-excl-2d", (4, 4)),
    build_rsa_model(8),
    builtin_model("monomer", 5),
])
def test_realisation_invariants(model):
    for i in range(25):
        _check_realisation(model, sim.run_rsa(model, RngSpec(11, i)))


def test_anni_pair_jammed_state_has_no_adjacent_survivors():
    m = build_rsa_model(30)
    for i in range(20):
        holes = sim.run_rsa(m, RngSpec(5, i)).jammed
        alive = ~holes
        assert not np.any(alive & np.roll(alive, -1))


def test_empty_model():
    m = builtin_model("dimer-1d", 1, "free")
    assert m.N == 0
    res = sim.run_rsa(m, RngSpec(1))
    assert res.duration == 0 and res.success_count == 0 and res.trailing_blocked == 0


def test_replay_breaks_ties_by_order():
    m = builtin_model("dimer-1d", 3, "free")
    g = m.graph
    order = np.argsort(np.array([0.5, 0.5]), kind="stable")
    success, _, last = sim.replay(order, 2, g.indptr, g.indices, 2)
    assert success.tolist() == [True, False] and last == 0


def test_single_monomer_mean_one():
    s = sim.estimate_mean_duration(builtin_model("monomer", 1), 20_000, 3)
    assert abs(s.mean - 1.0) < 3 * s.stderr


def test_dimer_pair_torus_mean_half():
    s = sim.estimate_mean_duration(builtin_model("dimer-1d", 2), 20_000, 4)
    assert abs(s.mean - 0.5) < 3 * s.stderr


def test_monomer_torus_10_harmonic():
    s = sim.estimate_mean_duration(builtin_model("monomer", 10), 20_000, 5)
    assert abs(s.mean - harmonic_float(10)) < 3 * s.stderr


def test_reps_must_be_at_least_two():
    with pytest.raises(ValueError):
        sim.estimate_mean_duration(builtin_model("monomer", 3), 1, 0)


def test_determinism_across_worker_counts():
    m = builtin_model("dimer-1d", 50)
    a = sim.estimate_mean_duration(m, 400, 9, workers=1)
    b = sim.estimate_mean_duration(m, 400, 9, workers=4)
    c = sim.estimate_mean_duration(m, 400, 9, workers=3)
    assert a == b == c
    pa = sim.estimate_p(m, 0, 5.0, 400, 9, workers=1)
    pb = sim.estimate_p(m, 0, 5.0, 400, 9, workers=5)
    assert pa == pb


def test_free_dimer_path_matches_ode_oracle():
    means, _ = segment_split_means(40, "dimer")
    for n in (6, 15, 40):
        s = sim.estimate_mean_duration(builtin_model("dimer-1d", n, "free"), 20_000, n)
        assert abs(s.mean - means[n]) < 4 * s.stderr


def test_free_dimer_400_against_frozen_ode_value():
    s = sim.estimate_mean_duration(builtin_model("dimer-1d", 400, "free"), 20_000, 1234)
    assert abs(s.mean - FREE_DIMER_400_MEAN) < 4 * s.stderr
    # lenient envelope around pi^2/6
    assert s.variance <= 2.5


def test_estimate_p_monomer_never_blocked():
    s = sim.estimate_p(builtin_model("monomer", 20), 0, 7.0, 200, 1)
    assert s.mean == 1.0 and s.variance == 0.0


def test_estimate_p_argument_errors():
    with pytest.raises(ValueError, match="torus"):
        sim.estimate_p(builtin_model("dimer-1d", 20, "free"), 0, 5.0, 10, 1)
    with pytest.raises(ValueError, match="t_horizon"):
        sim.estimate_p(builtin_model("dimer-1d", 20), 0, 0.0, 10, 1)
    with pytest.raises(ValueError, match="tagged_type"):
        sim.estimate_p(builtin_model("dimer-1d", 20), 1, 5.0, 10, 1)


def test_estimate_p_monotone_in_horizon():
    m = builtin_model("dimer-1d", 200)
    ests = [sim.estimate_p(m, 0, h, 4000, 17) for h in (1, 2, 4, 8, 16)]
    for a, b in zip(ests, ests[1:]):
        assert a.mean + 3 * math.hypot(a.stderr, b.stderr) >= b.mean
    # common random numbers make the ordering hold pathwise
    assert all(a.mean >= b.mean for a, b in zip(ests, ests[1:]))


def test_estimate_p_dimer_finite_time_curve():
    # dimer ghost unblocked at t iff neither half-line covers its end site:
    # exp(-2(1 - e^-t)) on the infinite line
    m = builtin_model("dimer-1d", 300)
    s = sim.estimate_p(m, 0, 1.0, 20_000, 3)
    assert abs(s.mean - math.exp(-2 * (1 - math.exp(-1)))) < 4 * s.stderr


def test_siblings_withheld_for_anni_pair_only():
    m = build_rsa_model(10)
    ghost = sim.ghost_index(m, 0)
    assert sim.sibling_indices(m, ghost) == [m.instance_at(1, 0)]
    assert sim.sibling_indices(builtin_model("dimer-1d", 10), 0) == []
    # single-instance ghost: the sibling pair config always resolves the pair
    s = sim.estimate_p(m, 0, 30.0, 500, 2, withhold_siblings=False)
    assert s.mean == 0.0


def test_anni_pair_rsa_mean_duration():
    m = build_rsa_model(2000)
    s = sim.estimate_mean_duration(m, 10_000, 21)
    assert abs(s.mean - rsa_mean_prediction(2000)) < 0.05


def test_sweep_rows():
    rows = sim.sweep(lambda n: builtin_model("monomer", n), [5, 10], 2000, 1, p=1.0)
    assert [r.n for r in rows] == [5, 10]
    for r in rows:
        assert r.prediction == pytest.approx(harmonic_float(r.N))
        assert abs(r.delta) < 4 * r.stderr
    with pytest.raises(ValueError):
        sim.sweep(lambda n: builtin_model("monomer", n), [], 10, 1, p=1.0)


def test_sweep_estimates_p_when_missing():
    rows = sim.sweep(lambda n: builtin_model("dimer-1d", n), [40], 500, 2, p=None, p_reps=2000)
    assert rows[0].prediction is not None


def test_custom_asymmetric_model_runs():
    t = ConfigType.make("L", [(0,), (1,), (2,)], [(0,)])
    m = Model(Region.torus((15,)), (t,))
    for i in range(10):
        _check_realisation(m, sim.run_rsa(m, RngSpec(3, i)))
