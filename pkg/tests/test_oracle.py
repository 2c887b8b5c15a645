from fractions import Fraction

import numpy as np
import pytest

from jamlab import oracle, sim
from jamlab.annihilation import build_rsa_model
from jamlab.errors import CapacityError
from jamlab.lattice import ConfigType, Model, Region, builtin_model
from jamlab.theory import harmonic

from oracles import naive_trailing_pmf


def test_single_monomer():
    m = builtin_model("monomer", 1)
    assert oracle.exact_trailing_pmf(m) == {0: 1}
    assert oracle.exact_expected_duration(m) == 1


def test_free_three_site_dimer():
    m = builtin_model("dimer-1d", 3, "free")
    assert oracle.exact_trailing_pmf(m) == {1: 1}
    assert oracle.exact_expected_duration(m) == Fraction(1, 2)


def test_free_four_site_dimer():
    m = builtin_model("dimer-1d", 4, "free")
    third = Fraction(1, 3)
    assert oracle.exact_trailing_pmf(m) == {0: third, 1: third, 2: third}
    assert oracle.exact_expected_duration(m) == 1


@pytest.mark.parametrize("model", [
    builtin_model("dimer-1d", 6, "free"),
    builtin_model("dimer-1d", 6),
    builtin_model("monomer-excl-1d", 7),
    builtin_model("monomer-excl-2d", (2, 3)),
    build_rsa_model(3),
    Model(Region.torus((6,)), (ConfigType.make("L", [(0,), (1,), (2,)], [(0,)]),)),
])
def test_pmf_matches_naive_pairwise_enumeration(model):
    pmf = oracle.exact_trailing_pmf(model)
    assert pmf == naive_trailing_pmf(model)
    assert sum(pmf.values()) == 1
    assert all(0 <= r < model.N for r in pmf)


@pytest.mark.parametrize("n", [1, 4, 7])
def test_edgeless_graph_gives_harmonic(n):
    assert oracle.exact_expected_duration(builtin_model("monomer", n)) == harmonic(n)


@pytest.mark.parametrize("model", [
    builtin_model("dimer-1d", 2),
    builtin_model("monomer-excl-1d", 3),
    builtin_model("monomer-excl-2d", (3, 1)),
])
def test_complete_conflict_graph(model):
    # every instance blocks every other, so only the first arrival succeeds
    assert model.graph.edge_count == model.N * (model.N - 1)
    assert oracle.exact_trailing_pmf(model) == {model.N - 1: 1}


def test_capacity_limit():
    with pytest.raises(CapacityError) as exc:
        oracle.exact_trailing_pmf(builtin_model("dimer-1d", 10))
    assert exc.value.limit == oracle.DEFAULT_LIMIT
    assert oracle.exact_trailing_pmf(builtin_model("dimer-1d", 3, "free"), limit=2)
    with pytest.raises(CapacityError):
        oracle.exact_trailing_pmf(builtin_model("dimer-1d", 3, "free"), limit=1)


def test_permutation_replay_agrees_with_run_rsa():
    m = builtin_model("dimer-1d", 7)
    from jamlab.rng import RngSpec
    g = m.graph
    for i in range(20):
        res = sim.run_rsa(m, RngSpec(2, i))
        order = np.argsort(res.arrival_times, kind="stable")
        success, _, last = sim.replay(order, m.N, g.indptr, g.indices, m.N)
        assert np.array_equal(success, res.success)
        assert m.N - 1 - last == res.trailing_blocked
