import itertools

import numpy as np
import pytest

from cpscausal.errors import (
    IncompleteAssignment,
    StateSpaceTooLarge,
    UnknownState,
    UnknownVariable,
    ZeroProbabilityEvidence,
)
from cpscausal.estimation import BayesNet, Cpt
from cpscausal.fixtures import get_fixture
from cpscausal.graph import CausalGraph, Edge, d_separated
from cpscausal.inference import Query, brute_force_posterior, joint_prob, posterior
from oracles import random_net

FIXTURES = ("stage1", "stage1_learnt", "stage6", "chain3", "fork3", "collider3", "twostage")


def single_node_net(prior=(0.75, 0.25)) -> BayesNet:
    return BayesNet(
        graph=CausalGraph(nodes=("A",)),
        cpts={"A": Cpt("A", (), (), ("s0", "s1"), np.array([list(prior)]))})


def two_node_net() -> BayesNet:
    graph = CausalGraph(nodes=("A", "B"), edges=(Edge("A", "B"),))
    return BayesNet(graph=graph, cpts={
        "A": Cpt("A", (), (), ("a0", "a1"), np.array([[0.3, 0.7]])),
        "B": Cpt("B", ("A",), (2,), ("b0", "b1"), np.array([[0.9, 0.1], [0.4, 0.6]])),
    })


def deterministic_chain() -> BayesNet:
    graph = CausalGraph(nodes=("A", "B", "C"), edges=(Edge("A", "B"), Edge("B", "C")))
    copy = np.array([[1.0, 0.0], [0.0, 1.0]])
    return BayesNet(graph=graph, cpts={
        "A": Cpt("A", (), (), ("s0", "s1"), np.array([[0.5, 0.5]])),
        "B": Cpt("B", ("A",), (2,), ("s0", "s1"), copy),
        "C": Cpt("C", ("B",), (2,), ("s0", "s1"), copy),
    })


class TestJointProb:
    def test_single_node(self):
        assert joint_prob(single_node_net(), {"A": 0}) == pytest.approx(0.75)

    def test_sums_to_one(self):
        fx = get_fixture("stage1")
        total = 0.0
        cards = [fx.net.cardinality(n) for n in fx.net.graph.nodes]
        for assign in itertools.product(*(range(c) for c in cards)):
            total += joint_prob(fx.net, dict(zip(fx.net.graph.nodes, assign)))
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_hand_multiplied_stage1(self):
        fx = get_fixture("stage1")
        # LIT101=Medium, MV101=Open, P101=On, P102=Off, FIT101=High
        assign = {"LIT101": 1, "MV101": 1, "P101": 1, "P102": 0, "FIT101": 1}
        expected = 0.75 * 0.85 * 0.85 * 0.75 * 0.98
        assert joint_prob(fx.net, assign) == pytest.approx(expected, rel=1e-12)

    def test_incomplete_assignment(self):
        fx = get_fixture("stage6")
        with pytest.raises(IncompleteAssignment):
            joint_prob(fx.net, {"P602": 0})
        with pytest.raises(IncompleteAssignment):
            joint_prob(fx.net, {"P602": 0, "FIT601": 0, "GHOST": 1})

    def test_unknown_state(self):
        fx = get_fixture("stage6")
        with pytest.raises(UnknownState):
            joint_prob(fx.net, {"P602": 5, "FIT601": 0})


class TestPosterior:
    def test_root_marginal_is_prior(self):
        assert posterior(single_node_net(), Query("A")) == pytest.approx([0.75, 0.25])

    def test_two_node_bayes_by_hand(self):
        net = two_node_net()
        # P(A | B=0) = P(B=0 | A) P(A) / P(B=0)
        pb0 = 0.3 * 0.9 + 0.7 * 0.4
        expected = [0.3 * 0.9 / pb0, 0.7 * 0.4 / pb0]
        assert posterior(net, Query("A", {"B": 0})) == pytest.approx(expected, rel=1e-12)

    def test_stage1_pump_given_low_tank(self):
        fx = get_fixture("stage1")
        # the Bayes right-hand side evaluated from the fixture CPTs:
        # P(P101=On | LIT101=Low) = P(LIT101=Low | P101=On) P(P101=On) / P(LIT101=Low)
        p_on = 0.05 * 0.02 + 0.75 * 0.85 + 0.20 * 0.32
        p_low_given_on = (0.05 * 0.02) / p_on
        expected = p_low_given_on * p_on / 0.05
        got = posterior(fx.net, Query("P101", {"LIT101": 0}))[1]
        assert got == pytest.approx(expected, rel=1e-12)

    def test_deterministic_chain_forces_ancestor(self):
        net = deterministic_chain()
        assert posterior(net, Query("A", {"C": 1})) == pytest.approx([0.0, 1.0])

    def test_zero_probability_evidence(self):
        net = deterministic_chain()
        # A=0 with C=1 is impossible under the copy CPTs
        with pytest.raises(ZeroProbabilityEvidence):
            posterior(net, Query("B", {"A": 0, "C": 1}))

    def test_unknown_variable_and_state(self):
        net = two_node_net()
        with pytest.raises(UnknownVariable):
            posterior(net, Query("Z"))
        with pytest.raises(UnknownVariable):
            posterior(net, Query("A", {"Z": 0}))
        with pytest.raises(UnknownState):
            posterior(net, Query("A", {"B": 9}))

    def test_normalized(self):
        fx = get_fixture("twostage")
        dist = posterior(fx.net, Query("LIT101", {"P205": 1, "FIT101": 0}))
        assert float(dist.sum()) == pytest.approx(1.0, abs=1e-9)


class TestBruteForce:
    def test_uniform_net_uniform_posterior(self):
        net = two_node_net()
        uniform = BayesNet(graph=net.graph, cpts={
            "A": Cpt("A", (), (), ("a0", "a1"), np.array([[0.5, 0.5]])),
            "B": Cpt("B", ("A",), (2,), ("b0", "b1"), np.array([[0.5, 0.5], [0.5, 0.5]])),
        })
        assert brute_force_posterior(uniform, Query("A", {"B": 1})) == pytest.approx([0.5, 0.5])

    def test_deterministic_chain(self):
        net = deterministic_chain()
        assert brute_force_posterior(net, Query("A", {"C": 1})) == pytest.approx([0.0, 1.0])

    def test_state_space_cap(self):
        rng = np.random.default_rng(31)
        net = random_net(tuple(f"n{k}" for k in range(25)), max_card=4, rng=rng)
        with pytest.raises(StateSpaceTooLarge):
            brute_force_posterior(net, Query("n0"))

    @pytest.mark.parametrize("fixture", FIXTURES)
    def test_matches_posterior_on_fixtures(self, fixture):
        fx = get_fixture(fixture)
        net = fx.net
        nodes = net.graph.nodes
        rng = np.random.default_rng(hash(fixture) % 2**32)
        for _ in range(10):
            target = nodes[rng.integers(len(nodes))]
            evidence = {}
            for n in nodes:
                if n != target and rng.random() < 0.4:
                    evidence[n] = int(rng.integers(net.cardinality(n)))
            q = Query(target, evidence)
            try:
                ve = posterior(net, q)
            except ZeroProbabilityEvidence:
                with pytest.raises(ZeroProbabilityEvidence):
                    brute_force_posterior(net, q)
                continue
            bf = brute_force_posterior(net, q)
            assert np.max(np.abs(ve - bf)) < 1e-9


class TestDSeparationConsistency:
    @pytest.mark.parametrize("fixture", FIXTURES)
    def test_dsep_implies_posterior_invariance(self, fixture):
        """The probabilistic counterpart of d-separation: conditioning on a
        d-separated variable never moves the posterior."""
        fx = get_fixture(fixture)
        net = fx.net
        nodes = net.graph.nodes
        checked = 0
        for i, j in itertools.permutations(nodes, 2):
            rest = [n for n in nodes if n not in (i, j)]
            for size in range(min(2, len(rest)) + 1):
                for s in itertools.combinations(rest[:6], size):
                    if not d_separated(net.graph, i, j, s):
                        continue
                    for s_assign in itertools.product(*(range(net.cardinality(v)) for v in s)):
                        base_ev = dict(zip(s, s_assign))
                        try:
                            base = posterior(net, Query(i, base_ev))
                        except ZeroProbabilityEvidence:
                            continue
                        for js in range(net.cardinality(j)):
                            try:
                                cond = posterior(net, Query(i, {**base_ev, j: js}))
                            except ZeroProbabilityEvidence:
                                continue
                            assert np.max(np.abs(base - cond)) < 1e-9
                            checked += 1
        # every fixture beyond the 2-node one has d-separations to exercise
        assert checked > 0 or len(nodes) == 2
