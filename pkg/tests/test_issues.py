import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from conftest import networks, vectors
from fjdyn import fixtures, oracles
from fjdyn.errors import PreconditionViolated, SingularSystem
from fjdyn.graph import (
    build_network,
    check_assumption2,
    has_spanning_tree,
    has_star_center,
    is_star_center,
    scc_decompose,
)
from fjdyn.issues import (
    check_corollary1,
    check_theorem2,
    classify,
    closed_form_psi,
    consensus_weights,
    evaluate_cost,
    group_values,
    issue_transition,
    predicted_psi_support,
    psi_graph,
    simulate_issue_sequence,
)
from fjdyn.single import simulate_single_issue

SWAP = [[0.0, 1.0], [1.0, 0.0]]
# independent route: augmented iteration of basis vectors, run to a fixed point
RING_CONSENSUS_VALUE = 0.009140767824497496


def two_agent():
    return build_network(SWAP, [0.5, 0.5])


def block_diag(*blocks):
    n = sum(len(b) for b in blocks)
    W = np.zeros((n, n))
    k = 0
    for b in blocks:
        b = np.asarray(b, dtype=float)
        W[k:k + len(b), k:k + len(b)] = b
        k += len(b)
    return W


# --- cost and one transition ------------------------------------------------


def test_cost_vanishes_at_common_opinion():
    net = fixtures.ring_consensus().net
    x = np.full(net.n, 0.3)
    assert all(evaluate_cost(net, i, x, x) == 0.0 for i in range(net.n))


def test_fully_stubborn_cost_is_pure_inertia():
    net = build_network(SWAP, [0.0, 0.5])
    assert evaluate_cost(net, 0, [0.7, 3.0], [0.2, 0.0]) == pytest.approx(0.25)


def test_two_agent_cost_by_hand():
    assert evaluate_cost(two_agent(), 0, [0.5, 0.5], [0.0, 1.0]) == pytest.approx(0.125)


def test_transition_examples():
    np.testing.assert_allclose(issue_transition(two_agent(), [0.0, 1.0]), [1 / 3, 2 / 3], atol=1e-15)
    net = fixtures.ring_consensus().net
    np.testing.assert_allclose(issue_transition(net, np.full(net.n, -2.0)), np.full(net.n, -2.0), atol=1e-14)
    frozen = build_network(np.ones((3, 3)) / 3, [0, 0, 0])
    np.testing.assert_array_equal(issue_transition(frozen, [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])


def test_singular_system_is_reported():
    with pytest.raises(SingularSystem):
        closed_form_psi(fixtures.three_cycle().net)


@given(networks(), st.data())
def test_next_initial_opinion_is_each_agents_best_response(net, data):
    assume(check_assumption2(net).holds)
    x = data.draw(vectors(net.n))
    nxt = issue_transition(net, x)
    eps = 1e-4
    for i in range(net.n):
        base = evaluate_cost(net, i, nxt, x)
        for step in (-eps, eps):
            moved = nxt.copy()
            moved[i] += step
            assert evaluate_cost(net, i, moved, x) >= base - 1e-12


# --- support of Psi ---------------------------------------------------------


def test_fully_stubborn_support_is_identity():
    S = predicted_psi_support(build_network(np.ones((3, 3)) / 3, [0, 0, 0]))
    np.testing.assert_array_equal(S, np.eye(3, dtype=bool))


def test_ring_reference_support_matches_and_ignores_non_stubborn_columns():
    net = fixtures.ring_consensus().net
    S = predicted_psi_support(net)
    assert not S[:, 5:].any()
    np.testing.assert_array_equal(closed_form_psi(net).support, S)


@given(networks(n_max=10))
def test_support_prediction_matches_closed_form(net):
    assume(check_assumption2(net).holds)
    np.testing.assert_array_equal(closed_form_psi(net).support, predicted_psi_support(net))


@given(networks(n_max=10))
def test_any_root_of_partially_stubborn_subgraph_is_a_centre(net):
    assume(check_assumption2(net).holds and net.partition.v_p)
    vp = sorted(net.partition.v_p)
    adj = psi_graph(closed_form_psi(net).support)
    root = has_spanning_tree(adj, vp)
    if root is None:
        return
    assert has_star_center(adj, vp) is not None
    assert is_star_center(adj, vp, root)


# --- verdicts ---------------------------------------------------------------


def test_single_partially_stubborn_agent_gives_consensus():
    net = build_network([[1.0, 0.0], [1.0, 0.0]], [0.5, 1.0])
    v = check_theorem2(net)
    assert v.consensus and v.root_agent == 0


def test_separate_components_give_clusters():
    net = build_network(block_diag(SWAP, SWAP), [0.5] * 4)
    assert not check_theorem2(net).consensus
    c = check_corollary1(net)
    assert c.clusters and c.isccs == (frozenset({0, 1}), frozenset({2, 3}))


def test_strongly_connected_network_has_no_clusters():
    assert not check_corollary1(fixtures.two_agent().net).clusters


def test_fully_stubborn_agents_make_predicates_inapplicable():
    net = fixtures.bounded_clique().net
    with pytest.raises(PreconditionViolated):
        check_theorem2(net)
    with pytest.raises(PreconditionViolated):
        check_corollary1(net)


def test_ring_reference_reaches_consensus_by_thirty_issues():
    fx = fixtures.ring_consensus()
    assert check_theorem2(fx.net).consensus
    res = simulate_issue_sequence(fx.net, fx.x0)
    assert res.spreads[30] < 1e-6
    assert res.outcome.kind == "consensus"
    assert res.outcome.value == pytest.approx(RING_CONSENSUS_VALUE, abs=1e-9)


@given(networks(mix=(0.0, 0.6, 0.4)))
def test_cluster_verdict_is_negation_of_consensus_verdict(net):
    assume(check_assumption2(net).holds and len(net.partition.v_p) >= 2)
    isccs = scc_decompose(net).isccs()
    assume(all(c & net.partition.v_p for c in isccs))
    assert check_corollary1(net).clusters == (not check_theorem2(net).consensus)


# --- simulation -------------------------------------------------------------


def test_constant_start_is_immediate_consensus():
    net = fixtures.ring_consensus().net
    res = simulate_issue_sequence(net, np.full(net.n, 0.25))
    assert res.issues_run == 0 and res.outcome.kind == "consensus"
    assert res.outcome.value == 0.25


def test_two_agent_sequence_meets_in_the_middle():
    res = simulate_issue_sequence(two_agent(), [0.0, 1.0])
    assert res.outcome.kind == "consensus"
    assert abs(res.outcome.value - 0.5) <= 1e-10


def test_two_components_settle_into_two_clusters():
    net = build_network(block_diag(SWAP, SWAP), [0.5] * 4)
    res = simulate_issue_sequence(net, [0.0, 1.0, 4.0, 6.0])
    assert res.outcome.kind == "clusters"
    groups = {frozenset(a): v for a, v in res.outcome.clusters}
    assert groups[frozenset({0, 1})] == pytest.approx(0.5, abs=1e-9)
    assert groups[frozenset({2, 3})] == pytest.approx(5.0, abs=1e-9)


def test_budget_exhaustion_is_not_classified():
    fx = fixtures.ring_consensus()
    res = simulate_issue_sequence(fx.net, fx.x0, max_issues=3)
    assert res.outcome.kind == "budget_exhausted" and not res.settled
    assert len(res.spreads) == 4


def test_record_full_keeps_every_issue():
    fx = fixtures.ring_consensus()
    res = simulate_issue_sequence(fx.net, fx.x0, record_full=True)
    assert [s for s, _ in res.initial_opinions_per_issue] == list(range(res.issues_run + 1))
    psi = closed_form_psi(fx.net)
    for (_, a), (_, b) in zip(res.initial_opinions_per_issue, res.initial_opinions_per_issue[1:]):
        np.testing.assert_allclose(b, psi.psi @ a, atol=1e-10)


@given(networks(mix=(0.0, 0.7, 0.3)), st.data())
def test_consensus_value_is_weighted_average_of_partially_stubborn_start(net, data):
    assume(check_assumption2(net).holds and net.partition.v_p)
    assume(check_theorem2(net).consensus)
    x00 = data.draw(vectors(net.n))
    res = simulate_issue_sequence(net, x00)
    assume(res.settled)
    nu = consensus_weights(closed_form_psi(net), net.partition)
    assert res.outcome.kind == "consensus"
    assert res.outcome.value == pytest.approx(float(nu @ x00), abs=1e-8)


@given(networks(), st.data())
def test_next_issue_starts_where_the_previous_one_ended(net, data):
    assume(check_assumption2(net).holds)
    x = data.draw(vectors(net.n))
    traj = simulate_single_issue(net, x, tol=1e-13)
    assume(traj.converged)
    np.testing.assert_allclose(issue_transition(net, x), traj.limit, atol=1e-8)


@given(networks(mix=(0.0, 0.6, 0.4)), st.data())
def test_simulation_agrees_with_brute_force(net, data):
    assume(check_assumption2(net).holds and net.partition.v_p)
    x00 = data.draw(vectors(net.n, -1, 1))
    res = simulate_issue_sequence(net, x00)
    assume(res.settled)
    assert oracles.brute_force_outcome(net, x00, "issue_sequence") == res.outcome.kind


# --- classification helpers -------------------------------------------------


def test_grouping_is_transitive_and_order_free():
    x = np.array([0.0, 2.0, 0.9e-6, 1.8e-6, 2.0 + 5e-7])
    groups = group_values(x, 1e-6)
    assert [sorted(g) for g, _ in groups] == [[0, 2, 3], [1, 4]]
    assert classify(np.array([1.0, 1.0 + 1e-7]), 1e-6, 1e-6).kind == "consensus"
