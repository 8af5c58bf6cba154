from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multicausal import (Evolution, ModelParams, SliceMeasure, TrajectoryMeasure,
                         build_trajectory_measure, evaluate_pushforward, precedes_measures,
                         verify_causal_evolution)
from multicausal.curves import Trajectory, concatenate, segment_measure
from multicausal.errors import MeasureError, NonCausalEvolutionError
from multicausal.instances import inject_jump, random_causal_evolution
from multicausal.seeding import rng_for

P = ModelParams(c=1.0, n=1, N=1)
H, Q = Fraction(1, 2), Fraction(1, 4)


def line(t, xs, ws):
    return SliceMeasure(t, np.array(xs, float)[:, None, None], ws, P, exact=True)


def test_single_atom_slices_give_one_trajectory():
    evo = Evolution([line(0, [0.0], [1]), line(1, [0.5], [1]), line(2, [1.25], [1])])
    sigma = build_trajectory_measure(evo)
    assert len(sigma) == 1 and sigma.weights[0] == 1
    assert sigma.positions[0, :, 0, 0].tolist() == [0.0, 0.5, 1.25]


def test_unique_matching_gives_two_half_trajectories():
    evo = Evolution([line(0, [0.0, 10.0], [H, H]), line(1, [0.5, 10.5], [H, H])])
    sigma = build_trajectory_measure(evo)
    paths = sorted((tuple(p[:, 0, 0]), w) for p, w in zip(sigma.positions, sigma.weights))
    assert paths == [((0.0, 0.5), H), ((10.0, 10.5), H)]


def test_proportional_splitting_through_middle_atom():
    # a half-mass middle atom fed by one source and feeding two sinks of 1/4
    evo = Evolution([line(0, [0.0, 10.0], [H, H]),
                     line(1, [0.0, 10.0], [H, H]),
                     line(2, [-0.5, 0.5, 10.0], [Q, Q, H])])
    sigma = build_trajectory_measure(evo)
    through = {tuple(p[:, 0, 0]): w for p, w in zip(sigma.positions, sigma.weights)}
    assert through == {(0.0, 0.0, -0.5): Q, (0.0, 0.0, 0.5): Q, (10.0, 10.0, 10.0): H}


def test_concatenation_weight_is_product_of_conditionals():
    # two ways in and two ways out of one atom: four paths of 1/4 each
    first = SliceMeasure(0, [[[-0.5]], [[0.5]]], [H, H], P, exact=True)
    mid = line(1, [0.0], [1])
    last = SliceMeasure(2, [[[-0.25]], [[0.25]]], [H, H], P, exact=True)
    s1 = segment_measure(precedes_measures(first, mid).witness)
    s2 = segment_measure(precedes_measures(mid, last).witness)
    glued = concatenate(s1, s2)
    assert len(glued) == 4 and set(glued.weights) == {Q}
    # marginal law on both sides of the junction
    for t, piece in ((0.5, s1), (1.0, s1), (1.5, s2)):
        assert evaluate_pushforward(glued, t).same_as(evaluate_pushforward(piece, t))


def test_concatenation_needs_matching_junction():
    s1 = segment_measure(precedes_measures(line(0, [0.0], [1]), line(1, [0.0], [1])).witness)
    s2 = segment_measure(precedes_measures(line(1, [0.5], [1]), line(2, [0.5], [1])).witness)
    with pytest.raises(MeasureError):
        concatenate(s1, s2)


def test_evaluation_examples():
    sigma = TrajectoryMeasure([0.0, 1.0], [[[[0.0]], [[1.0]]]], [1.0], P)
    mid = evaluate_pushforward(sigma, 0.5)
    assert mid.positions.ravel().tolist() == [0.5]
    crossing = TrajectoryMeasure([0.0, 2.0], [[[[-1.0]], [[1.0]]], [[[1.0]], [[-1.0]]]],
                                 [0.5, 0.5], P)
    at = evaluate_pushforward(crossing, 1.0)
    assert len(at) == 1 and at.weights[0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        evaluate_pushforward(sigma, 1.5)


def test_trajectory_helpers():
    traj = Trajectory(np.array([0.0, 1.0, 2.0]), np.array([[[0.0]], [[1.0]], [[1.0]]]))
    assert traj.at(0.25).ravel().tolist() == [0.25]
    assert traj.is_causal(P)
    fast = Trajectory(np.array([0.0, 1.0]), np.array([[[0.0]], [[1.5]]]))
    assert not fast.is_causal(P) and fast.is_causal(P, slack=0.5)


def test_verify_examples():
    evo = Evolution([line(0, [0.0], [1]), line(1, [0.5], [1]), line(2, [3.0], [1])])
    rep = verify_causal_evolution(evo)
    assert not rep.causal and rep.failing_pairs() == [(0, 2), (1, 2)]
    assert verify_causal_evolution(Evolution([line(0, [0.0], [1])])).causal
    with pytest.raises(NonCausalEvolutionError) as err:
        build_trajectory_measure(evo)
    assert err.value.pair == (1, 2) and not err.value.certificate.verdict


def test_pushforwards_of_valid_sigma_form_causal_evolution():
    sigma = TrajectoryMeasure([0, 1, 2], [[[[0.0]], [[0.9]], [[1.2]]], [[[3.0]], [[2.5]], [[2.5]]]],
                              [0.25, 0.75], P)
    evo = Evolution([evaluate_pushforward(sigma, t) for t in sigma.grid])
    assert verify_causal_evolution(evo).causal


def test_serialisation_round_trip():
    evo = random_causal_evolution(rng_for(5), ModelParams(1.0, 2, 2), slices=3, exact=True)
    sigma = build_trajectory_measure(evo)
    back = TrajectoryMeasure.from_dict(sigma.to_dict(), exact=True)
    assert back.grid.tolist() == sigma.grid.tolist()
    assert list(back.weights) == list(sigma.weights)


# ------------------------------------------------------------- properties

params_st = st.sampled_from([ModelParams(1.0, n, N) for n in (1, 2, 3) for N in (1, 2)])


@given(st.integers(0, 2**32), params_st, st.booleans())
def test_round_trip_reproduces_every_slice(seed, params, exact):
    evo = random_causal_evolution(rng_for(seed), params, slices=4, max_atoms=8, exact=exact)
    assert verify_causal_evolution(evo).causal
    sigma = build_trajectory_measure(evo)
    assert sigma.segments_causal()
    for mu in evo:
        got = evaluate_pushforward(sigma, mu.t)
        assert got.same_as(mu, tol=1e-9)


@given(st.integers(0, 2**32), params_st)
def test_refined_grid_keeps_pushforwards(seed, params):
    evo = random_causal_evolution(rng_for(seed), params, slices=3, max_atoms=6, exact=True)
    sigma = build_trajectory_measure(evo)
    times = list(evo.times)
    extra = 0.5 * (times[0] + times[1])
    refined = Evolution(sorted([*evo.slices, evaluate_pushforward(sigma, extra)], key=lambda m: m.t))
    sigma2 = build_trajectory_measure(refined)
    for t in times:
        assert evaluate_pushforward(sigma2, t).same_as(evaluate_pushforward(sigma, t))


@given(st.integers(0, 2**32), params_st, st.integers(0, 3))
def test_injected_jump_fails_at_that_pair(seed, params, k):
    rng = rng_for(seed)
    evo = inject_jump(rng, random_causal_evolution(rng, params, slices=5, max_atoms=6), k)
    with pytest.raises(NonCausalEvolutionError) as err:
        build_trajectory_measure(evo)
    assert err.value.pair == (k, k + 1)
