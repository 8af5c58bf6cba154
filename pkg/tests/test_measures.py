from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multicausal import (CompactRegion, Evolution, ModelParams, SliceMeasure, dirac,
                         measure_of_region, particle_marginal, product_measure, symmetrize)
from multicausal.errors import DimensionError, MeasureError, ResourceLimitError

P1 = ModelParams(c=1.0, n=3, N=1)
a, b, c = [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 2.0, 0.0]


def atoms_of(mu):
    return {tuple(np.asarray(x).ravel()): w for x, w in mu.atoms()}


def test_product_of_diracs():
    mu = product_measure(0.0, [dirac(0, a, P1), dirac(0, b, P1)])
    assert atoms_of(mu) == {tuple(a + b): 1.0}


def test_product_weights_multiply():
    half = SliceMeasure(0, [[b], [c]], [Fraction(1, 2)] * 2, P1, exact=True)
    mu = product_measure(0.0, [dirac(0, a, P1, exact=True), half])
    assert atoms_of(mu) == {tuple(a + b): Fraction(1, 2), tuple(a + c): Fraction(1, 2)}


def test_product_of_two_uniform_pairs():
    u = SliceMeasure(0, [[a], [b]], [0.5, 0.5], P1)
    v = SliceMeasure(0, [[c], [b]], [0.5, 0.5], P1)
    mu = product_measure(0.0, [u, v])
    # explicit enumeration
    expected = {tuple(x + y): 0.25 for x in (a, b) for y in (c, b)}
    assert atoms_of(mu) == expected


def test_product_rejects_unnormalised_factor():
    bad = SliceMeasure(0, [[a]], [0.5], P1, tol=1.0)
    with pytest.raises(MeasureError):
        product_measure(0.0, [bad, dirac(0, b, P1)])


def test_symmetrize_two_particles():
    mu = symmetrize(product_measure(0.0, [dirac(0, a, P1, exact=True), dirac(0, b, P1, exact=True)]))
    assert atoms_of(mu) == {tuple(a + b): Fraction(1, 2), tuple(b + a): Fraction(1, 2)}


def test_symmetrize_three_distinct_gives_six_atoms():
    mu = product_measure(0.0, [dirac(0, x, P1, exact=True) for x in (a, b, c)])
    s = symmetrize(mu)
    assert len(s) == 6 and set(s.weights) == {Fraction(1, 6)}


def test_marginal_of_symmetrized_product():
    s = symmetrize(product_measure(0.0, [dirac(0, a, P1), dirac(0, b, P1)]))
    for j in (0, 1):
        assert atoms_of(particle_marginal(s, j)) == {tuple(a): 0.5, tuple(b): 0.5}


def test_marginal_merges_shared_coordinates():
    params = ModelParams(c=1.0, n=1, N=2)
    mu = SliceMeasure(0, [[[0], [1]], [[0], [2]], [[3], [1]]],
                      [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)], params, exact=True)
    m0 = particle_marginal(mu, 0)
    assert atoms_of(m0) == {(0.0,): Fraction(5, 6), (3.0,): Fraction(1, 6)}
    m1 = particle_marginal(mu, 1)
    assert atoms_of(m1) == {(1.0,): Fraction(2, 3), (2.0,): Fraction(1, 3)}
    with pytest.raises(IndexError):
        particle_marginal(mu, 2)


def test_measure_of_region_examples():
    params = ModelParams(c=1.0, n=1, N=1)
    mu = SliceMeasure(0, [[[0.0]], [[1.0]], [[2.0]], [[3.0]]], [0.25] * 4, params)
    assert measure_of_region(mu, lambda xs: True) == pytest.approx(1.0)
    assert measure_of_region(mu, lambda xs: False) == 0
    assert measure_of_region(mu, CompactRegion.box(0, [[0.5]], [[3.5]])) == pytest.approx(0.75)
    # a region on another slice holds no mass of this measure
    assert measure_of_region(mu, CompactRegion.box(1, [[-9]], [[9]])) == 0


def test_duplicates_merge_and_order_is_canonical():
    params = ModelParams(c=1.0, n=1, N=1)
    mu = SliceMeasure(0, [[[2.0]], [[1.0]], [[2.0 + 1e-15]]], [0.25, 0.5, 0.25], params)
    assert len(mu) == 2
    assert mu.positions[:, 0, 0].tolist() == [1.0, 2.0]
    assert mu.weights.tolist() == [0.5, 0.5]


def test_invariant_violations():
    with pytest.raises(MeasureError):
        SliceMeasure(0, [[a]], [0.9], P1)
    with pytest.raises(MeasureError):
        SliceMeasure(0, [[a], [b]], [1.5, -0.5], P1)
    with pytest.raises(MeasureError):
        SliceMeasure(0, [[a]], [Fraction(1, 2)], P1, exact=True)
    with pytest.raises(DimensionError):
        SliceMeasure(0, [[[0.0, 0.0]]], [1.0], P1)
    with pytest.raises(MeasureError):
        SliceMeasure(0, np.zeros((0, 1, 3)), [], P1)


def test_atom_limit():
    params = ModelParams(c=1.0, n=1, N=1)
    k = 100_001
    with pytest.raises(ResourceLimitError):
        SliceMeasure(0, np.arange(k, dtype=float)[:, None, None], np.full(k, 1 / k), params)


def test_evolution_requires_increasing_times():
    m0, m1 = dirac(0, a, P1), dirac(1, a, P1)
    Evolution([m0, m1])
    with pytest.raises(MeasureError):
        Evolution([m1, m0])


def test_round_trip_serialisation():
    params = ModelParams(c=2.0, n=2, N=2)
    mu = SliceMeasure(0.5, [[[0, 1], [2, 3]], [[1, 1], [0, 0]]],
                      [Fraction(1, 3), Fraction(2, 3)], params, exact=True)
    back = SliceMeasure.from_dict(mu.to_dict(), exact=True)
    assert back.same_as(mu)


# ------------------------------------------------------------- properties

@st.composite
def measures(draw, N=2, n=1):
    params = ModelParams(c=1.0, n=n, N=N)
    k = draw(st.integers(1, 5))
    xs = draw(st.lists(st.lists(st.integers(-3, 3), min_size=N * n, max_size=N * n),
                       min_size=k, max_size=k))
    w = draw(st.lists(st.integers(1, 9), min_size=k, max_size=k))
    tot = sum(w)
    return SliceMeasure(0.0, np.array(xs, float).reshape(k, N, n),
                        [Fraction(x, tot) for x in w], params, exact=True)


@given(measures(N=2))
def test_symmetrize_is_idempotent(mu):
    s = symmetrize(mu)
    assert symmetrize(s).same_as(s)
    assert s.total() == 1


@given(measures(N=3))
def test_symmetrize_invariant_under_relabelling(mu):
    s = symmetrize(mu)
    swapped = SliceMeasure(s.t, s.positions[:, [2, 0, 1]], list(s.weights), s.params, exact=True)
    assert swapped.same_as(s)


@given(st.lists(measures(N=1), min_size=1, max_size=3))
def test_marginal_of_product_recovers_factor(factors):
    mu = product_measure(0.0, factors)
    assert mu.total() == 1
    for j, f in enumerate(factors):
        assert particle_marginal(mu, j).same_as(f)


@given(measures(N=2))
def test_float_mass_conserved(mu):
    f = mu.as_float()
    for out in (symmetrize(f), particle_marginal(f, 0), particle_marginal(f, 1)):
        assert abs(out.total() - 1.0) <= 1e-12
