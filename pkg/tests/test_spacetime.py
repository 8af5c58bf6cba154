import itertools

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from multicausal import (CompactRegion, ConfigEvent, ModelParams, causal_mask,
                         chronologically_precedes_point, future_contains, precedes_point,
                         precedes_point_tolerant, slice_future_region)
from multicausal.errors import DimensionError

P1 = ModelParams(c=1.0, n=3, N=1)
P2 = ModelParams(c=1.0, n=3, N=2)


def ev(t, *xs):
    return ConfigEvent(t, np.array(xs, dtype=float))


# ---------------------------------------------------------------- examples

def test_timelike_single_particle():
    assert precedes_point(ev(0, [0, 0, 0]), ev(1, [0.5, 0, 0]), P1)


def test_reflexive_on_fixed_point():
    p = ev(0.3, [1, -2, 0.5], [4, 4, 4])
    assert precedes_point(p, p, P2)


def test_one_particle_out_of_cone_breaks_precedence():
    p = ev(0, [0, 0, 0], [1, 0, 0])
    q = ev(1, [0.5, 0, 0], [3, 0, 0])
    assert not precedes_point(p, q, P2)


def test_chronological_examples():
    o = ev(0, [0, 0, 0])
    assert chronologically_precedes_point(o, ev(1, [0, 0, 0]), P1)
    assert not chronologically_precedes_point(o, ev(1, [1, 0, 0]), P1)
    assert not chronologically_precedes_point(o, o, P1)


def test_lightlike_is_causal():
    assert precedes_point(ev(0, [0, 0, 0]), ev(1, [1, 0, 0]), P1)
    assert precedes_point(ev(0, [0, 0, 0]), ev(5, [3, 4, 0]), P1)


def test_past_is_not_causal():
    assert not precedes_point(ev(1, [0, 0, 0]), ev(0, [0, 0, 0]), P1)


def test_dimension_mismatch_raises():
    with pytest.raises(DimensionError):
        precedes_point(ev(0, [0, 0, 0]), ev(1, [0, 0, 0]), P2)


def test_tolerant_predicate_widens_cone():
    p, q = ev(0, [0, 0, 0]), ev(1, [1.2, 0, 0])
    assert not precedes_point(p, q, P1)
    assert precedes_point_tolerant(p, q, P1, 0.25)
    assert not precedes_point_tolerant(p, q, P1, 0.1)


def test_decimal_boundary_decided_exactly():
    # 0.1 + 0.2 != 0.3 in floats; the exact fallback compares the stored doubles
    p = ev(0.1, [0.0])
    q = ev(0.3, [0.2])
    params = ModelParams(c=1.0, n=1, N=1)
    from fractions import Fraction
    expected = abs(Fraction(0.2)) <= Fraction(0.3) - Fraction(0.1)
    assert precedes_point(p, q, params) == expected


def test_future_contains_examples():
    box = CompactRegion.box(0.0, [[0, 0, 0]], [[1, 1, 1]])
    assert future_contains(box, ev(1, [1.5, 0, 0]), P1)
    assert not future_contains(box, ev(0.1, [3, 0, 0]), P1)
    p, q = ev(0, [0, 0, 0]), ev(1, [0.3, 0.4, 0])
    assert future_contains(CompactRegion.from_event(p), q, P1)


def test_slice_future_examples():
    params = ModelParams(c=1.0, n=3, N=1)
    atom = CompactRegion.from_atoms(0.0, [[0.0, 0.0, 0.0]])
    fs = slice_future_region(atom, 1.0, params)
    assert fs.radius == 1.0
    assert fs.contains([[0.0, 1.0, 0.0]]) and fs.contains([[0.5, 0.75, 0.25]])
    assert not fs.contains([[0.0, 1.0 + 2**-40, 0.0]])
    same = slice_future_region(atom, 0.0, params)
    assert same.contains([[0, 0, 0]]) and not same.contains([[1e-9, 0, 0]])
    early = slice_future_region(atom, -1.0, params)
    assert early.empty and not early.contains([[0, 0, 0]])


def test_interval_future_in_one_dimension():
    params = ModelParams(c=1.0, n=1, N=1)
    fs = slice_future_region(CompactRegion.box(0.0, [[0.0]], [[1.0]]), 2.0, params)
    assert fs.exact
    xs = np.linspace(-4, 5, 9001)
    inside = fs.mask(xs[:, None, None])
    # dense membership oracle: [-2, 3]
    assert np.array_equal(inside, (xs >= -2 - 1e-12) & (xs <= 3 + 1e-12))
    lo, hi = fs.outer_region().lo, fs.outer_region().hi
    assert lo.item() == -2 and hi.item() == 3


# ------------------------------------------------------------- properties

coord = st.floats(-3, 3, allow_nan=False).map(lambda x: round(x * 4) / 4)
time = st.floats(0, 3, allow_nan=False).map(lambda x: round(x * 4) / 4)


@st.composite
def events(draw, N=2, n=2):
    return ev(draw(time), *[[draw(coord) for _ in range(n)] for _ in range(N)])


P22 = ModelParams(c=1.0, n=2, N=2)


@given(events(), events(), events())
def test_partial_order_axioms(p, q, r):
    assert precedes_point(p, p, P22)
    if precedes_point(p, q, P22) and precedes_point(q, p, P22):
        assert p == q
    if precedes_point(p, q, P22) and precedes_point(q, r, P22):
        assert precedes_point(p, r, P22)


@given(events(), events(), events())
def test_push_up(p, q, r):
    if chronologically_precedes_point(p, q, P22) and precedes_point(q, r, P22):
        assert chronologically_precedes_point(p, r, P22)


@given(events(), events())
def test_componentwise_decomposition(p, q):
    single = ModelParams(c=1.0, n=2, N=1)
    parts = all(precedes_point(p.particle(j), q.particle(j), single) for j in range(2))
    assert precedes_point(p, q, P22) == parts


@given(events(), events())
def test_equal_time_rigidity(p, q):
    q = ConfigEvent(p.t, q.xs)
    if precedes_point(p, q, P22):
        assert p == q


@given(events(), events())
def test_chronological_implies_causal(p, q):
    if chronologically_precedes_point(p, q, P22):
        assert precedes_point(p, q, P22)


@given(st.lists(events(), min_size=2, max_size=6), st.lists(events(), min_size=1, max_size=6))
def test_mask_matches_scalar_predicate(ps, qs):
    tp = np.array([p.t for p in ps])[:, None]
    tq = np.array([q.t for q in qs])[None, :]
    XP = np.array([p.xs for p in ps])[:, None]
    XQ = np.array([q.xs for q in qs])[None, :]
    mask = causal_mask(tp, XP, tq, XQ, P22)
    for i, j in itertools.product(range(len(ps)), range(len(qs))):
        assert mask[i, j] == precedes_point(ps[i], qs[j], P22)


def _sampled_future_contains(K, q, params, per_axis=41):
    """Dense-sampling oracle: minimum per-particle distance over a grid of
    points covering each box."""
    dt = q.t - K.t
    if dt < 0:
        return False
    for lo, hi in zip(K.lo, K.hi):
        ok = True
        for j in range(params.N):
            axes = [np.linspace(lo[j, k], hi[j, k], per_axis) for k in range(params.n)]
            pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, params.n)
            d = np.min(np.linalg.norm(pts - q.xs[j], axis=1))
            if d > params.c * dt:
                ok = False
                break
        if ok:
            return True
    return False


def test_future_contains_matches_sampling_oracle():
    rng = np.random.default_rng(11)
    params = ModelParams(c=1.0, n=2, N=2)
    resolution = 4.0 / 40 * np.sqrt(2)  # sampling step of the widest box diagonal
    checked = 0
    for _ in range(100):
        if rng.uniform() < 0.5:
            lo = rng.uniform(-2, 2, (2, 2))
            K = CompactRegion.box(0.0, lo, lo + rng.uniform(0, 2, (2, 2)))
        else:
            K = CompactRegion.from_atoms(0.0, rng.uniform(-2, 2, (int(rng.integers(1, 4)), 2, 2)))
        q = ConfigEvent(rng.uniform(0, 2), rng.uniform(-3, 3, (2, 2)))
        got = future_contains(K, q, params)
        want = _sampled_future_contains(K, q, params)
        if got != want:
            # disagreement is only allowed within the sampling resolution
            near = future_contains(K, ConfigEvent(q.t + resolution, q.xs), params)
            assert got and near
        checked += 1
    assert checked == 100


@given(events(N=1, n=3), st.floats(0.0, 2.0))
def test_future_of_atom_equals_point_predicate(p, dt):
    q = ConfigEvent(p.t + dt, p.xs + 0.4)
    assert future_contains(CompactRegion.from_event(p), q, P1) == precedes_point(p, q, P1)


def test_invalid_params_rejected():
    for bad in (dict(c=0), dict(c=-1), dict(n=0), dict(N=0), dict(c=float("inf"))):
        with pytest.raises(ValueError):
            ModelParams(**bad)
    with pytest.raises(ValueError):
        ConfigEvent(float("nan"), [[0.0]])
    with pytest.raises(ValueError):
        causal_mask(0, np.zeros((1, 3)), 1, np.zeros((1, 3)), P1, slack=-1)
