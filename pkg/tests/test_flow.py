import itertools
from fractions import Fraction

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from multicausal.flow import FlowNetwork


def brute_min_cut(n, edges, s, t):
    """Minimum over every s-t vertex bipartition of the crossing capacity."""
    others = [v for v in range(n) if v not in (s, t)]
    best = None
    for r in range(len(others) + 1):
        for side in itertools.combinations(others, r):
            S = set(side) | {s}
            cut = sum((c for u, v, c in edges if u in S and v not in S), Fraction(0))
            best = cut if best is None or cut < best else best
    return best


@st.composite
def networks(draw):
    n = draw(st.integers(2, 7))
    m = draw(st.integers(0, 14))
    edges = []
    for _ in range(m):
        u = draw(st.integers(0, n - 1))
        v = draw(st.integers(0, n - 1))
        if u != v:
            edges.append((u, v, Fraction(draw(st.integers(0, 12)), draw(st.integers(1, 6)))))
    return n, edges


@given(networks())
def test_exact_max_flow_equals_brute_min_cut(net):
    n, edges = net
    g = FlowNetwork(n, zero=Fraction(0))
    ids = [g.add_edge(u, v, c) for u, v, c in edges]
    value = g.max_flow(0, n - 1)
    assert value == brute_min_cut(n, edges, 0, n - 1)
    # flows respect capacities and conserve at inner nodes
    balance = [Fraction(0)] * n
    for e, (u, v, c) in zip(ids, edges):
        f = g.flow(e)
        assert 0 <= f <= c
        balance[u] -= f
        balance[v] += f
    assert all(b == 0 for b in balance[1:-1])
    assert balance[n - 1] == value
    # the residual-reachable side is a minimum cut
    seen = g.reachable(0)
    assert not seen[n - 1] or value == 0 and not edges
    cut = sum((c for u, v, c in edges if seen[u] and not seen[v]), Fraction(0))
    assert cut == value


def test_float_network_matches_exact():
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = 6
        edges = [(int(u), int(v), Fraction(int(rng.integers(0, 10)), 7))
                 for u, v in rng.integers(0, n, (12, 2)) if u != v]
        ge = FlowNetwork(n, zero=Fraction(0))
        gf = FlowNetwork(n, zero=0.0, eps=1e-15)
        for u, v, c in edges:
            ge.add_edge(u, v, c)
            gf.add_edge(u, v, float(c))
        assert abs(float(ge.max_flow(0, n - 1)) - gf.max_flow(0, n - 1)) < 1e-12


def test_huge_integer_capacities_are_not_truncated():
    g = FlowNetwork(3, zero=0)
    g.add_edge(0, 1, 10**30 + 7)
    g.add_edge(1, 2, 10**30 + 5)
    assert g.max_flow(0, 2) == 10**30 + 5
