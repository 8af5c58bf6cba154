"""Causal precedence between finitely supported slice measures.

``μ ⪯ ν`` holds when some coupling of the two measures puts all its mass on
causally related pairs of atoms.  For atomic measures this is a bipartite
transshipment feasibility problem: a source feeds every μ-atom with its
weight, causal pairs carry unbounded flow, and every ν-atom drains its weight
to a sink.  The order holds iff the max flow saturates the unit supply.  When
it does not, the source side of a minimum cut contains a set ``S`` of μ-atoms
whose mass exceeds the ν-mass of their joint causal future, a Hall-type
obstruction.

:func:`oracle_subset_condition` decides the same question by enumerating all
subsets of μ's atoms and is deliberately independent of the flow code.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DimensionError, MeasureError
from .flow import FlowNetwork
from .measures import SliceMeasure
from .spacetime import CompactRegion, causal_edges, causal_mask, future_mask

__all__ = [
    "FLOAT_TOL",
    "Coupling",
    "PrecedenceCertificate",
    "FutureSetCheck",
    "precedes_measures",
    "oracle_subset_condition",
    "check_future_set_condition",
    "check_causal_function_condition",
    "check_cauchy_slice_condition",
    "generate_test_compacts",
    "compose_couplings",
    "check_equivalences",
]

FLOAT_TOL = 1e-9
ORACLE_MAX_ATOMS = 20
# residual capacity treated as zero in float mode
_FLOW_EPS = 1e-15


@dataclass(eq=False)
class Coupling:
    """Sparse transport plan between the atoms of ``mu`` and ``nu``.

    Entry ``k`` moves ``weights[k]`` from ``mu`` atom ``rows[k]`` to ``nu``
    atom ``cols[k]``.
    """

    mu: SliceMeasure
    nu: SliceMeasure
    rows: np.ndarray
    cols: np.ndarray
    weights: np.ndarray
    slack: float = 0.0

    @property
    def exact(self) -> bool:
        return self.weights.dtype == object

    def __len__(self):
        return len(self.weights)

    def dense(self) -> np.ndarray:
        out = np.zeros((len(self.mu), len(self.nu)), dtype=object if self.exact else float)
        if self.exact:
            out[:] = Fraction(0)
        for i, j, w in zip(self.rows, self.cols, self.weights):
            out[i, j] += w
        return out

    def row_sums(self):
        return self._sums(self.rows, len(self.mu))

    def col_sums(self):
        return self._sums(self.cols, len(self.nu))

    def _sums(self, idx, size):
        if self.exact:
            out = [Fraction(0)] * size
            for i, w in zip(idx, self.weights):
                out[i] += w
            return out
        return np.bincount(idx, weights=self.weights, minlength=size)

    def marginal_error(self) -> float:
        """Largest deviation of either marginal from the target weights."""
        r, c = self.row_sums(), self.col_sums()
        if self.exact and self.mu.exact and self.nu.exact:
            dr = max(abs(a - b) for a, b in zip(r, self.mu.weights))
            dc = max(abs(a - b) for a, b in zip(c, self.nu.weights))
            return float(max(dr, dc))
        r = np.asarray([float(x) for x in r])
        c = np.asarray([float(x) for x in c])
        return float(max(np.max(np.abs(r - self.mu.float_weights())),
                         np.max(np.abs(c - self.nu.float_weights()))))

    def is_causal(self) -> bool:
        """Every positive entry joins a causally related pair."""
        if len(self) == 0:
            return True
        mask = causal_mask(self.mu.t, self.mu.positions[self.rows], self.nu.t,
                           self.nu.positions[self.cols], self.mu.params, slack=self.slack)
        return bool(np.all(mask))

    def is_valid(self, tol: float = FLOAT_TOL) -> bool:
        """Nonnegative, causal, and with the right marginals (exactly in exact
        mode, within ``tol`` otherwise)."""
        if any(w < 0 for w in self.weights):
            return False
        if not self.is_causal():
            return False
        err = self.marginal_error()
        return err == 0 if (self.exact and self.mu.exact and self.nu.exact) else err <= tol

    def to_dict(self) -> dict:
        fmt = str if self.exact else float
        return {
            "params": self.mu.params.to_dict(),
            "mu": {"t": self.mu.t, "atoms": self.mu.to_dict()["atoms"]},
            "nu": {"t": self.nu.t, "atoms": self.nu.to_dict()["atoms"]},
            "slack": self.slack,
            "pairs": [{"i": int(i), "j": int(j), "w": fmt(w)}
                      for i, j, w in zip(self.rows, self.cols, self.weights)],
        }

    @classmethod
    def from_dict(cls, d: dict, *, exact: bool = False) -> "Coupling":
        from .spacetime import ModelParams

        params = ModelParams.from_dict(d["params"])
        mu = SliceMeasure._from_atom_list(d["mu"]["t"], d["mu"]["atoms"], params, exact=exact)
        nu = SliceMeasure._from_atom_list(d["nu"]["t"], d["nu"]["atoms"], params, exact=exact)
        pairs = d["pairs"]
        rows = np.array([p["i"] for p in pairs], dtype=np.int64)
        cols = np.array([p["j"] for p in pairs], dtype=np.int64)
        if exact:
            w = np.empty(len(pairs), dtype=object)
            w[:] = [Fraction(p["w"]) if isinstance(p["w"], str) else Fraction(float(p["w"]))
                    for p in pairs]
        else:
            w = np.array([float(Fraction(p["w"])) if isinstance(p["w"], str) else float(p["w"])
                          for p in pairs])
        return cls(mu, nu, rows, cols, w, slack=float(d.get("slack", 0.0)))


@dataclass(eq=False)
class PrecedenceCertificate:
    """Outcome of a precedence decision.

    A positive flow-based verdict carries a ``witness`` coupling; a negative
    one carries ``violator``, indices of μ-atoms ``S`` with
    ``μ(S) > ν(J⁺(S))``, together with both masses.  Oracle verdicts carry no
    witness.
    """

    verdict: bool
    witness: Coupling | None = None
    violator: np.ndarray | None = None
    violator_mu_mass: float | Fraction | None = None
    violator_nu_mass: float | Fraction | None = None
    flow_value: float | Fraction | None = None
    method: str = "flow"

    def __bool__(self):
        return self.verdict

    def violator_region(self, mu: SliceMeasure) -> CompactRegion | None:
        if self.violator is None:
            return None
        return CompactRegion.from_atoms(mu.t, mu.positions[self.violator])

    def to_dict(self) -> dict:
        fmt = (lambda x: str(x) if isinstance(x, Fraction) else (None if x is None else float(x)))
        return {
            "verdict": "yes" if self.verdict else "no",
            "method": self.method,
            "flow_value": fmt(self.flow_value),
            "violator": None if self.violator is None else [int(i) for i in self.violator],
            "violator_mu_mass": fmt(self.violator_mu_mass),
            "violator_nu_mass": fmt(self.violator_nu_mass),
            "witness_pairs": None if self.witness is None else len(self.witness),
        }


def _check_pair(mu: SliceMeasure, nu: SliceMeasure):
    if mu.params != nu.params:
        raise DimensionError(f"parameter mismatch: {mu.params} vs {nu.params}")
    if len(mu) == 0 or len(nu) == 0:
        raise MeasureError("measures must be nonempty")


def _weights_for(mu: SliceMeasure, exact: bool):
    return list(mu.weights) if exact else [float(w) for w in mu.float_weights()]


def _future_union(nbr_sets, subset):
    out = set()
    for a in subset:
        out |= nbr_sets[a]
    return out


def precedes_measures(mu: SliceMeasure, nu: SliceMeasure, *, slack: float = 0.0,
                      tol: float = FLOAT_TOL) -> PrecedenceCertificate:
    """Decide ``μ ⪯ ν`` by max-flow and return a certificate.

    Exact arithmetic is used when both measures are in exact mode; otherwise
    the verdict is positive iff the max flow reaches ``1 - tol``.  ``slack``
    switches to the tolerant point predicate (cone radius ``cΔt + slack``).
    """
    _check_pair(mu, nu)
    exact = mu.exact and nu.exact
    zero = Fraction(0) if exact else 0.0
    big = Fraction(2) if exact else 2.0
    k, m = len(mu), len(nu)
    wa, wb = _weights_for(mu, exact), _weights_for(nu, exact)
    ii, jj = causal_edges(mu.t, mu.positions, nu.t, nu.positions, mu.params, slack=slack)

    net = FlowNetwork(k + m + 2, zero=zero, eps=(0 if exact else _FLOW_EPS))
    src, snk = 0, k + m + 1
    for a in range(k):
        net.add_edge(src, 1 + a, wa[a])
    mid = [net.add_edge(1 + int(a), 1 + k + int(b), big) for a, b in zip(ii, jj)]
    for b in range(m):
        net.add_edge(1 + k + b, snk, wb[b])
    value = net.max_flow(src, snk)

    total = sum(wa, zero)
    ok = (value == total) if exact else (value >= 1.0 - tol)
    if ok:
        fl = [net.flow(e) for e in mid]
        keep = [x > 0 for x in fl]
        rows = ii[np.array(keep, dtype=bool)] if len(ii) else ii
        cols = jj[np.array(keep, dtype=bool)] if len(jj) else jj
        kept = [x for x, z in zip(fl, keep) if z]
        if exact:
            w = np.empty(len(kept), dtype=object)
            w[:] = kept
        else:
            w = np.asarray(kept, dtype=float)
        witness = Coupling(mu, nu, rows, cols, w, slack=slack)
        return PrecedenceCertificate(True, witness=witness, flow_value=value)

    seen = net.reachable(src)
    S = np.array([a for a in range(k) if seen[1 + a]], dtype=np.int64)
    nbr = set(int(b) for a, b in zip(ii, jj) if seen[1 + a])
    mu_S = sum((wa[a] for a in S), zero)
    nu_J = sum((wb[b] for b in sorted(nbr)), zero)
    return PrecedenceCertificate(False, violator=S, violator_mu_mass=mu_S,
                                 violator_nu_mass=nu_J, flow_value=value)


def oracle_subset_condition(mu: SliceMeasure, nu: SliceMeasure, *, slack: float = 0.0,
                            tol: float = FLOAT_TOL,
                            max_atoms: int = ORACLE_MAX_ATOMS) -> PrecedenceCertificate:
    """Decide ``μ ⪯ ν`` by checking ``μ(S) <= ν(J⁺(S))`` for every subset ``S``
    of μ's atoms.

    Subsets are visited by increasing size and, within one size, in
    lexicographic order of atom indices; the first violator is reported.
    Exponential in the atom count, hence the ``max_atoms`` guard.
    """
    _check_pair(mu, nu)
    k = len(mu)
    if k > max_atoms:
        raise MeasureError(f"subset enumeration over {k} atoms exceeds the guard of {max_atoms}")
    exact = mu.exact and nu.exact
    zero = Fraction(0) if exact else 0.0
    wa, wb = _weights_for(mu, exact), _weights_for(nu, exact)
    # pairwise predicate evaluated directly, one pair at a time
    nbr_sets = []
    for a in range(k):
        row = causal_mask(mu.t, mu.positions[a][None], nu.t, nu.positions, mu.params,
                          slack=slack)
        nbr_sets.append({int(b) for b in np.nonzero(row)[0]})
    for size in range(1, k + 1):
        for subset in itertools.combinations(range(k), size):
            mu_S = sum((wa[a] for a in subset), zero)
            nu_J = sum((wb[b] for b in _future_union(nbr_sets, subset)), zero)
            violated = (mu_S > nu_J) if exact else (mu_S - nu_J > tol)
            if violated:
                return PrecedenceCertificate(False, violator=np.array(subset, dtype=np.int64),
                                             violator_mu_mass=mu_S, violator_nu_mass=nu_J,
                                             method="oracle")
    return PrecedenceCertificate(True, method="oracle")


@dataclass(eq=False)
class FutureSetCheck:
    """One instance of ``μ(F) <= ν(F)`` for a future set ``F``."""

    region: object
    mu_mass: float | Fraction
    nu_mass: float | Fraction
    passed: bool
    label: str = field(default="")


def _leq(a, b, tol):
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a <= b
    return float(a) <= float(b) + tol


def check_future_set_condition(mu: SliceMeasure, nu: SliceMeasure,
                               Ks: Sequence[CompactRegion], *,
                               tol: float = 1e-12) -> list[FutureSetCheck]:
    """Compare ``μ(J⁺(K))`` and ``ν(J⁺(K))`` for each test compact ``K``.

    A failure refutes ``μ ⪯ ν``; passing on a finite family proves nothing.
    """
    _check_pair(mu, nu)
    out = []
    for K in Ks:
        if K.t > mu.t:
            raise ValueError("test compacts must not lie after the earlier measure's slice")
        a = mu.mass(future_mask(K, mu.t, mu.positions, mu.params))
        b = nu.mass(future_mask(K, nu.t, nu.positions, nu.params))
        out.append(FutureSetCheck(K, a, b, _leq(a, b, tol), "future-set masses"))
    return out


def _integrate(mu: SliceMeasure, values: np.ndarray):
    if mu.exact:
        return sum((w * int(v) if float(v).is_integer() else w * Fraction(float(v))
                    for w, v in zip(mu.weights, values)), Fraction(0))
    return float(np.dot(mu.weights, values))


def check_causal_function_condition(mu: SliceMeasure, nu: SliceMeasure,
                                    Ks: Sequence[CompactRegion], *,
                                    tol: float = 1e-12) -> list[FutureSetCheck]:
    """Compare ``∫τ dμ`` and ``∫τ dν`` for the indicator ``τ`` of ``J⁺(K)``.

    Such indicators are bounded and nondecreasing along causal curves, so
    they are admissible causal functions; the integrals coincide with the
    future-set masses by construction.
    """
    _check_pair(mu, nu)
    out = []
    for K in Ks:
        if K.t > mu.t:
            raise ValueError("test compacts must not lie after the earlier measure's slice")
        tau_mu = future_mask(K, mu.t, mu.positions, mu.params).astype(float)
        tau_nu = future_mask(K, nu.t, nu.positions, nu.params).astype(float)
        a, b = _integrate(mu, tau_mu), _integrate(nu, tau_nu)
        out.append(FutureSetCheck(K, a, b, _leq(a, b, tol), "causal-function integrals"))
    return out


def check_cauchy_slice_condition(mu: SliceMeasure, nu: SliceMeasure,
                                 times: Sequence[float]) -> list[FutureSetCheck]:
    """Flat-slice version of the Cauchy-surface condition.

    The future of the slice at time ``s`` is ``{t >= s}``, so for slice
    measures the comparison reduces to whole-mass step functions.
    """
    _check_pair(mu, nu)
    out = []
    for s in times:
        a = mu.total() if mu.t >= s else 0 * mu.total()
        b = nu.total() if nu.t >= s else 0 * nu.total()
        out.append(FutureSetCheck(float(s), a, b, _leq(a, b, 0.0), "flat slice"))
    return out


def generate_test_compacts(mu: SliceMeasure, rng: np.random.Generator, *,
                           max_pairs: int = 20, n_boxes: int = 10) -> list[CompactRegion]:
    """Singletons of μ-atoms, unions of pairs, and bounding boxes of random
    atom subsets, all on μ's slice."""
    k = len(mu)
    P = mu.positions
    out = [CompactRegion.from_atoms(mu.t, P[a]) for a in range(k)]
    pairs = list(itertools.combinations(range(k), 2))
    if len(pairs) > max_pairs:
        pick = rng.choice(len(pairs), size=max_pairs, replace=False)
        pairs = [pairs[i] for i in sorted(pick)]
    out += [CompactRegion.from_atoms(mu.t, P[list(p)]) for p in pairs]
    for _ in range(n_boxes):
        size = int(rng.integers(1, k + 1))
        sub = rng.choice(k, size=size, replace=False)
        out.append(CompactRegion.box(mu.t, P[sub].min(axis=0), P[sub].max(axis=0)))
    return out


def compose_couplings(first: Coupling, second: Coupling) -> Coupling:
    """Glue ``μ→ν`` and ``ν→ρ`` plans along ν: each ν-atom's incoming and
    outgoing mass are split independently and proportionally."""
    nu = first.nu
    if not nu.same_as(second.mu, tol=FLOAT_TOL):
        raise MeasureError("couplings do not share the middle measure")
    exact = first.exact and second.exact and nu.exact
    wnu = list(nu.weights) if exact else nu.float_weights()
    out: dict[tuple[int, int], object] = {}
    by_mid: dict[int, list[tuple[int, object]]] = {}
    for j, c, w in zip(second.rows, second.cols, second.weights):
        by_mid.setdefault(int(j), []).append((int(c), w))
    for i, j, w in zip(first.rows, first.cols, first.weights):
        for c, w2 in by_mid.get(int(j), ()):
            key = (int(i), c)
            out[key] = out.get(key, 0) + w * w2 / wnu[int(j)]
    keys = sorted(out)
    rows = np.array([a for a, _ in keys], dtype=np.int64)
    cols = np.array([b for _, b in keys], dtype=np.int64)
    if exact:
        w = np.empty(len(keys), dtype=object)
        w[:] = [out[k_] for k_ in keys]
    else:
        w = np.array([float(out[k_]) for k_ in keys])
    return Coupling(first.mu, second.nu, rows, cols, w, slack=first.slack + second.slack)


def check_equivalences(mu: SliceMeasure, nu: SliceMeasure, rng: np.random.Generator,
                       *, slack: float = 0.0) -> dict:
    """Run every implemented characterisation of ``μ ⪯ ν`` and report whether
    they are mutually consistent."""
    cert = precedes_measures(mu, nu, slack=slack)
    report = {"flow": cert.verdict}
    if len(mu) <= ORACLE_MAX_ATOMS:
        report["subset_oracle"] = oracle_subset_condition(mu, nu, slack=slack).verdict
    Ks = [] if slack else generate_test_compacts(mu, rng)
    if not cert.verdict and cert.violator is not None and not slack:
        Ks.append(cert.violator_region(mu))
    if Ks:
        fs = check_future_set_condition(mu, nu, Ks)
        cf = check_causal_function_condition(mu, nu, Ks)
        report["future_sets_all_pass"] = all(c.passed for c in fs)
        report["causal_functions_all_pass"] = all(c.passed for c in cf)
        report["future_sets_match_functions"] = all(
            a.passed == b.passed and float(a.mu_mass) == float(b.mu_mass)
            and float(a.nu_mass) == float(b.nu_mass) for a, b in zip(fs, cf))
    times = sorted({mu.t, nu.t, 0.5 * (mu.t + nu.t)})
    report["flat_slices_all_pass"] = all(c.passed for c in check_cauchy_slice_condition(mu, nu, times))
    consistent = report.get("subset_oracle", cert.verdict) == cert.verdict
    if cert.verdict:
        consistent &= report.get("future_sets_all_pass", True)
        consistent &= report["flat_slices_all_pass"]
    elif "future_sets_all_pass" in report:
        # the min-cut violator must be refuted by its own future set
        consistent &= not report["future_sets_all_pass"]
    report["consistent"] = bool(consistent)
    return report
