"""Turn density snapshots into atomic slice measures and check that
consecutive slices are causally ordered."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import MeasureError
from ..measures import Evolution, SliceMeasure
from ..order import PrecedenceCertificate, precedes_measures
from ..spacetime import ModelParams
from .state import DensitySnapshot

__all__ = [
    "MAX_CERT_ATOMS",
    "support_mask",
    "snapshot_to_measure",
    "escaped_mass",
    "PairCheck",
    "CertificationReport",
    "certify_causal_evolution",
]

MAX_CERT_ATOMS = 4096
REPORT_ATOMS = 64


def support_mask(snap: DensitySnapshot, eps_support: float) -> np.ndarray:
    """Cells kept after discarding the lightest cells of total mass ≤ ``eps_support``."""
    w = snap.cell_masses().ravel()
    total = w.sum()
    if not total > 0:
        raise MeasureError(f"snapshot at t={snap.time} carries no mass")
    order = np.argsort(w, kind="stable")
    tail = np.cumsum(w[order]) / total
    keep = np.ones(w.size, dtype=bool)
    keep[order[tail <= eps_support]] = False
    keep &= w > 0
    if not keep.any():
        raise MeasureError(f"empty support at t={snap.time} for eps_support={eps_support}")
    return keep.reshape(snap.density.shape)


def _block_ids(snap: DensitySnapshot, mask: np.ndarray, block: int) -> np.ndarray:
    idx = np.array(np.nonzero(mask)).T // block
    mb = snap.m // block
    return np.ravel_multi_index(idx.T, (mb,) * idx.shape[1])


def _count_blocks(snap, mask, block):
    return len(np.unique(_block_ids(snap, mask, block)))


def snapshot_to_measure(snap: DensitySnapshot, mask: np.ndarray, block: int = 1) -> SliceMeasure:
    """Atomic measure with one atom per occupied block of ``block^(nN)`` cells.

    Each atom sits at the mass centroid of the kept cells in its block and
    carries their total mass, renormalised to one.
    """
    w = snap.cell_masses()[mask]
    ids = _block_ids(snap, mask, block)
    uniq, inv = np.unique(ids, return_inverse=True)
    coords = snap.axis()[np.array(np.nonzero(mask)).T]
    mass = np.bincount(inv, weights=w)
    cent = np.stack([np.bincount(inv, weights=w * coords[:, d]) for d in range(coords.shape[1])],
                    axis=1) / mass[:, None]
    params = ModelParams(c=snap.c, n=snap.n, N=snap.N)
    return SliceMeasure(snap.time, cent.reshape(-1, snap.N, snap.n), mass / mass.sum(), params,
                        normalize=True)


def _cone_offsets(radius_cells: float, n: int) -> list[tuple[int, ...]]:
    """Integer offsets ``d`` whose cell is within ``radius`` of the unit box at 0."""
    r = int(np.floor(radius_cells + 0.5))
    out = []
    for d in itertools.product(range(-r, r + 1), repeat=n):
        gap = sum(max(0.0, abs(x) - 0.5) ** 2 for x in d)
        if gap <= radius_cells**2:
            out.append(d)
    return out


def _shift_or(mask: np.ndarray, axes: Sequence[int], offsets) -> np.ndarray:
    out = np.zeros_like(mask)
    m = mask.shape[0]
    for d in offsets:
        src = [slice(None)] * mask.ndim
        dst = [slice(None)] * mask.ndim
        for ax, s in zip(axes, d):
            if s >= 0:
                src[ax], dst[ax] = slice(0, m - s), slice(s, m)
            else:
                src[ax], dst[ax] = slice(-s, m), slice(0, m + s)
        out[tuple(dst)] |= mask[tuple(src)]
    return out


def escaped_mass(earlier: DensitySnapshot, later: DensitySnapshot, mask: np.ndarray) -> float:
    """Fraction of ``later``'s mass outside the causal future of the cells in ``mask``.

    The future is taken with the exact cone: a later cell counts as reached
    if its centre lies within ``c Δt`` of some earlier cell, particle by
    particle.
    """
    dt = later.time - earlier.time
    radius = later.c * dt / earlier.spacing
    offsets = _cone_offsets(radius, earlier.n)
    reach = mask
    for j in range(earlier.N):
        reach = _shift_or(reach, range(j * earlier.n, (j + 1) * earlier.n), offsets)
    w = later.cell_masses()
    return float(w[~reach].sum() / w.sum())


@dataclass(eq=False)
class PairCheck:
    i: int
    j: int
    kind: str
    certificate: PrecedenceCertificate
    escaped: float | None = None

    @property
    def verdict(self) -> bool:
        return bool(self.certificate.verdict)

    def to_dict(self) -> dict:
        cert = self.certificate
        out = {
            "pair": [self.i, self.j],
            "kind": self.kind,
            "verdict": "yes" if self.verdict else "no",
            "flow_value": float(cert.flow_value) if cert.flow_value is not None else None,
        }
        if self.escaped is not None:
            out["escaped_mass"] = self.escaped
        if not self.verdict:
            atoms = [int(a) for a in cert.violator]
            out["violator_size"] = len(atoms)
            out["violator_atoms"] = atoms[:REPORT_ATOMS]
            out["violator_mu_mass"] = float(cert.violator_mu_mass)
            out["violator_nu_mass"] = float(cert.violator_nu_mass)
        return out


@dataclass(eq=False)
class CertificationReport:
    evolution: Evolution
    checks: list[PairCheck]
    slack_radius: float
    block: int
    eps_support: float
    atom_spacing: float
    dt: float
    tol: float
    meta: dict = field(default_factory=dict)

    @property
    def consecutive(self) -> list[PairCheck]:
        return [c for c in self.checks if c.kind == "consecutive"]

    @property
    def anchored(self) -> list[PairCheck]:
        return [c for c in self.checks if c.kind == "anchored"]

    @property
    def consecutive_ok(self) -> bool:
        return all(c.verdict for c in self.consecutive)

    @property
    def verdict(self) -> bool:
        return all(c.verdict for c in self.checks)

    def failures(self) -> list[PairCheck]:
        return [c for c in self.checks if not c.verdict]

    def escaped(self) -> np.ndarray:
        return np.array([c.escaped for c in self.consecutive])

    def max_escaped(self) -> float:
        e = self.escaped()
        return float(e.max()) if e.size else 0.0

    def to_dict(self) -> dict:
        first = self.failures()[0] if self.failures() else None
        return {
            "verdict": "yes" if self.verdict else "no",
            "consecutive_verdict": "yes" if self.consecutive_ok else "no",
            "slack_radius": self.slack_radius,
            "atom_spacing": self.atom_spacing,
            "block": self.block,
            "dt": self.dt,
            "eps_support": self.eps_support,
            "tolerance": self.tol,
            "atoms_per_slice": [len(s) for s in self.evolution],
            "max_escaped_mass": self.max_escaped(),
            "first_violation": first.to_dict() if first else None,
            "pairs": [c.to_dict() for c in self.checks],
        }


def certify_causal_evolution(snaps: Sequence[DensitySnapshot], eps_support: float = 1e-3,
                             slack: float = 1.0, *, dt: float | None = None,
                             anchored: bool = True, tol: float | None = None,
                             max_atoms: int = MAX_CERT_ATOMS) -> CertificationReport:
    """Check causal order between discretised density snapshots.

    Every snapshot loses its lightest cells up to ``eps_support`` of the
    mass, and cells are merged into blocks (one factor shared by all
    snapshots) until each has at most ``max_atoms`` atoms.  Pairs are
    compared with the tolerant predicate, cone radius widened by
    ``slack * (block width + c dt)``.  ``dt`` defaults to the smallest
    snapshot spacing.  A pair passes when a causal coupling carries all
    but ``tol`` of the mass; ``tol`` defaults to ``eps_support`` because
    the two truncated supports may disagree by that much.

    Besides consecutive pairs, ``anchored=True`` also compares the first
    snapshot with every later one.  The widening does not grow with the
    time gap there, so a drift faster than light that hides inside the
    per-step tolerance eventually shows up.
    """
    snaps = list(snaps)
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots")
    for a, b in zip(snaps, snaps[1:]):
        if not b.time > a.time:
            raise ValueError("snapshots must be strictly time-ordered")
        if not a.same_grid(b):
            raise ValueError("snapshots must share a grid")
    gaps = np.diff([s.time for s in snaps])
    dt = float(gaps.min()) if dt is None else float(dt)
    masks = [support_mask(s, eps_support) for s in snaps]
    block = 1
    while max(_count_blocks(s, k, block) for s, k in zip(snaps, masks)) > max_atoms:
        block *= 2
        if snaps[0].m % block:
            raise MeasureError("cannot reduce the support below the atom cap")
    measures = [snapshot_to_measure(s, k, block) for s, k in zip(snaps, masks)]
    width = snaps[0].spacing * block
    eta = slack * (width + snaps[0].c * dt)
    tol = eps_support if tol is None else float(tol)

    checks = []
    for k in range(len(snaps) - 1):
        cert = precedes_measures(measures[k], measures[k + 1], slack=eta, tol=tol)
        esc = escaped_mass(snaps[k], snaps[k + 1], masks[k])
        checks.append(PairCheck(k, k + 1, "consecutive", cert, esc))
    if anchored:
        for k in range(2, len(snaps)):
            cert = precedes_measures(measures[0], measures[k], slack=eta, tol=tol)
            checks.append(PairCheck(0, k, "anchored", cert))
    return CertificationReport(Evolution(measures), checks, eta, block, eps_support, width, dt,
                               tol)
