"""Transverse and tangential measures, decided by exact linear feasibility.

Positivity is encoded as ``x >= 1``: all constraint systems here are
homogeneous, so a strictly positive solution exists iff one with every
weight at least one does.
"""

from __future__ import annotations

import math
from collections.abc import Mapping as MappingABC
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, Mapping, Optional, Tuple

from .errors import PreconditionError
from .moves import SplitRecord, apply_record, transport_split_weights
from .rational_lp import ExactLP, enumerate_vertices
from .track import Subtrack, TrainTrack, subtrack as extract_subtrack


class _BranchWeights(MappingABC):
    """Common base: an exact weight per branch of a fixed track."""

    def __init__(self, track: TrainTrack, weights: Mapping[int, Fraction]):
        self.track = track
        self.weights: Dict[int, Fraction] = {
            b: Fraction(weights[b]) for b in track.branches
        }
        if set(weights) - set(track.branches):
            raise PreconditionError("weights on unknown branches")
        if any(v < 0 for v in self.weights.values()):
            raise PreconditionError("weights must be nonnegative")

    def __getitem__(self, b: int) -> Fraction:
        return self.weights[b]

    def __iter__(self) -> Iterator[int]:
        return iter(self.track.branches)

    def __len__(self) -> int:
        return len(self.weights)

    def is_positive(self) -> bool:
        return all(v > 0 for v in self.weights.values())

    def scaled(self, factor) -> "_BranchWeights":
        return type(self)(
            self.track, {b: v * Fraction(factor) for b, v in self.weights.items()}
        )


def switch_residuals(track: TrainTrack, weights: Mapping[int, Fraction]):
    """Per-switch difference between side-a inflow and side-b outflow."""
    out = {}
    for sw, (side_a, side_b) in track.switches.items():
        out[sw] = sum(weights[b] for b, _ in side_a) - sum(
            weights[b] for b, _ in side_b
        )
    return out


class TransverseMeasure(_BranchWeights):
    """Nonnegative branch weights satisfying every switch condition."""

    def __init__(self, track, weights):
        super().__init__(track, weights)
        bad = {sw: r for sw, r in switch_residuals(track, self).items() if r != 0}
        if bad:
            raise PreconditionError(f"switch conditions violated at {sorted(bad)}")


class TangentialMeasure(_BranchWeights):
    """Nonnegative branch weights with bigon equalities and trigon triangle
    inequalities, side weights counted with multiplicity."""

    def __init__(self, track, weights, require_strict: bool = False):
        super().__init__(track, weights)
        for i, region in enumerate(track.regions()):
            if region.punctured:
                continue
            sides = region.sides
            w = [sum(self.weights[b] for b, _ in s) for s in sides]
            if region.cusps == 2:
                if w[0] != w[1]:
                    raise PreconditionError(f"bigon {i} has unequal sides {w}")
            elif region.cusps == 3:
                for j in range(3):
                    rhs = w[(j + 1) % 3] + w[(j + 2) % 3]
                    if w[j] > rhs or (require_strict and w[j] >= rhs):
                        raise PreconditionError(
                            f"trigon {i} fails the triangle inequality: {w}"
                        )


@dataclass(frozen=True)
class GuideMeasure:
    """A strictly positive transverse measure standing in for a carried
    lamination; integral with weights >= 4 when feeding the dual machinery."""

    base: TransverseMeasure

    def __post_init__(self):
        if not self.base.is_positive():
            raise PreconditionError("guide measures must be positive")

    @property
    def track(self) -> TrainTrack:
        return self.base.track

    def __getitem__(self, b: int) -> Fraction:
        return self.base[b]

    @property
    def integral(self) -> bool:
        return all(v.denominator == 1 for v in self.base.weights.values())

    def require_dual_grade(self) -> None:
        if not self.integral or min(self.base.weights.values()) < 4:
            raise PreconditionError("dual construction needs integral weights >= 4")


# ----------------------------------------------------------------------
# feasibility


def _switch_system(track: TrainTrack):
    idx = {b: j for j, b in enumerate(track.branches)}
    rows = []
    for sw, (side_a, side_b) in sorted(track.switches.items()):
        coeffs: Dict[int, Fraction] = {}
        for b, _ in side_a:
            coeffs[idx[b]] = coeffs.get(idx[b], Fraction(0)) + 1
        for b, _ in side_b:
            coeffs[idx[b]] = coeffs.get(idx[b], Fraction(0)) - 1
        rows.append(coeffs)
    return idx, rows


def positive_transverse(track: TrainTrack) -> Optional[TransverseMeasure]:
    """A strictly positive switch-consistent measure, or None.

    Solves the homogeneous system with every weight shifted down by one, so
    the witness is deterministic and rational.
    """
    idx, rows = _switch_system(track)
    lp = ExactLP(len(idx))
    for coeffs in rows:
        rhs = -sum(coeffs.values())  # x = 1 + y
        lp.add_eq(coeffs, rhs)
    y = lp.feasible_point()
    if y is None:
        return None
    weights = {b: 1 + y[j] for b, j in idx.items()}
    return TransverseMeasure(track, weights)


def _tangential_constraints(track: TrainTrack, idx):
    eqs = []
    tris = []
    for region in track.regions():
        if region.punctured:
            continue
        sides = region.sides
        side_coeffs = []
        for s in sides:
            coeffs: Dict[int, Fraction] = {}
            for b, _ in s:
                coeffs[idx[b]] = coeffs.get(idx[b], Fraction(0)) + 1
            side_coeffs.append(coeffs)
        if region.cusps == 2:
            diff = dict(side_coeffs[0])
            for j, v in side_coeffs[1].items():
                diff[j] = diff.get(j, Fraction(0)) - v
            eqs.append(diff)
        elif region.cusps == 3:
            for j in range(3):
                row = dict(side_coeffs[j])
                for other in (side_coeffs[(j + 1) % 3], side_coeffs[(j + 2) % 3]):
                    for col, v in other.items():
                        row[col] = row.get(col, Fraction(0)) - v
                tris.append(row)  # row . x <= 0
    return eqs, tris


def positive_tangential(
    track: TrainTrack, strict_trigons: bool = False
) -> Optional[TangentialMeasure]:
    """A strictly positive tangential measure; with ``strict_trigons`` the
    trigon inequalities must hold strictly (witnessed by a maximized slack)."""
    idx, _ = _switch_system(track)
    eqs, tris = _tangential_constraints(track, idx)
    n = len(idx)
    slack = n  # one shared slack variable in strict mode
    lp = ExactLP(n + 1 if strict_trigons else n)
    shift = lambda coeffs: -sum(coeffs.values())  # x = 1 + y substitution
    for coeffs in eqs:
        lp.add_eq(coeffs, shift(coeffs))
    for coeffs in tris:
        row = dict(coeffs)
        if strict_trigons:
            row[slack] = Fraction(1)
        lp.add_le(row, shift(coeffs))
    if not strict_trigons:
        y = lp.feasible_point()
        if y is None:
            return None
        weights = {b: 1 + y[j] for b, j in idx.items()}
        return TangentialMeasure(track, weights)
    lp.add_le({slack: Fraction(-1)}, Fraction(0))  # t >= 0
    lp.add_le({slack: Fraction(1)}, Fraction(1))  # t <= 1
    opt = lp.maximize({slack: Fraction(1)})
    if opt is None:
        return None
    value, y = opt
    if value <= 0:
        return None
    weights = {b: 1 + y[j] for b, j in idx.items()}
    return TangentialMeasure(track, weights, require_strict=True)


# oracle versions, used to cross-check the simplex


def oracle_positive_transverse(track: TrainTrack) -> bool:
    idx, rows = _switch_system(track)
    n = len(idx)
    eqs = []
    for coeffs in rows:
        row = [Fraction(0)] * n
        for j, v in coeffs.items():
            row[j] = v
        eqs.append((row, Fraction(0)))
    ges = []
    for j in range(n):
        row = [Fraction(0)] * n
        row[j] = Fraction(1)
        ges.append((row, Fraction(1)))
    return bool(enumerate_vertices(n, eqs, ges))


def oracle_positive_tangential(track: TrainTrack, strict_trigons: bool = False) -> bool:
    idx, _ = _switch_system(track)
    eqs_c, tris_c = _tangential_constraints(track, idx)
    n = len(idx)
    total = n + 1 if strict_trigons else n

    def expand(coeffs, extra=None):
        row = [Fraction(0)] * total
        for j, v in coeffs.items():
            row[j] = v
        if extra is not None:
            row[n] = extra
        return row

    eqs = [(expand(c), Fraction(0)) for c in eqs_c]
    ges = []
    for c in tris_c:  # c.x <= 0 becomes (-c).x >= 0, minus slack in strict mode
        row = expand({j: -v for j, v in c.items()}, Fraction(-1) if strict_trigons else None)
        ges.append((row, Fraction(0)))
    for j in range(n):
        row = [Fraction(0)] * total
        row[j] = Fraction(1)
        ges.append((row, Fraction(1)))
    if not strict_trigons:
        return bool(enumerate_vertices(n, eqs, ges))
    row_t = [Fraction(0)] * total
    row_t[n] = Fraction(1)
    ges.append((row_t[:], Fraction(0)))
    row_cap = [Fraction(0)] * total
    row_cap[n] = Fraction(-1)
    ges.append((row_cap, Fraction(-1)))  # t <= 1
    verts = enumerate_vertices(total, eqs, ges)
    return any(v[n] > 0 for v in verts)


# ----------------------------------------------------------------------
# derived notions


def positive_subtrack(track: TrainTrack, mu: Mapping[int, Fraction]) -> Subtrack:
    """The recurrent subtrack spanned by the branches of positive mass."""
    support = [b for b in track.branches if mu[b] > 0]
    if not support:
        raise PreconditionError("measure has empty support")
    return extract_subtrack(track, support)


def is_maximal(track: TrainTrack) -> bool:
    return all(
        (r.punctured and r.cusps == 1) or (not r.punctured and r.cusps == 3)
        for r in track.regions()
    )


@dataclass(frozen=True)
class CompletenessSurrogate:
    """Checkable stand-in for completeness: maximal, generic and birecurrent.

    Whether this conjunction coincides with carrying a complete lamination
    is not decided here; the report is explicitly a surrogate.
    """

    maximal: bool
    generic: bool
    recurrent: bool
    transversely_recurrent: bool
    label: str = "surrogate"

    @property
    def all_flags(self) -> bool:
        return self.maximal and self.generic and self.recurrent and self.transversely_recurrent


def completeness_surrogate(track: TrainTrack) -> CompletenessSurrogate:
    return CompletenessSurrogate(
        maximal=is_maximal(track),
        generic=track.is_generic(),
        recurrent=positive_transverse(track) is not None,
        transversely_recurrent=positive_tangential(track) is not None,
    )


def transport_transverse(mu: TransverseMeasure, rec: SplitRecord) -> TransverseMeasure:
    """Push a transverse measure through one split record."""
    new_weights = transport_split_weights(mu.track, mu, rec)
    new_track = apply_record(mu.track, rec)
    return TransverseMeasure(new_track, new_weights)


def integral_guide(track: TrainTrack, minimum: int = 4) -> GuideMeasure:
    """Scale a positive witness to an integral guide with weights >= minimum."""
    mu = positive_transverse(track)
    if mu is None:
        raise PreconditionError("track is not recurrent; no guide exists")
    lcm = 1
    for v in mu.weights.values():
        d = v.denominator
        lcm = lcm * d // math.gcd(lcm, d)
    scaled = {b: v * lcm for b, v in mu.weights.items()}
    lo = min(scaled.values())
    factor = 1
    while lo * factor < minimum:
        factor += 1
    weights = {b: v * factor for b, v in scaled.items()}
    return GuideMeasure(TransverseMeasure(track, weights))
