"""Elementary moves on train tracks: split, collapse, shift, collision, comb.

Corner convention at a large branch ``e`` with ends at switches ``u`` and
``v``: walking counterclockwise around each switch starting at ``e``, the
next end is corner ``a`` at ``u`` and corner ``c`` at ``v``; the previous
ends are ``b`` and ``d``.  A right split has winners ``{a, c}``, a left
split has winners ``{b, d}``, and the diagonal of a right split receives
transverse weight ``mu(a) - mu(d)``.  Swapping which end of ``e`` is which
exchanges ``a <-> c`` and ``b <-> d``, so the direction of a split does not
depend on the orientation of ``e``.

All weights are exact rationals; no tolerances appear anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Tuple

from .errors import InvariantViolation, PreconditionError
from .track import LARGE, MIXED, SMALL, End, TrainTrack, Traversal

RIGHT = "R"
LEFT = "L"
COLLISION = "X"


@dataclass(frozen=True)
class SplitRecord:
    """One split: the branch slot it happens at and its direction."""

    slot: int
    direction: str

    def __post_init__(self):
        if self.direction not in (RIGHT, LEFT, COLLISION):
            raise PreconditionError(f"bad split direction {self.direction!r}")

    def __str__(self):
        return f"split {self.slot} {self.direction}"


@dataclass(frozen=True)
class Corners:
    """The four corner ends around a large branch, in convention order."""

    a: End
    b: End
    c: End
    d: End

    def branches(self):
        return self.a[0], self.b[0], self.c[0], self.d[0]


def _rotated_cyclic(track: TrainTrack, sw: int, at: End) -> Tuple[End, ...]:
    cyc = track.ends_cyclic(sw)
    i = cyc.index(at)
    return cyc[i:] + cyc[:i]


def split_corners(track: TrainTrack, e: int) -> Corners:
    """Corner ends of a large branch whose end switches are trivalent."""
    if track.branch_kind(e) != LARGE:
        raise PreconditionError(f"branch {e} is not large")
    (u, _, _), (v, _, _) = track.branch_ends(e)
    if u == v:
        raise PreconditionError(f"large branch {e} is a loop; cannot split")
    for sw in (u, v):
        if track.valence(sw) != 3:
            raise PreconditionError(
                f"switch {sw} at branch {e} is not trivalent; comb first"
            )
    cyc_u = _rotated_cyclic(track, u, (e, 0))
    cyc_v = _rotated_cyclic(track, v, (e, 1))
    return Corners(a=cyc_u[1], b=cyc_u[2], c=cyc_v[1], d=cyc_v[2])


def _transport_marks(
    old: TrainTrack,
    new_switches,
    allows_bigons,
    destroyed: Iterable[int] = (),
    mark_overrides: Optional[Dict[Traversal, Traversal]] = None,
) -> TrainTrack:
    """Rebuild a track, carrying puncture and point marks across a move.

    Marks are re-anchored to a boundary traversal of their region whose
    branch survives the move untouched; such a traversal always exists for
    the local moves implemented here.
    """
    destroyed = frozenset(destroyed)
    mark_overrides = mark_overrides or {}

    def rep(t: Traversal) -> Traversal:
        region = old.region_of(t)
        for cand in region.traversals:
            if cand[0] not in destroyed:
                return cand
        raise InvariantViolation("region has no surviving boundary branch")

    punct = {rep(t) for t in old.punctures}
    marks = set()
    for t in old.marked_points:
        if t in mark_overrides:
            marks.add(mark_overrides[t])
        elif t[0] in destroyed:
            marks.add(rep(t))
        else:
            marks.add(t)
    return TrainTrack(new_switches, allows_bigons, punct, marks)


def split(track: TrainTrack, e: int, direction: str) -> Tuple[TrainTrack, Dict[int, int]]:
    """Split at a large branch; the slot of ``e`` becomes the diagonal.

    Returns the split track and the branch bijection (identity on labels,
    with ``e`` naming the diagonal).
    """
    if direction not in (RIGHT, LEFT):
        raise PreconditionError("split direction must be R or L")
    corners = split_corners(track, e)
    (u, _, _), (v, _, _) = track.branch_ends(e)
    a, b, c, d = corners.a, corners.b, corners.c, corners.d

    switches = dict(track.switches)
    if direction == RIGHT:
        switches[u] = ((a,), (d, (e, 0)))
        switches[v] = ((c,), (b, (e, 1)))
    else:
        switches[u] = ((b,), ((e, 0), c))
        switches[v] = ((d,), ((e, 1), a))

    overrides = {}
    if any(t[0] == e for t in track.marked_points):
        losers = {b[0], d[0]} if direction == RIGHT else {a[0], c[0]}
        overrides = _diagonal_mark_overrides(track, e, losers)
    new = _transport_marks(
        track, switches, track.allows_bigons, destroyed={e}, mark_overrides=overrides
    )
    return new, {br: br for br in track.branches}


def _diagonal_mark_overrides(track, e, losers):
    """A marked point on the split branch moves to the losing branch that
    runs along the same region side."""
    overrides = {}
    for t in track.marked_points:
        if t[0] != e:
            continue
        region = track.region_of(t)
        candidates = [c for c in region.traversals if c[0] in losers]
        if not candidates:
            raise InvariantViolation("no losing branch on the marked side")
        overrides[t] = min(candidates)
    return overrides


def collapse(track: TrainTrack, s: int) -> Optional[Tuple[TrainTrack, Dict[int, int]]]:
    """Undo a split at its diagonal; ``None`` when the configuration cannot
    arise from a split (the non-collapsible small-branch pattern)."""
    if track.branch_kind(s) != SMALL:
        raise PreconditionError(f"branch {s} is not small")
    (w1, side1, _), (w2, side2, _) = track.branch_ends(s)
    if w1 == w2:
        return None
    if track.valence(w1) != 3 or track.valence(w2) != 3:
        return None

    def end_data(sw, side, end):
        slots = track.side_slots(sw, side)
        if len(slots) != 2:
            return None
        partner = slots[0] if slots[1] == end else slots[1]
        lone_side = track.side_slots(sw, 1 - side)
        if len(lone_side) != 1:
            return None
        cyc = _rotated_cyclic(track, sw, end)
        chirality = cyc[1] == partner  # next ccw end after s is its side partner
        return partner, lone_side[0], chirality

    d1 = end_data(w1, side1, (s, 0))
    d2 = end_data(w2, side2, (s, 1))
    if d1 is None or d2 is None:
        return None
    partner1, lone1, chir1 = d1
    partner2, lone2, chir2 = d2
    if chir1 != chir2:
        return None  # Figure-F-style small branch: not a diagonal

    switches = dict(track.switches)
    if chir1:  # was a right split: a=lone1 d=partner1 c=lone2 b=partner2
        switches[w1] = (((s, 0),), (partner2, lone1))
        switches[w2] = (((s, 1),), (partner1, lone2))
    else:  # was a left split: b=lone1 c=partner1 d=lone2 a=partner2
        switches[w1] = (((s, 0),), (lone1, partner2))
        switches[w2] = (((s, 1),), (lone2, partner1))
    new = _transport_marks(track, switches, track.allows_bigons, destroyed={s})
    return new, {br: br for br in track.branches}


def collide(track: TrainTrack, e: int, direction: str = RIGHT) -> Tuple[TrainTrack, Dict[int, int]]:
    """Split at ``e`` then shrink the diagonal: one fused 4-valent switch.

    The result does not depend on the direction; it is accepted so collision
    records can be replayed uniformly.
    """
    corners = split_corners(track, e)
    (u, _, _), (v, _, _) = track.branch_ends(e)
    u_opp = track.side_slots(u, 1 - track.slot((e, 0))[1])
    v_opp = track.side_slots(v, 1 - track.slot((e, 1))[1])
    switches = {
        sw: sides for sw, sides in track.switches.items() if sw not in (u, v)
    }
    switches[u] = (tuple(reversed(u_opp)), tuple(v_opp))
    new = _transport_marks(track, switches, track.allows_bigons, destroyed={e})
    bij = {br: br for br in track.branches if br != e}
    return new, bij


def shift(track: TrainTrack, b: int) -> Tuple[TrainTrack, Dict[int, int]]:
    """Shift along a mixed branch; carrying in both directions, invertible."""
    if track.branch_kind(b) != MIXED:
        raise PreconditionError(f"branch {b} is not mixed")
    large_idx = 0 if track.end_is_large((b, 0)) else 1
    eL: End = (b, large_idx)
    eS: End = (b, 1 - large_idx)
    u = track.slot(eL)[0]
    v = track.slot(eS)[0]
    if u == v:
        raise PreconditionError(f"mixed branch {b} is a loop; cannot shift")
    if track.valence(u) != 3 or track.valence(v) != 3:
        raise PreconditionError("shift requires trivalent switches")

    small_side = track.side_slots(v, track.slot(eS)[1])
    z = small_side[0] if small_side[1] == eS else small_side[1]

    # fuse the corridor: cyclic at u with b replaced by (cyclic at v after b)
    cyc_u = _rotated_cyclic(track, u, eL)
    cyc_v = _rotated_cyclic(track, v, eS)
    fused = list(cyc_v[1:]) + list(cyc_u[1:])  # cyclic, 4 ends
    zi = fused.index(z)
    u_slots = set(cyc_u[1:])
    before, after = fused[zi - 1], fused[(zi + 1) % 4]
    if (before in u_slots) == (after in u_slots):
        raise InvariantViolation("shift neighbor is not adjacent to one far slot")
    if after in u_slots:
        group = (z, after)
        rest_start = (zi + 2) % 4
    else:
        group = (before, z)
        rest_start = (zi + 1) % 4
    rest = (fused[rest_start % 4], fused[(rest_start + 1) % 4])

    # near switch keeps the previously lone slot alone; the corridor's small
    # end shares the other side with the remaining far slot
    corr_small = (b, 1 - large_idx)
    if rest[0] in u_slots:
        near_sides = ((rest[1],), (rest[0], corr_small))
    else:
        near_sides = ((rest[0],), (corr_small, rest[1]))

    switches = {sw: sides for sw, sides in track.switches.items() if sw not in (u, v)}
    switches[u] = (((b, large_idx),), (group[1], group[0]))
    switches[v] = near_sides
    new = _transport_marks(track, switches, track.allows_bigons, destroyed={b})
    return new, {br: br for br in track.branches}


def comb_step(
    track: TrainTrack, sw: int, nu: Mapping[int, Fraction]
) -> Tuple[TrainTrack, Dict[int, Fraction], int]:
    """One combing step at a switch of valence >= 4.

    Moves the extremal slot of the wider side onto its same-side neighbour,
    splitting that neighbour at a fresh switch.  ``nu`` is a positive
    tangential measure; the slack is taken at the midpoint of the admissible
    interval, and the returned measure is again positive with strict trigon
    inequalities whenever the input was.  Returns the new track, the new
    measure, and the id of the fresh corridor branch.
    """
    if track.valence(sw) < 4:
        raise PreconditionError(f"switch {sw} has valence < 4")
    side_a, side_b = track.switches[sw]

    candidates = []
    for side_idx, slots in ((0, side_a), (1, side_b)):
        if len(slots) < 2:
            continue
        if len(slots) < max(len(side_a), len(side_b)):
            continue
        for mover, carrier, at_head in (
            (slots[0], slots[1], True),
            (slots[-1], slots[-2], False),
        ):
            key = (tuple(sorted((mover[0], carrier[0]))), mover, carrier)
            candidates.append((key, side_idx, mover, carrier, at_head))
    candidates.sort(key=lambda item: item[0])
    _, side_idx, mover, carrier, at_head = candidates[0]
    slots = track.switches[sw][side_idx]

    # admissible slack: below every weight on the combed side, and below the
    # trigon defect at the cusp between the moved pair
    bound = min(nu[end[0]] for end in slots)
    cyc = track.ends_cyclic(sw)
    pair = {mover, carrier}
    later = next(
        cyc[(i + 1) % len(cyc)]
        for i in range(len(cyc))
        if {cyc[i], cyc[(i + 1) % len(cyc)]} == pair
    )
    region = track.region_of((later[0], 1 - later[1]))
    if region.cusps == 3 and not region.punctured:
        sides = region.sides
        # locate the cusp position of this corner among the region's sides
        n = len(region.traversals)
        starts = [i for i in range(n) if region.cusp_before[i]]
        t_in = (later[0], 1 - later[1])
        pos = region.traversals.index(t_in)
        j = starts.index(pos)
        e1 = sides[j]
        e2 = sides[j - 1]
        e3 = sides[(j + 1) % 3]
        w = lambda side: sum(nu[br] for br, _ in side)
        defect = Fraction(w(e1) + w(e2) - w(e3), 2)
        bound = min(bound, defect)
    if bound <= 0:
        raise InvariantViolation("no admissible combing slack; measure not strict")
    q = Fraction(bound, 2)

    c1 = max(track.branches) + 1
    w_new = max(track.switches) + 1
    if at_head:
        new_side = ((c1, 0),) + slots[2:]
    else:
        new_side = slots[:-2] + ((c1, 0),)
    switches = dict(track.switches)
    sides = list(switches[sw])
    sides[side_idx] = new_side
    switches[sw] = tuple(sides)
    far_pair = (mover, carrier) if at_head else (carrier, mover)
    switches[w_new] = (((c1, 1),), far_pair)

    new = _transport_marks(track, switches, track.allows_bigons, destroyed=set())
    nu2 = dict(nu)
    nu2[mover[0]] = nu2[mover[0]] - q
    nu2[carrier[0]] = nu2[carrier[0]] - q
    nu2[c1] = q
    return new, nu2, c1


def comb_to_generic(
    track: TrainTrack, nu: Mapping[int, Fraction]
) -> Tuple[TrainTrack, Dict[int, Fraction]]:
    """Iterate combing steps until every switch has valence at most three.

    Terminates in exactly the excessive total valence many steps.
    """
    nu = dict(nu)
    budget = sum(max(track.valence(sw) - 3, 0) for sw in track.switches)
    for _ in range(budget):
        big = [sw for sw in track.switches if track.valence(sw) >= 4]
        if not big:
            break
        track, nu, _ = comb_step(track, min(big), nu)
    if any(track.valence(sw) >= 4 for sw in track.switches):
        raise InvariantViolation("combing failed to terminate within its budget")
    return track, nu


def excessive_valence(track: TrainTrack) -> int:
    return sum(max(track.valence(sw) - 3, 0) for sw in track.switches)


# ----------------------------------------------------------------------
# measure transport


def mu_direction(track: TrainTrack, mu: Mapping[int, Fraction], e: int) -> str:
    """The unique split direction at ``e`` compatible with the measure."""
    if mu[e] <= 0:
        raise PreconditionError(f"branch {e} is not in the positive subtrack")
    corners = split_corners(track, e)
    a, _, _, d = corners.branches()
    if mu[a] > mu[d]:
        return RIGHT
    if mu[a] < mu[d]:
        return LEFT
    return COLLISION


def transport_split_weights(
    track: TrainTrack, mu: Mapping[int, Fraction], rec: SplitRecord
) -> Dict[int, Fraction]:
    """Push a switch-consistent weight vector through one split record.

    Winners and corners keep their weights; the diagonal receives the
    corner difference.  Raises when the direction is incompatible.
    """
    corners = split_corners(track, rec.slot)
    a, b, c, d = corners.branches()
    out = dict(mu)
    if rec.direction == RIGHT:
        if mu[a] < mu[d]:
            raise PreconditionError(
                f"right split needs mu(a) >= mu(d); got {mu[a]} < {mu[d]}"
            )
        out[rec.slot] = mu[a] - mu[d]
    elif rec.direction == LEFT:
        if mu[d] < mu[a]:
            raise PreconditionError(
                f"left split needs mu(d) >= mu(a); got {mu[d]} < {mu[a]}"
            )
        out[rec.slot] = mu[d] - mu[a]
    else:
        if mu[a] != mu[d]:
            raise PreconditionError("collision needs equal corner weights")
        del out[rec.slot]
    return out


def transport_shift_weights(
    shifted: TrainTrack, mu: Mapping[int, Fraction], corridor: int
) -> Dict[int, Fraction]:
    """Weights after a shift: only the corridor needs recomputing."""
    out = dict(mu)
    sw = shifted.slot((corridor, 0))[0]
    side = shifted.slot((corridor, 0))[1]
    other = shifted.side_slots(sw, 1 - side)
    out[corridor] = sum(out[b] for b, _ in other)
    return out


def transport_comb_weights(
    mu: Mapping[int, Fraction], mover: int, carrier: int, corridor: int
) -> Dict[int, Fraction]:
    out = dict(mu)
    out[corridor] = out[mover] + out[carrier]
    return out


def apply_record(track: TrainTrack, rec: SplitRecord) -> TrainTrack:
    """Replay one record, splitting or colliding as directed."""
    if rec.direction == COLLISION:
        return collide(track, rec.slot)[0]
    return split(track, rec.slot, rec.direction)[0]


def replay(track: TrainTrack, records) -> TrainTrack:
    for rec in records:
        track = apply_record(track, rec)
    return track
