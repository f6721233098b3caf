"""Combinatorial train tracks and bigon tracks on oriented surfaces.

A track is stored purely as ribbon data: every switch carries two ordered
sides of half-branch slots, and the counterclockwise cyclic order of the
ends around a switch is side A in list order followed by side B reversed.
Corners between cyclically consecutive ends on the *same* side are cusps of
complementary regions; the two side-to-side corners are smooth passages.

No geometry is stored.  Complementary regions are recovered by tracing the
ribbon structure; punctures are marks on regions, carried internally as a
boundary traversal of the marked region.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import PreconditionError, StructuralError
from .surface import Surface

# (branch id, end index 0|1): one endpoint of a branch
End = Tuple[int, int]
# (switch id, side 0|1, position): where an end sits
SlotRef = Tuple[int, int, int]
# (branch id, direction): walking the branch with the region on the left;
# direction 0 runs from end 0 to end 1
Traversal = Tuple[int, int]

LARGE = "large"
SMALL = "small"
MIXED = "mixed"


def _other_end(end: End) -> End:
    return (end[0], 1 - end[1])


@dataclass(frozen=True)
class Region:
    """One complementary region, as a closed boundary walk.

    ``traversals`` lists the directed branch sides in boundary order,
    rotated so the minimal traversal comes first.  ``cusp_before[i]`` is
    True when the corner between traversal ``i-1`` and traversal ``i``
    (cyclically) is a cusp.
    """

    traversals: Tuple[Traversal, ...]
    cusp_before: Tuple[bool, ...]
    punctured: bool = False

    @property
    def cusps(self) -> int:
        return sum(self.cusp_before)

    @property
    def key(self) -> Traversal:
        return self.traversals[0]

    @property
    def sides(self) -> Tuple[Tuple[Traversal, ...], ...]:
        """Boundary sides: maximal cusp-free runs, one entry if smooth."""
        n = len(self.traversals)
        starts = [i for i in range(n) if self.cusp_before[i]]
        if not starts:
            return (self.traversals,)
        out = []
        for j, s in enumerate(starts):
            t = starts[(j + 1) % len(starts)]
            if t <= s:
                t += n
            out.append(tuple(self.traversals[k % n] for k in range(s, t)))
        return tuple(out)

    def side_weight(self, side: Sequence[Traversal], weights) -> object:
        return sum(weights[b] for b, _ in side)

    def describe(self) -> str:
        kind = {0: "smooth", 1: "monogon", 2: "bigon", 3: "trigon"}.get(
            self.cusps, f"{self.cusps}-gon"
        )
        p = "punctured " if self.punctured else ""
        return f"{p}{kind}"


class TrainTrack:
    """An immutable (bigon) train track given by its switch slot structure.

    ``switches`` maps a switch id to a pair of nonempty slot tuples; each
    slot holds one End.  Every branch must contribute exactly its two ends.
    """

    def __init__(
        self,
        switches: Mapping[int, Tuple[Sequence[End], Sequence[End]]],
        allows_bigons: bool = False,
        punctures: Iterable[Traversal] = (),
        marked_points: Iterable[Traversal] = (),
    ):
        self.switches: Dict[int, Tuple[Tuple[End, ...], Tuple[End, ...]]] = {
            sw: (tuple(sides[0]), tuple(sides[1])) for sw, sides in sorted(switches.items())
        }
        self.allows_bigons = bool(allows_bigons)
        self.marked_points: FrozenSet[Traversal] = frozenset(marked_points)

        self._slots: Dict[End, SlotRef] = {}
        for sw, (side_a, side_b) in self.switches.items():
            if not side_a or not side_b:
                raise StructuralError(f"switch {sw} has an empty side")
            for side, slots in ((0, side_a), (1, side_b)):
                for pos, end in enumerate(slots):
                    if end in self._slots:
                        raise StructuralError(f"end {end} occupies two slots")
                    self._slots[end] = (sw, side, pos)

        branch_ends: Dict[int, set] = {}
        for b, e in self._slots:
            branch_ends.setdefault(b, set()).add(e)
        for b, ends in branch_ends.items():
            if ends != {0, 1}:
                raise StructuralError(f"branch {b} is missing an end")
        self.branches: Tuple[int, ...] = tuple(sorted(branch_ends))

        self._regions: Optional[Tuple[Region, ...]] = None
        self._region_of: Optional[Dict[Traversal, int]] = None
        self._canonical: Optional[bytes] = None

        self.punctures: FrozenSet[Traversal] = self._normalize_marks(punctures)

    # ------------------------------------------------------------------
    # basic structure

    def slot(self, end: End) -> SlotRef:
        try:
            return self._slots[end]
        except KeyError:
            raise StructuralError(f"dangling end reference {end}") from None

    def branch_ends(self, b: int) -> Tuple[SlotRef, SlotRef]:
        return self.slot((b, 0)), self.slot((b, 1))

    def side_slots(self, sw: int, side: int) -> Tuple[End, ...]:
        return self.switches[sw][side]

    def ends_cyclic(self, sw: int) -> Tuple[End, ...]:
        """Counterclockwise cyclic order of ends around a switch."""
        side_a, side_b = self.switches[sw]
        return side_a + tuple(reversed(side_b))

    def valence(self, sw: int) -> int:
        side_a, side_b = self.switches[sw]
        return len(side_a) + len(side_b)

    def is_generic(self) -> bool:
        return all(self.valence(sw) <= 3 for sw in self.switches)

    def end_is_large(self, end: End) -> bool:
        sw, side, _ = self.slot(end)
        return len(self.switches[sw][side]) == 1

    def branch_kind(self, b: int) -> str:
        large0 = self.end_is_large((b, 0))
        large1 = self.end_is_large((b, 1))
        if large0 and large1:
            return LARGE
        if not large0 and not large1:
            return SMALL
        return MIXED

    def large_branches(self) -> List[int]:
        return [b for b in self.branches if self.branch_kind(b) == LARGE]

    def small_branches(self) -> List[int]:
        return [b for b in self.branches if self.branch_kind(b) == SMALL]

    def mixed_branches(self) -> List[int]:
        return [b for b in self.branches if self.branch_kind(b) == MIXED]

    def components(self) -> List[Tuple[FrozenSet[int], FrozenSet[int]]]:
        """Connected components as (switch set, branch set) pairs."""
        seen = set()
        out = []
        for start in self.switches:
            if start in seen:
                continue
            sws, brs = {start}, set()
            queue = deque([start])
            while queue:
                sw = queue.popleft()
                for b, _ in self.ends_cyclic(sw):
                    brs.add(b)
                    for e in ((b, 0), (b, 1)):
                        nsw = self.slot(e)[0]
                        if nsw not in sws:
                            sws.add(nsw)
                            queue.append(nsw)
            seen |= sws
            out.append((frozenset(sws), frozenset(brs)))
        return sorted(out, key=lambda pair: min(pair[0]))

    # ------------------------------------------------------------------
    # region tracing

    def next_traversal(self, t: Traversal) -> Tuple[Traversal, bool]:
        """Successor of a boundary traversal and whether the corner is a cusp."""
        b, d = t
        arrival: End = (b, 1) if d == 0 else (b, 0)
        sw, side_in, _ = self.slot(arrival)
        cyc = self.ends_cyclic(sw)
        i = cyc.index(arrival)
        g = cyc[i - 1]
        side_g = self.slot(g)[1]
        # leaving along end g: direction matches the index of that end
        return (g[0], g[1]), side_g == side_in

    def regions(self) -> Tuple[Region, ...]:
        if self._regions is None:
            self._trace()
        return self._regions

    def region_index_of(self, t: Traversal) -> int:
        if self._region_of is None:
            self._trace()
        return self._region_of[t]

    def region_of(self, t: Traversal) -> Region:
        return self.regions()[self.region_index_of(t)]

    def _trace(self):
        all_traversals = [(b, d) for b in self.branches for d in (0, 1)]
        raw_punct = getattr(self, "_pending_punctures", frozenset())
        seen = {}
        orbits = []
        for t0 in all_traversals:
            if t0 in seen:
                continue
            orbit = []
            cusps = []
            t = t0
            while True:
                orbit.append(t)
                seen[t] = len(orbits)
                t, cusp = self.next_traversal(t)
                cusps.append(cusp)  # corner before the *next* traversal
                if t == t0:
                    break
            # cusp_before[i] is the corner between orbit[i-1] and orbit[i]
            cusp_before = [cusps[-1]] + cusps[:-1]
            k = orbit.index(min(orbit))
            orbit = orbit[k:] + orbit[:k]
            cusp_before = cusp_before[k:] + cusp_before[:k]
            orbits.append((tuple(orbit), tuple(cusp_before)))
        order = sorted(range(len(orbits)), key=lambda i: orbits[i][0][0])
        regions = []
        region_of = {}
        for new_idx, i in enumerate(order):
            trav, cusp_before = orbits[i]
            punctured = any(t in raw_punct for t in trav)
            regions.append(Region(trav, cusp_before, punctured))
            for t in trav:
                region_of[t] = new_idx
        self._regions = tuple(regions)
        self._region_of = region_of

    def _normalize_marks(self, punctures: Iterable[Traversal]) -> FrozenSet[Traversal]:
        punct = frozenset(punctures)
        if not punct:
            self._pending_punctures = frozenset()
            if self._regions is None:
                self._trace()
            return punct
        for b, d in punct:
            if (b, 0) not in self._slots:
                raise StructuralError(f"puncture mark on unknown branch {b}")
            if d not in (0, 1):
                raise StructuralError(f"puncture mark with bad direction {d}")
        self._pending_punctures = punct
        self._regions = None
        self._trace()
        keys = {}
        for t in punct:
            idx = self._region_of[t]
            keys.setdefault(idx, self._regions[idx].key)
        if len(keys) != len(punct):
            raise StructuralError("two puncture marks land in the same region")
        return frozenset(keys.values())

    def punctured_region_indices(self) -> Tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.regions()) if r.punctured)

    # ------------------------------------------------------------------
    # rebuilding helpers

    def replace(
        self,
        switches=None,
        allows_bigons=None,
        punctures=None,
        marked_points=None,
    ) -> "TrainTrack":
        return TrainTrack(
            self.switches if switches is None else switches,
            self.allows_bigons if allows_bigons is None else allows_bigons,
            self.punctures if punctures is None else punctures,
            self.marked_points if marked_points is None else marked_points,
        )

    def relabel(self, switch_map=None, branch_map=None) -> "TrainTrack":
        switch_map = switch_map or {}
        branch_map = branch_map or {}
        sm = lambda s: switch_map.get(s, s)
        bm = lambda b: branch_map.get(b, b)
        if len({sm(s) for s in self.switches}) != len(self.switches):
            raise PreconditionError("switch relabeling is not injective")
        if len({bm(b) for b in self.branches}) != len(self.branches):
            raise PreconditionError("branch relabeling is not injective")
        switches = {
            sm(sw): (
                tuple((bm(b), e) for b, e in sides[0]),
                tuple((bm(b), e) for b, e in sides[1]),
            )
            for sw, sides in self.switches.items()
        }
        punct = {(bm(b), d) for b, d in self.punctures}
        marks = {(bm(b), d) for b, d in self.marked_points}
        return TrainTrack(switches, self.allows_bigons, punct, marks)

    def __eq__(self, other):
        if not isinstance(other, TrainTrack):
            return NotImplemented
        return (
            self.switches == other.switches
            and self.allows_bigons == other.allows_bigons
            and self.punctures == other.punctures
            and self.marked_points == other.marked_points
        )

    def __hash__(self):
        return hash(
            (
                tuple(sorted(self.switches.items())),
                self.allows_bigons,
                self.punctures,
                self.marked_points,
            )
        )

    def __repr__(self):
        return (
            f"TrainTrack({len(self.switches)} switches, {len(self.branches)} branches"
            + (", bigons" if self.allows_bigons else "")
            + ")"
        )

    # ------------------------------------------------------------------
    # canonical form

    def _component_encoding_from(self, start_end: End):
        sw_ids: Dict[int, int] = {}
        br_ids: Dict[int, int] = {}
        first_end: Dict[int, int] = {}
        out: List[int] = []
        queue = deque([(self.slot(start_end)[0], start_end)])
        while queue:
            sw, entry = queue.popleft()
            if sw in sw_ids:
                continue
            sw_ids[sw] = len(sw_ids)
            cyc = self.ends_cyclic(sw)
            i = cyc.index(entry)
            rot = cyc[i:] + cyc[:i]
            out.append(len(rot))
            for b, e in rot:
                if b not in br_ids:
                    br_ids[b] = len(br_ids)
                    first_end[b] = e
                    out.append(br_ids[b] * 2)
                else:
                    out.append(br_ids[b] * 2 + 1)
            bits = 0
            for j, end in enumerate(rot):
                nxt = rot[(j + 1) % len(rot)]
                if self.slot(end)[1] == self.slot(nxt)[1]:
                    bits |= 1 << j
            out.append(bits)
            for end in rot:
                other = _other_end(end)
                osw = self.slot(other)[0]
                if osw not in sw_ids:
                    queue.append((osw, other))
        return tuple(out), br_ids, first_end, sw_ids

    def _mark_codes(self, marks, br_ids, first_end):
        codes = []
        for region_idx in sorted({self.region_index_of(t) for t in marks}):
            region = self.regions()[region_idx]
            relabeled = []
            for b, d in region.traversals:
                if b not in br_ids:
                    return None  # mark outside this component
                nd = d if first_end[b] == 0 else 1 - d
                relabeled.append((br_ids[b], nd))
            codes.append(min(relabeled))
        return tuple(sorted(codes))

    def _component_canonical(self, branch_set: FrozenSet[int]):
        punct_here = {t for t in self.punctures if t[0] in branch_set}
        marks_here = {t for t in self.marked_points if t[0] in branch_set}
        best = None
        for b in sorted(branch_set):
            for e in (0, 1):
                enc, br_ids, first_end, _ = self._component_encoding_from((b, e))
                pcodes = self._mark_codes(punct_here, br_ids, first_end)
                mcodes = self._mark_codes(marks_here, br_ids, first_end)
                candidate = (enc, pcodes, mcodes)
                if best is None or candidate < best:
                    best = candidate
        return best

    def canonical_form(self) -> bytes:
        """Byte string invariant under relabeling; equal iff the tracks are
        related by an orientation-preserving ribbon isomorphism matching
        puncture and point marks."""
        if self._canonical is None:
            comps = sorted(
                self._component_canonical(brs) for _, brs in self.components()
            )
            self._canonical = repr((int(self.allows_bigons), comps)).encode()
        return self._canonical

    def canonical_track(self) -> "TrainTrack":
        """A relabeled copy whose labels realize the canonical form."""
        comp_data = []
        for _, brs in self.components():
            best = None
            for b in sorted(brs):
                for e in (0, 1):
                    enc, br_ids, first_end, sw_ids = self._component_encoding_from((b, e))
                    punct_here = {t for t in self.punctures if t[0] in brs}
                    marks_here = {t for t in self.marked_points if t[0] in brs}
                    cand = (
                        enc,
                        self._mark_codes(punct_here, br_ids, first_end),
                        self._mark_codes(marks_here, br_ids, first_end),
                    )
                    if best is None or cand < best[0]:
                        best = (cand, br_ids, first_end, sw_ids)
            comp_data.append(best)
        comp_data.sort(key=lambda item: item[0])
        switch_map = {}
        branch_map = {}
        flip = {}
        sw_base = br_base = 0
        for _, br_ids, first_end, sw_ids in comp_data:
            for sw, i in sw_ids.items():
                switch_map[sw] = sw_base + i
            for b, i in br_ids.items():
                branch_map[b] = br_base + i
                flip[b] = first_end[b] == 1
            sw_base += len(sw_ids)
            br_base += len(br_ids)
        switches = {}
        for sw, sides in self.switches.items():
            new_sides = tuple(
                tuple(
                    (branch_map[b], (1 - e) if flip[b] else e) for b, e in side
                )
                for side in sides
            )
            switches[switch_map[sw]] = new_sides
        remap = lambda t: (branch_map[t[0]], (1 - t[1]) if flip[t[0]] else t[1])
        return TrainTrack(
            switches,
            self.allows_bigons,
            {remap(t) for t in self.punctures},
            {remap(t) for t in self.marked_points},
        )


# ----------------------------------------------------------------------
# spec-level operations


def trace_regions(track: TrainTrack) -> Tuple[Region, ...]:
    """Complementary regions as boundary walks, deterministically ordered."""
    return track.regions()


def classify_branch(track: TrainTrack, b: int) -> str:
    if (b, 0) not in track._slots:
        raise StructuralError(f"unknown branch {b}")
    return track.branch_kind(b)


def canonical_label(track: TrainTrack) -> bytes:
    return track.canonical_form()


@dataclass
class ValidationReport:
    """Invariant violations found by :func:`validate`; empty means legal."""

    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __str__(self):
        return "OK" if self.ok else "; ".join(self.violations)


def validate(track: TrainTrack, surface: Surface) -> ValidationReport:
    """Check all track invariants against a declared surface.

    Structural breakage (dangling slots, empty sides) raises
    ``StructuralError`` at construction time and never reaches here.
    """
    report = ValidationReport()
    comps = track.components()
    if len(comps) > 1:
        report.violations.append(f"track has {len(comps)} components, expected 1")

    curve_components = set()
    for sws, brs in comps:
        if all(track.valence(sw) == 2 for sw in sws):
            curve_components.add(sws)
    for sw in track.switches:
        if track.valence(sw) == 2:
            comp = next(c for c in comps if sw in c[0])
            if comp[0] not in curve_components or len(comp[0]) != 1:
                report.violations.append(
                    f"bivalent switch {sw} off a closed-curve component"
                )

    total_chi = 0
    punct_count = 0
    for i, region in enumerate(track.regions()):
        k = region.cusps
        if region.punctured:
            punct_count += 1
            chi0 = 0
            if k == 0:
                report.violations.append(
                    f"region {i}: smooth once-punctured disc is forbidden"
                )
        else:
            chi0 = 1
            if k < 3 and not (k == 2 and track.allows_bigons):
                report.violations.append(
                    f"region {i}: forbidden region ({region.describe()})"
                )
        total_chi += 2 * chi0 - k  # twice the cusped Euler characteristic

    if total_chi != 2 * surface.euler_characteristic:
        report.violations.append(
            f"region Euler sum {total_chi}/2 != chi(S) = {surface.euler_characteristic}"
        )
    if punct_count != surface.punctures:
        report.violations.append(
            f"{punct_count} punctured regions, surface has {surface.punctures}"
        )
    return report


def infer_surface(track: TrainTrack) -> Surface:
    """Surface a connected track fills, from its traced regions."""
    total_chi2 = 0
    punct = 0
    for region in track.regions():
        punct += bool(region.punctured)
        total_chi2 += (0 if region.punctured else 2) - region.cusps
    if total_chi2 % 2:
        raise StructuralError("odd cusped Euler characteristic")
    chi = total_chi2 // 2
    genus2 = 2 - punct - chi
    if genus2 % 2:
        raise StructuralError("region data has no consistent genus")
    return Surface(genus2 // 2, punct)


# ----------------------------------------------------------------------
# subtracks


@dataclass(frozen=True)
class Subtrack:
    """A subtrack realized as a standalone track plus its embedding data.

    ``branch_paths`` maps each subtrack branch to the trainpath of parent
    branches it traverses (as parent traversals, in order).
    """

    track: TrainTrack
    branch_paths: Mapping[int, Tuple[Traversal, ...]]
    switch_map: Mapping[int, int]

    @property
    def parent_branches(self) -> FrozenSet[int]:
        return frozenset(b for path in self.branch_paths.values() for b, _ in path)

    def complexity(self) -> int:
        """Number of parent branches contained in the subtrack."""
        return sum(len(path) for path in self.branch_paths.values())

    def path_of(self, b: int) -> Tuple[Traversal, ...]:
        return self.branch_paths[b]


def subtrack(parent: TrainTrack, branch_subset: Iterable[int]) -> Subtrack:
    """Extract a subtrack spanned by ``branch_subset``.

    Switches that keep slots on only one side make the subset illegal.
    Bivalent leftover switches are smoothed away, except that a component
    consisting entirely of bivalent switches keeps its minimal switch and
    becomes a closed-curve component.
    """
    keep = frozenset(branch_subset)
    if not keep:
        raise PreconditionError("empty branch subset")
    filtered: Dict[int, Tuple[Tuple[End, ...], Tuple[End, ...]]] = {}
    for sw, (side_a, side_b) in parent.switches.items():
        fa = tuple(e for e in side_a if e[0] in keep)
        fb = tuple(e for e in side_b if e[0] in keep)
        if not fa and not fb:
            continue
        if not fa or not fb:
            raise StructuralError(
                f"branch subset strands switch {sw}: one side becomes empty"
            )
        filtered[sw] = (fa, fb)

    bivalent = {
        sw for sw, (fa, fb) in filtered.items() if len(fa) == 1 and len(fb) == 1
    }

    # component discovery over the filtered structure
    end_switch = {}
    for sw, (fa, fb) in filtered.items():
        for e in fa + fb:
            end_switch[e] = sw

    def comp_of(start_sw):
        sws = {start_sw}
        queue = deque([start_sw])
        while queue:
            sw = queue.popleft()
            for e in filtered[sw][0] + filtered[sw][1]:
                osw = end_switch[_other_end(e)]
                if osw not in sws:
                    sws.add(osw)
                    queue.append(osw)
        return sws

    seen = set()
    keep_switches = set()
    for sw in sorted(filtered):
        if sw in seen:
            continue
        comp = comp_of(sw)
        seen |= comp
        non_bi = {s for s in comp if s not in bivalent}
        if non_bi:
            keep_switches |= non_bi
        else:
            keep_switches.add(min(comp))

    # walk maximal paths between kept switches through smoothed bivalent ones
    def walk(start_end: End):
        """Follow the trainpath from a kept-switch end until the next kept switch."""
        path = []
        end = start_end
        while True:
            b, ei = end
            path.append((b, 0 if ei == 0 else 1))
            far = _other_end(end)
            sw = end_switch[far]
            if sw in keep_switches:
                return path, far
            fa, fb = filtered[sw]
            far_side = 0 if far in fa else 1
            other_side = filtered[sw][1 - far_side]
            end = other_side[0]

    new_switch_ids = {sw: i for i, sw in enumerate(sorted(keep_switches))}
    consumed = set()
    paths = {}
    path_endpoints = {}
    for sw in sorted(keep_switches):
        fa, fb = filtered[sw]
        for e in fa + fb:
            if e in consumed:
                continue
            path, far = walk(e)
            consumed.add(e)
            consumed.add(far)
            # orient the stored path deterministically
            reverse = [(b, 1 - d) for b, d in reversed(path)]
            if reverse < path:
                path, e, far = reverse, far, e
            new_b = len(paths)
            paths[new_b] = (tuple(path), e, far)

    slot_assign: Dict[End, End] = {}
    for new_b, (path, e_start, e_far) in paths.items():
        slot_assign[e_start] = (new_b, 0)
        slot_assign[e_far] = (new_b, 1)

    new_switches = {}
    for sw in sorted(keep_switches):
        fa, fb = filtered[sw]
        new_switches[new_switch_ids[sw]] = (
            tuple(slot_assign[e] for e in fa),
            tuple(slot_assign[e] for e in fb),
        )
    sub = TrainTrack(new_switches, allows_bigons=parent.allows_bigons)
    branch_paths = {b: path for b, (path, _, _) in paths.items()}
    switch_map = {new: old for old, new in new_switch_ids.items()}
    return Subtrack(sub, branch_paths, switch_map)
