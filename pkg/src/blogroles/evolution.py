"""Group continuation across slots: stable chains and transition events.

Per-slot communities are linked when their member overlap clears a
similarity threshold. The default similarity is the size-tolerant
"modified Jaccard" — the larger of the two inclusion ratios — so a small
group surviving inside a bigger one still counts as continuation; plain
Jaccard is available behind the ``similarity`` switch.

Chains stay single-threaded: at a branch the highest-scoring edge wins
(ties: larger successor, then lexicographically smallest member set), and
when two chains contend for one successor the same rule picks the winner
on the predecessor side. The full bipartite match structure is preserved
separately by ``label_events``, which is where merges and splits live.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Sequence

MATCH_THRESHOLD_DEFAULT = 0.5
MIN_LIFESPAN_DEFAULT = 3
SIZE_DELTA_DEFAULT = 0.1


def modified_jaccard(a: frozenset, b: frozenset) -> float:
    """max(|A∩B|/|A|, |A∩B|/|B|); 0 when either set is empty."""
    if not a or not b:
        return 0.0
    inter = len(a & b)
    return max(inter / len(a), inter / len(b))


def jaccard(a: frozenset, b: frozenset) -> float:
    union = len(a | b)
    if union == 0:
        return 0.0
    return len(a & b) / union


_SIMILARITIES = {"mj": modified_jaccard, "jaccard": jaccard}


@dataclass(frozen=True)
class GroupMatch:
    from_slot: int
    from_id: int
    to_slot: int
    to_id: int
    score: float


class EventKind(str, Enum):
    CONTINUATION = "continuation"
    GROWTH = "growth"
    SHRINK = "shrink"
    MERGE = "merge"
    SPLIT = "split"
    FORM = "form"
    DISSOLVE = "dissolve"


@dataclass(frozen=True)
class GroupEvent:
    kind: EventKind
    transition_slot: int  # the t of the t -> t+1 transition
    predecessors: tuple[int, ...]
    successors: tuple[int, ...]


@dataclass
class StableGroup:
    group_id: str
    lifespan: tuple[tuple[int, frozenset[str]], ...]
    events: tuple[GroupEvent, ...] = field(default=())

    @property
    def first_slot(self) -> int:
        return self.lifespan[0][0]

    @property
    def last_slot(self) -> int:
        return self.lifespan[-1][0]


def match_groups(
    communities_t: Sequence[frozenset],
    communities_t1: Sequence[frozenset],
    threshold: float = MATCH_THRESHOLD_DEFAULT,
    slot_t: int = 0,
    similarity: str = "mj",
) -> list[GroupMatch]:
    """All cross-slot pairs whose similarity clears the threshold.

    A community may take part in several retained matches; that is what
    makes merges and splits observable downstream.
    """
    sim = _SIMILARITIES[similarity]
    matches = []
    for i, a in enumerate(communities_t):
        for j, b in enumerate(communities_t1):
            score = sim(a, b)
            if score >= threshold:
                matches.append(GroupMatch(slot_t, i, slot_t + 1, j, score))
    return matches


def match_all(
    communities_by_slot: Sequence[Sequence[frozenset]],
    threshold: float = MATCH_THRESHOLD_DEFAULT,
    similarity: str = "mj",
) -> list[GroupMatch]:
    matches: list[GroupMatch] = []
    for t in range(len(communities_by_slot) - 1):
        matches.extend(
            match_groups(
                communities_by_slot[t],
                communities_by_slot[t + 1],
                threshold,
                slot_t=t,
                similarity=similarity,
            )
        )
    return matches


def _size_kind(n_pred: int, n_succ: int, delta: float) -> EventKind:
    if n_succ >= (1.0 + delta) * n_pred:
        return EventKind.GROWTH
    if n_succ <= (1.0 - delta) * n_pred:
        return EventKind.SHRINK
    return EventKind.CONTINUATION


def _choice_key(score: float, members: frozenset) -> tuple:
    # Highest score, then larger set, then lexicographically smallest members.
    return (-score, -len(members), tuple(sorted(members)))


def extract_stable(
    communities_by_slot: Sequence[Sequence[frozenset]],
    matches: Sequence[GroupMatch],
    min_lifespan: int = MIN_LIFESPAN_DEFAULT,
    size_delta: float = SIZE_DELTA_DEFAULT,
) -> list[StableGroup]:
    """Maximal single-threaded chains through the retained matches.

    Every community sits in exactly one chain (possibly of length one);
    chains shorter than ``min_lifespan`` are discarded. Each surviving
    chain records its own transition kinds (continuation/growth/shrink).
    """
    members_of = {
        (t, i): m for t, comms in enumerate(communities_by_slot) for i, m in enumerate(comms)
    }

    outgoing: dict[tuple[int, int], list[GroupMatch]] = {}
    incoming: dict[tuple[int, int], list[GroupMatch]] = {}
    for m in matches:
        if (m.from_slot, m.from_id) not in members_of or (m.to_slot, m.to_id) not in members_of:
            continue
        outgoing.setdefault((m.from_slot, m.from_id), []).append(m)
        incoming.setdefault((m.to_slot, m.to_id), []).append(m)

    succ_choice: dict[tuple[int, int], tuple[int, int]] = {}
    for node, outs in outgoing.items():
        best = min(outs, key=lambda m: _choice_key(m.score, members_of[(m.to_slot, m.to_id)]))
        succ_choice[node] = (best.to_slot, best.to_id)
    pred_choice: dict[tuple[int, int], tuple[int, int]] = {}
    for node, ins in incoming.items():
        best = min(ins, key=lambda m: _choice_key(m.score, members_of[(m.from_slot, m.from_id)]))
        pred_choice[node] = (best.from_slot, best.from_id)

    def link_from(node: tuple[int, int]) -> tuple[int, int] | None:
        succ = succ_choice.get(node)
        if succ is not None and pred_choice.get(succ) == node:
            return succ
        return None

    linked_into = {
        succ for node in succ_choice if (succ := link_from(node)) is not None
    }

    groups: list[StableGroup] = []
    for t, comms in enumerate(communities_by_slot):
        for i in range(len(comms)):
            node = (t, i)
            if node in linked_into:
                continue
            chain = [node]
            while (nxt := link_from(chain[-1])) is not None:
                chain.append(nxt)
            if len(chain) < min_lifespan:
                continue
            lifespan = tuple((slot, members_of[(slot, idx)]) for slot, idx in chain)
            events = tuple(
                GroupEvent(
                    kind=_size_kind(
                        len(members_of[chain[s]]), len(members_of[chain[s + 1]]), size_delta
                    ),
                    transition_slot=chain[s][0],
                    predecessors=(chain[s][1],),
                    successors=(chain[s + 1][1],),
                )
                for s in range(len(chain) - 1)
            )
            groups.append(StableGroup(group_id="", lifespan=lifespan, events=events))

    groups.sort(key=lambda g: (g.first_slot, tuple(sorted(g.lifespan[0][1]))))
    for seq, g in enumerate(groups):
        g.group_id = f"g{seq:04d}"
    return groups


def label_events(
    matches: Sequence[GroupMatch],
    communities_by_slot: Sequence[Sequence[frozenset]],
    size_delta: float = SIZE_DELTA_DEFAULT,
) -> list[GroupEvent]:
    """One event per community per transition.

    A successor with several predecessors is a merge, a predecessor with
    several successors a split; one-to-one matches continue (refined to
    growth/shrink by the size threshold); unmatched communities form or
    dissolve.
    """
    by_transition: dict[int, list[GroupMatch]] = {}
    for m in matches:
        by_transition.setdefault(m.from_slot, []).append(m)

    events: list[GroupEvent] = []
    for t in range(len(communities_by_slot) - 1):
        preds = communities_by_slot[t]
        succs = communities_by_slot[t + 1]
        outs: dict[int, list[int]] = {i: [] for i in range(len(preds))}
        ins: dict[int, list[int]] = {j: [] for j in range(len(succs))}
        for m in by_transition.get(t, ()):
            if m.from_id in outs and m.to_id in ins:
                outs[m.from_id].append(m.to_id)
                ins[m.to_id].append(m.from_id)

        for j in sorted(ins):
            if not ins[j]:
                events.append(GroupEvent(EventKind.FORM, t, (), (j,)))
        for i in sorted(outs):
            if len(outs[i]) == 1:
                j = outs[i][0]
                if len(ins[j]) == 1:
                    kind = _size_kind(len(preds[i]), len(succs[j]), size_delta)
                    events.append(GroupEvent(kind, t, (i,), (j,)))
        for j in sorted(ins):
            if len(ins[j]) >= 2:
                events.append(GroupEvent(EventKind.MERGE, t, tuple(sorted(ins[j])), (j,)))
        for i in sorted(outs):
            if len(outs[i]) >= 2:
                events.append(GroupEvent(EventKind.SPLIT, t, (i,), tuple(sorted(outs[i]))))
        for i in sorted(outs):
            if not outs[i]:
                events.append(GroupEvent(EventKind.DISSOLVE, t, (i,), ()))
    return events


def write_stable_groups_csv(groups: Sequence[StableGroup], path: Path | str) -> int:
    rows = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["group_id", "slot_index", "member_id"])
        for g in groups:
            for slot_index, members in g.lifespan:
                for member in sorted(members):
                    writer.writerow([g.group_id, slot_index, member])
                    rows += 1
    return rows


def read_stable_groups_csv(path: Path | str) -> list[StableGroup]:
    staged: dict[str, dict[int, set[str]]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            staged.setdefault(row["group_id"], {}).setdefault(int(row["slot_index"]), set()).add(
                row["member_id"]
            )
    groups = []
    for gid in sorted(staged):
        lifespan = tuple(
            (slot, frozenset(staged[gid][slot])) for slot in sorted(staged[gid])
        )
        groups.append(StableGroup(group_id=gid, lifespan=lifespan))
    return groups


def write_events_csv(events: Sequence[GroupEvent], path: Path | str) -> int:
    rows = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["transition_slot", "kind", "pred_ids", "succ_ids"])
        for e in events:
            writer.writerow(
                [
                    e.transition_slot,
                    e.kind.value,
                    "|".join(str(i) for i in e.predecessors),
                    "|".join(str(j) for j in e.successors),
                ]
            )
            rows += 1
    return rows
