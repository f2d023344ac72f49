"""Overlapping group detection via k-clique percolation.

A community is the union of all k-cliques reachable from one another
through (k-1)-node overlaps. ``find_communities`` works on maximal cliques
(two maximal cliques of size >= k whose intersection has >= k-1 nodes
carry the same percolation chains as their k-sub-cliques), which keeps the
clique count small on sparse graphs; ``brute_force_cpm`` enumerates every
k-clique explicitly and serves as the independent oracle for it.

Detection runs on the symmetrized (undirected, simple) interaction graph;
edge weights are carried through symmetrization but ignored by percolation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import networkx as nx

from .netbuild import InteractionGraph

BRUTE_FORCE_MAX_NODES = 40


@dataclass(frozen=True)
class Community:
    slot_index: int
    members: frozenset[str]
    k: int

    def sort_key(self) -> tuple:
        return (min(self.members), len(self.members), tuple(sorted(self.members)))


def symmetrize(graph: InteractionGraph) -> nx.Graph:
    """Undirected simple graph with {u,v} present iff (u,v) or (v,u) is; weights summed."""
    g = nx.Graph()
    g.add_nodes_from(graph.nodes)
    for (u, v), w in graph.edges.items():
        if g.has_edge(u, v):
            g[u][v]["weight"] += w
        else:
            g.add_edge(u, v, weight=w)
    return g


def _percolate(cliques: list[frozenset], k: int) -> list[frozenset]:
    """Connected components of the clique-overlap structure (>= k-1 shared nodes)."""
    parent = list(range(len(cliques)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[rj] = ri

    by_node: dict[str, list[int]] = {}
    for i, cl in enumerate(cliques):
        for node in cl:
            by_node.setdefault(node, []).append(i)
    for i, cl in enumerate(cliques):
        candidates = {j for node in cl for j in by_node[node] if j > i}
        for j in candidates:
            if len(cl & cliques[j]) >= k - 1:
                union(i, j)

    groups: dict[int, set[str]] = {}
    for i, cl in enumerate(cliques):
        groups.setdefault(find(i), set()).update(cl)
    return [frozenset(m) for m in groups.values()]


def _as_sorted_communities(member_sets: Iterable[frozenset], slot_index: int, k: int) -> list[Community]:
    communities = [Community(slot_index, members, k) for members in member_sets]
    communities.sort(key=Community.sort_key)
    return communities


def find_communities(graph: nx.Graph, k: int, slot_index: int = 0) -> list[Community]:
    """k-clique communities of an undirected graph, canonically ordered."""
    if k < 3:
        raise ValueError("k must be >= 3")
    cliques = sorted(
        (frozenset(c) for c in nx.find_cliques(graph) if len(c) >= k),
        key=lambda c: tuple(sorted(c)),
    )
    return _as_sorted_communities(_percolate(cliques, k), slot_index, k)


def _enumerate_k_cliques(adj: dict[str, set[str]], k: int) -> list[frozenset]:
    """All k-cliques, by ordered extension (each clique found exactly once)."""
    out: list[frozenset] = []

    def extend(base: list[str], candidates: set[str]) -> None:
        if len(base) == k:
            out.append(frozenset(base))
            return
        for v in sorted(candidates):
            extend(base + [v], {w for w in candidates & adj[v] if w > v})

    for v in sorted(adj):
        extend([v], {w for w in adj[v] if w > v})
    return out


def brute_force_cpm(graph: nx.Graph, k: int, slot_index: int = 0) -> list[Community]:
    """Oracle CPM: exhaustive k-clique enumeration plus explicit overlap BFS.

    Deliberately independent of ``find_communities`` (no maximal cliques, no
    union-find); refuses graphs beyond BRUTE_FORCE_MAX_NODES.
    """
    if k < 3:
        raise ValueError("k must be >= 3")
    if graph.number_of_nodes() > BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"oracle limited to {BRUTE_FORCE_MAX_NODES} nodes")
    adj = {u: set(graph[u]) for u in graph.nodes}
    kcliques = _enumerate_k_cliques(adj, k)

    n = len(kcliques)
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if len(kcliques[i] & kcliques[j]) >= k - 1:
                neighbors[i].append(j)
                neighbors[j].append(i)

    seen = [False] * n
    member_sets = []
    for i in range(n):
        if seen[i]:
            continue
        stack = [i]
        seen[i] = True
        members: set[str] = set()
        while stack:
            cur = stack.pop()
            members.update(kcliques[cur])
            for nxt in neighbors[cur]:
                if not seen[nxt]:
                    seen[nxt] = True
                    stack.append(nxt)
        member_sets.append(frozenset(members))
    return _as_sorted_communities(member_sets, slot_index, k)


def write_communities_csv(communities_by_slot: dict[int, list[Community]], path: Path | str) -> int:
    rows = 0
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot_index", "community_id", "member_id"])
        for slot_index in sorted(communities_by_slot):
            for cid, community in enumerate(communities_by_slot[slot_index]):
                for member in sorted(community.members):
                    writer.writerow([slot_index, cid, member])
                    rows += 1
    return rows


def read_communities_csv(path: Path | str) -> dict[int, list[frozenset[str]]]:
    """Communities per slot as member sets, ordered by community id."""
    staged: dict[int, dict[int, set[str]]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            slot = int(row["slot_index"])
            cid = int(row["community_id"])
            staged.setdefault(slot, {}).setdefault(cid, set()).add(row["member_id"])
    return {
        slot: [frozenset(staged[slot][cid]) for cid in sorted(staged[slot])]
        for slot in sorted(staged)
    }
