"""Tensor rank per orbit via rank-1 perturbation breadth-first search.

Adding the fixed simple tensor E (code 1) to a tensor changes its rank by
at most one, and because the group is transitive on simple tensors every
rank-(r+1) orbit sits next to some rank-r orbit under that pairing.  So
rank = 1 + BFS distance from the rank-1 orbit in the graph whose vertices
are orbits and whose edges join the orbits of code pairs (2k, 2k+1).

Two interchangeable strategies compute the same RankAtlas:

  link-table    per-code uint8 rank array, orbits marked whole via the
                grouped member blocks that also underlie the link table
                (the successor-chasing of a literal linked list is
                serial; the blocks hold identical information)
  orbit-graph   no per-code table at all: one chunked scan over even
                codes collects orbit adjacencies, then BFS on orbit ids

The brute-force oracle is independent of all of the above: plain BFS over
XOR-with-a-simple-tensor moves, usable for small formats and small ranks.
"""

import functools
from decimal import ROUND_HALF_UP, Decimal, localcontext
from typing import NamedTuple

import numpy as np

from .orbits import LargeOrbitAtlas, OrbitAtlas, orbit_member_blocks, resolve_strategy
from .tensor import Shape, enumerate_simple_tensors

_EDGE_CHUNK = 1 << 22


class RankAtlas:
    """by_orbit[orbit_id] = rank (index 0 is the zero orbit, rank 0).
    code_rank is the optional full per-code table, present when the
    link-table strategy built one."""

    def __init__(self, by_orbit: np.ndarray, code_rank: np.ndarray | None = None):
        self.by_orbit = by_orbit
        self.code_rank = code_rank

    @property
    def max_rank(self) -> int:
        return int(self.by_orbit.max())

    def rank_of_orbit(self, orbit_id: int) -> int:
        return int(self.by_orbit[orbit_id])


def rank_of_code(atlas: OrbitAtlas, ranks: RankAtlas, code: int) -> int:
    return int(ranks.by_orbit[atlas.orbit_id(code)])


def seed_rank_one(shape: Shape, atlas: OrbitAtlas) -> RankAtlas:
    """Mark the single orbit holding all simple tensors with rank 1."""
    simples = np.array(enumerate_simple_tensors(shape), dtype=np.uint32)
    ids = np.unique(atlas.assignment[simples])
    if ids.size != 1:
        raise RuntimeError(
            f"simple tensors fall into {ids.size} orbits; the group action is broken")
    by_orbit = np.zeros(atlas.orbit_count + 1, dtype=np.uint8)
    by_orbit[int(ids[0])] = 1
    return RankAtlas(by_orbit)


def propagate_ranks(shape: Shape, atlas: OrbitAtlas,
                    strategy: str = "auto",
                    ranks: RankAtlas | None = None) -> RankAtlas:
    """Assign every orbit its rank; see the module docstring for the two
    strategies.  Both produce identical results."""
    strategy = resolve_strategy(strategy, shape)
    if ranks is None:
        ranks = seed_rank_one(shape, atlas)
    if strategy == "link-table":
        out = _propagate_link_table(atlas, ranks.by_orbit.copy())
    else:
        out = _propagate_orbit_graph(atlas, ranks.by_orbit.copy())
    if out.by_orbit[1:].min(initial=255) == 0:
        raise RuntimeError("unreachable orbit after rank propagation")
    return out


def _propagate_link_table(atlas, by_orbit):
    order, offsets = orbit_member_blocks(atlas)
    code_rank = np.zeros(atlas.shape.code_bound, dtype=np.uint8)

    def members(orbit_id):
        return order[offsets[orbit_id - 1]:offsets[orbit_id]]

    frontier = [int(i) for i in np.flatnonzero(by_orbit == 1)]
    for oid in frontier:
        code_rank[members(oid)] = 1
    rank = 1
    while frontier:
        segs = [members(o) for o in frontier]
        codes = segs[0] if len(segs) == 1 else np.concatenate(segs)
        paired = codes ^ np.uint32(1)
        paired = paired[paired != 0]          # code 1 pairs with the zero tensor
        paired = paired[code_rank[paired] == 0]
        fresh = np.unique(atlas.assignment[paired])
        rank += 1
        for oid in fresh:
            oid = int(oid)
            code_rank[members(oid)] = rank
            by_orbit[oid] = rank
        frontier = [int(o) for o in fresh]
    return RankAtlas(by_orbit, code_rank)


def _orbit_adjacency(atlas):
    """Undirected orbit adjacency from the code pairs (2k, 2k+1), k >= 1."""
    a = atlas.assignment
    even = a[2::2]
    odd = a[3::2]
    pairs = set()
    for lo in range(0, even.size, _EDGE_CHUNK):
        left = even[lo:lo + _EDGE_CHUNK].astype(np.uint64) << np.uint64(32)
        left |= odd[lo:lo + _EDGE_CHUNK]
        pairs.update(np.unique(left).tolist())
    adj = [set() for _ in range(atlas.orbit_count + 1)]
    for packed in pairs:
        o1, o2 = packed >> 32, packed & 0xFFFFFFFF
        if o1 != o2:
            adj[o1].add(o2)
            adj[o2].add(o1)
    return adj


def _propagate_orbit_graph(atlas, by_orbit):
    adj = _orbit_adjacency(atlas)
    frontier = [int(i) for i in np.flatnonzero(by_orbit == 1)]
    rank = 1
    while frontier:
        rank += 1
        nxt = []
        for oid in frontier:
            for other in adj[oid]:
                if other != 0 and by_orbit[other] == 0:
                    by_orbit[other] = rank
                    nxt.append(other)
        frontier = nxt
    return RankAtlas(by_orbit, None)


# ---- independent oracle ----

@functools.lru_cache(maxsize=None)
def _rank_levels(shape: Shape, max_r: int):
    simples = enumerate_simple_tensors(shape)
    known = {0: 0}
    frontier = [0]
    for r in range(1, max_r + 1):
        grown = []
        for c in frontier:
            for s in simples:
                t = c ^ s
                if t not in known:
                    known[t] = r
                    grown.append(t)
        frontier = grown
    return known


def brute_force_rank(shape: Shape, code: int, max_r: int = 3) -> int | None:
    """Smallest r <= max_r with code a XOR of r simple tensors, else None.
    Definition-level search, independent of the orbit machinery; cost grows
    with (number of simple tensors)^max_r."""
    if not 0 <= code < shape.code_bound:
        raise ValueError(f"code {code} out of range for {shape}")
    return _rank_levels(shape, max_r).get(code)


# ---- distributions ----

class DistributionRow(NamedTuple):
    rank: int
    orbits: int
    tensors: int
    percent: str


def percent_string(count: int, total: int) -> str:
    """count/total as a percentage, 4 decimal places, half up, the exact
    rendering the reference tables use (e.g. 162/256 -> '63.2813')."""
    with localcontext() as ctx:
        ctx.prec = 60
        q = (Decimal(count) * 100 / Decimal(total))
        return str(q.quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP))


def large_orbit_ranks(large: LargeOrbitAtlas, ranks: RankAtlas) -> np.ndarray:
    """Per-large-orbit ranks; constituents of a large orbit always agree."""
    out = np.zeros(large.orbit_count + 1, dtype=np.uint8)
    for rec, small_ids in zip(large.records, large.constituents):
        vals = {int(ranks.by_orbit[s]) for s in small_ids}
        if len(vals) != 1:
            raise RuntimeError(
                f"large orbit {rec.orbit_id} mixes ranks {sorted(vals)}")
        out[rec.orbit_id] = vals.pop()
    return out


def rank_distribution(atlas: OrbitAtlas, ranks: RankAtlas,
                      large: LargeOrbitAtlas | None = None) -> list[DistributionRow]:
    """Per-rank orbit and tensor counts with rendered percentages.  The
    zero tensor contributes the rank-0 row.  With a LargeOrbitAtlas the
    orbit counts are large-orbit counts; tensor counts are unchanged."""
    if large is None:
        pairs = [(int(ranks.by_orbit[r.orbit_id]), r.size) for r in atlas.records]
    else:
        by_large = large_orbit_ranks(large, ranks)
        pairs = [(int(by_large[r.orbit_id]), r.size) for r in large.records]
    top = max(r for r, _ in pairs)
    orbits = [0] * (top + 1)
    tensors = [0] * (top + 1)
    orbits[0] = tensors[0] = 1
    for r, s in pairs:
        orbits[r] += 1
        tensors[r] += s
    cb = atlas.shape.code_bound
    return [DistributionRow(r, orbits[r], tensors[r], percent_string(tensors[r], cb))
            for r in range(top + 1)]
