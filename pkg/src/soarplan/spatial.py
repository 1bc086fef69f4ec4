"""Uniform-grid neighbor index for the weighted planning metric.

The metric is sqrt(w_pos * (dn^2 + de^2) + w_height * dh^2 + w_course * wrap(dchi)^2).
Its position part lower-bounds the full value, so grid cells keyed on
(north, east, height) support ball queries (visit the 3x3x3 cell
neighborhood, filter by the exact metric) and exact nearest lookup (expand
cell rings until a ring's position lower bound exceeds the best full
distance found).

The planner calls these queries hundreds of thousands of times, so the whole
structure lives in flat arrays driven by numba kernels: an open-addressing
hash table maps packed cell coordinates to the head of an intrusive linked
list of entry ids. Ties always resolve to the lowest id, independent of
bucket order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

__all__ = ["MetricWeights", "metric_distance", "GridIndex"]

_EMPTY = np.int64(-1)
_COORD_BITS = 21
_COORD_OFFSET = 1 << 20
_HASH_MULT = np.uint64(0x9E3779B97F4A7C15)


@dataclass(frozen=True)
class MetricWeights:
    """Weights of the planning metric; course weight is in m^2/rad^2."""

    position: float = 1.0
    height: float = 1.0
    course: float = 25.0

    def __post_init__(self):
        if not (self.position > 0.0 and self.height > 0.0 and self.course >= 0.0):
            raise ValueError("metric weights must be positive (course may be 0)")


def metric_distance(a, b, weights: MetricWeights) -> float:
    """Weighted state-space distance between two (north, east, course, height) points."""
    dn = a[0] - b[0]
    de = a[1] - b[1]
    dchi = (a[2] - b[2] + math.pi) % (2.0 * math.pi) - math.pi
    dh = a[3] - b[3]
    return math.sqrt(
        weights.position * (dn * dn + de * de)
        + weights.height * dh * dh
        + weights.course * dchi * dchi
    )


_CELL_LIMIT = np.int64((1 << 20) - 2)


@njit(cache=True, inline="always")
def _cell_of(x, cell):
    # saturate far outside positions onto boundary cells; identical clamping on
    # insert and query keeps the 3x3x3 coverage guarantee intact
    i = np.int64(math.floor(x / cell))
    if i > _CELL_LIMIT:
        return _CELL_LIMIT
    if i < -_CELL_LIMIT:
        return -_CELL_LIMIT
    return i


@njit(cache=True, inline="always")
def _pack(ix, iy, iz):
    return (((ix + _COORD_OFFSET) << (2 * _COORD_BITS))
            | ((iy + _COORD_OFFSET) << _COORD_BITS)
            | (iz + _COORD_OFFSET))


@njit(cache=True, inline="always")
def _probe(table_keys, key):
    """Slot holding `key`, or the first empty slot on its probe path."""
    mask = np.uint64(table_keys.shape[0] - 1)
    slot = np.int64((np.uint64(key) * _HASH_MULT) & mask)
    while True:
        k = table_keys[slot]
        if k == key or k == _EMPTY:
            return slot
        slot = np.int64((np.uint64(slot) + np.uint64(1)) & mask)


@njit(cache=True)
def _insert(table_keys, table_heads, next_id, cell_of_id, coords, bbox,
            idx, north, east, course, height, cell):
    coords[idx, 0] = north
    coords[idx, 1] = east
    coords[idx, 2] = course
    coords[idx, 3] = height
    ci = _cell_of(north, cell)
    cj = _cell_of(east, cell)
    ck = _cell_of(height, cell)
    if bbox[0] > bbox[3]:  # empty box sentinel: lo > hi
        bbox[0] = ci
        bbox[1] = cj
        bbox[2] = ck
        bbox[3] = ci
        bbox[4] = cj
        bbox[5] = ck
    else:
        bbox[0] = min(bbox[0], ci)
        bbox[1] = min(bbox[1], cj)
        bbox[2] = min(bbox[2], ck)
        bbox[3] = max(bbox[3], ci)
        bbox[4] = max(bbox[4], cj)
        bbox[5] = max(bbox[5], ck)
    key = _pack(ci, cj, ck)
    cell_of_id[idx] = key
    slot = _probe(table_keys, key)
    if table_keys[slot] == _EMPTY:
        table_keys[slot] = key
        next_id[idx] = _EMPTY
        table_heads[slot] = idx
        return 1  # new table slot consumed
    next_id[idx] = table_heads[slot]
    table_heads[slot] = idx
    return 0


@njit(cache=True)
def _remove(table_keys, table_heads, next_id, cell_of_id, idx):
    key = cell_of_id[idx]
    slot = _probe(table_keys, key)
    node = table_heads[slot]
    if node == idx:
        table_heads[slot] = next_id[idx]
        return True
    while node != _EMPTY:
        after = next_id[node]
        if after == idx:
            next_id[node] = next_id[idx]
            return True
        node = after
    return False


@njit(cache=True)
def _rehash(old_keys, old_heads, new_keys, new_heads):
    for slot in range(old_keys.shape[0]):
        key = old_keys[slot]
        if key == _EMPTY:
            continue
        dest = _probe(new_keys, key)
        new_keys[dest] = key
        new_heads[dest] = old_heads[slot]


@njit(cache=True, inline="always")
def _pos_d2(coords, idx, qn, qe, qh, w_pos, w_h):
    dn = coords[idx, 0] - qn
    de = coords[idx, 1] - qe
    dh = coords[idx, 3] - qh
    return w_pos * (dn * dn + de * de) + w_h * dh * dh


@njit(cache=True, inline="always")
def _dist2(coords, idx, qn, qe, qchi, qh, w_pos, w_h, w_c):
    dchi = (coords[idx, 2] - qchi + math.pi) % (2.0 * math.pi) - math.pi
    return _pos_d2(coords, idx, qn, qe, qh, w_pos, w_h) + w_c * dchi * dchi


@njit(cache=True)
def _best_cost_within(table_keys, table_heads, next_id, coords, costs,
                      qn, qe, qchi, qh, radius, cell, w_pos, w_h, w_c):
    """Lowest-cost entry with metric distance <= radius; ties to lowest id."""
    r2 = radius * radius
    ci = _cell_of(qn, cell)
    cj = _cell_of(qe, cell)
    ck = _cell_of(qh, cell)
    best = np.int64(-1)
    best_cost = np.inf
    for di in range(-1, 2):
        for dj in range(-1, 2):
            for dk in range(-1, 2):
                slot = _probe(table_keys, _pack(ci + di, cj + dj, ck + dk))
                if table_keys[slot] == _EMPTY:
                    continue
                node = table_heads[slot]
                while node != _EMPTY:
                    # the position part lower-bounds the metric: skip early
                    if _pos_d2(coords, node, qn, qe, qh, w_pos, w_h) <= r2 and \
                            _dist2(coords, node, qn, qe, qchi, qh, w_pos, w_h, w_c) <= r2:
                        c = costs[node]
                        if c < best_cost or (c == best_cost and node < best):
                            best = node
                            best_cost = c
                    node = next_id[node]
    return best


@njit(cache=True)
def _nearest_within(table_keys, table_heads, next_id, coords,
                    qn, qe, qchi, qh, radius, cell, w_pos, w_h, w_c):
    """Nearest entry with metric distance <= radius; ties to lowest id."""
    r2 = radius * radius
    ci = _cell_of(qn, cell)
    cj = _cell_of(qe, cell)
    ck = _cell_of(qh, cell)
    best = np.int64(-1)
    best_d2 = np.inf
    for di in range(-1, 2):
        for dj in range(-1, 2):
            for dk in range(-1, 2):
                slot = _probe(table_keys, _pack(ci + di, cj + dj, ck + dk))
                if table_keys[slot] == _EMPTY:
                    continue
                node = table_heads[slot]
                while node != _EMPTY:
                    if _pos_d2(coords, node, qn, qe, qh, w_pos, w_h) <= r2:
                        d2 = _dist2(coords, node, qn, qe, qchi, qh, w_pos, w_h, w_c)
                        if d2 <= r2 and (d2 < best_d2 or (d2 == best_d2 and node < best)):
                            best = node
                            best_d2 = d2
                    node = next_id[node]
    return best, best_d2


@njit(cache=True)
def _nearest(table_keys, table_heads, next_id, coords,
             qn, qe, qchi, qh, cell, w_pos, w_h, w_c,
             lo_i, lo_j, lo_k, hi_i, hi_j, hi_k):
    """Exact nearest entry by ring expansion clipped to the occupied-cell box.

    Cells on a ring of Chebyshev radius L hold no point closer than
    (L - 1) * cell in raw position, so the search stops once that lower bound
    exceeds the best full-metric distance found. Rings are intersected with
    the occupied bounding box, which keeps far-away queries cheap.
    """
    ci = _cell_of(qn, cell)
    cj = _cell_of(qe, cell)
    ck = _cell_of(qh, cell)
    max_ring = max(
        max(abs(ci - lo_i), abs(hi_i - ci)),
        max(abs(cj - lo_j), abs(hi_j - cj)),
        max(abs(ck - lo_k), abs(hi_k - ck)),
    )
    # rings below the Chebyshev distance to the box are empty
    start = max(
        max(max(lo_i - ci, ci - hi_i, np.int64(0)),
            max(lo_j - cj, cj - hi_j, np.int64(0))),
        max(lo_k - ck, ck - hi_k, np.int64(0)),
    )
    pos_scale = math.sqrt(w_pos) * cell
    best = np.int64(-1)
    best_d2 = np.inf
    ring = start
    while ring <= max_ring:
        if best >= 0:
            lower = (ring - 1) * pos_scale
            if lower > 0.0 and lower * lower > best_d2:
                break
        i0 = max(-ring, lo_i - ci)
        i1 = min(ring, hi_i - ci)
        j0 = max(-ring, lo_j - cj)
        j1 = min(ring, hi_j - cj)
        k0 = max(-ring, lo_k - ck)
        k1 = min(ring, hi_k - ck)
        for di in range(i0, i1 + 1):
            on_i_face = abs(di) == ring
            for dj in range(j0, j1 + 1):
                on_face = on_i_face or abs(dj) == ring
                for dk in range(k0, k1 + 1):
                    if not (on_face or abs(dk) == ring):
                        continue  # interior of the cube, visited by earlier rings
                    slot = _probe(table_keys, _pack(ci + di, cj + dj, ck + dk))
                    if table_keys[slot] == _EMPTY:
                        continue
                    node = table_heads[slot]
                    while node != _EMPTY:
                        if _pos_d2(coords, node, qn, qe, qh, w_pos, w_h) <= best_d2:
                            d2 = _dist2(coords, node, qn, qe, qchi, qh, w_pos, w_h, w_c)
                            if d2 < best_d2 or (d2 == best_d2 and node < best):
                                best = node
                                best_d2 = d2
                        node = next_id[node]
        ring += 1
    return best, best_d2


@njit(cache=True)
def _collect_within(table_keys, table_heads, next_id, coords,
                    qn, qe, qchi, qh, radius, cell, w_pos, w_h, w_c,
                    out_ids, out_d):
    r2 = radius * radius
    ci = _cell_of(qn, cell)
    cj = _cell_of(qe, cell)
    ck = _cell_of(qh, cell)
    count = 0
    for di in range(-1, 2):
        for dj in range(-1, 2):
            for dk in range(-1, 2):
                slot = _probe(table_keys, _pack(ci + di, cj + dj, ck + dk))
                if table_keys[slot] == _EMPTY:
                    continue
                node = table_heads[slot]
                while node != _EMPTY:
                    d2 = _dist2(coords, node, qn, qe, qchi, qh, w_pos, w_h, w_c)
                    if d2 <= r2:
                        if count < out_ids.shape[0]:
                            out_ids[count] = node
                            out_d[count] = math.sqrt(d2)
                        count += 1
                    node = next_id[node]
    return count


class GridIndex:
    """Grid-bucketed point set over (north, east, course, height) states.

    `cell_size` is the bucket edge length in raw position meters; ball
    queries are valid for radii up to cell_size * sqrt(w_pos) (they only
    visit the 3x3x3 cell neighborhood around the query).
    """

    def __init__(self, cell_size: float, weights: MetricWeights, capacity: int = 1024):
        if not cell_size > 0.0:
            raise ValueError("cell_size must be > 0")
        self.cell_size = float(cell_size)
        self.weights = weights
        self._w = (weights.position, weights.height, weights.course)
        self._coords = np.full((capacity, 4), np.nan)
        self._next = np.full(capacity, _EMPTY, dtype=np.int64)
        self._cell_of_id = np.zeros(capacity, dtype=np.int64)
        self._alive = np.zeros(capacity, dtype=bool)
        table = 256
        self._table_keys = np.full(table, _EMPTY, dtype=np.int64)
        self._table_heads = np.full(table, _EMPTY, dtype=np.int64)
        self._slots_used = 0
        self._count = 0
        # occupied-cell bounding box [lo_i, lo_j, lo_k, hi_i, hi_j, hi_k];
        # lo > hi marks it empty
        self._bbox = np.array([1, 0, 0, 0, 0, 0], dtype=np.int64)
        self._max_ball = self.cell_size * math.sqrt(weights.position)

    def __len__(self) -> int:
        return self._count

    def _ensure_node_capacity(self, idx: int) -> None:
        cap = self._coords.shape[0]
        if idx < cap:
            return
        new_cap = max(2 * cap, idx + 1)
        coords = np.full((new_cap, 4), np.nan)
        coords[:cap] = self._coords
        self._coords = coords
        nxt = np.full(new_cap, _EMPTY, dtype=np.int64)
        nxt[:cap] = self._next
        self._next = nxt
        cells = np.zeros(new_cap, dtype=np.int64)
        cells[:cap] = self._cell_of_id
        self._cell_of_id = cells
        alive = np.zeros(new_cap, dtype=bool)
        alive[:cap] = self._alive
        self._alive = alive

    def _maybe_grow_table(self) -> None:
        if 2 * self._slots_used < self._table_keys.shape[0]:
            return
        new_size = 2 * self._table_keys.shape[0]
        keys = np.full(new_size, _EMPTY, dtype=np.int64)
        heads = np.full(new_size, _EMPTY, dtype=np.int64)
        _rehash(self._table_keys, self._table_heads, keys, heads)
        self._table_keys = keys
        self._table_heads = heads

    def insert(self, idx: int, state) -> None:
        self._ensure_node_capacity(idx)
        if self._alive[idx]:
            raise ValueError(f"id {idx} already present")
        self._maybe_grow_table()
        used = _insert(
            self._table_keys, self._table_heads, self._next, self._cell_of_id,
            self._coords, self._bbox, idx,
            state[0], state[1], state[2], state[3],
            self.cell_size,
        )
        self._slots_used += used
        self._alive[idx] = True
        self._count += 1

    def remove(self, idx: int) -> None:
        if idx >= self._alive.shape[0] or not self._alive[idx]:
            raise KeyError(f"id {idx} not present")
        found = _remove(self._table_keys, self._table_heads, self._next,
                        self._cell_of_id, idx)
        if not found:
            raise KeyError(f"id {idx} missing from its bucket")
        self._alive[idx] = False
        self._count -= 1

    def _check_radius(self, radius: float) -> None:
        if radius > self._max_ball * (1.0 + 1e-12):
            raise ValueError(
                f"radius {radius} exceeds the index's query limit {self._max_ball}"
            )

    def query_ball(self, q, radius: float) -> tuple[np.ndarray, np.ndarray]:
        """Ids (ascending) and metric distances of entries within `radius` of q."""
        self._check_radius(radius)
        if self._count == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        out_ids = np.empty(max(self._count, 1), dtype=np.int64)
        out_d = np.empty(out_ids.shape[0])
        n = _collect_within(
            self._table_keys, self._table_heads, self._next, self._coords,
            q[0], q[1], q[2], q[3],
            radius, self.cell_size, *self._w, out_ids, out_d,
        )
        ids = out_ids[:n]
        d = out_d[:n]
        order = np.argsort(ids)
        return ids[order], d[order]

    def best_cost_within(self, q, radius: float, costs: np.ndarray) -> int:
        """Lowest-cost entry within `radius` (ties to lowest id); -1 if none."""
        self._check_radius(radius)
        if self._count == 0:
            return -1
        return int(_best_cost_within(
            self._table_keys, self._table_heads, self._next, self._coords, costs,
            q[0], q[1], q[2], q[3],
            radius, self.cell_size, *self._w,
        ))

    def nearest_within(self, q, radius: float) -> tuple[int, float]:
        """Nearest entry within `radius` (ties to lowest id); (-1, inf) if none."""
        self._check_radius(radius)
        if self._count == 0:
            return -1, math.inf
        idx, d2 = _nearest_within(
            self._table_keys, self._table_heads, self._next, self._coords,
            q[0], q[1], q[2], q[3],
            radius, self.cell_size, *self._w,
        )
        return int(idx), math.sqrt(d2) if idx >= 0 else math.inf

    def nearest(self, q) -> tuple[int, float]:
        """Exact nearest entry by the full metric; (-1, inf) when empty."""
        if self._count == 0:
            return -1, math.inf
        b = self._bbox
        idx, d2 = _nearest(
            self._table_keys, self._table_heads, self._next, self._coords,
            q[0], q[1], q[2], q[3],
            self.cell_size, *self._w,
            b[0], b[1], b[2], b[3], b[4], b[5],
        )
        return int(idx), math.sqrt(d2) if idx >= 0 else math.inf
