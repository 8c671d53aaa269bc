"""Maximally stable extremal region extraction on single-channel rasters.

Extremal regions are connected components of gray-level threshold sets; the
stable ones are those whose area changes slowly while the threshold sweeps.
The nested family of all extremal regions is represented compactly by a
component tree (max-tree) built with a union-find flood over pixels sorted
by gray value.  Stability is then evaluated per tree node, and nodes that
are local stability minima below a variation bound are reported as regions.

Both polarities are supported: bright regions come from the max-tree of the
raster itself, dark regions from the max-tree of the inverted raster, which
makes the two extractions exact mirror images of each other.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

DARK_ON_LIGHT = "dark-on-light"
LIGHT_ON_DARK = "light-on-dark"
POLARITIES = (DARK_ON_LIGHT, LIGHT_ON_DARK)


@dataclass(frozen=True)
class MserParams:
    """Extraction thresholds.

    ``delta`` is the half-width of the gray-level band used by the stability
    test, ``min_area``/``max_area`` are region area bounds as fractions of
    the raster area, and ``max_variation`` is the stability cutoff.
    """

    delta: int = 2
    min_area: float = 0.00007
    max_area: float = 0.5
    max_variation: float = 0.3

    def __post_init__(self):
        if not 1 <= int(self.delta) <= 127:
            raise ValueError("delta must be in [1, 127]")
        if not 0.0 <= self.min_area <= self.max_area <= 1.0:
            raise ValueError("need 0 <= min_area <= max_area <= 1")
        if self.max_variation <= 0.0:
            raise ValueError("max_variation must be positive")


@dataclass
class Region:
    """A detected stable region on one raster.

    ``pixels`` is an (N, 2) int32 array of (x, y) pairs in raster
    coordinates, ``bbox`` is inclusive (xmin, ymin, xmax, ymax), and
    ``level`` is the gray level of the node in the processed frame (the
    inverted raster for dark-on-light polarity).
    """

    pixels: np.ndarray
    bbox: tuple
    centroid: tuple
    level: int
    polarity: str
    source: tuple = ("I", 1)

    @property
    def area(self) -> int:
        return self.pixels.shape[0]


@dataclass
class ComponentTree:
    """Compact max-tree of a raster: one entry per distinct component.

    Node ids are topologically ordered (every parent id is smaller than its
    children's ids, the root is node 0).  ``node_of`` maps each pixel to the
    smallest component containing it.  Areas, bounding boxes and coordinate
    sums are subtree-cumulative.
    """

    shape: tuple
    level: np.ndarray
    parent: np.ndarray
    area: np.ndarray
    xmin: np.ndarray
    ymin: np.ndarray
    xmax: np.ndarray
    ymax: np.ndarray
    sum_x: np.ndarray
    sum_y: np.ndarray
    node_of: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.level.size

    def pixel_sets(self) -> list:
        """All node pixel sets as frozensets of flat indices (test helper;
        cost grows with tree depth, intended for small rasters only)."""
        sets = [set() for _ in range(self.n_nodes)]
        flat = self.node_of.ravel()
        for p in range(flat.size):
            nid = flat[p]
            while nid >= 0:
                sets[nid].add(p)
                nid = self.parent[nid]
        return [frozenset(s) for s in sets]


@njit(cache=True, nogil=True)
def _flood_tree(values, width):
    """Union-find max-tree construction over pixels sorted by gray value.

    Returns (parent, order): ``parent`` links every pixel toward the root
    in canonical form (a pixel is a node representative iff its parent has
    a different gray value, or it is the root), ``order`` lists pixels in
    processing order (descending value, ascending index within a value).
    """
    n = values.size

    # counting sort, key = 255 - value
    counts = np.zeros(257, np.int64)
    for i in range(n):
        counts[(255 - values[i]) + 1] += 1
    for b in range(1, 257):
        counts[b] += counts[b - 1]
    order = np.empty(n, np.int64)
    fill = counts[:256].copy()
    for i in range(n):
        b = 255 - values[i]
        order[fill[b]] = i
        fill[b] += 1

    parent = np.full(n, -1, np.int64)
    zpar = np.full(n, -1, np.int64)
    for oi in range(n):
        p = order[oi]
        parent[p] = p
        zpar[p] = p
        x = p % width
        for k in range(4):
            if k == 0:
                if x == 0:
                    continue
                q = p - 1
            elif k == 1:
                if x == width - 1:
                    continue
                q = p + 1
            elif k == 2:
                if p < width:
                    continue
                q = p - width
            else:
                if p + width >= n:
                    continue
                q = p + width
            if zpar[q] < 0:
                continue
            r = q
            while zpar[r] != r:
                r = zpar[r]
            s = q
            while zpar[s] != r:
                t = zpar[s]
                zpar[s] = r
                s = t
            if r != p:
                parent[r] = p
                zpar[r] = p

    # canonicalization, root-to-leaf order
    for oi in range(n - 1, -1, -1):
        p = order[oi]
        q = parent[p]
        if values[parent[q]] == values[q]:
            parent[p] = parent[q]
    return parent, order


@njit(cache=True, nogil=True)
def _node_tables(values, parent, order, width):
    """Compact the canonicalized pixel tree into per-node arrays."""
    n = values.size
    node_id = np.full(n, -1, np.int32)
    m = 0
    for oi in range(n - 1, -1, -1):
        p = order[oi]
        if parent[p] == p or values[parent[p]] != values[p]:
            node_id[p] = m
            m += 1

    node_level = np.empty(m, np.int32)
    node_parent = np.empty(m, np.int32)
    for oi in range(n - 1, -1, -1):
        p = order[oi]
        nid = node_id[p]
        if nid < 0:
            continue
        node_level[nid] = values[p]
        if parent[p] == p:
            node_parent[nid] = -1
        else:
            node_parent[nid] = node_id[parent[p]]

    node_of = np.empty(n, np.int32)
    area = np.zeros(m, np.int64)
    big = np.int64(1) << 60
    xmin = np.full(m, big, np.int64)
    ymin = np.full(m, big, np.int64)
    xmax = np.full(m, -1, np.int64)
    ymax = np.full(m, -1, np.int64)
    sum_x = np.zeros(m, np.float64)
    sum_y = np.zeros(m, np.float64)
    for p in range(n):
        nid = node_id[p]
        if nid < 0:
            nid = node_id[parent[p]]
        node_of[p] = nid
        x = p % width
        y = p // width
        area[nid] += 1
        if x < xmin[nid]:
            xmin[nid] = x
        if x > xmax[nid]:
            xmax[nid] = x
        if y < ymin[nid]:
            ymin[nid] = y
        if y > ymax[nid]:
            ymax[nid] = y
        sum_x[nid] += x
        sum_y[nid] += y

    # node ids are topological, so children accumulate before their parent
    for nid in range(m - 1, 0, -1):
        pid = node_parent[nid]
        area[pid] += area[nid]
        if xmin[nid] < xmin[pid]:
            xmin[pid] = xmin[nid]
        if ymin[nid] < ymin[pid]:
            ymin[pid] = ymin[nid]
        if xmax[nid] > xmax[pid]:
            xmax[pid] = xmax[nid]
        if ymax[nid] > ymax[pid]:
            ymax[pid] = ymax[nid]
        sum_x[pid] += sum_x[nid]
        sum_y[pid] += sum_y[nid]
    return node_of, node_level, node_parent, area, xmin, ymin, xmax, ymax, sum_x, sum_y


@njit(cache=True, nogil=True)
def _heavy_children(node_parent, area):
    """Largest-area child per node (ties keep the smaller node id)."""
    m = node_parent.size
    heavy = np.full(m, -1, np.int32)
    for nid in range(1, m):
        pid = node_parent[nid]
        h = heavy[pid]
        if h < 0 or area[nid] > area[h]:
            heavy[pid] = nid
    return heavy


@njit(cache=True, nogil=True)
def _variation(node_level, node_parent, area, heavy, delta):
    """Area variation per node: the symmetric rate of area change across a
    gray band of half-width delta, minimized over the node's threshold span.

    The area of the enclosing component delta below a threshold is found by
    walking ancestors (past the root it is the whole raster); the area delta
    above is found by walking largest-area children (a component that has
    dissolved counts as area 0).
    """
    m = node_level.size
    var = np.empty(m, np.float64)
    for nid in range(m):
        lev = node_level[nid]
        pid = node_parent[nid]
        plev = -1 if pid < 0 else node_level[pid]
        if lev - plev >= 2 * delta + 1:
            # some threshold in the span sees no area change at all
            var[nid] = 0.0
            continue
        a_node = float(area[nid])
        best = np.inf
        for t in range(plev + 1, lev + 1):
            td = t - delta
            if td > plev:
                a_big = area[nid]
            else:
                up = nid
                while node_parent[up] >= 0 and node_level[node_parent[up]] >= td:
                    up = node_parent[up]
                a_big = area[up]
            tu = t + delta
            if tu <= lev:
                a_small = area[nid]
            else:
                down = nid
                a_small = np.int64(-1)
                while node_level[down] < tu:
                    hc = heavy[down]
                    if hc < 0:
                        a_small = 0
                        break
                    down = hc
                if a_small < 0:
                    a_small = area[down]
            q = (a_big - a_small) / a_node
            if q < best:
                best = q
        var[nid] = best
    return var


@njit(cache=True, nogil=True)
def _collect_pixels(node_of, node_parent, selected, area, width):
    """Gather pixel coordinates for every selected node.

    Returns (coords, offsets, slot_of): coords is an (total, 2) array of
    (x, y) pairs, node ``slot_of[nid]`` owns coords[offsets[s]:offsets[s+1]].
    Pixels within a node appear in raster scan order.
    """
    m = node_parent.size
    n = node_of.size

    # nearest selected ancestor-or-self, then the next strict one above it
    nsa = np.full(m, -1, np.int32)
    for nid in range(m):
        pid = node_parent[nid]
        up = np.int32(-1) if pid < 0 else nsa[pid]
        nsa[nid] = np.int32(nid) if selected[nid] else up
    nsa_up = np.full(m, -1, np.int32)
    for nid in range(m):
        pid = node_parent[nid]
        if pid >= 0:
            nsa_up[nid] = nsa[pid]

    slot_of = np.full(m, -1, np.int32)
    n_sel = 0
    total = np.int64(0)
    for nid in range(m):
        if selected[nid]:
            slot_of[nid] = n_sel
            n_sel += 1
            total += area[nid]
    offsets = np.zeros(n_sel + 1, np.int64)
    s = 0
    for nid in range(m):
        if selected[nid]:
            offsets[s + 1] = offsets[s] + area[nid]
            s += 1
    fill = offsets[:n_sel].copy()

    coords = np.empty((total, 2), np.int32)
    for p in range(n):
        nid = nsa[node_of[p]]
        while nid >= 0:
            s = slot_of[nid]
            k = fill[s]
            coords[k, 0] = p % width
            coords[k, 1] = p // width
            fill[s] = k + 1
            nid = nsa_up[nid]
    return coords, offsets, slot_of


def component_tree(raster: np.ndarray) -> ComponentTree:
    """Build the max-tree of a 2-D uint8 raster (4-connectivity)."""
    work = _check_raster(raster)
    h, w = work.shape
    flat = work.ravel()
    parent, order = _flood_tree(flat, w)
    (node_of, level, node_parent, area,
     xmin, ymin, xmax, ymax, sum_x, sum_y) = _node_tables(flat, parent, order, w)
    return ComponentTree(
        shape=(h, w), level=level, parent=node_parent, area=area,
        xmin=xmin, ymin=ymin, xmax=xmax, ymax=ymax,
        sum_x=sum_x, sum_y=sum_y, node_of=node_of.reshape(h, w),
    )


def extract_mser(raster, params: MserParams | None = None,
                 polarity: str = DARK_ON_LIGHT, source: tuple = ("I", 1)) -> list:
    """Detect maximally stable regions of one polarity on a uint8 raster.

    Dark-on-light regions are extracted from the inverted raster, so the two
    polarities are exact duals.  The returned regions are sorted by area
    (largest first) with positional tie-breaks, and their pixel sets are
    nested or disjoint within one call.
    """
    if params is None:
        params = MserParams()
    work = _check_raster(raster)
    if polarity == DARK_ON_LIGHT:
        work = (255 - work.astype(np.int16)).astype(np.uint8)
    elif polarity != LIGHT_ON_DARK:
        raise ValueError(f"unknown polarity {polarity!r}")

    tree = component_tree(work)
    m = tree.n_nodes
    npix = work.size
    heavy = _heavy_children(tree.parent, tree.area)
    var = _variation(tree.level, tree.parent, tree.area, heavy, int(params.delta))

    sel = var <= params.max_variation
    sel &= tree.area >= params.min_area * npix
    sel &= tree.area <= params.max_area * npix
    sel &= tree.area < npix  # never report the whole raster

    # keep only local stability minima along root-leaf paths
    parent_var = np.where(tree.parent >= 0, var[np.maximum(tree.parent, 0)], np.inf)
    sel &= var <= parent_var
    child_min = np.full(m, np.inf)
    if m > 1:
        np.minimum.at(child_min, tree.parent[1:], var[1:])
    sel &= var <= child_min

    coords, offsets, slot_of = _collect_pixels(
        tree.node_of.ravel(), tree.parent, sel, tree.area, work.shape[1])

    regions = []
    for nid in np.flatnonzero(sel):
        s = slot_of[nid]
        pix = coords[offsets[s]:offsets[s + 1]]
        a = tree.area[nid]
        regions.append(Region(
            pixels=pix,
            bbox=(int(tree.xmin[nid]), int(tree.ymin[nid]),
                  int(tree.xmax[nid]), int(tree.ymax[nid])),
            centroid=(tree.sum_x[nid] / a, tree.sum_y[nid] / a),
            level=int(tree.level[nid]),
            polarity=polarity,
            source=tuple(source),
        ))
    regions.sort(key=lambda r: (-r.area, r.bbox[1], r.bbox[0], r.bbox[3],
                                r.bbox[2], r.level))
    return regions


def label_raster(regions, shape) -> np.ndarray:
    """Paint region indices (1-based) into an int32 raster, smaller regions
    over larger ones.  Debug visualization helper."""
    out = np.zeros(shape, np.int32)
    for idx in np.argsort([-r.area for r in regions], kind="stable"):
        r = regions[idx]
        out[r.pixels[:, 1], r.pixels[:, 0]] = idx + 1
    return out


def _check_raster(raster) -> np.ndarray:
    arr = np.asarray(raster)
    if arr.ndim != 2:
        raise ValueError("raster must be 2-D")
    if arr.dtype != np.uint8:
        raise ValueError("raster must be uint8")
    if arr.size == 0:
        raise ValueError("empty raster")
    return np.ascontiguousarray(arr)
