"""Finite-resolution decomposition: grid dynamics, nonwandering estimate,
critical components U(c) and their merging into at most #C classes.

The grid graph over-approximates the map: every true transition between
cells is an edge (outward-rounded images, both one-sided branches at cells
meeting the critical set), so the chain-recurrent cell set is a certified
outer estimate of the nonwandering set.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .cells import cells_containing, runs
from .errors import DichotomyViolation, ResolutionTooFine
from .maps import PiecewiseMap

#: outward rounding margin (absolute) for cell images
EDGE_MARGIN = 1e-12

#: memory guard
MIN_EPS = 1e-5


@dataclass
class GridDynamics:
    eps: float
    ncells: int
    ranges: list[list[tuple[int, int]]]   # per cell: target index ranges [lo, hi]
    pmap: PiecewiseMap

    def targets(self, i: int) -> np.ndarray:
        segs = [np.arange(lo, hi + 1) for lo, hi in self.ranges[i]]
        return np.unique(np.concatenate(segs))

    def has_edge(self, i: int, j: int) -> bool:
        return any(lo <= j <= hi for lo, hi in self.ranges[i])

    def adjacency_csr(self) -> tuple[np.ndarray, np.ndarray]:
        counts = np.zeros(self.ncells + 1, dtype=np.int64)
        for i, segs in enumerate(self.ranges):
            counts[i + 1] = sum(hi - lo + 1 for lo, hi in segs)
        indptr = np.cumsum(counts)
        indices = np.empty(indptr[-1], dtype=np.int64)
        for i, segs in enumerate(self.ranges):
            pos = indptr[i]
            for lo, hi in segs:
                k = hi - lo + 1
                indices[pos : pos + k] = np.arange(lo, hi + 1)
                pos += k
        return indptr, indices


def grid_graph(pmap: PiecewiseMap, eps: float) -> GridDynamics:
    """Directed graph on eps-cells whose edges cover every true transition.

    Cell-image endpoints are evaluated exactly (cell boundaries and branch
    coefficients are rationals), with the cell-of-a-value convention
    half-open: a value exactly on a boundary belongs to the cell above.
    Exactness matters: an invariant boundary value (say a fixed interface
    between two invariant halves) must not leak an edge into the cell below,
    or separate components would merge.  Values not exactly on a boundary
    get one cell of widening whenever a float evaluation could cross it.
    """
    if eps < MIN_EPS:
        raise ResolutionTooFine(f"eps={eps} below the guard {MIN_EPS}")
    from fractions import Fraction

    eps_fr = Fraction(eps)
    inv = 1 / eps_fr
    noise = Fraction(1, 10**12) * inv  # float-noise guard, in cell units
    n = max(1, math.ceil(round(1.0 / eps, 9)))
    breaks = list(pmap.breakpoints[1:-1])
    critical = set(pmap.critical)
    one = Fraction(1)
    ranges: list[list[tuple[int, int]]] = []
    for i in range(n):
        lo = i * eps_fr
        hi = min((i + 1) * eps_fr, one)
        marks = [lo] + [b for b in breaks if lo < b < hi] + [hi]
        segs = []
        for a, b in zip(marks, marks[1:]):
            if b <= a:
                continue
            idx = pmap.branch_index(float((a + b) / 2))
            br = pmap.branches[idx]
            va, vb = br.value_exact(a), br.value_exact(b)
            # openness: a critical endpoint is excluded from the domain, and
            # the half-open cell convention excludes the cell's own top (< 1)
            a_open = a in critical
            b_open = b in critical or (b == hi and b != one)
            if va <= vb:
                vlo, vhi = va, vb
                lo_open, hi_open = a_open, b_open
            else:
                vlo, vhi = vb, va
                lo_open, hi_open = b_open, a_open
            slo = vlo * inv
            shi = vhi * inv
            ia = int(slo)  # open or attained: values just above a boundary sit in its cell
            frac_hi = shi - int(shi)
            if frac_hi == 0 and hi_open:
                ib = int(shi) - 1
            else:
                ib = int(shi)
            if slo - ia != 0 and slo - ia < noise:
                ia -= 1
            if frac_hi != 0 and int(shi) + 1 - shi < noise:
                ib += 1
            segs.append((max(0, ia), min(n - 1, max(ib, ia))))
        segs.sort()
        merged = [segs[0]]
        for a, b in segs[1:]:
            if a <= merged[-1][1] + 1:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        ranges.append(merged)
    return GridDynamics(eps, n, ranges, pmap)


def nonwandering_estimate(gd: GridDynamics) -> np.ndarray:
    """Cells on a directed cycle: a chain-recurrent outer estimate of Omega(f)."""
    indptr, indices = gd.adjacency_csr()
    n = gd.ncells
    index = np.full(n, -1, dtype=np.int64)
    low = np.zeros(n, dtype=np.int64)
    on_stack = np.zeros(n, dtype=bool)
    comp = np.full(n, -1, dtype=np.int64)
    comp_size = []
    counter = 0
    ncomp = 0
    stack: list[int] = []
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            advanced = False
            for k in range(indptr[v] + pi, indptr[v + 1]):
                w = indices[k]
                if index[w] == -1:
                    work[-1] = (v, k - indptr[v] + 1)
                    work.append((int(w), 0))
                    advanced = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            if low[v] == index[v]:
                size = 0
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp[w] = ncomp
                    size += 1
                    if w == v:
                        break
                comp_size.append(size)
                ncomp += 1
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    sizes = np.asarray(comp_size)
    recurrent = sizes[comp] >= 2
    for i in range(n):
        if not recurrent[i] and gd.has_edge(i, i):
            recurrent[i] = True
    return np.flatnonzero(recurrent).astype(np.int64)


def component_of_critical(gd: GridDynamics, c: float, omega: np.ndarray | None = None) -> np.ndarray:
    """U(c): nonwandering cells whose forward-reachable set meets the cell of c."""
    if omega is None:
        omega = nonwandering_estimate(gd)
    n = gd.ncells
    indptr, indices = gd.adjacency_csr()
    # reverse adjacency
    counts = np.bincount(indices, minlength=n)
    rptr = np.concatenate([[0], np.cumsum(counts)])
    rind = np.empty(len(indices), dtype=np.int64)
    fill = rptr[:-1].copy()
    for i in range(n):
        for k in range(indptr[i], indptr[i + 1]):
            w = indices[k]
            rind[fill[w]] = i
            fill[w] += 1
    seeds = [cc for cc in cells_containing(float(c), gd.eps)]
    reach = np.zeros(n, dtype=bool)
    stack = list(seeds)
    for s in seeds:
        reach[s] = True
    while stack:
        v = stack.pop()
        for k in range(rptr[v], rptr[v + 1]):
            u = rind[k]
            if not reach[u]:
                reach[u] = True
                stack.append(int(u))
    mask = np.zeros(n, dtype=bool)
    mask[omega] = True
    return np.flatnonzero(reach & mask).astype(np.int64)


@dataclass
class ComponentEstimate:
    eps: float
    per_critical: dict[float, np.ndarray]
    classes: list[dict] = field(default_factory=list)

    def class_count(self) -> int:
        return len(self.classes)

    def to_json(self) -> str:
        doc = {
            "schema": 1,
            "eps": self.eps,
            "classes": [
                {
                    "representative": cl["representative"],
                    "members": cl["members"],
                    "cell_ranges": runs(cl["cells"]),
                }
                for cl in self.classes
            ],
        }
        return json.dumps(doc, sort_keys=True, indent=1)


def merge_components(estimates: dict[float, np.ndarray], eps: float) -> ComponentEstimate:
    """Merge the U(c) into equivalence classes.

    Two components merge when their overlap exceeds half the smaller one;
    unmerged pairs must overlap in at most a boundary layer (two cells per
    component boundary), else the resolution is too coarse and
    DichotomyViolation is raised.
    """
    keys = [c for c, cells in estimates.items() if len(cells)]
    parent = {c: c for c in keys}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    for i, c1 in enumerate(keys):
        for c2 in keys[i + 1 :]:
            a, b = estimates[c1], estimates[c2]
            overlap = len(np.intersect1d(a, b, assume_unique=True))
            smaller = min(len(a), len(b))
            if overlap > smaller / 2:
                parent[find(c2)] = find(c1)
            else:
                allowance = 2 * max(len(runs(a)), len(runs(b)))
                if overlap > allowance:
                    raise DichotomyViolation(c1, c2, overlap / smaller)
    groups: dict[float, list[float]] = {}
    for c in keys:
        groups.setdefault(find(c), []).append(c)
    classes = []
    for rep, members in sorted(groups.items()):
        cells = np.unique(np.concatenate([estimates[c] for c in members]))
        classes.append({"representative": rep, "members": members, "cells": cells})
    return ComponentEstimate(eps, dict(estimates), classes)


def decompose(pmap: PiecewiseMap, eps: float) -> ComponentEstimate:
    """Full pipeline: grid graph, nonwandering estimate, U(c), merged classes."""
    gd = grid_graph(pmap, eps)
    omega = nonwandering_estimate(gd)
    per_c = {c: component_of_critical(gd, c, omega) for c in pmap.fcritical}
    est = merge_components(per_c, eps)
    if est.class_count() > len(pmap.critical):
        raise DichotomyViolation(0.0, 0.0, 1.0)
    return est
