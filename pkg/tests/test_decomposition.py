from fractions import Fraction

import numpy as np
import pytest

from intervaldyn import PiecewiseMap, catalog, poly_branch
from intervaldyn.cells import cells_containing
from intervaldyn.decomposition import (
    component_of_critical,
    decompose,
    grid_graph,
    merge_components,
    nonwandering_estimate,
)
from intervaldyn.errors import DichotomyViolation, ResolutionTooFine


def halving_with_critical():
    h = Fraction(1, 2)
    return PiecewiseMap(
        [
            poly_branch(0, h, (0, h), "increasing"),
            poly_branch(h, 1, (0, h), "increasing"),
        ],
        critical=[h],
        name="halving-split",
    )


def test_grid_graph_doubling_eighth(doubling_map):
    gd = grid_graph(doubling_map, 1 / 8)
    t0 = set(gd.targets(0).tolist())
    assert {0, 1} <= t0 <= {0, 1, 2}  # image of [0,1/8] is [0,1/4]


def test_grid_graph_critical_cell_logistic4(logistic4):
    gd = grid_graph(logistic4, 1 / 8)
    # both cells meeting c=1/2 map into [f(3/8), 1] = [15/16, 1]: the top cell
    for i in (3, 4):
        assert set(gd.targets(i).tolist()) == {7}


def test_grid_over_approximation(logistic4, doubling_map, bimodal_map, lorenz_map):
    rng = np.random.default_rng(123)
    for pmap in (logistic4, doubling_map, bimodal_map, lorenz_map):
        gd = grid_graph(pmap, 2.0**-8)
        xs = rng.uniform(0, 1, 2500)
        for x in xs:
            x = float(x)
            try:
                y = pmap.evaluate(x)
            except Exception:
                continue
            i = min(int(x / gd.eps), gd.ncells - 1)
            j = min(int(y / gd.eps), gd.ncells - 1)
            assert gd.has_edge(i, j), (pmap.name, x, y, i, j)


def test_resolution_guard(logistic4):
    with pytest.raises(ResolutionTooFine):
        grid_graph(logistic4, 1e-6)


def test_nonwandering_logistic32():
    pmap = catalog.logistic(Fraction(16, 5))
    gd = grid_graph(pmap, 1e-3)
    omega = nonwandering_estimate(gd)
    lam = 3.2
    keys = [0.0, 1 - 1 / lam]
    r = (lam + 1) * (lam - 3)
    keys += [(lam + 1 - r**0.5) / (2 * lam), (lam + 1 + r**0.5) / (2 * lam)]
    for x in keys:
        assert any(c in omega for c in cells_containing(x, 1e-3)), x
    assert len(omega) <= 60  # bounded inflation around the recurrent pieces


def test_nonwandering_logistic4_full(logistic4):
    gd = grid_graph(logistic4, 2.0**-8)
    omega = nonwandering_estimate(gd)
    assert len(omega) == gd.ncells  # chain recurrence fills [0,1]


def test_nonwandering_contraction_sink():
    pmap = halving_with_critical()
    gd = grid_graph(pmap, 2.0**-8)
    omega = nonwandering_estimate(gd)
    assert all(c <= 2 for c in omega)  # only a neighborhood of 0


def test_component_empty_for_unreachable_critical():
    pmap = halving_with_critical()
    gd = grid_graph(pmap, 2.0**-8)
    u = component_of_critical(gd, 0.5)
    assert len(u) == 0


def test_component_full_logistic4(logistic4):
    gd = grid_graph(logistic4, 2.0**-8)
    omega = nonwandering_estimate(gd)
    u = component_of_critical(gd, 0.5, omega)
    assert np.array_equal(u, omega)


def test_components_bimodal_disjoint(bimodal_map):
    est = decompose(bimodal_map, 2.0**-8)
    assert est.class_count() == 2
    a = next(cl["cells"] for cl in est.classes if 0.2 in cl["members"])
    b = next(cl["cells"] for cl in est.classes if 0.8 in cl["members"])
    overlap = np.intersect1d(a, b)
    assert len(overlap) <= 4  # boundary cells at the interface only
    assert a.max() <= (1 << 7) + 1 and b.min() >= (1 << 7) - 1  # halves separated


def test_components_shared_cycle_zigzag():
    est = decompose(catalog.zigzag3(), 2.0**-8)
    assert est.class_count() == 1  # both critical points share one transitive cycle
    assert set(est.classes[0]["members"]) == {1 / 3, 2 / 3}


def test_class_count_bound_catalog(logistic4, tent2, doubling_map, bimodal_map, lorenz_map):
    for pmap in (logistic4, tent2, doubling_map, bimodal_map, lorenz_map, catalog.zigzag3()):
        for eps in (2.0**-8, 2.0**-10):
            est = decompose(pmap, eps)
            assert est.class_count() <= len(pmap.critical), pmap.name


def test_forward_preimage_closure(logistic4, bimodal_map):
    # nonwandering predecessors of U(c) stay in U(c): the reachability-level
    # form of g^{-1}(U(c)) = U(c)
    for pmap in (logistic4, bimodal_map):
        gd = grid_graph(pmap, 2.0**-8)
        omega = nonwandering_estimate(gd)
        omega_set = set(omega.tolist())
        for c in pmap.fcritical:
            u = set(component_of_critical(gd, c, omega).tolist())
            for i in omega:
                if any(lo <= j <= hi for lo, hi in gd.ranges[i] for j in u):
                    if int(i) in omega_set and any(
                        j in u for j in gd.targets(int(i))
                    ):
                        assert int(i) in u


def test_monotone_in_eps(bimodal_map):
    pmap = catalog.logistic(Fraction(16, 5))
    for m in (pmap, bimodal_map):
        fine = grid_graph(m, 2.0**-9)
        coarse = grid_graph(m, 2.0**-8)
        om_f = nonwandering_estimate(fine)
        om_c = set(nonwandering_estimate(coarse).tolist())
        coarsened = {int(c) // 2 for c in om_f}
        assert coarsened <= om_c


def test_merge_dichotomy_violation():
    a = np.arange(0, 60, dtype=np.int64)
    b = np.arange(40, 100, dtype=np.int64)  # overlap 20 = third of each
    with pytest.raises(DichotomyViolation):
        merge_components({0.3: a, 0.7: b}, 2.0**-8)


def test_merge_near_total_overlap_merges():
    a = np.arange(0, 64, dtype=np.int64)
    b = np.arange(0, 60, dtype=np.int64)
    est = merge_components({0.3: a, 0.7: b}, 2.0**-8)
    assert est.class_count() == 1
