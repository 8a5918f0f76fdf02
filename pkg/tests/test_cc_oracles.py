import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from cc_algorithms import Archive, ArchiveMember, decode_alpha
from cc_core import Confidence, StochItem, g_value, lambda_set
from cc_oracles import (
    brute_force_front, brute_force_optimum, extreme_point_set, greedy_uniform, kruskal_lambda,
    mann_whitney_test, mann_whitney_u,
)
from cc_problems import GraphInstance, UnionFind, UniformInstance, eval_mst_bi, make_problem
from cc_utils import DomainError


def random_uniform(rng, n=10, k=5):
    items = [StochItem(rng.randint(1, 20), rng.randint(1, 20)) for _ in range(n)]
    return UniformInstance(items, k=k)


def random_graph(rng, n_vertices=5, max_edges=9):
    pairs = [(u, v) for u in range(n_vertices) for v in range(u + 1, n_vertices)]
    tree = [(i, i + 1) for i in range(n_vertices - 1)]
    extra = rng.sample([p for p in pairs if p not in tree], max_edges - len(tree))
    edges = tree + extra
    items = [StochItem(rng.randint(1, 15), rng.randint(1, 15)) for _ in edges]
    return GraphInstance(n_vertices, edges, edge_items=items)


def tuples(points):
    return sorted(p.as_tuple() for p in points)


# ==================== 貪欲法 ====================

def test_greedy_uniform_lambda_endpoints():
    items = [StochItem(5, 1), StochItem(1, 7), StochItem(3, 2), StochItem(2, 9)]
    inst = UniformInstance(items, k=2)
    assert np.flatnonzero(greedy_uniform(inst, 1)).tolist() == [1, 3]
    assert np.flatnonzero(greedy_uniform(inst, 0)).tolist() == [0, 2]
    assert int(greedy_uniform(inst, 0.5).sum()) == 2


def test_greedy_uniform_switches_at_threshold():
    items = [StochItem(3, 1), StochItem(1, 2), StochItem(10, 10), StochItem(12, 11)]
    inst = UniformInstance(items, k=1)
    t = lambda_set(items[:2]).exact[1]
    assert t == Fraction(1, 3)
    assert greedy_uniform(inst, t - Fraction(1, 100)).tolist() == [True, False, False, False]
    assert greedy_uniform(inst, t + Fraction(1, 100)).tolist() == [False, True, False, False]


def test_greedy_uniform_rejects_bad_lambda():
    inst = UniformInstance([StochItem(1, 1)], k=1)
    with pytest.raises(DomainError):
        greedy_uniform(inst, 1.5)


# ==================== Kruskal ====================

def test_kruskal_triangle():
    items = [StochItem(1, 9), StochItem(2, 4), StochItem(3, 1)]
    g = GraphInstance(3, [(0, 1), (1, 2), (0, 2)], edge_items=items)
    by_mean = kruskal_lambda(g, 1)
    by_var = kruskal_lambda(g, 0)
    assert by_mean.tolist() == [True, True, False]
    assert eval_mst_bi(by_mean, g).as_tuple() == (3.0, 13.0)
    assert by_var.tolist() == [False, True, True]
    assert eval_mst_bi(by_var, g).as_tuple() == (5.0, 5.0)


def test_kruskal_returns_spanning_tree():
    rng = random.Random(6)
    for _ in range(50):
        g = random_graph(rng)
        x = kruskal_lambda(g, Fraction(rng.randint(0, 10), 10))
        assert int(x.sum()) == g.n_vertices - 1
        assert make_problem(g).is_feasible(x)


def _spanning_trees(g):
    trees = []
    for subset in itertools.combinations(range(g.m), g.n_vertices - 1):
        uf = UnionFind(g.n_vertices)
        if all(uf.union(*g.edges[i]) for i in subset):
            trees.append(subset)
    return trees


def _exact_f(items, chosen, lam):
    return sum(lam * int(items[i].mu) + (1 - lam) * int(items[i].var) for i in chosen)


def test_kruskal_matches_spanning_tree_enumeration():
    rng = random.Random(12)
    for _ in range(20):
        n_vertices = rng.randint(3, 7)
        max_edges = rng.randint(n_vertices - 1, min(15, n_vertices * (n_vertices - 1) // 2))
        g = random_graph(rng, n_vertices, max_edges)
        trees = _spanning_trees(g)
        for _ in range(20):
            lam = Fraction(rng.randint(0, 1000), 1000)
            x = kruskal_lambda(g, lam)
            best = min(_exact_f(g.edge_items, tree, lam) for tree in trees)
            assert _exact_f(g.edge_items, np.flatnonzero(x), lam) == best


def test_greedy_matches_brute_force_minimum():
    rng = random.Random(13)
    for _ in range(30):
        n = rng.randint(2, 12)
        inst = random_uniform(rng, n=n, k=rng.randint(1, n))
        masks = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(bool)
        feasible = masks[masks.sum(axis=1) >= inst.k]
        mu = feasible @ np.array([int(it.mu) for it in inst.items], dtype=np.int64)
        var = feasible @ np.array([int(it.var) for it in inst.items], dtype=np.int64)
        for _ in range(10):
            p = rng.randint(0, 1000)
            x = greedy_uniform(inst, Fraction(p, 1000))
            assert int(x.sum()) == inst.k
            # f_λ を 1000 倍した整数で比較
            chosen = np.flatnonzero(x)
            value = sum(p * int(inst.items[i].mu) + (1000 - p) * int(inst.items[i].var) for i in chosen)
            assert value == int((p * mu + (1000 - p) * var).min())


def test_kruskal_rejects_disconnected_graph():
    g = GraphInstance(4, [(0, 1), (2, 3)], edge_items=[StochItem(1, 1)] * 2, require_connected=False)
    with pytest.raises(DomainError):
        kruskal_lambda(g, 0.5)


# ==================== 極点集合 ====================

def test_extreme_points_of_comparable_items():
    items = [StochItem(1, 1), StochItem(2, 2), StochItem(3, 3)]
    assert len(extreme_point_set(UniformInstance(items, k=2))) == 1


def test_extreme_points_match_brute_force_uniform():
    rng = random.Random(10)
    for _ in range(15):
        inst = random_uniform(rng)
        extremes = extreme_point_set(inst)
        assert tuples(extremes.objectives()) == tuples(brute_force_front(inst).extremes)
        assert len(extremes) <= lambda_set(inst.items).pair_count + 2
        variances = [obj.var_obj for obj in extremes.objectives()]
        assert variances == sorted(variances)


def test_extreme_points_match_brute_force_spanning_tree():
    rng = random.Random(14)
    for _ in range(15):
        g = random_graph(rng)
        assert tuples(extreme_point_set(g).objectives()) == tuples(brute_force_front(g).extremes)


def test_extreme_points_contain_every_alpha_optimum():
    rng = random.Random(18)
    betas = [0.4, 0.2, 0.1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12]
    for _ in range(10):
        inst = random_uniform(rng)
        extremes = extreme_point_set(inst)
        archive = Archive('convex')
        archive.replace([ArchiveMember(x, obj, True) for _, obj, x in extremes.points])
        for beta in betas:
            conf = Confidence.from_beta(beta)
            best = min(g_value(obj.mu_obj, obj.var_obj, conf) for obj in extremes.objectives())
            expected = brute_force_optimum(inst, conf)
            assert best == pytest.approx(expected, rel=1e-12)
            assert decode_alpha(archive, conf)[1] == pytest.approx(expected, rel=1e-12)


# ==================== 全列挙 ====================

def test_brute_force_front_examples():
    dominated = brute_force_front(UniformInstance([StochItem(1, 1), StochItem(2, 4)], k=1))
    assert tuples(dominated.front) == [(1.0, 1.0)]
    assert tuples(dominated.extremes) == [(1.0, 1.0)]

    incomparable = brute_force_front(UniformInstance([StochItem(3, 1), StochItem(1, 2)], k=1))
    assert [p.as_tuple() for p in incomparable.front] == [(1.0, 2.0), (3.0, 1.0)]
    assert tuples(incomparable.extremes) == [(1.0, 2.0), (3.0, 1.0)]


def test_brute_force_extremes_are_pareto_optimal():
    rng = random.Random(22)
    for _ in range(20):
        inst = random_uniform(rng, n=8, k=rng.randint(1, 8))
        result = brute_force_front(inst)
        assert set(tuples(result.extremes)) <= set(tuples(result.front))


def test_brute_force_optimum_examples():
    k1 = Confidence.from_k_alpha(1.0)
    items = [StochItem(2, 3), StochItem(4, 1), StochItem(1, 5)]
    assert brute_force_optimum(UniformInstance(items, k=3), k1) == pytest.approx(g_value(7, 9, k1))

    same = [StochItem(1, 1)] * 3
    assert brute_force_optimum(UniformInstance(same, k=1), k1) == pytest.approx(2.0)

    median = Confidence.from_alpha(0.5)
    assert brute_force_optimum(UniformInstance(items, k=2), median) == pytest.approx(3.0)


def test_brute_force_refuses_large_instances():
    inst = UniformInstance([StochItem(1, 1)] * 25, k=1)
    with pytest.raises(DomainError):
        brute_force_front(inst)


# ==================== Mann-Whitney U 検定 ====================

def test_mann_whitney_identical_samples():
    u, p = mann_whitney_test([3.0] * 5, [3.0] * 5)
    assert p == 1.0
    assert u == 12.5


def test_mann_whitney_separated_samples():
    u, p = mann_whitney_test([1, 2, 3, 4, 5], [6, 7, 8, 9, 10])
    assert u == 0.0
    assert 0.007 <= p <= 0.009


def test_mann_whitney_small_samples_use_exact_distribution():
    # {1..5} と {6..10} の分け方 252 通りのうち U=0 は両側で2通り
    _, p = mann_whitney_test([1, 2, 3, 4, 5], [6, 7, 8, 9, 10])
    assert p == pytest.approx(2 / 252, rel=1e-9)


def test_mann_whitney_large_samples_use_corrected_normal_approximation():
    a = np.arange(30, dtype=np.float64) * 2.0
    b = np.arange(30, dtype=np.float64) * 2.0 + 7.0
    u, p = mann_whitney_test(a, b)
    mean = 30 * 30 / 2.0
    sd = math.sqrt(30 * 30 * 61 / 12.0)
    expected = 2.0 * stats.norm.sf((abs(u - mean) - 0.5) / sd)
    assert p == pytest.approx(expected, rel=1e-9)


def test_mann_whitney_is_symmetric():
    rng = np.random.default_rng(3)
    for _ in range(20):
        a = rng.normal(size=12)
        b = rng.normal(loc=0.5, size=15)
        assert mann_whitney_test(a, b) == pytest.approx(mann_whitney_test(b, a))
        assert 0.0 <= mann_whitney_u(a, b) <= 1.0


def test_mann_whitney_rejects_empty_sample():
    with pytest.raises(DomainError):
        mann_whitney_test([], [1.0, 2.0])
