import random

import numpy as np
import pytest

from cc_core import ObjectiveVector, StochItem, lambda_set, strongly_dominates
from cc_hull import convex_hull_rank, envelope_member_indices, is_on_envelope, lower_envelope
from cc_problems import UniformInstance, eval_uniform_bi
from cc_utils import ContractViolation


def vectors(pairs):
    return [ObjectiveVector(float(m), float(v)) for m, v in pairs]


def pairs_of(points):
    return [p.as_tuple() for p in points]


def oracle_extreme_indices(coords, candidates):
    """
    λ 区間による独立した極点判定

    p が極点 ⇔ (μ,v) 辞書式最小か (v,μ) 辞書式最小、または
    全ての q について f_λ(p) ≤ f_λ(q) となる λ の区間が幅を持つ。
    重複ベクトルは添字の大きい方を残す。
    """
    pts = np.array([coords[i] for i in candidates], dtype=np.float64)
    latest = {}
    for idx in candidates:
        latest[coords[idx]] = idx
    left = min(candidates, key=lambda i: (coords[i][0], coords[i][1]))
    bottom = min(candidates, key=lambda i: (coords[i][1], coords[i][0]))

    result = set()
    for idx in set(latest.values()):
        p = coords[idx]
        if p in (coords[left], coords[bottom]):
            result.add(idx)
            continue
        a = p[0] - pts[:, 0]
        b = p[1] - pts[:, 1]
        d = a - b
        if np.any((d == 0) & (b > 0)):
            continue
        lo = max([0.0] + list(-b[d < 0] / d[d < 0]))
        hi = min([1.0] + list(-b[d > 0] / d[d > 0]))
        if lo < hi:
            result.add(idx)
    return result


def oracle_ranks(coords):
    ranks = [0] * len(coords)
    remaining = list(range(len(coords)))
    rank = 0
    while remaining:
        rank += 1
        layer = oracle_extreme_indices(coords, remaining)
        for idx in layer:
            ranks[idx] = rank
        remaining = [i for i in remaining if i not in layer]
    return ranks


# ==================== lower_envelope ====================

def test_lower_envelope_examples():
    assert pairs_of(lower_envelope(vectors([(0, 3), (1, 1), (3, 0), (2, 2)]))) == [(0, 3), (1, 1), (3, 0)]
    assert pairs_of(lower_envelope(vectors([(5, 7)]))) == [(5, 7)]
    assert pairs_of(lower_envelope(vectors([(0, 2), (1, 1), (2, 0)]))) == [(0, 2), (2, 0)]


def test_lower_envelope_drops_ties_on_extreme_coordinates():
    # μ 最小の点が複数あれば分散最小だけ、分散最小の点が複数あれば μ 最小だけ
    points = vectors([(0, 5), (0, 3), (2, 1), (4, 1)])
    assert pairs_of(lower_envelope(points)) == [(0, 3), (2, 1)]


def test_lower_envelope_duplicates_collapse_to_newest():
    points = vectors([(1, 4), (2, 2), (1, 4), (4, 1)])
    assert envelope_member_indices(points) == [2, 1, 3]


def test_lower_envelope_empty():
    with pytest.raises(ContractViolation):
        lower_envelope([])


def test_lower_envelope_idempotent():
    rng = random.Random(4)
    for _ in range(100):
        points = vectors([(rng.randint(0, 30), rng.randint(0, 30)) for _ in range(rng.randint(1, 40))])
        once = lower_envelope(points)
        assert lower_envelope(once) == once


def test_lower_envelope_real_coordinates():
    points = vectors([(0.5, 3.25), (1.5, 1.125), (3.75, 0.5), (2.0, 2.0)])
    assert pairs_of(lower_envelope(points)) == [(0.5, 3.25), (1.5, 1.125), (3.75, 0.5)]


def test_hull_bound_on_uniform_search_space():
    rng = random.Random(8)
    for _ in range(20):
        n = 8
        items = [StochItem(rng.randint(1, 20), rng.randint(1, 20)) for _ in range(n)]
        inst = UniformInstance(items, k=rng.randint(1, n))
        shifts = np.arange(n)
        points = [eval_uniform_bi(((mask >> shifts) & 1).astype(bool), inst) for mask in range(2 ** n)]
        assert len(lower_envelope(points)) <= lambda_set(items).pair_count + 2


# ==================== convex_hull_rank ====================

def test_convex_hull_rank_examples():
    ranked = convex_hull_rank(vectors([(0, 3), (1, 1), (3, 0), (2, 2)]))
    assert ranked.ranks == [1, 1, 1, 2]

    front = convex_hull_rank(vectors([(0, 4), (1, 2), (3, 1), (6, 0)]))
    assert front.ranks == [1, 1, 1, 1]

    chain = convex_hull_rank(vectors([(1, 1), (2, 2), (3, 3)]))
    assert chain.ranks == [1, 2, 3]
    assert chain.max_rank == 3


def test_convex_hull_rank_contiguous_and_sound():
    rng = random.Random(12)
    for _ in range(100):
        points = vectors([(rng.randint(0, 20), rng.randint(0, 20)) for _ in range(rng.randint(1, 50))])
        ranked = convex_hull_rank(points)
        assert set(ranked.ranks) == set(range(1, ranked.max_rank + 1))
        for p in ranked.front(1):
            assert not any(strongly_dominates(q, p) for q in points)


def test_convex_hull_rank_matches_peeling_oracle():
    rng = random.Random(2024)
    sizes = [rng.randint(1, 60) for _ in range(495)] + [200] * 5
    for size in sizes:
        coords = [(rng.randint(0, 100), rng.randint(0, 100)) for _ in range(size)]
        ranked = convex_hull_rank(vectors(coords))
        assert ranked.ranks == oracle_ranks(coords)


# ==================== is_on_envelope ====================

def test_is_on_envelope_examples():
    archive = vectors([(0, 4), (2, 2), (4, 0)])
    assert not is_on_envelope(ObjectiveVector(3, 3), archive)
    # (0,4),(2,2),(4,0) は共線なので中点 (2,2) は凸包の頂点ではない
    assert is_on_envelope(ObjectiveVector(0, 3.5), archive)
    assert not is_on_envelope(ObjectiveVector(1, 3), archive)
    assert is_on_envelope(ObjectiveVector(1, 2.5), archive)
    assert not is_on_envelope(ObjectiveVector(2, 2), archive)


def test_is_on_envelope_scale_invariant():
    rng = random.Random(31)
    for _ in range(200):
        coords = [(rng.randint(0, 40), rng.randint(0, 40)) for _ in range(rng.randint(0, 15))]
        cand = (rng.randint(0, 40), rng.randint(0, 40))
        base = is_on_envelope(ObjectiveVector(*map(float, cand)), vectors(coords))
        scaled = is_on_envelope(ObjectiveVector(cand[0] * 3.0, cand[1] * 3.0),
                                vectors([(m * 3, v * 3) for m, v in coords]))
        assert base == scaled
