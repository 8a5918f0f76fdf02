"""
CC Oracles

進化的アルゴリズムの検証に使う厳密解法と統計:
λ ごとの貪欲法、λ ごとの Kruskal 法、全列挙、極点集合の構築、Mann-Whitney U 検定。
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats

from cc_core import (
    Confidence, ObjectiveVector, StochItem, f_lambda, items_are_integral, is_integral, lambda_set,
)
from cc_problems import (
    GraphInstance, UniformInstance, UnionFind, eval_mst_bi, eval_uniform_bi, make_problem,
)
from cc_utils import DomainError

logger = logging.getLogger(__name__)

# 全列挙を許すビット長の上限
MAX_BRUTE_FORCE_BITS = 24

# 実数値インスタンスで目的ベクトルを同一視する相対誤差
OBJECTIVE_DEDUP_RTOL = 1e-9


@dataclass
class ExtremePointSet:
    """極点集合（分散の昇順）"""
    points: List[Tuple[Union[Fraction, float], ObjectiveVector, np.ndarray]]

    def __len__(self):
        return len(self.points)

    def objectives(self) -> List[ObjectiveVector]:
        return [obj for _, obj, _ in self.points]


@dataclass
class BruteForceFront:
    """全列挙で得たパレートフロントと極点（どちらも μ の昇順）"""
    front: List[ObjectiveVector]
    extremes: List[ObjectiveVector]


# ==================== λ ごとの貪欲法 ====================

def _check_lambda(lam):
    if not (0 <= lam <= 1):
        raise DomainError(f"lambda must lie in [0, 1]: {lam}")


def _greedy_order(items: Sequence[StochItem], lam) -> List[int]:
    """
    λ に対する要素の貪欲順

    内点の λ では (f_λ, -分散, 添字)、λ=0 では (分散, μ)、λ=1 では (μ, 分散)。
    """
    _check_lambda(lam)
    if lam == 0:
        return sorted(range(len(items)), key=lambda i: (items[i].var, items[i].mu, i))
    if lam == 1:
        return sorted(range(len(items)), key=lambda i: (items[i].mu, items[i].var, i))

    # 整数値なら有理数で比較してタイを正確に扱う
    if items_are_integral(items):
        lam = Fraction(lam)
        return sorted(range(len(items)),
                      key=lambda i: (lam * int(items[i].mu) + (1 - lam) * int(items[i].var), -items[i].var, i))
    return sorted(range(len(items)), key=lambda i: (f_lambda(items[i], lam), -items[i].var, i))


def greedy_uniform(inst: UniformInstance, lam) -> np.ndarray:
    """
    f_λ の小さい順に k 個選ぶ

    Args:
        inst: 基数制約インスタンス
        lam: 重み λ（0 ≤ λ ≤ 1、Fraction も可）

    Returns:
        ちょうど k 個を選んだ解
    """
    if inst.k > inst.n:
        raise DomainError(f"k={inst.k} exceeds n={inst.n}")
    order = _greedy_order(inst.items, lam)
    x = np.zeros(inst.n, dtype=bool)
    x[order[:inst.k]] = True
    return x


def kruskal_lambda(inst: GraphInstance, lam) -> np.ndarray:
    """f_λ の辺重みで Kruskal 法を実行し、全域木を返す"""
    if inst.kind != 'mst':
        raise DomainError("kruskal_lambda needs an edge-weighted graph")
    order = _greedy_order(inst.edge_items, lam)

    uf = UnionFind(inst.n_vertices)
    x = np.zeros(inst.m, dtype=bool)
    for idx in order:
        if uf.union(inst.edges[idx][0], inst.edges[idx][1]):
            x[idx] = True
            if uf.num_components == 1:
                break
    if uf.num_components != 1:
        raise DomainError(f"graph {inst.label} is not connected")
    return x


# ==================== 極点集合 ====================

def _same_objective(a: ObjectiveVector, b: ObjectiveVector, exact: bool) -> bool:
    if exact:
        return a == b
    return (math.isclose(a.mu_obj, b.mu_obj, rel_tol=OBJECTIVE_DEDUP_RTOL)
            and math.isclose(a.var_obj, b.var_obj, rel_tol=OBJECTIVE_DEDUP_RTOL))


def extreme_point_set(inst: Union[UniformInstance, GraphInstance]) -> ExtremePointSet:
    """
    Λ の各 λ で貪欲法（または Kruskal 法）を実行して極点集合を作る

    Returns:
        ExtremePointSet（目的ベクトルの重複を除き、分散の昇順）
    """
    if isinstance(inst, UniformInstance):
        items = inst.items
        solve, evaluate = greedy_uniform, eval_uniform_bi
    elif isinstance(inst, GraphInstance) and inst.kind == 'mst':
        items = inst.edge_items
        solve, evaluate = kruskal_lambda, eval_mst_bi
    else:
        raise DomainError("extreme_point_set supports uniform and spanning-tree instances")

    lambdas = lambda_set(items)
    exact = lambdas.exact is not None
    points = []
    for lam in lambdas.weights():
        x = solve(inst, lam)
        obj = evaluate(x, inst)
        if any(_same_objective(obj, existing, exact) for _, existing, _ in points):
            continue
        points.append((lam, obj, x))

    points.sort(key=lambda p: (p[1].var_obj, p[1].mu_obj))
    logger.debug(f"{inst.label}: |Λ|={len(lambdas)}, 極点数={len(points)}")
    return ExtremePointSet(points=points)


# ==================== 全列挙 ====================

def _enumerate(n_bits: int):
    if n_bits > MAX_BRUTE_FORCE_BITS:
        raise DomainError(f"brute force refused: {n_bits} bits exceeds {MAX_BRUTE_FORCE_BITS}")
    shifts = np.arange(n_bits)
    for mask in range(2 ** n_bits):
        yield ((mask >> shifts) & 1).astype(bool)


def _scalar(point: Tuple, lam, exact: bool):
    if exact:
        return lam * point[0] + (1 - lam) * point[1]
    return float(lam) * point[0] + (1 - float(lam)) * point[1]


def _argmin_extreme(pairs: List[Tuple], lam, exact: bool) -> Tuple:
    """λ での f_λ 最小点のうち分散最大のもの（λ=0, 1 は辞書式）"""
    if lam == 0:
        return min(pairs, key=lambda p: (p[1], p[0]))
    if lam == 1:
        return min(pairs, key=lambda p: (p[0], p[1]))
    values = [_scalar(p, lam, exact) for p in pairs]
    best = min(values)
    tol = 0 if exact else 1e-9 * max(1.0, abs(best))
    tied = [p for p, v in zip(pairs, values) if v - best <= tol]
    return max(tied, key=lambda p: (p[1], -p[0]))


def brute_force_front(problem) -> BruteForceFront:
    """
    全ビット列を列挙してパレートフロントと極点を求める

    Args:
        problem: n_bits / evaluate_bi / is_feasible を持つ問題（またはインスタンス）
    """
    if isinstance(problem, (UniformInstance, GraphInstance)):
        problem = make_problem(problem)

    feasible = set()
    for x in _enumerate(problem.n_bits):
        if problem.is_feasible(x):
            feasible.add(problem.evaluate_bi(x).as_tuple())
    if not feasible:
        return BruteForceFront(front=[], extremes=[])

    # μ 昇順に走査して分散が真に下がる点だけ残す
    front = []
    for mu, var in sorted(feasible):
        if not front or var < front[-1][1]:
            front.append((mu, var))

    exact = all(is_integral(mu) and is_integral(var) for mu, var in front)
    pairs = [(int(mu), int(var)) for mu, var in front] if exact else front

    lambdas = {Fraction(0), Fraction(1)} if exact else {0.0, 1.0}
    for i in range(len(pairs)):
        for j in range(i + 1, len(pairs)):
            (mu_p, var_p), (mu_q, var_q) = pairs[i], pairs[j]
            dv = var_p - var_q
            dm = mu_q - mu_p
            if exact:
                lambdas.add(Fraction(dv, dv + dm))
            else:
                lambdas.add(dv / (dv + dm))

    extremes = {_argmin_extreme(pairs, lam, exact) for lam in lambdas}
    front_vectors = [ObjectiveVector(float(mu), float(var)) for mu, var in front]
    extreme_vectors = [ObjectiveVector(float(mu), float(var)) for mu, var in sorted(extremes)]
    return BruteForceFront(front=front_vectors, extremes=extreme_vectors)


def brute_force_optimum(problem, conf: Confidence) -> float:
    """単目的ペナルティ評価の全列挙による最小値"""
    if isinstance(problem, (UniformInstance, GraphInstance)):
        problem = make_problem(problem)
    return min(problem.evaluate_single(x, conf) for x in _enumerate(problem.n_bits))


# ==================== Mann-Whitney U 検定 ====================

def mann_whitney_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> Tuple[float, float]:
    """
    両側 Mann-Whitney U 検定

    タイのない小標本は厳密分布、それ以外はタイ補正・連続修正付きの正規近似。

    Returns:
        (U, p値)。U は2つの U 統計量の小さい方
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise DomainError("Mann-Whitney test needs two non-empty samples")

    u_max = float(len(a) * len(b))
    combined = np.concatenate([a, b])
    if np.all(combined == combined[0]):
        return u_max / 2.0, 1.0

    result = stats.mannwhitneyu(a, b, use_continuity=True, alternative='two-sided', method='auto')
    u1 = float(result.statistic)
    return min(u1, u_max - u1), float(result.pvalue)


def mann_whitney_u(sample_a: Sequence[float], sample_b: Sequence[float]) -> float:
    """両側 Mann-Whitney U 検定の p 値"""
    return mann_whitney_test(sample_a, sample_b)[1]
