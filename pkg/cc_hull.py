"""
CC Hull

目的空間 (μ, v) での左下凸包（lower envelope）、凸包ランキング、
凸包メンバーシップ判定を提供します。

凸包には厳密な頂点だけを含めます。線分の内側にある共線点や重複ベクトルは
次のランクに回されます。
"""

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from cc_core import ObjectiveVector, is_integral
from cc_utils import ContractViolation


@dataclass
class RankedPopulation:
    """凸包ランキングの結果（entries は入力順）"""
    entries: List[Tuple[ObjectiveVector, int]]

    @property
    def ranks(self) -> List[int]:
        return [rank for _, rank in self.entries]

    @property
    def max_rank(self) -> int:
        return max(self.ranks) if self.entries else 0

    def front(self, rank: int = 1) -> List[ObjectiveVector]:
        return [obj for obj, r in self.entries if r == rank]


def _coordinates(points: Sequence[ObjectiveVector]):
    """全座標が整数なら Python int（厳密な外積用）、そうでなければ float"""
    if all(is_integral(p.mu_obj) and is_integral(p.var_obj) for p in points):
        return [(int(p.mu_obj), int(p.var_obj)) for p in points]
    return [(float(p.mu_obj), float(p.var_obj)) for p in points]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _envelope_indices(coords: Sequence[Tuple], candidates: Sequence[int]) -> List[int]:
    """
    candidates のうち左下凸包の頂点となる添字を μ 昇順で返す

    重複ベクトルは添字の大きい方（新しい方）を代表とする。
    """
    # 重複を除去（後勝ち）
    representative = {}
    for idx in candidates:
        representative[coords[idx]] = idx
    order = sorted(representative.values(), key=lambda i: (coords[i][0], coords[i][1]))

    # Andrew の monotone chain（下側）
    hull: List[int] = []
    for idx in order:
        p = coords[idx]
        while len(hull) >= 2 and _cross(coords[hull[-2]], coords[hull[-1]], p) <= 0:
            hull.pop()
        hull.append(idx)

    # 分散最小（同値なら μ 最小）の点で打ち切る
    lowest = min(order, key=lambda i: (coords[i][1], coords[i][0]))
    return hull[:hull.index(lowest) + 1]


def lower_envelope(points: Sequence[ObjectiveVector]) -> List[ObjectiveVector]:
    """
    左下凸包の頂点を μ 昇順で返す

    Args:
        points: 目的ベクトルのリスト（空は不可）

    Returns:
        (μ,v) 辞書式最小から (v,μ) 辞書式最小までの頂点
    """
    if not points:
        raise ContractViolation("lower_envelope needs at least one point")
    coords = _coordinates(points)
    return [points[i] for i in _envelope_indices(coords, range(len(points)))]


def envelope_member_indices(points: Sequence[ObjectiveVector]) -> List[int]:
    """lower_envelope と同じ頂点を、入力リストの添字で返す"""
    if not points:
        raise ContractViolation("lower_envelope needs at least one point")
    return _envelope_indices(_coordinates(points), range(len(points)))


def convex_hull_rank(points: Sequence[ObjectiveVector]) -> RankedPopulation:
    """
    凸包を繰り返し剥がしてランクを付ける

    ランク1は全点の左下凸包、ランク r+1 は残りの点の左下凸包。
    """
    if not points:
        raise ContractViolation("convex_hull_rank needs at least one point")

    coords = _coordinates(points)
    ranks = [0] * len(points)
    remaining = list(range(len(points)))
    rank = 0
    while remaining:
        rank += 1
        layer = set(_envelope_indices(coords, remaining))
        for idx in layer:
            ranks[idx] = rank
        remaining = [idx for idx in remaining if idx not in layer]

    return RankedPopulation(entries=[(points[i], ranks[i]) for i in range(len(points))])


def is_on_envelope(candidate: ObjectiveVector, points: Sequence[ObjectiveVector]) -> bool:
    """
    candidate を加えた集合の左下凸包に candidate が頂点として含まれるか

    既存の点と同じベクトルなら False（既存側を残す）。
    """
    if any(p == candidate for p in points):
        return False
    combined = list(points) + [candidate]
    return len(combined) - 1 in envelope_member_indices(combined)
