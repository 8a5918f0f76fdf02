"""
CC Problems

3つの問題モデル（基数制約付き部分集合選択、確率制約付き最小全域木、
確率的支配集合）と、その単目的ペナルティ評価・二目的ペナルティ評価を提供します。

解（Solution）は長さ固定の numpy bool 配列で表現します。
"""

import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from cc_core import Confidence, ObjectiveVector, StochItem, g_value
from cc_utils import DomainError, ContractViolation


# ==================== 解ベクトル ====================

def as_solution(bits) -> np.ndarray:
    """ビット列（list / str / ndarray）を bool 配列に変換"""
    if isinstance(bits, str):
        return np.array([c == '1' for c in bits], dtype=bool)
    return np.asarray(bits, dtype=bool)


def random_solution(n_bits: int, rng: np.random.Generator) -> np.ndarray:
    """一様ランダムな解を生成"""
    return rng.random(n_bits) < 0.5


def _check_length(x: np.ndarray, expected: int):
    if len(x) != expected:
        raise ContractViolation(f"solution length {len(x)} does not match ground set size {expected}")


# ==================== Union-Find ====================

class UnionFind:
    """連結成分数を数える Union-Find（経路圧縮付き）"""

    def __init__(self, size: int):
        self.parents = list(range(size))
        self.num_components = size

    def find(self, elem: int) -> int:
        root = elem
        while root != self.parents[root]:
            root = self.parents[root]

        # 経路圧縮
        while elem != root:
            parent = self.parents[elem]
            self.parents[elem] = root
            elem = parent
        return root

    def union(self, a: int, b: int) -> bool:
        """a と b を併合し、別々の成分だった場合 True を返す"""
        ra = self.find(a)
        rb = self.find(b)
        if ra == rb:
            return False
        self.parents[rb] = ra
        self.num_components -= 1
        return True


# ==================== インスタンス ====================

class UniformInstance:
    """基数制約 |x|₁ ≥ k 付きの確率的部分集合選択インスタンス"""

    kind = 'uniform'

    def __init__(self, items: Sequence[StochItem], k: int, label: Optional[str] = None):
        """
        Args:
            items: アイテムの確率的重み
            k: 選択数の下限
            label: 表示用の名前
        """
        if not items:
            raise DomainError("uniform instance needs at least one item")
        if not (1 <= k <= len(items)):
            raise DomainError(f"k must satisfy 1 <= k <= n: k={k}, n={len(items)}")

        self.items = list(items)
        self.k = int(k)
        self.label = label or f"uniform-n{len(items)}-k{k}"
        self.mu = np.array([it.mu for it in self.items], dtype=np.float64)
        self.var = np.array([it.var for it in self.items], dtype=np.float64)
        self.penalty_mu = 1.0 + float(self.mu.sum())
        self.penalty_var = 1.0 + float(self.var.sum())

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def ground_size(self) -> int:
        return len(self.items)

    def penalty_unit(self, conf: Confidence) -> float:
        """L = 1 + Σμ + K_α·(Σσ²)^{1/2}"""
        return 1.0 + float(self.mu.sum()) + conf.k_alpha * math.sqrt(float(self.var.sum()))


class GraphInstance:
    """
    グラフインスタンス

    MST では各辺が StochItem を持ち、支配集合では各頂点が StochItem を持つ。
    どちらも持たないものはファイルから読んだ骨格グラフ。
    """

    def __init__(self, n_vertices: int, edges: Sequence[Tuple[int, int]],
                 edge_items: Optional[Sequence[StochItem]] = None,
                 node_items: Optional[Sequence[StochItem]] = None,
                 label: Optional[str] = None,
                 require_connected: Optional[bool] = None):
        """
        Args:
            n_vertices: 頂点数
            edges: 0始まりの頂点ペア
            edge_items: 辺の確率的重み（MST）
            node_items: 頂点の確率的重み（支配集合）
            label: 表示用の名前
            require_connected: 連結性を検証するか（None なら MST のときだけ検証）
        """
        if n_vertices < 1:
            raise DomainError("graph needs at least one vertex")

        self.n_vertices = int(n_vertices)
        self.edges = [(int(u), int(v)) for u, v in edges]
        self.label = label or f"graph-n{n_vertices}-m{len(self.edges)}"
        self.load_report = None

        for u, v in self.edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise DomainError(f"edge endpoint out of range: ({u}, {v})")
            if u == v:
                raise DomainError(f"self-loop not allowed: ({u}, {v})")

        self.edge_items = list(edge_items) if edge_items is not None else None
        self.node_items = list(node_items) if node_items is not None else None
        if self.edge_items is not None and len(self.edge_items) != len(self.edges):
            raise DomainError("edge_items length must equal edge count")
        if self.node_items is not None and len(self.node_items) != self.n_vertices:
            raise DomainError("node_items length must equal vertex count")

        if require_connected is None:
            require_connected = self.edge_items is not None
        if require_connected and not self.is_connected():
            raise DomainError(f"graph {self.label} is not connected")

        self.edge_u = np.array([u for u, _ in self.edges], dtype=np.int64)
        self.edge_v = np.array([v for _, v in self.edges], dtype=np.int64)

        if self.edge_items is not None:
            self.edge_mu = np.array([it.mu for it in self.edge_items], dtype=np.float64)
            self.edge_var = np.array([it.var for it in self.edge_items], dtype=np.float64)
            mu_max = float(self.edge_mu.max()) if len(self.edge_items) else 0.0
            v_max = float(self.edge_var.max()) if len(self.edge_items) else 0.0
            self.w_ub = self.n_vertices ** 2 * max(mu_max, v_max)
        else:
            self.edge_mu = self.edge_var = None
            self.w_ub = None

        if self.node_items is not None:
            self.node_mu = np.array([it.mu for it in self.node_items], dtype=np.float64)
            self.node_var = np.array([it.var for it in self.node_items], dtype=np.float64)
        else:
            self.node_mu = self.node_var = None

        # 隣接行列（対称、CSR）
        if self.edges:
            rows = np.concatenate([self.edge_u, self.edge_v])
            cols = np.concatenate([self.edge_v, self.edge_u])
            data = np.ones(len(rows), dtype=np.int32)
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            data = np.zeros(0, dtype=np.int32)
        self.adjacency = sparse.csr_matrix((data, (rows, cols)), shape=(self.n_vertices, self.n_vertices))
        self.degrees = np.asarray(self.adjacency.sum(axis=1)).ravel().astype(np.int64)

    @property
    def kind(self) -> str:
        if self.edge_items is not None:
            return 'mst'
        if self.node_items is not None:
            return 'domset'
        return 'skeleton'

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def ground_size(self) -> int:
        """探索空間のビット長（MST は辺数、支配集合は頂点数）"""
        return self.m if self.kind == 'mst' else self.n_vertices

    def is_connected(self) -> bool:
        uf = UnionFind(self.n_vertices)
        for u, v in self.edges:
            uf.union(u, v)
        return uf.num_components == 1

    def with_edge_items(self, edge_items: Sequence[StochItem], label: Optional[str] = None) -> 'GraphInstance':
        return GraphInstance(self.n_vertices, self.edges, edge_items=edge_items, label=label or self.label)

    def with_node_items(self, node_items: Sequence[StochItem], label: Optional[str] = None) -> 'GraphInstance':
        return GraphInstance(self.n_vertices, self.edges, node_items=node_items, label=label or self.label)

    def penalty_unit(self, conf: Confidence) -> float:
        """単目的評価のペナルティ単位 L（MST は辺、支配集合は頂点の重みで計算）"""
        if self.kind == 'mst':
            mu, var = self.edge_mu, self.edge_var
        elif self.kind == 'domset':
            mu, var = self.node_mu, self.node_var
        else:
            raise DomainError("skeleton graph has no weights")
        return 1.0 + float(mu.sum()) + conf.k_alpha * math.sqrt(float(var.sum()))


# ==================== 基数制約 ====================

def eval_uniform_single(x: np.ndarray, inst: UniformInstance, conf: Confidence) -> float:
    """
    単目的ペナルティ評価 f

    |x|₁ ≥ k なら g(x)、そうでなければ (k - |x|₁)·L
    """
    _check_length(x, inst.n)
    count = int(np.count_nonzero(x))
    if count >= inst.k:
        return g_value(float(inst.mu @ x), float(inst.var @ x), conf)
    return (inst.k - count) * inst.penalty_unit(conf)


def eval_uniform_bi(x: np.ndarray, inst: UniformInstance) -> ObjectiveVector:
    """二目的ペナルティ評価 (μ(x), v(x))"""
    _check_length(x, inst.n)
    count = int(np.count_nonzero(x))
    if count >= inst.k:
        return ObjectiveVector(float(inst.mu @ x), float(inst.var @ x))
    missing = inst.k - count
    return ObjectiveVector(missing * inst.penalty_mu, missing * inst.penalty_var)


# ==================== 全域木 ====================

def count_components(inst: GraphInstance, x: np.ndarray) -> int:
    """選択された辺だけからなる部分グラフ（全頂点）の連結成分数"""
    _check_length(x, inst.m)
    uf = UnionFind(inst.n_vertices)
    for idx in np.flatnonzero(x):
        uf.union(int(inst.edge_u[idx]), int(inst.edge_v[idx]))
    return uf.num_components


def eval_mst_bi(x: np.ndarray, inst: GraphInstance) -> ObjectiveVector:
    """((c(x)-1)·w_ub + Σμ, (c(x)-1)·w_ub + Σσ²)"""
    penalty = (count_components(inst, x) - 1) * inst.w_ub
    return ObjectiveVector(penalty + float(inst.edge_mu @ x), penalty + float(inst.edge_var @ x))


def eval_mst_single(x: np.ndarray, inst: GraphInstance, conf: Confidence) -> float:
    """連結なら g(x)、そうでなければ (c(x)-1)·L"""
    components = count_components(inst, x)
    if components == 1:
        return g_value(float(inst.edge_mu @ x), float(inst.edge_var @ x), conf)
    return (components - 1) * inst.penalty_unit(conf)


# ==================== 支配集合 ====================

def undominated_count(inst: GraphInstance, x: np.ndarray) -> int:
    """D にも含まれず、D の頂点にも隣接していない頂点の数"""
    _check_length(x, inst.n_vertices)
    covered = x | (inst.adjacency @ x.astype(np.int32) > 0)
    return int(inst.n_vertices - np.count_nonzero(covered))


def eval_domset_single(x: np.ndarray, inst: GraphInstance, conf: Confidence) -> float:
    """支配集合なら g(x)、そうでなければ u#·L_dom"""
    undominated = undominated_count(inst, x)
    if undominated == 0:
        return g_value(float(inst.node_mu @ x), float(inst.node_var @ x), conf)
    return undominated * inst.penalty_unit(conf)


def eval_domset_bi(x: np.ndarray, inst: GraphInstance) -> ObjectiveVector:
    """支配集合なら (Σμ, Σv)、そうでなければ (u#·(1+Σμ), u#·(1+Σv))"""
    undominated = undominated_count(inst, x)
    if undominated == 0:
        return ObjectiveVector(float(inst.node_mu @ x), float(inst.node_var @ x))
    return ObjectiveVector(undominated * (1.0 + float(inst.node_mu.sum())),
                           undominated * (1.0 + float(inst.node_var.sum())))


# ==================== 評価器 ====================

class ScalarEvaluator:
    """単目的評価器（(1+1) EA 用）"""

    def __init__(self, n_bits: int, fitness: Callable[[np.ndarray], float],
                 feasible: Optional[Callable[[np.ndarray], bool]] = None):
        self.n_bits = n_bits
        self.fitness = fitness
        self.feasible = feasible

    def __call__(self, x: np.ndarray) -> float:
        return self.fitness(x)

    def is_feasible(self, x: np.ndarray) -> bool:
        return True if self.feasible is None else self.feasible(x)


class VectorEvaluator:
    """二目的評価器（GSEMO 系用）"""

    def __init__(self, n_bits: int, objectives: Callable[[np.ndarray], ObjectiveVector],
                 feasible: Optional[Callable[[np.ndarray], bool]] = None):
        self.n_bits = n_bits
        self.objectives = objectives
        self.feasible = feasible

    def __call__(self, x: np.ndarray) -> ObjectiveVector:
        return self.objectives(x)

    def is_feasible(self, x: np.ndarray) -> bool:
        return True if self.feasible is None else self.feasible(x)


class ChanceProblem:
    """問題モデルの共通インターフェース"""

    kind = 'abstract'

    def __init__(self, instance):
        self.instance = instance
        self.label = instance.label

    @property
    def n_bits(self) -> int:
        return self.instance.ground_size

    def ground_items(self) -> List[StochItem]:
        raise NotImplementedError

    def evaluate_single(self, x: np.ndarray, conf: Confidence) -> float:
        raise NotImplementedError

    def evaluate_bi(self, x: np.ndarray) -> ObjectiveVector:
        raise NotImplementedError

    def is_feasible(self, x: np.ndarray) -> bool:
        raise NotImplementedError

    def single_objective(self, conf: Confidence) -> ScalarEvaluator:
        return ScalarEvaluator(self.n_bits, lambda x: self.evaluate_single(x, conf), self.is_feasible)

    def bi_objective(self) -> VectorEvaluator:
        return VectorEvaluator(self.n_bits, self.evaluate_bi, self.is_feasible)


class UniformProblem(ChanceProblem):
    kind = 'uniform'

    def ground_items(self):
        return self.instance.items

    def evaluate_single(self, x, conf):
        return eval_uniform_single(x, self.instance, conf)

    def evaluate_bi(self, x):
        return eval_uniform_bi(x, self.instance)

    def is_feasible(self, x):
        return int(np.count_nonzero(x)) >= self.instance.k


class SpanningTreeProblem(ChanceProblem):
    kind = 'mst'

    def ground_items(self):
        return self.instance.edge_items

    def evaluate_single(self, x, conf):
        return eval_mst_single(x, self.instance, conf)

    def evaluate_bi(self, x):
        return eval_mst_bi(x, self.instance)

    def is_feasible(self, x):
        return count_components(self.instance, x) == 1


class DominatingSetProblem(ChanceProblem):
    kind = 'domset'

    def ground_items(self):
        return self.instance.node_items

    def evaluate_single(self, x, conf):
        return eval_domset_single(x, self.instance, conf)

    def evaluate_bi(self, x):
        return eval_domset_bi(x, self.instance)

    def is_feasible(self, x):
        return undominated_count(self.instance, x) == 0


def make_problem(instance) -> ChanceProblem:
    """インスタンスの種類に応じた問題モデルを返す"""
    if isinstance(instance, UniformInstance):
        return UniformProblem(instance)
    if isinstance(instance, GraphInstance):
        if instance.kind == 'mst':
            return SpanningTreeProblem(instance)
        if instance.kind == 'domset':
            return DominatingSetProblem(instance)
        raise DomainError("graph skeleton has no weights; assign edge or node weights first")
    raise DomainError(f"unsupported instance type: {type(instance).__name__}")
