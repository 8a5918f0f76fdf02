"""
CC Algorithms

(1+1) EA、GSEMO、Convex GSEMO、Convex (μ+1)-EA の4つの進化的アルゴリズムと、
シード付き乱数生成、評価回数の管理、個体群からの α ごとの解の取り出しを提供します。

乱数生成器は numpy の Philox4x64-10（カウンタベース）を使います。
レプリケートごとのストリームは SeedSequence の spawn_key で分岐させます。
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from cc_core import Confidence, ObjectiveVector, g_value
from cc_hull import convex_hull_rank, envelope_member_indices, is_on_envelope
from cc_problems import ScalarEvaluator, VectorEvaluator, random_solution
from cc_utils import DomainError

logger = logging.getLogger(__name__)

RNG_NAME = 'Philox4x64-10'


# ==================== 乱数 ====================

def make_rng(seed: int, *key: int) -> np.random.Generator:
    """
    Philox ベースの乱数生成器を作成

    Args:
        seed: 64bit のベースシード
        key: ストリームを分岐させるキー（レプリケート番号など）
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def derive_seed(base_seed: int, *key: int) -> int:
    """ベースシードとキーから64bitのシードを導出"""
    seq = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))
    return int(seq.generate_state(1, np.uint64)[0])


def standard_bit_mutation(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """各ビットを確率 1/n で反転（n 個の一様乱数を消費する）"""
    n = len(x)
    flips = rng.random(n) < 1.0 / n
    return np.logical_xor(x, flips)


# ==================== データ型 ====================

@dataclass(frozen=True)
class RunConfig:
    """1回の実行の設定"""
    budget: int
    seed: int
    p_ub: Optional[int] = None
    mu_pop: Optional[int] = None

    def __post_init__(self):
        if self.budget < 1:
            raise DomainError(f"budget must be >= 1: {self.budget}")
        if not (0 <= self.seed < 2 ** 64):
            raise DomainError(f"seed must be a 64-bit unsigned integer: {self.seed}")
        if self.p_ub is not None and self.p_ub < 1:
            raise DomainError(f"p_ub must be >= 1: {self.p_ub}")
        if self.mu_pop is not None and self.mu_pop < 2:
            raise DomainError(f"mu_pop must be >= 2: {self.mu_pop}")


@dataclass
class ArchiveMember:
    bits: np.ndarray
    obj: ObjectiveVector
    feasible: Optional[bool] = None


class Archive:
    """
    多目的アルゴリズムの個体群

    mode は 'gsemo'（相互に非支配）、'convex'（左下凸包の頂点のみ）、
    'population'（Convex (μ+1)-EA の固定サイズ個体群）のいずれか。
    """

    def __init__(self, mode: str):
        self.mode = mode
        self.members: List[ArchiveMember] = []
        self.max_size_seen = 0
        self._mu = np.empty(0)
        self._var = np.empty(0)

    def __len__(self):
        return len(self.members)

    def objectives(self) -> List[ObjectiveVector]:
        return [m.obj for m in self.members]

    def replace(self, members: List[ArchiveMember]):
        """メンバーを入れ替え、最大サイズを更新"""
        self.members = members
        self._mu = np.array([m.obj.mu_obj for m in members], dtype=np.float64)
        self._var = np.array([m.obj.var_obj for m in members], dtype=np.float64)
        self.max_size_seen = max(self.max_size_seen, len(members))

    def strongly_dominated(self, obj: ObjectiveVector) -> bool:
        """obj を強支配するメンバーがいるか"""
        weak = (self._mu <= obj.mu_obj) & (self._var <= obj.var_obj)
        strict = (self._mu < obj.mu_obj) | (self._var < obj.var_obj)
        return bool(np.any(weak & strict))

    def weakly_covered(self, obj: ObjectiveVector) -> bool:
        """obj を弱支配する（同値を含む）メンバーがいるか"""
        return bool(np.any((self._mu <= obj.mu_obj) & (self._var <= obj.var_obj)))

    def without_dominated_by(self, obj: ObjectiveVector) -> List[ArchiveMember]:
        """obj に弱支配されないメンバーだけを返す"""
        keep = ~((obj.mu_obj <= self._mu) & (obj.var_obj <= self._var))
        return [m for m, k in zip(self.members, keep) if k]

    def mark_feasibility(self, problem):
        for member in self.members:
            member.feasible = bool(problem.is_feasible(member.bits))


@dataclass
class RunResult:
    """実行結果"""
    evaluations_used: int
    max_pop: int
    best_solution: Optional[np.ndarray] = None
    best_fitness: Optional[float] = None
    best_feasible: Optional[bool] = None
    archive: Optional[Archive] = None
    trace: Optional[List[Tuple[int, float]]] = field(default=None, repr=False)


Observer = Callable[[int, object], None]
StopPredicate = Callable[[int, object], bool]


# ==================== (1+1) EA ====================

def run_one_one_ea(problem: ScalarEvaluator, cfg: RunConfig,
                   observer: Optional[Observer] = None,
                   stop: Optional[StopPredicate] = None) -> RunResult:
    """
    (1+1) EA

    f(y) ≤ f(x) なら y で置き換える。trace には改善があった評価回数と値を記録。

    Args:
        problem: 単目的評価器
        cfg: 実行設定
        observer: 各反復後に observer(evaluations, (x, f(x))) を呼ぶ
        stop: stop(evaluations, (x, f(x))) が True なら打ち切る
    """
    rng = make_rng(cfg.seed)
    x = random_solution(problem.n_bits, rng)
    fx = problem(x)
    evaluations = 1
    trace = [(evaluations, fx)]

    while evaluations < cfg.budget:
        if stop is not None and stop(evaluations, (x, fx)):
            break
        y = standard_bit_mutation(x, rng)
        fy = problem(y)
        evaluations += 1
        if fy <= fx:
            if fy < fx:
                trace.append((evaluations, fy))
            x, fx = y, fy
        if observer is not None:
            observer(evaluations, (x, fx))

    return RunResult(
        evaluations_used=evaluations,
        max_pop=1,
        best_solution=x,
        best_fitness=fx,
        best_feasible=bool(problem.is_feasible(x)),
        trace=trace,
    )


# ==================== GSEMO ====================

def _initial_archive(problem: VectorEvaluator, rng, mode: str) -> Archive:
    archive = Archive(mode)
    x = random_solution(problem.n_bits, rng)
    archive.replace([ArchiveMember(x, problem(x))])
    return archive


def _pick_parent(archive: Archive, rng) -> np.ndarray:
    return archive.members[int(rng.integers(len(archive)))].bits


def run_gsemo(problem: VectorEvaluator, cfg: RunConfig,
              observer: Optional[Observer] = None,
              stop: Optional[StopPredicate] = None) -> RunResult:
    """
    GSEMO

    子が既存メンバーに強支配されなければ追加し、子に弱支配されるメンバーを除去する。
    """
    rng = make_rng(cfg.seed)
    archive = _initial_archive(problem, rng, 'gsemo')
    evaluations = 1

    while evaluations < cfg.budget:
        if stop is not None and stop(evaluations, archive):
            break
        y = standard_bit_mutation(_pick_parent(archive, rng), rng)
        fy = problem(y)
        evaluations += 1
        if not archive.strongly_dominated(fy):
            survivors = archive.without_dominated_by(fy)
            survivors.append(ArchiveMember(y, fy))
            archive.replace(survivors)
        if observer is not None:
            observer(evaluations, archive)

    archive.mark_feasibility(problem)
    return RunResult(evaluations_used=evaluations, max_pop=archive.max_size_seen, archive=archive)


# ==================== Convex GSEMO ====================

def run_convex_gsemo(problem: VectorEvaluator, cfg: RunConfig,
                     observer: Optional[Observer] = None,
                     stop: Optional[StopPredicate] = None) -> RunResult:
    """
    Convex GSEMO

    子が現在の個体群と合わせた左下凸包の頂点になる場合だけ受理する。
    受理後は凸包外のメンバーを除去し、p_ub を超えたら分散最大のメンバーを除く。
    """
    if cfg.p_ub is None:
        raise DomainError("convex GSEMO needs p_ub")

    rng = make_rng(cfg.seed)
    archive = _initial_archive(problem, rng, 'convex')
    evaluations = 1

    while evaluations < cfg.budget:
        if stop is not None and stop(evaluations, archive):
            break
        y = standard_bit_mutation(_pick_parent(archive, rng), rng)
        fy = problem(y)
        evaluations += 1

        # 弱支配される子は凸包の頂点にならない
        if not archive.weakly_covered(fy) and is_on_envelope(fy, archive.objectives()):
            survivors = archive.without_dominated_by(fy)
            survivors.append(ArchiveMember(y, fy))
            hull = sorted(envelope_member_indices([m.obj for m in survivors]))
            survivors = [survivors[i] for i in hull]
            if len(survivors) > cfg.p_ub:
                drop = max(range(len(survivors)), key=lambda i: survivors[i].obj.var_obj)
                del survivors[drop]
            archive.replace(survivors)
        if observer is not None:
            observer(evaluations, archive)

    archive.mark_feasibility(problem)
    return RunResult(evaluations_used=evaluations, max_pop=archive.max_size_seen, archive=archive)


# ==================== Convex (μ+1)-EA ====================

def run_convex_mu_ea(problem: VectorEvaluator, cfg: RunConfig,
                     observer: Optional[Observer] = None,
                     stop: Optional[StopPredicate] = None) -> RunResult:
    """
    Convex (μ+1)-EA

    子を加えた μ+1 個体を凸包ランキングし、(ランク, 分散) が辞書式最大の個体を除く。
    同順位なら古い個体から除く。
    """
    if cfg.mu_pop is None:
        raise DomainError("convex (mu+1)-EA needs mu_pop")
    if cfg.budget < cfg.mu_pop:
        raise DomainError(f"budget {cfg.budget} cannot cover the initial population of {cfg.mu_pop}")

    rng = make_rng(cfg.seed)
    archive = Archive('population')
    initial = []
    for _ in range(cfg.mu_pop):
        x = random_solution(problem.n_bits, rng)
        initial.append(ArchiveMember(x, problem(x)))
    archive.replace(initial)
    evaluations = cfg.mu_pop

    while evaluations < cfg.budget:
        if stop is not None and stop(evaluations, archive):
            break
        y = standard_bit_mutation(_pick_parent(archive, rng), rng)
        fy = problem(y)
        evaluations += 1

        candidates = archive.members + [ArchiveMember(y, fy)]
        ranked = convex_hull_rank([m.obj for m in candidates])
        ranks = ranked.ranks
        drop = max(range(len(candidates)),
                   key=lambda i: (ranks[i], candidates[i].obj.var_obj, -i))
        del candidates[drop]
        archive.replace(candidates)
        if observer is not None:
            observer(evaluations, archive)

    archive.mark_feasibility(problem)
    return RunResult(evaluations_used=evaluations, max_pop=archive.max_size_seen, archive=archive)


# ==================== α ごとの取り出し ====================

def decode_alpha(archive: Archive, conf: Confidence) -> Optional[Tuple[np.ndarray, float]]:
    """
    個体群から g が最小の実行可能解を取り出す

    タイは分散の小さい方、次に添字の小さい方。

    Returns:
        (解, g値)、実行可能なメンバーがいなければ None
    """
    best_key = None
    best = None
    for index, member in enumerate(archive.members):
        if member.feasible is not True:
            continue
        value = g_value(member.obj.mu_obj, member.obj.var_obj, conf)
        key = (value, member.obj.var_obj, index)
        if best_key is None or key < best_key:
            best_key = key
            best = (member.bits, value)
    return best


def decode_alpha_grid(archive: Archive, betas: Sequence[float]) -> Dict[float, Optional[Tuple[np.ndarray, float]]]:
    """β（α = 1 - β）ごとに decode_alpha を適用"""
    decoded = {}
    for beta in betas:
        decoded[beta] = decode_alpha(archive, Confidence.from_beta(beta))
        if decoded[beta] is None:
            logger.warning(f"実行可能な解がありません (beta={beta})")
    return decoded


ALGORITHM_RUNNERS = {
    'oneplusone': run_one_one_ea,
    'gsemo': run_gsemo,
    'convex_gsemo': run_convex_gsemo,
    'convex_mu': run_convex_mu_ea,
}
