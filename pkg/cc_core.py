"""
CC Core

確率的重み（正規分布）のモデル、決定論的等価目的関数 g、スカラー化 f_λ、
支配関係、λ閾値の計算を提供します。他の全モジュールから共有されます。
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

from cc_utils import DomainError, ContractViolation


# 標準正規分布の定数
_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)

# K_α 探索の設定
_K_SEARCH_HIGH = 40.0
_BISECTION_TOL = 1e-12
_SERIES_CUTOFF = 1e-15
_TAIL_SWITCH = 3.0
_CONTINUED_FRACTION_DEPTH = 200

# 実数値インスタンスでの λ 重複判定の許容誤差
LAMBDA_DEDUP_TOL = 1e-12


# ==================== 標準正規分布 ====================

def normal_pdf(x: float) -> float:
    """標準正規分布の密度関数 φ(x)"""
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


def _erf_series(z: float) -> float:
    """
    erf(z) の級数展開（z ≥ 0）

    erf(z) = 2/√π · e^{-z²} · Σ 2^n z^{2n+1} / (1·3·…·(2n+1))
    全項が正なので桁落ちしない。
    """
    if z == 0.0:
        return 0.0
    z2 = z * z
    term = z
    total = z
    n = 0
    while term > _SERIES_CUTOFF * total:
        n += 1
        term *= 2.0 * z2 / (2 * n + 1)
        total += term
    return _TWO_OVER_SQRT_PI * math.exp(-z2) * total


def _upper_tail_continued_fraction(x: float) -> float:
    """Q(x) = φ(x) / (x + 1/(x + 2/(x + 3/(x + …)))) を後ろから評価（x ≥ 3）"""
    t = x
    for j in range(_CONTINUED_FRACTION_DEPTH, 0, -1):
        t = x + j / t
    return normal_pdf(x) / t


def normal_sf(x: float) -> float:
    """標準正規分布の上側確率 Q(x) = 1 - Φ(x)"""
    if x < 0.0:
        return 1.0 - normal_sf(-x)
    if x >= _TAIL_SWITCH:
        return _upper_tail_continued_fraction(x)
    return 0.5 - 0.5 * _erf_series(x / _SQRT2)


def normal_cdf(x: float) -> float:
    """標準正規分布の累積分布関数 Φ(x)"""
    if x < 0.0:
        return normal_sf(-x)
    if x >= _TAIL_SWITCH:
        return 1.0 - _upper_tail_continued_fraction(x)
    return 0.5 + 0.5 * _erf_series(x / _SQRT2)


def _tail_quantile(beta: float) -> float:
    """Q(K) = beta を満たす K ≥ 0 を二分法とニュートン法2回で求める"""
    lo, hi = 0.0, _K_SEARCH_HIGH
    while hi - lo > _BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if normal_sf(mid) > beta:
            lo = mid
        else:
            hi = mid
    k = 0.5 * (lo + hi)

    for _ in range(2):
        density = normal_pdf(k)
        if density <= 0.0:
            break
        k = k + (normal_sf(k) - beta) / density
    return max(k, 0.0)


def k_alpha(alpha: float) -> float:
    """
    α分位点 K_α を計算

    Args:
        alpha: 信頼水準（0.5 ≤ alpha < 1）

    Returns:
        Φ(K) = alpha となる K（K ≥ 0）
    """
    if not (0.5 <= alpha < 1.0) or math.isnan(alpha):
        raise DomainError(f"alpha must lie in [0.5, 1): {alpha}")
    if alpha == 0.5:
        return 0.0
    return _tail_quantile(1.0 - alpha)


def k_alpha_from_beta(beta: float) -> float:
    """β = 1 - α から直接 K_α を計算（β が極小でも精度を保つ）"""
    if not (0.0 < beta <= 0.5):
        raise DomainError(f"beta must lie in (0, 0.5]: {beta}")
    if beta == 0.5:
        return 0.0
    return _tail_quantile(beta)


# ==================== ドメイン型 ====================

@dataclass(frozen=True)
class StochItem:
    """
    1つの確率的重み N(mu, var)

    lower_bound は mu と var の下限。通常は1で、支配集合のノード重み
    （負相関設定では mu=0 や var=0 が生じる）だけ 0 で生成する。
    """
    mu: float
    var: float
    lower_bound: float = field(default=1.0, compare=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.mu) and math.isfinite(self.var)):
            raise DomainError(f"item weights must be finite: ({self.mu}, {self.var})")
        if self.mu < self.lower_bound or self.var < self.lower_bound:
            raise DomainError(
                f"item weights must be >= {self.lower_bound}: ({self.mu}, {self.var})"
            )


@dataclass(frozen=True)
class Confidence:
    """信頼水準 α とその分位点 K_α"""
    alpha: float
    k_alpha: float

    def __post_init__(self):
        if not (0.5 <= self.alpha < 1.0):
            raise DomainError(f"alpha must lie in [0.5, 1): {self.alpha}")
        if not (self.k_alpha >= 0.0 and math.isfinite(self.k_alpha)):
            raise DomainError(f"k_alpha must be finite and >= 0: {self.k_alpha}")

    @classmethod
    def from_alpha(cls, alpha: float) -> 'Confidence':
        return cls(alpha=alpha, k_alpha=k_alpha(alpha))

    @classmethod
    def from_beta(cls, beta: float) -> 'Confidence':
        """α = 1 - β として生成"""
        return cls(alpha=1.0 - beta, k_alpha=k_alpha_from_beta(beta))

    @classmethod
    def from_k_alpha(cls, k: float) -> 'Confidence':
        """K_α を固定して生成（インスタンスIでは K_α = 1）"""
        return cls(alpha=normal_cdf(k), k_alpha=float(k))


@dataclass(frozen=True)
class ObjectiveVector:
    """ペナルティ込みの (期待値, 分散)"""
    mu_obj: float
    var_obj: float

    def __post_init__(self):
        if not (math.isfinite(self.mu_obj) and math.isfinite(self.var_obj)):
            raise ContractViolation(f"objective must be finite: ({self.mu_obj}, {self.var_obj})")
        if self.mu_obj < 0 or self.var_obj < 0:
            raise ContractViolation(f"objective must be >= 0: ({self.mu_obj}, {self.var_obj})")

    def as_tuple(self) -> Tuple[float, float]:
        return (self.mu_obj, self.var_obj)


@dataclass(frozen=True)
class LambdaSet:
    """
    重み λ の集合 Λ

    values は 0 と 1 を含む昇順の λ。整数値のアイテムでは exact に
    正確な有理数を保持する（貪欲法のタイ判定に使う）。
    """
    values: Tuple[float, ...]
    pair_count: int
    exact: Optional[Tuple[Fraction, ...]] = None

    def __len__(self):
        return len(self.values)

    def weights(self) -> List[Union[Fraction, float]]:
        """貪欲オラクルに渡す λ（正確な値があればそちらを優先）"""
        return list(self.exact) if self.exact is not None else list(self.values)


# ==================== 目的関数 ====================

def g_value(mu_total: float, var_total: float, conf: Confidence) -> float:
    """
    決定論的等価 g = μ + K_α·√v

    Args:
        mu_total: 選択アイテムの期待値の合計
        var_total: 選択アイテムの分散の合計
        conf: 信頼水準
    """
    if mu_total < 0 or var_total < 0:
        raise ContractViolation(f"g_value needs non-negative totals: ({mu_total}, {var_total})")
    if var_total == 0:
        return float(mu_total)
    return mu_total + conf.k_alpha * math.sqrt(var_total)


def _as_pair(point) -> Tuple[float, float]:
    if isinstance(point, StochItem):
        return point.mu, point.var
    return point.mu_obj, point.var_obj


def f_lambda(point: Union[ObjectiveVector, StochItem], lam: float) -> float:
    """
    スカラー化 f_λ = λ·μ + (1-λ)·v

    ObjectiveVector にも単一アイテム（StochItem）にも適用できる。
    """
    if not (0 <= lam <= 1):
        raise DomainError(f"lambda must lie in [0, 1]: {lam}")
    mu, var = _as_pair(point)
    return lam * mu + (1 - lam) * var


def dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """弱支配 a ⪯ b"""
    return a.mu_obj <= b.mu_obj and a.var_obj <= b.var_obj


def strongly_dominates(a: ObjectiveVector, b: ObjectiveVector) -> bool:
    """強支配 a ≺ b（弱支配かつ少なくとも一方が真に小さい）"""
    return dominates(a, b) and (a.mu_obj < b.mu_obj or a.var_obj < b.var_obj)


# ==================== λ閾値 ====================

def is_integral(value: float) -> bool:
    """float が正確な整数値か"""
    return float(value).is_integer() and abs(value) < 2 ** 53


def items_are_integral(items: Sequence[StochItem]) -> bool:
    return all(is_integral(it.mu) and is_integral(it.var) for it in items)


def exact_threshold(item_i: StochItem, item_j: StochItem) -> Optional[Fraction]:
    """整数値アイテムの λ_{i,j} を有理数で返す（比較可能なら None）"""
    if not (item_i.var < item_j.var and item_i.mu > item_j.mu):
        return None
    dv = Fraction(int(item_j.var)) - Fraction(int(item_i.var))
    dm = Fraction(int(item_i.mu)) - Fraction(int(item_j.mu))
    return dv / (dm + dv)


def lambda_threshold(item_i: StochItem, item_j: StochItem) -> Optional[float]:
    """
    貪欲順序が入れ替わる λ_{i,j}

    item_i.var < item_j.var かつ item_i.mu > item_j.mu のときだけ定義され、
    (0, 1) の値を返す。それ以外は None。
    """
    if not (item_i.var < item_j.var and item_i.mu > item_j.mu):
        return None
    if is_integral(item_i.mu) and is_integral(item_i.var) \
            and is_integral(item_j.mu) and is_integral(item_j.var):
        return float(exact_threshold(item_i, item_j))
    dv = item_j.var - item_i.var
    dm = item_i.mu - item_j.mu
    return dv / (dm + dv)


def lambda_set(items: Sequence[StochItem]) -> LambdaSet:
    """
    全ての非比較可能ペアの閾値から Λ を構築

    Args:
        items: アイテム（または辺）の確率的重み

    Returns:
        LambdaSet（0 と 1 を両端に含む）
    """
    if not items:
        raise DomainError("lambda_set needs at least one item")

    integral = items_are_integral(items)
    exact_values = set()
    float_values = []
    pair_count = 0

    n = len(items)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = items[i], items[j]
            # どちらの向きでも非比較可能なら閾値が1つ定まる
            if integral:
                t = exact_threshold(a, b)
                if t is None:
                    t = exact_threshold(b, a)
                if t is not None:
                    pair_count += 1
                    exact_values.add(t)
            else:
                t = lambda_threshold(a, b)
                if t is None:
                    t = lambda_threshold(b, a)
                if t is not None:
                    pair_count += 1
                    float_values.append(t)

    if integral:
        exact = (Fraction(0),) + tuple(sorted(exact_values)) + (Fraction(1),)
        return LambdaSet(values=tuple(float(v) for v in exact), pair_count=pair_count, exact=exact)

    deduped = []
    for t in sorted(float_values):
        if not deduped or t - deduped[-1] > LAMBDA_DEDUP_TOL:
            deduped.append(t)
    # 0 と 1 の近傍の閾値は端点とは別の値として残す
    values = (0.0,) + tuple(deduped) + (1.0,)
    return LambdaSet(values=values, pair_count=pair_count)
