"""
アルゴリズム名称定義

設定ファイル・CSV で使うキーと表示名のマッピングを提供
"""

# キー → 表示名
ALGORITHM_NAMES = {
    "oneplusone": "(1+1) EA",
    "gsemo": "GSEMO",
    "convex_gsemo": "Convex GSEMO",
    "convex_mu": "Convex (μ+1)-EA",
}

# 多目的アルゴリズム（1回の実行を全 β で使い回す）
MULTI_OBJECTIVE = ("gsemo", "convex_gsemo", "convex_mu")

# p 値の比較ペア（p1, p2, p3）
P_VALUE_PAIRS = (
    ("p1", "oneplusone", "gsemo"),
    ("p2", "oneplusone", "convex_gsemo"),
    ("p3", "gsemo", "convex_gsemo"),
)


def get_display_name(key: str) -> str:
    """キーから表示名を取得"""
    return ALGORITHM_NAMES.get(key, key)


def is_multi_objective(key: str) -> bool:
    return key in MULTI_OBJECTIVE
