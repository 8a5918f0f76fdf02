"""
結果表出力モジュール

実験結果（ResultRow のリスト）を CSV と Markdown で出力
"""

import math
import os
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd

import sys
sys.path.append(os.path.join(os.path.dirname(__file__), '../..'))

from src.algorithms.algorithm_names import get_display_name, is_multi_objective

CSV_COLUMNS = [
    "instance", "beta", "alg", "mean", "std", "p1", "p2", "p3", "max_pop_mean", "max_pop_std",
]

SIGNIFICANCE_LEVEL = 0.05


def _is_missing(value) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))


def _fmt_value(value) -> str:
    return "-" if _is_missing(value) else f"{value:.2f}"


def _fmt_p(value) -> str:
    if _is_missing(value):
        return "-"
    text = f"{value:.2E}"
    return f"**{text}**" if value <= SIGNIFICANCE_LEVEL else text


class TableExporter:
    """CSV / Markdown 出力管理"""

    def __init__(self, output_dir: Optional[str] = None):
        """
        Args:
            output_dir: 出力ディレクトリ（Noneの場合は環境変数 CC_RESULTS_DIR）
        """
        self.output_dir = output_dir or os.getenv('CC_RESULTS_DIR', './data/results')

    def _target(self, filename: str) -> str:
        path = os.path.join(self.output_dir, filename)
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        return path

    def rows_to_frame(self, rows: Sequence) -> pd.DataFrame:
        """ResultRow を (instance, beta, alg) ごとの1行に展開"""
        records = []
        for row in rows:
            for alg, stat in row.stats.items():
                records.append({
                    "instance": row.instance,
                    "beta": row.beta,
                    "alg": alg,
                    "mean": stat.mean,
                    "std": stat.std,
                    "p1": row.p1,
                    "p2": row.p2,
                    "p3": row.p3,
                    "max_pop_mean": stat.max_pop_mean,
                    "max_pop_std": stat.max_pop_std,
                })
        return pd.DataFrame.from_records(records, columns=CSV_COLUMNS)

    def export_csv(self, rows: Sequence, filename: str) -> str:
        """
        CSV を出力

        Returns:
            CSVファイルパス
        """
        path = self._target(filename)
        self.rows_to_frame(rows).to_csv(path, index=False)
        return path

    def export_frame(self, frame: pd.DataFrame, filename: str) -> str:
        """任意の DataFrame（極点一覧、成功率など）を CSV で出力"""
        path = self._target(filename)
        frame.to_csv(path, index=False)
        return path

    def export_markdown(self, rows: Sequence, filename: str) -> str:
        """
        インスタンスごとの結果表と最大個体群サイズ表を Markdown で出力

        行ごとに平均の最小値と p ≤ 0.05 を太字にする。

        Returns:
            Markdownファイルパス
        """
        path = self._target(filename)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(self.render_markdown(rows))
        return path

    def render_markdown(self, rows: Sequence) -> str:
        blocks: Dict[str, List] = {}
        for row in rows:
            blocks.setdefault(row.instance, []).append(row)

        lines = ["# Results", ""]
        for instance, instance_rows in blocks.items():
            algorithms = list(instance_rows[0].stats.keys())
            lines.append(f"## {instance}")
            lines.append("")

            header = ["β"]
            for alg in algorithms:
                header += [f"{get_display_name(alg)} mean", f"{get_display_name(alg)} std"]
            header += ["p1", "p2", "p3"]
            lines.append("| " + " | ".join(header) + " |")
            lines.append("|" + "---|" * len(header))

            for row in instance_rows:
                means = [row.stats[alg].mean for alg in algorithms]
                finite = [m for m in means if not _is_missing(m)]
                best = min(finite) if finite else None

                cells = [f"{row.beta:.1E}"]
                for alg, mean in zip(algorithms, means):
                    text = _fmt_value(mean)
                    if best is not None and not _is_missing(mean) and mean == best:
                        text = f"**{text}**"
                    cells += [text, _fmt_value(row.stats[alg].std)]
                cells += [_fmt_p(row.p1), _fmt_p(row.p2), _fmt_p(row.p3)]
                lines.append("| " + " | ".join(cells) + " |")
            lines.append("")

        lines += self._population_table(blocks)
        return "\n".join(lines) + "\n"

    def _population_table(self, blocks: Dict[str, List]) -> List[str]:
        """多目的アルゴリズムの平均最大個体群サイズ（β に依存しないので先頭行を使う）"""
        algorithms = []
        for instance_rows in blocks.values():
            for alg in instance_rows[0].stats:
                if is_multi_objective(alg) and alg not in algorithms:
                    algorithms.append(alg)
        if not algorithms:
            return []

        header = ["Graph"]
        for alg in algorithms:
            header += [f"{get_display_name(alg)} P_max mean", f"{get_display_name(alg)} P_max std"]
        lines = ["## Maximum population size", "", "| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        for instance, instance_rows in blocks.items():
            stats = instance_rows[0].stats
            cells = [instance]
            for alg in algorithms:
                stat = stats.get(alg)
                cells += [_fmt_value(stat.max_pop_mean if stat else None),
                          _fmt_value(stat.max_pop_std if stat else None)]
            lines.append("| " + " | ".join(cells) + " |")
        lines.append("")
        return lines
