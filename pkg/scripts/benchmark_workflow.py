#!/usr/bin/env python
"""
CC Benchmark 一括ワークフロー

このスクリプトは以下の処理を順次実行します:
1. インスタンスIの成功率（(1+1) EA と GSEMO）
2. 支配集合の3設定それぞれで (1+1) EA / GSEMO / Convex GSEMO を比較
3. CSV と Markdown の結果表を出力

グラフは CC_GRAPH_DIR のファイル（*.mtx は Matrix Market、それ以外は辺リスト）を使い、
ディレクトリがなければ CC_RANDOM_GRAPH_N 頂点のランダムグラフを使います。
"""

import argparse
import os
import sys
import logging
from datetime import datetime
from pathlib import Path

from dotenv import load_dotenv

# パスを追加
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from cc_harness import (
    DEFAULT_BETAS, DOMSET_SETTINGS, ExperimentConfig, emit_tables, full_protocol,
    run_experiment, run_success_rate, success_rows_to_frame, success_trend_violations,
)
from cc_utils import DomainError, setup_logger
from src.table_export.exporter import TableExporter

logger = logging.getLogger(__name__)


def graph_sources(graph_dir: str):
    """グラフファイルの (パス, 形式) を列挙"""
    if not graph_dir or not os.path.isdir(graph_dir):
        return []
    sources = []
    for path in sorted(Path(graph_dir).iterdir()):
        if path.is_file():
            fmt = 'matrix_market' if path.suffix == '.mtx' else 'edge_list'
            sources.append((str(path), fmt))
    return sources


def domset_configs(results_dir: str, budget: int, replicates: int, seed: int, max_workers: int):
    """グラフと重み設定の組ごとに実験設定を作る"""
    sources = graph_sources(os.getenv('CC_GRAPH_DIR', './data/graphs'))
    random_n = int(os.getenv('CC_RANDOM_GRAPH_N', '100'))
    graph_header = os.getenv('CC_GRAPH_HEADER', 'false').lower() in ('1', 'true', 'yes')

    configs = []
    for setting in DOMSET_SETTINGS:
        targets = sources or [(None, 'edge_list')]
        for graph_path, fmt in targets:
            name = Path(graph_path).stem if graph_path else f"gnp{random_n}"
            configs.append(ExperimentConfig(
                label=f"{name}-{setting}",
                problem='domset',
                algorithms=('oneplusone', 'gsemo', 'convex_gsemo'),
                budget=budget,
                replicates=replicates,
                seed=seed,
                betas=DEFAULT_BETAS,
                output=os.path.join(results_dir, f"{name}-{setting}.csv"),
                formats=('csv', 'markdown'),
                graph_path=graph_path,
                graph_format=fmt,
                graph_header=graph_header,
                n=None if graph_path else random_n,
                setting=setting,
                max_workers=max_workers,
            ))
    return configs


def main():
    """メイン処理"""
    load_dotenv()
    logger = setup_logger()

    parser = argparse.ArgumentParser(description='CC Benchmark 一括ワークフロー')
    parser.add_argument('--full-protocol', action='store_true', help='予算 10^7、30 レプリケート、10 個の β')
    parser.add_argument('--skip-success-rate', action='store_true', help='インスタンスIの成功率を省略')
    parser.add_argument('--seed', type=int, default=0)
    args = parser.parse_args()

    budget = int(os.getenv('CC_DEFAULT_BUDGET', '100000'))
    max_workers = int(os.getenv('CC_MAX_WORKERS', '3'))
    results_dir = os.getenv('CC_RESULTS_DIR', './data/results')
    replicates = 30 if args.full_protocol else 10

    logger.info("=" * 80)
    logger.info("CC Benchmark Workflow 開始")
    logger.info(f"実行時刻: {datetime.now()}")
    logger.info("=" * 80)

    try:
        # ステップ1: インスタンスIの成功率
        if not args.skip_success_rate:
            logger.info("\n[1/2] インスタンスIの成功率")
            rows = run_success_rate([50, 100, 200], replicates=replicates, budget=max(budget, 1_000_000),
                                    seed=args.seed, max_workers=max_workers)
            path = TableExporter(output_dir=results_dir).export_frame(
                success_rows_to_frame(rows), 'success_rate.csv')
            logger.info(f"成功率出力完了: {path}")
            for n_a, n_b in success_trend_violations(rows):
                logger.warning(f"(1+1) EA の大域最適到達回数が n={n_a} → n={n_b} で増加しました")

        # ステップ2: 支配集合
        logger.info("\n[2/2] 確率的支配集合の比較")
        for cfg in domset_configs(results_dir, budget, replicates, args.seed, max_workers):
            if args.full_protocol:
                cfg = full_protocol(cfg)
            result_rows = run_experiment(cfg)
            for fmt in cfg.formats:
                suffix = '.csv' if fmt == 'csv' else '.md'
                path = emit_tables(result_rows, str(Path(cfg.output).with_suffix(suffix)), fmt)
                logger.info(f"{cfg.label}: {path}")

        logger.info("\n" + "=" * 80)
        logger.info("CC Benchmark Workflow 正常終了")
        logger.info("=" * 80)

    except (DomainError, OSError) as e:
        logger.error(f"エラーが発生しました: {str(e)}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
