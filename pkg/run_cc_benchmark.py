"""
CC Benchmark 実行スクリプト

確率制約付き最適化ベンチマークのコマンドラインです。

使用方法:
    python run_cc_benchmark.py gen instance-i --n 100 --out data/instances/i100.json
    python run_cc_benchmark.py gen domset --setting neg_correlated --n 100 --edge-prob 0.05 --out d.json
    python run_cc_benchmark.py run --config experiments/domset_neg_correlated.ini [--full-protocol]
    python run_cc_benchmark.py oracle extreme-points --instance data/instances/u10.json
    python run_cc_benchmark.py table --csv data/results/run.csv --format markdown --out run.md
    python run_cc_benchmark.py success-rate --sizes 50,100,200 --replicates 30 --budget 1000000

終了コード:
    0: 成功
    1: 入力エラー（引数・定義域）
    2: ファイル入出力エラー
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import pandas as pd
from dotenv import load_dotenv

from cc_core import Confidence, lambda_set
from cc_harness import (
    DOMSET_SETTINGS, GRAPH_FORMATS, TABLE_FORMATS, emit_tables, gen_domset_setting, gen_instance_I,
    gen_random_connected_graph, gen_random_graph, gen_uniform_random, load_experiment_config,
    full_protocol, load_graph, load_instance_document, parse_float_list, parse_name_list,
    read_results_csv, run_experiment, run_success_rate, save_instance, success_rows_to_frame,
)
from cc_oracles import brute_force_optimum, extreme_point_set, greedy_uniform, kruskal_lambda
from cc_problems import GraphInstance, UniformInstance, make_problem
from cc_utils import DomainError, UsageError, setup_logger
from src.algorithms.algorithm_names import ALGORITHM_NAMES
from src.table_export.exporter import TableExporter

logger = logging.getLogger(__name__)

GEN_KINDS = ('instance-i', 'uniform', 'mst', 'domset')
ORACLE_KINDS = ('extreme-points', 'brute-force', 'greedy', 'kruskal')


@dataclass
class CliCommand:
    verb: str
    options: Dict[str, object] = field(default_factory=dict)


class CliArgumentParser(argparse.ArgumentParser):
    """引数エラーで終了せず UsageError を送出するパーサ"""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(prog='run_cc_benchmark', description='CC Benchmark 実行スクリプト')
    sub = parser.add_subparsers(dest='verb', required=True)

    gen = sub.add_parser('gen', help='インスタンスを生成')
    gen.add_argument('kind', choices=GEN_KINDS)
    gen.add_argument('--n', type=int, help='アイテム数または頂点数')
    gen.add_argument('--k', type=int, help='選択数の下限（uniform）')
    gen.add_argument('--edges', type=int, help='辺数（mst）')
    gen.add_argument('--edge-prob', type=float, default=0.05, help='辺の確率（domset のランダムグラフ）')
    gen.add_argument('--max-weight', type=int, default=50, help='整数重みの上限')
    gen.add_argument('--setting', choices=DOMSET_SETTINGS, default='uniform_random')
    gen.add_argument('--graph', help='グラフファイル（domset）')
    gen.add_argument('--graph-format', choices=GRAPH_FORMATS, default='edge_list')
    gen.add_argument('--graph-header', action='store_true', help='辺リストの最初の行を "n m" ヘッダとして読む')
    gen.add_argument('--seed', type=int, default=0)
    gen.add_argument('--out', required=True, help='出力する JSON ファイル')

    run = sub.add_parser('run', help='設定ファイルの実験を実行')
    run.add_argument('--config', required=True, help='INI 形式の実験設定')
    run.add_argument('--seed', type=int)
    run.add_argument('--budget', type=int)
    run.add_argument('--betas', help='カンマ区切りの β')
    run.add_argument('--replicates', type=int)
    run.add_argument('--p-ub', type=int)
    run.add_argument('--out', help='出力ファイル（拡張子は形式ごとに付け替える）')
    run.add_argument('--format', help='csv,markdown')
    run.add_argument('--workers', type=int)
    run.add_argument('--fixed-weights', action='store_true', help='全レプリケートで同じ重みを使う')
    run.add_argument('--full-protocol', action='store_true', help='予算 10^7、30 レプリケート、10 個の β')

    oracle = sub.add_parser('oracle', help='厳密解法を実行')
    oracle.add_argument('kind', choices=ORACLE_KINDS)
    oracle.add_argument('--instance', required=True, help='JSON インスタンスファイル')
    oracle.add_argument('--lam', type=float, help='重み λ（greedy / kruskal）')
    oracle.add_argument('--betas', help='カンマ区切りの β（brute-force）')
    oracle.add_argument('--out', help='出力する CSV ファイル')

    table = sub.add_parser('table', help='CSV から結果表を再出力')
    table.add_argument('--csv', required=True)
    table.add_argument('--out', required=True)
    table.add_argument('--format', choices=TABLE_FORMATS, default='markdown')

    success = sub.add_parser('success-rate', help='インスタンスIの成功率')
    success.add_argument('--sizes', required=True, help='カンマ区切りの n')
    success.add_argument('--replicates', type=int, default=30)
    success.add_argument('--budget', type=int, default=1_000_000)
    success.add_argument('--seed', type=int, default=0)
    success.add_argument('--algorithms', default='oneplusone,gsemo')
    success.add_argument('--workers', type=int)
    success.add_argument('--out', help='出力する CSV ファイル')
    return parser


def _check_betas(text: str, flag: str) -> List[float]:
    try:
        betas = list(parse_float_list(text))
    except ValueError:
        raise UsageError(f"{flag}: not a list of numbers: {text!r}")
    if not betas or any(not (0.0 < b <= 0.5) for b in betas):
        raise UsageError(f"{flag}: every beta must lie in (0, 0.5]: {text!r}")
    return betas


def _check_positive(options: Dict[str, object], key: str, flag: str):
    value = options.get(key)
    if value is not None and value < 1:
        raise UsageError(f"{flag} must be >= 1: {value}")


def parse_args(argv: List[str]) -> CliCommand:
    """
    引数を検証して CliCommand を返す（ファイルには触れない）

    Raises:
        UsageError: 不明な動詞・フラグ、または値の誤り
    """
    args = _build_parser().parse_args(argv)
    options = {k: v for k, v in vars(args).items() if k != 'verb'}

    for key, flag in (('budget', '--budget'), ('replicates', '--replicates'),
                      ('p_ub', '--p-ub'), ('workers', '--workers'), ('max_weight', '--max-weight')):
        _check_positive(options, key, flag)
    if options.get('seed') is not None and options['seed'] < 0:
        raise UsageError(f"--seed must be >= 0: {options['seed']}")
    if options.get('betas') is not None:
        options['betas'] = _check_betas(options['betas'], '--betas')

    if args.verb == 'gen':
        kind = options['kind']
        if kind != 'domset' or options.get('graph') is None:
            if options.get('n') is None:
                raise UsageError(f"gen {kind}: --n is required")
        if kind == 'instance-i' and (options['n'] % 2 != 0 or options['n'] < 4):
            raise UsageError(f"gen instance-i: --n must be even and >= 4: {options['n']}")
        if kind == 'uniform' and options.get('k') is None:
            raise UsageError("gen uniform: --k is required")
        if not (0.0 <= options['edge_prob'] <= 1.0):
            raise UsageError(f"--edge-prob must lie in [0, 1]: {options['edge_prob']}")

    elif args.verb == 'run':
        if options.get('format') is not None:
            formats = list(parse_name_list(options['format']))
            bad = [f for f in formats if f not in TABLE_FORMATS]
            if not formats or bad:
                raise UsageError(f"--format must be csv and/or markdown: {options['format']!r}")
            options['format'] = formats

    elif args.verb == 'oracle':
        kind = options['kind']
        if kind in ('greedy', 'kruskal'):
            lam = options.get('lam')
            if lam is None or not (0.0 <= lam <= 1.0):
                raise UsageError(f"oracle {kind}: --lam in [0, 1] is required")

    elif args.verb == 'success-rate':
        try:
            sizes = [int(t) for t in parse_name_list(options['sizes'])]
        except ValueError:
            raise UsageError(f"--sizes: not a list of integers: {options['sizes']!r}")
        if not sizes or any(n < 4 or n % 2 != 0 for n in sizes):
            raise UsageError(f"--sizes: every n must be even and >= 4: {options['sizes']!r}")
        options['sizes'] = sizes
        algorithms = list(parse_name_list(options['algorithms']))
        bad = [a for a in algorithms if a not in ('oneplusone', 'gsemo', 'convex_gsemo')]
        if not algorithms or bad:
            raise UsageError(f"--algorithms: unsupported {bad or algorithms}")
        options['algorithms'] = algorithms

    return CliCommand(verb=args.verb, options=options)


# ==================== 各コマンド ====================

def _cmd_gen(opts) -> str:
    kind = opts['kind']
    alpha = None
    if kind == 'instance-i':
        instance, conf = gen_instance_I(opts['n'])
        alpha = conf.alpha
    elif kind == 'uniform':
        instance = gen_uniform_random(opts['n'], opts['k'], opts['max_weight'], opts['seed'])
    elif kind == 'mst':
        n_edges = opts.get('edges') or 2 * opts['n']
        instance = gen_random_connected_graph(opts['n'], n_edges, opts['max_weight'], opts['seed'])
    else:
        if opts.get('graph'):
            skeleton = load_graph(opts['graph'], opts['graph_format'], opts.get('graph_header', False))
        else:
            skeleton = gen_random_graph(opts['n'], opts['edge_prob'], opts['seed'])
        instance = gen_domset_setting(skeleton, opts['setting'], opts['seed'])

    path = save_instance(opts['out'], instance, alpha=alpha)
    size = instance.n if isinstance(instance, UniformInstance) else instance.n_vertices
    print(f"生成完了: {instance.label} (n={size}) → {path}")
    return path


def _with_extension(path: str, fmt: str) -> str:
    root, _ = os.path.splitext(path)
    return root + ('.csv' if fmt == 'csv' else '.md')


def _cmd_run(opts) -> List[str]:
    cfg = load_experiment_config(opts['config'])
    if opts.get('full_protocol'):
        cfg = full_protocol(cfg)

    overrides = {}
    for key, field_name in (('seed', 'seed'), ('budget', 'budget'), ('replicates', 'replicates'),
                            ('p_ub', 'p_ub'), ('out', 'output'), ('workers', 'max_workers')):
        if opts.get(key) is not None:
            overrides[field_name] = opts[key]
    if opts.get('betas') is not None:
        overrides['betas'] = tuple(opts['betas'])
    if opts.get('format') is not None:
        overrides['formats'] = tuple(opts['format'])
    if opts.get('fixed_weights'):
        overrides['fixed_weights'] = True
    cfg = replace(cfg, **overrides)

    rows = run_experiment(cfg)
    written = [emit_tables(rows, _with_extension(cfg.output, fmt), fmt) for fmt in cfg.formats]
    print(f"実験完了: {cfg.label} {len(rows)} 行 ({len(cfg.algorithms)} アルゴリズム) → {', '.join(written)}")
    return written


def _cmd_oracle(opts):
    document = load_instance_document(opts['instance'])
    instance = document.instance
    kind = opts['kind']

    if kind == 'extreme-points':
        eps = extreme_point_set(instance)
        items = instance.items if isinstance(instance, UniformInstance) else instance.edge_items
        bound = lambda_set(items).pair_count + 2
        print(f"極点数: {len(eps)} (上限 {bound}) - {instance.label}")
        if opts.get('out'):
            frame = pd.DataFrame([
                {"lambda": float(lam), "mu": obj.mu_obj, "var": obj.var_obj,
                 "bits": ''.join('1' if b else '0' for b in x)}
                for lam, obj, x in eps.points
            ])
            exporter = TableExporter(output_dir=os.path.dirname(opts["out"]) or ".")
            path = exporter.export_frame(frame, os.path.basename(opts["out"]))
            print(f"出力: {path}")
        return len(eps)

    if kind == 'brute-force':
        if opts.get('betas'):
            confs = [Confidence.from_beta(b) for b in opts['betas']]
        elif document.alpha is not None:
            confs = [Confidence.from_alpha(document.alpha)]
        else:
            confs = [Confidence.from_alpha(0.5)]
        for conf in confs:
            value = brute_force_optimum(make_problem(instance), conf)
            print(f"alpha={conf.alpha!r} K={conf.k_alpha:.6f} 最適値={value!r}")
        return len(confs)

    if kind == 'greedy':
        if not isinstance(instance, UniformInstance):
            raise DomainError("oracle greedy needs a uniform instance")
        x = greedy_uniform(instance, opts['lam'])
    else:
        if not (isinstance(instance, GraphInstance) and instance.kind == 'mst'):
            raise DomainError("oracle kruskal needs a spanning-tree instance")
        x = kruskal_lambda(instance, opts['lam'])
    obj = make_problem(instance).evaluate_bi(x)
    print(f"λ={opts['lam']} 解={''.join('1' if b else '0' for b in x)} (μ, v)=({obj.mu_obj!r}, {obj.var_obj!r})")
    return 1


def _cmd_table(opts) -> str:
    rows = read_results_csv(opts['csv'])
    path = emit_tables(rows, opts['out'], opts['format'])
    print(f"結果表出力: {len(rows)} 行 → {path}")
    return path


def _cmd_success_rate(opts):
    workers = opts.get('workers') or int(os.getenv('CC_MAX_WORKERS', '3'))
    rows = run_success_rate(opts['sizes'], opts['replicates'], opts['budget'], opts['seed'],
                            algorithms=opts['algorithms'], max_workers=workers)
    for row in rows:
        print(f"n={row.n} {ALGORITHM_NAMES[row.alg]}: global {row.global_count}/{row.replicates}, "
              f"local {row.local_count}/{row.replicates}")
    if opts.get('out'):
        exporter = TableExporter(output_dir=os.path.dirname(opts['out']) or '.')
        path = exporter.export_frame(success_rows_to_frame(rows), os.path.basename(opts['out']))
        print(f"出力: {path}")
    return rows


COMMANDS = {
    'gen': _cmd_gen,
    'run': _cmd_run,
    'oracle': _cmd_oracle,
    'table': _cmd_table,
    'success-rate': _cmd_success_rate,
}


def dispatch(cmd: CliCommand) -> int:
    """
    コマンドを実行して終了コードを返す

    DomainError は 1、OSError（FileFormatError を含む）は 2。
    """
    try:
        COMMANDS[cmd.verb](cmd.options)
        return 0
    except DomainError as e:
        print(f"エラー ({cmd.verb}): {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"入出力エラー ({cmd.verb}): {e}", file=sys.stderr)
        return 2


def main(argv: Optional[List[str]] = None) -> int:
    # 環境変数から設定を取得
    load_dotenv()
    setup_logger()

    try:
        cmd = parse_args(sys.argv[1:] if argv is None else argv)
    except UsageError as e:
        print(f"エラー: {e}", file=sys.stderr)
        return 1
    return dispatch(cmd)


if __name__ == "__main__":
    sys.exit(main())
