"""
CC Harness

インスタンス生成（インスタンスI、支配集合の3設定、ランダムインスタンス）、
グラフファイル・インスタンスファイルの入出力、実験の実行と集計、結果表の出力を行います。
"""

import configparser
import json
import logging
import math
import os
import re
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from cc_algorithms import (
    ALGORITHM_RUNNERS, RunConfig, decode_alpha, decode_alpha_grid, derive_seed, make_rng,
    run_gsemo, run_convex_gsemo, run_one_one_ea,
)
from cc_core import Confidence, StochItem, g_value
from cc_oracles import mann_whitney_u
from cc_problems import GraphInstance, UniformInstance, UniformProblem, make_problem
from cc_utils import DomainError, FileFormatError, ProgressCounter
from src.algorithms.algorithm_names import ALGORITHM_NAMES, P_VALUE_PAIRS
from src.table_export.exporter import CSV_COLUMNS, TableExporter

logger = logging.getLogger(__name__)

FULL_BETAS = (0.2, 0.1, 1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 1e-14, 1e-16)
FULL_BUDGET = 10_000_000
FULL_REPLICATES = 30
DEFAULT_BETAS = (0.2, 0.1, 1e-2)

DEFAULT_MU_POP = 20
DOMSET_SETTINGS = ('uniform_random', 'degree_based', 'neg_correlated')
GRAPH_FORMATS = ('edge_list', 'matrix_market')
PROBLEMS = ('uniform', 'mst', 'domset', 'instance_i')
TABLE_FORMATS = ('csv', 'markdown')

# 乱数ストリームの分岐キー
_INSTANCE_STREAM = 1
_GRAPH_STREAM = 2
_RUN_STREAM = 3
_SUCCESS_STREAM = 4

_ALGORITHM_ORDER = tuple(ALGORITHM_NAMES.keys())


# ==================== インスタンスI ====================

@dataclass(frozen=True)
class InstanceITargets:
    """インスタンスIの大域最適値と局所最適値"""
    n: int
    k: int
    delta: float
    global_value: float
    global_b_count: int
    local_value: float


def instance_i_k(n: int) -> int:
    """k = round(0.51·n)（四捨五入）"""
    return (51 * n + 50) // 100


def _instance_i_value(n: int, k: int, delta: float, b_count: int) -> float:
    """type-a を k-b 個、type-b を b 個選んだときの g（K_α = 1）"""
    mu = (k - b_count) * (n * n + delta) + b_count * n * n
    return mu + math.sqrt((k - b_count) + 2 * b_count)


def gen_instance_I(n: int) -> Tuple[UniformInstance, Confidence]:
    """
    インスタンスIを生成

    type-a (n²+δ, 1) と type-b (n², 2) を a,b,a,b,… の順に n/2 個ずつ並べる。
    δ = 1/(2·√(1.48k))、K_α = 1。

    Args:
        n: アイテム数（偶数、4以上）

    Returns:
        (インスタンス, 信頼水準)
    """
    if n < 4 or n % 2 != 0:
        raise DomainError(f"instance I needs an even n >= 4: {n}")

    k = instance_i_k(n)
    delta = 1.0 / (2.0 * math.sqrt(k * 1.48))
    items = []
    for i in range(n):
        if i % 2 == 0:
            items.append(StochItem(n * n + delta, 1.0))
        else:
            items.append(StochItem(float(n * n), 2.0))
    return UniformInstance(items, k, label=f"instance-I-n{n}"), Confidence.from_k_alpha(1.0)


def instance_i_targets(n: int) -> InstanceITargets:
    """
    大域最適値（type-b の個数を全探索）と局所最適値（type-b を n/2 個全て含む）
    """
    if n < 4 or n % 2 != 0:
        raise DomainError(f"instance I needs an even n >= 4: {n}")
    k = instance_i_k(n)
    delta = 1.0 / (2.0 * math.sqrt(k * 1.48))
    half = n // 2

    candidates = range(max(0, k - half), min(k, half) + 1)
    best_b = min(candidates, key=lambda b: (_instance_i_value(n, k, delta, b), b))
    return InstanceITargets(
        n=n, k=k, delta=delta,
        global_value=_instance_i_value(n, k, delta, best_b),
        global_b_count=best_b,
        local_value=_instance_i_value(n, k, delta, half),
    )


def classify_instance_i_run(x: np.ndarray, fitness: float, targets: InstanceITargets,
                            rel_tol: float = 1e-6) -> str:
    """
    実行結果を 'global' / 'local' / 'other' に分類

    global: type-b が n/2 未満かつ最適値に一致、local: k 個で type-b を n/2 個全て含む。
    """
    half = targets.n // 2
    b_count = int(np.count_nonzero(x[1::2]))
    if b_count < half and abs(fitness - targets.global_value) <= rel_tol * targets.global_value:
        return 'global'
    if int(np.count_nonzero(x)) == targets.k and b_count == half:
        return 'local'
    return 'other'


# ==================== ランダムインスタンス ====================

def gen_uniform_random(n: int, k: int, max_weight: int = 50, seed: int = 0) -> UniformInstance:
    """μ, σ² を {1, …, max_weight} から一様に選んだ基数制約インスタンス"""
    if max_weight < 1:
        raise DomainError(f"max_weight must be >= 1: {max_weight}")
    rng = make_rng(seed)
    mu = rng.integers(1, max_weight + 1, size=n)
    var = rng.integers(1, max_weight + 1, size=n)
    items = [StochItem(float(m), float(v)) for m, v in zip(mu, var)]
    return UniformInstance(items, k, label=f"uniform-n{n}-k{k}-s{seed}")


def gen_random_connected_graph(n_vertices: int, n_edges: int, max_weight: int = 50,
                               seed: int = 0) -> GraphInstance:
    """
    ランダムな連結グラフ（辺重みは整数）

    ランダム全域木に辺を追加して n_edges 本にする。
    """
    max_edges = n_vertices * (n_vertices - 1) // 2
    if n_vertices < 2:
        raise DomainError(f"graph needs at least 2 vertices: {n_vertices}")
    if not (n_vertices - 1 <= n_edges <= max_edges):
        raise DomainError(f"n_edges must lie in [{n_vertices - 1}, {max_edges}]: {n_edges}")

    rng = make_rng(seed)
    order = rng.permutation(n_vertices)
    edges = []
    seen = set()
    for i in range(1, n_vertices):
        u, v = int(order[i]), int(order[rng.integers(i)])
        edge = (min(u, v), max(u, v))
        seen.add(edge)
        edges.append(edge)
    while len(edges) < n_edges:
        u, v = (int(t) for t in rng.integers(n_vertices, size=2))
        edge = (min(u, v), max(u, v))
        if u != v and edge not in seen:
            seen.add(edge)
            edges.append(edge)

    graph = GraphInstance(n_vertices, edges, require_connected=True,
                          label=f"mst-n{n_vertices}-m{n_edges}-s{seed}")
    return assign_edge_weights(graph, max_weight, derive_seed(seed, _INSTANCE_STREAM))


def gen_random_graph(n_vertices: int, edge_prob: float, seed: int = 0) -> GraphInstance:
    """G(n, p) ランダムグラフ（重みなし）"""
    if not (0.0 <= edge_prob <= 1.0):
        raise DomainError(f"edge_prob must lie in [0, 1]: {edge_prob}")
    rng = make_rng(seed)
    rows, cols = np.triu_indices(n_vertices, k=1)
    mask = rng.random(len(rows)) < edge_prob
    edges = list(zip(rows[mask].tolist(), cols[mask].tolist()))
    return GraphInstance(n_vertices, edges, require_connected=False,
                         label=f"gnp-n{n_vertices}-p{edge_prob}-s{seed}")


def assign_edge_weights(graph: GraphInstance, max_weight: int = 50, seed: int = 0) -> GraphInstance:
    """辺に {1, …, max_weight} の整数 (μ, σ²) を割り当てる"""
    rng = make_rng(seed)
    weights = rng.integers(1, max_weight + 1, size=(graph.m, 2))
    items = [StochItem(float(m), float(v)) for m, v in weights]
    return graph.with_edge_items(items)


def gen_domset_setting(graph: GraphInstance, setting: str, seed: int = 0) -> GraphInstance:
    """
    支配集合の頂点重みを設定に従って生成

    uniform_random: μ ∈ {n,…,2n}, v ∈ {n²,…,2n²}
    degree_based: μ = (n + deg)⁵ / n⁴, v ∈ {n²,…,2n²}
    neg_correlated: μ ∈ {0,…,n²}, v = (n² - μ)·n²
    """
    if setting not in DOMSET_SETTINGS:
        raise DomainError(f"unknown dominating-set setting: {setting}")

    n = graph.n_vertices
    rng = make_rng(seed)
    if setting == 'uniform_random':
        mu = rng.integers(n, 2 * n + 1, size=n).astype(np.float64)
        var = rng.integers(n * n, 2 * n * n + 1, size=n).astype(np.float64)
    elif setting == 'degree_based':
        mu = (n + graph.degrees.astype(np.float64)) ** 5 / float(n) ** 4
        var = rng.integers(n * n, 2 * n * n + 1, size=n).astype(np.float64)
    else:
        drawn = rng.integers(0, n * n + 1, size=n)
        mu = drawn.astype(np.float64)
        var = ((n * n - drawn) * n * n).astype(np.float64)

    items = [StochItem(float(m), float(v), lower_bound=0.0) for m, v in zip(mu, var)]
    return graph.with_node_items(items, label=f"{graph.label}-{setting}")


# ==================== グラフファイル ====================

@dataclass
class LoadReport:
    duplicates: int = 0
    self_loops: int = 0
    header: Optional[Tuple[int, int]] = None


def _data_lines(lines: Sequence[str], comment_chars: str) -> List[Tuple[int, List[str]]]:
    data = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in comment_chars:
            continue
        data.append((line_no, stripped.split()))
    return data


def _parse_pair(path, line_no: int, tokens: List[str]) -> Tuple[int, int]:
    if len(tokens) < 2:
        raise FileFormatError(path, line_no, f"expected two vertex indices, got {' '.join(tokens)!r}")
    try:
        return int(tokens[0]), int(tokens[1])
    except ValueError:
        raise FileFormatError(path, line_no, f"non-integer vertex index in {' '.join(tokens)!r}")


def _build_graph(path, n_vertices: int, pairs: List[Tuple[int, Tuple[int, int]]],
                 report: LoadReport) -> GraphInstance:
    edges = []
    seen = set()
    for line_no, (u, v) in pairs:
        if u < 1 or v < 1 or u > n_vertices or v > n_vertices:
            raise FileFormatError(path, line_no, f"vertex index out of range 1..{n_vertices}: ({u}, {v})")
        if u == v:
            report.self_loops += 1
            continue
        edge = (min(u, v) - 1, max(u, v) - 1)
        if edge in seen:
            report.duplicates += 1
            continue
        seen.add(edge)
        edges.append(edge)

    if not edges:
        raise DomainError(f"graph file has no edges: {path}")
    if report.duplicates or report.self_loops:
        logger.warning(f"{path}: 重複辺 {report.duplicates} 本、自己ループ {report.self_loops} 本を除去しました")

    graph = GraphInstance(n_vertices, edges, require_connected=False, label=Path(path).stem)
    graph.load_report = report
    return graph


def _parse_edge_list(path, lines: Sequence[str], header: bool) -> GraphInstance:
    data = _data_lines(lines, '#%')
    if not data:
        raise DomainError(f"graph file is empty: {path}")

    report = LoadReport()
    if header:
        head_line, head_tokens = data[0]
        if len(head_tokens) != 2:
            raise FileFormatError(path, head_line, "expected 'n m' header line")
        report.header = _parse_pair(path, head_line, head_tokens)
        data = data[1:]
        if not data:
            raise DomainError(f"graph file has no edges: {path}")

    pairs = [(line_no, _parse_pair(path, line_no, tokens)) for line_no, tokens in data]
    if report.header is None:
        n_vertices = max(max(u, v) for _, (u, v) in pairs)
    else:
        n_vertices, m_head = report.header
        if m_head != len(pairs):
            logger.warning(f"{path}: 辺の行数 {len(pairs)} がヘッダの {m_head} と一致しません")
    return _build_graph(path, n_vertices, pairs, report)


def _parse_matrix_market(path, lines: Sequence[str]) -> GraphInstance:
    if not lines or not lines[0].lower().startswith('%%matrixmarket'):
        raise FileFormatError(path, 1, "missing %%MatrixMarket banner")
    banner = lines[0].lower().split()
    if len(banner) < 4 or banner[1] != 'matrix' or banner[2] != 'coordinate':
        raise FileFormatError(path, 1, "only 'matrix coordinate' files are supported")

    data = _data_lines(lines[1:], '%')
    # _data_lines は lines[1:] に対して1始まりで番号を振るので1行ずらす
    data = [(line_no + 1, tokens) for line_no, tokens in data]
    if not data:
        raise DomainError(f"graph file is empty: {path}")

    size_line, size_tokens = data[0]
    if len(size_tokens) != 3:
        raise FileFormatError(path, size_line, "expected 'rows cols entries' size line")
    try:
        n_rows, n_cols, n_entries = (int(t) for t in size_tokens)
    except ValueError:
        raise FileFormatError(path, size_line, "non-integer size line")

    pairs = [(line_no, _parse_pair(path, line_no, tokens)) for line_no, tokens in data[1:]]
    if len(pairs) != n_entries:
        logger.warning(f"{path}: エントリ数 {len(pairs)} がヘッダの {n_entries} と一致しません")

    report = LoadReport(header=(max(n_rows, n_cols), n_entries))
    return _build_graph(path, max(n_rows, n_cols), pairs, report)


def load_graph(path, fmt: str = 'edge_list', header: bool = False) -> GraphInstance:
    """
    グラフファイルを読み込んで重みなしの単純無向グラフを返す

    Args:
        path: ファイルパス
        fmt: 'edge_list' または 'matrix_market'
        header: edge_list の最初のデータ行を "n m" ヘッダとして読むか
            （False なら全行を辺として読む）

    Returns:
        GraphInstance（頂点番号は0始まりに変換）
    """
    if fmt not in GRAPH_FORMATS:
        raise DomainError(f"unknown graph format: {fmt}")
    with open(path, 'r', encoding='utf-8') as f:
        lines = f.readlines()
    if fmt == 'matrix_market':
        return _parse_matrix_market(path, lines)
    return _parse_edge_list(path, lines, header)


# ==================== インスタンスファイル ====================

@dataclass
class InstanceDocument:
    instance: object
    alpha: Optional[float] = None


def instance_to_dict(instance, alpha: Optional[float] = None) -> dict:
    if isinstance(instance, UniformInstance):
        data = {"type": "uniform", "label": instance.label, "k": instance.k,
                "items": [[it.mu, it.var] for it in instance.items]}
    elif isinstance(instance, GraphInstance) and instance.kind == 'mst':
        data = {"type": "mst", "label": instance.label, "n_vertices": instance.n_vertices,
                "edges": [[u, v, it.mu, it.var] for (u, v), it in zip(instance.edges, instance.edge_items)]}
    elif isinstance(instance, GraphInstance) and instance.kind == 'domset':
        data = {"type": "domset", "label": instance.label, "n_vertices": instance.n_vertices,
                "edges": [[u, v] for u, v in instance.edges],
                "nodes": [[it.mu, it.var] for it in instance.node_items]}
    else:
        raise DomainError("only weighted instances can be saved")
    if alpha is not None:
        data["alpha"] = alpha
    return data


def save_instance(path, instance, alpha: Optional[float] = None) -> str:
    """インスタンスを JSON で保存"""
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(instance_to_dict(instance, alpha), f, ensure_ascii=False, indent=2)
    return str(path)


def load_instance_document(path) -> InstanceDocument:
    """JSON インスタンスファイルを読み込む"""
    with open(path, 'r', encoding='utf-8') as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise FileFormatError(path, e.lineno, e.msg) from e

    if not isinstance(data, dict) or data.get('type') not in ('uniform', 'mst', 'domset'):
        raise FileFormatError(path, None, "field 'type' must be one of uniform, mst, domset")

    kind = data['type']
    label = data.get('label')
    try:
        if kind == 'uniform':
            items = [StochItem(float(mu), float(var)) for mu, var in data['items']]
            instance = UniformInstance(items, int(data['k']), label=label)
        elif kind == 'mst':
            edges = [(int(e[0]), int(e[1])) for e in data['edges']]
            items = [StochItem(float(e[2]), float(e[3])) for e in data['edges']]
            instance = GraphInstance(int(data['n_vertices']), edges, edge_items=items, label=label)
        else:
            edges = [(int(e[0]), int(e[1])) for e in data['edges']]
            nodes = [StochItem(float(mu), float(var), lower_bound=0.0) for mu, var in data['nodes']]
            instance = GraphInstance(int(data['n_vertices']), edges, node_items=nodes, label=label)
    except (KeyError, TypeError, IndexError, ValueError) as e:
        if isinstance(e, DomainError):
            raise
        raise FileFormatError(path, None, f"missing or malformed field: {e}") from e

    alpha = data.get('alpha')
    return InstanceDocument(instance=instance, alpha=float(alpha) if alpha is not None else None)


def load_instance(path):
    return load_instance_document(path).instance


# ==================== 実験設定 ====================

@dataclass(frozen=True)
class ExperimentConfig:
    """実験マトリクスの設定"""
    label: str
    problem: str
    algorithms: Tuple[str, ...]
    budget: int
    replicates: int
    seed: int
    betas: Tuple[float, ...]
    output: str
    formats: Tuple[str, ...] = ('csv',)
    instance_path: Optional[str] = None
    graph_path: Optional[str] = None
    graph_format: str = 'edge_list'
    graph_header: bool = False
    n: Optional[int] = None
    k: Optional[int] = None
    n_edges: Optional[int] = None
    edge_prob: float = 0.05
    max_weight: int = 50
    setting: str = 'uniform_random'
    p_ub: Optional[int] = None
    mu_pop: Optional[int] = None
    fixed_weights: bool = False
    max_workers: int = 3

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise DomainError(f"unknown problem: {self.problem}")
        unknown = [a for a in self.algorithms if a not in ALGORITHM_RUNNERS]
        if not self.algorithms or unknown:
            raise DomainError(f"unknown or empty algorithm list: {unknown or self.algorithms}")
        if self.replicates < 1:
            raise DomainError(f"replicates must be >= 1: {self.replicates}")
        if self.budget < 1:
            raise DomainError(f"budget must be >= 1: {self.budget}")
        if not self.betas or any(not (0.0 < b <= 0.5) for b in self.betas):
            raise DomainError(f"betas must lie in (0, 0.5]: {self.betas}")
        if any(f not in TABLE_FORMATS for f in self.formats):
            raise DomainError(f"unknown table format in {self.formats}")
        if self.setting not in DOMSET_SETTINGS:
            raise DomainError(f"unknown dominating-set setting: {self.setting}")
        if self.graph_format not in GRAPH_FORMATS:
            raise DomainError(f"unknown graph format: {self.graph_format}")
        if self.instance_path is None and self.graph_path is None and self.n is None:
            raise DomainError("config needs an instance file, a graph file or n for a generator")
        if self.problem == 'uniform' and self.instance_path is None and self.k is None:
            raise DomainError("generated uniform instances need k")


def parse_float_list(text: str) -> Tuple[float, ...]:
    """'0.2, 0.1, 1e-2' → (0.2, 0.1, 0.01)"""
    return tuple(float(t) for t in re.split(r'[,\s]+', text.strip()) if t)


def parse_name_list(text: str) -> Tuple[str, ...]:
    return tuple(t for t in re.split(r'[,\s]+', text.strip()) if t)


def load_experiment_config(path) -> ExperimentConfig:
    """
    INI 形式の実験設定を読み込む

    [experiment] に実験マトリクス、[convex_gsemo] に p_ub、[convex_mu] に mu_pop。
    """
    parser = configparser.ConfigParser()
    with open(path, 'r', encoding='utf-8') as f:
        try:
            parser.read_file(f)
        except configparser.ParsingError as e:
            line_no = e.errors[0][0] if e.errors else getattr(e, 'lineno', None)
            raise FileFormatError(path, line_no, "malformed config line") from e
        except configparser.Error as e:
            raise FileFormatError(path, getattr(e, 'lineno', None), e.message) from e

    if not parser.has_section('experiment'):
        raise FileFormatError(path, None, "missing [experiment] section")
    section = parser['experiment']

    def optional_int(sec, key):
        return sec.getint(key) if sec is not None and key in sec else None

    try:
        return ExperimentConfig(
            label=section.get('label', Path(path).stem),
            problem=section.get('problem', 'domset'),
            algorithms=parse_name_list(section.get('algorithms', 'oneplusone, gsemo, convex_gsemo')),
            budget=section.getint('budget', int(os.getenv('CC_DEFAULT_BUDGET', '100000'))),
            replicates=section.getint('replicates', 30),
            seed=section.getint('seed', 0),
            betas=parse_float_list(section.get('betas', ', '.join(str(b) for b in DEFAULT_BETAS))),
            output=section.get('output', os.path.join(os.getenv('CC_RESULTS_DIR', './data/results'),
                                                      f"{Path(path).stem}.csv")),
            formats=parse_name_list(section.get('formats', 'csv')),
            instance_path=section.get('instance'),
            graph_path=section.get('graph'),
            graph_format=section.get('graph_format', 'edge_list'),
            graph_header=section.getboolean('graph_header', False),
            n=optional_int(section, 'n'),
            k=optional_int(section, 'k'),
            n_edges=optional_int(section, 'n_edges'),
            edge_prob=section.getfloat('edge_prob', 0.05),
            max_weight=section.getint('max_weight', 50),
            setting=section.get('setting', 'uniform_random'),
            p_ub=optional_int(parser['convex_gsemo'] if parser.has_section('convex_gsemo') else None, 'p_ub'),
            mu_pop=optional_int(parser['convex_mu'] if parser.has_section('convex_mu') else None, 'mu_pop'),
            fixed_weights=section.getboolean('fixed_weights', False),
            max_workers=section.getint('max_workers', int(os.getenv('CC_MAX_WORKERS', '3'))),
        )
    except ValueError as e:
        if isinstance(e, DomainError):
            raise
        raise FileFormatError(path, None, f"invalid value: {e}") from e


def full_protocol(cfg: ExperimentConfig) -> ExperimentConfig:
    """予算 10⁷、30 レプリケート、10 個の β に置き換える"""
    return replace(cfg, budget=FULL_BUDGET, replicates=FULL_REPLICATES, betas=FULL_BETAS)


# ==================== 実験の実行 ====================

@dataclass
class AlgorithmStats:
    mean: float
    std: float
    max_pop_mean: float
    max_pop_std: float
    infeasible: int = field(default=0, compare=False)


@dataclass
class ResultRow:
    """(インスタンス, β) ごとの集計結果"""
    instance: str
    beta: float
    stats: Dict[str, AlgorithmStats]
    p1: float = math.nan
    p2: float = math.nan
    p3: float = math.nan


@dataclass
class CellResult:
    alg: str
    replicate: int
    values: Dict[float, float]
    max_pop: int
    evaluations: int


def _skeleton(cfg: ExperimentConfig) -> Optional[GraphInstance]:
    """全レプリケートで共有するグラフ（ファイルまたはランダム生成）"""
    if cfg.instance_path is not None or cfg.problem not in ('mst', 'domset'):
        return None
    if cfg.graph_path is not None:
        return load_graph(cfg.graph_path, cfg.graph_format, cfg.graph_header)
    if cfg.problem == 'domset':
        return gen_random_graph(cfg.n, cfg.edge_prob, derive_seed(cfg.seed, _GRAPH_STREAM))
    return None


def build_instance(cfg: ExperimentConfig, replicate: int, skeleton: Optional[GraphInstance] = None):
    """
    レプリケート用のインスタンスを作る

    fixed_weights なら全レプリケートでレプリケート0の重みを使う。
    """
    if cfg.instance_path is not None:
        return load_instance(cfg.instance_path)
    if cfg.problem == 'instance_i':
        return gen_instance_I(cfg.n)[0]

    weight_seed = derive_seed(cfg.seed, _INSTANCE_STREAM, 0 if cfg.fixed_weights else replicate)
    if cfg.problem == 'uniform':
        return gen_uniform_random(cfg.n, cfg.k, cfg.max_weight, weight_seed)
    if cfg.problem == 'mst':
        if skeleton is not None:
            # 非連結なら GraphInstance が DomainError を送出する
            return assign_edge_weights(skeleton, cfg.max_weight, weight_seed)
        return gen_random_connected_graph(cfg.n, cfg.n_edges or 2 * cfg.n, cfg.max_weight, weight_seed)
    return gen_domset_setting(skeleton, cfg.setting, weight_seed)


def _run_cell(cfg: ExperimentConfig, instance, alg: str, replicate: int, beta_index: int) -> CellResult:
    problem = make_problem(instance)
    run_seed = derive_seed(cfg.seed, _RUN_STREAM, replicate, _ALGORITHM_ORDER.index(alg), beta_index)

    if alg == 'oneplusone':
        beta = cfg.betas[beta_index]
        result = run_one_one_ea(problem.single_objective(Confidence.from_beta(beta)),
                                RunConfig(cfg.budget, run_seed))
        value = result.best_fitness if result.best_feasible else math.nan
        return CellResult(alg, replicate, {beta: value}, result.max_pop, result.evaluations_used)

    run_cfg = RunConfig(cfg.budget, run_seed,
                        p_ub=cfg.p_ub or problem.n_bits ** 2,
                        mu_pop=cfg.mu_pop or DEFAULT_MU_POP)
    result = ALGORITHM_RUNNERS[alg](problem.bi_objective(), run_cfg)
    decoded = decode_alpha_grid(result.archive, cfg.betas)
    values = {beta: (d[1] if d is not None else math.nan) for beta, d in decoded.items()}
    return CellResult(alg, replicate, values, result.max_pop, result.evaluations_used)


def run_experiment(cfg: ExperimentConfig) -> List[ResultRow]:
    """
    実験マトリクスを実行して (インスタンス, β) ごとに集計

    多目的アルゴリズムはレプリケートごとに1回実行して全 β で取り出し、
    (1+1) EA は β ごとに実行する。結果はレプリケート順に集計する。
    """
    skeleton = _skeleton(cfg)
    instances = [build_instance(cfg, r, skeleton) for r in range(cfg.replicates)]

    tasks = []
    for r in range(cfg.replicates):
        for alg in cfg.algorithms:
            if alg == 'oneplusone':
                tasks += [(alg, r, b) for b in range(len(cfg.betas))]
            else:
                tasks.append((alg, r, 0))

    logger.info(f"実験開始: {cfg.label} ({len(tasks)} runs, budget={cfg.budget}, workers={cfg.max_workers})")
    counter = ProgressCounter(len(tasks), label='runs', report_every=max(1, len(tasks) // 20))
    results: Dict[Tuple[str, int, int], CellResult] = {}

    with ThreadPoolExecutor(max_workers=cfg.max_workers) as executor:
        futures = {
            executor.submit(_run_cell, cfg, instances[r], alg, r, b): (alg, r, b)
            for alg, r, b in tasks
        }
        for future in as_completed(futures):
            alg, r, b = futures[future]
            try:
                results[(alg, r, b)] = future.result()
            except Exception as e:
                beta = cfg.betas[b] if alg == 'oneplusone' else 'all'
                logger.error(f"実行失敗: alg={alg}, replicate={r}, beta={beta}: {e}")
                for pending in futures:
                    pending.cancel()
                if isinstance(e, DomainError):
                    raise DomainError(f"run failed (alg={alg}, replicate={r}, beta={beta}): {e}") from e
                raise
            counter.tick(f"{alg} replicate={r}")

    return aggregate_results(cfg, results)


def aggregate_results(cfg: ExperimentConfig, results: Dict[Tuple[str, int, int], CellResult]) -> List[ResultRow]:
    """平均・標準偏差（ddof=0）・p 値・最大個体群サイズを集計"""
    rows = []
    for beta_index, beta in enumerate(cfg.betas):
        stats = {}
        samples = {}
        for alg in cfg.algorithms:
            cells = [results[(alg, r, beta_index if alg == 'oneplusone' else 0)]
                     for r in range(cfg.replicates)]
            values = np.array([c.values[beta] for c in cells], dtype=np.float64)
            pops = np.array([c.max_pop for c in cells], dtype=np.float64)
            feasible = values[~np.isnan(values)]
            if len(feasible) < len(values):
                logger.warning(f"{alg} beta={beta}: {len(values) - len(feasible)} 件の実行で実行可能解なし")

            stats[alg] = AlgorithmStats(
                mean=float(feasible.mean()) if len(feasible) else math.nan,
                std=float(feasible.std(ddof=0)) if len(feasible) else math.nan,
                max_pop_mean=float(pops.mean()),
                max_pop_std=float(pops.std(ddof=0)),
                infeasible=int(len(values) - len(feasible)),
            )
            samples[alg] = feasible

        p_values = {}
        for name, first, second in P_VALUE_PAIRS:
            a, b = samples.get(first), samples.get(second)
            if a is not None and b is not None and len(a) and len(b):
                p_values[name] = mann_whitney_u(a, b)
            else:
                p_values[name] = math.nan
        rows.append(ResultRow(cfg.label, beta, stats, **p_values))
    return rows


# ==================== 結果表 ====================

def emit_tables(rows: Sequence[ResultRow], path, fmt: str = 'csv') -> str:
    """
    結果を CSV または Markdown で出力

    Returns:
        出力ファイルパス
    """
    if not rows:
        raise DomainError("no result rows to emit")
    if fmt not in TABLE_FORMATS:
        raise DomainError(f"unknown table format: {fmt}")
    exporter = TableExporter(output_dir=os.path.dirname(str(path)) or '.')
    filename = os.path.basename(str(path))
    if fmt == 'csv':
        return exporter.export_csv(rows, filename)
    return exporter.export_markdown(rows, filename)


def read_results_csv(path) -> List[ResultRow]:
    """emit_tables の CSV を ResultRow に戻す"""
    try:
        frame = pd.read_csv(path, float_precision='round_trip')
    except pd.errors.EmptyDataError as e:
        raise FileFormatError(path, 1, "empty CSV") from e
    except pd.errors.ParserError as e:
        match = re.search(r'line (\d+)', str(e))
        raise FileFormatError(path, int(match.group(1)) if match else None, "malformed CSV row") from e

    missing = [c for c in CSV_COLUMNS if c not in frame.columns]
    if missing:
        raise FileFormatError(path, 1, f"missing columns: {', '.join(missing)}")

    for column in CSV_COLUMNS[3:] + ["beta"]:
        converted = pd.to_numeric(frame[column], errors='coerce')
        bad = converted.isna() & frame[column].notna()
        if bad.any():
            raise FileFormatError(path, int(bad.idxmax()) + 2, f"non-numeric value in column {column}")
        frame[column] = converted.astype(np.float64)

    rows: List[ResultRow] = []
    index: Dict[Tuple[str, float], ResultRow] = {}
    for rec in frame.itertuples(index=False):
        key = (str(rec.instance), float(rec.beta))
        if key not in index:
            index[key] = ResultRow(key[0], key[1], {}, float(rec.p1), float(rec.p2), float(rec.p3))
            rows.append(index[key])
        index[key].stats[str(rec.alg)] = AlgorithmStats(
            float(rec.mean), float(rec.std), float(rec.max_pop_mean), float(rec.max_pop_std))
    return rows


# ==================== 成功率（インスタンスI） ====================

@dataclass
class SuccessRow:
    n: int
    alg: str
    replicates: int
    global_count: int
    local_count: int
    other_count: int
    mean_evaluations: float


def _success_cell(n: int, alg: str, replicate: int, budget: int, seed: int) -> Tuple[str, int]:
    instance, conf = gen_instance_I(n)
    targets = instance_i_targets(n)
    problem = UniformProblem(instance)
    run_seed = derive_seed(seed, _SUCCESS_STREAM, n, _ALGORITHM_ORDER.index(alg), replicate)

    if alg == 'oneplusone':
        def reached(evaluations, state):
            x, fx = state
            return classify_instance_i_run(x, fx, targets) != 'other'

        result = run_one_one_ea(problem.single_objective(conf), RunConfig(budget, run_seed), stop=reached)
        return classify_instance_i_run(result.best_solution, result.best_fitness, targets), result.evaluations_used

    def found_global(evaluations, archive):
        newest = archive.members[-1]
        if not problem.is_feasible(newest.bits):
            return False
        value = g_value(newest.obj.mu_obj, newest.obj.var_obj, conf)
        return classify_instance_i_run(newest.bits, value, targets) == 'global'

    runner = run_gsemo if alg == 'gsemo' else run_convex_gsemo
    result = runner(problem.bi_objective(), RunConfig(budget, run_seed, p_ub=n * n), stop=found_global)
    decoded = decode_alpha(result.archive, conf)
    if decoded is None:
        return 'other', result.evaluations_used
    return classify_instance_i_run(decoded[0], decoded[1], targets), result.evaluations_used


def run_success_rate(sizes: Sequence[int], replicates: int, budget: int, seed: int = 0,
                     algorithms: Sequence[str] = ('oneplusone', 'gsemo'),
                     max_workers: int = 3) -> List[SuccessRow]:
    """
    インスタンスIで大域最適・局所最適に到達した回数を数える

    大域最適（(1+1) EA は局所最適も）に到達した時点で打ち切る。
    """
    unsupported = [a for a in algorithms if a not in ('oneplusone', 'gsemo', 'convex_gsemo')]
    if unsupported:
        raise DomainError(f"success-rate supports oneplusone, gsemo, convex_gsemo: {unsupported}")
    if replicates < 1:
        raise DomainError(f"replicates must be >= 1: {replicates}")
    for n in sizes:
        instance_i_targets(n)

    tasks = [(n, alg, r) for n in sizes for alg in algorithms for r in range(replicates)]
    counter = ProgressCounter(len(tasks), label='runs', report_every=max(1, len(tasks) // 20))
    outcomes: Dict[Tuple[int, str, int], Tuple[str, int]] = {}
    with ThreadPoolExecutor(max_workers=max_workers) as executor:
        futures = {executor.submit(_success_cell, n, alg, r, budget, seed): (n, alg, r) for n, alg, r in tasks}
        for future in as_completed(futures):
            n, alg, r = futures[future]
            try:
                outcomes[(n, alg, r)] = future.result()
            except Exception as e:
                logger.error(f"実行失敗: n={n}, alg={alg}, replicate={r}: {e}")
                for pending in futures:
                    pending.cancel()
                if isinstance(e, DomainError):
                    raise DomainError(f"run failed (n={n}, alg={alg}, replicate={r}): {e}") from e
                raise
            counter.tick(f"n={n} {alg} replicate={r}")

    rows = []
    for n in sizes:
        for alg in algorithms:
            cells = [outcomes[(n, alg, r)] for r in range(replicates)]
            labels = [label for label, _ in cells]
            rows.append(SuccessRow(
                n=n, alg=alg, replicates=replicates,
                global_count=labels.count('global'),
                local_count=labels.count('local'),
                other_count=labels.count('other'),
                mean_evaluations=float(np.mean([evals for _, evals in cells])),
            ))
            logger.info(f"n={n} {alg}: global {rows[-1].global_count}/{replicates}, local {rows[-1].local_count}")
    return rows


def success_trend_violations(rows: Sequence[SuccessRow], alg: str = 'oneplusone') -> List[Tuple[int, int]]:
    """n を増やしたときに大域最適の到達回数が増えた (n, 次の n) の組"""
    counts = sorted((row.n, row.global_count) for row in rows if row.alg == alg)
    return [(n_a, n_b) for (n_a, c_a), (n_b, c_b) in zip(counts, counts[1:]) if c_b > c_a]


def success_rows_to_frame(rows: Sequence[SuccessRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(row) for row in rows])
