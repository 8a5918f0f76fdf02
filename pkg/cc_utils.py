"""
CC Utilities

共通の例外クラス、ロガー設定、スレッドセーフな進捗カウンタを提供します。
"""

import os
import logging
import threading


class DomainError(ValueError):
    """入力が定義域外の場合の例外（CLIでは終了コード1）"""


class ContractViolation(DomainError):
    """呼び出し側の契約違反（ビット長の不一致など）"""


class UsageError(DomainError):
    """コマンドライン引数の誤り"""


class FileFormatError(OSError):
    """入力ファイルの解析エラー（CLIでは終了コード2）"""

    def __init__(self, path, line_no, message):
        """
        Args:
            path: 解析中のファイルパス
            line_no: 1始まりの行番号（不明な場合はNone）
            message: エラー内容
        """
        self.path = str(path)
        self.line_no = line_no
        location = f"{self.path}:{line_no}" if line_no is not None else self.path
        super().__init__(f"{location}: {message}")


def setup_logger(log_dir=None, level=logging.INFO):
    """
    ロガーをセットアップ

    Args:
        log_dir: ログ出力ディレクトリ（Noneの場合は環境変数 CC_LOG_DIR）
        level: ログレベル

    Returns:
        logging.Logger
    """
    log_dir = log_dir or os.getenv('CC_LOG_DIR', './logs')
    os.makedirs(log_dir, exist_ok=True)

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(os.path.join(log_dir, 'app.log')),
            logging.StreamHandler()
        ]
    )
    return logging.getLogger('cc_benchmark')


class ProgressCounter:
    """実験セルの完了数を数えるクラス（マルチスレッド対応）"""

    def __init__(self, total, label='cells', report_every=1):
        """
        Args:
            total: セルの総数
            label: ログに出す名前
            report_every: 何件ごとにログ出力するか
        """
        self.total = total
        self.label = label
        self.report_every = max(1, report_every)
        self.lock = threading.Lock()
        self.completed = 0
        self.logger = logging.getLogger(__name__)

    def tick(self, detail=''):
        """1件完了を記録（スレッドセーフ）"""
        with self.lock:
            self.completed += 1
            done = self.completed

        if done % self.report_every == 0 or done == self.total:
            suffix = f" ({detail})" if detail else ''
            self.logger.info(f"進捗: {done}/{self.total} {self.label} 完了{suffix}")
        return done
