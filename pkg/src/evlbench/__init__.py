"""Extreme-verification-latency stream classifiers and a benchmark harness."""

from .harness import AlgorithmConfig, RankTable, RunResult, average_rank, run_stream, sensitivity_sweep
from .streams import DriftStream, StreamSpec, generate_stream, load_csv_stream

__all__ = [
    "AlgorithmConfig",
    "DriftStream",
    "RankTable",
    "RunResult",
    "StreamSpec",
    "average_rank",
    "generate_stream",
    "load_csv_stream",
    "run_stream",
    "sensitivity_sweep",
]
__version__ = "0.1.0"
