"""
Process-level settings read from the environment (.env honoured)
"""
import os
from dotenv import load_dotenv

load_dotenv()


def get_log_level() -> str:
    """Logging level name"""
    return os.getenv('ETC_LOG_LEVEL', 'INFO').upper()


def get_output_dir() -> str:
    """Default directory for run artifacts"""
    return os.getenv('ETC_OUTPUT_DIR', 'results')


def get_default_scenario() -> str:
    """Scenario file used when --scenario is not given"""
    return os.getenv('ETC_SCENARIO', os.path.join('data', 'benchmark.json'))


def get_compare_workers() -> int:
    """Maximum number of runs executed concurrently by compare"""
    return max(1, int(os.getenv('ETC_COMPARE_WORKERS', '4')))
