"""
ADAptation CLI
Subcommands gen, train, select, bench and analyze over one run config.
"""

from .config import PathsConfig, RunConfig, Settings, load_run_config, load_settings
from .main import build_parser, main

__all__ = [
    "PathsConfig",
    "RunConfig",
    "Settings",
    "build_parser",
    "load_run_config",
    "load_settings",
    "main",
]
