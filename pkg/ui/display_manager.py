"""
display_manager.py: smooshlab console output formatting.
Colorized headings, status lines, and the run and verify tables printed by the CLI.
"""

import json
import shutil
import sys
from datetime import datetime
from typing import Any, Dict, Iterable, Mapping

from colorama import Fore, Style, init

init(autoreset=True)

RULE_WIDTH = 80
KEY_WIDTH = 18
CRITERION_WIDTH = 20

_LEVELS = {
    'info': (Fore.BLUE, "INFO"),
    'success': (Fore.GREEN, " OK "),
    'warn': (Fore.YELLOW, "WARN"),
    'error': (Fore.RED, "ERR "),
}


# ──────────────────────────────────────────────
# Helpers
# ──────────────────────────────────────────────
def _rule(char: str = "═") -> str:
    return char * min(shutil.get_terminal_size((RULE_WIDTH, 20)).columns, RULE_WIDTH)


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, (dict, list)):
        text = json.dumps(value, default=str)
        return text if len(text) <= 60 else text[:57] + "..."
    return str(value)


def _dim(text: str) -> str:
    return f"{Style.DIM}{text}{Style.RESET_ALL}"


# ──────────────────────────────────────────────
# Headings
# ──────────────────────────────────────────────
def banner(title: str, sub: str = None):
    """Command title between two rules."""
    rule = _rule()
    print(f"\n{Fore.CYAN}{Style.BRIGHT}{rule}")
    print(title.center(len(rule)))
    if sub:
        print(_dim(sub.center(len(rule))))
    print(f"{Fore.CYAN}{rule}{Style.RESET_ALL}")


def section(title: str):
    print(f"\n{Fore.MAGENTA}{Style.BRIGHT}▌ {title}{Style.RESET_ALL}")
    print(_dim(_rule("─")[:len(title) + 4]))


def kv(key: str, value: Any):
    print(f"  {Fore.CYAN}{key:<{KEY_WIDTH}}{Style.RESET_ALL}: {_short(value)}")


# ──────────────────────────────────────────────
# Status lines
# ──────────────────────────────────────────────
def _status(level: str, msg: str):
    color, tag = _LEVELS[level]
    stream = sys.stderr if level == 'error' else sys.stdout
    stamp = datetime.now().strftime("%H:%M:%S")
    print(f"{_dim(stamp)} {color}[{tag}]{Style.RESET_ALL} {msg}", file=stream)


def info(msg: str):
    _status('info', msg)


def success(msg: str):
    _status('success', msg)


def warn(msg: str):
    _status('warn', msg)


def error(msg: str):
    _status('error', msg)


# ──────────────────────────────────────────────
# Run and verify tables
# ──────────────────────────────────────────────
def mapping(title: str, values: Mapping[str, Any]):
    section(title)
    for key, value in values.items():
        kv(key, value)


def artifacts(records: Iterable[Dict[str, Any]]):
    """Artifact table of a run manifest."""
    section("Artifacts")
    for rec in records:
        print(f"  {Fore.YELLOW}>{Style.RESET_ALL} {rec['path']:<26} {rec['rows']:>9} rows  "
              f"{_dim(rec['sha256'][:16])}")


def criteria(rows: Iterable[Dict[str, Any]]):
    """Pass/fail table of the acceptance suite."""
    section("Acceptance criteria")
    for row in rows:
        mark = f"{Fore.GREEN}PASS{Style.RESET_ALL}" if row['passed'] else f"{Fore.RED}FAIL{Style.RESET_ALL}"
        print(f"  {row['criterion']:<{CRITERION_WIDTH}} {mark}  {row['runtime_s']:>8.2f}s  "
              f"{row['replicas']:>9} replicas")
        if not row['passed']:
            print(" " * (CRITERION_WIDTH + 3) + _dim(_short(row['measured'])))
