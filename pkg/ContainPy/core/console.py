"""
Console Utilities
=================

Terminal rendering for verification runs: status lines, configuration
listings, certification check marks and third-party warning filters.

Authors: ContainPy Development Team
Version: 0.1.0
"""

import os
import sys
import warnings


# =============================================================================
# WARNING SUPPRESSION
# =============================================================================

_QUIET_MODULES = {
    UserWarning: ('zarr', 'numcodecs'),
    DeprecationWarning: ('dask',),
    FutureWarning: ('xarray',),
}


def suppress_warnings():
    """
    Silence library chatter that says nothing about the closed loop.

    Numba performance hints, zarr/numcodecs format notices and dask/xarray
    deprecations are filtered. ``ConditioningWarning`` always gets through.
    """
    try:
        from numba.core import errors as numba_errors
    except ImportError:
        numba_errors = None

    if numba_errors is not None:
        for name in ('NumbaPerformanceWarning', 'NumbaDeprecationWarning',
                     'NumbaPendingDeprecationWarning'):
            category = getattr(numba_errors, name, None)
            if category is not None:
                warnings.filterwarnings('ignore', category=category)

    for category, modules in _QUIET_MODULES.items():
        for module in modules:
            warnings.filterwarnings('ignore', category=category, module=module)
    warnings.filterwarnings('ignore', message='.*Consolidated metadata.*')


suppress_warnings()


# =============================================================================
# TERMINAL COLORS
# =============================================================================

def _color_supported(stream=sys.stdout):
    if os.environ.get('NO_COLOR'):
        return False
    if os.environ.get('TERM_PROGRAM') == 'vscode' or os.environ.get('WT_SESSION'):
        return True
    if 'ANSICON' in os.environ:
        return True
    return hasattr(stream, 'isatty') and stream.isatty() and os.name != 'nt'


_PALETTE = {
    'reset': '0', 'bold': '1', 'dim': '2',
    'red': '91', 'green': '92', 'yellow': '93',
    'blue': '94', 'cyan': '96', 'white': '97',
}

_ENABLED = _color_supported()


def _paint(text, *styles):
    if not _ENABLED or not styles:
        return str(text)
    codes = ';'.join(_PALETTE[s] for s in styles)
    return f"\033[{codes}m{text}\033[0m"


def dim(text):
    """Grey out secondary text such as values and units."""
    return _paint(text, 'dim')


# =============================================================================
# FORMATTED OUTPUT
# =============================================================================

_RULE = 60


def print_section(title, width=40):
    """Print a section title followed by a thin rule."""
    print(f"\n{_paint(title, 'blue')}")
    print(dim('-' * width))


def print_config(label, value):
    """Print one ``label: value`` line, indented under a section."""
    print(f"  {_paint(f'{label}:', 'white')} {dim(value)}")


def print_info(message):
    print(f"{_paint('→', 'cyan')} {message}")


def print_success(message):
    print(f"{_paint('✓', 'green')} {message}")


def print_warning(message):
    print(f"{_paint('⚠', 'yellow')} {_paint(message, 'yellow')}")


def print_error(message):
    print(f"{_paint('✗', 'red')} {_paint(message, 'red')}")


def print_check(label, passed, detail=None):
    """
    Print one line of a certification summary.

    Parameters
    ----------
    label : str
        Check name, e.g. ``containment``.
    passed : bool
        Outcome of the check.
    detail : str, optional
        Measured value shown dimmed after the label.
    """
    mark = _paint('PASS', 'green') if passed else _paint('FAIL', 'red')
    tail = f" {dim(detail)}" if detail else ""
    print(f"  [{mark}] {label}{tail}")


_BANNER = r"""
   ____            _        _       ____
  / ___|___  _ __ | |_ __ _(_)_ __ |  _ \ _   _
 | |   / _ \| '_ \| __/ _` | | '_ \| |_) | | | |
 | |__| (_) | | | | || (_| | | | | |  __/| |_| |
  \____\___/|_| |_|\__\__,_|_|_| |_|_|    \__, |
                                          |___/
"""


def print_banner(title=None):
    """Print the ContainPy logo with the version and a subtitle."""
    subtitle = title or 'Containment Control of Multi-Agent Systems'
    print()
    for row in filter(str.strip, _BANNER.splitlines()):
        print(_paint(row, 'cyan'))
    print(f"\n           {dim('v0.1.0')}  {dim('|')}  {dim(subtitle)}\n")


def print_complete(message=None, elapsed_seconds=None):
    """Close a verb's output with a rule, a message and the wall time."""
    rule = _paint('=' * _RULE, 'green')
    print(f"\n{rule}")
    print(f"  {_paint(message or 'Run Complete!', 'bold', 'green')}")
    print(rule)
    if elapsed_seconds is not None:
        print(f"\n  {_paint('Total time:', 'white')} {_paint(f'{elapsed_seconds:.1f}s', 'green')}")
    print()
