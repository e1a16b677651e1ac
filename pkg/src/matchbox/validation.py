"""Input checks shared by the estimator and the command line."""
import numpy as np
from sklearn.exceptions import NotFittedError

from .errors import MatchboxError
from .io import load_spec
from .systems import validate_system

STRATEGIES = ("chain", "coding")


def check_levels(levels):
    if isinstance(levels, bool) or not isinstance(levels, (int, np.integer)) or levels < 1:
        raise MatchboxError("BAD_LEVELS", f"levels must be a positive integer, got {levels!r}")
    return int(levels)


def check_strategy(strategy):
    if strategy not in STRATEGIES:
        raise MatchboxError("BAD_STRATEGY", f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    return strategy


def check_scan_depth(scan_depth):
    if scan_depth is None:
        return None
    if isinstance(scan_depth, bool) or not isinstance(scan_depth, (int, np.integer)) or scan_depth < 1:
        raise MatchboxError("BAD_SCAN_DEPTH", f"scan depth must be a positive integer, got {scan_depth!r}")
    return int(scan_depth)


def check_spec(X):
    """Load and validate a system spec; raises REJECT_* or BAD_SPEC."""
    spec = load_spec(X)
    validate_system(spec)
    return spec


def check_positions(X):
    """Orbit positions as a 1-d array of nonnegative integers."""
    arr = np.asarray(X)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise MatchboxError("BAD_INPUT", f"expected a 1-d array of positions, got shape {arr.shape}")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.issubdtype(arr.dtype, np.number):
            raise MatchboxError("BAD_INPUT", "positions must be integers")
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise MatchboxError("BAD_INPUT", "positions must be integers")
        arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise MatchboxError("BAD_INPUT", "positions must be nonnegative")
    return arr.astype(np.int64)


def check_fitted(estimator, attr="inverse_system_"):
    if not hasattr(estimator, attr):
        raise NotFittedError(f"{type(estimator).__name__} is not fitted yet; call fit first")
