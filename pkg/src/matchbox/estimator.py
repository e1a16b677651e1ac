"""scikit-learn style wrapper: fit a presentation, transform orbit positions to threads."""
import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .errors import MatchboxError
from .pipeline import run
from .validation import check_fitted, check_levels, check_positions, check_scan_depth, check_spec, check_strategy


class InverseLimitPresentation(TransformerMixin, BaseEstimator):
    """Inverse-limit presentation of a one-dimensional tiling or odometer system.

    ``fit`` takes a system spec (path, shipped name, dict or spec object) and
    builds the approximants and bonding maps. ``transform`` maps orbit
    positions of the basepoint to their thread of cell ids, one column per
    level, coarse to fine.

    ``initial_V`` is a rendered clopen set such as ``"{[aa]}"``; it is used
    by the coding strategy only.
    """

    def __init__(self, levels=3, strategy="chain", initial_V=None, scan_depth=None, seed=0):
        self.levels = levels
        self.strategy = strategy
        self.initial_V = initial_V
        self.scan_depth = scan_depth
        self.seed = seed

    def fit(self, X, y=None):
        levels = check_levels(self.levels)
        strategy = check_strategy(self.strategy)
        scan_depth = check_scan_depth(self.scan_depth)
        spec = check_spec(X)
        res = run(spec, levels, strategy, scan_depth=scan_depth, seed=self.seed, initial=self.initial_V)
        if res.inverse is None:
            raise MatchboxError("UNSUPPORTED", "the estimator handles one-dimensional systems")
        inv = res.inverse
        self.system_ = res.system
        self.hierarchy_ = res.hierarchy
        self.inverse_system_ = inv
        self.matrices_ = [b.matrix.tolist() for b in inv.bondings()]
        self.h1_rank_ = res.h1.rank if res.h1 is not None else None
        self.thread_report_ = res.report
        self.n_cells_ = [t.n_cells for t in inv.towers]
        self.n_features_out_ = len(inv.levels)
        return self

    def transform(self, X):
        check_fitted(self)
        pos = check_positions(X)
        inv = self.inverse_system_
        if pos.size == 0:
            return np.zeros((0, len(inv.levels)), dtype=np.int64)
        horizon = int(pos.max()) + 1
        cols = []
        for i, lv in enumerate(inv.levels):
            j = inv.journey(lv)
            if len(j) < horizon:
                j = inv.towers[i].journey(horizon)
            cols.append(j[pos])
        out = np.stack(cols, axis=1).astype(np.int64)
        if (out < 0).any():
            raise MatchboxError("DEPTH_INSUFFICIENT", "some positions fall outside the sampled orbit")
        return out

    def get_feature_names_out(self, input_features=None):
        check_fitted(self)
        return np.array([f"level_{lv}" for lv in self.inverse_system_.levels], dtype=object)
