import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from matchbox import InverseLimitPresentation
from matchbox.errors import MatchboxError


def test_fit_fibonacci():
    est = InverseLimitPresentation(levels=3).fit("fibonacci")
    assert est.matrices_ == [[[1, 1], [1, 0]]] * 2
    assert est.h1_rank_ == 2
    assert est.thread_report_.passed
    assert est.n_features_out_ == 3
    assert list(est.get_feature_names_out()) == ["level_1", "level_2", "level_3"]


def test_transform_threads_are_compatible():
    est = InverseLimitPresentation(levels=3).fit("fibonacci")
    pos = np.arange(0, 400, 7)
    out = est.transform(pos)
    assert out.shape == (len(pos), 3)
    inv = est.inverse_system_
    for i, lv in enumerate(inv.levels):
        # coarser columns are the bonding images of the finest one
        assert (inv.cell_map(3, lv)[out[:, 2]] == out[:, i]).all()
    # far positions extend the journey
    far = est.transform([10 ** 5])
    assert far.shape == (1, 3) and (far >= 0).all()


def test_dyadic_transform_oracle():
    est = InverseLimitPresentation(levels=3).fit("dyadic")
    out = est.transform(np.arange(64))
    # level l has 2^l cells, visited cyclically along the orbit
    for i, n in enumerate((2, 4, 8)):
        col = out[:, i]
        assert len(set(col.tolist())) == n
        assert all(col[p] == col[p % n] for p in range(64))


def test_coding_strategy_initial_set():
    est = InverseLimitPresentation(levels=2, strategy="coding", initial_V="{[ab]}").fit("fibonacci")
    assert est.hierarchy_[0].V.render() == "{[ab]}"
    with pytest.raises(MatchboxError) as e:
        InverseLimitPresentation(levels=2, strategy="coding", initial_V="{[aa]}").fit("fibonacci")
    assert e.value.code == "BASEPOINT_OUTSIDE"


def test_not_fitted_and_clone():
    est = InverseLimitPresentation(levels=2, seed=4)
    with pytest.raises(NotFittedError):
        est.transform([0])
    c = clone(est)
    assert c.get_params() == est.get_params()
    assert not hasattr(c, "system_")


@pytest.mark.parametrize("params,code", [({"levels": 0}, "BAD_LEVELS"), ({"strategy": "x"}, "BAD_STRATEGY"),
                                         ({"scan_depth": -1}, "BAD_SCAN_DEPTH")])
def test_bad_params(params, code):
    with pytest.raises(MatchboxError) as e:
        InverseLimitPresentation(**params).fit("dyadic")
    assert e.value.code == code


def test_bad_positions_and_d2():
    est = InverseLimitPresentation(levels=2).fit("dyadic")
    for bad in ([-1], [[0, 1]], ["x"]):
        with pytest.raises(MatchboxError) as e:
            est.transform(bad)
        assert e.value.code == "BAD_INPUT"
    assert est.transform([]).shape == (0, 2)
    with pytest.raises(MatchboxError) as e:
        InverseLimitPresentation(levels=2).fit("z2")
    assert e.value.code == "UNSUPPORTED"
