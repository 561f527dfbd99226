import numpy as np
import pytest

from trscat.recipes import figure1, figure2, figure3, figure5, merge_tables
from trscat.scattering import ScanTable


def test_merge_tables_sorts_and_dedups():
    a = ScanTable(np.array([1.0, 3.0]), np.array([1, 3j]), np.array([0, 0]))
    b = ScanTable(np.array([2.0, 3.0]), np.array([2, 9]), np.array([0, 0]))
    m = merge_tables(a, b)
    assert list(m.E) == [1.0, 2.0, 3.0] and m.R[1] == 2


def test_figure1(tmp_path):
    res = figure1(out_dir=str(tmp_path))
    near = [pk for pk in res.summary["peaks"] if abs(pk["E"] - 19.77) < 0.1]
    assert len(near) == 1 and near[0]["absT2"] > 0.99
    assert 18.0 <= res.table.E.min() and res.table.E.max() <= 21.0


def test_figure2_has_bands_and_gaps(tmp_path):
    s = figure2(out_dir=str(tmp_path)).summary
    assert s["fraction_T2_above_0.9"] > 0.2 and s["fraction_T2_below_0.1"] > 0.2


def test_figure3_resolves_narrow_peak(tmp_path):
    s = figure3(out_dir=str(tmp_path)).summary
    assert s["peak"]["absT2"] > 0.5 and abs(s["peak"]["E"] - 2.0) < 1e-3


def test_figure5_settles_to_transmission(tmp_path):
    assert figure5(out_dir=str(tmp_path)).summary["min_T2_above_60"] > 0.99
