import csv
import math

import numpy as np
import pytest

from llgsp.grid import Grid
from llgsp.harness import (
    ConvergenceRow,
    ConvergenceTable,
    NormTable,
    StudyAborted,
    accuracy_row,
    coupled_levels,
    estimate_order,
    fit_order,
    is_monotone_decreasing,
    max_relative_gap,
    pairwise_orders,
    run_coupled_study_3d,
    run_norm_study,
    run_temporal_study_1d,
    write_table_csv,
)
from llgsp.solvers import SolverConfig

from reference_data import (
    COUPLED_3D,
    COUPLED_3D_ORDERS_H,
    COUPLED_3D_ORDERS_K,
    SPATIAL_1D,
    SPATIAL_1D_ORDERS,
    TEMPORAL_1D,
    TEMPORAL_1D_ORDERS,
)

COLUMNS = ("err_linf", "err_l2", "err_h1")


def rows_1d(data, parameter):
    return [ConvergenceRow(k=p if parameter == "k" else 1e-6, h=p if parameter == "h" else 5e-4,
                           err_linf=a, err_l2=b, err_h1=c) for p, a, b, c in data]


@pytest.mark.parametrize("data,parameter,orders", [
    (TEMPORAL_1D, "k", TEMPORAL_1D_ORDERS),
    (SPATIAL_1D, "h", SPATIAL_1D_ORDERS),
])
def test_order_fit_reproduces_reference_orders(data, parameter, orders):
    rows = rows_1d(data, parameter)
    for col, expected in zip(COLUMNS, orders):
        assert estimate_order(rows, col, parameter) == pytest.approx(expected, abs=0.02)


def test_order_fit_reproduces_coupled_orders():
    rows = [ConvergenceRow(0.1 / s, 1 / n, a, b, c) for s, n, a, b, c in COUPLED_3D]
    for col, ek, eh in zip(COLUMNS, COUPLED_3D_ORDERS_K, COUPLED_3D_ORDERS_H):
        assert estimate_order(rows, col, "k") == pytest.approx(ek, abs=0.02)
        assert estimate_order(rows, col, "h") == pytest.approx(eh, abs=0.02)


def test_fit_order_exact_power_law():
    p = np.array([0.1, 0.05, 0.025, 0.0125])
    assert fit_order(p, 3.0 * p ** 1.5) == pytest.approx(1.5, abs=1e-12)
    np.testing.assert_allclose(pairwise_orders(p, 2 * p ** 2), [2.0, 2.0, 2.0], atol=1e-12)


def test_fit_order_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_order([0.1], [0.2])
    with pytest.raises(ValueError):
        fit_order([0.1, 0.05], [0.0, 1e-3])
    with pytest.raises(ValueError):
        estimate_order(rows_1d(TEMPORAL_1D, "k"), "err_max")
    with pytest.raises(ValueError):
        estimate_order(rows_1d(TEMPORAL_1D, "k"), "err_l2", "t")


def test_helpers():
    assert is_monotone_decreasing([5, 4, 3])
    assert is_monotone_decreasing([5, 6, 3], allowed_violations=1)
    assert not is_monotone_decreasing([5, 6, 7], allowed_violations=1)
    assert max_relative_gap(2.0, 6.0) == 3.0
    assert max_relative_gap(0.0, 1.0) == math.inf


def test_coupled_levels():
    assert coupled_levels() == ((10, 10), (20, 40), (24, 57), (28, 78))
    assert coupled_levels(include_finest=True)[-1] == (32, 102)


def small_table():
    return run_temporal_study_1d(ks=(2e-2, 1e-2, 5e-3), n=200)


def test_csv_layout_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_table_csv(small_table(), a)
    write_table_csv(small_table(), b)
    assert a.read_bytes() == b.read_bytes()
    rows = list(csv.reader(a.open()))
    assert rows[0] == ["k", "h", "err_linf", "err_l2", "err_h1"]
    assert len(rows) == 5
    assert rows[-1][0] == "order" and rows[-1][1] == ""
    assert float(rows[1][0]) == 2e-2 and float(rows[1][1]) == 1 / 200
    table = small_table()
    assert float(rows[-1][3]) == pytest.approx(estimate_order(table.rows, "err_l2"), rel=1e-14)


def test_csv_with_diagnostics_columns(tmp_path):
    path = tmp_path / "d.csv"
    table = run_temporal_study_1d(ks=(2e-2, 1e-2), n=50, diagnostics=True)
    write_table_csv(table, path, diagnostics=True)
    rows = list(csv.reader(path.open()))
    assert rows[0][-2:] == ["iterations_max", "residual_max"]
    assert int(rows[1][5]) == 1
    assert float(rows[1][6]) <= 1e-10


def test_csv_needs_two_rows(tmp_path):
    table = ConvergenceTable([ConvergenceRow(1e-2, 1e-2, 1.0, 1.0, 1.0)])
    with pytest.raises(ValueError):
        write_table_csv(table, tmp_path / "x.csv")


def test_coupled_table_has_two_order_rows(tmp_path):
    table = run_coupled_study_3d(levels=((4, 2), (6, 4)))
    assert table.order_parameters == ("k", "h")
    path = tmp_path / "c.csv"
    write_table_csv(table, path)
    labels = [r[0] for r in csv.reader(path.open())]
    assert labels[-2:] == ["order_k", "order_h"]
    assert table.rows[0].k == pytest.approx(0.05) and table.rows[1].h == pytest.approx(1 / 6)


def test_norm_table_csv_and_subsampling(tmp_path):
    table = run_norm_study(dim=1, ks=(2e-2, 1e-2), n=100)
    assert isinstance(table, NormTable)
    assert all(r.max_unit_deviation <= 1e-13 for r in table.rows)
    path = tmp_path / "n.csv"
    write_table_csv(table, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["k", "h", "max_unit_deviation"]
    assert len(rows) == 3
    sparse = run_norm_study(dim=1, ks=(1e-2,), n=100, record_every=5)
    assert sparse.rows[0].max_unit_deviation <= table.rows[1].max_unit_deviation


def test_norm_study_3d_small():
    table = run_norm_study(dim=3, levels=((5, 4), (6, 5)))
    assert [r.h for r in table.rows] == pytest.approx([0.2, 1 / 6])
    assert all(r.max_unit_deviation <= 1e-10 for r in table.rows)
    with pytest.raises(ValueError):
        run_norm_study(dim=2)


def test_accuracy_row_first_order_behaviour():
    grid = Grid((200,))
    coarse = accuracy_row(grid, 2e-2)
    fine = accuracy_row(grid, 1e-2)
    assert 1.6 < coarse.err_l2 / fine.err_l2 < 2.4
    assert coarse.err_linf <= coarse.err_h1


def test_failed_row_keeps_partial_results():
    cfg = SolverConfig(method="gmres", max_iterations=1, restart=1)
    with pytest.raises(StudyAborted) as info:
        run_coupled_study_3d(levels=((4, 2), (6, 4)), solver=cfg)
    assert info.value.partial.rows == []
    assert info.value.step == 1
