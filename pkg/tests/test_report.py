import csv

import numpy as np
import pytest

from sextic_pinn.network import MlpParams, NetworkConfig, init
from sextic_pinn.problem import MissingExactSolutionError, builtin, make_problem
from sextic_pinn.report import (
    HISTORY_HEADER,
    TABLE_HEADER,
    ErrorTable,
    ReportIOError,
    TableRow,
    build_table,
    export_csv,
    fd_check_derivatives,
    read_history_csv,
    read_table_csv,
    table_grid,
    write_history_csv,
    write_table_csv,
)
from sextic_pinn.trainer import TrainRecord

EX1_ANALYTICAL = [1.00000000, 0.99465383, 0.97712221, 0.94490117, 0.89509482, 0.82436064,
                  0.72884752, 0.60412581, 0.44510819, 0.24596031, 0.00000000]
EX2_ANALYTICAL = [1.00000000, 1.10517092, 1.22140276, 1.34985881, 1.49182470, 1.64872127,
                  1.82211880, 2.01375271, 2.22554093, 2.45960311, 2.71828183]


def exact_net(slope=2.0, icpt=1.0):
    cfg = NetworkConfig(hidden_sizes=(1,), hidden_activation="linear")
    return MlpParams(cfg, [[[slope]], [[1.0]]], [[icpt], [0.0]])


def line_problem():
    return make_problem(
        "line", (0, 1), lambda x, d: d[:, 6], lambda x, d: np.eye(7)[6][None].repeat(len(x), 0),
        [], exact=lambda x, k: 2 * x + 1 if k == 0 else (np.full_like(x, 2.0) if k == 1 else 0 * x))


def test_table_grid():
    np.testing.assert_allclose(table_grid(), np.arange(11) / 10, atol=1e-15)
    with pytest.raises(ValueError):
        table_grid(1)


@pytest.mark.parametrize("name,want", [("example1", EX1_ANALYTICAL), ("example2", EX2_ANALYTICAL)])
def test_analytical_column_matches_reference_digits(name, want):
    table = build_table(init(NetworkConfig()), builtin(name))
    assert [f"{v:.8f}" for v in table.column("analytical")] == [f"{v:.8f}" for v in want]


def test_table_of_exact_network_has_zero_error():
    table = build_table(exact_net(), line_problem(), [0.3, 0.0, 1.0])
    assert table.column("x").tolist() == [0.0, 0.3, 1.0]
    assert table.max_abs_error == 0.0 and table.mean_squared_error == 0.0
    assert "max abs error 0.00000000" in table.format()


def test_missing_exact_solution():
    prob = make_problem("free", (0, 1), lambda x, d: d[:, 6],
                        lambda x, d: np.eye(7)[6][None].repeat(len(x), 0), [])
    with pytest.raises(MissingExactSolutionError):
        build_table(exact_net(), prob)


def test_table_csv_round_trip(tmp_path):
    table = build_table(init(NetworkConfig(seed=1)), builtin("example2"))
    path = tmp_path / "t.csv"
    write_table_csv(table, path)
    text = path.read_text()
    assert text.splitlines()[0] == ",".join(TABLE_HEADER)
    assert "\r" not in text
    back = read_table_csv(path)
    assert len(back.rows) == 11
    for a, b in zip(table.rows, back.rows):
        np.testing.assert_allclose(a, b, atol=5e-9)


def test_history_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    hist = [TrainRecord(e, *map(float, rng.lognormal(size=3))) for e in (0, 100, 200)]
    path = tmp_path / "h.csv"
    export_csv(hist, path)
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == HISTORY_HEADER and rows[2][0] == "100"
    assert read_history_csv(path) == hist


def test_export_dispatches_on_table(tmp_path):
    table = ErrorTable((TableRow(0.0, 1.0, 1.5, 0.5),))
    export_csv(table, tmp_path / "x.csv")
    assert (tmp_path / "x.csv").read_text() == "x,analytical,numerical,abs_error\n" \
        "0.00000000,1.00000000,1.50000000,0.50000000\n"


def test_unwritable_path_names_the_path(tmp_path):
    bad = tmp_path / "missing-dir" / "t.csv"
    with pytest.raises(ReportIOError, match="missing-dir"):
        write_history_csv([], bad)
    with pytest.raises(ReportIOError, match="nothere"):
        read_table_csv(tmp_path / "nothere.csv")


def test_wrong_header_rejected(tmp_path):
    p = tmp_path / "h.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError, match="header"):
        read_history_csv(p)


@pytest.mark.parametrize("seed", range(4))
def test_fd_check_derivatives_random_networks(seed):
    xs = np.random.default_rng(seed).uniform(0, 1, 10)
    err = fd_check_derivatives(init(NetworkConfig(seed=seed)), xs)
    assert err.shape == (6,)
    assert err.max() <= 1e-6


def test_fd_check_derivatives_degenerate_networks():
    xs = np.linspace(0, 1, 5)
    # linear network: y' = 2 exactly, higher orders vanish and fall back to absolute error
    assert fd_check_derivatives(exact_net(), xs).max() <= 1e-9
    p = init(NetworkConfig())
    assert fd_check_derivatives(p.with_flat(np.zeros(p.size)), xs).max() == 0.0
    with pytest.raises(ValueError):
        fd_check_derivatives(p, xs, max_order=7)
