import numpy as np
import pytest

from econkg.coref import CanonicalMap
from econkg.forecast.design import (
    ForecastTask,
    build_design_matrix,
    kg_feature_set,
    load_alias_map,
)
from econkg.forecast.panel import PanelError, TimeSeriesPanel, load_panel, month_ordinal
from econkg.kgraph import build_graph
from econkg.triples import RdfTriple, dedup_triples


def month_range(start: str, count: int) -> list[str]:
    base = month_ordinal(start)
    return [f"{(base + i) // 12:04d}-{(base + i) % 12 + 1:02d}" for i in range(count)]


def write_panel(path, months, columns):
    names = list(columns)
    lines = ["month," + ",".join(names)]
    for i, m in enumerate(months):
        cells = []
        for name in names:
            v = columns[name][i]
            cells.append("" if v is None or (isinstance(v, float) and np.isnan(v)) else str(v))
        lines.append(m + "," + ",".join(cells))
    path.write_text("\n".join(lines) + "\n")


class TestLoadPanel:
    def test_study_period_length(self, tmp_path):
        months = month_range("1996-04", 279)
        assert months[-1] == "2019-06"
        columns = {f"s{i}": list(range(279)) for i in range(12)}
        path = tmp_path / "panel.csv"
        write_panel(path, months, columns)
        panel = load_panel(path)
        assert panel.n_months == 279
        assert len(panel.columns) == 12

    def test_minimal_panel(self, tmp_path):
        path = tmp_path / "p.csv"
        write_panel(path, ["2000-01", "2000-02"], {"x": [1.0, 2.0]})
        panel = load_panel(path)
        assert panel.n_months == 2

    def test_month_gap_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        write_panel(path, ["1996-04", "1996-06"], {"x": [1.0, 2.0]})
        with pytest.raises(PanelError, match="gap"):
            load_panel(path)

    def test_duplicate_month_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        write_panel(path, ["1996-04", "1996-04"], {"x": [1.0, 2.0]})
        with pytest.raises(PanelError, match="duplicate"):
            load_panel(path)

    def test_unordered_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        write_panel(path, ["1996-05", "1996-04"], {"x": [1.0, 2.0]})
        with pytest.raises(PanelError, match="order"):
            load_panel(path)

    def test_bad_month_format(self, tmp_path):
        path = tmp_path / "p.csv"
        write_panel(path, ["1996-04-15", "1996-05"], {"x": [1.0, 2.0]})
        with pytest.raises(PanelError, match="YYYY-MM"):
            load_panel(path)

    def test_missing_values_flagged(self, tmp_path):
        path = tmp_path / "p.csv"
        write_panel(path, month_range("2000-01", 3), {"x": [1.0, None, 3.0]})
        panel = load_panel(path)
        assert panel.missing_months("x") == ["2000-02"]
        assert not panel.fully_observed("x")

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("month,x\n2000-01,abc\n")
        with pytest.raises(PanelError, match="non-numeric"):
            load_panel(path)


class TestDesignMatrix:
    def make_panel(self, n, columns=None):
        months = month_range("2000-01", n)
        columns = columns or {"x": np.arange(n, dtype=float),
                              "y": np.arange(n, dtype=float) * 10}
        return TimeSeriesPanel(months=months, columns={
            k: np.asarray(v, dtype=float) for k, v in columns.items()})

    def test_eight_months_one_feature(self):
        panel = self.make_panel(8)
        design = build_design_matrix(panel, ForecastTask("y", 1, ("x",)))
        assert design.X.shape == (4, 4)
        # hand-enumerated usable origins: months 4..7 of 8 (1-based)
        assert design.row_months == ["2000-04", "2000-05", "2000-06", "2000-07"]
        np.testing.assert_array_equal(design.X[0], [0.0, 1.0, 2.0, 3.0])
        np.testing.assert_array_equal(design.y, [40.0, 50.0, 60.0, 70.0])

    def test_horizon_offset_identity(self):
        panel = self.make_panel(40)
        d1 = build_design_matrix(panel, ForecastTask("y", 1, ("x",)))
        d12 = build_design_matrix(panel, ForecastTask("y", 12, ("x",)))
        assert d1.n_rows - d12.n_rows == 11

    def test_missing_value_removes_touched_rows(self):
        n = 20
        values = np.arange(n, dtype=float)
        values[10] = np.nan
        panel = self.make_panel(n, {"x": values, "y": np.arange(n, dtype=float)})
        task = ForecastTask("y", 2, ("x",))
        design = build_design_matrix(panel, task)

        # brute-force row filter oracle
        expected = []
        for t in range(3, n - 2):
            window = values[t - 3 : t + 1]
            if np.all(np.isfinite(window)):
                expected.append(panel.months[t])
        assert design.row_months == expected
        assert all("2000-11" != m or False for m in design.row_months)

    def test_column_order_and_no_leakage(self):
        panel = self.make_panel(12)
        design = build_design_matrix(panel, ForecastTask("y", 3, ("x", "y")))
        assert design.columns == [
            "x@t-3", "x@t-2", "x@t-1", "x@t-0",
            "y@t-3", "y@t-2", "y@t-1", "y@t-0",
        ]
        assert all(offset <= 0 for offset in design.lag_offsets)
        # X entries equal the panel value at t+offset for every row
        for i, month in enumerate(design.row_months):
            t = panel.months.index(month)
            for j, (col, offset) in enumerate(zip(design.columns, design.lag_offsets)):
                name = col.split("@", 1)[0]
                assert design.X[i, j] == panel.column(name)[t + offset]

    def test_zero_usable_rows(self):
        panel = self.make_panel(5)
        with pytest.raises(PanelError, match="no usable rows"):
            build_design_matrix(panel, ForecastTask("y", 12, ("x",)))

    def test_unknown_column(self):
        panel = self.make_panel(10)
        with pytest.raises(PanelError, match="not in panel"):
            build_design_matrix(panel, ForecastTask("y", 1, ("z",)))

    def test_horizon_bounds(self):
        with pytest.raises(ValueError):
            ForecastTask("y", 0, ("x",))
        with pytest.raises(ValueError):
            ForecastTask("y", 13, ("x",))


class TestKgFeatureSet:
    def make_graph(self, links):
        triples = [RdfTriple(a, "kw", "increase", b) for a, b in links]
        return build_graph(dedup_triples(triples, CanonicalMap.identity()))

    def make_panel(self, columns):
        n = 24
        months = month_range("2010-01", n)
        return TimeSeriesPanel(months=months, columns={
            k: np.asarray(v, dtype=float) for k, v in columns.items()})

    def test_availability_filter(self):
        graph = self.make_graph([
            ("alt one", "target"), ("alt two", "target"),
            ("alt three", "target"), ("alt four", "target"),
        ])
        with_gap = [1.0] * 24
        with_gap[3] = np.nan
        panel = self.make_panel({
            "TGT": np.arange(24), "A1": np.ones(24), "A2": np.ones(24) * 2,
            "A3": with_gap,
        })
        name_map = {
            "target": ["TGT"], "alt one": ["A1"], "alt two": ["A2"],
            "alt three": ["A3"], "alt four": ["A4"],  # A4 not in panel
        }
        got = kg_feature_set(graph, "target", panel, name_map, hops=1)
        assert got == ["TGT", "A1", "A2"]  # A3 has a gap, A4 missing

    def test_isolated_target_keeps_own_history(self):
        graph = build_graph([], centers=["target"])
        panel = self.make_panel({"TGT": np.arange(24)})
        got = kg_feature_set(graph, "target", panel, {"target": ["TGT"]})
        assert got == ["TGT"]

    def test_unmapped_target_errors(self):
        graph = build_graph([], centers=["target"])
        panel = self.make_panel({"TGT": np.arange(24)})
        with pytest.raises(PanelError, match="maps to no panel column"):
            kg_feature_set(graph, "target", panel, {})

    def test_hop_expansion(self):
        graph = self.make_graph([("far", "near"), ("near", "target")])
        panel = self.make_panel({
            "TGT": np.arange(24), "NEAR": np.ones(24), "FAR": np.ones(24)})
        name_map = {"target": ["TGT"], "near": ["NEAR"], "far": ["FAR"]}
        assert kg_feature_set(graph, "target", panel, name_map, hops=1) == ["TGT", "NEAR"]
        assert kg_feature_set(graph, "target", panel, name_map, hops=2) == [
            "TGT", "NEAR", "FAR"]


def test_load_alias_map(tmp_path):
    path = tmp_path / "aliases.csv"
    path.write_text("entity,column\ninflation,CPI\ninflation,CPI_alt\nGDP,RGDP\n")
    mapping = load_alias_map(path)
    assert mapping == {"inflation": ["CPI", "CPI_alt"], "GDP": ["RGDP"]}
