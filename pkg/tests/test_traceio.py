import json

import numpy as np
import pytest

from phiyamabe import (
    FlowConfig,
    apply_reparam,
    build_grid,
    build_reparam,
    read_trace_csv,
    run_flow,
    write_snapshots_json,
    write_trace_csv,
    write_trace_svg,
)


@pytest.fixture(scope="module")
def trace(man_inhomog):
    grid = build_grid(man_inhomog, 24, 0.1, 1.0)
    cfg = FlowConfig(variant="cyf_plus", t_end=0.5, cfl_safety=0.8,
                     record_every=50, snapshot_every=2)
    return run_flow(man_inhomog, grid, cfg, np.ones(grid.n))


class TestCsv:
    def test_header_is_stable(self, trace, tmp_path):
        path = tmp_path / "trace.csv"
        write_trace_csv(trace, path)
        header = path.read_text().splitlines()[0]
        assert header == "t,S_sup,S_inf,gap,u_min,u_max,dtu_norm"

    def test_roundtrip_exact(self, trace, tmp_path):
        path = tmp_path / "trace.csv"
        write_trace_csv(trace, path)
        back = read_trace_csv(path)
        np.testing.assert_array_equal(back.t, trace.t)
        np.testing.assert_array_equal(back.s_sup, trace.s_sup)
        np.testing.assert_array_equal(back.dtu_norm, trace.dtu_norm)

    def test_tau_column_for_reparametrized(self, man_inhomog, tmp_path):
        grid = build_grid(man_inhomog, 24, 0.1, 1.0)
        cfg = FlowConfig(variant="unnormalized", t_end=0.5, cfl_safety=0.8,
                         record_every=20, snapshot_every=1)
        tr = run_flow(man_inhomog, grid, cfg, np.ones(grid.n))
        ntr = apply_reparam(tr, build_reparam(tr))
        path = tmp_path / "ntrace.csv"
        write_trace_csv(ntr, path)
        header = path.read_text().splitlines()[0]
        assert header == "tau,S_sup,S_inf,gap,u_min,u_max,dtu_norm"
        assert read_trace_csv(path).time_label == "tau"

    def test_rejects_malformed(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            read_trace_csv(path)


class TestJson:
    def test_snapshot_schema(self, trace, tmp_path):
        path = tmp_path / "snaps.json"
        write_snapshots_json(trace, path, convergence={"converged": False})
        doc = json.loads(path.read_text())
        assert doc["variant"] == "cyf_plus"
        assert doc["manifold"] == {"m": 6, "b": 2, "scalY": -4.0, "scalZ": -3.0}
        assert len(doc["x"]) == 25
        assert len(doc["times"]) == len(doc["u"])
        assert len(doc["u"][0]) == 25
        assert doc["convergence"] == {"converged": False}
        assert doc["c1"] == pytest.approx(0.6)


class TestSvg:
    def test_plot_written(self, trace, tmp_path):
        path = tmp_path / "plot.svg"
        write_trace_svg(trace, path)
        text = path.read_text()
        assert text.startswith("<svg")
        assert "polyline" in text
        assert "log10 gap" in text
