# Directory: parallel-ist/tests/test_bench.py
"""
Test suite for the benchmark service, metrics output, self-test and CLI
"""

import io

import pandas as pd
import pytest
from rich.console import Console

import main
from models.bench_models import CSV_COLUMNS, DistributionKind, OpMix, RunSpec, SelftestReport
from parallel_ist.errors import BenchPhaseError
from services.bench_service import BenchService, thread_sweep
from services.selftest_service import SelftestService
from utils.metrics import MetricsCollector, render_table, write_csv

CSV_HEADER = "impl,n,batch_size,threads,alpha,seed,phase,mean_s,stddev_s,speedup"


def tiny_spec(**overrides):
    values = dict(n=2000, batch_size=300, batches=2, range_max=10**5, threads=2, seed=9, repeats=2)
    values.update(overrides)
    return RunSpec(**values)


class TestMetricsCollector:
    """Test phase aggregation and output formats"""

    def test_mean_stddev_and_speedup(self):
        metrics = MetricsCollector()
        for duration in (2.0, 4.0):
            metrics.store_phase("ist", 1, "execute", duration)
        for duration in (1.0, 1.0):
            metrics.store_phase("ist", 4, "execute", duration)
        rows = {row.threads: row for row in metrics.get_rows(tiny_spec())}
        assert rows[1].mean_s == 3.0
        assert rows[1].stddev_s == 1.0
        assert rows[1].speedup == 1.0
        assert rows[4].speedup == 3.0

    def test_zero_duration_speedup_is_one(self):
        metrics = MetricsCollector()
        metrics.store_phase("ist", 1, "prefill", 0.0)
        metrics.store_phase("ist", 2, "prefill", 0.0)
        assert [row.speedup for row in metrics.get_rows(tiny_spec())] == [1.0, 1.0]

    def test_failing_phase_is_named(self):
        metrics = MetricsCollector()
        with pytest.raises(BenchPhaseError) as excinfo:
            with metrics.timed("ist", 1, "execute"):
                raise MemoryError("no room")
        assert excinfo.value.phase == "execute"
        assert isinstance(excinfo.value.cause, MemoryError)

    def test_csv_header_is_stable(self):
        metrics = MetricsCollector()
        metrics.store_phase("ist", 1, "prefill", 0.5)
        text = write_csv(metrics.get_rows(tiny_spec()))
        lines = text.splitlines()
        assert lines[0] == CSV_HEADER
        assert lines[1].startswith("ist,2000,300,1,0.500000,9,prefill,0.500000,0.000000,1.000000")
        assert ",".join(CSV_COLUMNS) == CSV_HEADER

    def test_csv_to_path(self, tmp_path):
        metrics = MetricsCollector()
        metrics.store_phase("sortedset", 1, "execute", 0.25)
        out = tmp_path / "bench.csv"
        write_csv(metrics.get_rows(tiny_spec()), out)
        frame = pd.read_csv(out)
        assert list(frame.columns) == CSV_COLUMNS
        assert frame.loc[0, "impl"] == "sortedset"

    def test_table_render(self):
        metrics = MetricsCollector()
        metrics.store_phase("ist", 1, "prepare", 0.125)
        buffer = io.StringIO()
        table = render_table(metrics.get_rows(tiny_spec()), Console(file=buffer, width=200))
        assert table.row_count == 1
        assert "prepare" in buffer.getvalue()


class TestBenchService:
    """Test timed benchmark runs"""

    def test_zero_sizes_report_zeros(self):
        report = BenchService().run(tiny_spec(n=0, batch_size=0, threads=1))
        assert report.rows
        assert all(row.mean_s == 0.0 and row.stddev_s == 0.0 and row.speedup == 1.0 for row in report.rows)
        assert report.final_size == 0
        assert report.deterministic

    def test_rows_cover_phases_and_baseline(self):
        report = BenchService().run(tiny_spec())
        keys = {(row.impl, row.threads, row.phase) for row in report.rows}
        assert {("ist", t, p) for t in (1, 2) for p in ("prefill", "prepare", "execute")} <= keys
        assert {("sortedset", 1, "prefill"), ("sortedset", 1, "execute")} <= keys
        assert all(row.speedup == 1.0 for row in report.rows if row.threads == 1)
        assert report.deterministic

    @pytest.mark.parametrize("dist", list(DistributionKind))
    def test_same_seed_same_result(self, dist):
        spec = tiny_spec(dist=dist, mix=OpMix.MIXED)
        first, second = BenchService(baseline=False).run(spec), BenchService(baseline=False).run(spec)
        assert first.outcomes_digest == second.outcomes_digest
        assert first.dump_digest == second.dump_digest
        assert first.final_size == second.final_size

    def test_thread_sweep_agrees(self):
        reports, agree = thread_sweep(tiny_spec(repeats=1), [1, 2, 4])
        assert agree
        assert len(reports) == 3

    def test_prefill_size_matches_subset(self):
        report = BenchService(baseline=False).run(tiny_spec(batches=0, repeats=1))
        assert abs(report.prefill_size - 2000) < 300
        assert report.final_size == report.prefill_size

    def test_invalid_spec(self):
        with pytest.raises(ValueError):
            RunSpec(n=10, range_max=5)
        with pytest.raises(ValueError):
            RunSpec(threads=0)


class TestSelftestService:
    """Test individual self-test properties and the failure path"""

    def test_primitive_properties_pass(self):
        service = SelftestService("small", threads=2)
        for check in (service.check_scan, service.check_filter, service.check_rank, service.check_merge):
            assert check() is None

    def test_structure_properties_pass(self):
        service = SelftestService("small", threads=2)
        assert service.check_ideal_structure() is None
        assert service.check_structural_sweep() is None

    def test_corrupted_tree_reported(self):
        service = SelftestService("small", threads=2, corrupt=True)
        result = service._run_property("structural sweep", service.check_structural_sweep)
        assert not result.passed
        assert "s_live consistency" in result.detail

    def test_unknown_scale(self):
        with pytest.raises(ValueError):
            SelftestService("medium")


class TestCommandLine:
    """Test the CLI entry point"""

    def test_bench_csv_to_stdout(self, capsys):
        code = main.main(["bench", "--n", "500", "--batch-size", "100", "--range-max", "20000",
                          "--threads", "2", "--repeats", "1", "--format", "csv"])
        assert code == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0] == CSV_HEADER

    def test_bench_table_to_file(self, tmp_path):
        out = tmp_path / "table.txt"
        code = main.main(["bench", "--n", "0", "--batch-size", "0", "--threads", "1", "--repeats", "1",
                          "--out", str(out)])
        assert code == 0
        assert "prefill" in out.read_text(encoding="utf-8")

    def test_threads_env_used_only_without_flag(self, monkeypatch):
        monkeypatch.setenv("IST_THREADS", "3")
        assert main.resolve_threads(None) == 3
        assert main.resolve_threads(2) == 2
        monkeypatch.delenv("IST_THREADS")
        assert main.resolve_threads(None) == 1

    def test_invalid_spec_exits_nonzero(self, capsys):
        code = main.main(["bench", "--n", "100", "--range-max", "10", "--repeats", "1"])
        assert code == 2
        assert "error" in capsys.readouterr().err

    def test_selftest_corrupt_exits_nonzero(self, monkeypatch, capsys):
        """Only the structural sweep runs; it must fail and be named"""
        monkeypatch.setattr(SelftestService, "run", _structural_sweep_only)
        code = main.main(["selftest", "--scale", "small", "--threads", "2", "--corrupt"])
        assert code == 1
        assert "structural sweep" in capsys.readouterr().err

    @pytest.mark.slow
    def test_selftest_small_passes(self):
        assert main.main(["selftest", "--scale", "small"]) == 0


def _structural_sweep_only(self):
    report = SelftestReport(scale=self.scale_name)
    report.results.append(self._run_property("structural sweep", self.check_structural_sweep))
    return report
